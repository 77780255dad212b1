//! Pinned numerical tolerances.
//!
//! Every threshold used by the library and its verification suites lives
//! here. Integer and rational paths use none of these: their contracts are
//! exact.

/// Normalization and symmetry identities on pair distributions.
///
/// The closed-form entries are two trig evaluations away from exact, so
/// anything beyond a few ulps signals a real defect.
pub const PROB_IDENTITY: f64 = 1e-12;

/// Residual limit under which the dependent rows of the reduced linear
/// system count as zero for marginals produced by genuine distributions.
pub const REDUCTION_RESIDUAL: f64 = 1e-10;

/// Residual above which the marginal vector is rejected as inconsistent
/// (no triple distribution, signed or not, can reproduce it).
pub const INCONSISTENCY_LIMIT: f64 = 1e-6;

/// Margin classification band for violation regions on float grids.
///
/// The inequalities are non-strict, so `|margin| <= VIOLATION_BAND` is
/// treated as a boundary cell: satisfied for pass/fail purposes, excluded
/// from set comparisons.
pub const VIOLATION_BAND: f64 = 1e-9;

/// Slack when deciding whether a feasibility interval is nonempty and
/// whether a triple-distribution entry counts as negative.
pub const INTERVAL_SLACK: f64 = 1e-12;
