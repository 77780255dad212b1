//! Three-setting Bell/Wigner inequality analysis over strict probability
//! theory.
//!
//! The crate models an idealized two-particle experiment with three
//! apparatus orientations. Pair outcomes are `±1`-valued with closed-form
//! joint probabilities in the angle difference; from those it derives
//! inequality margins, reconstructs candidate triple joint distributions
//! from the pairwise marginals (exposing negative quasi-probabilities),
//! simulates counting experiments with exact integer estimator checks, and
//! extends the outcome set to `{-1, 0, +1}` to model missed detections.
//!
//! Modules map onto the pipeline:
//!
//! * [`quantum`] — pair probabilities, marginals, conditionals,
//!   expectations, and finite hidden-state models.
//! * [`inequality`] — Wigner and Bell margins, the generalized `|Q|`
//!   inequality, and violation-region scans over angle grids.
//! * [`feasibility`] — the 12×8 linear system tying triple joint
//!   probabilities to pairwise marginals, its rank-7 solution family, and
//!   the feasibility interval of the free parameter.
//! * [`simulation`] — seeded trial simulation, count tables, and the
//!   estimator-level inequality that holds in exact integer arithmetic.
//! * [`extended`] — the three-valued detection model, composition from
//!   conditionals, and exhaustive enumeration of discretized distributions.

pub mod extended;
pub mod feasibility;
pub mod fmt;
pub mod inequality;
pub mod quantum;
pub mod simulation;
pub mod tol;

mod error;

pub use error::{Error, Result};

/// Exact arithmetic scalar used wherever the contracts demand identities
/// rather than tolerances (weights, count ratios, composed distributions).
///
/// `i128` keeps every quantity in range: counts are capped at 2^48, so the
/// signed combinations and cross products stay far below overflow.
pub type Rational = num_rational::Ratio<i128>;

/// Shorthand for an exact rational from a numerator/denominator pair.
pub fn ratio(num: i128, den: i128) -> Rational {
    Rational::new(num, den)
}
