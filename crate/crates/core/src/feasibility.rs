//! Reconstruction of triple joint probabilities from pairwise marginals.
//!
//! The twelve marginal constraints `A·q = B` relate the eight joint
//! probabilities `q` over `{-1,+1}³` to the three pair distributions. The
//! coefficient matrix has rank 7, so one probability stays free; the
//! module exposes the one-parameter solution family in `t = q(+,+,+)`,
//! the interval of `t` for which all eight entries are nonnegative, and a
//! representative (quasi-)distribution.
//!
//! Everything is available in `f64` and, for rational marginal vectors, in
//! exact arithmetic.

use num_traits::{Signed, Zero};

use crate::quantum::{PairDistribution, Sign};
use crate::{tol, Error, Rational, Result};

/// Incidence matrix of the marginal constraints, row order matching
/// [`MarginalVector`], column order matching [`vertex_signs`].
pub const SYSTEM: [[u8; 8]; 12] = [
    [1, 1, 0, 0, 0, 0, 0, 0], // P12(-,-)
    [0, 0, 0, 0, 0, 0, 1, 1], // P12(+,+)
    [1, 0, 1, 0, 0, 0, 0, 0], // P13(-,-)
    [0, 0, 0, 0, 0, 1, 0, 1], // P13(+,+)
    [1, 0, 0, 0, 1, 0, 0, 0], // P23(-,-)
    [0, 0, 0, 1, 0, 0, 0, 1], // P23(+,+)
    [0, 0, 1, 1, 0, 0, 0, 0], // P12(-,+)
    [0, 0, 0, 0, 1, 1, 0, 0], // P12(+,-)
    [0, 1, 0, 1, 0, 0, 0, 0], // P13(-,+)
    [0, 0, 0, 0, 1, 0, 1, 0], // P13(+,-)
    [0, 1, 0, 0, 0, 1, 0, 0], // P23(-,+)
    [0, 0, 1, 0, 0, 0, 1, 0], // P23(+,-)
];

/// Left-multiplication by this matrix row-reduces the system. Stored as an
/// integer constant and cross-checked against generic elimination (see
/// [`reduced_by_elimination`]) to guard against transcription drift.
pub const REDUCTION: [[i8; 12]; 12] = [
    [0, 0, 0, 0, 1, 1, 0, -1, -1, 0, 1, 0],
    [0, 0, 0, 0, 0, -1, 0, 0, 1, 0, 0, 0],
    [0, 0, 0, 0, 0, -1, 0, 1, 1, -1, -1, 1],
    [0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, -1, 0, 1, 1, 0, -1, 0],
    [0, 0, 0, 0, 0, 1, 0, 0, -1, 0, 1, 0],
    [0, 0, 0, 0, 0, 1, 0, -1, -1, 1, 1, 0],
    [1, 0, 0, 0, -1, 0, 0, 1, 0, 0, -1, 0],
    [0, 1, 0, 0, 0, -1, 0, 1, 1, -1, -1, 0],
    [0, 0, 1, 0, -1, 0, 0, 0, 0, 1, 0, -1],
    [0, 0, 0, 1, 0, -1, 0, 0, 1, 0, -1, 0],
    [0, 0, 0, 0, 0, 0, 1, -1, -1, 1, 1, -1],
];

/// The reduced coefficient matrix `REDUCTION · SYSTEM`: identity on the
/// first seven columns, the free column `±1`, five zero rows.
pub const REDUCED: [[i8; 8]; 12] = [
    [1, 0, 0, 0, 0, 0, 0, 1],
    [0, 1, 0, 0, 0, 0, 0, -1],
    [0, 0, 1, 0, 0, 0, 0, -1],
    [0, 0, 0, 1, 0, 0, 0, 1],
    [0, 0, 0, 0, 1, 0, 0, -1],
    [0, 0, 0, 0, 0, 1, 0, 1],
    [0, 0, 0, 0, 0, 0, 1, 1],
    [0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0],
];

/// Slope of each joint probability in the free parameter: `q_i(t) =
/// c_i + slope_i · t`, with `slope_i = z_1·z_2·z_3` at vertex `i`.
pub const SLOPES: [i8; 8] = [-1, 1, 1, -1, 1, -1, -1, 1];

/// Vertex index of `(z_1, z_2, z_3)` in the fixed `(---, --+, -+-, -++,
/// +--, +-+, ++-, +++)` order.
pub fn vertex_index(z1: Sign, z2: Sign, z3: Sign) -> usize {
    z1.idx() * 4 + z2.idx() * 2 + z3.idx()
}

/// Outcome triple at a vertex index.
pub fn vertex_signs(index: usize) -> [Sign; 3] {
    let bit = |b: usize| {
        if index >> b & 1 == 1 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    };
    [bit(2), bit(1), bit(0)]
}

/// The right-hand side of the system: twelve marginal probabilities in the
/// fixed order `P12(--), P12(++), P13(--), P13(++), P23(--), P23(++),
/// P12(-+), P12(+-), P13(-+), P13(+-), P23(-+), P23(+-)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalVector<T = f64> {
    pub b: [T; 12],
}

impl MarginalVector<f64> {
    /// Assembles the marginal vector from the three pair distributions,
    /// which must carry the labels (1,2), (1,3), (2,3).
    pub fn from_pairs(
        d12: &PairDistribution,
        d13: &PairDistribution,
        d23: &PairDistribution,
    ) -> Result<MarginalVector<f64>> {
        use crate::quantum::Pair;
        for (d, expected) in [
            (d12, Pair::OneTwo),
            (d13, Pair::OneThree),
            (d23, Pair::TwoThree),
        ] {
            if d.pair() != expected {
                return Err(Error::PairMismatch {
                    expected,
                    got: d.pair(),
                });
            }
        }
        Ok(MarginalVector::from_pair_entries(
            d12.entries(),
            d13.entries(),
            d23.entries(),
        ))
    }
}

impl<T: Copy> MarginalVector<T> {
    /// Assembles the vector from raw per-pair entries, each in
    /// `[--, -+, +-, ++]` order. Used directly by the exact-rational path.
    pub fn from_pair_entries(p12: [T; 4], p13: [T; 4], p23: [T; 4]) -> MarginalVector<T> {
        MarginalVector {
            b: [
                p12[0], p12[3], p13[0], p13[3], p23[0], p23[3], p12[1], p12[2], p13[1], p13[2],
                p23[1], p23[2],
            ],
        }
    }
}

/// `build_system` makes the pair `(A, B)` explicit: the incidence matrix is
/// a fixed constant, the right-hand side comes from the distributions.
pub fn build_system(
    d12: &PairDistribution,
    d13: &PairDistribution,
    d23: &PairDistribution,
) -> Result<([[u8; 8]; 12], MarginalVector<f64>)> {
    Ok((SYSTEM, MarginalVector::from_pairs(d12, d13, d23)?))
}

/// `A · q` for a candidate (quasi-)distribution.
pub fn apply_system<T: Signed + Copy>(q: &[T; 8]) -> [T; 12] {
    let mut out = [T::zero(); 12];
    for (row, slot) in SYSTEM.iter().zip(out.iter_mut()) {
        for (coeff, value) in row.iter().zip(q.iter()) {
            if *coeff == 1 {
                *slot = *slot + *value;
            }
        }
    }
    out
}

/// Outcome of row-reducing the augmented system.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionResult<T = f64> {
    pub reduced_matrix: [[i8; 8]; 12],
    pub reduced_rhs: [T; 12],
    pub rank: usize,
    /// Largest magnitude among the five dependent rows of the reduced
    /// right-hand side; zero (up to rounding) for any marginal vector that
    /// comes from genuine pair distributions.
    pub consistency_residual: T,
}

fn reduced_rhs<T: Signed + Copy>(b: &MarginalVector<T>) -> [T; 12] {
    let mut out = [T::zero(); 12];
    for (row, slot) in REDUCTION.iter().zip(out.iter_mut()) {
        for (&coeff, &value) in row.iter().zip(b.b.iter()) {
            match coeff {
                1 => *slot = *slot + value,
                -1 => *slot = *slot - value,
                _ => {}
            }
        }
    }
    out
}

fn reduced_rank() -> usize {
    REDUCED
        .iter()
        .filter(|row| row.iter().any(|&x| x != 0))
        .count()
}

/// Row-reduces the system for a float marginal vector.
///
/// The five dependent rows of the reduced right-hand side must vanish;
/// a residual beyond [`tol::INCONSISTENCY_LIMIT`] means no signed solution
/// exists and the vector is rejected.
pub fn reduce_system(b: &MarginalVector<f64>) -> Result<ReductionResult<f64>> {
    let rhs = reduced_rhs(b);
    let residual = rhs[7..].iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if residual > tol::INCONSISTENCY_LIMIT {
        return Err(Error::InconsistentMarginals {
            residual,
            limit: tol::INCONSISTENCY_LIMIT,
        });
    }
    Ok(ReductionResult {
        reduced_matrix: REDUCED,
        reduced_rhs: rhs,
        rank: reduced_rank(),
        consistency_residual: residual,
    })
}

/// Exact-arithmetic reduction; the dependent rows must vanish identically.
pub fn reduce_system_exact(b: &MarginalVector<Rational>) -> Result<ReductionResult<Rational>> {
    let rhs = reduced_rhs(b);
    let residual = rhs[7..]
        .iter()
        .fold(Rational::zero(), |acc, x| acc.max(x.abs()));
    if !residual.is_zero() {
        return Err(Error::InconsistentMarginals {
            residual: crate::quantum::rational_to_f64(residual),
            limit: 0.0,
        });
    }
    Ok(ReductionResult {
        reduced_matrix: REDUCED,
        reduced_rhs: rhs,
        rank: reduced_rank(),
        consistency_residual: residual,
    })
}

/// Recomputes the reduced coefficient matrix by plain Gauss–Jordan
/// elimination over exact rationals, with no reference to [`REDUCTION`].
/// Both routes must produce the same matrix.
pub fn reduced_by_elimination() -> [[i8; 8]; 12] {
    let mut m: Vec<[Rational; 8]> = SYSTEM
        .iter()
        .map(|row| {
            let mut out = [Rational::zero(); 8];
            for (slot, &x) in out.iter_mut().zip(row.iter()) {
                *slot = Rational::from_integer(x as i128);
            }
            out
        })
        .collect();

    let mut pivot_row = 0;
    for col in 0..8 {
        let Some(src) = (pivot_row..12).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(pivot_row, src);
        let inv = m[pivot_row][col].recip();
        for x in m[pivot_row].iter_mut() {
            *x *= inv;
        }
        let pivot_vals = m[pivot_row];
        for (r, row) in m.iter_mut().enumerate() {
            if r != pivot_row && !row[col].is_zero() {
                let factor = row[col];
                for (slot, pv) in row.iter_mut().zip(pivot_vals.iter()) {
                    *slot -= factor * *pv;
                }
            }
        }
        pivot_row += 1;
        if pivot_row == 12 {
            break;
        }
    }

    let mut out = [[0i8; 8]; 12];
    for (dst, src) in out.iter_mut().zip(m.iter()) {
        for (slot, x) in dst.iter_mut().zip(src.iter()) {
            debug_assert!(x.is_integer());
            *slot = *x.numer() as i8;
        }
    }
    out
}

/// Checks that the stored reduction matrix and generic elimination agree,
/// and that `REDUCTION · SYSTEM` equals the stored reduced matrix.
pub fn verify_reduction() -> bool {
    let mut product = [[0i32; 8]; 12];
    for (r, row) in REDUCTION.iter().enumerate() {
        for (k, &coeff) in row.iter().enumerate() {
            if coeff != 0 {
                for c in 0..8 {
                    product[r][c] += coeff as i32 * SYSTEM[k][c] as i32;
                }
            }
        }
    }
    let stored_ok = product
        .iter()
        .zip(REDUCED.iter())
        .all(|(a, b)| a.iter().zip(b.iter()).all(|(x, y)| *x == *y as i32));
    stored_ok && reduced_by_elimination() == REDUCED
}

/// The one-parameter family of signed solutions, `q_i(t) = c_i +
/// slope_i · t` with `t = q(+,+,+)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolutionFamily<T = f64> {
    consts: [T; 8],
}

/// A signed candidate for the triple joint distribution. `quasi` is set
/// when some entry is negative — the marginals are still reproduced, but
/// nonnegativity fails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripleDistribution<T = f64> {
    /// Entries over `{-1,+1}³` in [`vertex_signs`] order.
    pub q: [T; 8],
    pub quasi: bool,
}

impl<T: Copy> TripleDistribution<T> {
    pub fn prob(&self, z1: Sign, z2: Sign, z3: Sign) -> T {
        self.q[vertex_index(z1, z2, z3)]
    }
}

/// Builds the solution family from a successful reduction.
pub fn solution_family<T: Signed + Copy>(reduction: &ReductionResult<T>) -> SolutionFamily<T> {
    // Row i of the reduced system reads q_i + REDUCED[i][7]·t = rhs_i for
    // i < 7, and q_7 = t, so the constant of q_7 is zero.
    let mut consts = [T::zero(); 8];
    consts[..7].copy_from_slice(&reduction.reduced_rhs[..7]);
    SolutionFamily { consts }
}

impl<T: Signed + Copy> SolutionFamily<T> {
    fn entries(&self, t: T) -> [T; 8] {
        let mut q = [T::zero(); 8];
        for ((slot, &slope), &c) in q.iter_mut().zip(SLOPES.iter()).zip(self.consts.iter()) {
            *slot = if slope == 1 { c + t } else { c - t };
        }
        q
    }

    /// Constant term of `q_i(t)`.
    pub fn constant(&self, index: usize) -> T {
        self.consts[index]
    }
}

impl SolutionFamily<f64> {
    /// Evaluates the family at `t`; flags entries below
    /// `-`[`tol::INTERVAL_SLACK`] as quasi.
    pub fn triple(&self, t: f64) -> TripleDistribution<f64> {
        let q = self.entries(t);
        let quasi = q.iter().any(|&x| x < -tol::INTERVAL_SLACK);
        TripleDistribution { q, quasi }
    }
}

impl SolutionFamily<Rational> {
    pub fn triple(&self, t: Rational) -> TripleDistribution<Rational> {
        let q = self.entries(t);
        let quasi = q.iter().any(|x| x < &Rational::zero());
        TripleDistribution { q, quasi }
    }
}

/// The set of `t` for which every entry of `q(t)` is nonnegative.
///
/// Rising entries impose lower bounds, falling entries upper bounds; `lo`
/// and `hi` are the tightest of each. `lo > hi` means no genuine
/// distribution reproduces the marginals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityInterval<T = f64> {
    pub lo: T,
    pub hi: T,
    pub nonempty: bool,
}

fn interval_bounds<T: Signed + Copy + PartialOrd>(family: &SolutionFamily<T>) -> (T, T) {
    let mut lo: Option<T> = None;
    let mut hi: Option<T> = None;
    for (&slope, &c) in SLOPES.iter().zip(family.consts.iter()) {
        if slope == 1 {
            // q_i = c + t >= 0  =>  t >= -c
            let bound = -c;
            lo = Some(match lo {
                Some(x) if x >= bound => x,
                _ => bound,
            });
        } else {
            // q_i = c - t >= 0  =>  t <= c
            hi = Some(match hi {
                Some(x) if x <= c => x,
                _ => c,
            });
        }
    }
    // Both slope signs occur among the eight vertices.
    (lo.unwrap(), hi.unwrap())
}

/// Intersects the eight half-lines `{t : q_i(t) >= 0}`.
pub fn feasibility_interval(family: &SolutionFamily<f64>) -> FeasibilityInterval<f64> {
    let (lo, hi) = interval_bounds(family);
    FeasibilityInterval {
        lo,
        hi,
        nonempty: lo <= hi + tol::INTERVAL_SLACK,
    }
}

/// Exact-arithmetic interval.
pub fn feasibility_interval_exact(
    family: &SolutionFamily<Rational>,
) -> FeasibilityInterval<Rational> {
    let (lo, hi) = interval_bounds(family);
    FeasibilityInterval {
        lo,
        hi,
        nonempty: lo <= hi,
    }
}

/// A representative member of the family.
///
/// Feasible intervals yield their midpoint. When the interval is empty the
/// family is evaluated at `hi`, the largest `t` that keeps every falling
/// entry nonnegative; the most negative entry there equals `hi − lo`, the
/// gap by which the constraints miss each other.
pub fn best_triple(
    family: &SolutionFamily<f64>,
    interval: &FeasibilityInterval<f64>,
) -> TripleDistribution<f64> {
    let t = if interval.nonempty {
        (interval.lo + interval.hi) / 2.0
    } else {
        interval.hi
    };
    family.triple(t)
}

/// Exact-arithmetic variant of [`best_triple`].
pub fn best_triple_exact(
    family: &SolutionFamily<Rational>,
    interval: &FeasibilityInterval<Rational>,
) -> TripleDistribution<Rational> {
    let t = if interval.nonempty {
        (interval.lo + interval.hi) / Rational::from_integer(2)
    } else {
        interval.hi
    };
    family.triple(t)
}

/// Everything the callers downstream need about one angle configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub reduction: ReductionResult<f64>,
    pub family: SolutionFamily<f64>,
    pub interval: FeasibilityInterval<f64>,
    pub best: TripleDistribution<f64>,
}

/// Runs the whole pipeline for three pair distributions.
pub fn analyze_pairs(
    d12: &PairDistribution,
    d13: &PairDistribution,
    d23: &PairDistribution,
) -> Result<FeasibilityReport> {
    let (_, b) = build_system(d12, d13, d23)?;
    let reduction = reduce_system(&b)?;
    let family = solution_family(&reduction);
    let interval = feasibility_interval(&family);
    let best = best_triple(&family, &interval);
    Ok(FeasibilityReport {
        reduction,
        family,
        interval,
        best,
    })
}
