//! Closed-form pair probabilities for the two-particle experiment, their
//! derived quantities, and finite hidden-state models.
//!
//! Each trial measures a pair of apparatuses `(j, k)` with orientations
//! `θ_j, θ_k`. For negatively correlated particles the joint outcome
//! probabilities depend only on the device-angle difference `Δ = ϑ_k − ϑ_j`:
//! equal outcomes carry `sin²(Δ)/2` each, opposite outcomes `cos²(Δ)/2`
//! each. Photon experiments use `ϑ = θ`, electron experiments `ϑ = θ/2`,
//! and positively correlated pairs substitute `Δ → π/2 − Δ`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use num_traits::Zero;

use crate::{tol, Error, Rational, Result};

/// A dichotomic outcome, the value taken by one detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Minus, Sign::Plus];

    /// The outcome as a real value, `-1` or `+1`.
    pub fn value(self) -> f64 {
        match self {
            Sign::Minus => -1.0,
            Sign::Plus => 1.0,
        }
    }

    /// The outcome as an integer, `-1` or `+1`.
    pub fn int(self) -> i64 {
        match self {
            Sign::Minus => -1,
            Sign::Plus => 1,
        }
    }

    /// The complementary outcome (`z̄`).
    pub fn flip(self) -> Sign {
        match self {
            Sign::Minus => Sign::Plus,
            Sign::Plus => Sign::Minus,
        }
    }

    pub(crate) fn idx(self) -> usize {
        match self {
            Sign::Minus => 0,
            Sign::Plus => 1,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Minus => "-1",
            Sign::Plus => "+1",
        })
    }
}

/// One of the three measured apparatus pairs, kept in canonical `j < k`
/// order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pair {
    OneTwo,
    OneThree,
    TwoThree,
}

impl Pair {
    pub const ALL: [Pair; 3] = [Pair::OneTwo, Pair::OneThree, Pair::TwoThree];

    /// Canonicalizes an ordered index pair; rejects `j = k` and indices
    /// outside `1..=3`.
    pub fn new(j: u8, k: u8) -> Result<Pair> {
        for idx in [j, k] {
            if !(1..=3).contains(&idx) {
                return Err(Error::ApparatusIndex(idx));
            }
        }
        match (j.min(k), j.max(k)) {
            (a, b) if a == b => Err(Error::SelfPair(j)),
            (1, 2) => Ok(Pair::OneTwo),
            (1, 3) => Ok(Pair::OneThree),
            _ => Ok(Pair::TwoThree),
        }
    }

    /// The canonical `(j, k)` indices with `j < k`.
    pub fn indices(self) -> (u8, u8) {
        match self {
            Pair::OneTwo => (1, 2),
            Pair::OneThree => (1, 3),
            Pair::TwoThree => (2, 3),
        }
    }

    /// The apparatus not in the pair.
    pub fn third(self) -> u8 {
        match self {
            Pair::OneTwo => 3,
            Pair::OneThree => 2,
            Pair::TwoThree => 1,
        }
    }

    /// Position in [`Pair::ALL`].
    pub fn idx(self) -> usize {
        match self {
            Pair::OneTwo => 0,
            Pair::OneThree => 1,
            Pair::TwoThree => 2,
        }
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (j, k) = self.indices();
        write!(f, "({j},{k})")
    }
}

/// How apparatus orientation maps to the device angle entering the
/// probability formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// Polarizers: `ϑ = θ`.
    Photon,
    /// Stern–Gerlach magnets: `ϑ = θ/2`.
    Electron,
}

/// Sign of the correlation between the two particles' properties.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Correlation {
    Negative,
    Positive,
}

/// The three apparatus orientations plus the conventions that map them to
/// device angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleConfig {
    /// Orientations `θ_1, θ_2, θ_3` in radians.
    pub theta: [f64; 3],
    pub convention: Convention,
    pub correlation: Correlation,
}

impl AngleConfig {
    pub fn new(
        theta1: f64,
        theta2: f64,
        theta3: f64,
        convention: Convention,
        correlation: Correlation,
    ) -> AngleConfig {
        AngleConfig {
            theta: [theta1, theta2, theta3],
            convention,
            correlation,
        }
    }

    /// Convenience constructor for the common photon/negative case.
    pub fn photon(theta1: f64, theta2: f64, theta3: f64) -> AngleConfig {
        AngleConfig::new(
            theta1,
            theta2,
            theta3,
            Convention::Photon,
            Correlation::Negative,
        )
    }

    pub fn from_degrees(
        theta1: f64,
        theta2: f64,
        theta3: f64,
        convention: Convention,
        correlation: Correlation,
    ) -> AngleConfig {
        AngleConfig::new(
            theta1.to_radians(),
            theta2.to_radians(),
            theta3.to_radians(),
            convention,
            correlation,
        )
    }

    /// Device angle `ϑ_j` for apparatus `j` (1-based).
    pub fn device_angle(&self, j: u8) -> f64 {
        let theta = self.theta[(j - 1) as usize];
        match self.convention {
            Convention::Photon => theta,
            Convention::Electron => theta / 2.0,
        }
    }

    /// Effective device-angle difference for a pair, after the convention
    /// and correlation transforms. All formulas downstream are functions of
    /// this value alone.
    pub fn delta(&self, pair: Pair) -> f64 {
        let (j, k) = pair.indices();
        let diff = self.device_angle(k) - self.device_angle(j);
        match self.correlation {
            Correlation::Negative => diff,
            Correlation::Positive => FRAC_PI_2 - diff,
        }
    }
}

/// Joint outcome distribution for one apparatus pair: four probabilities
/// over `{-1,+1}²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairDistribution {
    /// Row-major over `(z_j, z_k)`: `[--, -+, +-, ++]`.
    p: [f64; 4],
    pair: Pair,
}

impl PairDistribution {
    /// Builds a distribution from explicit entries, validating
    /// nonnegativity and normalization.
    pub fn new(pair: Pair, p: [f64; 4]) -> Result<PairDistribution> {
        let sum: f64 = p.iter().sum();
        let ok = p
            .iter()
            .all(|&x| (-tol::PROB_IDENTITY..=1.0 + tol::PROB_IDENTITY).contains(&x))
            && (sum - 1.0).abs() <= tol::PROB_IDENTITY;
        if !ok {
            return Err(Error::NotNormalized { sum });
        }
        Ok(PairDistribution { p, pair })
    }

    pub fn pair(&self) -> Pair {
        self.pair
    }

    /// `P(Z_j = z_j, Z_k = z_k)` in the pair's canonical order.
    pub fn prob(&self, z_j: Sign, z_k: Sign) -> f64 {
        self.p[z_j.idx() * 2 + z_k.idx()]
    }

    pub fn entries(&self) -> [f64; 4] {
        self.p
    }
}

/// Joint probabilities for the pair `(j, k)` at the configured angles.
///
/// Equal outcomes get `sin²(Δ)/2` each and opposite outcomes `cos²(Δ)/2`
/// each, where `Δ` is [`AngleConfig::delta`]. The formulas are symmetric
/// in the pair order, so `(k, j)` yields the same distribution.
pub fn pair_distribution(config: &AngleConfig, j: u8, k: u8) -> Result<PairDistribution> {
    let pair = Pair::new(j, k)?;
    let delta = config.delta(pair);
    let agree = delta.sin().powi(2) / 2.0;
    let disagree = delta.cos().powi(2) / 2.0;
    Ok(PairDistribution {
        p: [agree, disagree, disagree, agree],
        pair,
    })
}

/// Which coordinate of a pair distribution to marginalize onto.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    First,
    Second,
}

/// Marginal probability of one outcome on one side; exactly `1/2` for
/// distributions produced by [`pair_distribution`].
pub fn single_marginal(d: &PairDistribution, side: Side, z: Sign) -> f64 {
    Sign::BOTH
        .iter()
        .map(|&other| match side {
            Side::First => d.prob(z, other),
            Side::Second => d.prob(other, z),
        })
        .sum()
}

/// Conditional distribution of `Z_j` given `Z_k = z_k`, returned in
/// `[Minus, Plus]` order.
///
/// Conditioning on an outcome of zero marginal probability is an error:
/// quantum marginals are constant `1/2`, so a zero marginal signals a
/// caller bug rather than a value to propagate as NaN.
pub fn conditional_pair(d: &PairDistribution, given_second: Sign) -> Result<[f64; 2]> {
    let marginal = single_marginal(d, Side::Second, given_second);
    if marginal <= 0.0 {
        return Err(Error::ZeroMarginalConditioning);
    }
    Ok([
        d.prob(Sign::Minus, given_second) / marginal,
        d.prob(Sign::Plus, given_second) / marginal,
    ])
}

/// Probability of the agreement event `C = {(-1,-1), (+1,+1)}`.
pub fn agreement_probability(d: &PairDistribution) -> f64 {
    d.prob(Sign::Minus, Sign::Minus) + d.prob(Sign::Plus, Sign::Plus)
}

/// `E[Z_j · Z_k] = 2·P(C) − 1 = 1 − 2·P(C̄)`; equals `−cos(2Δ)` for the
/// closed-form distributions.
pub fn expected_product(d: &PairDistribution) -> f64 {
    Sign::BOTH
        .iter()
        .flat_map(|&a| {
            Sign::BOTH
                .iter()
                .map(move |&b| a.value() * b.value() * d.prob(a, b))
        })
        .sum()
}

/// `Cov(Z_j, Z_k) = E[Z_j·Z_k] − E[Z_j]·E[Z_k]`.
///
/// For the closed-form distributions the single-outcome means vanish and
/// the covariance reduces to the expected product.
pub fn covariance(d: &PairDistribution) -> f64 {
    let mean_first: f64 = Sign::BOTH
        .iter()
        .map(|&z| z.value() * single_marginal(d, Side::First, z))
        .sum();
    let mean_second: f64 = Sign::BOTH
        .iter()
        .map(|&z| z.value() * single_marginal(d, Side::Second, z))
        .sum();
    expected_product(d) - mean_first * mean_second
}

/// `E[Z_j | Z_k = z_k]`, computed from the conditional distribution.
///
/// For the closed-form distributions this is `−z_k·cos(2Δ)`: conditioning
/// on `+1` gives `−cos(2Δ)`, on `-1` gives `+cos(2Δ)`.
pub fn conditional_expectation(d: &PairDistribution, given_second: Sign) -> Result<f64> {
    let cond = conditional_pair(d, given_second)?;
    Ok(cond[1] - cond[0])
}

/// A finite hidden-state model: weighted states, each assigning a definite
/// `±1` outcome to every apparatus.
///
/// Weights are exact rationals so that the reduction to the induced pair
/// distribution can be checked as an identity, not a tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenVariableModel {
    points: Vec<HiddenPoint>,
}

/// One hidden state: its weight and the outcomes `(Z_1, Z_2, Z_3)` it
/// determines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HiddenPoint {
    pub weight: Rational,
    pub outcomes: [Sign; 3],
}

/// Pair distribution induced by a hidden-state model, in exact arithmetic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InducedPairDistribution {
    /// Row-major over `(z_j, z_k)`: `[--, -+, +-, ++]`.
    p: [Rational; 4],
    pair: Pair,
}

impl HiddenVariableModel {
    /// Validates that weights are nonnegative and sum to one exactly.
    pub fn new(points: Vec<HiddenPoint>) -> Result<HiddenVariableModel> {
        let mut total = Rational::zero();
        for pt in &points {
            if pt.weight < Rational::zero() {
                return Err(Error::BadWeights);
            }
            total += pt.weight;
        }
        if total != Rational::new(1, 1) {
            return Err(Error::BadWeights);
        }
        Ok(HiddenVariableModel { points })
    }

    pub fn points(&self) -> &[HiddenPoint] {
        &self.points
    }

    /// `E[Z_j · Z_k]` summed directly over the hidden states.
    pub fn lambda_expectation(&self, j: u8, k: u8) -> Result<Rational> {
        Pair::new(j, k)?;
        let mut sum = Rational::zero();
        for pt in &self.points {
            let product = pt.outcomes[(j - 1) as usize].int() * pt.outcomes[(k - 1) as usize].int();
            sum += pt.weight * Rational::from_integer(product as i128);
        }
        Ok(sum)
    }

    /// Groups the hidden states by their `(Z_j, Z_k)` outcomes: the induced
    /// joint distribution of the pair.
    ///
    /// Its [`InducedPairDistribution::expected_product`] equals
    /// [`Self::lambda_expectation`] exactly — the partition only regroups
    /// the same sum.
    pub fn induced_pair_distribution(&self, j: u8, k: u8) -> Result<InducedPairDistribution> {
        let pair = Pair::new(j, k)?;
        let (cj, ck) = pair.indices();
        let mut p = [Rational::zero(); 4];
        for pt in &self.points {
            let u = pt.outcomes[(cj - 1) as usize];
            let v = pt.outcomes[(ck - 1) as usize];
            p[u.idx() * 2 + v.idx()] += pt.weight;
        }
        Ok(InducedPairDistribution { p, pair })
    }
}

impl InducedPairDistribution {
    pub fn pair(&self) -> Pair {
        self.pair
    }

    pub fn prob(&self, z_j: Sign, z_k: Sign) -> Rational {
        self.p[z_j.idx() * 2 + z_k.idx()]
    }

    /// `E[Z_j · Z_k]` over the induced joint, in exact arithmetic.
    pub fn expected_product(&self) -> Rational {
        let mut sum = Rational::zero();
        for a in Sign::BOTH {
            for b in Sign::BOTH {
                sum += Rational::from_integer((a.int() * b.int()) as i128) * self.prob(a, b);
            }
        }
        sum
    }

    /// Float view, for interoperation with the margin operations.
    pub fn to_pair_distribution(&self) -> Result<PairDistribution> {
        let p = [
            rational_to_f64(self.p[0]),
            rational_to_f64(self.p[1]),
            rational_to_f64(self.p[2]),
            rational_to_f64(self.p[3]),
        ];
        PairDistribution::new(self.pair, p)
    }
}

/// Float view of an exact rational.
pub fn rational_to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}
