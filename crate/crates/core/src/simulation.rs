//! Seeded simulation of the three-configuration counting experiment and
//! the estimators built on the resulting count tables.
//!
//! Each trial measures one apparatus pair; outcomes are drawn from the
//! closed-form pair distribution of that configuration. Estimates are kept
//! as exact rationals so that identities between the normalizations hold
//! exactly, and the estimator-level inequality is checked in pure integer
//! arithmetic.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::quantum::{pair_distribution, AngleConfig, Pair, Sign};
use crate::{Error, Rational, Result};

/// Trial counts stay below 2^48 so the signed twelve-term combinations fit
/// comfortably in the integer types used throughout.
pub const TRIAL_CAP: u64 = 1 << 48;

/// How trials are assigned to the three configurations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Assignment {
    /// Trial `i` goes to configuration `i mod 3`.
    EqualSplit,
    /// Uniform random configuration per trial.
    RandomUniform,
    /// Random configuration with the given probabilities for
    /// (1,2), (1,3), (2,3).
    Weighted([f64; 3]),
}

/// Full description of one simulated run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialConfig {
    pub angles: AngleConfig,
    pub trials: u64,
    pub assignment: Assignment,
    pub seed: u64,
}

impl TrialConfig {
    pub fn new(
        angles: AngleConfig,
        trials: u64,
        assignment: Assignment,
        seed: u64,
    ) -> Result<TrialConfig> {
        if trials == 0 {
            return Err(Error::NoTrials);
        }
        if trials > TRIAL_CAP {
            return Err(Error::TrialCapExceeded(trials));
        }
        if let Assignment::Weighted(w) = assignment {
            let sum: f64 = w.iter().sum();
            if w.iter().any(|&x| x < 0.0) || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::BadAssignmentWeights);
            }
        }
        Ok(TrialConfig {
            angles,
            trials,
            assignment,
            seed,
        })
    }
}

/// Outcome counts per configuration: `n[pair][outcome]` with outcomes in
/// `[--, -+, +-, ++]` order. The total over all twelve cells is the trial
/// count `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountTable {
    counts: [[u64; 4]; 3],
}

impl CountTable {
    pub fn from_counts(counts: [[u64; 4]; 3]) -> Result<CountTable> {
        let table = CountTable { counts };
        if table.total() > TRIAL_CAP {
            return Err(Error::TrialCapExceeded(table.total()));
        }
        Ok(table)
    }

    pub fn count(&self, pair: Pair, z_j: Sign, z_k: Sign) -> u64 {
        self.counts[pair.idx()][z_j.idx() * 2 + z_k.idx()]
    }

    /// `n_{j,k}`: trials recorded in one configuration.
    pub fn config_total(&self, pair: Pair) -> u64 {
        self.counts[pair.idx()].iter().sum()
    }

    /// `N`: all trials.
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Signed combination `n^{--} − n^{-+} − n^{+-} + n^{++}` for a
    /// configuration — the unnormalized expected-product estimator.
    pub fn signed_sum(&self, pair: Pair) -> i128 {
        let c = &self.counts[pair.idx()];
        c[0] as i128 - c[1] as i128 - c[2] as i128 + c[3] as i128
    }

    /// Writes the table as CSV: `config,zj,zk,count` rows in fixed order
    /// plus a trailing `TOTAL,,,N` row.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "config,zj,zk,count")?;
        for pair in Pair::ALL {
            let (j, k) = pair.indices();
            for z_j in Sign::BOTH {
                for z_k in Sign::BOTH {
                    writeln!(
                        out,
                        "{j}{k},{},{},{}",
                        z_j.int(),
                        z_k.int(),
                        self.count(pair, z_j, z_k)
                    )?;
                }
            }
        }
        writeln!(out, "TOTAL,,,{}", self.total())
    }
}

/// Runs the simulation described by `tc`. Deterministic in the seed: the
/// generator is ChaCha12, a counter-based stream cipher, consumed in trial
/// order.
pub fn simulate_counts(tc: &TrialConfig) -> Result<CountTable> {
    let mut rng = ChaCha12Rng::seed_from_u64(tc.seed);
    let distributions = [
        pair_distribution(&tc.angles, 1, 2)?,
        pair_distribution(&tc.angles, 1, 3)?,
        pair_distribution(&tc.angles, 2, 3)?,
    ];
    let mut counts = [[0u64; 4]; 3];
    for trial in 0..tc.trials {
        let config = match tc.assignment {
            Assignment::EqualSplit => (trial % 3) as usize,
            Assignment::RandomUniform => rng.gen_range(0..3usize),
            Assignment::Weighted(w) => {
                let r: f64 = rng.gen();
                if r < w[0] {
                    0
                } else if r < w[0] + w[1] {
                    1
                } else {
                    2
                }
            }
        };
        let p = distributions[config].entries();
        let r: f64 = rng.gen();
        let mut cumulative = 0.0;
        let mut outcome = 3;
        for (idx, &prob) in p.iter().enumerate() {
            cumulative += prob;
            if r < cumulative {
                outcome = idx;
                break;
            }
        }
        counts[config][outcome] += 1;
    }
    CountTable::from_counts(counts)
}

/// Which denominator normalizes the count estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Divide by the total trial count `N`.
    GlobalN,
    /// Divide by the configuration's own total `n_{j,k}`.
    PerConfig,
}

/// Estimated probabilities and expected product for one pair, as exact
/// ratios of counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairEstimate {
    /// `[--, -+, +-, ++]` order.
    pub probs: [Rational; 4],
    pub expected_product: Rational,
}

/// Per-pair estimates under one normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateSet {
    pub normalization: Normalization,
    /// Indexed like [`Pair::ALL`].
    pub pairs: [PairEstimate; 3],
}

/// Estimates for one pair. Under [`Normalization::PerConfig`] the four
/// probabilities sum to one exactly; under [`Normalization::GlobalN`] they
/// sum to the configuration probability.
pub fn estimate_pair(
    table: &CountTable,
    pair: Pair,
    normalization: Normalization,
) -> Result<PairEstimate> {
    let denominator = match normalization {
        Normalization::GlobalN => {
            let n = table.total();
            if n == 0 {
                return Err(Error::NoTrials);
            }
            n
        }
        Normalization::PerConfig => {
            let n = table.config_total(pair);
            if n == 0 {
                return Err(Error::EmptyConfiguration(pair));
            }
            n
        }
    } as i128;
    let mut probs = [Rational::default(); 4];
    for z_j in Sign::BOTH {
        for z_k in Sign::BOTH {
            probs[z_j.idx() * 2 + z_k.idx()] =
                Rational::new(table.count(pair, z_j, z_k) as i128, denominator);
        }
    }
    Ok(PairEstimate {
        probs,
        expected_product: Rational::new(table.signed_sum(pair), denominator),
    })
}

/// Estimates for all three pairs under one normalization.
pub fn estimate_all(table: &CountTable, normalization: Normalization) -> Result<EstimateSet> {
    Ok(EstimateSet {
        normalization,
        pairs: [
            estimate_pair(table, Pair::OneTwo, normalization)?,
            estimate_pair(table, Pair::OneThree, normalization)?,
            estimate_pair(table, Pair::TwoThree, normalization)?,
        ],
    })
}

/// The two signed integer combinations that the total count must dominate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EstimatorBellCheck {
    /// `N`, the left-hand side.
    pub lhs: u64,
    /// `S13 + S12 − S23` where `S` is the per-configuration signed sum.
    pub rhs_plus: i128,
    /// `S13 − S12 + S23`.
    pub rhs_minus: i128,
}

impl EstimatorBellCheck {
    /// `N ≥ rhs` for both sign variants — an exact integer statement.
    pub fn satisfied(&self) -> bool {
        let n = self.lhs as i128;
        n >= self.rhs_plus && n >= self.rhs_minus
    }
}

/// Substitutes the global-`N` estimators into the Bell inequality and
/// clears denominators. Every count table with `Σn = N` satisfies it:
/// both right-hand sides are sums of `±n` terms, so they cannot exceed
/// `N`. No tolerance is involved.
pub fn estimator_bell_check(table: &CountTable) -> EstimatorBellCheck {
    let s12 = table.signed_sum(Pair::OneTwo);
    let s13 = table.signed_sum(Pair::OneThree);
    let s23 = table.signed_sum(Pair::TwoThree);
    EstimatorBellCheck {
        lhs: table.total(),
        rhs_plus: s13 + s12 - s23,
        rhs_minus: s13 - s12 + s23,
    }
}

/// `n_{j,k} / N` for the three configurations; the fractions sum to one
/// exactly.
pub fn configuration_probabilities(table: &CountTable) -> Result<[Rational; 3]> {
    let n = table.total();
    if n == 0 {
        return Err(Error::NoTrials);
    }
    Ok(Pair::ALL.map(|pair| Rational::new(table.config_total(pair) as i128, n as i128)))
}
