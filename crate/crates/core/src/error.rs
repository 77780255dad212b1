use thiserror::Error;

use crate::quantum::Pair;

pub type Result<T> = std::result::Result<T, Error>;

/// Error type shared by all modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// No pair is defined for a single apparatus measured against itself.
    #[error("no pair distribution is defined for j = k = {0}")]
    SelfPair(u8),

    /// Apparatus indices run over 1, 2, 3.
    #[error("apparatus index {0} out of range 1..=3")]
    ApparatusIndex(u8),

    /// An arrangement index triple must be a permutation of {{1,2,3}}.
    #[error("indices {0:?} are not a permutation of (1,2,3)")]
    NotAPermutation([u8; 3]),

    /// A distribution was handed to an operation expecting another pair.
    #[error("pair label mismatch: expected {expected}, got {got}")]
    PairMismatch { expected: Pair, got: Pair },

    /// Probabilities must be nonnegative and sum to one.
    #[error("probabilities sum to {sum}, not 1 (entries must be in [0,1])")]
    NotNormalized { sum: f64 },

    /// Conditioning on an outcome of zero marginal probability.
    #[error("conditional is undefined: the conditioning outcome has zero marginal probability")]
    ZeroMarginalConditioning,

    /// Expected products live in [-1, +1].
    #[error("expected product {0} lies outside [-1, +1]")]
    ExpectationOutOfRange(f64),

    /// Hidden-state weights must be nonnegative and sum to one exactly.
    #[error("hidden-state weights must be nonnegative and sum to 1")]
    BadWeights,

    /// The marginal vector cannot come from any signed triple distribution.
    #[error("marginal vector is inconsistent: dependent-row residual {residual} exceeds {limit}")]
    InconsistentMarginals { residual: f64, limit: f64 },

    /// Grid scans need a positive step.
    #[error("grid step must be positive, got {0}")]
    NonPositiveStep(f64),

    /// A ratio estimator was requested for a configuration with no trials.
    #[error("configuration {0} has no recorded trials")]
    EmptyConfiguration(Pair),

    /// Estimators over the whole run need at least one trial.
    #[error("count table is empty (N = 0)")]
    NoTrials,

    /// Keeps the signed integer combinations of counts overflow-free.
    #[error("trial count {0} exceeds the 2^48 cap")]
    TrialCapExceeded(u64),

    /// Assignment weights must be nonnegative and sum to one.
    #[error("assignment weights must be nonnegative and sum to 1")]
    BadAssignmentWeights,

    /// Configuration probabilities may total at most one.
    #[error("configuration probabilities sum to more than 1")]
    ConfigMassExceedsOne,

    /// Extended-model operations reject signed inputs; quasi-distributions
    /// are the business of the feasibility module.
    #[error("distribution has a negative entry at cell {index}")]
    NegativeEntry { index: usize },

    /// Exhaustive enumeration is guarded by the composition count.
    #[error(
        "full enumeration at denominator {denominator} would visit {combinations} compositions; \
         the guard admits denominators up to {max}"
    )]
    EnumerationTooLarge {
        denominator: u32,
        combinations: u128,
        max: u32,
    },

    /// Enumeration needs a positive denominator.
    #[error("denominator must be at least 1")]
    ZeroDenominator,
}
