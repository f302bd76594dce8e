use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("linear map is not injective (rank {rank} < source dimension {dim})")]
    NotInjective { rank: usize, dim: usize },

    #[error("linear map is not surjective (rank {rank} < target dimension {dim})")]
    NotSurjective { rank: usize, dim: usize },

    #[error("matrix is singular")]
    Singular,

    #[error("invalid filtration: {0}")]
    InvalidFiltration(String),

    #[error("sequence is not exact: {0}")]
    NotExact(String),

    #[error("measures have different total masses ({left} vs {right})")]
    UnequalTotals { left: String, right: String },

    #[error("expected a probability measure, total mass is {0}")]
    NotProbability(String),

    #[error("negative weight {0}")]
    NegativeWeight(String),

    #[error("scale factor must be positive, got {0}")]
    NonPositiveScale(String),

    #[error("value {value} outside {range}")]
    OutOfRange { value: String, range: String },

    #[error("invalid composition: {0}")]
    InvalidComposition(String),

    #[error("budget exceeded: {required} required, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("error function is not monotone: f({n}) < f({prev})")]
    NonMonotone { prev: u64, n: u64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
