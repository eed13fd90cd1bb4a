use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("probability `{name}` = {value} is outside [0, 1]")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("invalid byzantine model for n = {n}: {reason}")]
    InvalidModel { n: usize, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("subset size k = {k} exceeds node count n = {n}")]
    SubsetTooLarge { k: usize, n: usize },

    #[error(
        "m = {m} exceeds the exhaustive hypothesis limit of {limit} (2^m sequences are enumerated)"
    )]
    TooManyHypotheses { m: usize, limit: usize },

    #[error("instance too large for exhaustive enumeration: {0}")]
    EnumerationLimit(String),

    #[error("invalid strategy grid: {0}")]
    InvalidGrid(String),

    #[error("payoff matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("game solver failed: {0}")]
    Solver(String),
}
