use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure surfaced by the library.
///
/// [`Error::code`] gives the stable identifier used in machine-readable
/// error records.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("quantile values decrease at index {index} ({left} > {right})")]
    NonMonotone { index: usize, left: f64, right: f64 },

    #[error("weights sum to {sum}, expected 1")]
    WeightSumInvalid { sum: f64 },

    #[error("grid size {0} is below the minimum of 2")]
    InvalidGrid(usize),

    #[error("partitions do not match: {0}")]
    PartitionMismatch(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("{atoms} atoms exceeds the solver cap of {cap}")]
    TooLarge { atoms: usize, cap: usize },

    #[error("the first standard deviation must exceed the second ({s1} <= {s2})")]
    StdOrder { s1: f64, s2: f64 },

    #[error("s = {s} exceeds the first collision time {collision}")]
    CollisionBeforeS { s: f64, collision: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidMeasure(_) => "InvalidMeasure",
            Error::NonMonotone { .. } => "NonMonotone",
            Error::WeightSumInvalid { .. } => "WeightSumInvalid",
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::PartitionMismatch(_) => "PartitionMismatch",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::TooLarge { .. } => "TooLarge",
            Error::StdOrder { .. } => "StdOrder",
            Error::CollisionBeforeS { .. } => "CollisionBeforeS",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }
}
