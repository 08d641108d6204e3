use thiserror::Error;

/// Errors raised while evaluating models or advancing a chain.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("particle count {count} does not match indicator n = {indicator}")]
    CountMismatch { count: usize, indicator: f64 },

    #[error("particles {i} and {j} overlap (r = {distance:e}); energy is not finite")]
    Overlap { i: usize, j: usize, distance: f64 },

    #[error("non-finite energy encountered: {0}")]
    NonFiniteEnergy(String),

    #[error("batch of size 1 cannot be rescaled when N = {count}")]
    SingletonBatch { count: usize },

    #[error("partition covers {covered} indices but the configuration has {count} particles")]
    PartitionMismatch { covered: usize, count: usize },

    #[error("indicator crossed more than {limit} integers in a single step")]
    TooManyCrossings { limit: usize },

    #[error("particle index {index} out of range for N = {count}")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("{0}")]
    Diagnostics(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
