use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("coherence is undefined for fewer than two columns (got {0})")]
    UndefinedCoherence(usize),

    #[error("p must be an odd prime (got {0})")]
    NotOddPrime(usize),

    #[error("column {index} does not have unit norm (norm = {norm})")]
    NonUnitColumn { index: usize, norm: f64 },

    #[error("malformed dictionary file: {0}")]
    Format(String),

    #[error("index set error: {0}")]
    IndexSet(String),

    #[error("desk-scale cap exceeded: {0}")]
    CapExceeded(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
