use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("eigensolver failed to converge")]
    EigenFailed,
    #[error("SVD failed")]
    SvdFailed,
    #[error("zero is not an eigenvalue (matrix has full rank)")]
    ZeroNotEigenvalue,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("objective returned a non-finite value at iteration {iter}")]
    NumericAbort { iter: usize },
    #[error("coefficient sampling rejected {0} consecutive draws; omega appears infeasible")]
    InfeasibleOmega(usize),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
