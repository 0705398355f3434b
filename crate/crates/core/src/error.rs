use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("index error: {0}")]
    Index(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what}: residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    ToleranceExceeded {
        what: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("eigensolver failed to converge (residual {residual:.3e})")]
    ConvergenceFailure { residual: f64 },

    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("empty input")]
    EmptyInput,

    #[error("malformed matrix file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
