use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {dim}: truncation dimension must be at least {min}")]
    InvalidDimension { dim: usize, min: usize },

    #[error("shape mismatch: {left} vs {right}")]
    ShapeMismatch { left: String, right: String },

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("internal precision failure: {0}")]
    Precision(String),

    #[error("invalid damping schedule: {0}")]
    Schedule(String),

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("matrix is not positive: eigenvalue {eigenvalue:e} at index {index}")]
    NotPositive { index: usize, eigenvalue: f64 },

    #[error("matrix is singular (smallest/largest singular value {ratio:e})")]
    Singular { ratio: f64 },

    #[error("nonlinearity table has {len} values but dimension {dim} was requested")]
    TableTooShort { len: usize, dim: usize },

    #[error("ill-conditioned ratio: |denominator| = {denominator:e} is below 10x its error estimate {error:e}")]
    IllConditioned { denominator: f64, error: f64 },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn shape(left: impl ToString, right: impl ToString) -> Self {
        Error::ShapeMismatch {
            left: left.to_string(),
            right: right.to_string(),
        }
    }
}
