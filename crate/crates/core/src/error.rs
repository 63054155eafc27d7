use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precision error: {0}")]
    Precision(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("truncation error at step {step}: {reason}")]
    Truncation { step: usize, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("quadrature error: {0}")]
    Quadrature(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("not convergent: {0}")]
    NotConvergent(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
