use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("structural mismatch: {0}")]
    Structural(String),

    #[error("numeric failure in {op} on a {rows}x{cols} matrix")]
    NumericFailure {
        op: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("invalid state: {0}")]
    State(String),

    #[error("{qubits} qubits exceeds the configured maximum of {max}")]
    Resource { qubits: usize, max: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn structural(msg: impl Into<String>) -> Error {
    Error::Structural(msg.into())
}
