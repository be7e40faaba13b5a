use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A state or operator was handed to an operation expecting another mode basis.
    #[error("basis mismatch: expected {expected}, got {actual}")]
    BasisMismatch { expected: String, actual: String },

    /// Malformed attack-matrix or config document. `location` names the line
    /// and column, or the offending field.
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    /// Invalid configuration detected before any work is done.
    #[error("configuration error: {0}")]
    Config(String),

    /// Two routes that must agree did not.
    #[error("internal consistency failure: {0}")]
    Consistency(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
