use thiserror::Error;

/// Errors surfaced by the library and the command-line front end.
#[derive(Debug, Error)]
pub enum Error {
    /// A scalar argument lies outside the function's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller broke an operation's precondition (length mismatch, index out of range, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Inconsistent or invalid configuration, detected before any work starts.
    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed input file.
    #[error("parse error: {0}")]
    Parse(String),

    /// A postcondition the implementation guarantees did not hold.
    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
