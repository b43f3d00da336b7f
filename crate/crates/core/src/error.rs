use thiserror::Error;

/// Errors raised by the library. The variants map onto distinct CLI exit codes.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent arguments (shape mismatch, empty lists, ...).
    #[error("invalid argument: {0}")]
    Argument(String),
    /// A formula was evaluated outside the range where it is asserted.
    #[error("domain error: {0}")]
    Domain(String),
    /// An exact oracle or enumeration does not apply to the instance, or its limit is exceeded.
    #[error("capability error: {0}")]
    Capability(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    /// Persisted data is structurally valid JSON but not a record this version understands.
    #[error("schema error: {0}")]
    Schema(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn argument<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
