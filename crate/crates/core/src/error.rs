use thiserror::Error;

/// Errors raised by the metric routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("unbounded ball: {0}")]
    UnboundedBall(String),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("expression error at offset {offset}: {message}")]
    Expression { offset: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
