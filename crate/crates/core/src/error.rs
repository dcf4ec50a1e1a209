use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("division by zero: {0}")]
    DivisionByZero(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("trial {trial}: non-finite {quantity}")]
    NonFiniteTrial { trial: u64, quantity: &'static str },

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
