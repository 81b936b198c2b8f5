use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Caller supplied something outside an operation's domain.
    #[error("invalid input: {0}")]
    Input(String),
    /// A numeric routine produced a non-finite value.
    #[error("numeric failure: {0}")]
    Numeric(String),
    /// A state that well-formed inputs cannot reach (unbounded LP, pivot limit, ...).
    #[error("internal error: {0}")]
    Internal(String),
    /// The request is well-formed but too large for an exact method.
    #[error("refused: {0}")]
    Refused(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
