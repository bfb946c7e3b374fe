use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// The caller passed something that violates an operation's precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// An enumeration would exceed its configured cap.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    /// A solver produced inconsistent intermediate state. Always a bug.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
