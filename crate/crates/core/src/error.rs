use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A caller-supplied argument violates an operation's precondition.
    #[error("invalid input: {0}")]
    Input(String),

    /// An instance file could not be parsed.
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// The instance is too large for exhaustive enumeration.
    #[error("instance too large for brute force: n = {n} exceeds limit {limit}")]
    TooLarge { n: usize, limit: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
