use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Wrong magic number or otherwise unreadable header.
    #[error("format error: {0}")]
    Format(String),

    #[error("truncated payload: expected {expected} bytes, found {actual}")]
    Truncated { expected: usize, actual: usize },

    /// Two inputs that must agree (e.g. image and label counts) do not.
    #[error("inconsistent inputs: {0}")]
    Inconsistent(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    /// A numerical check could not be carried out at the given resolution.
    #[error("diagnostic: {0}")]
    Diagnostic(String),

    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
