use alloc::string::String;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("character undetermined at this precision (floor {floor})")]
    Precision { floor: i64 },
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("identity violated: {0}")]
    Identity(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
