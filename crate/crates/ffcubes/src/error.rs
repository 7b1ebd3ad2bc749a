use ffcubes_core::Error as CoreError;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_IO: i32 = 74;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("{0}")]
    Core(CoreError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl From<CoreError> for RunError {
    fn from(e: CoreError) -> RunError {
        match e {
            CoreError::Budget(m) => RunError::Budget(m),
            CoreError::InvalidField(_)
            | CoreError::Parse { .. }
            | CoreError::InvalidArgument(_) => RunError::Usage(e.to_string()),
            other => RunError::Core(other),
        }
    }
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) => EXIT_USAGE,
            RunError::Budget(_) => EXIT_BUDGET,
            RunError::Core(CoreError::Unsupported(_)) => EXIT_USAGE,
            RunError::Core(_) => EXIT_ASSERTION,
            RunError::Io(_) => EXIT_IO,
        }
    }
}
