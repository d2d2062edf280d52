use thiserror::Error;

pub type AppResult<T> = Result<T, AppError>;

#[derive(Debug, Error)]
pub enum AppError {
    #[error(transparent)]
    Core(#[from] viqds_core::Error),
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("malformed input: {0}")]
    Format(String),
    #[error("{0}")]
    Usage(String),
}

impl AppError {
    /// Every error is a usage or configuration problem; bound violations are
    /// reported through the report's `pass` flag instead.
    pub fn exit_code(&self) -> i32 {
        2
    }
}
