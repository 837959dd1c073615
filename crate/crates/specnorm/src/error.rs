use thiserror::Error;

/// Errors produced across the toolkit. The CLI maps these onto exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("not applicable: {0}")]
    Applicability(String),
    #[error("construction unavailable: {0}")]
    ConstructionUnavailable(String),
    #[error("precision loss: {0}")]
    Precision(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("spectrum recovery failed: {0}")]
    RecoveryFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn parse(offset: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            offset,
            message: message.into(),
        }
    }
}
