use thiserror::Error;

/// Errors raised by the library.
///
/// Check failures are not errors: they are carried inside reports and
/// certificates. An `Error` always means the inputs could not be processed.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("undefined extended-real sum (+inf) + (-inf)")]
    UndefinedSum,
    #[error("refused: {0}")]
    Refused(String),
    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
