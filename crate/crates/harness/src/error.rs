use bergman_core::Error as CoreError;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
/// At least one acceptance criterion failed.
pub const EXIT_CRITERIA: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("output error: {0}")]
    Output(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) => EXIT_USAGE,
            HarnessError::Numeric(_) => EXIT_NUMERIC,
            HarnessError::Io(_) | HarnessError::Output(_) => EXIT_NUMERIC,
        }
    }
}

impl From<CoreError> for HarnessError {
    fn from(e: CoreError) -> Self {
        match e {
            // bad energies, fixed points and oversized problems are configuration mistakes
            CoreError::Domain(_) | CoreError::Resource(_) => HarnessError::Usage(e.to_string()),
            CoreError::Range(_) | CoreError::Numeric(_) => HarnessError::Numeric(e.to_string()),
        }
    }
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        HarnessError::Output(e.to_string())
    }
}

impl From<serde_json::Error> for HarnessError {
    fn from(e: serde_json::Error) -> Self {
        HarnessError::Output(e.to_string())
    }
}

pub type HResult<T> = std::result::Result<T, HarnessError>;

pub fn usage<T>(msg: impl Into<String>) -> HResult<T> {
    Err(HarnessError::Usage(msg.into()))
}
