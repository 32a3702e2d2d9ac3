use thiserror::Error;

/// Crate-wide error type. The CLI maps each variant class to a stable
/// process exit code, so keep new variants aligned with `exit_code`.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("dimension mismatch: {0}")]
    Dim(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code: 0 is success, 2 configuration, 3 data ingestion,
    /// 4 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Dim(_) => 2,
            Error::Data(_) | Error::Io(_) | Error::Csv(_) | Error::Json(_) => 3,
            Error::Numeric(_) => 4,
        }
    }
}
