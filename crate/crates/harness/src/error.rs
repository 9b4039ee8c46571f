use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{path}: row {row}, column {col}: {msg}")]
    Parse { path: PathBuf, row: usize, col: usize, msg: String },
    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("invalid spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Solver(#[from] outreg::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

pub(crate) fn spec_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(HarnessError::Spec(msg.into()))
}
