use std::path::PathBuf;

use thiserror::Error;

/// Failure of a CLI command, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid flags or flag values (exit code 1).
    #[error("{0}")]
    Usage(String),
    /// Unreadable, unwritable or malformed files (exit code 2).
    #[error("{path}: {message}")]
    File { path: PathBuf, message: String },
    /// Solver or evaluation failure (exit code 2).
    #[error(transparent)]
    Solver(#[from] mlrfit::MlrError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::File { .. } | CliError::Solver(_) => 2,
        }
    }

    pub fn file(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        CliError::File { path: path.into(), message: message.to_string() }
    }
}

pub type CliResult<T> = Result<T, CliError>;
