use std::io;
use std::path::PathBuf;

use paramils_core::error::{BackendError, SpaceError};
use paramils_core::evaluation::EvaluationError;
use paramils_core::search::SearchError;
use paramils_core::stats::WilcoxonError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Space { path: PathBuf, source: SpaceError },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("{0} already exists (use --force to overwrite)")]
    OutputExists(PathBuf),
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error(transparent)]
    Evaluation(#[from] EvaluationError),
    #[error(transparent)]
    Wilcoxon(#[from] WilcoxonError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Search(#[from] SearchError),
}

impl Error {
    /// Process exit status: 1 for bad inputs, 2 for failures while running.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Write { .. } | Error::Backend(_) | Error::Search(_) => 2,
            Error::Evaluation(EvaluationError::Backend(_)) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
