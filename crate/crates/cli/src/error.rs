use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{}: row {row}, column {col}: {message}", path.display())]
    Parse {
        path: PathBuf,
        row: u64,
        col: usize,
        message: String,
    },

    #[error("{}: {message}", path.display())]
    Csv { path: PathBuf, message: String },

    #[error("failed to serialize output: {0}")]
    Serialize(#[from] serde_json::Error),

    #[error(transparent)]
    Core(#[from] lrscov_core::Error),
}

impl CliError {
    /// Process exit code: 2 input, 3 numerical failure, 4 no feasible selection.
    pub fn exit_code(&self) -> i32 {
        use lrscov_core::Error as E;
        match self {
            CliError::Core(E::EigenFailure { .. } | E::FactorizationFailure) => 3,
            CliError::Core(E::NoFeasiblePair { .. }) => 4,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
