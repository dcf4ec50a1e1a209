use std::path::PathBuf;

use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Core(#[from] tsd_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        CliError::Invalid(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 1 for bad input, 2 for failures while running.
    pub fn exit_code(&self) -> i32 {
        use tsd_core::Error as E;
        match self {
            CliError::Invalid(_) => 1,
            CliError::Core(E::InvalidInput(_) | E::Domain(_) | E::Range(_)) => 1,
            _ => 2,
        }
    }
}
