use std::path::PathBuf;

use bogoliubov_fock::FockError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("acceptance failure: {0}")]
    Acceptance(String),
}

impl CliError {
    /// Process exit status: 1 config, 2 numeric or I/O, 3 acceptance.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 1,
            Self::Numeric(_) | Self::Io { .. } => 2,
            Self::Acceptance(_) => 3,
        }
    }
}

impl From<bogoliubov_core::Error> for CliError {
    fn from(e: bogoliubov_core::Error) -> Self {
        Self::Numeric(e.to_string())
    }
}

impl From<FockError> for CliError {
    fn from(e: FockError) -> Self {
        match e {
            FockError::NmaxExceedsN { .. } => Self::Config(format!("verify: {e}")),
            other => Self::Numeric(other.to_string()),
        }
    }
}
