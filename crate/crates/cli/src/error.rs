use std::path::PathBuf;

use thiserror::Error;
use weakkam_core::Error as CoreError;

use crate::config::ConfigError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("check failed: {0}")]
    CheckFailed(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 0 success, 1 failed check or I/O, 2 configuration, 3 numerical
    /// non-convergence, 4 unsupported configuration.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::CheckFailed(_) | CliError::Io { .. } => 1,
            CliError::Core(e) => match e {
                CoreError::IterationLimit { .. }
                | CoreError::NonConvergence { .. }
                | CoreError::InconsistentEigendata { .. }
                | CoreError::IrreducibilityViolation { .. }
                | CoreError::NumericalDegeneracy(_) => 3,
                CoreError::Unsupported(_) => 4,
                _ => 2,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
