use std::path::PathBuf;

use infsum_stats::StatsError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}:{line}: {msg}")]
    Input { path: PathBuf, line: u64, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A truncation hit its term cap before meeting the tolerance.
    #[error("{0}")]
    CapOut(String),

    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::CapOut(_) => 2,
            _ => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl From<infsum::Error> for CliError {
    fn from(e: infsum::Error) -> Self {
        match e {
            infsum::Error::ModeNotFound { .. } => CliError::CapOut(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::Core(c) => c.into(),
            StatsError::NotConverged { .. } => CliError::CapOut(e.to_string()),
            StatsError::Argument(_) | StatsError::Data(_) => CliError::Usage(e.to_string()),
            StatsError::Optimizer(_) => CliError::Failed(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(CliError::Usage(msg.into()))
}
