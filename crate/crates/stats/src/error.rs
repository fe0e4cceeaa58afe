use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error(transparent)]
    Core(#[from] infsum::Error),
    /// A truncated sum ran into its term cap.
    #[error("truncation did not converge after {n_evaluations} terms (last index {last_index})")]
    NotConverged { n_evaluations: usize, last_index: u64 },
    #[error("invalid data: {0}")]
    Data(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("optimizer failed: {0}")]
    Optimizer(String),
}

pub type Result<T> = std::result::Result<T, StatsError>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(StatsError::Argument(msg.into()))
}
