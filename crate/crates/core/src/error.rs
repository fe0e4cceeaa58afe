use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("ratio limit L={0} unsupported: the ratio test requires L < 1")]
    UnsupportedSeries(f64),

    #[error("terms did not start decreasing within {probe_limit} evaluations")]
    ModeNotFound { probe_limit: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unknown series `{0}`")]
    UnknownSeries(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}
