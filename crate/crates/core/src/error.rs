use thiserror::Error;

/// Every failure the workbench can report.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration: geometry, instance, profile or optimizer settings.
    #[error("configuration error: {0}")]
    Config(String),
    /// A call whose arguments do not fit the object it is applied to.
    #[error("usage error: {0}")]
    Usage(String),
    /// A relaxation channel with T2 > 2 T1.
    #[error("unphysical relaxation parameters: {0}")]
    Physicality(String),
    /// An evaluation budget too small for the requested optimizer.
    #[error("budget error: {0}")]
    Budget(String),
    /// Violated internal invariant, e.g. sampling from an unnormalized state.
    #[error("internal error: {0}")]
    Internal(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }
}
