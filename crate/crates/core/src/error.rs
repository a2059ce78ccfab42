use thiserror::Error;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The arguments fall outside the domain of the function (poles,
    /// coincident particles, chamber violations).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("capacity exceeded: {what} (limit {limit})")]
    Capacity { what: String, limit: usize },

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("path {path} stuck after {rejections} consecutive rejected steps at t = {time}")]
    StuckPath {
        path: u64,
        rejections: u32,
        time: f64,
    },

    #[error("{stuck} of {total} paths got stuck (limit {limit})")]
    TooManyStuckPaths { stuck: u64, total: u64, limit: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
