use thiserror::Error;

/// Errors shared by the library and the CLI.
///
/// The CLI maps these onto its exit codes: `InvalidArgument` → 2,
/// `BudgetExceeded` → 3, `CacheCorrupt` → 4.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on the arguments failed (unstable (g, n), bad exponent
    /// vector, θ out of range, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The request is valid but exceeds the configured exact-computation
    /// budget (e.g. full graph enumeration at very large genus).
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    /// The correlator cache file is malformed, truncated, or fails its
    /// checksum or seed-value verification.
    #[error("cache corrupt: {0}")]
    CacheCorrupt(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn budget(msg: impl Into<String>) -> Self {
        Error::BudgetExceeded(msg.into())
    }

    pub fn cache(msg: impl Into<String>) -> Self {
        Error::CacheCorrupt(msg.into())
    }
}
