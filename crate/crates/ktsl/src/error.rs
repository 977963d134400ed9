use thiserror::Error;

/// Error type shared by every module in the crate.
///
/// The variants map onto the CLI exit codes: validation/domain/range
/// problems exit with 2, resource exhaustion with 3.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input (unsorted tuple, bad flag value, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// A query outside the range a table or parameter covers.
    #[error("out of range: {0}")]
    Range(String),

    /// The request would exceed a configured budget.
    #[error("resource limit: {0}")]
    Resource(String),

    /// A numeric routine failed to converge to its tolerance.
    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("cache i/o: {0}")]
    Io(#[from] std::io::Error),

    /// A cache file exists but does not match the expected format.
    #[error("cache format: {0}")]
    CacheFormat(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Exit code the CLI maps this error to.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Resource(_) => 3,
            _ => 2,
        }
    }
}
