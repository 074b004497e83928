use thiserror::Error;

/// Errors produced across the library.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("block length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("exact enumeration refused for n = {0} (oracle supports n <= {1})")]
    OracleTooLarge(u32, u32),

    #[error("set selection failed: {0}")]
    Selection(String),

    #[error("rate pair not achievable: {0}")]
    NotAchievable(String),

    #[error("rate split failed: {0}")]
    SplitFailed(String),

    #[error("rate backoff required: {violated} (maximum feasible backoff factor {max_factor:.6})")]
    BackoffRequired { violated: String, max_factor: f64 },

    #[error("message length mismatch: {0}")]
    MessageLength(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("format error: {0}")]
    Format(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
