use core::fmt;

/// Errors returned by constructors and stream operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A constructor received an invalid argument.
    Config(&'static str),
    /// An operation was called with arguments that violate its contract.
    Usage(&'static str),
    /// Input data does not satisfy a documented precondition.
    Data(&'static str),
    /// The sliding-window sampler hit one of its low-probability failure
    /// modes and declared its state failed.
    Sw(SwError),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(message) => write!(f, "configuration error: {message}"),
            Self::Usage(message) => write!(f, "usage error: {message}"),
            Self::Data(message) => write!(f, "data error: {message}"),
            Self::Sw(e) => write!(f, "sampler failure: {e}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<SwError> for Error {
    fn from(e: SwError) -> Self {
        Self::Sw(e)
    }
}

/// Failure modes of the hierarchical sliding-window sampler.
///
/// Both are low-probability events; the expected frequency of each is at most
/// `m_bound^-2` per occurrence opportunity. Once raised, the sampler state is
/// considered failed and further inserts keep returning the same error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwError {
    /// A split/merge cascade ran past the top level.
    OverflowAtTopLevel,
    /// A split found no accepted point that survives resampling at the
    /// doubled rate. Probability at most (1/2)^threshold per split.
    DegenerateSplit,
}

impl fmt::Display for SwError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::OverflowAtTopLevel => write!(f, "sliding-window sampler overflowed at the top level"),
            Self::DegenerateSplit => write!(f, "split produced no surviving accepted point"),
        }
    }
}

impl std::error::Error for SwError {}
