use crate::harness::pnm::PnmError;
use crate::io::FormatError;
use crate::solver::IterateTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: expected length {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid pattern distribution: {0}")]
    InvalidDistribution(String),

    #[error("degenerate operator: {0}")]
    DegenerateOperator(&'static str),

    /// The iteration produced a non-finite loss, gradient or iterate.
    /// Carries every trace record collected before the failure.
    #[error("iteration diverged at step {iteration}")]
    Divergence {
        iteration: usize,
        trace: Box<IterateTrace>,
    },

    #[error(transparent)]
    Format(#[from] FormatError),

    #[error(transparent)]
    Image(#[from] PnmError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Serialization(String),
}

impl Error {
    pub(crate) fn mismatch(expected: usize, actual: usize) -> Self {
        Error::DimensionMismatch { expected, actual }
    }
}
