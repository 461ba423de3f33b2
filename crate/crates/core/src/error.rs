use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-stationary parameter: |phi| = {0} must be < 1")]
    Stationarity(f64),

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("poisson mean {0:e} exceeds the overflow guard")]
    MeanOverflow(f64),

    #[error("block set is empty")]
    EmptyBlocks,

    #[error("control variates need at least 3 simulated blocks, got {0}")]
    TooFewBlocks(usize),

    #[error("series of length {len} is too short (need at least {min})")]
    SeriesTooShort { len: usize, min: usize },

    #[error("empirical covariance is degenerate (constant data); use the oracle or simulation-based estimator")]
    DegenerateCovariance,

    #[error("objective is not finite at the starting point")]
    NonFiniteStart,

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}
