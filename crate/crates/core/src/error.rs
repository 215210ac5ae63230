use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sample is empty")]
    EmptySample,

    #[error("non-finite value at index {index}")]
    NonFiniteInput { index: usize },

    /// All observations are equal, or a correlation denominator vanished.
    #[error("degenerate sample: {0}")]
    DegenerateSample(&'static str),

    /// The jackknife correlation is exactly +-1 and the Fisher transform is infinite.
    #[error("perfect correlation (r = {r}); Fisher z is infinite")]
    PerfectCorrelation { r: f64 },

    #[error("value {0} outside the open interval (-1, 1)")]
    OutOfDomain(f64),

    #[error("requires finite moments up to order {required}, distribution has {available}")]
    MomentOrderTooLow { required: u32, available: String },

    #[error("sample size {n} is too small, need at least {min}")]
    InvalidN { n: usize, min: usize },

    #[error("invalid distribution spec: {0}")]
    InvalidSpec(String),

    #[error("invalid test spec: {0}")]
    InvalidTest(String),

    #[error("significance level {0} is not in (0, 1)")]
    InvalidAlpha(f64),

    #[error("{replications} null replications are too few for alpha = {alpha} (need m*min(alpha, 1-alpha) >= 10)")]
    Underpowered { replications: usize, alpha: f64 },

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("failed to build worker pool: {0}")]
    ThreadPool(String),
}
