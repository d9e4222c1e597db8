use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("vector must have at least one entry")]
    EmptyVector,

    #[error("entry {index} is {value}; entries must be finite and nonnegative")]
    InvalidEntry { index: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid norm: {0}")]
    InvalidNorm(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("mapping produced an invalid value at coordinate {index}: {value}")]
    InvalidEvaluation { index: usize, value: f64 },

    #[error("mapping class {0} is not weakly standard; no asymptotic mapping is defined")]
    NotWeaklyStandard(String),

    #[error(
        "asymptotic limit did not converge in {steps} steps (gap {gap:.3e}; last {last:?}, previous {previous:?})"
    )]
    LimitNotConverged { steps: usize, gap: f64, last: Vec<f64>, previous: Vec<f64> },

    #[error(
        "asymptotic limit increased at step {step} (coordinate {index}: {previous:.6e} -> {current:.6e}); mapping is not weakly standard"
    )]
    NonMonotoneLimit { step: usize, index: usize, previous: f64, current: f64 },

    #[error("start vector must be strictly positive")]
    NonPositiveStart,

    #[error("iteration reached the zero vector; the normalized iteration is undefined")]
    DegenerateIterate,

    #[error("{what} did not converge in {iterations} iterations (last change {last_change:.3e})")]
    NotConverged { what: &'static str, iterations: usize, last_change: f64 },

    #[error(
        "fixed-point iteration broke monotonicity at iteration {iteration}, coordinate {index}; mapping is not standard"
    )]
    MonotonicityViolated { iteration: usize, index: usize },

    #[error("solution check failed: {0}")]
    SolutionCheck(String),

    #[error("{0}")]
    Undefined(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("scenario parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
