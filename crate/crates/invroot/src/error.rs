use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A non-finite value reached a computation that requires finite data
    /// (fixed-point ingestion, norms, instrumentation).
    #[error("non-finite value {0} where finite data is required")]
    NonFinite(f64),

    /// A number format specification or format string was rejected.
    #[error("invalid format: {0}")]
    InvalidFormat(String),

    /// A solver configuration failed validation.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// An operation received an input it cannot work with (e.g. a zero matrix).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Matrix dimensions do not agree.
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    /// A matrix expected to be symmetric is not.
    #[error("matrix is not symmetric")]
    NotSymmetric,

    /// A matrix expected to be positive definite has a non-positive eigenvalue.
    #[error("matrix is not positive definite (eigenvalue {0})")]
    NotPositiveDefinite(f64),

    /// A Matrix Market file could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// The requested density cannot be realized for the given dimension.
    #[error("infeasible density {density} for n = {n}")]
    InfeasibleDensity { n: usize, density: f64 },

    /// A trace is too short for the requested summary.
    #[error("trace has {0} records, need at least 3")]
    TraceTooShort(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
