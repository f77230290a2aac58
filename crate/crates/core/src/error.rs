use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed schedule: {0}")]
    InvalidSchedule(String),

    #[error("assumption {assumption} violated: {detail}")]
    AssumptionViolated { assumption: &'static str, detail: String },

    #[error("state entry {index} = {value} lies outside [0, 1]")]
    StateOutOfRange { index: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("power iteration did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("shifted system (mu = {mu}) is numerically singular or not sub-invariant")]
    NearSingular { mu: f64 },

    #[error("matrix support is reducible")]
    Reducible,

    #[error("numerical invariant violated: {0}")]
    InvariantViolation(String),

    #[error("certificate verification failed (defect = {defect:e})")]
    CertificateFailed { defect: f64 },

    #[error("certificate is not strict (sigma3 = {sigma3:e})")]
    NotStrict { sigma3: f64 },

    #[error("invalid gamma bracket: rho(lo) = {rho_lo}, rho(hi) = {rho_hi}")]
    InvalidBracket { rho_lo: f64, rho_hi: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
