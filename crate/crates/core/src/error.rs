use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("derivative order {0} is not supported (expected 0..=3)")]
    UnsupportedOrder(usize),

    #[error("custom profile `{name}` does not supply derivative of order {order}")]
    MissingDerivative { name: String, order: usize },

    #[error("profile fails origin validation: {0}")]
    InvalidProfile(String),

    #[error("radius must be strictly positive, got {0}")]
    NonPositiveRadius(f64),

    #[error("dimension n = {0} is not supported (need n >= 3)")]
    DimensionTooSmall(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("exponent q = {q} outside the admissible range [2, {upper}] for dim = {dim}")]
    ExponentOutOfRange { q: f64, upper: f64, dim: f64 },

    #[error("least-squares fit is degenerate: {0}")]
    DegenerateFit(String),

    #[error("singular tridiagonal system at row {0}")]
    SingularSystem(usize),

    #[error("power iteration did not converge after {iterations} iterations (last iterates {last:?})")]
    NotConverged { iterations: usize, last: [f64; 2] },

    #[error("nonlinear evolution blew up at t = {time}: sup norm grew by {growth:e}")]
    BlowUp { time: f64, growth: f64 },

    #[error("trajectory has too few snapshots: {found} per unit time, need {required}")]
    TooFewSnapshots { found: f64, required: f64 },

    #[error("decay fit rejected: {0}")]
    FitRejected(String),

    #[error("representation mismatch: expected {expected}, found {found}")]
    Representation { expected: String, found: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
