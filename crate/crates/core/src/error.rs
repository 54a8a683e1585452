use thiserror::Error;

/// Errors raised by the simulation, cost and optimization layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite Hamiltonian entry at t = {t} us")]
    NonFiniteHamiltonian { t: f64 },

    #[error("trace drifted by {drift:e} at t = {t} us; reduce the time step")]
    IntegrationAccuracy { drift: f64, t: f64 },

    #[error("invalid time step {0}")]
    InvalidTimeStep(f64),

    #[error("time {t} us outside the pulse window [0, {tau}] us")]
    TimeOutOfRange { t: f64, tau: f64 },

    #[error("not a valid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("invalid pulse parameters: {0}")]
    InvalidParams(String),

    #[error("objective vectors are not comparable: {0}")]
    ObjectiveMismatch(String),

    #[error("invalid indicator matrix: {0}")]
    InvalidIndicators(String),

    #[error("unsupported file contents: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
