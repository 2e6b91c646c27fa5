use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("unsupported model: {0}")]
    Unsupported(String),

    #[error("revenue share must lie in [0, 1), got {0}")]
    InvalidShare(f64),

    #[error("quadrature did not reach tolerance {requested:e} (achieved {achieved:e})")]
    Quadrature { requested: f64, achieved: f64 },

    #[error("tie-break flow is infeasible: {0}")]
    InfeasibleFlow(String),

    #[error("horizon of {horizon} impressions cannot cover {committed} committed impressions")]
    InfeasibleHorizon { horizon: usize, committed: usize },

    #[error("state space of {states} states exceeds the oracle budget of {budget}")]
    StateBudget { states: usize, budget: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
