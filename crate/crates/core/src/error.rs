use thiserror::Error;

use crate::model::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidConfig(Vec<Violation>),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("integration diverged at t = {t_ns} ns")]
    Divergence { t_ns: f64 },

    #[error("pump below latching threshold: {0}")]
    NoLatch(String),

    #[error("trajectories sampled on different grids")]
    GridMismatch,

    #[error("fit did not converge: {reason} (final cost {cost:e})")]
    NonConvergence {
        reason: String,
        cost: f64,
        residuals: Vec<f64>,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
