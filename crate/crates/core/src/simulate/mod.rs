//! Synthetic surveys drawn from the estimated models and a Monte-Carlo
//! harness that checks the estimators recover the planted parameters.
//!
//! Every draw comes from a ChaCha stream keyed by `(seed, stream)`: stream 0
//! is the `simulate` dataset and replication `r` uses stream `r + 1`, so
//! results do not depend on the number of threads.

mod calibrate;
mod config;
mod dgp;
mod laws;
mod mc;

use thiserror::Error;

use crate::dataio::Variable;

pub use calibrate::{censoring_share, update_share};
pub use config::{
    Coefficients, DgpConfig, HurdleTruth, LinearTruth, ModelKind, PostBounds, SigmaSpec, TobitTruth, Truth,
    SURVEY_CENSORING_SHARE,
};
pub use dgp::{plant_missing, simulate_survey, ResolvedDgp, ResolvedTruth};
pub use laws::{BoundedLaw, CovariateLaws, Dependence, IntegerLaw};
pub use mc::{mc_recover, McReport, ParameterSummary, ReplicationFailure};

/// Environment variable capping the Monte-Carlo thread pool.
pub const THREADS_ENV: &str = "SKEPTIC_UPDATE_THREADS";

#[derive(Debug, Error)]
pub enum SimulateError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("cannot plant missing values in {0}")]
    NotNullable(Variable),
    #[error("cannot plant {requested} missing values in {available} rows")]
    TooManyMissing { requested: usize, available: usize },
    #[error("{0}")]
    ThreadPool(String),
}

impl SimulateError {
    pub fn name(&self) -> &'static str {
        match self {
            SimulateError::InvalidConfig(_) => "InvalidConfig",
            SimulateError::NotNullable(_) => "NotNullable",
            SimulateError::TooManyMissing { .. } => "TooManyMissing",
            SimulateError::ThreadPool(_) => "ThreadPool",
        }
    }
}

/// Thread count from `SKEPTIC_UPDATE_THREADS`, 1 when unset.
pub fn threads_from_env() -> Result<usize, SimulateError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(1),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(SimulateError::InvalidConfig(format!(
                "{THREADS_ENV} must be a positive integer (got `{v}`)"
            ))),
        },
    }
}
