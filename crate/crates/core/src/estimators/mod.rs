//! OLS, probit/logit, the generalized Tobit with a per-row censoring
//! threshold, the two-stage hurdle model, average marginal effects and the
//! threshold prediction exercise.

mod binary;
mod design;
mod hurdle;
mod inference;
mod margins;
mod ols;
mod predict;
mod tobit;

use thiserror::Error;

use crate::numerics::OptimError;

pub use binary::{binary_loglik, fit_binary, BinaryFit, Link};
pub use design::{DesignMatrix, NamedVector, Term, INTERCEPT};
pub use hurdle::{fit_hurdle, hurdle_expectation, HurdleExpectation, HurdleFit, Transform};
pub use inference::{chi2_p_value, normal_p_value, significance_stars, t_p_value, Coefficient};
pub use margins::{marginal_effects, EffectKind, MarginalEffect};
pub use ols::{fit_ols, ols_profile_loglik, LinearFit};
pub use predict::{predict_change, predict_from_design, PredictionReport};
pub use tobit::{
    censored_loglik, classify_gamma, classify_skepticism, fit_censored_at_zero, fit_tobit_generalized,
    CensoredFit, Direction, SkepticismReport, TobitFit, Verdict, WaldTest,
};

#[derive(Debug, Error)]
pub enum EstimationError {
    #[error("design matrix is rank deficient (rank {rank} < {columns} columns)")]
    RankDeficient { rank: usize, columns: usize },
    #[error("{n} observations cannot identify {k} parameters")]
    InsufficientObservations { n: usize, k: usize },
    #[error("perfect or quasi-perfect separation (max |linear index| {max_index:.1})")]
    Separation { max_index: f64 },
    #[error("response has a single class ({class})")]
    SingleClass { class: u8 },
    #[error("no censored observations; fit the linear model instead")]
    NoCensoring,
    #[error("every observation is censored; the likelihood is unbounded")]
    AllCensored,
    #[error("no updaters with complete level-stage covariates")]
    EmptyUpdaterSubsample,
    #[error("expected the {expected} transform, the fit uses {found}")]
    TransformMismatch { expected: Transform, found: Transform },
    #[error("non-conformable inputs: {0}")]
    Conformability(String),
    #[error("covariate `{0}` is missing")]
    MissingCovariate(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("observed information is not positive definite at the optimum")]
    SingularInformation,
    #[error(transparent)]
    Optimization(#[from] OptimError),
}

impl EstimationError {
    /// Variant name, as printed by the command-line tool.
    pub fn name(&self) -> &'static str {
        match self {
            EstimationError::RankDeficient { .. } => "RankDeficient",
            EstimationError::InsufficientObservations { .. } => "InsufficientObservations",
            EstimationError::Separation { .. } => "Separation",
            EstimationError::SingleClass { .. } => "SingleClass",
            EstimationError::NoCensoring => "NoCensoring",
            EstimationError::AllCensored => "AllCensored",
            EstimationError::EmptyUpdaterSubsample => "EmptyUpdaterSubsample",
            EstimationError::TransformMismatch { .. } => "TransformMismatch",
            EstimationError::Conformability(_) => "Conformability",
            EstimationError::MissingCovariate(_) => "MissingCovariate",
            EstimationError::InvalidInput(_) => "InvalidInput",
            EstimationError::SingularInformation => "SingularInformation",
            EstimationError::Optimization(OptimError::NonFinite { .. }) => "NonFinite",
            EstimationError::Optimization(OptimError::MaxIterations(_)) => "MaxIterations",
            EstimationError::Optimization(OptimError::DimensionMismatch { .. }) => "DimensionMismatch",
        }
    }
}
