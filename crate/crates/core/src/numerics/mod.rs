//! Normal distribution functions, a quasi-Newton maximizer and
//! finite-difference utilities shared by every estimator.

mod differentiate;
pub mod normal;
mod optimize;

use thiserror::Error;

pub use differentiate::{covariance_from_hessian, fd_hessian, grad_check, GRAD_CHECK_STEP, HESSIAN_STEP};
pub use normal::{
    erfc, inverse_mills, log_std_normal_cdf, log_std_normal_pdf, std_normal_cdf, std_normal_pdf, HALF_LN_2PI,
    std_normal_quantile,
};
pub use optimize::{maximize, ConvergenceSpec, ObjectiveEvaluation, OptimResult, Termination};

#[derive(Debug, Error)]
pub enum OptimError {
    #[error("objective or gradient not finite at an accepted point (iteration {iteration})")]
    NonFinite { iteration: usize },
    #[error("iteration cap reached after {} iterations (gradient max-norm {:.3e})", .0.iterations, .0.gradient_norm)]
    MaxIterations(Box<OptimResult>),
    #[error("gradient has dimension {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
}
