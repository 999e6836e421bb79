//! Central finite differences: gradient checks and observed-information Hessians.

use nalgebra::{DMatrix, DVector};

use super::{ObjectiveEvaluation, OptimError};

/// Relative step used by [`grad_check`].
pub const GRAD_CHECK_STEP: f64 = 1e-6;
/// Relative step used by [`fd_hessian`].
pub const HESSIAN_STEP: f64 = 1e-5;

fn step_for(theta_k: f64, rel: f64) -> f64 {
    rel * theta_k.abs().max(1.0)
}

/// Worst relative discrepancy between the analytic gradient and central
/// differences of the objective value, with denominator `max(1, |analytic|)`.
pub fn grad_check<F>(objective: F, point: &DVector<f64>) -> Result<f64, OptimError>
where
    F: Fn(&DVector<f64>) -> ObjectiveEvaluation,
{
    let at = objective(point);
    if !at.value.is_finite() || at.gradient.iter().any(|g| !g.is_finite()) {
        return Err(OptimError::NonFinite { iteration: 0 });
    }
    if at.gradient.len() != point.len() {
        return Err(OptimError::DimensionMismatch {
            expected: point.len(),
            found: at.gradient.len(),
        });
    }
    let mut worst = 0.0_f64;
    let mut probe = point.clone();
    for k in 0..point.len() {
        let h = step_for(point[k], GRAD_CHECK_STEP);
        probe[k] = point[k] + h;
        let up = objective(&probe).value;
        probe[k] = point[k] - h;
        let down = objective(&probe).value;
        probe[k] = point[k];
        if !up.is_finite() || !down.is_finite() {
            return Err(OptimError::NonFinite { iteration: 0 });
        }
        let numeric = (up - down) / (2.0 * h);
        let analytic = at.gradient[k];
        worst = worst.max((numeric - analytic).abs() / analytic.abs().max(1.0));
    }
    Ok(worst)
}

/// Symmetric Hessian from central differences of the analytic gradient.
pub fn fd_hessian<F>(objective: F, point: &DVector<f64>) -> Result<DMatrix<f64>, OptimError>
where
    F: Fn(&DVector<f64>) -> ObjectiveEvaluation,
{
    let dim = point.len();
    let mut hessian = DMatrix::zeros(dim, dim);
    let mut probe = point.clone();
    for k in 0..dim {
        let h = step_for(point[k], HESSIAN_STEP);
        probe[k] = point[k] + h;
        let up = objective(&probe).gradient;
        probe[k] = point[k] - h;
        let down = objective(&probe).gradient;
        probe[k] = point[k];
        if up.len() != dim || down.len() != dim {
            return Err(OptimError::DimensionMismatch {
                expected: dim,
                found: up.len().min(down.len()),
            });
        }
        if up.iter().chain(down.iter()).any(|v| !v.is_finite()) {
            return Err(OptimError::NonFinite { iteration: 0 });
        }
        hessian.set_column(k, &((up - down) / (2.0 * h)));
    }
    let sym = 0.5 * (&hessian + hessian.transpose());
    Ok(sym)
}

/// Covariance as the inverse of the observed information `-H`.
pub fn covariance_from_hessian(hessian: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let information = -hessian;
    let chol = information.cholesky()?;
    let cov = chol.inverse();
    Some(0.5 * (&cov + cov.transpose()))
}
