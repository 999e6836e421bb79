//! Quasi-Newton (BFGS) ascent with a backtracking line search.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::OptimError;

/// Objective value and its gradient at one point.
#[derive(Debug, Clone)]
pub struct ObjectiveEvaluation {
    pub value: f64,
    pub gradient: DVector<f64>,
}

impl ObjectiveEvaluation {
    pub fn new(value: f64, gradient: DVector<f64>) -> Self {
        Self { value, gradient }
    }

    fn is_finite(&self) -> bool {
        self.value.is_finite() && self.gradient.iter().all(|g| g.is_finite())
    }
}

/// Stopping rules for [`maximize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceSpec {
    /// Max-norm of the gradient below which the point is accepted.
    pub gradient_tol: f64,
    /// Relative change in objective, `|Δf| / max(1, |f|)`, that ends the run
    /// when met on two consecutive accepted steps.
    pub relative_tol: f64,
    pub max_iterations: usize,
}

impl Default for ConvergenceSpec {
    fn default() -> Self {
        Self {
            gradient_tol: 1e-8,
            relative_tol: 1e-12,
            max_iterations: 500,
        }
    }
}

/// Why the optimizer stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Termination {
    GradientTolerance,
    ObjectiveTolerance,
    /// No ascent step could be found while the gradient was still above
    /// tolerance; the point is the best one seen.
    LineSearchStalled,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct OptimResult {
    pub argmax: DVector<f64>,
    pub value: f64,
    pub gradient: DVector<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Max-norm of the gradient at `argmax`.
    pub gradient_norm: f64,
    pub termination: Termination,
    /// Objective value at the start and after each accepted step.
    pub history: Vec<f64>,
}

const ARMIJO_C1: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;

/// Maximizes a smooth objective starting from `start`.
///
/// Every accepted step satisfies `f(new) >= f(old)`. When the iteration cap is
/// hit the best point is returned inside [`OptimError::MaxIterations`].
pub fn maximize<F>(
    objective: F,
    start: &DVector<f64>,
    spec: &ConvergenceSpec,
) -> Result<OptimResult, OptimError>
where
    F: Fn(&DVector<f64>) -> ObjectiveEvaluation,
{
    let dim = start.len();
    if start.iter().any(|v| !v.is_finite()) {
        return Err(OptimError::NonFinite { iteration: 0 });
    }
    let mut x = start.clone();
    let mut current = objective(&x);
    if !current.is_finite() {
        return Err(OptimError::NonFinite { iteration: 0 });
    }
    if current.gradient.len() != dim {
        return Err(OptimError::DimensionMismatch {
            expected: dim,
            found: current.gradient.len(),
        });
    }

    // Work on the minimization problem of -f.
    let mut inv_hessian = DMatrix::<f64>::identity(dim, dim);
    let mut fresh_metric = true;
    let mut iterations = 0;
    let mut history = vec![current.value];
    let mut flat_steps = 0;

    let finish = |x: DVector<f64>,
                  ev: ObjectiveEvaluation,
                  iterations: usize,
                  termination: Termination,
                  history: Vec<f64>| {
        let gradient_norm = ev.gradient.amax();
        OptimResult {
            argmax: x,
            value: ev.value,
            gradient: ev.gradient,
            iterations,
            converged: matches!(
                termination,
                Termination::GradientTolerance | Termination::ObjectiveTolerance
            ),
            gradient_norm,
            termination,
            history,
        }
    };

    loop {
        let grad_norm = current.gradient.amax();
        if grad_norm <= spec.gradient_tol {
            return Ok(finish(x, current, iterations, Termination::GradientTolerance, history));
        }
        if iterations >= spec.max_iterations {
            return Err(OptimError::MaxIterations(Box::new(finish(
                x,
                current,
                iterations,
                Termination::MaxIterations,
                history,
            ))));
        }
        iterations += 1;

        let g = -&current.gradient;
        let f = -current.value;
        let mut direction = -(&inv_hessian * &g);
        let mut slope = g.dot(&direction);
        if slope.is_nan() || slope >= 0.0 {
            inv_hessian.fill_with_identity();
            fresh_metric = true;
            direction = -g.clone();
            slope = g.dot(&direction);
        }

        let mut step = if fresh_metric {
            (1.0 / direction.amax()).min(1.0)
        } else {
            1.0
        };

        let mut accepted: Option<(DVector<f64>, ObjectiveEvaluation)> = None;
        for _ in 0..MAX_BACKTRACKS {
            let candidate = &x + step * &direction;
            let ev = objective(&candidate);
            if ev.is_finite() {
                let f_new = -ev.value;
                let predicted = ARMIJO_C1 * step * slope;
                let noise_level = 4.0 * f64::EPSILON * (1.0 + f.abs());
                if f_new <= f + predicted || (f_new <= f && -step * slope <= noise_level) {
                    accepted = Some((candidate, ev));
                    break;
                }
                // safeguarded quadratic interpolation
                let denom = 2.0 * (f_new - f - step * slope);
                let trial = if denom > 0.0 {
                    -slope * step * step / denom
                } else {
                    0.5 * step
                };
                step = trial.clamp(0.1 * step, 0.5 * step);
            } else {
                step *= 0.25;
            }
        }

        let Some((x_new, next)) = accepted else {
            if !fresh_metric {
                // retry from steepest ascent before giving up
                inv_hessian.fill_with_identity();
                fresh_metric = true;
                continue;
            }
            return Ok(finish(x, current, iterations, Termination::LineSearchStalled, history));
        };

        let s = &x_new - &x;
        let y = (-&next.gradient) - &g;
        let sy = s.dot(&y);
        let relative_change = (next.value - current.value).abs() / current.value.abs().max(1.0);

        if sy > 1e-12 * s.norm() * y.norm() {
            if fresh_metric {
                let scale = sy / y.dot(&y);
                inv_hessian.fill_with_identity();
                inv_hessian *= scale;
            }
            let rho = 1.0 / sy;
            let hy = &inv_hessian * &y;
            let yhy = y.dot(&hy);
            // H+ = H - rho (s hy' + hy s') + (rho^2 y'Hy + rho) s s'
            inv_hessian -= rho * (&s * hy.transpose() + &hy * s.transpose());
            inv_hessian += (rho * rho * yhy + rho) * (&s * s.transpose());
            fresh_metric = false;
        }

        x = x_new;
        current = next;
        history.push(current.value);

        if current.gradient.amax() <= spec.gradient_tol {
            return Ok(finish(x, current, iterations, Termination::GradientTolerance, history));
        }
        // a single flat step can come from a poor metric; require two
        flat_steps = if relative_change <= spec.relative_tol { flat_steps + 1 } else { 0 };
        if flat_steps >= 2 {
            return Ok(finish(x, current, iterations, Termination::ObjectiveTolerance, history));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::normal::{inverse_mills, log_std_normal_cdf, std_normal_cdf};

    fn quadratic(center: Vec<f64>, weights: Vec<f64>) -> impl Fn(&DVector<f64>) -> ObjectiveEvaluation {
        move |x: &DVector<f64>| {
            let mut value = 0.0;
            let mut grad = DVector::zeros(x.len());
            for i in 0..x.len() {
                let d = x[i] - center[i];
                value -= weights[i] * d * d;
                grad[i] = -2.0 * weights[i] * d;
            }
            ObjectiveEvaluation::new(value, grad)
        }
    }

    #[test]
    fn one_dimensional_quadratic() {
        let res = maximize(quadratic(vec![2.0], vec![1.0]), &DVector::from_vec(vec![0.0]), &ConvergenceSpec::default())
            .unwrap();
        assert!((res.argmax[0] - 2.0).abs() <= 1e-8);
        assert!(res.converged);
    }

    #[test]
    fn separable_quadratic() {
        let res = maximize(
            quadratic(vec![1.0, -3.0], vec![1.0, 10.0]),
            &DVector::from_vec(vec![0.0, 0.0]),
            &ConvergenceSpec::default(),
        )
        .unwrap();
        assert!((res.argmax[0] - 1.0).abs() <= 1e-8);
        assert!((res.argmax[1] + 3.0).abs() <= 1e-8);
        assert!(res.iterations <= 50);
    }

    #[test]
    fn ill_conditioned_quadratic_within_fifty_iterations() {
        let center = vec![3.0, -1.0, 0.5, 100.0, -7.0];
        let weights = vec![1e-2, 1.0, 50.0, 1e3, 0.3];
        let res = maximize(
            quadratic(center.clone(), weights),
            &DVector::zeros(5),
            &ConvergenceSpec::default(),
        )
        .unwrap();
        for (i, (got, want)) in res.argmax.iter().zip(center.iter()).enumerate() {
            assert!((got - want).abs() <= 1e-8, "coordinate {i}: {:?} {:?} {}", res.argmax, res.termination, res.iterations);
        }
        assert!(res.iterations <= 50, "took {}", res.iterations);
    }

    /// Φ(c) = 0.3 solved by bisection.
    fn bisect_probit_intercept(target: f64) -> f64 {
        let (mut lo, mut hi) = (-10.0_f64, 10.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if std_normal_cdf(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn intercept_only_probit() {
        let n1 = 30.0;
        let n0 = 70.0;
        let obj = move |x: &DVector<f64>| {
            let c = x[0];
            let value = n1 * log_std_normal_cdf(c) + n0 * log_std_normal_cdf(-c);
            let grad = n1 * inverse_mills(c) - n0 * inverse_mills(-c);
            ObjectiveEvaluation::new(value, DVector::from_element(1, grad))
        };
        let res = maximize(obj, &DVector::zeros(1), &ConvergenceSpec::default()).unwrap();
        let oracle = bisect_probit_intercept(0.3);
        assert!((std_normal_cdf(res.argmax[0]) - 0.3).abs() <= 1e-8);
        assert!((res.argmax[0] - oracle).abs() <= 1e-7);
    }

    #[test]
    fn accepted_steps_never_decrease() {
        // negated Rosenbrock
        let obj = |x: &DVector<f64>| {
            let (a, b) = (x[0], x[1]);
            let value = -((1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2));
            let ga = 2.0 * (1.0 - a) + 400.0 * a * (b - a * a);
            let gb = -200.0 * (b - a * a);
            ObjectiveEvaluation::new(value, DVector::from_vec(vec![ga, gb]))
        };
        let res = maximize(obj, &DVector::from_vec(vec![-1.2, 1.0]), &ConvergenceSpec::default()).unwrap();
        assert!((res.argmax[0] - 1.0).abs() < 1e-6);
        assert!((res.argmax[1] - 1.0).abs() < 1e-6);
        assert!(res.history.len() <= res.iterations + 1);
        assert!(res.history.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(*res.history.last().unwrap(), res.value);
    }

    #[test]
    fn non_finite_start_is_rejected() {
        let obj = |_: &DVector<f64>| ObjectiveEvaluation::new(f64::NAN, DVector::zeros(1));
        let err = maximize(obj, &DVector::zeros(1), &ConvergenceSpec::default()).unwrap_err();
        assert!(matches!(err, OptimError::NonFinite { .. }));
    }

    #[test]
    fn iteration_cap_is_flagged_with_result() {
        let spec = ConvergenceSpec {
            max_iterations: 2,
            ..ConvergenceSpec::default()
        };
        let center = vec![3.0, -1.0, 0.5, 100.0, -7.0];
        let weights = vec![1e-2, 1.0, 50.0, 1e3, 0.3];
        let err = maximize(quadratic(center, weights), &DVector::zeros(5), &spec).unwrap_err();
        match err {
            OptimError::MaxIterations(res) => {
                assert!(!res.converged);
                assert_eq!(res.iterations, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
