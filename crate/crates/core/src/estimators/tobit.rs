use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::design::{DesignMatrix, NamedVector, INTERCEPT};
use super::inference::{chi2_p_value, coefficient, Coefficient};
use super::EstimationError;
use crate::dataio::Variable;
use crate::numerics::{
    covariance_from_hessian, fd_hessian, inverse_mills, log_std_normal_cdf, maximize, ConvergenceSpec,
    ObjectiveEvaluation, HALF_LN_2PI,
};

/// Log-likelihood of a regression censored from below at zero, in
/// `(θ, log σ)`. Rows with `y = 0` are censored.
pub fn censored_loglik<'a>(
    y: &'a DVector<f64>,
    z: &'a DMatrix<f64>,
) -> impl Fn(&DVector<f64>) -> ObjectiveEvaluation + 'a {
    move |params: &DVector<f64>| {
        let k = z.ncols();
        let theta = params.rows(0, k);
        let log_sigma = params[k];
        let sigma = log_sigma.exp();
        let index = z * theta;

        let mut value = 0.0;
        let mut d_index = DVector::zeros(y.len());
        let mut d_log_sigma = 0.0;
        for i in 0..y.len() {
            let m = index[i] / sigma;
            if y[i] <= 0.0 {
                // log Φ(−x'θ/σ)
                value += log_std_normal_cdf(-m);
                let lambda = inverse_mills(-m);
                d_index[i] = -lambda / sigma;
                d_log_sigma += lambda * m;
            } else {
                let e = y[i] / sigma - m;
                value += -0.5 * e * e - HALF_LN_2PI - log_sigma;
                d_index[i] = e / sigma;
                d_log_sigma += e * e - 1.0;
            }
        }
        let mut gradient = DVector::zeros(k + 1);
        gradient.rows_mut(0, k).copy_from(&(z.transpose() * d_index));
        gradient[k] = d_log_sigma;
        ObjectiveEvaluation::new(value, gradient)
    }
}

/// Standard Tobit fit, censored at zero.
#[derive(Debug, Clone)]
pub struct CensoredFit {
    pub names: Vec<String>,
    pub theta: DVector<f64>,
    pub log_sigma: f64,
    /// Over `(θ, log σ)`.
    pub covariance: DMatrix<f64>,
    pub log_likelihood: f64,
    pub n: usize,
    pub n_censored: usize,
    pub iterations: usize,
}

impl CensoredFit {
    pub fn sigma(&self) -> f64 {
        self.log_sigma.exp()
    }
}

fn least_squares(y: &DVector<f64>, z: &DMatrix<f64>) -> Option<DVector<f64>> {
    let svd = z.clone().svd(true, true);
    svd.solve(y, 1e-12).ok()
}

/// Maximizes the censored-at-zero likelihood. It does not require any row
/// to be censored, so on uncensored data it reproduces least squares.
pub fn fit_censored_at_zero(y: &DVector<f64>, z: &DesignMatrix) -> Result<CensoredFit, EstimationError> {
    let (n, k) = (z.nrows(), z.ncols());
    if y.len() != n {
        return Err(EstimationError::Conformability(format!("y has {} rows, Z has {n}", y.len())));
    }
    if y.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(EstimationError::InvalidInput("response must be finite and non-negative".into()));
    }
    let n_censored = y.iter().filter(|v| **v <= 0.0).count();
    if n_censored == n {
        return Err(EstimationError::AllCensored);
    }
    if n <= k + 1 {
        return Err(EstimationError::InsufficientObservations { n, k: k + 1 });
    }
    z.check_rank()?;

    let scales = z.column_scales();
    let mut scaled = z.matrix().clone();
    for (j, mut c) in scaled.column_iter_mut().enumerate() {
        c /= scales[j];
    }
    let ls = least_squares(y, &scaled).ok_or(EstimationError::RankDeficient { rank: k - 1, columns: k })?;
    let resid = y - &scaled * &ls;
    let s0 = (resid.norm_squared() / n as f64).sqrt();
    let mut start = DVector::zeros(k + 1);
    start.rows_mut(0, k).copy_from(&ls);
    start[k] = if s0 > 0.0 { s0.ln() } else { 0.0 };

    let result = maximize(censored_loglik(y, &scaled), &start, &ConvergenceSpec::default())?;

    let mut params = result.argmax.clone();
    for j in 0..k {
        params[j] /= scales[j];
    }
    let original = censored_loglik(y, z.matrix());
    let hessian = fd_hessian(&original, &params)?;
    let covariance = covariance_from_hessian(&hessian).ok_or(EstimationError::SingularInformation)?;
    let log_likelihood = original(&params).value;

    Ok(CensoredFit {
        names: z.names().to_vec(),
        theta: params.rows(0, k).into_owned(),
        log_sigma: params[k],
        covariance,
        log_likelihood,
        n,
        n_censored,
        iterations: result.iterations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaldTest {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Latent-posterior model `Post* = γ·Prior + Xδ + u`, `Post = min(Prior, Post*)`.
#[derive(Debug, Clone, Serialize)]
pub struct TobitFit {
    pub gamma: f64,
    pub gamma_se: f64,
    /// Includes the intercept.
    pub delta: NamedVector,
    pub delta_se: NamedVector,
    pub sigma: f64,
    pub sigma_se: f64,
    pub log_sigma_se: f64,
    pub log_likelihood: f64,
    /// Joint test that every slope of the estimated `Prior − Post` equation is zero.
    pub wald: WaldTest,
    /// Over `(γ, δ, log σ)`.
    #[serde(skip)]
    pub covariance: DMatrix<f64>,
    pub n: usize,
    pub n_censored: usize,
    pub iterations: usize,
}

impl TobitFit {
    /// Coefficients of the estimated `Prior − Post` equation, `(1 − γ, −δ)`,
    /// with the intercept last.
    pub fn reported(&self) -> Vec<Coefficient> {
        let mut rows = vec![coefficient(Variable::Prior.label(), 1.0 - self.gamma, self.gamma_se, None)];
        let mut intercept = None;
        for ((name, d), se) in self.delta.iter().zip(self.delta_se.values()) {
            let c = coefficient(name, -d, *se, None);
            if name == INTERCEPT {
                intercept = Some(c);
            } else {
                rows.push(c);
            }
        }
        rows.extend(intercept);
        rows
    }

    /// `(γ, δ)` rows, intercept last.
    pub fn structural(&self) -> Vec<Coefficient> {
        let mut rows = vec![coefficient("gamma", self.gamma, self.gamma_se, None)];
        let mut intercept = None;
        for ((name, d), se) in self.delta.iter().zip(self.delta_se.values()) {
            let c = coefficient(name, d, *se, None);
            if name == INTERCEPT {
                intercept = Some(c);
            } else {
                rows.push(c);
            }
        }
        rows.extend(intercept);
        rows
    }
}

/// Fits the latent-posterior model by running a censored-at-zero Tobit of
/// `Prior − Post` on `(Prior, X)` and mapping back with `γ = 1 − θ_Prior`,
/// `δ = −θ_X`.
pub fn fit_tobit_generalized(
    prior: &[f64],
    post: &[f64],
    x: &DesignMatrix,
) -> Result<TobitFit, EstimationError> {
    let n = x.nrows();
    if prior.len() != n || post.len() != n {
        return Err(EstimationError::Conformability(format!(
            "prior ({}) and post ({}) must have {n} rows",
            prior.len(),
            post.len()
        )));
    }
    if let Some(i) = (0..n).find(|&i| post[i] > prior[i]) {
        return Err(EstimationError::InvalidInput(format!(
            "row {i}: post {} exceeds prior {}",
            post[i], prior[i]
        )));
    }
    let y = DVector::from_iterator(n, prior.iter().zip(post).map(|(a, b)| a - b));
    let n_censored = y.iter().filter(|v| **v == 0.0).count();
    if n_censored == 0 {
        return Err(EstimationError::NoCensoring);
    }
    if n_censored == n {
        return Err(EstimationError::AllCensored);
    }

    let k = x.ncols() + 1;
    let mut z = DMatrix::zeros(n, k);
    z.set_column(0, &DVector::from_column_slice(prior));
    z.columns_mut(1, x.ncols()).copy_from(x.matrix());
    let mut names = vec![Variable::Prior.label().to_string()];
    names.extend(x.names().iter().cloned());
    let z = DesignMatrix::new(names, z)?;

    let fit = fit_censored_at_zero(&y, &z)?;

    // (θ, log σ) → (γ, δ, log σ): J = diag(−1, …, −1, 1) and γ = 1 − θ_Prior
    let mut jac = DMatrix::<f64>::identity(k + 1, k + 1);
    for j in 0..k {
        jac[(j, j)] = -1.0;
    }
    let covariance = &jac * &fit.covariance * &jac;
    let se = |j: usize| covariance[(j, j)].sqrt();

    let delta_names = x.names().to_vec();
    let delta: Vec<f64> = (1..k).map(|j| -fit.theta[j]).collect();
    let delta_se: Vec<f64> = (1..k).map(se).collect();

    let slopes: Vec<usize> = (0..k).filter(|&j| z.names()[j] != INTERCEPT).collect();
    let b = DVector::from_iterator(slopes.len(), slopes.iter().map(|&j| fit.theta[j]));
    let v = DMatrix::from_fn(slopes.len(), slopes.len(), |a, c| fit.covariance[(slopes[a], slopes[c])]);
    let statistic = match v.cholesky() {
        Some(chol) => b.dot(&chol.solve(&b)),
        None => return Err(EstimationError::SingularInformation),
    };
    let df = slopes.len();

    let sigma = fit.sigma();
    let log_sigma_se = se(k);
    Ok(TobitFit {
        gamma: 1.0 - fit.theta[0],
        gamma_se: se(0),
        delta: NamedVector::new(delta_names.clone(), delta),
        delta_se: NamedVector::new(delta_names, delta_se),
        sigma,
        sigma_se: sigma * log_sigma_se,
        log_sigma_se,
        log_likelihood: fit.log_likelihood,
        wald: WaldTest {
            statistic,
            df,
            p_value: chi2_p_value(statistic, df as f64),
        },
        covariance,
        n,
        n_censored,
        iterations: fit.iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    /// γ > 1
    Skeptical,
    /// γ < 1
    Updater,
    /// γ = 1 at three-decimal precision.
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    /// δ > 0: pushes the latent posterior up, against an update.
    RaisesLatentPosterior,
    /// δ < 0: pushes the latent posterior down, toward an update.
    LowersLatentPosterior,
    None,
}

impl Direction {
    pub fn describe(self) -> &'static str {
        match self {
            Direction::RaisesLatentPosterior => "raises latent posterior (against update)",
            Direction::LowersLatentPosterior => "lowers latent posterior (toward update)",
            Direction::None => "no effect",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkepticismReport {
    pub gamma: f64,
    pub verdict: Verdict,
    /// Slopes only; the intercept is excluded.
    pub directions: Vec<(String, Direction)>,
}

const GAMMA_PRECISION: f64 = 5e-4;

pub fn classify_gamma(gamma: f64) -> Verdict {
    if (gamma - 1.0).abs() < GAMMA_PRECISION {
        Verdict::Indeterminate
    } else if gamma > 1.0 {
        Verdict::Skeptical
    } else {
        Verdict::Updater
    }
}

pub fn classify_skepticism(fit: &TobitFit) -> SkepticismReport {
    let directions = fit
        .delta
        .iter()
        .filter(|(name, _)| *name != INTERCEPT)
        .map(|(name, d)| {
            let dir = if d > 0.0 {
                Direction::RaisesLatentPosterior
            } else if d < 0.0 {
                Direction::LowersLatentPosterior
            } else {
                Direction::None
            };
            (name.to_string(), dir)
        })
        .collect();
    SkepticismReport {
        gamma: fit.gamma,
        verdict: classify_gamma(fit.gamma),
        directions,
    }
}
