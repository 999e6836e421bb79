use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::design::{DesignMatrix, NamedVector};
use super::inference::{coefficient, Coefficient};
use super::EstimationError;
use crate::numerics::{
    covariance_from_hessian, fd_hessian, inverse_mills, log_std_normal_cdf, maximize, std_normal_cdf,
    std_normal_pdf, std_normal_quantile, ConvergenceSpec, ObjectiveEvaluation, OptimError,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    Probit,
    Logit,
}

/// log(1 + e^x) without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl Link {
    /// Response probability F(η).
    pub fn cdf(self, eta: f64) -> f64 {
        match self {
            Link::Probit => std_normal_cdf(eta),
            Link::Logit => logistic(eta),
        }
    }

    /// Density f(η) = F'(η).
    pub fn pdf(self, eta: f64) -> f64 {
        match self {
            Link::Probit => std_normal_pdf(eta),
            Link::Logit => {
                let p = logistic(eta);
                p * (1.0 - p)
            }
        }
    }

    /// f'(η).
    pub fn pdf_derivative(self, eta: f64) -> f64 {
        match self {
            Link::Probit => -eta * std_normal_pdf(eta),
            Link::Logit => {
                let p = logistic(eta);
                p * (1.0 - p) * (1.0 - 2.0 * p)
            }
        }
    }

    fn quantile(self, p: f64) -> f64 {
        match self {
            Link::Probit => std_normal_quantile(p),
            Link::Logit => (p / (1.0 - p)).ln(),
        }
    }

    /// Log-likelihood contribution and its derivative in η.
    fn contribution(self, y: bool, eta: f64) -> (f64, f64) {
        match (self, y) {
            (Link::Probit, true) => (log_std_normal_cdf(eta), inverse_mills(eta)),
            (Link::Probit, false) => (log_std_normal_cdf(-eta), -inverse_mills(-eta)),
            (Link::Logit, true) => (-softplus(-eta), 1.0 - logistic(eta)),
            (Link::Logit, false) => (-softplus(eta), -logistic(eta)),
        }
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Link::Probit => "probit",
            Link::Logit => "logit",
        })
    }
}

impl FromStr for Link {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "probit" => Ok(Link::Probit),
            "logit" | "logistic" => Ok(Link::Logit),
            other => Err(format!("unknown link `{other}` (expected probit or logit)")),
        }
    }
}

/// Bernoulli log-likelihood in β for the given link.
pub fn binary_loglik<'a>(
    y: &'a [bool],
    x: &'a DMatrix<f64>,
    link: Link,
) -> impl Fn(&DVector<f64>) -> ObjectiveEvaluation + 'a {
    move |beta: &DVector<f64>| {
        let eta = x * beta;
        let mut value = 0.0;
        let mut score = DVector::zeros(y.len());
        for (i, yi) in y.iter().enumerate() {
            let (l, d) = link.contribution(*yi, eta[i]);
            value += l;
            score[i] = d;
        }
        ObjectiveEvaluation::new(value, x.transpose() * score)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BinaryFit {
    pub link: Link,
    pub coefficients: NamedVector,
    pub standard_errors: NamedVector,
    pub log_likelihood: f64,
    /// 2k − 2·log-likelihood
    pub aic: f64,
    #[serde(skip)]
    pub covariance: DMatrix<f64>,
    pub n: usize,
    pub n_positive: usize,
    pub iterations: usize,
}

impl BinaryFit {
    pub fn names(&self) -> &[String] {
        self.coefficients.names()
    }

    pub fn beta(&self) -> DVector<f64> {
        self.coefficients.to_dvector()
    }

    pub fn check_conformable(&self, x: &DesignMatrix) -> Result<(), EstimationError> {
        if x.names() != self.names() {
            return Err(EstimationError::Conformability(format!(
                "design columns [{}] differ from fitted coefficients [{}]",
                x.names().join(", "),
                self.names().join(", ")
            )));
        }
        Ok(())
    }

    pub fn predict_proba(&self, x: &DesignMatrix) -> Result<Vec<f64>, EstimationError> {
        self.check_conformable(x)?;
        let eta = x.matrix() * self.beta();
        Ok(eta.iter().map(|e| self.link.cdf(*e)).collect())
    }

    /// z-based coefficient rows.
    pub fn table(&self) -> Vec<Coefficient> {
        self.coefficients
            .iter()
            .zip(self.standard_errors.values())
            .map(|((name, b), se)| coefficient(name, b, *se, None))
            .collect()
    }
}

const SEPARATION_INDEX: f64 = 30.0;

/// Probit or logit maximum likelihood with observed-information standard errors.
pub fn fit_binary(y: &[bool], x: &DesignMatrix, link: Link) -> Result<BinaryFit, EstimationError> {
    let (n, k) = (x.nrows(), x.ncols());
    if y.len() != n {
        return Err(EstimationError::Conformability(format!("y has {} rows, X has {n}", y.len())));
    }
    let n_positive = y.iter().filter(|v| **v).count();
    if n_positive == 0 {
        return Err(EstimationError::SingleClass { class: 0 });
    }
    if n_positive == n {
        return Err(EstimationError::SingleClass { class: 1 });
    }
    if n <= k {
        return Err(EstimationError::InsufficientObservations { n, k });
    }
    x.check_rank()?;

    let scales = x.column_scales();
    let mut scaled = x.matrix().clone();
    for (j, mut c) in scaled.column_iter_mut().enumerate() {
        c /= scales[j];
    }
    let mut start = DVector::zeros(k);
    if let Some(j) = x.column_index(super::INTERCEPT) {
        start[j] = link.quantile(n_positive as f64 / n as f64) * scales[j];
    }

    let spec = ConvergenceSpec::default();
    let result = match maximize(binary_loglik(y, &scaled, link), &start, &spec) {
        Ok(r) => r,
        Err(OptimError::MaxIterations(r)) => {
            check_separation(&scaled, &r.argmax, link)?;
            return Err(OptimError::MaxIterations(r).into());
        }
        Err(e) => return Err(e.into()),
    };
    check_separation(&scaled, &result.argmax, link)?;

    let beta = result.argmax.component_div(&scales);
    let original = binary_loglik(y, x.matrix(), link);
    let hessian = fd_hessian(&original, &beta)?;
    let covariance = covariance_from_hessian(&hessian).ok_or(EstimationError::SingularInformation)?;
    let se: Vec<f64> = (0..k).map(|i| covariance[(i, i)].sqrt()).collect();
    let log_likelihood = original(&beta).value;

    Ok(BinaryFit {
        link,
        coefficients: NamedVector::new(x.names().to_vec(), beta.iter().copied().collect()),
        standard_errors: NamedVector::new(x.names().to_vec(), se),
        log_likelihood,
        aic: 2.0 * k as f64 - 2.0 * log_likelihood,
        covariance,
        n,
        n_positive,
        iterations: result.iterations,
    })
}

fn check_separation(x: &DMatrix<f64>, beta: &DVector<f64>, link: Link) -> Result<(), EstimationError> {
    let eta = x * beta;
    let max_index = eta.amax();
    let saturated = eta.iter().any(|e| {
        let p = link.cdf(*e);
        !(1e-12..=1.0 - 1e-12).contains(&p)
    });
    if max_index > SEPARATION_INDEX && saturated {
        Err(EstimationError::Separation { max_index })
    } else {
        Ok(())
    }
}
