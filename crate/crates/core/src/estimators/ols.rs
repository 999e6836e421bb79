use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::design::{DesignMatrix, NamedVector};
use super::inference::{coefficient, f_p_value, Coefficient};
use super::EstimationError;
use crate::numerics::{ObjectiveEvaluation, HALF_LN_2PI};

/// Overall F test of all slopes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FTest {
    pub statistic: f64,
    pub df1: usize,
    pub df2: usize,
    pub p_value: f64,
}

/// Least-squares fit with classical standard errors.
#[derive(Debug, Clone, Serialize)]
pub struct LinearFit {
    pub coefficients: NamedVector,
    pub standard_errors: NamedVector,
    #[serde(skip)]
    pub covariance: DMatrix<f64>,
    /// sqrt(RSS / (n − k))
    pub residual_std_error: f64,
    pub df_residual: usize,
    /// `None` without an intercept or when y is constant.
    pub r_squared: Option<f64>,
    pub adj_r_squared: Option<f64>,
    pub f_statistic: Option<FTest>,
    pub rss: f64,
    pub n: usize,
}

impl LinearFit {
    /// Maximum-likelihood error variance, RSS / n.
    pub fn sigma2_mle(&self) -> f64 {
        self.rss / self.n as f64
    }

    /// t-based coefficient rows.
    pub fn table(&self) -> Vec<Coefficient> {
        let df = self.df_residual as f64;
        self.coefficients
            .iter()
            .zip(self.standard_errors.values())
            .map(|((name, b), se)| coefficient(name, b, *se, Some(df)))
            .collect()
    }

    pub fn predict(&self, x: &DesignMatrix) -> Result<DVector<f64>, EstimationError> {
        if x.names() != self.coefficients.names() {
            return Err(EstimationError::Conformability(
                "design columns differ from the fitted coefficients".into(),
            ));
        }
        Ok(x.matrix() * self.coefficients.to_dvector())
    }
}

/// Ordinary least squares via a QR factorisation of the column-scaled design.
pub fn fit_ols(y: &DVector<f64>, x: &DesignMatrix) -> Result<LinearFit, EstimationError> {
    let (n, k) = (x.nrows(), x.ncols());
    if y.len() != n {
        return Err(EstimationError::Conformability(format!("y has {} rows, X has {n}", y.len())));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(EstimationError::InvalidInput("response has non-finite values".into()));
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
    let qr = scaled.qr();
    let r = qr.r();
    let qty = qr.q().transpose() * y;
    let b_scaled = r
        .solve_upper_triangular(&qty)
        .ok_or(EstimationError::RankDeficient { rank: k - 1, columns: k })?;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or(EstimationError::RankDeficient { rank: k - 1, columns: k })?;

    let beta = b_scaled.component_div(&scales);
    let residuals = y - x.matrix() * &beta;
    let rss = residuals.norm_squared();
    let df = n - k;
    let s2 = rss / df as f64;

    // (X'X)^-1 = D^-1 R^-1 R^-T D^-1 for the scaled factorisation
    let unscaled = &r_inv * r_inv.transpose();
    let covariance = DMatrix::from_fn(k, k, |i, j| s2 * unscaled[(i, j)] / (scales[i] * scales[j]));
    let se: Vec<f64> = (0..k).map(|i| covariance[(i, i)].max(0.0).sqrt()).collect();

    let (r_squared, adj_r_squared, f_statistic) = if x.has_intercept() {
        let mean = y.mean();
        let tss = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
        if tss > 0.0 {
            let r2 = 1.0 - rss / tss;
            let adj = 1.0 - (1.0 - r2) * (n - 1) as f64 / df as f64;
            let f = (k > 1).then(|| {
                let df1 = k - 1;
                let statistic = if rss > 0.0 {
                    ((tss - rss) / df1 as f64) / s2
                } else {
                    f64::INFINITY
                };
                FTest {
                    statistic,
                    df1,
                    df2: df,
                    p_value: f_p_value(statistic, df1 as f64, df as f64),
                }
            });
            (Some(r2), Some(adj), f)
        } else {
            (None, None, None)
        }
    } else {
        (None, None, None)
    };

    Ok(LinearFit {
        coefficients: NamedVector::new(x.names().to_vec(), beta.iter().copied().collect()),
        standard_errors: NamedVector::new(x.names().to_vec(), se),
        covariance,
        residual_std_error: s2.sqrt(),
        df_residual: df,
        r_squared,
        adj_r_squared,
        f_statistic,
        rss,
        n,
    })
}

/// Normal log-likelihood with σ² profiled out, as a function of β:
/// −n/2 · (log(2π·RSS(β)/n) + 1).
pub fn ols_profile_loglik<'a>(
    y: &'a DVector<f64>,
    x: &'a DMatrix<f64>,
) -> impl Fn(&DVector<f64>) -> ObjectiveEvaluation + 'a {
    move |beta: &DVector<f64>| {
        let n = y.len() as f64;
        let resid = y - x * beta;
        let rss = resid.norm_squared();
        let value = -n * (HALF_LN_2PI + 0.5 * (rss / n).ln() + 0.5);
        let gradient = (n / rss) * (x.transpose() * resid);
        ObjectiveEvaluation::new(value, gradient)
    }
}
