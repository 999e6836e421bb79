use std::collections::BTreeMap;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::config::{Coefficients, DgpConfig, ModelKind};
use super::dgp::{ResolvedDgp, ResolvedTruth};
use super::SimulateError;
use crate::dataio::{Dataset, SurveyRecord, Variable};
use crate::estimators::{fit_hurdle, fit_ols, fit_tobit_generalized, DesignMatrix, EstimationError, Term};

const Z_975: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterSummary {
    pub name: String,
    pub truth: f64,
    pub mean: f64,
    pub bias: f64,
    /// Standard deviation of the estimates across replications.
    pub sd: f64,
    /// Monte-Carlo standard error of the mean, sd/√R.
    pub mc_se: f64,
    /// Share of nominal 95% intervals containing the truth.
    pub coverage: f64,
    /// |bias| ≤ 2·MC SE.
    pub within_two_mc_se: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationFailure {
    pub replication: usize,
    pub error: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McReport {
    pub model: ModelKind,
    pub n: usize,
    pub seed: u64,
    pub replications: usize,
    pub succeeded: usize,
    pub failures: Vec<ReplicationFailure>,
    /// Average share of non-updaters in the simulated datasets.
    pub mean_censoring_share: f64,
    pub parameters: Vec<ParameterSummary>,
}

impl McReport {
    pub fn parameter(&self, name: &str) -> Option<&ParameterSummary> {
        self.parameters.iter().find(|p| p.name == name)
    }
}

struct Estimate {
    name: String,
    value: f64,
    lower: f64,
    upper: f64,
}

fn wald(name: String, value: f64, se: f64) -> Estimate {
    Estimate {
        name,
        value,
        lower: value - Z_975 * se,
        upper: value + Z_975 * se,
    }
}

/// σ interval from `(n − k)s²/σ² ~ χ²(n − k)`.
fn ols_sigma(name: String, s: f64, df: usize) -> Estimate {
    let (lower, upper) = match ChiSquared::new(df as f64) {
        Ok(chi) if df > 0 => {
            let ss = df as f64 * s * s;
            ((ss / chi.inverse_cdf(0.975)).sqrt(), (ss / chi.inverse_cdf(0.025)).sqrt())
        }
        _ => (f64::NAN, f64::NAN),
    };
    Estimate {
        name,
        value: s,
        lower,
        upper,
    }
}

fn covariates(coefs: &Coefficients) -> Vec<Variable> {
    coefs
        .iter()
        .filter_map(|(t, _)| match t {
            Term::Covariate(v) => Some(*v),
            Term::Intercept => None,
        })
        .collect()
}

fn truth_map(truth: &ResolvedTruth) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    let mut add = |prefix: &str, coefs: &Coefficients| {
        for (t, c) in coefs {
            m.insert(format!("{prefix}{}", t.label()), *c);
        }
    };
    match truth {
        ResolvedTruth::Tobit { gamma, delta, sigma } => {
            add("delta.", delta);
            m.insert("gamma".into(), *gamma);
            m.insert("sigma".into(), *sigma);
        }
        ResolvedTruth::Hurdle {
            change, level, sigma, ..
        } => {
            add("change.", change);
            add("level.", level);
            m.insert("level.sigma".into(), *sigma);
        }
        ResolvedTruth::Linear { coefficients, sigma } => {
            add("", coefficients);
            m.insert("sigma".into(), *sigma);
        }
    }
    m
}

fn estimate(truth: &ResolvedTruth, data: &Dataset) -> Result<Vec<Estimate>, EstimationError> {
    match truth {
        ResolvedTruth::Tobit { delta, .. } => {
            let vars = covariates(delta);
            let rows: Vec<&SurveyRecord> = data.complete_cases(&vars).collect();
            let x = DesignMatrix::from_records(&rows, &vars)?;
            let prior: Vec<f64> = rows.iter().map(|r| r.prior).collect();
            let post: Vec<f64> = rows.iter().map(|r| r.post).collect();
            let fit = fit_tobit_generalized(&prior, &post, &x)?;
            let mut out = vec![wald("gamma".into(), fit.gamma, fit.gamma_se)];
            for ((name, d), se) in fit.delta.iter().zip(fit.delta_se.values()) {
                out.push(wald(format!("delta.{name}"), d, *se));
            }
            let half = Z_975 * fit.log_sigma_se;
            out.push(Estimate {
                name: "sigma".into(),
                value: fit.sigma,
                lower: fit.sigma * (-half).exp(),
                upper: fit.sigma * half.exp(),
            });
            Ok(out)
        }
        ResolvedTruth::Hurdle {
            link,
            change,
            level,
            transform,
            ..
        } => {
            let fit = fit_hurdle(data, &covariates(change), &covariates(level), *link, *transform)?;
            let mut out = Vec::new();
            let c = &fit.change_stage;
            for ((name, b), se) in c.coefficients.iter().zip(c.standard_errors.values()) {
                out.push(wald(format!("change.{name}"), b, *se));
            }
            let l = &fit.level_stage;
            for ((name, b), se) in l.coefficients.iter().zip(l.standard_errors.values()) {
                out.push(wald(format!("level.{name}"), b, *se));
            }
            out.push(ols_sigma("level.sigma".into(), l.residual_std_error, l.df_residual));
            Ok(out)
        }
        ResolvedTruth::Linear { coefficients, .. } => {
            let vars = covariates(coefficients);
            let rows: Vec<&SurveyRecord> = data.complete_cases(&vars).collect();
            let x = DesignMatrix::from_records(&rows, &vars)?;
            let y = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.post));
            let fit = fit_ols(&y, &x)?;
            let mut out: Vec<Estimate> = fit
                .coefficients
                .iter()
                .zip(fit.standard_errors.values())
                .map(|((name, b), se)| wald(name.to_string(), b, *se))
                .collect();
            out.push(ols_sigma("sigma".into(), fit.residual_std_error, fit.df_residual));
            Ok(out)
        }
    }
}

/// Runs `replications` simulate-and-fit rounds on `threads` workers.
/// Replication `r` draws from stream `r + 1` of the config seed and the
/// summaries are reduced in replication order, so the report does not depend
/// on the thread count.
pub fn mc_recover(config: &DgpConfig, replications: usize, threads: usize) -> Result<McReport, SimulateError> {
    if replications < 2 {
        return Err(SimulateError::InvalidConfig(format!(
            "need at least 2 replications (got {replications})"
        )));
    }
    let dgp = ResolvedDgp::new(config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| SimulateError::ThreadPool(e.to_string()))?;
    let outcomes: Vec<(f64, Result<Vec<Estimate>, EstimationError>)> = pool.install(|| {
        (0..replications)
            .into_par_iter()
            .map(|r| {
                let data = dgp.draw(r as u64 + 1);
                let censored = data.valid_records().filter(|rec| !rec.change).count();
                let share = censored as f64 / data.n_valid().max(1) as f64;
                (share, estimate(&dgp.truth, &data))
            })
            .collect()
    });

    let truths = truth_map(&dgp.truth);
    let mut names: Vec<String> = Vec::new();
    let mut values: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut hits: BTreeMap<String, usize> = BTreeMap::new();
    let mut failures = Vec::new();
    let mut share_total = 0.0;
    for (r, (share, outcome)) in outcomes.into_iter().enumerate() {
        share_total += share;
        match outcome {
            Ok(estimates) => {
                for e in estimates {
                    if !values.contains_key(&e.name) {
                        names.push(e.name.clone());
                    }
                    let truth = truths.get(&e.name).copied().unwrap_or(0.0);
                    if e.lower <= truth && truth <= e.upper {
                        *hits.entry(e.name.clone()).or_default() += 1;
                    }
                    values.entry(e.name).or_default().push(e.value);
                }
            }
            Err(err) => failures.push(ReplicationFailure {
                replication: r,
                error: err.name().to_string(),
                message: err.to_string(),
            }),
        }
    }

    let parameters = names
        .into_iter()
        .map(|name| {
            let v = &values[&name];
            let k = v.len() as f64;
            let truth = truths.get(&name).copied().unwrap_or(0.0);
            let mean = v.iter().sum::<f64>() / k;
            let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt();
            let mc_se = sd / k.sqrt();
            let bias = mean - truth;
            ParameterSummary {
                coverage: hits.get(&name).copied().unwrap_or(0) as f64 / k,
                within_two_mc_se: bias.abs() <= 2.0 * mc_se,
                name,
                truth,
                mean,
                bias,
                sd,
                mc_se,
            }
        })
        .collect();

    Ok(McReport {
        model: config.model(),
        n: config.n,
        seed: config.seed,
        replications,
        succeeded: replications - failures.len(),
        failures,
        mean_censoring_share: share_total / replications as f64,
        parameters,
    })
}
