use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::Serialize;

use super::binary::{fit_binary, BinaryFit, Link};
use super::design::DesignMatrix;
use super::ols::{fit_ols, LinearFit};
use super::EstimationError;
use crate::dataio::{Dataset, SurveyRecord, Variable};

/// G(·) applied to Post before the level regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Transform {
    Log,
    Identity,
}

impl Transform {
    pub fn apply(self, post: f64) -> Result<f64, EstimationError> {
        match self {
            Transform::Identity => Ok(post),
            Transform::Log if post > 0.0 => Ok(post.ln()),
            Transform::Log => Err(EstimationError::InvalidInput(format!(
                "log transform needs post > 0 (got {post})"
            ))),
        }
    }

    pub fn invert(self, value: f64) -> f64 {
        match self {
            Transform::Identity => value,
            Transform::Log => value.exp(),
        }
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Transform::Log => "log",
            Transform::Identity => "identity",
        })
    }
}

impl FromStr for Transform {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "log" => Ok(Transform::Log),
            "identity" | "none" => Ok(Transform::Identity),
            other => Err(format!("unknown transform `{other}` (expected log or identity)")),
        }
    }
}

/// Change decision (binary, full sample) plus level of G(Post) among updaters.
/// Each stage regresses on an intercept and its own covariate list.
#[derive(Debug, Clone, Serialize)]
pub struct HurdleFit {
    pub change_stage: BinaryFit,
    pub level_stage: LinearFit,
    pub transform: Transform,
    /// Residual standard error of the level stage.
    pub sigma: f64,
    /// Regressors of each stage; the intercept is implicit.
    pub change_covariates: Vec<Variable>,
    pub level_covariates: Vec<Variable>,
    /// Valid rows lost to listwise deletion in each stage.
    pub change_dropped: usize,
    pub level_dropped: usize,
}

fn dedup(covariates: &[Variable]) -> Vec<Variable> {
    let mut out = Vec::new();
    for v in covariates {
        if !out.contains(v) {
            out.push(*v);
        }
    }
    out
}

pub fn fit_hurdle(
    data: &Dataset,
    change_covariates: &[Variable],
    level_covariates: &[Variable],
    link: Link,
    transform: Transform,
) -> Result<HurdleFit, EstimationError> {
    let change_vars = dedup(change_covariates);
    let level_vars = dedup(level_covariates);
    for v in change_vars.iter().chain(&level_vars) {
        if matches!(v, Variable::Change | Variable::Post) {
            return Err(EstimationError::InvalidInput(format!("{v} cannot be a regressor")));
        }
    }

    let updaters: Vec<&SurveyRecord> = data.valid_records().filter(|r| r.change).collect();
    let level_rows: Vec<&SurveyRecord> = updaters
        .iter()
        .copied()
        .filter(|r| level_vars.iter().all(|v| r.value(*v).is_some()))
        .collect();
    if level_rows.is_empty() {
        return Err(EstimationError::EmptyUpdaterSubsample);
    }
    let level_x = DesignMatrix::from_records(&level_rows, &level_vars)?;
    let g: Vec<f64> = level_rows
        .iter()
        .map(|r| transform.apply(r.post))
        .collect::<Result<_, _>>()?;
    let level_stage = fit_ols(&DVector::from_vec(g), &level_x)?;

    let change_rows: Vec<&SurveyRecord> = data.complete_cases(&change_vars).collect();
    let change_x = DesignMatrix::from_records(&change_rows, &change_vars)?;
    let y: Vec<bool> = change_rows.iter().map(|r| r.change).collect();
    let change_stage = fit_binary(&y, &change_x, link)?;

    Ok(HurdleFit {
        sigma: level_stage.residual_std_error,
        change_dropped: data.listwise_dropped(&change_vars),
        level_dropped: updaters.len() - level_rows.len(),
        change_stage,
        level_stage,
        transform,
        change_covariates: change_vars,
        level_covariates: level_vars,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HurdleExpectation {
    /// Update probability from the change stage.
    pub probability: f64,
    /// E[Post | update] = exp(level index + σ²/2).
    pub conditional: f64,
    /// probability × conditional.
    pub unconditional: f64,
}

fn index(names: &[String], beta: &[f64], record: &SurveyRecord) -> Result<f64, EstimationError> {
    let terms = DesignMatrix::terms_for(names)?;
    terms.iter().zip(beta).try_fold(0.0, |acc, (t, b)| {
        let v = t
            .value(record)
            .ok_or_else(|| EstimationError::MissingCovariate(t.label().to_string()))?;
        Ok(acc + b * v)
    })
}

/// Log-normal expectations of Post for one respondent. The change-stage
/// index enters the response probability and the level-stage index enters
/// the exponential.
pub fn hurdle_expectation(fit: &HurdleFit, record: &SurveyRecord) -> Result<HurdleExpectation, EstimationError> {
    if fit.transform != Transform::Log {
        return Err(EstimationError::TransformMismatch {
            expected: Transform::Log,
            found: fit.transform,
        });
    }
    let change = &fit.change_stage.coefficients;
    let level = &fit.level_stage.coefficients;
    let probability = fit.change_stage.link.cdf(index(change.names(), change.values(), record)?);
    let conditional = (index(level.names(), level.values(), record)? + 0.5 * fit.sigma * fit.sigma).exp();
    Ok(HurdleExpectation {
        probability,
        conditional,
        unconditional: probability * conditional,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(prior: f64, change: bool, post: f64, age: u16) -> SurveyRecord {
        SurveyRecord {
            prior,
            change,
            post,
            gender: (age % 2) as u8,
            age: Some(age),
            police: Some(3),
            educ_int: 1,
            matching_gender: 1,
        }
    }

    #[test]
    fn constant_log_level() {
        let e = std::f64::consts::E;
        let mut records = Vec::new();
        for i in 0..40u16 {
            let prior = 10.0 + f64::from(i);
            let change = i % 4 == 0 || i % 7 == 0;
            records.push(record(prior, change, if change { e } else { prior }, 20 + (i * 7) % 40));
        }
        let data = Dataset::validated(records);
        let change_vars = [Variable::Prior, Variable::Age];
        let mut fit = fit_hurdle(&data, &change_vars, &[], Link::Probit, Transform::Log).unwrap();
        let level = &fit.level_stage;
        assert_eq!(level.coefficients.names(), ["Constant"]);
        assert!((level.coefficients.values()[0] - 1.0).abs() < 1e-12);
        assert!(fit.sigma.abs() < 1e-12);
        assert_eq!(level.n, data.valid_records().filter(|r| r.change).count());

        fit.sigma = 0.0;
        let ex = hurdle_expectation(&fit, &record(12.0, false, 12.0, 30)).unwrap();
        assert!((ex.conditional - e).abs() < 1e-8);
        assert!(ex.unconditional <= ex.conditional);
    }

    #[test]
    fn no_updaters() {
        let records: Vec<_> = (0..30u16).map(|i| record(20.0 + f64::from(i), false, 20.0 + f64::from(i), 20 + i)).collect();
        let data = Dataset::validated(records);
        let err = fit_hurdle(&data, &[], &[], Link::Probit, Transform::Log).unwrap_err();
        assert!(matches!(err, EstimationError::EmptyUpdaterSubsample));
    }

    #[test]
    fn transform_parsing() {
        assert_eq!("LOG".parse::<Transform>().unwrap(), Transform::Log);
        assert!("sqrt".parse::<Transform>().is_err());
        assert!(Transform::Log.apply(0.0).is_err());
    }
}
