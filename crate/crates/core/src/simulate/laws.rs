use nalgebra::DMatrix;
use serde::Serialize;

use super::SimulateError;
use crate::numerics::std_normal_cdf;

/// Integer covariate on `[min, max]` whose law is a discretized normal with
/// location and scale chosen so the mean and standard deviation match.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegerLaw {
    pub min: i64,
    pub max: i64,
    pub mean: f64,
    pub sd: f64,
}

/// Continuous covariate on `[min, max]`: a Beta law rescaled to the interval
/// with the given mean and standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundedLaw {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub sd: f64,
}

/// Marginal laws of the respondent and interviewer covariates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovariateLaws {
    pub gender: f64,
    pub educ_int: f64,
    pub matching_gender: f64,
    pub age: IntegerLaw,
    pub police: IntegerLaw,
    pub prior: BoundedLaw,
}

impl Default for CovariateLaws {
    /// Full-sample moments of the homicide survey.
    fn default() -> Self {
        Self {
            gender: 0.53,
            educ_int: 0.83,
            matching_gender: 0.77,
            age: IntegerLaw {
                min: 16,
                max: 94,
                mean: 38.55,
                sd: 16.23,
            },
            police: IntegerLaw {
                min: 1,
                max: 5,
                mean: 2.95,
                sd: 0.96,
            },
            prior: BoundedLaw {
                min: 1.0,
                max: 98.0,
                mean: 34.91,
                sd: 26.49,
            },
        }
    }
}

/// How covariates depend on each other.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Dependence {
    Independent,
    /// Gaussian copula over (gender, age, police, educ_int, matching_gender,
    /// prior) with this correlation matrix.
    GaussianCopula(DMatrix<f64>),
}

impl Dependence {
    /// Copula with the same correlation between every pair.
    pub fn equicorrelated(rho: f64) -> Self {
        let mut m = DMatrix::from_element(COPULA_DIM, COPULA_DIM, rho);
        m.fill_diagonal(1.0);
        Dependence::GaussianCopula(m)
    }
}

pub(crate) const COPULA_DIM: usize = 6;

/// Probability table of an [`IntegerLaw`].
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct DiscreteTable {
    pub min: i64,
    /// Cumulative probabilities, last entry exactly 1.
    pub cdf: Vec<f64>,
}

impl DiscreteTable {
    pub fn quantile(&self, u: f64) -> i64 {
        let idx = self.cdf.partition_point(|c| *c <= u).min(self.cdf.len() - 1);
        self.min + idx as i64
    }

    #[cfg(test)]
    pub fn moments(&self) -> (f64, f64) {
        let pmf = pmf_from_cdf(&self.cdf);
        moments(self.min, &pmf)
    }
}

#[cfg(test)]
fn pmf_from_cdf(cdf: &[f64]) -> Vec<f64> {
    let mut prev = 0.0;
    cdf.iter()
        .map(|c| {
            let p = c - prev;
            prev = *c;
            p
        })
        .collect()
}

fn moments(min: i64, pmf: &[f64]) -> (f64, f64) {
    let mean: f64 = pmf.iter().enumerate().map(|(i, p)| (min + i as i64) as f64 * p).sum();
    let var: f64 = pmf
        .iter()
        .enumerate()
        .map(|(i, p)| ((min + i as i64) as f64 - mean).powi(2) * p)
        .sum();
    (mean, var.sqrt())
}

fn discretized_normal(min: i64, max: i64, loc: f64, scale: f64) -> Vec<f64> {
    let mut pmf: Vec<f64> = (min..=max)
        .map(|k| {
            let k = k as f64;
            std_normal_cdf((k + 0.5 - loc) / scale) - std_normal_cdf((k - 0.5 - loc) / scale)
        })
        .collect();
    let total: f64 = pmf.iter().sum();
    for p in &mut pmf {
        *p /= total;
    }
    pmf
}

impl IntegerLaw {
    fn validate(&self, name: &str) -> Result<(), SimulateError> {
        let bad = |msg: String| Err(SimulateError::InvalidConfig(format!("{name}: {msg}")));
        if self.max <= self.min {
            return bad(format!("empty support [{}, {}]", self.min, self.max));
        }
        if !(self.mean > self.min as f64 && self.mean < self.max as f64) {
            return bad(format!("mean {} must lie inside ({}, {})", self.mean, self.min, self.max));
        }
        if self.sd.is_nan() || self.sd <= 0.0 {
            return bad(format!("sd {} must be positive", self.sd));
        }
        let bound = ((self.mean - self.min as f64) * (self.max as f64 - self.mean)).sqrt();
        if self.sd >= bound {
            return bad(format!("sd {} is not attainable on the support (max {bound:.4})", self.sd));
        }
        Ok(())
    }

    /// Moment-matched probability table, solved by damped Newton steps on
    /// the (location, log scale) of the underlying normal.
    pub(crate) fn table(&self, name: &str) -> Result<DiscreteTable, SimulateError> {
        self.validate(name)?;
        let target = [self.mean, self.sd];
        let residual = |loc: f64, log_scale: f64| {
            let (m, s) = moments(self.min, &discretized_normal(self.min, self.max, loc, log_scale.exp()));
            [m - target[0], s - target[1]]
        };
        let mut x = [self.mean, self.sd.ln()];
        let mut r = residual(x[0], x[1]);
        for _ in 0..200 {
            let norm = r[0].abs().max(r[1].abs());
            if norm < 1e-12 {
                break;
            }
            let h = 1e-6;
            let r0 = residual(x[0] + h, x[1]);
            let r1 = residual(x[0], x[1] + h);
            let j = [
                [(r0[0] - r[0]) / h, (r1[0] - r[0]) / h],
                [(r0[1] - r[1]) / h, (r1[1] - r[1]) / h],
            ];
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if det.abs() < 1e-300 {
                break;
            }
            let dx = [
                (j[1][1] * r[0] - j[0][1] * r[1]) / det,
                (-j[1][0] * r[0] + j[0][0] * r[1]) / det,
            ];
            let mut step = 1.0;
            loop {
                let cand = [x[0] - step * dx[0], x[1] - step * dx[1]];
                let rc = residual(cand[0], cand[1]);
                if rc[0].abs().max(rc[1].abs()) < norm || step < 1e-6 {
                    x = cand;
                    r = rc;
                    break;
                }
                step *= 0.5;
            }
        }
        if r[0].abs().max(r[1].abs()) > 1e-8 {
            return Err(SimulateError::InvalidConfig(format!(
                "{name}: cannot match mean {} and sd {} on [{}, {}]",
                self.mean, self.sd, self.min, self.max
            )));
        }
        let pmf = discretized_normal(self.min, self.max, x[0], x[1].exp());
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = pmf
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        Ok(DiscreteTable { min: self.min, cdf })
    }
}

impl BoundedLaw {
    /// Shape parameters of the rescaled Beta law, by the method of moments.
    pub fn beta_shapes(&self) -> Result<(f64, f64), SimulateError> {
        let width = self.max - self.min;
        if width.is_nan() || width <= 0.0 {
            return Err(SimulateError::InvalidConfig(format!(
                "prior: empty support [{}, {}]",
                self.min, self.max
            )));
        }
        let m = (self.mean - self.min) / width;
        let v = (self.sd / width).powi(2);
        if m.is_nan() || m <= 0.0 || m >= 1.0 || v.is_nan() || v <= 0.0 || v >= m * (1.0 - m) {
            return Err(SimulateError::InvalidConfig(format!(
                "prior: mean {} and sd {} are not attainable on [{}, {}]",
                self.mean, self.sd, self.min, self.max
            )));
        }
        let common = m * (1.0 - m) / v - 1.0;
        Ok((m * common, (1.0 - m) * common))
    }
}

pub(crate) fn validate_probability(name: &str, p: f64) -> Result<(), SimulateError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(SimulateError::InvalidConfig(format!("{name}: probability {p} outside [0, 1]")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_integer_laws_match_moments() {
        let laws = CovariateLaws::default();
        for (name, law) in [("age", laws.age), ("police", laws.police)] {
            let t = law.table(name).unwrap();
            let (m, s) = t.moments();
            assert!((m - law.mean).abs() < 1e-9, "{name} mean {m}");
            assert!((s - law.sd).abs() < 1e-9, "{name} sd {s}");
            assert_eq!(t.quantile(0.0), law.min);
            assert_eq!(t.quantile(1.0), law.max);
        }
    }

    #[test]
    fn infeasible_moments_rejected() {
        let law = IntegerLaw {
            min: 1,
            max: 5,
            mean: 3.0,
            sd: 2.5,
        };
        assert!(law.table("police").is_err());
    }

    #[test]
    fn prior_beta_shapes() {
        let (a, b) = CovariateLaws::default().prior.beta_shapes().unwrap();
        // mean and variance of the rescaled Beta reproduce the targets
        let mean = 1.0 + 97.0 * a / (a + b);
        let var = 97.0f64.powi(2) * a * b / ((a + b).powi(2) * (a + b + 1.0));
        assert!((mean - 34.91).abs() < 1e-10);
        assert!((var.sqrt() - 26.49).abs() < 1e-10);
    }
}
