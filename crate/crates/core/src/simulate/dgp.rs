use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use serde::Serialize;
use statrs::distribution::{Beta as BetaDist, ContinuousCDF};

use super::calibrate::{calibrate_change_intercept, calibrate_sigma};
use super::config::{Coefficients, DgpConfig, PostBounds, SigmaSpec, Truth};
use super::laws::{Dependence, DiscreteTable, COPULA_DIM};
use super::SimulateError;
use crate::dataio::{Dataset, SurveyRecord, Variable};
use crate::estimators::{Link, Term, Transform};
use crate::numerics::{std_normal_cdf, std_normal_quantile};

/// Lowest Post the instrument records.
pub(crate) const POST_FLOOR: f64 = 0.1;

const CALIBRATION_SEED: u64 = 0x5eed_ca1b;
const CALIBRATION_ROWS: usize = 200_000;

/// Truth with calibrated quantities filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ResolvedTruth {
    Tobit {
        gamma: f64,
        delta: Coefficients,
        sigma: f64,
    },
    Hurdle {
        link: Link,
        change: Coefficients,
        level: Coefficients,
        sigma: f64,
        transform: Transform,
    },
    Linear {
        coefficients: Coefficients,
        sigma: f64,
    },
}

#[derive(Debug, Clone)]
struct CovariateSampler {
    gender: f64,
    educ_int: f64,
    matching_gender: f64,
    age: DiscreteTable,
    police: DiscreteTable,
    prior_min: f64,
    prior_width: f64,
    prior_beta: Beta<f64>,
    prior_quantile: BetaDist,
    /// Lower Cholesky factor of the copula correlation.
    copula: Option<DMatrix<f64>>,
}

impl CovariateSampler {
    fn new(config: &DgpConfig) -> Result<Self, SimulateError> {
        let laws = &config.laws;
        let (a, b) = laws.prior.beta_shapes()?;
        let invalid = |e: &dyn std::fmt::Display| SimulateError::InvalidConfig(format!("prior: {e}"));
        let copula = match &config.dependence {
            Dependence::Independent => None,
            Dependence::GaussianCopula(r) => Some(copula_factor(r)?),
        };
        Ok(Self {
            gender: laws.gender,
            educ_int: laws.educ_int,
            matching_gender: laws.matching_gender,
            age: laws.age.table("age")?,
            police: laws.police.table("police")?,
            prior_min: laws.prior.min,
            prior_width: laws.prior.max - laws.prior.min,
            prior_beta: Beta::new(a, b).map_err(|e| invalid(&e))?,
            prior_quantile: BetaDist::new(a, b).map_err(|e| invalid(&e))?,
            copula,
        })
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> SurveyRecord {
        let (u, beta_draw) = match &self.copula {
            None => {
                let u: [f64; 5] = std::array::from_fn(|_| rng.random::<f64>());
                let x = self.prior_beta.sample(rng);
                ([u[0], u[1], u[2], u[3], u[4]], x)
            }
            Some(l) => {
                let z = DVector::from_fn(COPULA_DIM, |_, _| rng.sample::<f64, _>(StandardNormal));
                let c = l * z;
                let u: Vec<f64> = c.iter().map(|v| std_normal_cdf(*v)).collect();
                let x = self.prior_quantile.inverse_cdf(u[5]);
                ([u[0], u[1], u[2], u[3], u[4]], x)
            }
        };
        let prior = self.prior_min + self.prior_width * beta_draw;
        SurveyRecord {
            prior,
            change: false,
            post: prior,
            gender: u8::from(u[0] < self.gender),
            age: Some(self.age.quantile(u[1]) as u16),
            police: Some(self.police.quantile(u[2]) as u8),
            educ_int: u8::from(u[3] < self.educ_int),
            matching_gender: u8::from(u[4] < self.matching_gender),
        }
    }
}

fn copula_factor(r: &DMatrix<f64>) -> Result<DMatrix<f64>, SimulateError> {
    let bad = |msg: &str| Err(SimulateError::InvalidConfig(format!("copula correlation {msg}")));
    if r.shape() != (COPULA_DIM, COPULA_DIM) {
        return bad(&format!("must be {COPULA_DIM}x{COPULA_DIM}"));
    }
    for i in 0..COPULA_DIM {
        if (r[(i, i)] - 1.0).abs() > 1e-12 {
            return bad("needs a unit diagonal");
        }
        for j in 0..i {
            if (r[(i, j)] - r[(j, i)]).abs() > 1e-12 || r[(i, j)].abs() > 1.0 {
                return bad("must be symmetric with entries in [-1, 1]");
            }
        }
    }
    match r.clone().cholesky() {
        Some(c) => Ok(c.l()),
        None => bad("is not positive definite"),
    }
}

pub(crate) fn linear_index(coefs: &Coefficients, record: &SurveyRecord) -> f64 {
    coefs
        .iter()
        .map(|(t, c)| c * t.value(record).unwrap_or(f64::NAN))
        .sum()
}

/// A [`DgpConfig`] with tables built and calibrated quantities solved.
#[derive(Debug, Clone)]
pub struct ResolvedDgp {
    pub n: usize,
    pub seed: u64,
    pub bounds: PostBounds,
    pub truth: ResolvedTruth,
    sampler: CovariateSampler,
}

impl ResolvedDgp {
    pub fn new(config: &DgpConfig) -> Result<Self, SimulateError> {
        config.validate()?;
        let sampler = CovariateSampler::new(config)?;
        let needs_calibration = match &config.truth {
            Truth::Tobit(t) => matches!(t.sigma, SigmaSpec::Calibrated { .. }),
            Truth::Hurdle(h) => h.target_update_share.is_some(),
            Truth::Linear(_) => false,
        };
        let sample = if needs_calibration {
            let mut rng = rng_for(CALIBRATION_SEED, u64::MAX);
            (0..CALIBRATION_ROWS).map(|_| sampler.draw(&mut rng)).collect()
        } else {
            Vec::new()
        };
        let truth = match &config.truth {
            Truth::Tobit(t) => {
                let sigma = match t.sigma {
                    SigmaSpec::Fixed(s) => s,
                    SigmaSpec::Calibrated { censoring_share } => {
                        calibrate_sigma(&sample, t.gamma, &t.delta, censoring_share)?
                    }
                };
                ResolvedTruth::Tobit {
                    gamma: t.gamma,
                    delta: t.delta.clone(),
                    sigma,
                }
            }
            Truth::Hurdle(h) => {
                let mut change = h.change.clone();
                if let Some(share) = h.target_update_share {
                    let intercept = calibrate_change_intercept(&sample, h.link, &change, share)?;
                    for (t, c) in change.iter_mut() {
                        if *t == Term::Intercept {
                            *c = intercept;
                        }
                    }
                }
                ResolvedTruth::Hurdle {
                    link: h.link,
                    change,
                    level: h.level.clone(),
                    sigma: h.sigma,
                    transform: h.transform,
                }
            }
            Truth::Linear(l) => ResolvedTruth::Linear {
                coefficients: l.coefficients.clone(),
                sigma: l.sigma,
            },
        };
        Ok(Self {
            n: config.n,
            seed: config.seed,
            bounds: config.bounds,
            truth,
            sampler,
        })
    }

    /// Covariates only, `n` rows from `stream`.
    pub fn draw_covariates(&self, n: usize, stream: u64) -> Vec<SurveyRecord> {
        let mut rng = rng_for(self.seed, stream);
        (0..n).map(|_| self.sampler.draw(&mut rng)).collect()
    }

    /// One synthetic survey of `n` rows from `stream`.
    pub fn draw(&self, stream: u64) -> Dataset {
        let mut rng = rng_for(self.seed, stream);
        let records = (0..self.n)
            .map(|_| {
                let mut r = self.sampler.draw(&mut rng);
                self.outcome(&mut rng, &mut r);
                r
            })
            .collect();
        Dataset::from_records(records)
    }

    fn outcome<R: Rng>(&self, rng: &mut R, r: &mut SurveyRecord) {
        match &self.truth {
            ResolvedTruth::Tobit { gamma, delta, sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                let latent = gamma * r.prior + linear_index(delta, r) + sigma * z;
                if latent < r.prior {
                    r.change = true;
                    r.post = match self.bounds {
                        PostBounds::Instrument => latent.max(POST_FLOOR),
                        PostBounds::Latent => latent,
                    };
                } else {
                    r.change = false;
                    r.post = r.prior;
                }
            }
            ResolvedTruth::Hurdle {
                link,
                change,
                level,
                sigma,
                transform,
            } => {
                let u: f64 = rng.random();
                if u < link.cdf(linear_index(change, r)) {
                    r.change = true;
                    r.post = self.level_draw(rng, linear_index(level, r), *sigma, *transform, r.prior);
                } else {
                    r.change = false;
                    r.post = r.prior;
                }
            }
            ResolvedTruth::Linear { coefficients, sigma } => {
                r.change = true;
                r.post = self.level_draw(rng, linear_index(coefficients, r), *sigma, Transform::Identity, r.prior);
            }
        }
    }

    /// Post with `G(Post) ~ N(mean, σ²)`, truncated to `[0.1, Prior)` under
    /// instrument bounds.
    fn level_draw<R: Rng>(&self, rng: &mut R, mean: f64, sigma: f64, transform: Transform, prior: f64) -> f64 {
        match self.bounds {
            PostBounds::Latent => {
                let z: f64 = rng.sample(StandardNormal);
                transform.invert(mean + sigma * z)
            }
            PostBounds::Instrument => {
                let u: f64 = rng.random();
                let lo = g_of(transform, POST_FLOOR);
                let hi = g_of(transform, prior);
                let g = if sigma > 0.0 {
                    truncated_normal(mean, sigma, lo, hi, u)
                } else {
                    mean
                };
                let post = transform.invert(g.clamp(lo, hi));
                let post = if post >= prior { prior.next_down() } else { post };
                post.max(POST_FLOOR)
            }
        }
    }
}

fn g_of(transform: Transform, post: f64) -> f64 {
    match transform {
        Transform::Identity => post,
        Transform::Log => post.ln(),
    }
}

/// Inverse-CDF draw from N(mean, σ²) restricted to [lo, hi], working in the
/// nearer tail so the interval mass keeps its precision.
fn truncated_normal(mean: f64, sigma: f64, lo: f64, hi: f64, u: f64) -> f64 {
    let a = (lo - mean) / sigma;
    let b = (hi - mean) / sigma;
    let z = if a > 0.0 {
        let (pa, pb) = (std_normal_cdf(-a), std_normal_cdf(-b));
        if pa - pb > 0.0 {
            -std_normal_quantile(pb + u * (pa - pb))
        } else {
            a
        }
    } else {
        let (pa, pb) = (std_normal_cdf(a), std_normal_cdf(b));
        if pb - pa > 0.0 {
            std_normal_quantile(pa + u * (pb - pa))
        } else {
            b
        }
    };
    mean + sigma * z.clamp(a, b)
}

pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws the survey for `config` (stream 0).
pub fn simulate_survey(config: &DgpConfig) -> Result<Dataset, SimulateError> {
    Ok(ResolvedDgp::new(config)?.draw(0))
}

/// Blanks `count` randomly chosen values of `var` (Age or Police).
pub fn plant_missing(data: &mut Dataset, var: Variable, count: usize, seed: u64) -> Result<(), SimulateError> {
    if !matches!(var, Variable::Age | Variable::Police) {
        return Err(SimulateError::NotNullable(var));
    }
    let candidates: Vec<usize> = data
        .rows()
        .iter()
        .enumerate()
        .filter(|(_, row)| row.record.as_ref().is_some_and(|r| r.value(var).is_some()))
        .map(|(i, _)| i)
        .collect();
    if count > candidates.len() {
        return Err(SimulateError::TooManyMissing {
            requested: count,
            available: candidates.len(),
        });
    }
    let stream = u64::MAX - 1 - Variable::ALL.iter().position(|v| *v == var).unwrap_or(0) as u64;
    let mut rng = rng_for(seed, stream);
    let mut chosen: Vec<usize> = sample(&mut rng, candidates.len(), count).into_iter().collect();
    chosen.sort_unstable();
    let rows = data.rows_mut();
    for i in chosen {
        if let Some(r) = rows[candidates[i]].record.as_mut() {
            match var {
                Variable::Age => r.age = None,
                _ => r.police = None,
            }
        }
    }
    Ok(())
}
