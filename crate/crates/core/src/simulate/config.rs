use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::laws::{validate_probability, CovariateLaws, Dependence};
use super::SimulateError;
use crate::dataio::Variable;
use crate::estimators::{Link, Term, Transform};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Tobit,
    Hurdle,
    /// Least squares of Post on an all-updater sample.
    Linear,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Tobit => "tobit",
            ModelKind::Hurdle => "hurdle",
            ModelKind::Linear => "linear",
        })
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "tobit" => Ok(ModelKind::Tobit),
            "hurdle" => Ok(ModelKind::Hurdle),
            "linear" | "ols" => Ok(ModelKind::Linear),
            other => Err(format!("unknown model `{other}` (expected tobit, hurdle or linear)")),
        }
    }
}

/// Whether simulated Post values are forced into the survey's observed range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PostBounds {
    /// Updaters' Post lies in `[0.1, Prior)`, the instrument's observed range.
    /// Tobit draws are clamped; level-equation draws are truncated.
    Instrument,
    /// Post is the untouched model draw, so the estimators see exactly the
    /// likelihood they assume. Records may fall outside the coded ranges.
    Latent,
}

impl FromStr for PostBounds {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "instrument" => Ok(PostBounds::Instrument),
            "latent" => Ok(PostBounds::Latent),
            other => Err(format!("unknown bounds `{other}` (expected instrument or latent)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SigmaSpec {
    Fixed(f64),
    /// σ chosen so the expected share of non-updaters equals this value.
    Calibrated { censoring_share: f64 },
}

/// Coefficient on each term of a linear index.
pub type Coefficients = Vec<(Term, f64)>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TobitTruth {
    /// Coefficient on Prior in the latent posterior.
    pub gamma: f64,
    /// Intercept and covariate coefficients of the latent posterior.
    pub delta: Coefficients,
    pub sigma: SigmaSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HurdleTruth {
    pub link: Link,
    /// Change-decision index, Prior included.
    pub change: Coefficients,
    /// Mean of G(Post) among updaters, Prior included.
    pub level: Coefficients,
    pub sigma: f64,
    pub transform: Transform,
    /// When set, the change intercept is recalibrated so the expected
    /// updater share equals this value.
    pub target_update_share: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearTruth {
    /// Prior included.
    pub coefficients: Coefficients,
    /// Zero gives an exact linear relation.
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Truth {
    Tobit(TobitTruth),
    Hurdle(HurdleTruth),
    Linear(LinearTruth),
}

/// Everything that determines a synthetic survey.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DgpConfig {
    pub n: usize,
    pub seed: u64,
    pub truth: Truth,
    pub laws: CovariateLaws,
    pub dependence: Dependence,
    pub bounds: PostBounds,
}

/// Share of non-updaters in the survey, 1 − 127/2885.
pub const SURVEY_CENSORING_SHARE: f64 = 1.0 - 127.0 / 2885.0;

fn cov(v: Variable) -> Term {
    Term::Covariate(v)
}

impl TobitTruth {
    /// Estimated `Prior − Post` equation of the survey, mapped to the latent
    /// model with γ = 1 − 0.502 and δ = −θ.
    pub fn survey() -> Self {
        Self {
            gamma: 0.498,
            delta: vec![
                (Term::Intercept, 232.149),
                (cov(Variable::Age), 0.728),
                (cov(Variable::Gender), 18.036),
                (cov(Variable::MatchingGender), -63.480),
                (cov(Variable::EducInt), -19.307),
            ],
            sigma: SigmaSpec::Calibrated {
                censoring_share: SURVEY_CENSORING_SHARE,
            },
        }
    }
}

impl HurdleTruth {
    /// Probit change decision and identity-scale level regression of the survey.
    pub fn survey() -> Self {
        Self {
            link: Link::Probit,
            change: vec![
                (Term::Intercept, -2.813),
                (cov(Variable::Prior), 0.003),
                (cov(Variable::Age), -0.009),
                (cov(Variable::Gender), -0.238),
                (cov(Variable::MatchingGender), 0.804),
                (cov(Variable::EducInt), 0.261),
            ],
            level: vec![
                (Term::Intercept, 1.697),
                (cov(Variable::Prior), 0.023),
                (cov(Variable::Age), 0.026),
                (cov(Variable::Gender), 0.988),
                (cov(Variable::MatchingGender), 1.074),
                (cov(Variable::EducInt), -4.188),
                (cov(Variable::Police), 0.494),
            ],
            sigma: 2.375,
            transform: Transform::Identity,
            target_update_share: None,
        }
    }
}

impl LinearTruth {
    /// Level regression of the survey's updaters.
    pub fn survey() -> Self {
        Self {
            coefficients: HurdleTruth::survey().level,
            sigma: 2.375,
        }
    }
}

impl DgpConfig {
    pub fn new(model: ModelKind, n: usize, seed: u64) -> Self {
        let (truth, bounds) = match model {
            ModelKind::Tobit => (Truth::Tobit(TobitTruth::survey()), PostBounds::Instrument),
            ModelKind::Hurdle => (Truth::Hurdle(HurdleTruth::survey()), PostBounds::Instrument),
            ModelKind::Linear => (Truth::Linear(LinearTruth::survey()), PostBounds::Latent),
        };
        Self {
            n,
            seed,
            truth,
            laws: CovariateLaws::default(),
            dependence: Dependence::Independent,
            bounds,
        }
    }

    pub fn model(&self) -> ModelKind {
        match self.truth {
            Truth::Tobit(_) => ModelKind::Tobit,
            Truth::Hurdle(_) => ModelKind::Hurdle,
            Truth::Linear(_) => ModelKind::Linear,
        }
    }

    pub fn validate(&self) -> Result<(), SimulateError> {
        let bad = |msg: String| Err(SimulateError::InvalidConfig(msg));
        if self.n < 50 {
            return bad(format!("n = {} is below the minimum of 50", self.n));
        }
        validate_probability("gender", self.laws.gender)?;
        validate_probability("educ_int", self.laws.educ_int)?;
        validate_probability("matching_gender", self.laws.matching_gender)?;
        if self.bounds == PostBounds::Instrument && self.laws.prior.min <= 0.1 {
            return bad("instrument bounds need the prior law's minimum above 0.1".into());
        }
        if self.laws.prior.min < 0.0 || self.laws.prior.max > 100.0 {
            return bad("prior law must stay inside [0, 100]".into());
        }
        let finite = |c: &Coefficients| c.iter().all(|(_, v)| v.is_finite());
        match &self.truth {
            Truth::Tobit(t) => {
                if !t.gamma.is_finite() || !finite(&t.delta) {
                    return bad("tobit coefficients must be finite".into());
                }
                if t.delta.iter().any(|(term, _)| *term == Term::Covariate(Variable::Prior)) {
                    return bad("the Prior coefficient of the tobit model is gamma".into());
                }
                match t.sigma {
                    SigmaSpec::Fixed(s) if !(s > 0.0 && s.is_finite()) => {
                        return bad(format!("sigma {s} must be positive"))
                    }
                    SigmaSpec::Calibrated { censoring_share: c } if !(c > 0.0 && c < 1.0) => {
                        return bad(format!("censoring share {c} must lie in (0, 1)"))
                    }
                    _ => {}
                }
            }
            Truth::Hurdle(h) => {
                if !finite(&h.change) || !finite(&h.level) {
                    return bad("hurdle coefficients must be finite".into());
                }
                if !(h.sigma > 0.0 && h.sigma.is_finite()) {
                    return bad(format!("sigma {} must be positive", h.sigma));
                }
                if let Some(s) = h.target_update_share {
                    if !(s > 0.0 && s < 1.0) {
                        return bad(format!("update share {s} must lie in (0, 1)"));
                    }
                    if !h.change.iter().any(|(t, _)| *t == Term::Intercept) {
                        return bad("calibrating the update share needs a change intercept".into());
                    }
                }
            }
            Truth::Linear(l) => {
                if !finite(&l.coefficients) {
                    return bad("linear coefficients must be finite".into());
                }
                if !(l.sigma >= 0.0 && l.sigma.is_finite()) {
                    return bad(format!("sigma {} must be non-negative", l.sigma));
                }
            }
        }
        for (_, t) in self.terms() {
            if let Term::Covariate(Variable::Change | Variable::Post) = t {
                return bad(format!("{} cannot drive the simulated outcome", t.label()));
            }
        }
        Ok(())
    }

    fn terms(&self) -> Vec<(&'static str, Term)> {
        let pick = |stage: &'static str, c: &Coefficients| c.iter().map(move |(t, _)| (stage, *t)).collect::<Vec<_>>();
        match &self.truth {
            Truth::Tobit(t) => pick("delta", &t.delta),
            Truth::Hurdle(h) => {
                let mut v = pick("change", &h.change);
                v.extend(pick("level", &h.level));
                v
            }
            Truth::Linear(l) => pick("beta", &l.coefficients),
        }
    }

    /// Sets one truth parameter by name, e.g. `gamma`, `sigma`,
    /// `delta.age`, `change.const`, `level.police`, `censoring`,
    /// `update_share`, `p.gender`. Unknown coefficient names are added.
    pub fn set_param(&mut self, name: &str, value: f64) -> Result<(), SimulateError> {
        let unknown = || SimulateError::InvalidConfig(format!("unknown parameter `{name}` for this model"));
        let key = name.trim().to_ascii_lowercase();
        if let Some(var) = key.strip_prefix("p.") {
            let slot = match Variable::from_name(var) {
                Some(Variable::Gender) => &mut self.laws.gender,
                Some(Variable::EducInt) => &mut self.laws.educ_int,
                Some(Variable::MatchingGender) => &mut self.laws.matching_gender,
                _ => return Err(unknown()),
            };
            *slot = value;
            return Ok(());
        }
        let (stage, term) = match key.split_once('.') {
            Some((stage, t)) => (stage, Some(Term::from_label(t).ok_or_else(unknown)?)),
            None => (key.as_str(), None),
        };
        let set = |coefs: &mut Coefficients, term: Term| {
            match coefs.iter_mut().find(|(t, _)| *t == term) {
                Some(slot) => slot.1 = value,
                None => coefs.push((term, value)),
            }
        };
        match (&mut self.truth, stage, term) {
            (Truth::Tobit(t), "gamma", None) => t.gamma = value,
            (Truth::Tobit(t), "sigma", None) => t.sigma = SigmaSpec::Fixed(value),
            (Truth::Tobit(t), "censoring", None) => t.sigma = SigmaSpec::Calibrated { censoring_share: value },
            (Truth::Tobit(t), "delta", Some(term)) => set(&mut t.delta, term),
            (Truth::Hurdle(h), "sigma", None) => h.sigma = value,
            (Truth::Hurdle(h), "update_share", None) => h.target_update_share = Some(value),
            (Truth::Hurdle(h), "change", Some(term)) => set(&mut h.change, term),
            (Truth::Hurdle(h), "level", Some(term)) => set(&mut h.level, term),
            (Truth::Linear(l), "sigma", None) => l.sigma = value,
            (Truth::Linear(l), "beta", Some(term)) => set(&mut l.coefficients, term),
            _ => return Err(unknown()),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn survey_censoring_share() {
        assert!((SURVEY_CENSORING_SHARE - 2758.0 / 2885.0).abs() < 1e-15);
    }

    #[test]
    fn parameters_by_name() {
        let mut c = DgpConfig::new(ModelKind::Tobit, 100, 1);
        c.set_param("gamma", 0.7).unwrap();
        c.set_param("delta.Age", 1.5).unwrap();
        c.set_param("delta.const", 10.0).unwrap();
        c.set_param("sigma", 3.0).unwrap();
        let Truth::Tobit(t) = &c.truth else { panic!() };
        assert_eq!(t.gamma, 0.7);
        assert!(t.delta.contains(&(Term::Covariate(Variable::Age), 1.5)));
        assert!(t.delta.contains(&(Term::Intercept, 10.0)));
        assert_eq!(t.sigma, SigmaSpec::Fixed(3.0));
        assert!(c.set_param("level.age", 1.0).is_err());
        assert!(c.set_param("delta.income", 1.0).is_err());
        c.set_param("p.gender", 0.4).unwrap();
        assert_eq!(c.laws.gender, 0.4);
    }

    #[test]
    fn validation() {
        assert!(DgpConfig::new(ModelKind::Tobit, 49, 1).validate().is_err());
        assert!(DgpConfig::new(ModelKind::Hurdle, 50, 1).validate().is_ok());
        let mut c = DgpConfig::new(ModelKind::Hurdle, 100, 1);
        c.laws.gender = 1.2;
        assert!(c.validate().is_err());
        let mut c = DgpConfig::new(ModelKind::Tobit, 100, 1);
        c.set_param("sigma", 0.0).unwrap();
        assert!(c.validate().is_err());
        let mut c = DgpConfig::new(ModelKind::Linear, 100, 1);
        c.set_param("sigma", 0.0).unwrap();
        assert!(c.validate().is_ok());
    }
}
