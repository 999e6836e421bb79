//! Beta-Bernoulli beliefs about a victimization probability and the two
//! closed forms of the posterior mean after an informational shock.
//!
//! Everything here works on the probability scale `[0, 1]`; survey percents
//! are converted in [`crate::dataio`].

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BeliefError {
    #[error("Beta parameters must be finite and positive (alpha = {alpha}, beta = {beta})")]
    InvalidBelief { alpha: f64, beta: f64 },
    #[error("perceived information value must lie in [0, 1] (got {0})")]
    InvalidSignal(f64),
    #[error("shock weight must be finite and positive (got {0})")]
    InvalidWeight(f64),
    #[error("prior concentration must be finite and positive (got {0})")]
    InvalidConcentration(f64),
    #[error("informational quality must be finite and non-negative (got {0})")]
    InvalidQuality(f64),
    #[error("probability must lie in [0, 1] (got {0})")]
    InvalidProbability(f64),
    #[error("evidence with no observations carries no information value")]
    EmptyEvidence,
}

/// A respondent's Beta(α, β) belief over the victimization probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaBelief {
    alpha: f64,
    beta: f64,
}

impl BetaBelief {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, BeliefError> {
        if alpha.is_finite() && beta.is_finite() && alpha > 0.0 && beta > 0.0 {
            Ok(Self { alpha, beta })
        } else {
            Err(BeliefError::InvalidBelief { alpha, beta })
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// α + β, the number of pseudo-observations behind the prior.
    pub fn concentration(&self) -> f64 {
        self.alpha + self.beta
    }

    pub fn mean(&self) -> f64 {
        prior_mean(self)
    }
}

/// Observed victimization outcomes: `n1` ones and `n0` zeros.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EvidenceCounts {
    pub n1: u64,
    pub n0: u64,
}

impl EvidenceCounts {
    pub fn new(n1: u64, n0: u64) -> Self {
        Self { n1, n0 }
    }

    pub fn total(&self) -> u64 {
        self.n1 + self.n0
    }

    /// The shock these counts represent: π* = n1/N with weight N.
    pub fn to_shock(&self) -> Result<InfoShock, BeliefError> {
        let total = self.total();
        if total == 0 {
            return Err(BeliefError::EmptyEvidence);
        }
        InfoShock::new(self.n1 as f64 / total as f64, total as f64)
    }
}

/// Perceived information value π* carried with an effective sample size N.
///
/// N is real-valued: once the shock is summarized by its quality it need not
/// correspond to whole observations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfoShock {
    pi_star: f64,
    weight: f64,
}

impl InfoShock {
    pub fn new(pi_star: f64, weight: f64) -> Result<Self, BeliefError> {
        if !(0.0..=1.0).contains(&pi_star) {
            return Err(BeliefError::InvalidSignal(pi_star));
        }
        if !(weight.is_finite() && weight > 0.0) {
            return Err(BeliefError::InvalidWeight(weight));
        }
        Ok(Self { pi_star, weight })
    }

    pub fn pi_star(&self) -> f64 {
        self.pi_star
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }
}

/// Informational quality η = N/(α+β) ∈ [0, ∞).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityWeight {
    eta: f64,
}

impl QualityWeight {
    pub fn new(eta: f64) -> Result<Self, BeliefError> {
        if eta.is_finite() && eta >= 0.0 {
            Ok(Self { eta })
        } else {
            Err(BeliefError::InvalidQuality(eta))
        }
    }

    pub fn from_shock(shock: &InfoShock, concentration: f64) -> Result<Self, BeliefError> {
        check_concentration(concentration)?;
        Self::new(shock.weight / concentration)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
}

fn check_probability(p: f64) -> Result<(), BeliefError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(BeliefError::InvalidProbability(p))
    }
}

fn check_concentration(c: f64) -> Result<(), BeliefError> {
    if c.is_finite() && c > 0.0 {
        Ok(())
    } else {
        Err(BeliefError::InvalidConcentration(c))
    }
}

/// Moves `pi0` toward `pi_star` by the fraction `w ∈ [0,1]`.
///
/// Written as a shift from the prior so the result is monotone in `w` under
/// rounding; the clamp keeps it inside the interval spanned by the endpoints.
fn shrink(pi0: f64, pi_star: f64, w: f64) -> f64 {
    let lo = pi0.min(pi_star);
    let hi = pi0.max(pi_star);
    (pi0 + (pi_star - pi0) * w).clamp(lo, hi)
}

/// Prior mean α/(α+β).
pub fn prior_mean(belief: &BetaBelief) -> f64 {
    belief.alpha / (belief.alpha + belief.beta)
}

/// Conjugate update: Beta(α + n1, β + n0).
pub fn update_conjugate(belief: &BetaBelief, evidence: &EvidenceCounts) -> BetaBelief {
    BetaBelief {
        alpha: belief.alpha + evidence.n1 as f64,
        beta: belief.beta + evidence.n0 as f64,
    }
}

/// Posterior mean as the weighted average
/// `N/(α+β+N)·π* + (α+β)/(α+β+N)·π0`.
pub fn posterior_mean_structural(pi0: f64, shock: &InfoShock, concentration: f64) -> Result<f64, BeliefError> {
    check_probability(pi0)?;
    check_concentration(concentration)?;
    let w = shock.weight / (concentration + shock.weight);
    Ok(shrink(pi0, shock.pi_star, w))
}

/// Posterior mean in the quality form `(1 + 1/η)⁻¹·π* + (1 + η)⁻¹·π0`.
///
/// At η = 0 the shock carries no weight and the prior is returned exactly.
pub fn posterior_mean_quality(pi0: f64, pi_star: f64, quality: QualityWeight) -> Result<f64, BeliefError> {
    check_probability(pi0)?;
    check_probability(pi_star)?;
    let eta = quality.eta;
    if eta == 0.0 {
        return Ok(pi0);
    }
    // (1 + 1/η)⁻¹ = η/(1+η)
    let w = eta / (1.0 + eta);
    Ok(shrink(pi0, pi_star, w))
}
