use super::config::Coefficients;
use super::dgp::linear_index;
use super::SimulateError;
use crate::dataio::SurveyRecord;
use crate::estimators::{Link, Term};
use crate::numerics::std_normal_cdf;

/// Expected share of non-updaters, mean of `Φ((γ·Prior + Xδ − Prior)/σ)`.
pub fn censoring_share(covariates: &[SurveyRecord], gamma: f64, delta: &Coefficients, sigma: f64) -> f64 {
    let total: f64 = covariates
        .iter()
        .map(|r| std_normal_cdf((gamma * r.prior + linear_index(delta, r) - r.prior) / sigma))
        .sum();
    total / covariates.len() as f64
}

/// Expected share of updaters, mean of `F(change index)`.
pub fn update_share(covariates: &[SurveyRecord], link: Link, change: &Coefficients) -> f64 {
    let total: f64 = covariates.iter().map(|r| link.cdf(linear_index(change, r))).sum();
    total / covariates.len() as f64
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// σ giving the target censoring share. The share moves monotonically from
/// the share of rows with a positive margin (σ → 0) towards one half (σ → ∞),
/// so the target must lie strictly between the two.
pub(crate) fn calibrate_sigma(
    covariates: &[SurveyRecord],
    gamma: f64,
    delta: &Coefficients,
    target: f64,
) -> Result<f64, SimulateError> {
    let share = |log_sigma: f64| censoring_share(covariates, gamma, delta, log_sigma.exp());
    let (lo, hi) = (-20.0, 20.0);
    let (s_lo, s_hi) = (share(lo), share(hi));
    let between = (s_lo.min(s_hi)..=s_lo.max(s_hi)).contains(&target);
    if !between {
        return Err(SimulateError::InvalidConfig(format!(
            "censoring share {target} is not attainable (range {:.4} to {:.4})",
            s_lo.min(s_hi),
            s_lo.max(s_hi)
        )));
    }
    let sign = if s_lo > s_hi { -1.0 } else { 1.0 };
    Ok(bisect(lo, hi, |x| sign * (share(x) - target)).exp())
}

/// Intercept of the change index giving the target updater share.
pub(crate) fn calibrate_change_intercept(
    covariates: &[SurveyRecord],
    link: Link,
    change: &Coefficients,
    target: f64,
) -> Result<f64, SimulateError> {
    let with_intercept = |c0: f64| {
        let coefs: Coefficients = change
            .iter()
            .map(|(t, c)| (*t, if *t == Term::Intercept { c0 } else { *c }))
            .collect();
        update_share(covariates, link, &coefs)
    };
    let (lo, hi) = (-100.0, 100.0);
    if !(with_intercept(lo) < target && with_intercept(hi) > target) {
        return Err(SimulateError::InvalidConfig(format!("update share {target} is not attainable")));
    }
    Ok(bisect(lo, hi, |c0| with_intercept(c0) - target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::Variable;
    use crate::simulate::{DgpConfig, ModelKind, ResolvedDgp, ResolvedTruth, TobitTruth, SURVEY_CENSORING_SHARE};

    fn sample(n: usize) -> Vec<SurveyRecord> {
        let dgp = ResolvedDgp::new(&DgpConfig::new(ModelKind::Tobit, 100, 0)).unwrap();
        dgp.draw_covariates(n, 3)
    }

    #[test]
    fn calibrated_sigma_hits_target() {
        let truth = TobitTruth::survey();
        let xs = sample(20_000);
        let sigma = calibrate_sigma(&xs, truth.gamma, &truth.delta, SURVEY_CENSORING_SHARE).unwrap();
        let share = censoring_share(&xs, truth.gamma, &truth.delta, sigma);
        assert!((share - SURVEY_CENSORING_SHARE).abs() < 1e-9);
        assert!(calibrate_sigma(&xs, truth.gamma, &truth.delta, 0.2).is_err());
    }

    #[test]
    fn share_non_decreasing_as_sigma_shrinks() {
        let truth = TobitTruth::survey();
        let xs = sample(5_000);
        let mut prev = 0.0;
        for k in 0..60 {
            let sigma = 1000.0 * 0.85f64.powi(k);
            let share = censoring_share(&xs, truth.gamma, &truth.delta, sigma);
            assert!(share >= prev - 1e-12, "sigma {sigma}: {share} < {prev}");
            prev = share;
        }
    }

    #[test]
    fn resolved_sigma_is_seed_independent() {
        let a = ResolvedDgp::new(&DgpConfig::new(ModelKind::Tobit, 100, 1)).unwrap();
        let b = ResolvedDgp::new(&DgpConfig::new(ModelKind::Tobit, 100, 2)).unwrap();
        let (ResolvedTruth::Tobit { sigma: sa, .. }, ResolvedTruth::Tobit { sigma: sb, .. }) = (&a.truth, &b.truth)
        else {
            panic!()
        };
        assert_eq!(sa, sb);
        assert!(*sa > 0.0);
    }

    #[test]
    fn change_intercept_hits_share() {
        let xs = sample(20_000);
        let mut change = crate::simulate::HurdleTruth::survey().change;
        let c0 = calibrate_change_intercept(&xs, Link::Probit, &change, 0.044).unwrap();
        for (t, c) in change.iter_mut() {
            if *t == Term::Intercept {
                *c = c0;
            }
        }
        assert!((update_share(&xs, Link::Probit, &change) - 0.044).abs() < 1e-9);
        assert!(change.iter().any(|(t, _)| *t == Term::Covariate(Variable::Prior)));
    }
}
