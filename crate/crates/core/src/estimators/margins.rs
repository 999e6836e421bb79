use nalgebra::DVector;
use serde::Serialize;

use super::binary::BinaryFit;
use super::design::DesignMatrix;
use super::inference::normal_p_value;
use super::EstimationError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EffectKind {
    /// Average derivative g(x'β)·β_k.
    Continuous,
    /// Average change in probability when a 0/1 column flips from 0 to 1.
    Discrete,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalEffect {
    pub name: String,
    pub kind: EffectKind,
    pub effect: f64,
    /// Delta method on the fit covariance.
    pub std_error: f64,
    pub p_value: f64,
}

/// Average marginal effects for every coefficient, including the intercept
/// (treated as continuous, so its entry is the mean density times β₀).
pub fn marginal_effects(fit: &BinaryFit, x: &DesignMatrix) -> Result<Vec<MarginalEffect>, EstimationError> {
    fit.check_conformable(x)?;
    let n = x.nrows();
    if n == 0 {
        return Err(EstimationError::Conformability("design has no rows".into()));
    }
    let nf = n as f64;
    let link = fit.link;
    let beta = fit.beta();
    let xm = x.matrix();
    let eta = xm * &beta;
    let k = x.ncols();

    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        let mut grad = DVector::zeros(k);
        let (kind, effect) = if x.is_binary_column(j) {
            let mut effect = 0.0;
            for i in 0..n {
                let base = eta[i] - xm[(i, j)] * beta[j];
                let (e1, e0) = (base + beta[j], base);
                effect += link.cdf(e1) - link.cdf(e0);
                let (f1, f0) = (link.pdf(e1), link.pdf(e0));
                for c in 0..k {
                    let (x1, x0) = if c == j { (1.0, 0.0) } else { (xm[(i, c)], xm[(i, c)]) };
                    grad[c] += f1 * x1 - f0 * x0;
                }
            }
            grad /= nf;
            (EffectKind::Discrete, effect / nf)
        } else {
            let mut mean_density = 0.0;
            for i in 0..n {
                let g = link.pdf(eta[i]);
                let dg = link.pdf_derivative(eta[i]);
                mean_density += g;
                for c in 0..k {
                    grad[c] += dg * xm[(i, c)] * beta[j];
                }
            }
            mean_density /= nf;
            grad /= nf;
            grad[j] += mean_density;
            (EffectKind::Continuous, mean_density * beta[j])
        };
        let variance = grad.dot(&(&fit.covariance * &grad));
        let std_error = variance.max(0.0).sqrt();
        out.push(MarginalEffect {
            name: x.names()[j].clone(),
            kind,
            effect,
            std_error,
            p_value: normal_p_value(effect / std_error),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{fit_binary, Link, NamedVector};
    use nalgebra::DMatrix;

    fn fake_fit(link: Link, names: &[&str], beta: &[f64]) -> BinaryFit {
        let names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        let k = beta.len();
        BinaryFit {
            link,
            coefficients: NamedVector::new(names.clone(), beta.to_vec()),
            standard_errors: NamedVector::new(names, vec![0.1; k]),
            log_likelihood: 0.0,
            aic: 0.0,
            covariance: DMatrix::identity(k, k) * 0.01,
            n: 0,
            n_positive: 0,
            iterations: 0,
        }
    }

    fn design() -> DesignMatrix {
        DesignMatrix::with_intercept(
            6,
            vec![
                ("c".into(), vec![0.2, -1.0, 0.7, 2.0, 1.1, -0.4]),
                ("d".into(), vec![0.0, 1.0, 1.0, 0.0, 1.0, 0.0]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn zero_coefficient_gives_zero_effect() {
        for link in [Link::Probit, Link::Logit] {
            let fit = fake_fit(link, &["Constant", "c", "d"], &[0.3, 0.0, 0.0]);
            let me = marginal_effects(&fit, &design()).unwrap();
            assert_eq!(me[1].effect, 0.0);
            assert_eq!(me[2].effect, 0.0);
        }
    }

    #[test]
    fn intercept_only_density_factor() {
        let x = DesignMatrix::with_intercept(4, vec![]).unwrap();
        let fit = fake_fit(Link::Probit, &["Constant"], &[0.0]);
        let me = marginal_effects(&fit, &x).unwrap();
        assert_eq!(me[0].effect, 0.0);
        let fit = fake_fit(Link::Probit, &["Constant"], &[1.0]);
        let me = marginal_effects(&fit, &x).unwrap();
        assert!((me[0].effect - 0.398_942_280_401_432_7 * (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn continuous_effect_is_derivative_of_mean_probability() {
        let x = design();
        for link in [Link::Probit, Link::Logit] {
            let beta = [-0.2, 0.8, -0.5];
            let fit = fake_fit(link, &["Constant", "c", "d"], &beta);
            let me = marginal_effects(&fit, &x).unwrap();
            let mean_p = |shift: f64| {
                let mut xm = x.matrix().clone();
                for i in 0..xm.nrows() {
                    xm[(i, 1)] += shift;
                }
                let eta = xm * DVector::from_column_slice(&beta);
                eta.iter().map(|e| link.cdf(*e)).sum::<f64>() / eta.len() as f64
            };
            let h = 1e-5;
            let fd = (mean_p(h) - mean_p(-h)) / (2.0 * h);
            assert!((me[1].effect - fd).abs() < 1e-9);
            assert_eq!(me[1].kind, EffectKind::Continuous);
            assert_eq!(me[2].kind, EffectKind::Discrete);
        }
    }

    #[test]
    fn delta_method_gradient() {
        // numerically differentiate each AME with respect to β and compare SEs
        let n = 40;
        let c: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let d: Vec<f64> = (0..n).map(|i| f64::from(i % 3 == 0)).collect();
        let y: Vec<bool> = (0..n)
            .map(|i| ((3.0 * i as f64).sin() + 0.5 * c[i] > 0.0) ^ (i % 5 == 0))
            .collect();
        let x = DesignMatrix::with_intercept(n, vec![("c".into(), c), ("d".into(), d)]).unwrap();
        let fit = fit_binary(&y, &x, Link::Logit).unwrap();
        let me = marginal_effects(&fit, &x).unwrap();
        let k = 3;
        for (j, effect) in me.iter().enumerate() {
            let mut grad = DVector::zeros(k);
            for c in 0..k {
                let h = 1e-6;
                let mut up = fit.clone();
                let mut down = fit.clone();
                let mut b_up = fit.coefficients.values().to_vec();
                let mut b_down = b_up.clone();
                b_up[c] += h;
                b_down[c] -= h;
                up.coefficients = NamedVector::new(fit.names().to_vec(), b_up);
                down.coefficients = NamedVector::new(fit.names().to_vec(), b_down);
                let e_up = marginal_effects(&up, &x).unwrap()[j].effect;
                let e_down = marginal_effects(&down, &x).unwrap()[j].effect;
                grad[c] = (e_up - e_down) / (2.0 * h);
            }
            let se = grad.dot(&(&fit.covariance * &grad)).sqrt();
            assert!((se - effect.std_error).abs() < 1e-6 * se.max(1.0), "{j}");
        }
    }
}
