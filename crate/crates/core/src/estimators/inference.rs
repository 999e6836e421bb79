use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, FisherSnedecor, StudentsT};

use crate::numerics::std_normal_cdf;

/// One row of a coefficient table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    /// z for likelihood fits, t for least squares.
    pub statistic: f64,
    pub p_value: f64,
}

/// Two-sided p-value from the standard normal.
pub fn normal_p_value(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    2.0 * std_normal_cdf(-z.abs())
}

/// Two-sided p-value from Student's t with `df` degrees of freedom.
pub fn t_p_value(t: f64, df: f64) -> f64 {
    if t.is_nan() || df <= 0.0 {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    match StudentsT::new(0.0, 1.0, df) {
        Ok(dist) => 2.0 * dist.cdf(-t.abs()),
        Err(_) => f64::NAN,
    }
}

/// Upper-tail chi-square p-value.
pub fn chi2_p_value(x: f64, df: f64) -> f64 {
    if x.is_nan() || df <= 0.0 {
        return f64::NAN;
    }
    if x.is_infinite() {
        return 0.0;
    }
    match ChiSquared::new(df) {
        Ok(dist) => dist.sf(x),
        Err(_) => f64::NAN,
    }
}

/// Upper-tail F p-value.
pub(crate) fn f_p_value(x: f64, df1: f64, df2: f64) -> f64 {
    if x.is_nan() || df1 <= 0.0 || df2 <= 0.0 {
        return f64::NAN;
    }
    if x.is_infinite() {
        return 0.0;
    }
    match FisherSnedecor::new(df1, df2) {
        Ok(dist) => dist.sf(x),
        Err(_) => f64::NAN,
    }
}

/// `*` p < 0.1, `**` p < 0.05, `***` p < 0.01.
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.1 {
        "*"
    } else {
        ""
    }
}

pub(crate) fn coefficient(name: &str, estimate: f64, std_error: f64, t_df: Option<f64>) -> Coefficient {
    let statistic = estimate / std_error;
    let p_value = match t_df {
        Some(df) => t_p_value(statistic, df),
        None => normal_p_value(statistic),
    };
    Coefficient {
        name: name.to_string(),
        estimate,
        std_error,
        statistic,
        p_value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_p_values() {
        assert!((normal_p_value(1.959963984540054) - 0.05).abs() < 1e-12);
        assert!((normal_p_value(-1.959963984540054) - 0.05).abs() < 1e-12);
        // t(10) two-sided 5% critical value 2.228138851986
        assert!((t_p_value(2.228138851986, 10.0) - 0.05).abs() < 1e-9);
        // chi-square(5) upper 5% point 11.0704976935
        assert!((chi2_p_value(11.0704976935, 5.0) - 0.05).abs() < 1e-9);
        // F(6, 114) at 2.18 is close to the 5% point
        assert!((f_p_value(2.1797, 6.0, 114.0) - 0.05).abs() < 1e-3);
    }

    #[test]
    fn stars_legend() {
        assert_eq!(significance_stars(0.005), "***");
        assert_eq!(significance_stars(0.01), "**");
        assert_eq!(significance_stars(0.049), "**");
        assert_eq!(significance_stars(0.05), "*");
        assert_eq!(significance_stars(0.0999), "*");
        assert_eq!(significance_stars(0.1), "");
        assert_eq!(significance_stars(f64::NAN), "");
    }
}
