use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::EstimationError;
use crate::dataio::{SurveyRecord, Variable};

/// Name of the intercept column.
pub const INTERCEPT: &str = "Constant";

/// A regressor: the intercept or a survey variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Term {
    Intercept,
    Covariate(Variable),
}

impl Term {
    pub fn label(self) -> &'static str {
        match self {
            Term::Intercept => INTERCEPT,
            Term::Covariate(v) => v.label(),
        }
    }

    pub fn from_label(name: &str) -> Option<Self> {
        if name.eq_ignore_ascii_case(INTERCEPT) || name.eq_ignore_ascii_case("const") {
            Some(Term::Intercept)
        } else {
            Variable::from_name(name).map(Term::Covariate)
        }
    }

    pub fn value(self, record: &SurveyRecord) -> Option<f64> {
        match self {
            Term::Intercept => Some(1.0),
            Term::Covariate(v) => record.value(v),
        }
    }
}

/// Values keyed by coefficient name, in column order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedVector {
    names: Vec<String>,
    values: Vec<f64>,
}

impl NamedVector {
    /// Panics if the lengths differ.
    pub fn new(names: Vec<String>, values: Vec<f64>) -> Self {
        assert_eq!(names.len(), values.len(), "names and values must align");
        Self { names, values }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.names.iter().map(String::as_str).zip(self.values.iter().copied())
    }

    pub fn to_dvector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.values)
    }
}

/// Regressor matrix with named columns. No missing values; rank is checked
/// by the fitters.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    names: Vec<String>,
    data: DMatrix<f64>,
}

impl DesignMatrix {
    pub fn new(names: Vec<String>, data: DMatrix<f64>) -> Result<Self, EstimationError> {
        if names.len() != data.ncols() {
            return Err(EstimationError::Conformability(format!(
                "{} names for {} columns",
                names.len(),
                data.ncols()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(EstimationError::InvalidInput("design matrix has non-finite values".into()));
        }
        Ok(Self { names, data })
    }

    /// Leading intercept column followed by `columns`.
    pub fn with_intercept(n: usize, columns: Vec<(String, Vec<f64>)>) -> Result<Self, EstimationError> {
        let mut names = vec![INTERCEPT.to_string()];
        let mut data = DMatrix::from_element(n, columns.len() + 1, 1.0);
        for (j, (name, values)) in columns.into_iter().enumerate() {
            if values.len() != n {
                return Err(EstimationError::Conformability(format!(
                    "column {name} has {} rows, expected {n}",
                    values.len()
                )));
            }
            data.set_column(j + 1, &DVector::from_vec(values));
            names.push(name);
        }
        Self::new(names, data)
    }

    /// Intercept plus `covariates`, one row per record.
    pub fn from_records(records: &[&SurveyRecord], covariates: &[Variable]) -> Result<Self, EstimationError> {
        let mut terms = vec![Term::Intercept];
        terms.extend(covariates.iter().map(|v| Term::Covariate(*v)));
        Self::from_terms(records, &terms)
    }

    pub fn from_terms(records: &[&SurveyRecord], terms: &[Term]) -> Result<Self, EstimationError> {
        let mut data = DMatrix::zeros(records.len(), terms.len());
        for (i, r) in records.iter().enumerate() {
            for (j, t) in terms.iter().enumerate() {
                data[(i, j)] = t
                    .value(r)
                    .ok_or_else(|| EstimationError::MissingCovariate(t.label().to_string()))?;
            }
        }
        Self::new(terms.iter().map(|t| t.label().to_string()).collect(), data)
    }

    /// Rebuilds the terms behind a list of coefficient names.
    pub fn terms_for(names: &[String]) -> Result<Vec<Term>, EstimationError> {
        names
            .iter()
            .map(|n| Term::from_label(n).ok_or_else(|| EstimationError::MissingCovariate(n.clone())))
            .collect()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn nrows(&self) -> usize {
        self.data.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.data.ncols()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn has_intercept(&self) -> bool {
        self.column_index(INTERCEPT).is_some()
    }

    /// True for non-intercept columns holding only 0 and 1.
    pub fn is_binary_column(&self, k: usize) -> bool {
        self.names[k] != INTERCEPT && self.data.column(k).iter().all(|v| *v == 0.0 || *v == 1.0)
    }

    /// Per-column scale used to condition the optimizers: the standard
    /// deviation, or 1 for constant columns.
    pub(crate) fn column_scales(&self) -> DVector<f64> {
        let n = self.nrows().max(1) as f64;
        DVector::from_iterator(
            self.ncols(),
            self.data.column_iter().map(|c| {
                let mean = c.sum() / n;
                let var = c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                if var > 0.0 {
                    var.sqrt()
                } else {
                    1.0
                }
            }),
        )
    }

    /// Numerical rank after scaling every column to unit Euclidean norm.
    pub fn rank(&self) -> usize {
        if self.nrows() == 0 || self.ncols() == 0 {
            return 0;
        }
        let mut scaled = self.data.clone();
        for mut c in scaled.column_iter_mut() {
            let norm = c.norm();
            if norm > 0.0 {
                c /= norm;
            }
        }
        let sv = scaled.singular_values();
        let max = sv.max();
        if max == 0.0 {
            return 0;
        }
        sv.iter().filter(|s| **s > 1e-10 * max).count()
    }

    pub fn check_rank(&self) -> Result<(), EstimationError> {
        let rank = self.rank();
        if rank < self.ncols() {
            Err(EstimationError::RankDeficient {
                rank,
                columns: self.ncols(),
            })
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_detects_collinearity() {
        let x = DesignMatrix::with_intercept(
            4,
            vec![
                ("a".into(), vec![1.0, 2.0, 3.0, 4.0]),
                ("b".into(), vec![2.0, 4.0, 6.0, 8.0]),
            ],
        )
        .unwrap();
        assert!(matches!(x.check_rank(), Err(EstimationError::RankDeficient { rank: 2, columns: 3 })));
    }

    #[test]
    fn rank_is_scale_free() {
        let x = DesignMatrix::with_intercept(3, vec![("a".into(), vec![1e-9, 2e-9, 4e-9])]).unwrap();
        assert!(x.check_rank().is_ok());
    }

    #[test]
    fn term_labels() {
        assert_eq!(Term::from_label("Constant"), Some(Term::Intercept));
        assert_eq!(Term::from_label("Matching_Gender"), Some(Term::Covariate(Variable::MatchingGender)));
        assert_eq!(Term::from_label("nope"), None);
    }

    #[test]
    fn binary_columns() {
        let x = DesignMatrix::with_intercept(
            3,
            vec![("d".into(), vec![0.0, 1.0, 1.0]), ("c".into(), vec![0.0, 1.0, 2.0])],
        )
        .unwrap();
        assert!(!x.is_binary_column(0));
        assert!(x.is_binary_column(1));
        assert!(!x.is_binary_column(2));
    }
}
