use std::str::FromStr;

use serde::Serialize;

use super::record::{Dataset, SurveyRecord, Variable};
use super::DataError;

/// Equality filter `variable = value`; rows where the variable is missing are
/// excluded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Filter {
    pub variable: Variable,
    pub value: f64,
}

impl Filter {
    pub fn matches(&self, record: &SurveyRecord) -> bool {
        record.value(self.variable) == Some(self.value)
    }
}

impl FromStr for Filter {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, value) = s
            .split_once('=')
            .ok_or_else(|| DataError::InvalidFilter(s.to_string()))?;
        let variable = name.parse::<Variable>()?;
        let value = value
            .trim()
            .parse::<f64>()
            .map_err(|_| DataError::InvalidFilter(s.to_string()))?;
        Ok(Self { variable, value })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescriptiveRow {
    pub variable: Variable,
    /// `None` when every value is missing.
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub missing: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescriptiveTable {
    pub n: usize,
    pub filter: Option<Filter>,
    pub rows: Vec<DescriptiveRow>,
}

/// Mean, sample standard deviation (n − 1), min, max and missing count for
/// every schema variable over the valid rows passing `filter`.
pub fn describe(data: &Dataset, filter: Option<Filter>) -> Result<DescriptiveTable, DataError> {
    let records: Vec<&SurveyRecord> = data
        .valid_records()
        .filter(|r| filter.is_none_or(|f| f.matches(r)))
        .collect();
    if records.is_empty() {
        return Err(DataError::EmptyAfterFilter);
    }
    let rows = Variable::ALL
        .into_iter()
        .map(|variable| {
            let values: Vec<f64> = records.iter().filter_map(|r| r.value(variable)).collect();
            let missing = records.len() - values.len();
            if values.is_empty() {
                return DescriptiveRow {
                    variable,
                    mean: None,
                    sd: None,
                    min: None,
                    max: None,
                    missing,
                };
            }
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let sd = if values.len() > 1 {
                (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            DescriptiveRow {
                variable,
                mean: Some(mean),
                sd: Some(sd),
                min: values.iter().copied().reduce(f64::min),
                max: values.iter().copied().reduce(f64::max),
                missing,
            }
        })
        .collect();
    Ok(DescriptiveTable {
        n: records.len(),
        filter,
        rows,
    })
}
