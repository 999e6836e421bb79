use super::DataError;

/// Probability in [0, 1] to percent.
pub fn to_percent(p: f64) -> Result<f64, DataError> {
    if (0.0..=1.0).contains(&p) {
        Ok(p * 100.0)
    } else {
        Err(DataError::OutOfRange(p))
    }
}

/// Percent in [0, 100] to probability.
pub fn from_percent(pct: f64) -> Result<f64, DataError> {
    if (0.0..=100.0).contains(&pct) {
        Ok(pct / 100.0)
    } else {
        Err(DataError::OutOfRange(pct))
    }
}
