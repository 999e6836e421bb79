use serde::Serialize;

use super::binary::BinaryFit;
use super::design::DesignMatrix;
use super::EstimationError;
use crate::dataio::{Dataset, SurveyRecord};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionReport {
    pub threshold: f64,
    pub n: usize,
    pub n_correct: usize,
    pub success_rate: f64,
    /// `confusion[observed][predicted]`
    pub confusion: [[usize; 2]; 2],
    /// Valid rows skipped for missing covariates.
    pub n_dropped: usize,
}

fn validate_threshold(threshold: f64) -> Result<(), EstimationError> {
    if (0.0..=1.0).contains(&threshold) {
        Ok(())
    } else {
        Err(EstimationError::InvalidInput(format!("threshold {threshold} outside [0, 1]")))
    }
}

/// Predicts Change = 1 when the fitted probability is at least `threshold`.
pub fn predict_from_design(
    fit: &BinaryFit,
    x: &DesignMatrix,
    observed: &[bool],
    threshold: f64,
) -> Result<PredictionReport, EstimationError> {
    validate_threshold(threshold)?;
    if observed.len() != x.nrows() {
        return Err(EstimationError::Conformability(format!(
            "{} outcomes for {} rows",
            observed.len(),
            x.nrows()
        )));
    }
    let probs = fit.predict_proba(x)?;
    let mut confusion = [[0usize; 2]; 2];
    for (p, y) in probs.iter().zip(observed) {
        let predicted = *p >= threshold;
        confusion[usize::from(*y)][usize::from(predicted)] += 1;
    }
    let n = observed.len();
    let n_correct = confusion[0][0] + confusion[1][1];
    Ok(PredictionReport {
        threshold,
        n,
        n_correct,
        success_rate: if n > 0 { n_correct as f64 / n as f64 } else { f64::NAN },
        confusion,
        n_dropped: 0,
    })
}

/// Scores every valid row of `data` that has the fit's covariates.
pub fn predict_change(fit: &BinaryFit, data: &Dataset, threshold: f64) -> Result<PredictionReport, EstimationError> {
    let terms = DesignMatrix::terms_for(fit.names())?;
    let rows: Vec<&SurveyRecord> = data
        .valid_records()
        .filter(|r| terms.iter().all(|t| t.value(r).is_some()))
        .collect();
    let n_dropped = data.n_valid() - rows.len();
    let x = DesignMatrix::from_terms(&rows, &terms)?;
    let observed: Vec<bool> = rows.iter().map(|r| r.change).collect();
    let mut report = predict_from_design(fit, &x, &observed, threshold)?;
    report.n_dropped = n_dropped;
    Ok(report)
}
