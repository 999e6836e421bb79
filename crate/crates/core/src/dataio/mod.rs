//! Survey CSV ingestion and validation, missingness accounting, descriptive
//! statistics and the percent/probability scale bridge.

mod csvio;
mod describe;
mod record;
mod scale;

use thiserror::Error;

pub use csvio::{load_survey, read_survey, write_survey, LoadOptions, LoadedSurvey, MissingnessReport};
pub use describe::{describe, DescriptiveRow, DescriptiveTable, Filter};
pub use record::{Dataset, SurveyRecord, SurveyRow, Variable};
pub use scale::{from_percent, to_percent};

/// One rejected row and what was wrong with it.
#[derive(Debug, Clone, PartialEq)]
pub struct RowViolation {
    pub line: usize,
    pub messages: Vec<String>,
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("malformed row at line {line}: {message}")]
    MalformedRow { line: usize, message: String },
    #[error("{} row(s) violate the survey invariants (first at line {})", .0.len(), .0.first().map_or(0, |v| v.line))]
    InvariantViolation(Vec<RowViolation>),
    #[error("value {0} is outside the admissible range")]
    OutOfRange(f64),
    #[error("no rows left after applying the filter")]
    EmptyAfterFilter,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("invalid filter `{0}` (expected name=value)")]
    InvalidFilter(String),
    #[error("csv error: {0}")]
    Csv(String),
}

impl DataError {
    /// Variant name, as printed by the command-line tool.
    pub fn name(&self) -> &'static str {
        match self {
            DataError::Io(_) => "Io",
            DataError::SchemaMismatch(_) => "SchemaMismatch",
            DataError::MalformedRow { .. } => "MalformedRow",
            DataError::InvariantViolation(_) => "InvariantViolation",
            DataError::OutOfRange(_) => "OutOfRange",
            DataError::EmptyAfterFilter => "EmptyAfterFilter",
            DataError::UnknownVariable(_) => "UnknownVariable",
            DataError::InvalidFilter(_) => "InvalidFilter",
            DataError::Csv(_) => "Csv",
        }
    }
}
