use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::DataError;

/// Columns of the survey schema, in file order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Variable {
    Prior,
    Change,
    Post,
    Gender,
    Age,
    Police,
    EducInt,
    MatchingGender,
}

impl Variable {
    pub const ALL: [Variable; 8] = [
        Variable::Prior,
        Variable::Change,
        Variable::Post,
        Variable::Gender,
        Variable::Age,
        Variable::Police,
        Variable::EducInt,
        Variable::MatchingGender,
    ];

    /// Column name in the CSV header.
    pub fn column(self) -> &'static str {
        match self {
            Variable::Prior => "prior",
            Variable::Change => "change",
            Variable::Post => "post",
            Variable::Gender => "gender",
            Variable::Age => "age",
            Variable::Police => "police",
            Variable::EducInt => "educ_int",
            Variable::MatchingGender => "matching_gender",
        }
    }

    /// Name used in printed tables.
    pub fn label(self) -> &'static str {
        match self {
            Variable::Prior => "Prior",
            Variable::Change => "Change",
            Variable::Post => "Post",
            Variable::Gender => "Gender",
            Variable::Age => "Age",
            Variable::Police => "Police",
            Variable::EducInt => "Educ_Int",
            Variable::MatchingGender => "Matching_Gender",
        }
    }

    /// 0/1 coded columns.
    pub fn is_binary(self) -> bool {
        matches!(
            self,
            Variable::Change | Variable::Gender | Variable::EducInt | Variable::MatchingGender
        )
    }

    /// Integer-coded columns with printed min/max as integers.
    pub fn is_discrete(self) -> bool {
        !matches!(self, Variable::Prior | Variable::Post)
    }

    /// Only these columns may legitimately be missing.
    pub fn is_nullable(self) -> bool {
        matches!(self, Variable::Age | Variable::Police)
    }

    /// Accepts column names and table labels, case-insensitively.
    pub fn from_name(name: &str) -> Option<Self> {
        let key = name.trim().to_ascii_lowercase();
        Variable::ALL
            .into_iter()
            .find(|v| v.column() == key || v.label().to_ascii_lowercase() == key)
            .or(match key.as_str() {
                "sex" => Some(Variable::Gender),
                "matching_sex" => Some(Variable::MatchingGender),
                _ => None,
            })
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column())
    }
}

impl FromStr for Variable {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variable::from_name(s).ok_or_else(|| DataError::UnknownVariable(s.to_string()))
    }
}

/// One interview. Percent scale for `prior` and `post`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurveyRecord {
    pub prior: f64,
    pub change: bool,
    pub post: f64,
    /// 0 male, 1 female
    pub gender: u8,
    pub age: Option<u16>,
    /// 1 excellent .. 5 terrible
    pub police: Option<u8>,
    pub educ_int: u8,
    pub matching_gender: u8,
}

impl SurveyRecord {
    pub fn value(&self, var: Variable) -> Option<f64> {
        match var {
            Variable::Prior => Some(self.prior),
            Variable::Change => Some(if self.change { 1.0 } else { 0.0 }),
            Variable::Post => Some(self.post),
            Variable::Gender => Some(f64::from(self.gender)),
            Variable::Age => self.age.map(f64::from),
            Variable::Police => self.police.map(f64::from),
            Variable::EducInt => Some(f64::from(self.educ_int)),
            Variable::MatchingGender => Some(f64::from(self.matching_gender)),
        }
    }

    /// Checks coding ranges and the Change/Post consistency rules.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(0.0..=100.0).contains(&self.prior) {
            out.push(format!("prior {} outside [0, 100]", self.prior));
        }
        if !(0.0..=100.0).contains(&self.post) {
            out.push(format!("post {} outside [0, 100]", self.post));
        }
        for (var, v) in [
            (Variable::Gender, self.gender),
            (Variable::EducInt, self.educ_int),
            (Variable::MatchingGender, self.matching_gender),
        ] {
            if v > 1 {
                out.push(format!("{var} must be 0 or 1 (got {v})"));
            }
        }
        if let Some(age) = self.age {
            if !(16..=94).contains(&age) {
                out.push(format!("age {age} outside [16, 94]"));
            }
        }
        if let Some(police) = self.police {
            if !(1..=5).contains(&police) {
                out.push(format!("police {police} outside 1..5"));
            }
        }
        if self.change && self.post >= self.prior {
            out.push(format!(
                "change = 1 requires post < prior (post {}, prior {})",
                self.post, self.prior
            ));
        }
        if !self.change && self.post != self.prior {
            out.push(format!(
                "change = 0 requires post = prior (post {}, prior {})",
                self.post, self.prior
            ));
        }
        out
    }
}

/// A record together with its source line and any validation failures.
#[derive(Debug, Clone, PartialEq)]
pub struct SurveyRow {
    /// 1-based line in the source file (header is line 1).
    pub line: usize,
    /// `None` when a required column was missing or unreadable.
    pub record: Option<SurveyRecord>,
    pub violations: Vec<String>,
}

impl SurveyRow {
    pub fn is_valid(&self) -> bool {
        self.record.is_some() && self.violations.is_empty()
    }
}

/// Survey rows in file order. Analyses use the valid rows only.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    rows: Vec<SurveyRow>,
}

impl Dataset {
    /// Wraps records without validating them. Simulated data drawn from the
    /// latent model may sit outside the instrument's coding ranges; see
    /// [`Dataset::validated`] for the checked constructor.
    pub fn from_records(records: Vec<SurveyRecord>) -> Self {
        let rows = records
            .into_iter()
            .enumerate()
            .map(|(i, r)| SurveyRow {
                line: i + 2,
                record: Some(r),
                violations: Vec::new(),
            })
            .collect();
        Self { rows }
    }

    /// Wraps records and flags every coding or consistency violation.
    pub fn validated(records: Vec<SurveyRecord>) -> Self {
        let rows = records
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                let violations = r.violations();
                SurveyRow {
                    line: i + 2,
                    record: Some(r),
                    violations,
                }
            })
            .collect();
        Self { rows }
    }

    pub fn from_rows(rows: Vec<SurveyRow>) -> Self {
        Self { rows }
    }

    pub fn rows(&self) -> &[SurveyRow] {
        &self.rows
    }

    pub fn rows_mut(&mut self) -> &mut [SurveyRow] {
        &mut self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn valid_records(&self) -> impl Iterator<Item = &SurveyRecord> {
        self.rows.iter().filter(|r| r.is_valid()).filter_map(|r| r.record.as_ref())
    }

    pub fn n_valid(&self) -> usize {
        self.rows.iter().filter(|r| r.is_valid()).count()
    }

    pub fn invalid_rows(&self) -> impl Iterator<Item = &SurveyRow> {
        self.rows.iter().filter(|r| !r.is_valid())
    }

    /// Valid records with every listed variable present.
    pub fn complete_cases<'a>(&'a self, vars: &'a [Variable]) -> impl Iterator<Item = &'a SurveyRecord> + 'a {
        self.valid_records()
            .filter(move |r| vars.iter().all(|v| r.value(*v).is_some()))
    }

    /// Valid rows dropped by listwise deletion on `vars`.
    pub fn listwise_dropped(&self, vars: &[Variable]) -> usize {
        self.valid_records()
            .filter(|r| vars.iter().any(|v| r.value(*v).is_none()))
            .count()
    }
}
