use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::record::{Dataset, SurveyRecord, SurveyRow, Variable};
use super::{DataError, RowViolation};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadOptions {
    /// Fail the whole load on the first batch of invariant violations instead
    /// of flagging the offending rows.
    pub strict: bool,
}

/// Per-variable missing counts over all data rows.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MissingnessReport {
    pub counts: BTreeMap<Variable, usize>,
    pub n_rows: usize,
    pub n_invalid: usize,
}

impl MissingnessReport {
    pub fn from_dataset(data: &Dataset) -> Self {
        let mut counts: BTreeMap<Variable, usize> = Variable::ALL.iter().map(|v| (*v, 0)).collect();
        for row in data.rows() {
            if let Some(r) = &row.record {
                for v in Variable::ALL {
                    if r.value(v).is_none() {
                        *counts.entry(v).or_default() += 1;
                    }
                }
            }
        }
        Self {
            counts,
            n_rows: data.len(),
            n_invalid: data.invalid_rows().count(),
        }
    }

    pub fn missing(&self, var: Variable) -> usize {
        self.counts.get(&var).copied().unwrap_or(0)
    }

    /// Valid rows lost to listwise deletion on `vars`.
    pub fn listwise_dropped(data: &Dataset, vars: &[Variable]) -> usize {
        data.listwise_dropped(vars)
    }
}

#[derive(Debug, Clone)]
pub struct LoadedSurvey {
    pub dataset: Dataset,
    pub missing: MissingnessReport,
    pub warnings: Vec<String>,
}

impl LoadedSurvey {
    pub fn violations(&self) -> Vec<RowViolation> {
        collect_violations(&self.dataset)
    }
}

fn collect_violations(data: &Dataset) -> Vec<RowViolation> {
    data.invalid_rows()
        .map(|r| RowViolation {
            line: r.line,
            messages: r.violations.clone(),
        })
        .collect()
}

pub fn load_survey(path: impl AsRef<Path>, options: LoadOptions) -> Result<LoadedSurvey, DataError> {
    let file = File::open(path)?;
    read_survey(file, options)
}

fn is_missing(field: &str) -> bool {
    field.is_empty() || field.eq_ignore_ascii_case("NA")
}

enum Cell {
    Missing,
    Value(f64),
}

fn parse_cell(field: &str, var: Variable, line: usize) -> Result<Cell, DataError> {
    if is_missing(field) {
        return Ok(Cell::Missing);
    }
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Cell::Value(v)),
        _ => Err(DataError::MalformedRow {
            line,
            message: format!("cannot read `{field}` as a number in column {var}"),
        }),
    }
}

fn integral<T: TryFrom<i64>>(v: f64) -> Option<T> {
    if v.fract() != 0.0 || v.abs() > 1e15 {
        return None;
    }
    T::try_from(v as i64).ok()
}

/// Parses survey CSV from any reader. Rows with violations are kept and
/// flagged unless `options.strict` is set.
pub fn read_survey<R: Read>(reader: R, options: LoadOptions) -> Result<LoadedSurvey, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = rdr
        .headers()
        .map_err(|e| DataError::SchemaMismatch(e.to_string()))?
        .clone();
    let mut order = Vec::with_capacity(headers.len());
    for h in headers.iter() {
        let var = Variable::ALL
            .into_iter()
            .find(|v| v.column().eq_ignore_ascii_case(h))
            .ok_or_else(|| DataError::SchemaMismatch(format!("unexpected column `{h}`")))?;
        if order.contains(&var) {
            return Err(DataError::SchemaMismatch(format!("duplicate column `{h}`")));
        }
        order.push(var);
    }
    if let Some(absent) = Variable::ALL.into_iter().find(|v| !order.contains(v)) {
        return Err(DataError::SchemaMismatch(format!("missing column `{absent}`")));
    }

    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for result in rdr.records() {
        let fields = result.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            DataError::MalformedRow {
                line,
                message: e.to_string(),
            }
        })?;
        let line = fields.position().map_or(rows.len() + 2, |p| p.line() as usize);

        let mut cells: BTreeMap<Variable, Option<f64>> = BTreeMap::new();
        for (var, field) in order.iter().zip(fields.iter()) {
            let cell = match parse_cell(field, *var, line)? {
                Cell::Missing => None,
                Cell::Value(v) => Some(v),
            };
            cells.insert(*var, cell);
        }

        let mut violations = Vec::new();
        let mut required = |var: Variable| -> Option<f64> {
            let v = cells[&var];
            if v.is_none() {
                violations.push(format!("required column {var} is missing"));
            }
            v
        };
        let prior = required(Variable::Prior);
        let change = required(Variable::Change);
        let post = required(Variable::Post);
        let gender = required(Variable::Gender);
        let educ_int = required(Variable::EducInt);
        let matching_gender = required(Variable::MatchingGender);

        let mut coded = |var: Variable, v: Option<f64>| -> Option<u8> {
            let v = v?;
            let out = integral::<u8>(v);
            if out.is_none() {
                violations.push(format!("{var} must be an integer code (got {v})"));
            }
            out
        };
        let gender = coded(Variable::Gender, gender);
        let educ_int = coded(Variable::EducInt, educ_int);
        let matching_gender = coded(Variable::MatchingGender, matching_gender);
        let change_code = coded(Variable::Change, change);
        let police_raw = cells[&Variable::Police];
        let police = coded(Variable::Police, police_raw);
        let age_raw = cells[&Variable::Age];
        let age = age_raw.and_then(|v| {
            let out = integral::<u16>(v);
            if out.is_none() {
                violations.push(format!("age must be a whole number of years (got {v})"));
            }
            out
        });

        let change = match change_code {
            Some(0) => Some(false),
            Some(1) => Some(true),
            Some(c) => {
                violations.push(format!("change must be 0 or 1 (got {c})"));
                None
            }
            None => None,
        };

        let record = match (prior, change, post, gender, educ_int, matching_gender) {
            (Some(prior), Some(change), Some(post), Some(gender), Some(educ_int), Some(matching_gender))
                if age.is_some() == age_raw.is_some() && police.is_some() == police_raw.is_some() =>
            {
                let record = SurveyRecord {
                    prior,
                    change,
                    post,
                    gender,
                    age,
                    police,
                    educ_int,
                    matching_gender,
                };
                violations.extend(record.violations());
                Some(record)
            }
            _ => None,
        };
        if let Some(p) = prior {
            if (0.0..1.0).contains(&p) {
                warnings.push(format!("line {line}: prior {p} is below 1 percent"));
            }
        }
        rows.push(SurveyRow {
            line,
            record,
            violations,
        });
    }

    let dataset = Dataset::from_rows(rows);
    if options.strict {
        let violations = collect_violations(&dataset);
        if !violations.is_empty() {
            return Err(DataError::InvariantViolation(violations));
        }
    }
    let missing = MissingnessReport::from_dataset(&dataset);
    Ok(LoadedSurvey {
        dataset,
        missing,
        warnings,
    })
}

fn fmt_opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| x.to_string())
}

/// Writes every row that holds a record, in order. Reals use the shortest
/// decimal that round-trips; missing values are written as `NA`.
pub fn write_survey<W: Write>(data: &Dataset, writer: W) -> Result<(), DataError> {
    let mut wtr = csv::WriterBuilder::new().from_writer(writer);
    let csv_err = |e: csv::Error| DataError::Csv(e.to_string());
    wtr.write_record(Variable::ALL.iter().map(|v| v.column()))
        .map_err(csv_err)?;
    for row in data.rows() {
        let Some(r) = &row.record else { continue };
        wtr.write_record([
            r.prior.to_string(),
            u8::from(r.change).to_string(),
            r.post.to_string(),
            r.gender.to_string(),
            fmt_opt(r.age),
            fmt_opt(r.police),
            r.educ_int.to_string(),
            r.matching_gender.to_string(),
        ])
        .map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "prior,change,post,gender,age,police,educ_int,matching_gender\n";

    fn load(body: &str) -> Result<LoadedSurvey, DataError> {
        read_survey(format!("{HEADER}{body}").as_bytes(), LoadOptions::default())
    }

    #[test]
    fn three_well_formed_rows() {
        let loaded = load("30,0,30,1,40,3,1,1\n50,1,2.5,0,22,2,1,0\n12.5,0,12.5,1,65,5,0,1\n").unwrap();
        assert_eq!(loaded.dataset.len(), 3);
        assert_eq!(loaded.dataset.n_valid(), 3);
        assert!(loaded.missing.counts.values().all(|c| *c == 0));
    }

    #[test]
    fn missing_sentinels() {
        let loaded = load("30,0,30,1,,3,1,1\n30,0,30,1,NA,na,1,1\n").unwrap();
        assert_eq!(loaded.missing.missing(Variable::Age), 2);
        assert_eq!(loaded.missing.missing(Variable::Police), 1);
        assert_eq!(loaded.dataset.n_valid(), 2);
    }

    #[test]
    fn inconsistent_change_is_flagged_with_line() {
        let loaded = load("30,0,30,1,40,3,1,1\n30,0,20,1,40,3,1,1\n").unwrap();
        let v = loaded.violations();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].line, 3);
        assert_eq!(loaded.dataset.n_valid(), 1);

        let strict = read_survey(
            format!("{HEADER}30,0,20,1,40,3,1,1\n").as_bytes(),
            LoadOptions { strict: true },
        );
        match strict {
            Err(DataError::InvariantViolation(rows)) => assert_eq!(rows[0].line, 2),
            other => panic!("expected InvariantViolation, got {other:?}"),
        }
    }

    #[test]
    fn missing_required_column_value_excludes_row() {
        let loaded = load("30,,30,1,40,3,1,1\n").unwrap();
        assert_eq!(loaded.dataset.n_valid(), 0);
        assert!(loaded.dataset.rows()[0].record.is_none());
    }

    #[test]
    fn malformed_and_schema_errors() {
        assert!(matches!(load("abc,0,30,1,40,3,1,1\n"), Err(DataError::MalformedRow { line: 2, .. })));
        assert!(matches!(load("30,0,30\n"), Err(DataError::MalformedRow { .. })));
        let bad_header = read_survey("prior,change\n1,0\n".as_bytes(), LoadOptions::default());
        assert!(matches!(bad_header, Err(DataError::SchemaMismatch(_))));
    }

    #[test]
    fn header_is_case_insensitive_and_order_free() {
        let text = "Change,PRIOR,post,gender,age,police,educ_int,Matching_Gender\n0,30,30,1,40,3,1,1\n";
        let loaded = read_survey(text.as_bytes(), LoadOptions::default()).unwrap();
        assert_eq!(loaded.dataset.valid_records().next().unwrap().prior, 30.0);
    }

    #[test]
    fn low_prior_warns() {
        let loaded = load("0.5,0,0.5,1,40,3,1,1\n").unwrap();
        assert_eq!(loaded.warnings.len(), 1);
        assert_eq!(loaded.dataset.n_valid(), 1);
    }

    #[test]
    fn write_then_load_is_byte_stable() {
        let body = "30,0,30,1,40,3,1,1\n50.125,1,0.1,0,NA,2,1,0\n0.1234567890123,0,0.1234567890123,1,65,NA,0,1\n";
        let first = load(body).unwrap();
        let mut out1 = Vec::new();
        write_survey(&first.dataset, &mut out1).unwrap();
        let second = read_survey(out1.as_slice(), LoadOptions::default()).unwrap();
        let mut out2 = Vec::new();
        write_survey(&second.dataset, &mut out2).unwrap();
        assert_eq!(out1, out2);
        assert_eq!(String::from_utf8(out1).unwrap(), format!("{HEADER}{body}"));
    }
}
