use std::io::{self, Write};

use serde_json::{Map, Value};

use super::args::Format;
use crate::estimators::{significance_stars, Coefficient};

/// Fixed-width number, three decimals unless the value needs more to show
/// a significant digit.
pub fn num(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "NA".into() } else { format!("{x}") };
    }
    let a = x.abs();
    let decimals = if a == 0.0 || a >= 0.01 {
        3
    } else {
        ((-a.log10()).ceil() as usize).clamp(3, 8)
    };
    let s = format!("{x:.decimals$}");
    // never print "-0.000"
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

pub fn starred(c: &Coefficient) -> String {
    format!("{}{}", num(c.estimate), significance_stars(c.p_value))
}

pub fn paren(se: f64) -> String {
    format!("({})", num(se))
}

pub const STAR_NOTE: &str = "Note: *p<0.1; **p<0.05; ***p<0.01";

/// Plain-text table: first column left aligned, the rest right aligned.
/// `None` rows print a horizontal rule.
#[derive(Debug, Default)]
pub struct TextTable {
    rows: Vec<Option<Vec<String>>>,
}

impl TextTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn row<S: Into<String>>(&mut self, cells: impl IntoIterator<Item = S>) -> &mut Self {
        self.rows.push(Some(cells.into_iter().map(Into::into).collect()));
        self
    }

    pub fn rule(&mut self) -> &mut Self {
        self.rows.push(None);
        self
    }

    /// Estimate with stars, then the standard error in parentheses below it.
    pub fn coefficient_rows(&mut self, columns: &[&[Coefficient]], names: &[String]) -> &mut Self {
        for name in names {
            let mut top = vec![name.clone()];
            let mut bottom = vec![String::new()];
            for col in columns {
                match col.iter().find(|c| &c.name == name) {
                    Some(c) => {
                        top.push(starred(c));
                        bottom.push(paren(c.std_error));
                    }
                    None => {
                        top.push(String::new());
                        bottom.push(String::new());
                    }
                }
            }
            self.row(top);
            self.row(bottom);
        }
        self
    }

    pub fn write(&self, out: &mut dyn Write) -> io::Result<()> {
        let ncols = self.rows.iter().flatten().map(Vec::len).max().unwrap_or(0);
        let mut widths = vec![0usize; ncols];
        for row in self.rows.iter().flatten() {
            for (j, cell) in row.iter().enumerate() {
                widths[j] = widths[j].max(cell.chars().count());
            }
        }
        let total = widths.iter().sum::<usize>() + 2 * ncols.saturating_sub(1);
        for row in &self.rows {
            match row {
                None => writeln!(out, "{}", "-".repeat(total))?,
                Some(cells) => {
                    let mut line = String::new();
                    for (j, w) in widths.iter().enumerate() {
                        let cell = cells.get(j).map(String::as_str).unwrap_or("");
                        if j == 0 {
                            line.push_str(&format!("{cell:<w$}"));
                        } else {
                            line.push_str(&format!("  {cell:>w$}"));
                        }
                    }
                    writeln!(out, "{}", line.trim_end())?;
                }
            }
        }
        Ok(())
    }
}

/// Flat records for the csv and jsonl formats. Every record starts with a
/// `section` field.
#[derive(Debug, Default)]
pub struct Records {
    items: Vec<Map<String, Value>>,
}

impl Records {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, section: &str, fields: Value) {
        let mut m = Map::new();
        m.insert("section".into(), Value::String(section.into()));
        if let Value::Object(obj) = fields {
            m.extend(obj);
        }
        self.items.push(m);
    }

    pub fn coefficients(&mut self, section: &str, rows: &[Coefficient]) {
        for c in rows {
            self.push(
                section,
                serde_json::json!({
                    "name": c.name,
                    "estimate": c.estimate,
                    "std_error": c.std_error,
                    "statistic": c.statistic,
                    "p_value": c.p_value,
                    "stars": significance_stars(c.p_value),
                }),
            );
        }
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> io::Result<()> {
        match format {
            Format::Jsonl => {
                for item in &self.items {
                    serde_json::to_writer(&mut *out, item)?;
                    writeln!(out)?;
                }
                Ok(())
            }
            Format::Csv | Format::Text => self.write_csv(out),
        }
    }

    fn write_csv(&self, out: &mut dyn Write) -> io::Result<()> {
        let mut columns: Vec<&str> = Vec::new();
        for item in &self.items {
            for key in item.keys() {
                if !columns.contains(&key.as_str()) {
                    columns.push(key);
                }
            }
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&columns)?;
        for item in &self.items {
            let cells: Vec<String> = columns
                .iter()
                .map(|c| match item.get(*c) {
                    None | Some(Value::Null) => String::new(),
                    Some(Value::String(s)) => s.clone(),
                    Some(v) => v.to_string(),
                })
                .collect();
            w.write_record(&cells)?;
        }
        w.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(num(0.5021), "0.502");
        assert_eq!(num(-232.149), "-232.149");
        assert_eq!(num(0.0003), "0.0003");
        assert_eq!(num(-0.0), "0.000");
        assert_eq!(num(-0.0001), "-0.0001");
        assert_eq!(num(f64::NAN), "NA");
    }

    #[test]
    fn table_alignment() {
        let mut t = TextTable::new();
        t.row(["a", "1.0"]).rule().row(["long", "10.25"]);
        let mut buf = Vec::new();
        t.write(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a       1.0\n-----------\nlong  10.25\n");
    }

    #[test]
    fn csv_union_of_columns() {
        let mut r = Records::new();
        r.push("a", serde_json::json!({"x": 1}));
        r.push("b", serde_json::json!({"y": "s", "x": null}));
        let mut buf = Vec::new();
        r.write(Format::Csv, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "section,x,y\na,1,\nb,,s\n");
    }
}
