//! Regenerates `tests/fixtures/golden_survey.csv`: 2885 simulated interviews
//! with 56 missing Age, 22 missing Police and one updater row whose Post
//! equals its Prior, which validation rejects. Tobit listwise deletion on
//! (Prior, Age, Gender, Matching_Gender, Educ_Int) leaves 2828 rows.
//!
//! cargo run -p skeptic-update --example golden_fixture -- [OUT]

use std::fs::File;
use std::io::BufWriter;

use skeptic_update::dataio::{write_survey, Variable};
use skeptic_update::simulate::{plant_missing, simulate_survey, DgpConfig, ModelKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/golden_survey.csv").to_string());
    let config = DgpConfig::new(ModelKind::Tobit, 2885, 2885);
    let mut data = simulate_survey(&config)?;
    plant_missing(&mut data, Variable::Age, 56, config.seed)?;
    plant_missing(&mut data, Variable::Police, 22, config.seed)?;

    let degenerate = data
        .rows_mut()
        .iter_mut()
        .filter_map(|row| row.record.as_mut())
        .find(|r| r.change && r.age.is_some())
        .ok_or("no updater with a recorded age")?;
    degenerate.post = degenerate.prior;

    let mut w = BufWriter::new(File::create(&out)?);
    write_survey(&data, &mut w)?;
    eprintln!("wrote {out}");
    Ok(())
}
