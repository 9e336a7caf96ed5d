//! Builds the indicator family for a small table and checks every word.

use mpshl::oracles::{verify_indicator_family, IndicatorCheckOptions};
use mpshl::reduction::IndicatorFamily;
use nalgebra::DMatrix;

fn main() -> mpshl::Result<()> {
    let y = DMatrix::from_row_slice(3, 3, &[0.1, 0.7, 0.3, 0.0, 0.5, 0.9, 0.2, 0.4, 0.6]);
    let fam = IndicatorFamily::build(&y, 1.0)?;
    println!("N={} D={} gamma={} ({} halvings)", fam.n(), fam.dim(), fam.gamma(), fam.gamma_halvings());
    let report = verify_indicator_family(&fam, &IndicatorCheckOptions::default());
    let p = &report.payload;
    println!(
        "{} words, {} nonzero outcomes, max value error {}, passed {:?}",
        p["words_checked"], p["nonzero_outcomes"], p["max_value_error"], report.passed
    );
    println!("positions {}", p["positions"]);
    Ok(())
}
