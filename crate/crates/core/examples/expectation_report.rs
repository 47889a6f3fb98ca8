//! Builds the full tomography report (ideal, noiseless and noisy
//! expectations per input) and prints it as CSV rows.
//!
//! cargo run --example expectation_report

use hhl_sim::analysis::{build_report, Mode, ReportConfig};
use hhl_sim::circuit::NoiseSpec;

fn main() -> hhl_sim::Result<()> {
    let cfg = ReportConfig::new(Mode::Compiled).with_noise(Some(NoiseSpec::all(0.03)?)).with_shots(20_000, 1);
    let report = build_report(&cfg)?;
    println!("input,observable,ideal,simulated,stderr");
    for r in report.rows() {
        let se = r.stderr.map(|s| format!("{s:.5}")).unwrap_or_default();
        println!("{},{},{:.5},{:.5},{}", r.input, r.observable, r.ideal, r.simulated, se);
    }
    Ok(())
}
