//! Sweeps the depolarizing strength and prints the output fidelity of the
//! compiled circuit for each input.
//!
//! cargo run --example noise_sweep

use hhl_sim::analysis::{Mode, ReportConfig};
use hhl_sim::circuit::NoiseTarget;
use hhl_sim::cli::noise_sweep;

fn main() -> hhl_sim::Result<()> {
    let ps: Vec<f64> = (0..=10).map(|i| i as f64 * 0.05).collect();
    let rows = noise_sweep(&ReportConfig::new(Mode::Compiled), &ps, NoiseTarget::All)?;
    println!("{:>6}  {:>8}  {:>8}  {:>8}", "p", "b1", "b2", "b3");
    for chunk in rows.chunks(3) {
        println!(
            "{:>6.2}  {:>8.5}  {:>8.5}  {:>8.5}",
            chunk[0].p, chunk[0].fidelity, chunk[1].fidelity, chunk[2].fidelity
        );
    }
    Ok(())
}
