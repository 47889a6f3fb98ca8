//! Seeded shot sampling: record histograms of the semiclassical circuit and
//! shot estimates of the solution expectations with standard errors.
//!
//! cargo run --example shot_sampling

use hhl_sim::analysis::{shot_estimate, PauliExpectations};
use hhl_sim::circuit::sample_shots;
use hhl_sim::compiled::{
    build_compiled_circuit, compiled_pipeline, initial_state, run_compiled, CompiledConfig, Feedforward, InputVector,
};

fn main() -> hhl_sim::Result<()> {
    let cfg = CompiledConfig::new(InputVector::B3).with_feedforward(Feedforward::Semiclassical);
    let hist = sample_shots(&build_compiled_circuit(&cfg)?, &initial_state(&cfg)?, 10_000, 42)?;
    println!("semiclassical b3, 10000 shots, record histogram:");
    for (record, n) in &hist {
        println!("  {record}: {n}");
    }

    for shots in [1_000, 10_000, 100_000] {
        let est = shot_estimate(&compiled_pipeline(&cfg)?, None, shots, 42)?;
        let exact = PauliExpectations::of(&run_compiled(&cfg)?.x_state)?;
        println!(
            "{shots:>6} shots: p = {:.4} ± {:.4}  <Z> {:+.4} ± {:.4} (exact {:+.4})  <X> {:+.4} ± {:.4} (exact {:+.4})",
            est.success_probability.value,
            est.success_probability.stderr,
            est.expectations.z,
            est.stderr.z,
            exact.z,
            est.expectations.x,
            est.stderr.x,
            exact.x
        );
    }
    Ok(())
}
