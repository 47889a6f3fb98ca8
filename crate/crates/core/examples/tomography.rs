//! Single-qubit tomography of the solution qubit: exact expectations, the
//! reconstructed density matrix, and its fidelity with the ideal solution.
//!
//! cargo run --example tomography

use hhl_sim::analysis::{reconstruct_single_qubit, PauliExpectations};
use hhl_sim::circuit::NoiseSpec;
use hhl_sim::compiled::{instance_matrix, run_compiled_noisy, CompiledConfig, InputVector};
use hhl_sim::hhl::classical_solve;
use hhl_sim::qstate::fidelity;

fn main() -> hhl_sim::Result<()> {
    let noise = NoiseSpec::all(0.02)?;
    for input in InputVector::PRESETS {
        let cfg = CompiledConfig::new(input.clone());
        let out = run_compiled_noisy(&cfg, &noise)?;
        let e = PauliExpectations::of(&out.rho)?;
        let rho = reconstruct_single_qubit(&e)?;
        let exact = classical_solve(&instance_matrix(), &input.state()?)?;
        println!(
            "{}: <Z> {:+.4} <X> {:+.4} <Y> {:+.4}  radius {:.4}  purity {:.4}  fidelity {:.5}",
            input.label(),
            e.z,
            e.x,
            e.y,
            e.radius(),
            rho.purity(),
            fidelity(&exact, &rho)?
        );
    }
    Ok(())
}
