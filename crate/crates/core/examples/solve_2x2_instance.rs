//! Solves A x = b for the 2x2 instance with the generic HHL pipeline and
//! compares each output against the classical solution.
//!
//! cargo run --example solve_2x2_instance

use hhl_sim::analysis::PauliExpectations;
use hhl_sim::compiled::{instance_matrix, InputVector};
use hhl_sim::hhl::{run_hhl, HhlProblem};

fn main() -> hhl_sim::Result<()> {
    println!("A = [[1.5, 0.5], [0.5, 1.5]], eigenvalues 1 and 2, C = 1");
    for input in InputVector::PRESETS {
        let problem = HhlProblem::new(instance_matrix(), input.state()?, 2).with_c(1.0);
        let r = run_hhl(&problem)?;
        let e = PauliExpectations::of(&r.x_state)?;
        println!(
            "{}: fidelity {:.12}  success {:.6}  <Z> {:+.6} <X> {:+.6} <Y> {:+.6}  register reset {}",
            input.label(),
            r.fidelity_vs_classical,
            r.success_probability,
            e.z,
            e.x,
            e.y,
            r.register_reset_ok
        );
    }
    Ok(())
}
