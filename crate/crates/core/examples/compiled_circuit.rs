//! Builds the compiled four-qubit circuit, lists its gates and runs it in
//! both feedforward modes.
//!
//! cargo run --example compiled_circuit

use hhl_sim::circuit::Op;
use hhl_sim::compiled::{build_compiled_circuit, run_compiled, CompiledConfig, Feedforward, InputVector};

fn main() -> hhl_sim::Result<()> {
    for ff in [Feedforward::Unitary, Feedforward::Semiclassical] {
        let cfg = CompiledConfig::new(InputVector::B3).with_feedforward(ff);
        let circuit = build_compiled_circuit(&cfg)?;
        println!("{ff:?} circuit ({} ops):", circuit.len());
        for op in circuit.ops() {
            match op {
                Op::Gate(g) => println!("  {:<10} on {:?}", g.class(), g.qubits()),
                Op::Measure { qubit, slot } => println!("  measure    q{qubit} -> c{slot}"),
                Op::Conditional { gate, slot, outcome } => {
                    println!("  if c{slot}=={} {} on {:?}", u8::from(*outcome), gate.class(), gate.qubits())
                }
            }
        }
        for input in InputVector::PRESETS {
            let r = run_compiled(&CompiledConfig { input: input.clone(), ..cfg.clone() })?;
            println!(
                "  {}: fidelity {:.12}  success {:.6}",
                input.label(),
                r.fidelity_vs_classical,
                r.success_probability
            );
        }
    }
    Ok(())
}
