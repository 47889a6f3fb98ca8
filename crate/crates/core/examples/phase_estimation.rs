//! Runs phase estimation alone and prints the eigenvalue register
//! distribution for each eigenvector and for a superposition.
//!
//! cargo run --example phase_estimation

use hhl_sim::circuit::run;
use hhl_sim::compiled::instance_matrix;
use hhl_sim::hhl::{phase_estimation_circuit, validate, HhlProblem};
use hhl_sim::qstate::ComplexVec;

fn main() -> hhl_sim::Result<()> {
    let bits = 3;
    let a = instance_matrix();
    let probe = HhlProblem::new(a.clone(), ComplexVec::from_real(&[1.0, 0.0]), bits);
    let spectrum = validate(&probe)?.spectrum;
    let mut inputs: Vec<(String, ComplexVec)> = (0..2)
        .map(|j| (format!("u{j} (λ = {})", spectrum.eigenvalues[j]), spectrum.eigenvector(j)))
        .collect();
    inputs.push(("|0>".into(), ComplexVec::from_real(&[1.0, 0.0])));

    for (name, b) in inputs {
        let p = HhlProblem::new(a.clone(), b.clone(), bits);
        let layout = p.layout();
        let pe = phase_estimation_circuit(&p)?;
        let full = ComplexVec::zero_state(layout.total() - layout.input.len()).tensor(&b);
        let out = run(&pe, &full, None, 0)?;
        let probs = out.state.as_pure().expect("noiseless run is pure").probabilities();
        let mut register = vec![0.0; 1 << bits];
        for (i, pr) in probs.iter().enumerate() {
            let k = layout.register.iter().enumerate().fold(0, |acc, (j, &q)| acc | ((i >> q) & 1) << j);
            register[k] += pr;
        }
        let shown: Vec<String> = register
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 1e-12)
            .map(|(k, p)| format!("k={k}: {p:.4}"))
            .collect();
        println!("{name}: {}", shown.join(", "));
    }
    Ok(())
}
