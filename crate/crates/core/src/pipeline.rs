//! A circuit plus the post-selection recipe that turns its final state into
//! the solution qubits. Both the generic and the compiled solver produce one.

use crate::circuit::Circuit;
use crate::circuit::{post_select, post_select_density, run, NoiseSpec, RunState};
use crate::error::Result;
use crate::qstate::{partial_trace, ComplexVec, DensityMatrix};

#[derive(Clone, Debug)]
pub struct Pipeline {
    pub circuit: Circuit,
    pub input: ComplexVec,
    /// Heralding qubit, kept on `|1⟩`.
    pub ancilla: usize,
    /// Work-register qubits.
    pub register: Vec<usize>,
    /// Whether the register is projected onto `|0…0⟩` when extracting the
    /// output. Feedforward circuits leave it at its measured values instead.
    pub project_register: bool,
    /// Solution qubits, ascending.
    pub output: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    /// Reduced state of the output qubits after post-selection.
    pub rho: DensityMatrix,
    /// Output state when the run was noiseless.
    pub pure: Option<ComplexVec>,
    /// Probability of the ancilla reading `|1⟩`.
    pub success_probability: f64,
    /// Register population outside `|0…0⟩` after the ancilla is selected.
    pub register_residual: f64,
    /// Probability of the register projection given ancilla success
    /// (1 when the register is not projected).
    pub register_probability: f64,
    /// Register population outside its most likely basis value once all
    /// post-selection is done.
    pub final_register_residual: f64,
    pub classical_bits: Vec<bool>,
}

impl Pipeline {
    pub fn execute(&self, noise: Option<&NoiseSpec>, seed: u64) -> Result<PipelineOutput> {
        let outcome = run(&self.circuit, &self.input, noise, seed)?;
        let classical_bits = outcome.classical_bits;
        match outcome.state {
            RunState::Pure(state) => {
                let (state, success_probability) = post_select(&state, self.ancilla, true)?;
                let register_residual = 1.0 - self.register_zero_probability_pure(&state);
                let (state, register_probability) = self.project_register_pure(state)?;
                let pure = extract_product_factor(&state, &self.output)?;
                let final_register_residual = 1.0 - self.register_peak_pure(&state);
                Ok(PipelineOutput {
                    final_register_residual,
                    rho: DensityMatrix::from_pure(&pure)?,
                    pure: Some(pure),
                    success_probability,
                    register_residual,
                    register_probability,
                    classical_bits,
                })
            }
            RunState::Mixed(rho) => {
                let (rho, success_probability) = post_select_density(&rho, self.ancilla, true)?;
                let register_residual = 1.0 - self.register_zero_probability_mixed(&rho);
                let mut register_probability = 1.0;
                let mut rho = rho;
                if self.project_register {
                    for &q in &self.register {
                        let (next, p) = post_select_density(&rho, q, false)?;
                        rho = next;
                        register_probability *= p;
                    }
                }
                let final_register_residual = 1.0 - self.register_peak_mixed(&rho);
                Ok(PipelineOutput {
                    final_register_residual,
                    rho: partial_trace(&rho, &self.output)?,
                    pure: None,
                    success_probability,
                    register_residual,
                    register_probability,
                    classical_bits,
                })
            }
        }
    }

    fn register_mask(&self) -> usize {
        self.register.iter().map(|&q| 1usize << q).sum()
    }

    fn register_distribution(&self, diag: impl Iterator<Item = f64>) -> Vec<f64> {
        let mut dist = vec![0.0; 1 << self.register.len()];
        for (i, p) in diag.enumerate() {
            let v = self
                .register
                .iter()
                .enumerate()
                .filter(|(_, &q)| i >> q & 1 == 1)
                .fold(0, |acc, (b, _)| acc | 1 << b);
            dist[v] += p;
        }
        dist
    }

    fn register_peak_pure(&self, state: &ComplexVec) -> f64 {
        self.register_distribution(state.amplitudes().iter().map(|a| a.norm_sqr()))
            .into_iter()
            .fold(0.0, f64::max)
    }

    fn register_peak_mixed(&self, rho: &DensityMatrix) -> f64 {
        self.register_distribution((0..rho.dim()).map(|i| rho.matrix().get(i, i).re))
            .into_iter()
            .fold(0.0, f64::max)
    }

    fn register_zero_probability_pure(&self, state: &ComplexVec) -> f64 {
        let mask = self.register_mask();
        state
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    fn register_zero_probability_mixed(&self, rho: &DensityMatrix) -> f64 {
        let mask = self.register_mask();
        (0..rho.dim())
            .filter(|i| i & mask == 0)
            .map(|i| rho.matrix().get(i, i).re)
            .sum()
    }

    fn project_register_pure(&self, mut state: ComplexVec) -> Result<(ComplexVec, f64)> {
        let mut prob = 1.0;
        if self.project_register {
            for &q in &self.register {
                let (next, p) = post_select(&state, q, false)?;
                state = next;
                prob *= p;
            }
        }
        Ok((state, prob))
    }
}

/// Output-qubit factor of a state that is a product of the output qubits
/// with a basis state on every other qubit (as after full post-selection).
fn extract_product_factor(state: &ComplexVec, output: &[usize]) -> Result<ComplexVec> {
    let mask: usize = output.iter().map(|&q| 1usize << q).sum();
    let peak = state
        .amplitudes()
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let rest = peak & !mask;
    let amps = (0..1usize << output.len())
        .map(|l| {
            let idx = output
                .iter()
                .enumerate()
                .filter(|(b, _)| l >> b & 1 == 1)
                .fold(rest, |acc, (_, &q)| acc | 1 << q);
            state.amplitudes()[idx]
        })
        .collect();
    ComplexVec::new(amps).normalized()
}
