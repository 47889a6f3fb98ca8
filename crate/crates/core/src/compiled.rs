//! The optimized four-qubit circuit for the 2×2 instance
//! `A = [[1.5, 0.5], [0.5, 1.5]]` (eigenvalues 1 and 2).
//!
//! Qubits: ancilla, registers R1 and R2, and the input qubit. The register
//! holds `2·R1 + R2`; phase estimation writes `λ = 1 ↦ |01⟩` and
//! `λ = 2 ↦ |10⟩`. On this spectrum a swap of R1 and R2 computes `2/λ`, so
//! the reciprocal step is a swap. That swap and the one restoring the
//! register before the inverse step cancel: the rotation controls are
//! simply wired to the pre-swap qubits.
//!
//! Decomposition used here (the single-qubit rotations between the
//! entangling gates are our choice, constrained end to end by the
//! classical solution):
//!
//! ```text
//! phase estimation   H(in)  X(R1)  CNOT(in→R1)  CNOT(in→R2)
//! rotation           C[R2]-H(π/8)(anc)  C[R1]-H(π/16)(anc)
//! inverse, unitary   H(R1)  H(R2)  H(in)           then keep R1 = R2 = |0⟩
//! inverse, feedfwd   H(R1)  H(R2)  measure R1, R2, Z(in) per outcome, H(in)
//! ```
//!
//! The CNOTs are ideal. In the optics they are polarizing-beam-splitter
//! gates whose action on an `|H⟩` target is exactly a CNOT.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::circuit::{h_theta_matrix, Circuit, Gate, NoiseSpec};
use crate::error::{Error, Result};
use crate::hhl::{classical_solve, HhlResult};
use crate::pipeline::{Pipeline, PipelineOutput};
use crate::qstate::{ComplexMatrix, ComplexVec, C64};

/// The 2×2 system matrix of the compiled instance.
pub fn instance_matrix() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[1.5, 0.5], &[0.5, 1.5]]).expect("2x2")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputVector {
    /// `(|0⟩ + |1⟩)/√2`
    B1,
    /// `(|0⟩ - |1⟩)/√2`
    B2,
    /// `|0⟩`
    B3,
    /// `cos φ |0⟩ + sin φ |1⟩` (a linear polarization at angle φ).
    Polarization(f64),
    Custom(ComplexVec),
}

impl InputVector {
    pub const PRESETS: [InputVector; 3] = [InputVector::B1, InputVector::B2, InputVector::B3];

    pub fn state(&self) -> Result<ComplexVec> {
        let s = FRAC_1_SQRT_2;
        let v = match self {
            InputVector::B1 => ComplexVec::from_real(&[s, s]),
            InputVector::B2 => ComplexVec::from_real(&[s, -s]),
            InputVector::B3 => ComplexVec::from_real(&[1.0, 0.0]),
            InputVector::Polarization(phi) => ComplexVec::from_real(&[phi.cos(), phi.sin()]),
            InputVector::Custom(v) => {
                if v.dim() != 2 {
                    return Err(Error::DimensionMismatch {
                        expected: 2,
                        actual: v.dim(),
                    });
                }
                if !v.is_normalized(1e-12) {
                    return Err(Error::NotNormalized { norm: v.norm() });
                }
                v.clone()
            }
        };
        Ok(v)
    }

    pub fn label(&self) -> String {
        match self {
            InputVector::B1 => "b1".into(),
            InputVector::B2 => "b2".into(),
            InputVector::B3 => "b3".into(),
            InputVector::Polarization(phi) => format!("polarization({phi})"),
            InputVector::Custom(_) => "custom".into(),
        }
    }

    pub fn preset(name: &str) -> Option<InputVector> {
        match name {
            "b1" => Some(InputVector::B1),
            "b2" => Some(InputVector::B2),
            "b3" => Some(InputVector::B3),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Feedforward {
    /// Coherent inverse step followed by projecting the registers on `|00⟩`.
    Unitary,
    /// Registers measured; Z corrections on the input conditioned on outcomes.
    Semiclassical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitRoles {
    pub ancilla: usize,
    pub register_r1: usize,
    pub register_r2: usize,
    pub input: usize,
}

impl Default for QubitRoles {
    /// Ancilla most significant, input least: `|A R1 R2 b⟩`.
    fn default() -> Self {
        Self {
            ancilla: 3,
            register_r1: 2,
            register_r2: 1,
            input: 0,
        }
    }
}

impl QubitRoles {
    pub fn validate(&self) -> Result<()> {
        let mut seen = [false; 4];
        for q in [self.ancilla, self.register_r1, self.register_r2, self.input] {
            if q >= 4 {
                return Err(Error::BadIndex {
                    index: q,
                    qubits: 4,
                });
            }
            if seen[q] {
                return Err(Error::InvalidCircuit(format!(
                    "qubit {q} assigned two roles"
                )));
            }
            seen[q] = true;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompiledConfig {
    pub input: InputVector,
    pub feedforward: Feedforward,
    /// Rotation on the `λ = 1` branch.
    pub theta_big: f64,
    /// Rotation on the `λ = 2` branch.
    pub theta_small: f64,
    pub roles: QubitRoles,
    /// Seed for the mid-circuit measurements of the feedforward mode.
    pub seed: u64,
}

impl CompiledConfig {
    pub fn new(input: InputVector) -> Self {
        Self {
            input,
            feedforward: Feedforward::Unitary,
            theta_big: PI / 8.0,
            theta_small: PI / 16.0,
            roles: QubitRoles::default(),
            seed: 0,
        }
    }

    pub fn with_feedforward(mut self, f: Feedforward) -> Self {
        self.feedforward = f;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    AfterPhaseEstimation,
    /// Inside the rotation step: the ancilla has been entangled with the
    /// register (a CNOT from R2), before the register-controlled unitaries.
    AncillaEntangled,
    AfterRotation,
}

pub fn phase_estimation_segment(cfg: &CompiledConfig) -> Result<Circuit> {
    let r = cfg.roles;
    r.validate()?;
    let mut c = Circuit::new(4);
    c.h(r.input)
        .x(r.register_r1)
        .cx(r.input, r.register_r1)
        .cx(r.input, r.register_r2);
    Ok(c)
}

/// Register-controlled `H(θ)` pair, wired with the reciprocal swap elided.
pub fn rotation_segment(cfg: &CompiledConfig) -> Result<Circuit> {
    let r = cfg.roles;
    r.validate()?;
    let mut c = Circuit::new(4);
    c.gate(Gate::controlled(
        vec![r.register_r2],
        Gate::HTheta {
            target: r.ancilla,
            theta: cfg.theta_big,
        },
    ))
    .gate(Gate::controlled(
        vec![r.register_r1],
        Gate::HTheta {
            target: r.ancilla,
            theta: cfg.theta_small,
        },
    ));
    Ok(c)
}

/// The rotation step as an entangling stage followed by register-controlled
/// unitaries: `CNOT(R2→anc)`, `C[R2]-(H(θ_big)·X)`, `C[R1]-H(θ_small)`.
/// Equal, as a unitary, to [`rotation_segment`].
pub fn rotation_segment_expanded(cfg: &CompiledConfig) -> Result<Circuit> {
    let r = cfg.roles;
    r.validate()?;
    let x = Gate::X(0).resolve().matrix;
    let big_after_flip = h_theta_matrix(cfg.theta_big).matmul(&x)?;
    let mut c = Circuit::new(4);
    c.cx(r.register_r2, r.ancilla)
        .gate(Gate::controlled(
            vec![r.register_r2],
            Gate::Unitary {
                matrix: big_after_flip,
                targets: vec![r.ancilla],
            },
        ))
        .gate(Gate::controlled(
            vec![r.register_r1],
            Gate::HTheta {
                target: r.ancilla,
                theta: cfg.theta_small,
            },
        ));
    Ok(c)
}

pub fn inverse_segment(cfg: &CompiledConfig) -> Result<Circuit> {
    let r = cfg.roles;
    r.validate()?;
    let mut c = Circuit::new(4);
    c.h(r.register_r1).h(r.register_r2);
    if cfg.feedforward == Feedforward::Semiclassical {
        c.measure(r.register_r1, 0)
            .measure(r.register_r2, 1)
            .conditional(Gate::Z(r.input), 0, true)
            .conditional(Gate::Z(r.input), 1, true);
    }
    c.h(r.input);
    Ok(c)
}

/// The full compiled circuit (swap pair elided).
pub fn build_compiled_circuit(cfg: &CompiledConfig) -> Result<Circuit> {
    let mut c = phase_estimation_segment(cfg)?;
    c.append(&rotation_segment(cfg)?)?;
    c.append(&inverse_segment(cfg)?)?;
    Ok(c)
}

/// Same circuit with the reciprocal swap and its undo written out, and the
/// rotations wired to the post-swap register.
pub fn build_with_explicit_swaps(cfg: &CompiledConfig) -> Result<Circuit> {
    let r = cfg.roles;
    let mut c = phase_estimation_segment(cfg)?;
    c.gate(Gate::Swap(r.register_r1, r.register_r2))
        .gate(Gate::controlled(
            vec![r.register_r1],
            Gate::HTheta {
                target: r.ancilla,
                theta: cfg.theta_big,
            },
        ))
        .gate(Gate::controlled(
            vec![r.register_r2],
            Gate::HTheta {
                target: r.ancilla,
                theta: cfg.theta_small,
            },
        ))
        .gate(Gate::Swap(r.register_r1, r.register_r2));
    c.append(&inverse_segment(cfg)?)?;
    Ok(c)
}

/// `|0⟩_anc |0⟩_R1 |0⟩_R2 ⊗ |b⟩_in` placed according to the roles.
pub fn initial_state(cfg: &CompiledConfig) -> Result<ComplexVec> {
    cfg.roles.validate()?;
    let b = cfg.input.state()?;
    let mut amps = vec![C64::new(0.0, 0.0); 16];
    amps[0] = b.amplitudes()[0];
    amps[1 << cfg.roles.input] = b.amplitudes()[1];
    Ok(ComplexVec::new(amps))
}

pub fn compiled_pipeline(cfg: &CompiledConfig) -> Result<Pipeline> {
    let r = cfg.roles;
    Ok(Pipeline {
        circuit: build_compiled_circuit(cfg)?,
        input: initial_state(cfg)?,
        ancilla: r.ancilla,
        register: vec![r.register_r1, r.register_r2],
        project_register: cfg.feedforward == Feedforward::Unitary,
        output: vec![r.input],
    })
}

/// Runs the compiled circuit noiselessly and post-selects the ancilla on
/// `|1⟩` (and, in unitary mode, the registers on `|00⟩`).
pub fn run_compiled(cfg: &CompiledConfig) -> Result<HhlResult> {
    let pipeline = compiled_pipeline(cfg)?;
    let out = pipeline.execute(None, cfg.seed)?;
    let x_state = out.pure.clone().expect("noiseless run");
    let classical = classical_solve(&instance_matrix(), &cfg.input.state()?)?;
    Ok(HhlResult {
        fidelity_vs_classical: x_state.overlap(&classical)?.clamp(0.0, 1.0),
        x_state,
        success_probability: out.success_probability,
        register_reset_ok: out.final_register_residual < 1e-10,
        register_residual: out.final_register_residual,
        gate_count: pipeline.circuit.census(),
        exact: true,
        c_const: f64::NAN,
        kappa: 2.0,
    })
}

pub fn run_compiled_noisy(cfg: &CompiledConfig, noise: &NoiseSpec) -> Result<PipelineOutput> {
    compiled_pipeline(cfg)?.execute(Some(noise), cfg.seed)
}

/// `Σ_j |β_j|² sin²(2θ_j)` over the two eigen-branches.
pub fn compiled_success_probability(cfg: &CompiledConfig) -> Result<f64> {
    let b = cfg.input.state()?;
    let s = FRAC_1_SQRT_2;
    let plus = ComplexVec::from_real(&[s, s]);
    let minus = ComplexVec::from_real(&[s, -s]);
    let w_two = plus.overlap(&b)?;
    let w_one = minus.overlap(&b)?;
    Ok(w_one * (2.0 * cfg.theta_big).sin().powi(2) + w_two * (2.0 * cfg.theta_small).sin().powi(2))
}

/// Full four-qubit state at a named point of the circuit.
pub fn intermediate_state(cfg: &CompiledConfig, stage: Stage) -> Result<ComplexVec> {
    let mut c = phase_estimation_segment(cfg)?;
    match stage {
        Stage::AfterPhaseEstimation => {}
        Stage::AncillaEntangled => {
            c.cx(cfg.roles.register_r2, cfg.roles.ancilla);
        }
        Stage::AfterRotation => {
            c.append(&rotation_segment(cfg)?)?;
        }
    }
    let out = crate::circuit::run(&c, &initial_state(cfg)?, None, 0)?;
    Ok(out.state.as_pure().expect("noiseless").clone())
}

/// Checks that swapping R1 and R2 sends the register encoding of `λ` to
/// that of `2/λ` on the spectrum {1, 2}.
pub fn reciprocal_swap_check() -> bool {
    let mut swap = Circuit::new(2);
    // local qubit 1 = R1 (high bit), qubit 0 = R2
    swap.gate(Gate::Swap(1, 0));
    [1usize, 2].iter().all(|&lambda| {
        let out = crate::circuit::run(&swap, &ComplexVec::basis(4, lambda), None, 0)
            .ok()
            .and_then(|o| o.state.as_pure().cloned());
        let reciprocal = 2 / lambda;
        out.is_some_and(|v| {
            v.overlap(&ComplexVec::basis(4, reciprocal)).unwrap_or(0.0) > 1.0 - 1e-15
        })
    })
}
