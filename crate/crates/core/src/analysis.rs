//! Observables on the solution qubit, single-qubit tomography, GHZ and
//! entanglement diagnostics, and the per-input expectation report.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{sample_shots_noisy, shot_rng, Circuit, Gate, NoiseSpec};
use crate::compiled::{self, instance_matrix, CompiledConfig, Feedforward, InputVector};
use crate::error::{Error, Result};
use crate::hhl::{self, classical_solve, HhlProblem};
use crate::pipeline::Pipeline;
use crate::qstate::{fidelity, partial_trace, ComplexMatrix, ComplexVec, DensityMatrix, C64};

/// Bloch radius slack tolerated (and clamped away) in tomography input.
pub const BLOCH_CLAMP_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    Z,
    X,
    Y,
}

impl Pauli {
    pub const ALL: [Pauli; 3] = [Pauli::Z, Pauli::X, Pauli::Y];

    pub fn matrix(self) -> ComplexMatrix {
        let (o, l, i) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0));
        let rows = match self {
            Pauli::Z => vec![vec![l, o], vec![o, -l]],
            Pauli::X => vec![vec![o, l], vec![l, o]],
            Pauli::Y => vec![vec![o, -i], vec![i, o]],
        };
        ComplexMatrix::from_rows(rows).expect("2x2")
    }

    /// Rotation taking this observable's eigenbasis to the computational one.
    fn basis_change(self, q: usize) -> Vec<Gate> {
        match self {
            Pauli::Z => vec![],
            Pauli::X => vec![Gate::H(q)],
            Pauli::Y => vec![
                Gate::Phase {
                    target: q,
                    phi: -PI / 2.0,
                },
                Gate::H(q),
            ],
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Pauli::Z => "Z",
            Pauli::X => "X",
            Pauli::Y => "Y",
        };
        f.write_str(s)
    }
}

/// `(⟨Z⟩, ⟨X⟩, ⟨Y⟩)` of a single qubit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PauliExpectations {
    pub z: f64,
    pub x: f64,
    pub y: f64,
}

impl PauliExpectations {
    pub fn new(z: f64, x: f64, y: f64) -> Self {
        Self { z, x, y }
    }

    pub fn of<S: SingleQubit + ?Sized>(state: &S) -> Result<Self> {
        Ok(Self {
            z: state.expectation(Pauli::Z)?,
            x: state.expectation(Pauli::X)?,
            y: state.expectation(Pauli::Y)?,
        })
    }

    pub fn get(&self, p: Pauli) -> f64 {
        match p {
            Pauli::Z => self.z,
            Pauli::X => self.x,
            Pauli::Y => self.y,
        }
    }

    fn set(&mut self, p: Pauli, v: f64) {
        match p {
            Pauli::Z => self.z = v,
            Pauli::X => self.x = v,
            Pauli::Y => self.y = v,
        }
    }

    pub fn radius(&self) -> f64 {
        (self.z * self.z + self.x * self.x + self.y * self.y).sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        Pauli::ALL
            .iter()
            .map(|&p| (self.get(p) - other.get(p)).abs())
            .fold(0.0, f64::max)
    }
}

/// A one-qubit state, pure or mixed.
pub trait SingleQubit {
    fn expectation(&self, which: Pauli) -> Result<f64>;
}

impl SingleQubit for ComplexVec {
    fn expectation(&self, which: Pauli) -> Result<f64> {
        if self.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                actual: self.dim(),
            });
        }
        let mv = which.matrix().apply(self)?;
        Ok(self.inner(&mv)?.re / self.norm_sqr())
    }
}

impl SingleQubit for DensityMatrix {
    fn expectation(&self, which: Pauli) -> Result<f64> {
        if self.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                actual: self.dim(),
            });
        }
        Ok(which.matrix().matmul(self.matrix())?.trace().re)
    }
}

/// `⟨M⟩` for a single-qubit state vector or density matrix.
pub fn pauli_expectation<S: SingleQubit + ?Sized>(state: &S, which: Pauli) -> Result<f64> {
    state.expectation(which)
}

/// `ρ = ½(I + xX + yY + zZ)`. Radii up to `1 + 1e-6` are pulled back onto
/// the sphere.
pub fn reconstruct_single_qubit(e: &PauliExpectations) -> Result<DensityMatrix> {
    let r = e.radius();
    if !r.is_finite() || r > 1.0 + BLOCH_CLAMP_TOL {
        return Err(Error::UnphysicalExpectations { radius: r });
    }
    let s = if r > 1.0 { 1.0 / r } else { 1.0 };
    let half = C64::new(0.5, 0.0);
    let mut m = ComplexMatrix::identity(2).scaled(half);
    for p in Pauli::ALL {
        m = m.add(&p.matrix().scaled(half * e.get(p) * s))?;
    }
    DensityMatrix::new(m)
}

/// `(|0…0⟩ + |1…1⟩)/√2`
pub fn ghz_state(qubits: usize) -> ComplexVec {
    let d = 1usize << qubits;
    let mut amps = vec![C64::new(0.0, 0.0); d];
    amps[0] = C64::new(FRAC_1_SQRT_2, 0.0);
    amps[d - 1] = C64::new(FRAC_1_SQRT_2, 0.0);
    ComplexVec::new(amps)
}

/// `⟨GHZ|ρ|GHZ⟩` for a four-qubit state.
pub fn ghz_fidelity(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 16 {
        return Err(Error::DimensionMismatch {
            expected: 16,
            actual: rho.dim(),
        });
    }
    fidelity(&ghz_state(4), rho)
}

/// GHZ fidelity above one half rules out biseparable states.
pub fn genuine_entanglement_witnessed(ghz_fidelity: f64) -> bool {
    ghz_fidelity > 0.5
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    rho.eigenvalues()
        .into_iter()
        .filter(|&l| l > 1e-15)
        .map(|l| -l * l.log2())
        .sum()
}

/// Entropy of the reduced state on `part` of a pure state.
pub fn entanglement_entropy(state: &ComplexVec, part: &[usize]) -> Result<f64> {
    let rho = DensityMatrix::from_pure(&state.normalized()?)?;
    Ok(von_neumann_entropy(&partial_trace(&rho, part)?))
}

/// Every split of `qubits` into two non-empty sides, each listed once
/// (by the side holding qubit 0).
pub fn bipartitions(qubits: usize) -> Vec<Vec<usize>> {
    (1usize..1 << qubits)
        .filter(|m| m & 1 == 1 && m.count_ones() < qubits as u32)
        .map(|m| (0..qubits).filter(|q| m >> q & 1 == 1).collect())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BipartitionEntropy {
    pub part: Vec<usize>,
    pub entropy: f64,
}

pub fn bipartition_entropies(state: &ComplexVec) -> Result<Vec<BipartitionEntropy>> {
    bipartitions(state.qubits()?)
        .into_iter()
        .map(|part| {
            let entropy = entanglement_entropy(state, &part)?;
            Ok(BipartitionEntropy { part, entropy })
        })
        .collect()
}

/// A single-qubit Pauli (or identity) applied to each qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LocalOp {
    I,
    X,
    Y,
    Z,
}

impl LocalOp {
    const ALL: [LocalOp; 4] = [LocalOp::I, LocalOp::X, LocalOp::Y, LocalOp::Z];

    fn gate(self, q: usize) -> Option<Gate> {
        match self {
            LocalOp::I => None,
            LocalOp::X => Some(Gate::X(q)),
            LocalOp::Y => Some(Gate::Y(q)),
            LocalOp::Z => Some(Gate::Z(q)),
        }
    }
}

/// Local frame, entry `q` acting on qubit `q`.
pub type LocalFrame = Vec<LocalOp>;

pub fn apply_frame(state: &ComplexVec, frame: &[LocalOp]) -> Result<ComplexVec> {
    let mut s = state.clone();
    for (q, op) in frame.iter().enumerate() {
        if let Some(g) = op.gate(q) {
            s = crate::circuit::apply_gate(&s, &g)?;
        }
    }
    Ok(s)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GhzFrameMatch {
    pub frame: LocalFrame,
    pub fidelity: f64,
}

/// Best GHZ overlap over the frames `{I, X, Y, Z}^⊗n` (first best wins).
pub fn best_ghz_frame(state: &ComplexVec) -> Result<GhzFrameMatch> {
    let n = state.qubits()?;
    let ghz = ghz_state(n);
    let state = state.normalized()?;
    let mut best: Option<GhzFrameMatch> = None;
    for code in 0..4usize.pow(n as u32) {
        let frame: LocalFrame = (0..n)
            .map(|q| LocalOp::ALL[code / 4usize.pow(q as u32) % 4])
            .collect();
        let f = apply_frame(&state, &frame)?.overlap(&ghz)?;
        if best.as_ref().is_none_or(|b| f > b.fidelity + 1e-12) {
            best = Some(GhzFrameMatch { frame, fidelity: f });
        }
    }
    Ok(best.expect("at least one frame"))
}

/// Estimate of one quantity from repeated post-selected measurements.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShotEstimate {
    pub shots_per_observable: u64,
    /// Shots kept by post-selection, per observable (Z, X, Y).
    pub accepted: [u64; 3],
    pub success_probability: Estimate,
    pub expectations: PauliExpectations,
    /// `√((1−⟨M⟩²)/accepted)` per observable.
    pub stderr: PauliExpectations,
}

/// Samples `shots` runs per Pauli observable of the pipeline's single
/// output qubit, with the output measured in the observable's eigenbasis.
/// Runs are kept when the ancilla reads 1 (and the register 0 when the
/// pipeline projects it). Noise acts on the circuit, not on the readout.
pub fn shot_estimate(
    pipeline: &Pipeline,
    noise: Option<&NoiseSpec>,
    shots: u64,
    seed: u64,
) -> Result<ShotEstimate> {
    if pipeline.output.len() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            actual: pipeline.output.len(),
        });
    }
    let out_q = pipeline.output[0];
    let base = pipeline.circuit.num_slots();
    let checked: Vec<usize> = if pipeline.project_register {
        pipeline.register.clone()
    } else {
        vec![]
    };
    let out_slot = base + 1 + checked.len();

    let per_obs: Vec<(u64, u64, f64)> = Pauli::ALL
        .par_iter()
        .enumerate()
        .map(|(k, &p)| {
            let mut readout = Circuit::new(pipeline.circuit.qubits());
            for g in p.basis_change(out_q) {
                readout.gate(g);
            }
            readout.measure(pipeline.ancilla, 0);
            for (i, &q) in checked.iter().enumerate() {
                readout.measure(q, 1 + i);
            }
            readout.measure(out_q, 1 + checked.len());
            let obs_seed = shot_rng(seed, k as u64).next_u64();
            let hist = sample_shots_noisy(&pipeline.circuit, &readout, &pipeline.input, noise, shots, obs_seed)?;
            let (mut heralded, mut accepted, mut sum) = (0u64, 0u64, 0i64);
            for (key, &n) in &hist {
                let b = key.as_bytes();
                if b[base] != b'1' {
                    continue;
                }
                heralded += n;
                if (0..checked.len()).any(|i| b[base + 1 + i] != b'0') {
                    continue;
                }
                accepted += n;
                sum += if b[out_slot] == b'0' {
                    n as i64
                } else {
                    -(n as i64)
                };
            }
            let mean = if accepted > 0 {
                sum as f64 / accepted as f64
            } else {
                0.0
            };
            Ok((heralded, accepted, mean))
        })
        .collect::<Result<_>>()?;

    let mut expectations = PauliExpectations::default();
    let mut stderr = PauliExpectations::default();
    let mut accepted = [0u64; 3];
    for (k, &p) in Pauli::ALL.iter().enumerate() {
        let (_, acc, mean) = per_obs[k];
        accepted[k] = acc;
        expectations.set(p, mean);
        stderr.set(p, binomial_stderr(mean, acc));
    }
    let heralded: u64 = per_obs.iter().map(|t| t.0).sum();
    let total = shots * 3;
    let ps = heralded as f64 / total as f64;
    Ok(ShotEstimate {
        shots_per_observable: shots,
        accepted,
        success_probability: Estimate {
            value: ps,
            stderr: (ps * (1.0 - ps) / total as f64).sqrt(),
        },
        expectations,
        stderr,
    })
}

/// Fraction of `shots` runs in which the ancilla heralds success.
pub fn shot_success_probability(
    pipeline: &Pipeline,
    noise: Option<&NoiseSpec>,
    shots: u64,
    seed: u64,
) -> Result<Estimate> {
    let slot = pipeline.circuit.num_slots();
    let mut readout = Circuit::new(pipeline.circuit.qubits());
    readout.measure(pipeline.ancilla, 0);
    let hist = sample_shots_noisy(&pipeline.circuit, &readout, &pipeline.input, noise, shots, seed)?;
    let hits: u64 = hist
        .iter()
        .filter(|(k, _)| k.as_bytes()[slot] == b'1')
        .map(|(_, &n)| n)
        .sum();
    let p = hits as f64 / shots as f64;
    Ok(Estimate {
        value: p,
        stderr: (p * (1.0 - p) / shots as f64).sqrt(),
    })
}

/// Standard error of a ±1-valued mean: `√((1−⟨M⟩²)/n)`.
pub fn binomial_stderr(mean: f64, n: u64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    ((1.0 - mean * mean).max(0.0) / n as f64).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// The four-qubit optimized circuit.
    Compiled,
    /// The general solver with a QFT-based phase estimation.
    Generic,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportConfig {
    pub mode: Mode,
    pub feedforward: Feedforward,
    pub inputs: Vec<InputVector>,
    pub noise: Option<NoiseSpec>,
    /// Generic mode only.
    pub register_bits: usize,
    /// Generic mode only.
    pub c_const: f64,
    /// Shots per observable; 0 skips sampling.
    pub shots: u64,
    pub seed: u64,
}

impl ReportConfig {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            feedforward: Feedforward::Unitary,
            inputs: InputVector::PRESETS.to_vec(),
            noise: None,
            register_bits: 2,
            c_const: 1.0,
            shots: 0,
            seed: 0,
        }
    }

    pub fn with_noise(mut self, noise: Option<NoiseSpec>) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_feedforward(mut self, f: Feedforward) -> Self {
        self.feedforward = f;
        self
    }

    pub fn with_inputs(mut self, inputs: Vec<InputVector>) -> Self {
        self.inputs = inputs;
        self
    }

    pub fn with_shots(mut self, shots: u64, seed: u64) -> Self {
        self.shots = shots;
        self.seed = seed;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportEntry {
    pub input: String,
    /// Expectations of the exact solution `A⁻¹b`.
    pub ideal: PauliExpectations,
    /// Noiseless prediction of the chosen circuit.
    pub noiseless: PauliExpectations,
    /// The chosen circuit under the requested noise.
    pub simulated: PauliExpectations,
    pub success_probability: f64,
    pub noiseless_success_probability: f64,
    /// Simulated output against the exact solution.
    pub fidelity: f64,
    pub noiseless_fidelity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots: Option<ShotEstimate>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpectationReport {
    pub config: ReportConfig,
    pub entries: Vec<ReportEntry>,
}

fn pipeline_for(cfg: &ReportConfig, input: &InputVector) -> Result<Pipeline> {
    match cfg.mode {
        Mode::Compiled => compiled::compiled_pipeline(
            &CompiledConfig::new(input.clone())
                .with_feedforward(cfg.feedforward)
                .with_seed(cfg.seed),
        ),
        Mode::Generic => {
            if cfg.feedforward == Feedforward::Semiclassical {
                return Err(Error::BadFlag(
                    "semiclassical feedforward is only implemented for the compiled circuit".into(),
                ));
            }
            let p = HhlProblem::new(instance_matrix(), input.state()?, cfg.register_bits)
                .with_c(cfg.c_const);
            Ok(hhl::build_pipeline(&p)?.pipeline)
        }
    }
}

fn entry(cfg: &ReportConfig, index: usize, input: &InputVector) -> Result<ReportEntry> {
    let exact = classical_solve(&instance_matrix(), &input.state()?)?;
    let pipeline = pipeline_for(cfg, input)?;
    let clean = pipeline.execute(None, cfg.seed)?;
    let noisy = match &cfg.noise {
        Some(n) => pipeline.execute(Some(n), cfg.seed)?,
        None => clean.clone(),
    };
    let shots = if cfg.shots > 0 {
        let seed = shot_rng(cfg.seed, 3 + index as u64).next_u64();
        Some(shot_estimate(&pipeline, cfg.noise.as_ref(), cfg.shots, seed)?)
    } else {
        None
    };
    let exact_rho = DensityMatrix::from_pure(&exact)?;
    Ok(ReportEntry {
        input: input.label(),
        ideal: PauliExpectations::of(&exact_rho)?,
        noiseless: PauliExpectations::of(&clean.rho)?,
        simulated: PauliExpectations::of(&noisy.rho)?,
        success_probability: noisy.success_probability,
        noiseless_success_probability: clean.success_probability,
        fidelity: fidelity(&exact, &noisy.rho)?,
        noiseless_fidelity: fidelity(&exact, &clean.rho)?,
        shots,
    })
}

/// Runs each input through the chosen circuit and collects exact, noiseless
/// and (optionally) noisy and sampled expectations.
pub fn build_report(cfg: &ReportConfig) -> Result<ExpectationReport> {
    let entries = cfg
        .inputs
        .par_iter()
        .enumerate()
        .map(|(i, input)| entry(cfg, i, input))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExpectationReport {
        config: cfg.clone(),
        entries,
    })
}

/// One CSV row of the flat report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub input: String,
    pub observable: String,
    pub ideal: f64,
    pub simulated: f64,
    pub stderr: Option<f64>,
}

impl ExpectationReport {
    /// Rows `(input, observable, ideal, simulated, stderr)`. With shots the
    /// simulated column holds the sampled estimate.
    pub fn rows(&self) -> Vec<ReportRow> {
        let mut rows = Vec::new();
        for e in &self.entries {
            for p in Pauli::ALL {
                let (simulated, stderr) = match &e.shots {
                    Some(s) => (s.expectations.get(p), Some(s.stderr.get(p))),
                    None => (e.simulated.get(p), None),
                };
                rows.push(ReportRow {
                    input: e.input.clone(),
                    observable: p.to_string(),
                    ideal: e.ideal.get(p),
                    simulated,
                    stderr,
                });
            }
            let (simulated, stderr) = match &e.shots {
                Some(s) => (
                    s.success_probability.value,
                    Some(s.success_probability.stderr),
                ),
                None => (e.success_probability, None),
            };
            rows.push(ReportRow {
                input: e.input.clone(),
                observable: "success_probability".into(),
                ideal: e.noiseless_success_probability,
                simulated,
                stderr,
            });
            rows.push(ReportRow {
                input: e.input.clone(),
                observable: "fidelity".into(),
                ideal: 1.0,
                simulated: e.fidelity,
                stderr: None,
            });
        }
        rows
    }
}
