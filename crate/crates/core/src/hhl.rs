//! Generic HHL solver: phase estimation, reciprocal rotation, uncompute and
//! post-selection, plus the classical reference solution.
//!
//! Register layout for an `N = 2^m` problem with an `n`-bit register:
//! input on qubits `0..m`, register on `m..m+n` (its bit `k` on qubit
//! `m + k`), ancilla on qubit `m + n`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::circuit::{inverse_qft, Circuit, Gate, NoiseSpec};
use crate::error::{Error, Result};
use crate::pipeline::{Pipeline, PipelineOutput};
use crate::qstate::{
    eigh, exp_from_spectrum, qubit_count, ComplexMatrix, ComplexVec, EigenDecomposition, C64, ZERO,
};

/// Register values below this probability count as unpopulated.
const POPULATED: f64 = 1e-12;

fn default_register_bits() -> usize {
    2
}

fn default_t0() -> f64 {
    2.0 * PI
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HhlProblem {
    pub matrix: ComplexMatrix,
    pub vector: ComplexVec,
    #[serde(default = "default_register_bits")]
    pub register_bits: usize,
    #[serde(default = "default_t0")]
    pub t0: f64,
    /// Rotation constant `C`; `None` picks the smallest populated
    /// eigenvalue in register units.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_const: Option<f64>,
}

impl HhlProblem {
    pub fn new(matrix: ComplexMatrix, vector: ComplexVec, register_bits: usize) -> Self {
        Self {
            matrix,
            vector,
            register_bits,
            t0: default_t0(),
            c_const: None,
        }
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c_const = Some(c);
        self
    }

    pub fn with_t0(mut self, t0: f64) -> Self {
        self.t0 = t0;
        self
    }

    pub fn input_qubits(&self) -> usize {
        self.matrix.rows().trailing_zeros() as usize
    }

    pub fn layout(&self) -> Layout {
        let m = self.input_qubits();
        let n = self.register_bits;
        Layout {
            input: (0..m).collect(),
            register: (m..m + n).collect(),
            ancilla: m + n,
        }
    }

    /// Eigenvalue expressed as a register value, `λ t0 / 2π`.
    fn register_value(&self, lambda: f64) -> f64 {
        lambda * self.t0 / (2.0 * PI)
    }

    /// Eigenvalue encoded by register value `k`.
    fn eigenvalue_of(&self, k: usize) -> f64 {
        k as f64 * 2.0 * PI / self.t0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pub input: Vec<usize>,
    pub register: Vec<usize>,
    pub ancilla: usize,
}

impl Layout {
    pub fn total(&self) -> usize {
        self.ancilla + 1
    }
}

#[derive(Clone, Debug)]
pub struct Validation {
    pub kappa: f64,
    /// Every eigenvalue lands exactly on a register value in `[1, T-1]`.
    pub exact: bool,
    pub spectrum: EigenDecomposition,
}

pub fn validate(p: &HhlProblem) -> Result<Validation> {
    let a = &p.matrix;
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            actual: a.cols(),
        });
    }
    let m = qubit_count(a.rows())?;
    if m == 0 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: 1,
        });
    }
    if p.vector.dim() != a.rows() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            actual: p.vector.dim(),
        });
    }
    if p.register_bits == 0 || p.register_bits > 12 {
        return Err(Error::BadFlag(format!(
            "register_bits must be in 1..=12, got {}",
            p.register_bits
        )));
    }
    if !(p.t0.is_finite() && p.t0 > 0.0) {
        return Err(Error::BadFlag(format!("t0 must be positive, got {}", p.t0)));
    }
    if let Some(c) = p.c_const {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::BadFlag(format!("c_const must be positive, got {c}")));
        }
    }
    let norm = p.vector.norm();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::NotNormalized { norm });
    }
    let spectrum = eigh(a)?;
    let smallest = spectrum
        .eigenvalues
        .iter()
        .map(|l| l.abs())
        .fold(f64::INFINITY, f64::min);
    if smallest < 1e-10 {
        return Err(Error::Singular {
            magnitude: smallest,
        });
    }
    let largest = spectrum
        .eigenvalues
        .iter()
        .map(|l| l.abs())
        .fold(0.0, f64::max);
    let top = (1usize << p.register_bits) - 1;
    let exact = spectrum.eigenvalues.iter().all(|&l| {
        let v = p.register_value(l);
        let k = v.round();
        (v - k).abs() < 1e-9 && k >= 1.0 && k <= top as f64
    });
    Ok(Validation {
        kappa: largest / smallest,
        exact,
        spectrum,
    })
}

/// Everything needed to build and run the three subroutines.
struct Plan {
    validation: Validation,
    layout: Layout,
    phase_estimation: Circuit,
    /// Register populations after phase estimation on `|b⟩`.
    register_populations: Vec<f64>,
    c: f64,
}

impl Plan {
    fn new(p: &HhlProblem) -> Result<Plan> {
        let validation = validate(p)?;
        let layout = p.layout();
        let phase_estimation = build_phase_estimation(p, &layout, &validation.spectrum)?;
        let register_populations = register_populations(p, &layout, &phase_estimation)?;
        let c = match p.c_const {
            Some(c) => c,
            None => {
                let k = register_populations
                    .iter()
                    .enumerate()
                    .skip(1)
                    .find(|(_, &pop)| pop > POPULATED)
                    .map(|(k, _)| k)
                    .ok_or(Error::Singular { magnitude: 0.0 })?;
                p.eigenvalue_of(k)
            }
        };
        Ok(Plan {
            validation,
            layout,
            phase_estimation,
            register_populations,
            c,
        })
    }

    fn populated(&self, k: usize) -> bool {
        self.register_populations[k] > POPULATED
    }
}

fn build_phase_estimation(
    p: &HhlProblem,
    layout: &Layout,
    spectrum: &EigenDecomposition,
) -> Result<Circuit> {
    let n = p.register_bits;
    let big_t = (1usize << n) as f64;
    let mut c = Circuit::new(layout.total());
    for &r in &layout.register {
        c.h(r);
    }
    for (k, &r) in layout.register.iter().enumerate() {
        // e^{iA 2^k t0 / T}, controlled by register bit k
        let time = (1u64 << k) as f64 * p.t0 / big_t;
        let u = exp_from_spectrum(spectrum, time);
        c.gate(Gate::controlled(
            vec![r],
            Gate::Unitary {
                matrix: u,
                targets: layout.input.clone(),
            },
        ));
    }
    c.append_mapped(&inverse_qft(n), &layout.register)?;
    Ok(c)
}

fn initial_state(p: &HhlProblem, layout: &Layout) -> ComplexVec {
    // ancilla ⊗ register ⊗ input, most significant first
    ComplexVec::zero_state(layout.register.len() + 1).tensor(&p.vector)
}

fn register_populations(p: &HhlProblem, layout: &Layout, pe: &Circuit) -> Result<Vec<f64>> {
    let out = crate::circuit::run(pe, &initial_state(p, layout), None, 0)?;
    let state = out.state.as_pure().expect("noiseless run").clone();
    let m = layout.input.len();
    let n = layout.register.len();
    let mut pops = vec![0.0; 1 << n];
    for (i, a) in state.amplitudes().iter().enumerate() {
        pops[(i >> m) & ((1 << n) - 1)] += a.norm_sqr();
    }
    Ok(pops)
}

/// Phase estimation on the full `input + register + ancilla` width. With an
/// exact spectrum, `|0…0⟩|u_j⟩` maps to `|λ_j t0/2π⟩|u_j⟩`.
pub fn phase_estimation_circuit(p: &HhlProblem) -> Result<Circuit> {
    let v = validate(p)?;
    build_phase_estimation(p, &p.layout(), &v.spectrum)
}

/// Register-value-controlled ancilla rotations: on register value `k` the
/// ancilla `|1⟩` amplitude becomes `C / λ_k` with `λ_k = 2πk / t0`.
pub fn reciprocal_rotation_circuit(p: &HhlProblem) -> Result<Circuit> {
    let plan = Plan::new(p)?;
    build_rotation(p, &plan)
}

fn build_rotation(p: &HhlProblem, plan: &Plan) -> Result<Circuit> {
    let layout = &plan.layout;
    let mut c = Circuit::new(layout.total());
    for k in 1..1usize << p.register_bits {
        let amplitude = plan.c / p.eigenvalue_of(k);
        if amplitude > 1.0 + 1e-12 {
            if plan.populated(k) {
                return Err(Error::InvalidC {
                    c: plan.c,
                    k,
                    amplitude,
                });
            }
            continue;
        }
        let theta = 0.5 * amplitude.min(1.0).asin();
        let zeros: Vec<usize> = layout
            .register
            .iter()
            .enumerate()
            .filter(|(b, _)| k >> b & 1 == 0)
            .map(|(_, &q)| q)
            .collect();
        for &q in &zeros {
            c.x(q);
        }
        c.gate(Gate::controlled(
            layout.register.clone(),
            Gate::HTheta {
                target: layout.ancilla,
                theta,
            },
        ));
        for &q in &zeros {
            c.x(q);
        }
    }
    Ok(c)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HhlResult {
    #[serde(rename = "x")]
    pub x_state: ComplexVec,
    pub success_probability: f64,
    #[serde(rename = "fidelity")]
    pub fidelity_vs_classical: f64,
    pub register_reset_ok: bool,
    pub register_residual: f64,
    pub gate_count: BTreeMap<String, usize>,
    pub exact: bool,
    pub c_const: f64,
    pub kappa: f64,
}

/// The assembled solver circuit with its post-selection recipe.
pub struct HhlPipeline {
    pub pipeline: Pipeline,
    pub validation: Validation,
    pub c: f64,
}

pub fn build_pipeline(p: &HhlProblem) -> Result<HhlPipeline> {
    let plan = Plan::new(p)?;
    if plan.validation.exact && plan.register_populations[0] > 1e-10 {
        return Err(Error::InvalidCircuit(format!(
            "register value 0 populated ({:.3e}) despite exact spectrum",
            plan.register_populations[0]
        )));
    }
    let rotation = build_rotation(p, &plan)?;
    let mut circuit = plan.phase_estimation.clone();
    circuit.append(&rotation)?;
    circuit.append(&plan.phase_estimation.inverse()?)?;
    let layout = plan.layout.clone();
    Ok(HhlPipeline {
        pipeline: Pipeline {
            circuit,
            input: initial_state(p, &layout),
            ancilla: layout.ancilla,
            register: layout.register.clone(),
            project_register: true,
            output: layout.input.clone(),
        },
        c: plan.c,
        validation: plan.validation,
    })
}

/// Runs the solver noiselessly and compares against [`classical_solve`].
pub fn run_hhl(p: &HhlProblem) -> Result<HhlResult> {
    let built = build_pipeline(p)?;
    let out = built.pipeline.execute(None, 0)?;
    result_from(p, &built, &out)
}

/// Noisy variant; returns the post-selected output density matrix alongside.
pub fn run_hhl_noisy(p: &HhlProblem, noise: &NoiseSpec) -> Result<PipelineOutput> {
    build_pipeline(p)?.pipeline.execute(Some(noise), 0)
}

fn result_from(p: &HhlProblem, built: &HhlPipeline, out: &PipelineOutput) -> Result<HhlResult> {
    let x_state = out.pure.clone().expect("noiseless run");
    let classical = classical_solve(&p.matrix, &p.vector)?;
    Ok(HhlResult {
        fidelity_vs_classical: x_state.overlap(&classical)?.clamp(0.0, 1.0),
        x_state,
        success_probability: out.success_probability,
        register_reset_ok: out.register_residual < 1e-10,
        register_residual: out.register_residual,
        gate_count: built.pipeline.circuit.census(),
        exact: built.validation.exact,
        c_const: built.c,
        kappa: built.validation.kappa,
    })
}

/// `Σ_j |β_j|² C² / λ_j²` with `β_j = ⟨u_j|b⟩`.
pub fn success_probability(p: &HhlProblem) -> Result<f64> {
    let v = validate(p)?;
    let s = &v.spectrum;
    let weights: Vec<f64> = (0..s.dim())
        .map(|j| s.eigenvector(j).overlap(&p.vector))
        .collect::<Result<_>>()?;
    let c = match p.c_const {
        Some(c) => c,
        None => s
            .eigenvalues
            .iter()
            .zip(&weights)
            .filter(|(_, &w)| w > POPULATED)
            .map(|(&l, _)| p.eigenvalue_of(p.register_value(l).round().max(1.0) as usize))
            .fold(f64::INFINITY, f64::min),
    };
    Ok(s.eigenvalues
        .iter()
        .zip(&weights)
        .map(|(&l, &w)| w * c * c / (l * l))
        .sum())
}

/// `A⁻¹ b / ‖A⁻¹ b‖` by Gaussian elimination with partial pivoting.
pub fn classical_solve(a: &ComplexMatrix, b: &ComplexVec) -> Result<ComplexVec> {
    let n = a.rows();
    if !a.is_square() || b.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: b.dim(),
        });
    }
    let scale = a.entries().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut m: Vec<Vec<C64>> = (0..n)
        .map(|r| {
            let mut row = a.row(r).to_vec();
            row.push(b.amplitudes()[r]);
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].norm().total_cmp(&m[j][col].norm()))
            .expect("non-empty range");
        let magnitude = m[pivot][col].norm();
        if magnitude <= 1e-12 * scale.max(1e-300) {
            return Err(Error::Singular { magnitude });
        }
        m.swap(col, pivot);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            if f == ZERO {
                continue;
            }
            for c in col..=n {
                let v = m[col][c];
                m[r][c] -= f * v;
            }
        }
    }
    let mut x = vec![ZERO; n];
    for r in (0..n).rev() {
        let s: C64 = (r + 1..n).map(|c| m[r][c] * x[c]).sum();
        x[r] = (m[r][n] - s) / m[r][r];
    }
    ComplexVec::new(x).normalized()
}
