use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gate::{Gate, ResolvedGate};
use super::{Circuit, Op};
use crate::error::{Error, Result};
use crate::qstate::{ComplexMatrix, ComplexVec, DensityMatrix, C64, ZERO};

/// Projections with norm below this are treated as impossible branches.
const ZERO_NORM: f64 = 1e-14;

/// Which gate applications are followed by depolarizing noise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseTarget {
    All,
    EntanglingOnly,
}

/// Depolarizing noise applied to the qubits of each gate after it acts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub p_depolarizing: f64,
    pub applies_to: NoiseTarget,
}

impl NoiseSpec {
    pub fn new(p: f64, applies_to: NoiseTarget) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::BadFlag(format!(
                "depolarizing probability {p} outside [0, 1]"
            )));
        }
        Ok(Self {
            p_depolarizing: p,
            applies_to,
        })
    }

    pub fn all(p: f64) -> Result<Self> {
        Self::new(p, NoiseTarget::All)
    }

    fn hits(&self, g: &Gate) -> bool {
        match self.applies_to {
            NoiseTarget::All => true,
            NoiseTarget::EntanglingOnly => g.is_entangling(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RunState {
    Pure(ComplexVec),
    Mixed(DensityMatrix),
}

impl RunState {
    /// Density-matrix view of either representation.
    pub fn to_density(&self) -> DensityMatrix {
        match self {
            RunState::Pure(v) => DensityMatrix::from_pure(v).expect("power-of-two state"),
            RunState::Mixed(rho) => rho.clone(),
        }
    }

    pub fn as_pure(&self) -> Option<&ComplexVec> {
        match self {
            RunState::Pure(v) => Some(v),
            RunState::Mixed(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub state: RunState,
    /// One entry per classical slot; unwritten slots read `false`.
    pub classical_bits: Vec<bool>,
    /// Born probability of the realized measurement branch.
    pub probability: f64,
}

/// Keyed random source: stream `index` of the generator seeded by `seed`.
pub fn shot_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn spread(bits: usize, positions: &[usize]) -> usize {
    positions
        .iter()
        .enumerate()
        .filter(|(b, _)| bits >> b & 1 == 1)
        .map(|(_, &p)| 1usize << p)
        .sum()
}

/// Applies a resolved gate to a length-`2^q` amplitude buffer in place.
fn apply_resolved(amps: &mut [C64], g: &ResolvedGate) {
    let k = g.targets.len();
    let local = 1usize << k;
    let tmask = spread(local - 1, &g.targets);
    let cmask: usize = g.controls.iter().map(|&c| 1usize << c).sum();
    let offsets: Vec<usize> = (0..local).map(|l| spread(l, &g.targets)).collect();
    let m = &g.matrix;
    let mut buf = vec![ZERO; local];
    for base in 0..amps.len() {
        if base & tmask != 0 || base & cmask != cmask {
            continue;
        }
        for (l, off) in offsets.iter().enumerate() {
            buf[l] = amps[base | off];
        }
        for (r, off) in offsets.iter().enumerate() {
            amps[base | off] = m.row(r).iter().zip(&buf).map(|(a, b)| a * b).sum();
        }
    }
}

/// `U|ψ⟩` for the gate embedded in the full register.
pub fn apply_gate(state: &ComplexVec, g: &Gate) -> Result<ComplexVec> {
    g.validate(state.qubits()?)?;
    let mut out = state.clone();
    apply_resolved(out.amplitudes_mut(), &g.resolve());
    Ok(out)
}

/// `UρU†` without building the embedded unitary.
fn apply_resolved_density(rho: &mut DensityMatrix, g: &ResolvedGate) {
    let d = rho.dim();
    let m = rho.matrix_mut();
    let mut col = vec![ZERO; d];
    for c in 0..d {
        for r in 0..d {
            col[r] = m.get(r, c);
        }
        apply_resolved(&mut col, g);
        for r in 0..d {
            m.set(r, c, col[r]);
        }
    }
    // rows: (U ρ) U† = (U (U ρ)†)†
    for r in 0..d {
        for c in 0..d {
            col[c] = m.get(r, c).conj();
        }
        apply_resolved(&mut col, g);
        for c in 0..d {
            m.set(r, c, col[c].conj());
        }
    }
}

/// Mixes the listed qubits toward the maximally mixed state:
/// `ρ → (1-p)ρ + p·(I/d) ⊗ tr_S(ρ)`.
pub fn depolarize(rho: &DensityMatrix, qubits: &[usize], p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::BadFlag(format!(
            "depolarizing probability {p} outside [0, 1]"
        )));
    }
    let q = rho.qubits();
    if let Some(&bad) = qubits.iter().find(|&&i| i >= q) {
        return Err(Error::BadIndex {
            index: bad,
            qubits: q,
        });
    }
    let mut out = rho.clone();
    depolarize_in_place(&mut out, qubits, p);
    Ok(out)
}

fn depolarize_in_place(rho: &mut DensityMatrix, qubits: &[usize], p: f64) {
    if p == 0.0 || qubits.is_empty() {
        return;
    }
    let mut set = qubits.to_vec();
    set.sort_unstable();
    set.dedup();
    let local = 1usize << set.len();
    let smask = spread(local - 1, &set);
    let offsets: Vec<usize> = (0..local).map(|l| spread(l, &set)).collect();
    let d = rho.dim();
    let src = rho.matrix().clone();
    let m = rho.matrix_mut();
    let w = C64::new(p / local as f64, 0.0);
    for i in 0..d {
        for j in 0..d {
            let mut v = src.get(i, j) * (1.0 - p);
            if i & smask == j & smask {
                let (bi, bj) = (i & !smask, j & !smask);
                let reduced: C64 = offsets.iter().map(|o| src.get(bi | o, bj | o)).sum();
                v += w * reduced;
            }
            m.set(i, j, v);
        }
    }
}

/// Projects `qubit` onto `outcome`; returns the renormalized state and the
/// branch probability.
pub fn post_select(state: &ComplexVec, qubit: usize, outcome: bool) -> Result<(ComplexVec, f64)> {
    let q = state.qubits()?;
    if qubit >= q {
        return Err(Error::BadIndex {
            index: qubit,
            qubits: q,
        });
    }
    let mut out = state.clone();
    let norm = project(out.amplitudes_mut(), qubit, outcome).sqrt();
    if norm < ZERO_NORM {
        return Err(Error::ZeroProbability { norm });
    }
    Ok((out.scaled(C64::new(1.0 / norm, 0.0)), norm * norm))
}

/// Zeroes the amplitudes inconsistent with `outcome`; returns the kept weight.
fn project(amps: &mut [C64], qubit: usize, outcome: bool) -> f64 {
    let mask = 1usize << qubit;
    let mut kept = 0.0;
    for (i, a) in amps.iter_mut().enumerate() {
        if (i & mask != 0) == outcome {
            kept += a.norm_sqr();
        } else {
            *a = ZERO;
        }
    }
    kept
}

fn project_density(rho: &mut DensityMatrix, qubit: usize, outcome: bool) -> f64 {
    let mask = 1usize << qubit;
    let d = rho.dim();
    let m = rho.matrix_mut();
    for i in 0..d {
        for j in 0..d {
            if (i & mask != 0) != outcome || (j & mask != 0) != outcome {
                m.set(i, j, ZERO);
            }
        }
    }
    m.trace().re
}

pub fn post_select_density(
    rho: &DensityMatrix,
    qubit: usize,
    outcome: bool,
) -> Result<(DensityMatrix, f64)> {
    let q = rho.qubits();
    if qubit >= q {
        return Err(Error::BadIndex {
            index: qubit,
            qubits: q,
        });
    }
    let mut out = rho.clone();
    let p = project_density(&mut out, qubit, outcome);
    if p.max(0.0).sqrt() < ZERO_NORM {
        return Err(Error::ZeroProbability {
            norm: p.max(0.0).sqrt(),
        });
    }
    let scaled = out.matrix().scaled(C64::new(1.0 / p, 0.0));
    Ok((DensityMatrix::from_raw(scaled), p))
}

/// Shared interpreter for both backends.
trait Backend {
    fn apply(&mut self, g: &ResolvedGate);
    fn noise(&mut self, qubits: &[usize], p: f64);
    fn prob_one(&self, qubit: usize) -> f64;
    fn collapse(&mut self, qubit: usize, outcome: bool, p: f64);
    fn populations(&self) -> Vec<f64>;
}

impl Backend for ComplexVec {
    fn apply(&mut self, g: &ResolvedGate) {
        apply_resolved(self.amplitudes_mut(), g);
    }

    fn noise(&mut self, _qubits: &[usize], _p: f64) {
        unreachable!("pure backend never receives noise")
    }

    fn prob_one(&self, qubit: usize) -> f64 {
        let mask = 1usize << qubit;
        self.amplitudes()
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    fn collapse(&mut self, qubit: usize, outcome: bool, p: f64) {
        project(self.amplitudes_mut(), qubit, outcome);
        let s = C64::new(1.0 / p.sqrt(), 0.0);
        self.amplitudes_mut().iter_mut().for_each(|a| *a *= s);
    }

    fn populations(&self) -> Vec<f64> {
        self.probabilities()
    }
}

impl Backend for DensityMatrix {
    fn apply(&mut self, g: &ResolvedGate) {
        apply_resolved_density(self, g);
    }

    fn noise(&mut self, qubits: &[usize], p: f64) {
        depolarize_in_place(self, qubits, p);
    }

    fn prob_one(&self, qubit: usize) -> f64 {
        self.probability(qubit, true)
    }

    fn collapse(&mut self, qubit: usize, outcome: bool, p: f64) {
        project_density(self, qubit, outcome);
        *self.matrix_mut() = self.matrix().scaled(C64::new(1.0 / p, 0.0));
    }

    fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix().get(i, i).re.max(0.0)).collect()
    }
}

fn interpret<B: Backend>(
    ops: &[Op],
    state: &mut B,
    bits: &mut [bool],
    noise: Option<&NoiseSpec>,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let mut probability = 1.0;
    let act = |state: &mut B, g: &Gate| {
        state.apply(&g.resolve());
        if let Some(n) = noise.filter(|n| n.hits(g) && n.p_depolarizing > 0.0) {
            state.noise(&g.qubits(), n.p_depolarizing);
        }
    };
    for op in ops {
        match op {
            Op::Gate(g) => act(state, g),
            Op::Conditional {
                gate,
                slot,
                outcome,
            } => {
                if bits[*slot] == *outcome {
                    act(state, gate);
                }
            }
            Op::Measure { qubit, slot } => {
                let p1 = state.prob_one(*qubit).clamp(0.0, 1.0);
                let outcome = rng.gen::<f64>() < p1;
                let p = if outcome { p1 } else { 1.0 - p1 };
                state.collapse(*qubit, outcome, p);
                bits[*slot] = outcome;
                probability *= p;
            }
        }
    }
    probability
}

/// Executes `c` on `input`.
///
/// Without noise the statevector backend is used; with a noise spec the
/// run happens on density matrices. Measurements draw from stream 0 of
/// the generator keyed by `seed`.
pub fn run(
    c: &Circuit,
    input: &ComplexVec,
    noise: Option<&NoiseSpec>,
    seed: u64,
) -> Result<RunOutcome> {
    c.validate()?;
    if input.dim() != 1usize << c.qubits() {
        return Err(Error::DimensionMismatch {
            expected: 1 << c.qubits(),
            actual: input.dim(),
        });
    }
    if noise.is_some() {
        return run_density(c, &DensityMatrix::from_pure(input)?, noise, seed);
    }
    let mut state = input.clone();
    let mut bits = vec![false; c.num_slots()];
    let probability = interpret(c.ops(), &mut state, &mut bits, None, &mut shot_rng(seed, 0));
    Ok(RunOutcome {
        state: RunState::Pure(state),
        classical_bits: bits,
        probability,
    })
}

/// Density-matrix execution of `c` on `rho`.
pub fn run_density(
    c: &Circuit,
    rho: &DensityMatrix,
    noise: Option<&NoiseSpec>,
    seed: u64,
) -> Result<RunOutcome> {
    c.validate()?;
    if rho.qubits() != c.qubits() {
        return Err(Error::DimensionMismatch {
            expected: 1 << c.qubits(),
            actual: rho.dim(),
        });
    }
    let mut state = rho.clone();
    let mut bits = vec![false; c.num_slots()];
    let probability = interpret(
        c.ops(),
        &mut state,
        &mut bits,
        noise,
        &mut shot_rng(seed, 0),
    );
    Ok(RunOutcome {
        state: RunState::Mixed(state),
        classical_bits: bits,
        probability,
    })
}

/// Counts of classical records; keys list slot 0 first, e.g. `"01"`.
pub type Histogram = BTreeMap<String, u64>;

fn record_key(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Exact joint distribution of the classical record, keyed as in
/// [`Histogram`]. Mid-circuit measurements split the state into weighted
/// branches; the trailing block of measurements is read off each branch's
/// final probabilities.
pub fn record_distribution(c: &Circuit, input: &ComplexVec) -> Result<Vec<(String, f64)>> {
    record_distribution_noisy(c, &Circuit::new(c.qubits()), input, None)
}

/// [`record_distribution`] under optional depolarizing noise, followed by
/// a noise-free `readout` circuit (basis rotations and measurements). With
/// noise the branches are density matrices.
pub fn record_distribution_noisy(
    c: &Circuit,
    readout: &Circuit,
    input: &ComplexVec,
    noise: Option<&NoiseSpec>,
) -> Result<Vec<(String, f64)>> {
    let mut full = c.clone();
    full.append(readout)?;
    full.validate()?;
    if input.dim() != 1usize << full.qubits() {
        return Err(Error::DimensionMismatch {
            expected: 1 << full.qubits(),
            actual: input.dim(),
        });
    }
    let noisy = c.len();
    match noise.filter(|n| n.p_depolarizing > 0.0) {
        None => Ok(branch_distribution(&full, input.clone(), None, noisy)),
        Some(n) => Ok(branch_distribution(&full, DensityMatrix::from_pure(input)?, Some(n), noisy)),
    }
}

/// Enumerates measurement branches; noise acts on the first `noisy` ops.
fn branch_distribution<B: Backend + Clone>(
    c: &Circuit,
    init: B,
    noise: Option<&NoiseSpec>,
    noisy: usize,
) -> Vec<(String, f64)> {
    let ops = c.ops();
    let tail = ops
        .iter()
        .rposition(|op| !matches!(op, Op::Measure { .. }))
        .map_or(0, |i| i + 1);
    let act = |state: &mut B, g: &Gate, index: usize| {
        state.apply(&g.resolve());
        if let Some(n) = noise.filter(|n| index < noisy && n.hits(g)) {
            state.noise(&g.qubits(), n.p_depolarizing);
        }
    };
    let mut branches = vec![(init, vec![false; c.num_slots()], 1.0)];
    for (index, op) in ops[..tail].iter().enumerate() {
        match op {
            Op::Gate(g) => branches.iter_mut().for_each(|(s, _, _)| act(s, g, index)),
            Op::Conditional {
                gate,
                slot,
                outcome,
            } => branches
                .iter_mut()
                .filter(|(_, bits, _)| bits[*slot] == *outcome)
                .for_each(|(s, _, _)| act(s, gate, index)),
            Op::Measure { qubit, slot } => {
                let mut next = Vec::with_capacity(branches.len() * 2);
                for (state, bits, w) in branches {
                    let p1 = state.prob_one(*qubit).clamp(0.0, 1.0);
                    for (outcome, p) in [(false, 1.0 - p1), (true, p1)] {
                        if p.sqrt() < ZERO_NORM {
                            continue;
                        }
                        let mut s = state.clone();
                        s.collapse(*qubit, outcome, p);
                        let mut b = bits.clone();
                        b[*slot] = outcome;
                        next.push((s, b, w * p));
                    }
                }
                branches = next;
            }
        }
    }
    let measures: Vec<(usize, usize)> = ops[tail..]
        .iter()
        .filter_map(|op| match op {
            Op::Measure { qubit, slot } => Some((*qubit, *slot)),
            _ => None,
        })
        .collect();
    let mut dist: BTreeMap<String, f64> = BTreeMap::new();
    for (state, bits, w) in branches {
        for (idx, p) in state.populations().into_iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            let mut b = bits.clone();
            for &(q, s) in &measures {
                b[s] = idx >> q & 1 == 1;
            }
            *dist.entry(record_key(&b)).or_insert(0.0) += w * p;
        }
    }
    dist.into_iter().collect()
}

/// Repeats `c` `shots` times, shot `i` drawing one uniform variate from
/// stream `i` of `seed` against [`record_distribution`].
pub fn sample_shots(c: &Circuit, input: &ComplexVec, shots: u64, seed: u64) -> Result<Histogram> {
    sample_shots_noisy(c, &Circuit::new(c.qubits()), input, None, shots, seed)
}

/// [`sample_shots`] against [`record_distribution_noisy`].
pub fn sample_shots_noisy(
    c: &Circuit,
    readout: &Circuit,
    input: &ComplexVec,
    noise: Option<&NoiseSpec>,
    shots: u64,
    seed: u64,
) -> Result<Histogram> {
    if shots == 0 {
        return Err(Error::BadFlag("shots must be at least 1".into()));
    }
    let dist = record_distribution_noisy(c, readout, input, noise)?;
    let mut cdf = Vec::with_capacity(dist.len());
    let mut acc = 0.0;
    for (_, p) in &dist {
        acc += p;
        cdf.push(acc);
    }
    Ok((0..shots)
        .into_par_iter()
        .fold(
            || vec![0u64; dist.len()],
            |mut counts, i| {
                let u = shot_rng(seed, i).gen::<f64>() * acc;
                let k = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
                counts[k] += 1;
                counts
            },
        )
        .reduce(
            || vec![0u64; dist.len()],
            |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect(),
        )
        .into_iter()
        .zip(dist)
        .filter(|(n, _)| *n > 0)
        .map(|(n, (key, _))| (key, n))
        .collect())
}

/// Embedded full-register unitary of a single gate.
pub fn embed(g: &Gate, qubits: usize) -> Result<ComplexMatrix> {
    let mut c = Circuit::new(qubits);
    c.gate(g.clone());
    c.unitary()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn plus() -> ComplexVec {
        ComplexVec::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2])
    }

    #[test]
    fn apply_gate_examples() {
        let out = apply_gate(&ComplexVec::zero_state(1), &Gate::H(0)).unwrap();
        assert!(out.max_abs_diff(&plus()) < 1e-15);

        let out = apply_gate(
            &ComplexVec::zero_state(1),
            &Gate::HTheta {
                target: 0,
                theta: PI / 8.0,
            },
        )
        .unwrap();
        assert!(out.max_abs_diff(&plus()) < 1e-15);

        // control qubit 1 in |1⟩, target qubit 0 in |0⟩: |10⟩ → |11⟩
        let out = apply_gate(&ComplexVec::basis(4, 0b10), &Gate::cx(1, 0)).unwrap();
        assert_eq!(out, ComplexVec::basis(4, 0b11));
    }

    #[test]
    fn apply_gate_errors() {
        let s = ComplexVec::zero_state(2);
        assert!(matches!(
            apply_gate(&s, &Gate::X(2)),
            Err(Error::BadIndex { .. })
        ));
        let not_unitary = Gate::Unitary {
            matrix: ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 2.0]]).unwrap(),
            targets: vec![0],
        };
        assert!(matches!(
            apply_gate(&s, &not_unitary),
            Err(Error::NonUnitary { .. })
        ));
    }

    #[test]
    fn run_examples() {
        let input = plus();
        let empty = Circuit::new(1);
        let out = run(&empty, &input, None, 0).unwrap();
        assert_eq!(out.state, RunState::Pure(input));

        let mut c = Circuit::new(1);
        c.x(0);
        let out = run(&c, &ComplexVec::zero_state(1), None, 0).unwrap();
        assert_eq!(out.state, RunState::Pure(ComplexVec::basis(2, 1)));
        assert_eq!(out.probability, 1.0);
    }

    #[test]
    fn run_rejects_wrong_input_dimension() {
        let c = Circuit::new(2);
        assert!(matches!(
            run(&c, &ComplexVec::zero_state(1), None, 0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn post_select_examples() {
        let (s, p) = post_select(&plus(), 0, true).unwrap();
        assert_eq!(s, ComplexVec::basis(2, 1));
        assert!((p - 0.5).abs() < 1e-15);

        assert!(matches!(
            post_select(&ComplexVec::zero_state(1), 0, true),
            Err(Error::ZeroProbability { .. })
        ));
    }

    #[test]
    fn depolarize_examples() {
        let rho = DensityMatrix::from_pure(&plus()).unwrap();
        assert_eq!(depolarize(&rho, &[0], 0.0).unwrap(), rho);

        let zero = DensityMatrix::from_pure(&ComplexVec::zero_state(1)).unwrap();
        let mixed = depolarize(&zero, &[0], 1.0).unwrap();
        assert!(
            mixed
                .matrix()
                .max_abs_diff(DensityMatrix::maximally_mixed(1).matrix())
                < 1e-15
        );

        let noisy = depolarize(&rho, &[0], 0.1).unwrap();
        let f = crate::qstate::fidelity(&plus(), &noisy).unwrap();
        assert!((f - 0.95).abs() < 1e-12);
        assert!((noisy.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn depolarize_subset_keeps_rest_of_register() {
        // Bell pair, depolarize qubit 1 fully: result is I/2 ⊗ tr_1(ρ) = I/4
        let bell = ComplexVec::from_real(&[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]);
        let rho = DensityMatrix::from_pure(&bell).unwrap();
        let out = depolarize(&rho, &[1], 1.0).unwrap();
        assert!(
            out.matrix()
                .max_abs_diff(DensityMatrix::maximally_mixed(2).matrix())
                < 1e-15
        );
        // |00⟩ with qubit 1 fully depolarized is I/2 ⊗ |0⟩⟨0|
        let rho = DensityMatrix::from_pure(&ComplexVec::zero_state(2)).unwrap();
        let out = depolarize(&rho, &[1], 1.0).unwrap();
        assert!((out.matrix().get(0, 0).re - 0.5).abs() < 1e-15);
        assert!((out.matrix().get(2, 2).re - 0.5).abs() < 1e-15);
        assert!(out.matrix().get(1, 1).norm() < 1e-15);
    }

    #[test]
    fn measurement_collapses_deterministically_per_seed() {
        let mut c = Circuit::new(1);
        c.h(0).measure(0, 0);
        let a = run(&c, &ComplexVec::zero_state(1), None, 11).unwrap();
        let b = run(&c, &ComplexVec::zero_state(1), None, 11).unwrap();
        assert_eq!(a, b);
        assert!((a.probability - 0.5).abs() < 1e-15);
        let expect = ComplexVec::basis(2, usize::from(a.classical_bits[0]));
        assert_eq!(a.state, RunState::Pure(expect));
    }

    #[test]
    fn sample_shots_of_basis_state() {
        let mut c = Circuit::new(1);
        c.x(0).measure(0, 0);
        let h = sample_shots(&c, &ComplexVec::zero_state(1), 1000, 3).unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(h["1"], 1000);
    }

    #[test]
    fn sample_shots_plus_state_binomial() {
        let mut c = Circuit::new(1);
        c.h(0).measure(0, 0);
        let shots = 100_000u64;
        let h = sample_shots(&c, &ComplexVec::zero_state(1), shots, 0).unwrap();
        let freq = h.get("1").copied().unwrap_or(0) as f64 / shots as f64;
        let sigma = (0.25 / shots as f64).sqrt();
        assert!((freq - 0.5).abs() < 3.0 * sigma, "freq {freq}");
        let again = sample_shots(&c, &ComplexVec::zero_state(1), shots, 0).unwrap();
        assert_eq!(h, again);
    }

    #[test]
    fn sample_shots_with_feedforward() {
        // measure |+⟩, flip qubit 1 when the outcome is 1: records always agree
        let mut c = Circuit::new(2);
        c.h(0)
            .measure(0, 0)
            .conditional(Gate::X(1), 0, true)
            .measure(1, 1);
        let h = sample_shots(&c, &ComplexVec::zero_state(2), 2000, 9).unwrap();
        assert_eq!(h.keys().cloned().collect::<Vec<_>>(), vec!["00", "11"]);
        assert_eq!(h.values().sum::<u64>(), 2000);
    }

    #[test]
    fn zero_shots_rejected() {
        let c = Circuit::new(1);
        assert!(sample_shots(&c, &ComplexVec::zero_state(1), 0, 0).is_err());
    }

    #[test]
    fn noisy_run_uses_density_backend() {
        let mut c = Circuit::new(1);
        c.h(0);
        let noise = NoiseSpec::all(0.1).unwrap();
        let out = run(&c, &ComplexVec::zero_state(1), Some(&noise), 0).unwrap();
        let rho = match out.state {
            RunState::Mixed(r) => r,
            RunState::Pure(_) => panic!("expected density matrix"),
        };
        assert!((crate::qstate::fidelity(&plus(), &rho).unwrap() - 0.95).abs() < 1e-12);
    }

    #[test]
    fn noise_spec_rejects_out_of_range() {
        assert!(NoiseSpec::all(1.5).is_err());
        assert!(NoiseSpec::all(-0.1).is_err());
    }

    #[test]
    fn embed_matches_kron_for_single_qubit() {
        let u = embed(&Gate::X(1), 2).unwrap();
        let x = Gate::X(0).resolve().matrix;
        let oracle = x.kron(&ComplexMatrix::identity(2));
        assert!(u.max_abs_diff(&oracle) < 1e-15);
    }
}
