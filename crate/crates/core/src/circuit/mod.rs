//! Gate set, circuit representation and the two execution backends.

mod exec;
mod gate;
mod qft;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use exec::{
    apply_gate, depolarize, embed, post_select, post_select_density, record_distribution, record_distribution_noisy, run,
    run_density, sample_shots, sample_shots_noisy, shot_rng, Histogram, NoiseSpec, NoiseTarget, RunOutcome, RunState,
};
pub use gate::{h_theta_matrix, Gate, ResolvedGate};
pub use qft::{inverse_qft, qft};

use crate::error::{Error, Result};
use crate::qstate::{ComplexMatrix, ComplexVec};

#[derive(Clone, Debug, PartialEq)]
pub enum Op {
    Gate(Gate),
    /// Projective Z measurement of `qubit` into classical `slot`.
    Measure {
        qubit: usize,
        slot: usize,
    },
    /// Apply `gate` only if classical `slot` holds `outcome`.
    Conditional {
        gate: Gate,
        slot: usize,
        outcome: bool,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    qubits: usize,
    ops: Vec<Op>,
}

impl Circuit {
    pub fn new(qubits: usize) -> Self {
        Self {
            qubits,
            ops: Vec::new(),
        }
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn push(&mut self, op: Op) -> &mut Self {
        self.ops.push(op);
        self
    }

    pub fn gate(&mut self, g: Gate) -> &mut Self {
        self.push(Op::Gate(g))
    }

    pub fn measure(&mut self, qubit: usize, slot: usize) -> &mut Self {
        self.push(Op::Measure { qubit, slot })
    }

    pub fn conditional(&mut self, gate: Gate, slot: usize, outcome: bool) -> &mut Self {
        self.push(Op::Conditional {
            gate,
            slot,
            outcome,
        })
    }

    pub fn h(&mut self, q: usize) -> &mut Self {
        self.gate(Gate::H(q))
    }

    pub fn x(&mut self, q: usize) -> &mut Self {
        self.gate(Gate::X(q))
    }

    pub fn cx(&mut self, control: usize, target: usize) -> &mut Self {
        self.gate(Gate::cx(control, target))
    }

    /// Appends `other`, whose qubit `i` is placed on `mapping[i]`.
    /// Classical slots of `other` are shifted past the ones already in use.
    pub fn append_mapped(&mut self, other: &Circuit, mapping: &[usize]) -> Result<&mut Self> {
        if mapping.len() != other.qubits {
            return Err(Error::DimensionMismatch {
                expected: other.qubits,
                actual: mapping.len(),
            });
        }
        if let Some(&bad) = mapping.iter().find(|&&q| q >= self.qubits) {
            return Err(Error::BadIndex {
                index: bad,
                qubits: self.qubits,
            });
        }
        let offset = self.num_slots();
        let map = |q: usize| mapping[q];
        for op in &other.ops {
            self.ops.push(match op {
                Op::Gate(g) => Op::Gate(g.remapped(&map)),
                Op::Measure { qubit, slot } => Op::Measure {
                    qubit: map(*qubit),
                    slot: slot + offset,
                },
                Op::Conditional {
                    gate,
                    slot,
                    outcome,
                } => Op::Conditional {
                    gate: gate.remapped(&map),
                    slot: slot + offset,
                    outcome: *outcome,
                },
            });
        }
        Ok(self)
    }

    /// Appends `other` on the same qubits.
    pub fn append(&mut self, other: &Circuit) -> Result<&mut Self> {
        if other.qubits > self.qubits {
            return Err(Error::DimensionMismatch {
                expected: self.qubits,
                actual: other.qubits,
            });
        }
        let mapping: Vec<usize> = (0..other.qubits).collect();
        self.append_mapped(other, &mapping)
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &Circuit) -> Result<Circuit> {
        let mut c = self.clone();
        c.append(other)?;
        Ok(c)
    }

    /// Number of classical slots referenced (max slot + 1).
    pub fn num_slots(&self) -> usize {
        self.ops
            .iter()
            .filter_map(|op| match op {
                Op::Measure { slot, .. } | Op::Conditional { slot, .. } => Some(slot + 1),
                Op::Gate(_) => None,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn has_measurements(&self) -> bool {
        self.ops.iter().any(|op| !matches!(op, Op::Gate(_)))
    }

    /// Qubit indices in range, gates well formed, classical slots written before read.
    pub fn validate(&self) -> Result<()> {
        let mut written = vec![false; self.num_slots()];
        for op in &self.ops {
            match op {
                Op::Gate(g) => g.validate(self.qubits)?,
                Op::Measure { qubit, slot } => {
                    if *qubit >= self.qubits {
                        return Err(Error::BadIndex {
                            index: *qubit,
                            qubits: self.qubits,
                        });
                    }
                    written[*slot] = true;
                }
                Op::Conditional { gate, slot, .. } => {
                    gate.validate(self.qubits)?;
                    if !written[*slot] {
                        return Err(Error::InvalidCircuit(format!(
                            "classical slot {slot} read before it is written"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Reversed circuit of inverted gates. Only defined without measurements.
    pub fn inverse(&self) -> Result<Circuit> {
        let mut inv = Circuit::new(self.qubits);
        for op in self.ops.iter().rev() {
            match op {
                Op::Gate(g) => {
                    inv.gate(g.inverse());
                }
                _ => {
                    return Err(Error::InvalidCircuit(
                        "cannot invert a circuit containing measurements".into(),
                    ))
                }
            }
        }
        Ok(inv)
    }

    /// Gate counts by class (`h`, `cx`, `ch_theta`, `c2x`, ...).
    pub fn census(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for op in &self.ops {
            match op {
                Op::Gate(g) | Op::Conditional { gate: g, .. } => {
                    *counts.entry(g.class()).or_insert(0) += 1;
                }
                Op::Measure { .. } => *counts.entry("measure".to_string()).or_insert(0) += 1,
            }
        }
        counts
    }

    pub fn entangling_count(&self) -> usize {
        self.ops
            .iter()
            .filter(|op| matches!(op, Op::Gate(g) if g.is_entangling()))
            .count()
    }

    /// Replaces every measurement plus classically conditioned gate with a
    /// coherently controlled gate. The measured qubit must not be acted on
    /// after its measurement other than as a control.
    pub fn defer_measurements(&self) -> Result<Circuit> {
        self.validate()?;
        let mut slot_qubit: BTreeMap<usize, usize> = BTreeMap::new();
        let mut out = Circuit::new(self.qubits);
        for op in &self.ops {
            match op {
                Op::Measure { qubit, slot } => {
                    slot_qubit.insert(*slot, *qubit);
                }
                Op::Gate(g) => {
                    if let Some(q) = g
                        .qubits()
                        .iter()
                        .find(|q| slot_qubit.values().any(|m| m == *q))
                    {
                        return Err(Error::InvalidCircuit(format!(
                            "qubit {q} is reused after measurement"
                        )));
                    }
                    out.gate(g.clone());
                }
                Op::Conditional {
                    gate,
                    slot,
                    outcome,
                } => {
                    let q = slot_qubit[slot];
                    if gate.targets().contains(&q) {
                        return Err(Error::InvalidCircuit(format!(
                            "conditional gate acts on measured qubit {q}"
                        )));
                    }
                    if !outcome {
                        out.x(q);
                    }
                    out.gate(Gate::controlled(vec![q], gate.clone()));
                    if !outcome {
                        out.x(q);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Full `2^q × 2^q` unitary, built column by column from basis states.
    pub fn unitary(&self) -> Result<ComplexMatrix> {
        if self.has_measurements() {
            return Err(Error::InvalidCircuit(
                "circuit with measurements has no unitary".into(),
            ));
        }
        self.validate()?;
        let d = 1usize << self.qubits;
        let cols = (0..d)
            .map(|j| {
                let mut v = ComplexVec::basis(d, j);
                for op in &self.ops {
                    if let Op::Gate(g) = op {
                        v = apply_gate(&v, g)?;
                    }
                }
                Ok(v)
            })
            .collect::<Result<Vec<_>>>()?;
        ComplexMatrix::from_columns(&cols)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&CircuitDoc::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Circuit> {
        let doc: CircuitDoc = serde_json::from_str(text)?;
        let c = Circuit::try_from(doc)?;
        c.validate()?;
        Ok(c)
    }
}

/// JSON document shape of a circuit.
#[derive(Serialize, Deserialize)]
struct CircuitDoc {
    qubits: usize,
    ops: Vec<OpRecord>,
}

#[derive(Serialize, Deserialize, Default)]
struct OpRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gate: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    phi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<ComplexMatrix>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    targets: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    controls: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    measure: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    slot: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    condition: Option<Condition>,
}

#[derive(Serialize, Deserialize)]
struct Condition {
    slot: usize,
    outcome: u8,
}

impl OpRecord {
    fn from_gate(g: &Gate) -> Self {
        let (theta, phi, matrix) = match g {
            Gate::HTheta { theta, .. } => (Some(*theta), None, None),
            Gate::Phase { phi, .. } => (None, Some(*phi), None),
            Gate::Unitary { matrix, .. } => (None, None, Some(matrix.clone())),
            Gate::Controlled { inner, .. } => {
                let inner = OpRecord::from_gate(inner);
                (inner.theta, inner.phi, inner.matrix)
            }
            _ => (None, None, None),
        };
        OpRecord {
            gate: Some(g.name().to_string()),
            theta,
            phi,
            matrix,
            targets: g.targets(),
            controls: g.controls().to_vec(),
            ..Default::default()
        }
    }

    fn to_gate(&self) -> Result<Gate> {
        let name = self.gate.as_deref().unwrap_or_default();
        let one_target = || -> Result<usize> {
            match self.targets.as_slice() {
                [t] => Ok(*t),
                _ => Err(Error::Parse(format!(
                    "gate '{name}' needs exactly one target"
                ))),
            }
        };
        let missing = |field: &str| Error::Parse(format!("gate '{name}' missing '{field}'"));
        let base = match name {
            "x" => Gate::X(one_target()?),
            "y" => Gate::Y(one_target()?),
            "z" => Gate::Z(one_target()?),
            "h" => Gate::H(one_target()?),
            "phase" => Gate::Phase {
                target: one_target()?,
                phi: self.phi.ok_or_else(|| missing("phi"))?,
            },
            "h_theta" => Gate::HTheta {
                target: one_target()?,
                theta: self.theta.ok_or_else(|| missing("theta"))?,
            },
            "swap" => match self.targets.as_slice() {
                [a, b] => Gate::Swap(*a, *b),
                _ => return Err(Error::Parse("swap needs two targets".into())),
            },
            "unitary" => Gate::Unitary {
                matrix: self.matrix.clone().ok_or_else(|| missing("matrix"))?,
                targets: self.targets.clone(),
            },
            other => return Err(Error::Parse(format!("unknown gate '{other}'"))),
        };
        Ok(if self.controls.is_empty() {
            base
        } else {
            Gate::controlled(self.controls.clone(), base)
        })
    }
}

impl From<&Circuit> for CircuitDoc {
    fn from(c: &Circuit) -> Self {
        let ops = c
            .ops
            .iter()
            .map(|op| match op {
                Op::Gate(g) => OpRecord::from_gate(g),
                Op::Measure { qubit, slot } => OpRecord {
                    measure: Some(*qubit),
                    slot: Some(*slot),
                    ..Default::default()
                },
                Op::Conditional {
                    gate,
                    slot,
                    outcome,
                } => OpRecord {
                    condition: Some(Condition {
                        slot: *slot,
                        outcome: u8::from(*outcome),
                    }),
                    ..OpRecord::from_gate(gate)
                },
            })
            .collect();
        CircuitDoc {
            qubits: c.qubits,
            ops,
        }
    }
}

impl TryFrom<CircuitDoc> for Circuit {
    type Error = Error;

    fn try_from(doc: CircuitDoc) -> Result<Self> {
        let mut c = Circuit::new(doc.qubits);
        for rec in doc.ops {
            let op = match (rec.measure, &rec.condition) {
                (Some(qubit), _) => Op::Measure {
                    qubit,
                    slot: rec
                        .slot
                        .ok_or_else(|| Error::Parse("measure op missing 'slot'".into()))?,
                },
                (None, Some(cond)) => Op::Conditional {
                    gate: rec.to_gate()?,
                    slot: cond.slot,
                    outcome: match cond.outcome {
                        0 => false,
                        1 => true,
                        o => {
                            return Err(Error::Parse(format!("condition outcome {o} is not a bit")))
                        }
                    },
                },
                (None, None) => Op::Gate(rec.to_gate()?),
            };
            c.push(op);
        }
        Ok(c)
    }
}
