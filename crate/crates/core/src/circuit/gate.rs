use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::qstate::{ComplexMatrix, C64, ONE, ZERO};

/// A gate application on labelled qubits.
///
/// Multi-qubit local matrices (`Unitary`, `Swap`) use `targets[0]` as the
/// least significant local bit, matching the global qubit ordering.
#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    X(usize),
    Y(usize),
    Z(usize),
    H(usize),
    /// `diag(1, e^{iφ})`
    Phase {
        target: usize,
        phi: f64,
    },
    /// `[[cos 2θ, sin 2θ], [sin 2θ, -cos 2θ]]`
    HTheta {
        target: usize,
        theta: f64,
    },
    Swap(usize, usize),
    Controlled {
        controls: Vec<usize>,
        inner: Box<Gate>,
    },
    Unitary {
        matrix: ComplexMatrix,
        targets: Vec<usize>,
    },
}

/// A gate flattened into control qubits, target qubits and a local matrix.
#[derive(Clone, Debug)]
pub struct ResolvedGate {
    pub controls: Vec<usize>,
    pub targets: Vec<usize>,
    pub matrix: ComplexMatrix,
}

fn real2(a: f64, b: f64, c: f64, d: f64) -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[a, b], &[c, d]]).expect("2x2")
}

/// The 2×2 matrix of `HTheta(θ)`.
pub fn h_theta_matrix(theta: f64) -> ComplexMatrix {
    let (s, c) = (2.0 * theta).sin_cos();
    real2(c, s, s, -c)
}

impl Gate {
    /// Controlled gate; nested controls are merged into one list.
    pub fn controlled(controls: Vec<usize>, inner: Gate) -> Gate {
        match inner {
            Gate::Controlled {
                controls: mut more,
                inner,
            } => {
                let mut all = controls;
                all.append(&mut more);
                Gate::Controlled {
                    controls: all,
                    inner,
                }
            }
            inner => Gate::Controlled {
                controls,
                inner: Box::new(inner),
            },
        }
    }

    pub fn cx(control: usize, target: usize) -> Gate {
        Gate::controlled(vec![control], Gate::X(target))
    }

    pub fn cz(control: usize, target: usize) -> Gate {
        Gate::controlled(vec![control], Gate::Z(target))
    }

    pub fn controls(&self) -> &[usize] {
        match self {
            Gate::Controlled { controls, .. } => controls,
            _ => &[],
        }
    }

    pub fn targets(&self) -> Vec<usize> {
        match self {
            Gate::X(t) | Gate::Y(t) | Gate::Z(t) | Gate::H(t) => vec![*t],
            Gate::Phase { target, .. } | Gate::HTheta { target, .. } => vec![*target],
            Gate::Swap(a, b) => vec![*a, *b],
            Gate::Controlled { inner, .. } => inner.targets(),
            Gate::Unitary { targets, .. } => targets.clone(),
        }
    }

    /// Every qubit the gate touches, controls first.
    pub fn qubits(&self) -> Vec<usize> {
        let mut q = self.controls().to_vec();
        q.extend(self.targets());
        q
    }

    pub fn is_entangling(&self) -> bool {
        self.qubits().len() >= 2
    }

    /// Base name, as used in circuit JSON.
    pub fn name(&self) -> &'static str {
        match self {
            Gate::X(_) => "x",
            Gate::Y(_) => "y",
            Gate::Z(_) => "z",
            Gate::H(_) => "h",
            Gate::Phase { .. } => "phase",
            Gate::HTheta { .. } => "h_theta",
            Gate::Swap(..) => "swap",
            Gate::Controlled { inner, .. } => inner.name(),
            Gate::Unitary { .. } => "unitary",
        }
    }

    /// Census class: `cx` for one control, `c3x` for three, plain name otherwise.
    pub fn class(&self) -> String {
        match self.controls().len() {
            0 => self.name().to_string(),
            1 => format!("c{}", self.name()),
            k => format!("c{k}{}", self.name()),
        }
    }

    /// Local matrix of an uncontrolled gate.
    fn base_matrix(&self) -> ComplexMatrix {
        let s = FRAC_1_SQRT_2;
        match self {
            Gate::X(_) => real2(0.0, 1.0, 1.0, 0.0),
            Gate::Y(_) => ComplexMatrix::from_rows(vec![
                vec![ZERO, C64::new(0.0, -1.0)],
                vec![C64::new(0.0, 1.0), ZERO],
            ])
            .expect("2x2"),
            Gate::Z(_) => real2(1.0, 0.0, 0.0, -1.0),
            Gate::H(_) => real2(s, s, s, -s),
            Gate::Phase { phi, .. } => ComplexMatrix::diagonal(&[ONE, C64::from_polar(1.0, *phi)]),
            Gate::HTheta { theta, .. } => h_theta_matrix(*theta),
            Gate::Swap(..) => {
                let mut m = ComplexMatrix::zeros(4, 4);
                for (r, c) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
                    m.set(r, c, ONE);
                }
                m
            }
            Gate::Unitary { matrix, .. } => matrix.clone(),
            Gate::Controlled { inner, .. } => inner.base_matrix(),
        }
    }

    pub fn resolve(&self) -> ResolvedGate {
        ResolvedGate {
            controls: self.controls().to_vec(),
            targets: self.targets(),
            matrix: self.base_matrix(),
        }
    }

    pub fn inverse(&self) -> Gate {
        match self {
            Gate::Phase { target, phi } => Gate::Phase {
                target: *target,
                phi: -phi,
            },
            Gate::Y(_)
            | Gate::X(_)
            | Gate::Z(_)
            | Gate::H(_)
            | Gate::HTheta { .. }
            | Gate::Swap(..) => self.clone(),
            Gate::Controlled { controls, inner } => Gate::Controlled {
                controls: controls.clone(),
                inner: Box::new(inner.inverse()),
            },
            Gate::Unitary { matrix, targets } => Gate::Unitary {
                matrix: matrix.dagger(),
                targets: targets.clone(),
            },
        }
    }

    /// Same gate with every qubit index sent through `map`.
    pub fn remapped(&self, map: &impl Fn(usize) -> usize) -> Gate {
        match self {
            Gate::X(t) => Gate::X(map(*t)),
            Gate::Y(t) => Gate::Y(map(*t)),
            Gate::Z(t) => Gate::Z(map(*t)),
            Gate::H(t) => Gate::H(map(*t)),
            Gate::Phase { target, phi } => Gate::Phase {
                target: map(*target),
                phi: *phi,
            },
            Gate::HTheta { target, theta } => Gate::HTheta {
                target: map(*target),
                theta: *theta,
            },
            Gate::Swap(a, b) => Gate::Swap(map(*a), map(*b)),
            Gate::Controlled { controls, inner } => Gate::Controlled {
                controls: controls.iter().map(|&c| map(c)).collect(),
                inner: Box::new(inner.remapped(map)),
            },
            Gate::Unitary { matrix, targets } => Gate::Unitary {
                matrix: matrix.clone(),
                targets: targets.iter().map(|&t| map(t)).collect(),
            },
        }
    }

    /// Index range, distinctness and (for raw unitaries) shape and unitarity.
    pub fn validate(&self, qubits: usize) -> Result<()> {
        let all = self.qubits();
        if let Some(&bad) = all.iter().find(|&&q| q >= qubits) {
            return Err(Error::BadIndex { index: bad, qubits });
        }
        for (i, a) in all.iter().enumerate() {
            if all[i + 1..].contains(a) {
                return Err(Error::InvalidCircuit(format!(
                    "qubit {a} used twice in one {} gate",
                    self.class()
                )));
            }
        }
        if let Gate::Controlled { inner, .. } = self {
            if matches!(**inner, Gate::Controlled { .. }) {
                return Err(Error::InvalidCircuit("nested controlled gate".into()));
            }
            inner.validate(qubits)?;
        }
        if let Gate::Unitary { matrix, targets } = self {
            let d = 1usize << targets.len();
            if targets.is_empty() || !matrix.is_square() || matrix.rows() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: matrix.rows(),
                });
            }
            let deviation = matrix.unitary_deviation();
            if deviation > 1e-10 {
                return Err(Error::NonUnitary { deviation });
            }
        }
        Ok(())
    }
}
