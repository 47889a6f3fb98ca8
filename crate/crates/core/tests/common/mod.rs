//! Helpers shared by the integration tests: random problem generators and
//! a dense-matrix reference simulator that does not use the crate's gate
//! engine.
#![allow(dead_code)]

use hhl_sim::hhl::HhlProblem;
use hhl_sim::qstate::{ComplexMatrix, ComplexVec, C64};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Dense = Vec<Vec<C64>>;

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(d: usize) -> Dense {
    (0..d)
        .map(|i| (0..d).map(|j| if i == j { c(1.0) } else { c(0.0) }).collect())
        .collect()
}

pub fn kron(a: &Dense, b: &Dense) -> Dense {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0); ra * rb]; ra * rb];
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn mul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let mut out = vec![vec![c(0.0); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] == c(0.0) {
                continue;
            }
            for j in 0..n {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn add(a: &Dense, b: &Dense) -> Dense {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x + y).collect())
        .collect()
}

pub fn apply(m: &Dense, v: &[C64]) -> Vec<C64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// `u` on qubit `q` of `n` (qubit 0 least significant, so it is the
/// rightmost Kronecker factor).
pub fn on_qubit(u: &Dense, q: usize, n: usize) -> Dense {
    let mut m = vec![vec![c(1.0)]];
    for k in (0..n).rev() {
        m = kron(&m, if k == q { u } else { &ID2 });
    }
    m
}

/// `|0⟩⟨0|_ctrl ⊗ I + |1⟩⟨1|_ctrl ⊗ target_op` where `target_op` already
/// acts on the full register and commutes with the control projector.
pub fn controlled(ctrl: usize, target_op: &Dense, n: usize) -> Dense {
    let p0 = on_qubit(&vec![vec![c(1.0), c(0.0)], vec![c(0.0), c(0.0)]], ctrl, n);
    let p1 = on_qubit(&vec![vec![c(0.0), c(0.0)], vec![c(0.0), c(1.0)]], ctrl, n);
    add(&p0, &mul(&p1, target_op))
}

static ID2: std::sync::LazyLock<Dense> = std::sync::LazyLock::new(|| identity(2));

pub fn hadamard() -> Dense {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    vec![vec![c(s), c(s)], vec![c(s), c(-s)]]
}

pub fn pauli_x() -> Dense {
    vec![vec![c(0.0), c(1.0)], vec![c(1.0), c(0.0)]]
}

pub fn pauli_z() -> Dense {
    vec![vec![c(1.0), c(0.0)], vec![c(0.0), c(-1.0)]]
}

/// `[[cos 2θ, sin 2θ], [sin 2θ, −cos 2θ]]`
pub fn h_theta(theta: f64) -> Dense {
    let (s, co) = (2.0 * theta).sin_cos();
    vec![vec![c(co), c(s)], vec![c(s), c(-co)]]
}

pub fn to_dense(m: &ComplexMatrix) -> Dense {
    (0..m.rows()).map(|r| m.row(r).to_vec()).collect()
}

pub fn max_diff(a: &Dense, b: &Dense) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn random_complex(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_unit_vector(rng: &mut ChaCha8Rng, d: usize) -> ComplexVec {
    loop {
        let v = ComplexVec::new((0..d).map(|_| random_complex(rng)).collect());
        if v.norm() > 0.1 {
            return v.normalized().unwrap();
        }
    }
}

/// Orthonormal columns by Gram–Schmidt on random vectors.
pub fn random_unitary(rng: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
    let mut cols: Vec<ComplexVec> = Vec::new();
    while cols.len() < d {
        let mut v = random_unit_vector(rng, d);
        for u in &cols {
            let proj = u.inner(&v).unwrap();
            let amps: Vec<C64> = v
                .amplitudes()
                .iter()
                .zip(u.amplitudes())
                .map(|(a, b)| a - proj * b)
                .collect();
            v = ComplexVec::new(amps);
        }
        if v.norm() > 1e-3 {
            cols.push(v.normalized().unwrap());
        }
    }
    ComplexMatrix::from_columns(&cols).unwrap()
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        m.set(i, i, c(rng.gen_range(-3.0..3.0)));
        for j in i + 1..d {
            let z = random_complex(rng);
            m.set(i, j, z);
            m.set(j, i, z.conj());
        }
    }
    m
}

/// `V diag(λ) V†` with integer eigenvalues in `[1, 2^n − 1]`.
pub fn random_exact_problem(rng: &mut ChaCha8Rng, dim: usize, register_bits: usize) -> (HhlProblem, Vec<f64>) {
    let top = (1usize << register_bits) - 1;
    let lambdas: Vec<f64> = (0..dim).map(|_| rng.gen_range(1..=top) as f64).collect();
    let v = random_unitary(rng, dim);
    let d = ComplexMatrix::diagonal(&lambdas.iter().map(|&l| c(l)).collect::<Vec<_>>());
    let mut a = v.matmul(&d).unwrap().matmul(&v.dagger()).unwrap();
    // exact hermiticity
    for i in 0..dim {
        for j in i..dim {
            let z = (a.get(i, j) + a.get(j, i).conj()) * 0.5;
            a.set(i, j, z);
            a.set(j, i, z.conj());
        }
    }
    let b = random_unit_vector(rng, dim);
    (HhlProblem::new(a, b, register_bits), lambdas)
}
