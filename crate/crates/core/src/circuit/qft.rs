use std::f64::consts::PI;

use super::{Circuit, Gate};

/// Quantum Fourier transform on `n` qubits:
/// `|j⟩ → 2^{-n/2} Σ_k e^{2πi jk / 2^n} |k⟩` with qubit 0 least significant.
pub fn qft(n: usize) -> Circuit {
    assert!(n >= 1, "qft needs at least one qubit");
    let mut c = Circuit::new(n);
    for target in (0..n).rev() {
        c.h(target);
        for control in (0..target).rev() {
            let phi = PI / (1u64 << (target - control)) as f64;
            c.gate(Gate::controlled(vec![control], Gate::Phase { target, phi }));
        }
    }
    for q in 0..n / 2 {
        c.gate(Gate::Swap(q, n - 1 - q));
    }
    c
}

pub fn inverse_qft(n: usize) -> Circuit {
    qft(n).inverse().expect("qft has no measurements")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{ComplexMatrix, ComplexVec, C64};

    /// DFT matrix straight from the definition.
    fn dft(n: usize) -> ComplexMatrix {
        let d = 1usize << n;
        let mut m = ComplexMatrix::zeros(d, d);
        let norm = 1.0 / (d as f64).sqrt();
        for j in 0..d {
            for k in 0..d {
                let angle = 2.0 * PI * (j * k) as f64 / d as f64;
                m.set(k, j, C64::from_polar(norm, angle));
            }
        }
        m
    }

    #[test]
    fn qft1_is_hadamard() {
        let u = qft(1).unitary().unwrap();
        assert!(u.max_abs_diff(&Gate::H(0).resolve().matrix) < 1e-15);
    }

    #[test]
    fn qft2_on_zero_is_uniform() {
        let out = crate::circuit::run(&qft(2), &ComplexVec::zero_state(2), None, 0).unwrap();
        let v = out.state.as_pure().unwrap().clone();
        for a in v.amplitudes() {
            assert!((a - C64::new(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn qft_matches_dft_oracle() {
        for n in 1..=5 {
            let dev = qft(n).unitary().unwrap().max_abs_diff(&dft(n));
            assert!(dev < 1e-12, "n={n} deviation {dev}");
        }
    }

    #[test]
    fn inverse_qft_undoes_qft() {
        for n in 1..=4 {
            let u = qft(n).then(&inverse_qft(n)).unwrap().unitary().unwrap();
            assert!(u.max_abs_diff(&ComplexMatrix::identity(1 << n)) < 1e-10);
        }
    }
}
