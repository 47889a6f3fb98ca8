//! Solver properties over randomly generated systems.

mod common;

use std::f64::consts::PI;
use std::time::Instant;

use common::*;
use hhl_sim::hhl::{self, classical_solve, run_hhl, validate, HhlProblem};
use hhl_sim::qstate::{ComplexMatrix, ComplexVec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn two_hundred_exact_problems() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    for case in 0..200 {
        let dim = if case % 2 == 0 { 2 } else { 4 };
        let bits = rng.gen_range(2..=3);
        let (p, lambdas) = random_exact_problem(&mut rng, dim, bits);
        let v = validate(&p).unwrap();
        assert!(v.exact, "case {case}");
        let r = run_hhl(&p).unwrap();
        assert!(r.fidelity_vs_classical > 1.0 - 1e-9, "case {case}: {}", r.fidelity_vs_classical);
        assert!(r.register_residual < 1e-10, "case {case}");
        assert!(r.register_reset_ok);

        // success probability from the generating spectrum, C = smallest populated λ
        let weights: Vec<f64> = (0..dim)
            .map(|j| v.spectrum.eigenvector(j).overlap(&p.vector).unwrap())
            .collect();
        let c = v
            .spectrum
            .eigenvalues
            .iter()
            .zip(&weights)
            .filter(|(_, &w)| w > 1e-12)
            .map(|(&l, _)| l.round())
            .fold(f64::INFINITY, f64::min);
        assert!(lambdas.contains(&c));
        assert!((r.c_const - c).abs() < 1e-9);
        let expected: f64 = v
            .spectrum
            .eigenvalues
            .iter()
            .zip(&weights)
            .map(|(&l, &w)| w * c * c / (l * l))
            .sum();
        assert!((r.success_probability - expected).abs() < 1e-9, "case {case}");
    }
    assert!(start.elapsed().as_secs_f64() < 60.0);
}

#[test]
fn changing_c_keeps_the_direction() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..30 {
        let (p, lambdas) = random_exact_problem(&mut rng, 4, 3);
        let lmin = lambdas.iter().cloned().fold(f64::INFINITY, f64::min);
        let a = run_hhl(&p.clone().with_c(lmin)).unwrap();
        let b = run_hhl(&p.clone().with_c(0.3 * lmin)).unwrap();
        assert!((a.x_state.overlap(&b.x_state).unwrap() - 1.0).abs() < 1e-10);
        assert!((b.success_probability - 0.09 * a.success_probability).abs() < 1e-10);
    }
}

#[test]
fn classical_solve_inverts() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let dim = rng.gen_range(2..=4);
        let a = random_hermitian(&mut rng, dim).add(&ComplexMatrix::identity(dim).scaled(c(8.0))).unwrap();
        let b = random_unit_vector(&mut rng, dim);
        let x = classical_solve(&a, &b).unwrap();
        let ax = a.apply(&x).unwrap().normalized().unwrap();
        // A x ∝ b
        assert!((ax.overlap(&b).unwrap() - 1.0).abs() < 1e-10);
        assert!((x.norm() - 1.0).abs() < 1e-12);
    }
}

fn approx_problem(bits: usize, t0: f64) -> HhlProblem {
    let a = ComplexMatrix::from_real_rows(&[&[1.75, 0.25], &[0.25, 1.75]]).unwrap();
    HhlProblem::new(a, ComplexVec::from_real(&[1.0, 0.0]), bits).with_t0(t0)
}

#[test]
fn approximate_spectrum_is_flagged_and_still_runs() {
    let p = approx_problem(2, 2.0 * PI);
    assert!(!validate(&p).unwrap().exact);
    let r = run_hhl(&p).unwrap();
    assert!(!r.exact);
    assert!(r.fidelity_vs_classical > 0.9 && r.fidelity_vs_classical <= 1.0);
}

#[test]
fn approximate_case_refines_with_register_size() {
    // eigenvalue window [0, 4) held fixed: t0 = 2π·T/4
    let fid = |n: usize| {
        let t = (1usize << n) as f64;
        run_hhl(&approx_problem(n, 2.0 * PI * t / 4.0)).unwrap().fidelity_vs_classical
    };
    let (f2, f5) = (fid(2), fid(5));
    assert!(f5 > f2, "n=5 {f5} vs n=2 {f2}");

    // with t0 = 2π the extra bits add range, not resolution
    let fixed: Vec<f64> = (2..=5)
        .map(|n| run_hhl(&approx_problem(n, 2.0 * PI)).unwrap().fidelity_vs_classical)
        .collect();
    for f in &fixed {
        assert!((0.99..=1.0).contains(f));
    }
}

#[test]
fn success_probability_matches_pipeline_on_random_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..50 {
        let (p, _) = random_exact_problem(&mut rng, 2, 2);
        let p = p.with_c(1.0);
        let r = run_hhl(&p).unwrap();
        assert!((hhl::success_probability(&p).unwrap() - r.success_probability).abs() < 1e-9);
    }
}
