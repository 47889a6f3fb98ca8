//! Solves random Hermitian systems whose eigenvalues sit exactly on the
//! register grid and checks the fidelity against direct inversion.
//!
//! cargo run --example random_problems

use std::f64::consts::PI;

use hhl_sim::hhl::{run_hhl, HhlProblem};
use hhl_sim::qstate::{exp_unitary, C64, ComplexMatrix, ComplexVec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_vector(rng: &mut ChaCha8Rng, dim: usize) -> ComplexVec {
    let v: Vec<C64> = (0..dim).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    ComplexVec::new(v).normalized().unwrap()
}

fn main() -> hhl_sim::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let bits = 3;
    for trial in 0..5 {
        let dim = 4;
        // random unitary from a random Hermitian generator
        let h = {
            let g = ComplexMatrix::new(
                dim,
                dim,
                (0..dim * dim).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
            )?;
            g.add(&g.dagger())?
        };
        let u = exp_unitary(&h, 1.0)?;
        let lambdas: Vec<C64> = (0..dim).map(|_| C64::new(rng.gen_range(1..1 << bits) as f64, 0.0)).collect();
        let a = u.matmul(&ComplexMatrix::diagonal(&lambdas))?.matmul(&u.dagger())?;
        let a = a.add(&a.dagger())?.scaled(C64::new(0.5, 0.0));
        let b = random_vector(&mut rng, dim);
        let r = run_hhl(&HhlProblem::new(a, b, bits).with_t0(2.0 * PI))?;
        let ls: Vec<f64> = lambdas.iter().map(|l| l.re).collect();
        println!(
            "trial {trial}: λ = {ls:?}  fidelity {:.12}  success {:.4}  κ {:.2}  exact {}",
            r.fidelity_vs_classical, r.success_probability, r.kappa, r.exact
        );
    }
    Ok(())
}
