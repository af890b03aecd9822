#![allow(dead_code)]

use jumpsynth::analysis::spectral_radius;
use jumpsynth::{GaussianBelief, JumpSystem};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Entries uniform in [-1, 1].
pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..=1.0))
}

/// Random matrix rescaled so its spectral radius lies in [0.3, 0.95].
pub fn random_schur(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let a = random_matrix(rng, n);
    let rho = spectral_radius(&a).unwrap();
    let target = rng.random_range(0.3..0.95);
    if rho < 1e-9 {
        return a * target;
    }
    a * (target / rho)
}

pub fn random_stable_system(rng: &mut ChaCha8Rng, n: usize, m: usize) -> JumpSystem {
    JumpSystem::new((0..m).map(|_| random_schur(rng, n)).collect()).unwrap()
}

pub fn random_belief(rng: &mut ChaCha8Rng, n: usize) -> GaussianBelief {
    let mu = DVector::from_fn(n, |_, _| rng.random_range(-3.0..=3.0));
    let l = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..=1.0));
    GaussianBelief::new(mu, &l * l.transpose()).unwrap()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
