mod common;

use common::{random_belief, random_matrix, random_schur};
use jumpsynth::system_model::{build_closed_loop, propagate};
use jumpsynth::{GaussianBelief, PlantWithControllers};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).amax()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn long_trajectories_stay_symmetric_and_psd(seed in any::<u64>(), n in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let modes: Vec<_> = (0..3).map(|_| random_schur(&mut rng, n)).collect();
        let mut b = random_belief(&mut rng, n);
        for _ in 0..1000 {
            let a = &modes[rng.random_range(0..modes.len())];
            b = propagate(&b, a).unwrap();
            prop_assert!(asymmetry(b.sigma()) <= 1e-10);
            let min_eig = SymmetricEigen::new(b.sigma().clone()).eigenvalues.min();
            prop_assert!(min_eig >= -1e-8, "min eigenvalue {}", min_eig);
        }
    }

    #[test]
    fn propagation_is_homogeneous(seed in any::<u64>(), n in 1usize..=5, c in 0.01f64..100.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&mut rng, n);
        let b = random_belief(&mut rng, n);
        let lhs = propagate(&b.scaled(c), &a).unwrap();
        let rhs = propagate(&b, &a).unwrap().scaled(c);
        for (x, y) in lhs.mu().iter().zip(rhs.mu().iter()) {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(c));
        }
        let scale = rhs.sigma().amax().max(c * c);
        prop_assert!((lhs.sigma() - rhs.sigma()).amax() <= 1e-12 * scale);
    }
}

#[test]
fn closed_loop_matches_point_mass_feedback() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let n = rng.random_range(1..=5);
        let p = rng.random_range(1..=3);
        let a = random_matrix(&mut rng, n);
        let b = DMatrix::from_fn(n, p, |_, _| rng.random_range(-1.0..=1.0));
        let k = DMatrix::from_fn(p, n, |_, _| rng.random_range(-1.0..=1.0));
        let sys = build_closed_loop(&PlantWithControllers {
            a: a.clone(),
            b: b.clone(),
            gains: vec![k.clone()],
        })
        .unwrap();

        let x = DVector::from_fn(n, |_, _| rng.random_range(-5.0..=5.0));
        let next = propagate(&GaussianBelief::dirac(x.clone()).unwrap(), &sys.modes()[0]).unwrap();
        let u = &k * &x;
        let expected = &a * &x + &b * u;
        for (got, want) in next.mu().iter().zip(expected.iter()) {
            assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0));
        }
        assert_eq!(next.sigma().amax(), 0.0);
    }
}
