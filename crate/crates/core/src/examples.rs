//! The two reference problems: a 5-mode planar system and the quadrotor
//! attitude initial condition. The JSON configs under `configs/` carry the
//! same numbers.

use nalgebra::{DMatrix, DVector};

use crate::system_model::{GaussianBelief, JumpSystem};

pub fn example1_modes() -> Vec<DMatrix<f64>> {
    vec![
        DMatrix::from_row_slice(2, 2, &[1.01, -0.17, 0.32, -0.48]),
        DMatrix::from_row_slice(2, 2, &[0.06, 0.80, 0.01, -0.77]),
        DMatrix::from_row_slice(2, 2, &[0.72, 0.48, 0.0, 0.55]),
        DMatrix::from_row_slice(2, 2, &[-0.33, -0.65, -0.46, 0.69]),
        DMatrix::from_row_slice(2, 2, &[-0.13, 0.12, -1.33, -1.05]),
    ]
}

pub fn example1_system() -> JumpSystem {
    JumpSystem::new(example1_modes()).expect("bundled modes are 2x2")
}

/// `N([5, 5], 2.25 I)`.
pub fn example1_initial() -> GaussianBelief {
    GaussianBelief::new(DVector::from_vec(vec![5.0, 5.0]), DMatrix::identity(2, 2) * 2.25)
        .expect("bundled belief is valid")
}

/// `N([0.5, -1.5, -5, 0.1, 0.2, 0.1], 0.0225 I)` over `[φ, θ, ψ, p, q, r]`.
pub fn example2_initial() -> GaussianBelief {
    GaussianBelief::new(
        DVector::from_vec(vec![0.5, -1.5, -5.0, 0.1, 0.2, 0.1]),
        DMatrix::identity(6, 6) * 0.0225,
    )
    .expect("bundled belief is valid")
}
