//! Jump linear systems `x(k+1) = A_σ(k) x(k)` and Gaussian belief propagation.
//!
//! Modes are stored 0-based. Anything user facing (configs, CSV, JSON, error
//! messages) presents them 1-based.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::synthesis::SwitchingSchedule;

const SYMMETRY_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

/// An ordered family of `n x n` mode matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpSystem {
    modes: Vec<DMatrix<f64>>,
    n: usize,
}

impl JumpSystem {
    pub fn new(modes: Vec<DMatrix<f64>>) -> Result<Self> {
        let first = modes
            .first()
            .ok_or_else(|| Error::Config("a jump system needs at least one mode".into()))?;
        let n = first.nrows();
        if n == 0 {
            return Err(Error::Config("state dimension must be positive".into()));
        }
        for (i, a) in modes.iter().enumerate() {
            if a.shape() != (n, n) {
                return Err(Error::dimension(format!("mode {}", i + 1), (n, n), a.shape()));
            }
        }
        Ok(Self { modes, n })
    }

    /// State dimension.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of modes.
    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    pub fn modes(&self) -> &[DMatrix<f64>] {
        &self.modes
    }

    /// Mode matrix by 0-based index.
    pub fn mode(&self, index: usize) -> Result<&DMatrix<f64>> {
        self.modes.get(index).ok_or_else(|| {
            Error::Input(format!(
                "mode {} does not exist (system has {} modes)",
                index + 1,
                self.modes.len()
            ))
        })
    }
}

/// A plant `x+ = A x + B u` with a bank of state-feedback gains `u = K_i x`.
#[derive(Debug, Clone)]
pub struct PlantWithControllers {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub gains: Vec<DMatrix<f64>>,
}

impl PlantWithControllers {
    fn validate(&self) -> Result<(usize, usize)> {
        let n = self.a.nrows();
        if self.a.ncols() != n {
            return Err(Error::dimension("plant matrix A", (n, n), self.a.shape()));
        }
        if self.b.nrows() != n {
            return Err(Error::dimension("input matrix B", (n, self.b.ncols()), self.b.shape()));
        }
        let p = self.b.ncols();
        if self.gains.is_empty() {
            return Err(Error::Config("at least one feedback gain is required".into()));
        }
        for (i, k) in self.gains.iter().enumerate() {
            if k.shape() != (p, n) {
                return Err(Error::dimension(format!("gain K{}", i + 1), (p, n), k.shape()));
            }
        }
        Ok((n, p))
    }
}

/// Closes the loop for every gain: mode `i` is `A + B K_i`.
pub fn build_closed_loop(plant: &PlantWithControllers) -> Result<JumpSystem> {
    plant.validate()?;
    let modes = plant.gains.iter().map(|k| &plant.a + &plant.b * k).collect();
    JumpSystem::new(modes)
}

/// Mean and covariance of a Gaussian state PDF.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianBelief {
    mu: DVector<f64>,
    sigma: DMatrix<f64>,
}

impl GaussianBelief {
    /// Validates and cleans a belief. The covariance must be symmetric to
    /// 1e-12 (it is then symmetrized exactly) and PSD to -1e-10; slightly
    /// negative eigenvalues inside that band are clamped to zero.
    pub fn new(mu: DVector<f64>, sigma: DMatrix<f64>) -> Result<Self> {
        let n = mu.len();
        if n == 0 {
            return Err(Error::Config("mean vector must not be empty".into()));
        }
        if sigma.shape() != (n, n) {
            return Err(Error::dimension("covariance", (n, n), sigma.shape()));
        }
        if mu.iter().chain(sigma.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Config("belief contains non-finite entries".into()));
        }
        let scale = sigma.amax().max(1.0);
        let asym = (&sigma - sigma.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::Config(format!(
                "covariance is not symmetric (max asymmetry {asym:e})"
            )));
        }
        let sigma = symmetrize(sigma);
        let eig = SymmetricEigen::new(sigma.clone());
        let min_eig = eig.eigenvalues.min();
        if min_eig < -PSD_TOL * scale {
            return Err(Error::Config(format!(
                "covariance is not positive semidefinite (smallest eigenvalue {min_eig:e})"
            )));
        }
        let sigma = if min_eig < 0.0 {
            let clamped = eig.eigenvalues.map(|l| l.max(0.0));
            symmetrize(&eig.eigenvectors * DMatrix::from_diagonal(&clamped) * eig.eigenvectors.transpose())
        } else {
            sigma
        };
        Ok(Self { mu, sigma })
    }

    /// Point mass at `mu`.
    pub fn dirac(mu: DVector<f64>) -> Result<Self> {
        let n = mu.len();
        Self::new(mu, DMatrix::zeros(n, n))
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    /// `(c μ, c² Σ)`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            mu: &self.mu * c,
            sigma: &self.sigma * (c * c),
        }
    }

    /// Second-moment matrix `μμᵀ + Σ`.
    pub fn second_moment(&self) -> DMatrix<f64> {
        &self.mu * self.mu.transpose() + &self.sigma
    }

    /// Internal constructor for propagated beliefs; skips the eigen check
    /// since `AΣAᵀ` is PSD whenever `Σ` is.
    pub(crate) fn from_parts_unchecked(mu: DVector<f64>, sigma: DMatrix<f64>) -> Self {
        Self { mu, sigma }
    }
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// One step of the noiseless moment recursion: `μ' = Aμ`, `Σ' = AΣAᵀ`.
pub fn propagate(belief: &GaussianBelief, mode_matrix: &DMatrix<f64>) -> Result<GaussianBelief> {
    let n = belief.dim();
    if mode_matrix.shape() != (n, n) {
        return Err(Error::dimension("mode matrix", (n, n), mode_matrix.shape()));
    }
    Ok(propagate_unchecked(belief, mode_matrix))
}

pub(crate) fn propagate_unchecked(belief: &GaussianBelief, a: &DMatrix<f64>) -> GaussianBelief {
    let mu = a * &belief.mu;
    let sigma = symmetrize(a * &belief.sigma * a.transpose());
    GaussianBelief::from_parts_unchecked(mu, sigma)
}

/// Beliefs at `k = 0..=steps` under `schedule`; element 0 is `initial`.
pub fn simulate_schedule(
    system: &JumpSystem,
    initial: &GaussianBelief,
    schedule: &SwitchingSchedule,
    steps: usize,
) -> Result<Vec<GaussianBelief>> {
    if initial.dim() != system.dim() {
        return Err(Error::dimension(
            "initial belief",
            (system.dim(), 1),
            (initial.dim(), 1),
        ));
    }
    if schedule.total_steps() < steps {
        return Err(Error::Input(format!(
            "schedule covers {} steps but {} were requested",
            schedule.total_steps(),
            steps
        )));
    }
    let mut out = Vec::with_capacity(steps + 1);
    out.push(initial.clone());
    for k in 0..steps {
        let a = system.mode(schedule.mode_at(k)?)?;
        let next = propagate_unchecked(&out[k], a);
        out.push(next);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::example1_system;
    use approx::assert_relative_eq;

    fn example1_initial() -> GaussianBelief {
        GaussianBelief::new(DVector::from_vec(vec![5.0, 5.0]), DMatrix::identity(2, 2) * 2.25).unwrap()
    }

    #[test]
    fn zero_input_plant_gives_identity_mode() {
        let plant = PlantWithControllers {
            a: DMatrix::identity(2, 2),
            b: DMatrix::zeros(2, 1),
            gains: vec![DMatrix::zeros(1, 2)],
        };
        let sys = build_closed_loop(&plant).unwrap();
        assert_eq!(sys.mode_count(), 1);
        assert_eq!(sys.modes()[0], DMatrix::identity(2, 2));
    }

    #[test]
    fn exact_cancellation_gives_zero_mode() {
        let a = DMatrix::from_row_slice(2, 2, &[0.3, -1.2, 2.5, 0.7]);
        let plant = PlantWithControllers {
            a: a.clone(),
            b: DMatrix::identity(2, 2),
            gains: vec![-a],
        };
        let sys = build_closed_loop(&plant).unwrap();
        assert_eq!(sys.modes()[0], DMatrix::zeros(2, 2));
    }

    #[test]
    fn closed_loop_matches_elementwise_arithmetic() {
        let a = DMatrix::from_row_slice(3, 3, &[0.1, -0.4, 0.9, 0.3, 0.2, -0.7, -0.5, 0.6, 0.05]);
        let b = DMatrix::from_row_slice(3, 2, &[1.0, 0.5, -0.2, 0.8, 0.3, -1.1]);
        let k1 = DMatrix::from_row_slice(2, 3, &[0.2, 0.1, -0.3, -0.6, 0.4, 0.9]);
        let k2 = DMatrix::from_row_slice(2, 3, &[-1.0, 0.0, 0.5, 0.25, -0.75, 0.1]);
        let plant = PlantWithControllers {
            a: a.clone(),
            b: b.clone(),
            gains: vec![k1.clone(), k2.clone()],
        };
        let sys = build_closed_loop(&plant).unwrap();
        for (mode, k) in sys.modes().iter().zip([&k1, &k2]) {
            for i in 0..3 {
                for j in 0..3 {
                    let mut expected = a[(i, j)];
                    for l in 0..2 {
                        expected += b[(i, l)] * k[(l, j)];
                    }
                    assert_relative_eq!(mode[(i, j)], expected, epsilon = 1e-15);
                }
            }
        }
    }

    #[test]
    fn mismatched_gain_is_named() {
        let plant = PlantWithControllers {
            a: DMatrix::identity(2, 2),
            b: DMatrix::zeros(2, 1),
            gains: vec![DMatrix::zeros(1, 2), DMatrix::zeros(2, 2)],
        };
        let err = build_closed_loop(&plant).unwrap_err();
        assert!(err.to_string().contains("gain K2"), "{err}");
    }

    #[test]
    fn non_square_mode_rejected() {
        let err = JumpSystem::new(vec![DMatrix::identity(2, 2), DMatrix::zeros(2, 3)]).unwrap_err();
        assert!(err.to_string().contains("mode 2"));
    }

    #[test]
    fn belief_validation() {
        let mu = DVector::from_vec(vec![1.0, 2.0]);
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]);
        assert!(GaussianBelief::new(mu.clone(), asym).is_err());
        let indefinite = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(GaussianBelief::new(mu.clone(), indefinite).is_err());
        let tiny_neg = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1e-12]);
        let b = GaussianBelief::new(mu, tiny_neg).unwrap();
        assert!(SymmetricEigen::new(b.sigma().clone()).eigenvalues.min() >= 0.0);
    }

    #[test]
    fn identity_mode_leaves_belief_unchanged() {
        let b = example1_initial();
        let next = propagate(&b, &DMatrix::identity(2, 2)).unwrap();
        assert_eq!(next, b);
    }

    #[test]
    fn annihilating_mode_zeroes_belief() {
        let next = propagate(&example1_initial(), &DMatrix::zeros(2, 2)).unwrap();
        assert_eq!(next.mu().amax(), 0.0);
        assert_eq!(next.sigma().amax(), 0.0);
    }

    #[test]
    fn propagate_by_a3_matches_hand_computation() {
        // A3 = [[0.72, 0.48], [0, 0.55]]
        // A3 μ = [0.72*5 + 0.48*5, 0.55*5] = [6.0, 2.75]
        // A3 (2.25 I) A3ᵀ = 2.25 [[0.72²+0.48², 0.48*0.55], [0.48*0.55, 0.55²]]
        let a3 = example1_system().modes()[2].clone();
        let next = propagate(&example1_initial(), &a3).unwrap();
        assert_relative_eq!(next.mu()[0], 6.0, epsilon = 1e-14);
        assert_relative_eq!(next.mu()[1], 2.75, epsilon = 1e-14);
        assert_relative_eq!(next.sigma()[(0, 0)], 2.25 * (0.5184 + 0.2304), epsilon = 1e-14);
        assert_relative_eq!(next.sigma()[(0, 1)], 2.25 * 0.264, epsilon = 1e-14);
        assert_relative_eq!(next.sigma()[(1, 0)], 2.25 * 0.264, epsilon = 1e-14);
        assert_relative_eq!(next.sigma()[(1, 1)], 2.25 * 0.3025, epsilon = 1e-14);
    }

    #[test]
    fn propagate_rejects_wrong_shape() {
        assert!(propagate(&example1_initial(), &DMatrix::identity(3, 3)).is_err());
    }

    #[test]
    fn simulate_zero_steps() {
        let sys = example1_system();
        let sched = SwitchingSchedule::constant(0, 0);
        let out = simulate_schedule(&sys, &example1_initial(), &sched, 0).unwrap();
        assert_eq!(out, vec![example1_initial()]);
    }

    #[test]
    fn simulate_constant_equals_repeated_propagate() {
        let sys = example1_system();
        let a3 = &sys.modes()[2];
        let sched = SwitchingSchedule::constant(2, 2);
        let out = simulate_schedule(&sys, &example1_initial(), &sched, 2).unwrap();
        let twice = propagate(&propagate(&example1_initial(), a3).unwrap(), a3).unwrap();
        assert_eq!(out[2], twice);
    }

    #[test]
    fn simulate_alternating_mean_is_matrix_product() {
        let sys = example1_system();
        let sched = SwitchingSchedule::from_sequence(&[0, 1]);
        let out = simulate_schedule(&sys, &example1_initial(), &sched, 2).unwrap();
        let expected = &sys.modes()[1] * &sys.modes()[0] * DVector::from_vec(vec![5.0, 5.0]);
        assert_relative_eq!(out[2].mu(), &expected, epsilon = 1e-13);
    }

    #[test]
    fn simulate_rejects_short_schedule() {
        let sys = example1_system();
        let sched = SwitchingSchedule::constant(0, 3);
        let err = simulate_schedule(&sys, &example1_initial(), &sched, 4).unwrap_err();
        assert!(matches!(err, Error::Input(_)));
    }
}
