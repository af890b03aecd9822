//! Squared 2-Wasserstein distance from a Gaussian belief to the Dirac
//! measure at the origin.
//!
//! For `N(μ, Σ)` against `δ(0)` the only coupling is the product measure, so
//! `W² = E‖X‖² = ‖μ‖² + tr Σ`. Along a trajectory this is the linear
//! functional `vec(I)ᵀ · vec(μμᵀ + Σ)` of the second-moment matrix, which
//! evolves as `M ↦ A M Aᵀ`, i.e. `vec(M) ↦ (A ⊗ A) vec(M)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::synthesis::SwitchingSchedule;
use crate::system_model::{simulate_schedule, GaussianBelief, JumpSystem};

/// Above this dimension the dense `n² x n²` Kronecker factors are never
/// formed.
pub const DENSE_KRON_MAX_DIM: usize = 8;

/// Per-step `W²(k)` values and their discrete-time area `dk · Σ W²(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct W2Trace {
    values: Vec<f64>,
    dk: f64,
    area: f64,
}

impl W2Trace {
    pub fn new(values: Vec<f64>, dk: f64) -> Result<Self> {
        if !(dk > 0.0 && dk.is_finite()) {
            return Err(Error::Input(format!("sampling interval dk must be positive, got {dk}")));
        }
        if let Some((k, v)) = values.iter().enumerate().find(|(_, v)| v.is_nan() || **v < 0.0) {
            return Err(Error::Numerical(format!(
                "W² at step {k} is {v}, expected a nonnegative value"
            )));
        }
        let area = dk * values.iter().sum::<f64>();
        Ok(Self { values, dk, area })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dk(&self) -> f64 {
        self.dk
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn last(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// `‖μ‖² + tr Σ`.
pub fn w2_gaussian_dirac(belief: &GaussianBelief) -> f64 {
    // tr Σ of a PSD matrix is nonnegative; the clamp only absorbs round-off.
    (belief.mu().norm_squared() + belief.sigma().trace()).max(0.0)
}

/// `W²(k)` after applying `sequence` (0-based modes, first element acts first)
/// to the initial belief, evaluated in the vectorized form
/// `vec(I)ᵀ · Π (A ⊗ A) · vec(μ₀μ₀ᵀ + Σ₀)`.
///
/// Each factor is applied to the running `n²` vector through
/// `(A ⊗ A) vec(X) = vec(A X Aᵀ)`, so the cost is `O(n³)` per step.
pub fn w2_kron_form(system: &JumpSystem, initial: &GaussianBelief, sequence: &[usize]) -> Result<f64> {
    check_inputs(system, initial, sequence)?;
    let n = system.dim();
    let mut v = vec_of(&initial.second_moment());
    for &mode in sequence {
        let a = &system.modes()[mode];
        let x = DMatrix::from_column_slice(n, n, v.as_slice());
        v = vec_of(&(a * x * a.transpose()));
    }
    Ok(trace_functional(&v, n).max(0.0))
}

/// Same quantity as [`w2_kron_form`] but with each `A ⊗ A` materialized as a
/// dense `n² x n²` matrix. Only available for `n <= 8`; used to cross-check
/// the factored path on small systems.
pub fn w2_kron_form_dense(system: &JumpSystem, initial: &GaussianBelief, sequence: &[usize]) -> Result<f64> {
    check_inputs(system, initial, sequence)?;
    let n = system.dim();
    if n > DENSE_KRON_MAX_DIM {
        return Err(Error::Input(format!(
            "dense Kronecker evaluation is limited to n <= {DENSE_KRON_MAX_DIM}, got n = {n}"
        )));
    }
    let kron: Vec<DMatrix<f64>> = system.modes().iter().map(|a| a.kronecker(a)).collect();
    let mut v = vec_of(&initial.second_moment());
    for &mode in sequence {
        v = &kron[mode] * v;
    }
    let vec_identity = vec_of(&DMatrix::identity(n, n));
    Ok(vec_identity.dot(&v).max(0.0))
}

/// Per-step W² along `schedule` for `steps` steps, with area `dk · Σ W²(k)`.
pub fn w2_trajectory(
    system: &JumpSystem,
    initial: &GaussianBelief,
    schedule: &SwitchingSchedule,
    steps: usize,
    dk: f64,
) -> Result<W2Trace> {
    let beliefs = simulate_schedule(system, initial, schedule, steps)?;
    W2Trace::new(beliefs.iter().map(w2_gaussian_dirac).collect(), dk)
}

fn check_inputs(system: &JumpSystem, initial: &GaussianBelief, sequence: &[usize]) -> Result<()> {
    if initial.dim() != system.dim() {
        return Err(Error::dimension(
            "initial belief",
            (system.dim(), 1),
            (initial.dim(), 1),
        ));
    }
    if let Some((k, m)) = sequence.iter().enumerate().find(|(_, &m)| m >= system.mode_count()) {
        return Err(Error::Input(format!(
            "sequence entry {k} selects mode {}, but only {} modes exist",
            m + 1,
            system.mode_count()
        )));
    }
    Ok(())
}

/// Column-major vectorization.
fn vec_of(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

/// `vec(I)ᵀ v`: sums the entries that land on the diagonal after reshaping.
fn trace_functional(v: &DVector<f64>, n: usize) -> f64 {
    (0..n).map(|i| v[i * n + i]).sum()
}
