//! Stability and performance checks: spectral radii, Schur stability,
//! a runtime mean-square stability certificate on realized W² traces, and a
//! sampled screen for modes that make switching pointless.

use nalgebra::{DMatrix, DVector, Schur};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::system_model::JumpSystem;
use crate::wasserstein::W2Trace;

/// Default certificate threshold, relative to `W²(0)`.
pub const DEFAULT_MS_THRESHOLD: f64 = 1e-6;

const DIRECTION_SEED: u64 = 0x5eed_d1ec;

/// Max eigenvalue modulus via a real Schur decomposition.
pub fn spectral_radius(matrix: &DMatrix<f64>) -> Result<f64> {
    let (r, c) = matrix.shape();
    if r != c {
        return Err(Error::dimension("matrix", (r, r), (r, c)));
    }
    if r == 0 {
        return Ok(0.0);
    }
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!("matrix has non-finite entries: {matrix}")));
    }
    let schur = Schur::try_new(matrix.clone(), f64::EPSILON, 10_000 * r)
        .ok_or_else(|| Error::Numerical(format!("Schur iteration did not converge for {matrix}")))?;
    let eig = schur.complex_eigenvalues();
    Ok(eig.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Checks every mode for `ρ(A_i) < 1`. The error names the first offender
/// (1-based).
pub fn ensure_schur_stable(system: &JumpSystem) -> Result<Vec<f64>> {
    let radii = system.modes().iter().map(spectral_radius).collect::<Result<Vec<_>>>()?;
    if let Some((i, &radius)) = radii.iter().enumerate().find(|(_, &r)| r >= 1.0) {
        return Err(Error::NotSchurStable { mode: i + 1, radius });
    }
    Ok(radii)
}

/// Outcome of [`verify_ms_stability`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MsVerdict {
    pub stable: bool,
    pub initial_w2: f64,
    pub terminal_w2: f64,
    pub threshold: f64,
    /// First jump time at which W² rose relative to the previous jump time.
    pub violation: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub per_mode_spectral_radius: Vec<f64>,
    pub all_schur: bool,
    pub ms: Option<MsVerdict>,
}

pub fn stability_report(system: &JumpSystem, ms: Option<MsVerdict>) -> Result<StabilityReport> {
    let per_mode_spectral_radius = system.modes().iter().map(spectral_radius).collect::<Result<Vec<_>>>()?;
    let all_schur = per_mode_spectral_radius.iter().all(|&r| r < 1.0);
    Ok(StabilityReport {
        per_mode_spectral_radius,
        all_schur,
        ms,
    })
}

/// Runtime m.s.-stability certificate for a realized trajectory.
///
/// Passes iff W² is non-increasing across successive jump times and the
/// final value is below `threshold · W²(0)`. The interval up to the second
/// jump time is exempt, matching the unconstrained first decision. A trace
/// that is identically zero passes (the Dirac reference has been reached).
pub fn verify_ms_stability(trace: &W2Trace, jump_times: &[usize], threshold: f64) -> MsVerdict {
    let values = trace.values();
    let initial_w2 = trace.first();
    let terminal_w2 = trace.last();

    let at_jumps: Vec<(usize, f64)> = jump_times
        .iter()
        .filter(|&&t| t < values.len())
        .map(|&t| (t, values[t]))
        .collect();
    let violation = at_jumps
        .get(1..)
        .unwrap_or_default()
        .windows(2)
        .find(|w| w[1].1 > w[0].1)
        .map(|w| w[1].0);

    let converged = terminal_w2 == 0.0 || terminal_w2 < threshold * initial_w2;
    MsVerdict {
        stable: violation.is_none() && converged,
        initial_w2,
        terminal_w2,
        threshold,
        violation,
    }
}

/// Sampled screen for a mode that contracts every state more than every
/// other mode does.
///
/// Returns `Some(i)` when `‖A_i x‖ < ‖A_j x‖` for all `j ≠ i` on `samples`
/// seeded directions of norm `radius`, and `ρ(A_i)` is strictly the smallest.
/// `None` is inconclusive: it does not prove that switching helps.
pub fn dominance_check(system: &JumpSystem, samples: usize, radius: f64) -> Result<Option<usize>> {
    let m = system.mode_count();
    if m < 2 {
        return Err(Error::Input("dominance check needs at least two modes".into()));
    }
    let radii = system.modes().iter().map(spectral_radius).collect::<Result<Vec<_>>>()?;
    let directions = sphere_directions(system.dim(), samples, radius);

    let strictly_less = |a: f64, b: f64| a < b * (1.0 - 1e-12);
    let candidate = (0..m).find(|&i| {
        (0..m).filter(|&j| j != i).all(|j| strictly_less(radii[i], radii[j]))
            && directions.iter().all(|x| {
                let ni = (&system.modes()[i] * x).norm();
                (0..m)
                    .filter(|&j| j != i)
                    .all(|j| strictly_less(ni, (&system.modes()[j] * x).norm()))
            })
    });
    Ok(candidate)
}

/// Deterministic direction set. In 2-D the circle is sampled at equal
/// angles; otherwise normalized Gaussian draws from a fixed seed.
fn sphere_directions(n: usize, samples: usize, radius: f64) -> Vec<DVector<f64>> {
    if n == 1 {
        return vec![DVector::from_element(1, radius)];
    }
    if n == 2 {
        return (0..samples)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / samples as f64;
                DVector::from_vec(vec![radius * t.cos(), radius * t.sin()])
            })
            .collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(DIRECTION_SEED);
    (0..samples)
        .map(|_| loop {
            let v = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
            let norm: f64 = v.norm();
            if norm > 1e-12 {
                break v * (radius / norm);
            }
        })
        .collect()
}
