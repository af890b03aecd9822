//! Quadrotor attitude model: rigid-body rates driven by rotor speeds, Euler
//! angle kinematics, its hover linearization, and zero-order-hold
//! discretization of the closed loops.
//!
//! State ordering is `[φ, θ, ψ, p, q, r]`; inputs are the four rotor speeds
//! `Ω_1..Ω_4` (rad/s). The linearization input matrix is taken with respect
//! to rotor-speed deviations from the trim speeds.

use nalgebra::{DMatrix, Schur, Vector6};
use serde::{Deserialize, Serialize};

use crate::analysis::spectral_radius;
use crate::error::{Error, Result};
use crate::system_model::JumpSystem;

/// Pitch angles closer than this to ±π/2 are rejected.
pub const GIMBAL_MARGIN: f64 = 1e-3;

/// Physical constants. The defaults describe a generic ~0.65 kg frame and
/// are not tied to any particular published vehicle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadrotorParams {
    /// kg·m²
    pub ixx: f64,
    pub iyy: f64,
    pub izz: f64,
    /// Rotor inertia, kg·m².
    pub jr: f64,
    /// Thrust factor, N·s².
    pub b: f64,
    /// Drag factor, N·m·s².
    pub d: f64,
    /// Arm length, m.
    pub l: f64,
    /// Residual rotor speed in the gyroscopic terms, rad/s.
    pub omega_r: f64,
    /// Hover rotor speeds, rad/s.
    pub omega_trim: [f64; 4],
}

impl Default for QuadrotorParams {
    fn default() -> Self {
        // trim: sqrt(m g / (4 b)) with m = 0.65 kg
        let trim = (0.65 * 9.81 / (4.0 * 3.13e-5_f64)).sqrt();
        Self {
            ixx: 7.5e-3,
            iyy: 7.5e-3,
            izz: 1.3e-2,
            jr: 6.0e-5,
            b: 3.13e-5,
            d: 7.5e-7,
            l: 0.23,
            omega_r: 20.0,
            omega_trim: [trim; 4],
        }
    }
}

impl QuadrotorParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("ixx", self.ixx),
            ("iyy", self.iyy),
            ("izz", self.izz),
            ("b", self.b),
            ("d", self.d),
            ("l", self.l),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!(
                    "quadrotor parameter {name} must be positive, got {v}"
                )));
            }
        }
        if !(self.jr >= 0.0 && self.jr.is_finite()) {
            return Err(Error::Config(format!(
                "quadrotor parameter jr must be nonnegative, got {}",
                self.jr
            )));
        }
        if !self.omega_r.is_finite() || self.omega_trim.iter().any(|w| !w.is_finite()) {
            return Err(Error::Config("quadrotor rotor speeds must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QuadrotorState {
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

impl QuadrotorState {
    pub fn from_vector(x: &Vector6<f64>) -> Self {
        Self {
            phi: x[0],
            theta: x[1],
            psi: x[2],
            p: x[3],
            q: x[4],
            r: x[5],
        }
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        Vector6::new(self.phi, self.theta, self.psi, self.p, self.q, self.r)
    }
}

/// Time derivative of the attitude state.
pub fn nonlinear_rhs(
    state: &QuadrotorState,
    rotor_speeds: &[f64; 4],
    params: &QuadrotorParams,
) -> Result<Vector6<f64>> {
    if state.theta.abs() >= std::f64::consts::FRAC_PI_2 - GIMBAL_MARGIN {
        return Err(Error::Domain(format!(
            "pitch angle {} rad is too close to the Euler-angle singularity",
            state.theta
        )));
    }
    let QuadrotorParams {
        ixx,
        iyy,
        izz,
        jr,
        b,
        d,
        l,
        omega_r,
        ..
    } = *params;
    let QuadrotorState {
        phi, theta, p, q, r, ..
    } = *state;
    let [w1, w2, w3, w4] = rotor_speeds.map(|w| w * w);

    let p_dot = (q * r * (iyy - izz) + q * jr * omega_r + b * l * (-w2 + w4)) / ixx;
    let q_dot = (p * r * (izz - ixx) - p * jr * omega_r + b * l * (w1 - w3)) / iyy;
    let r_dot = (p * q * (ixx - iyy) + d * (-w1 + w2 - w3 + w4)) / izz;

    let (s_phi, c_phi) = phi.sin_cos();
    let (tan_t, sec_t) = (theta.tan(), 1.0 / theta.cos());
    let phi_dot = p + s_phi * tan_t * q + c_phi * tan_t * r;
    let theta_dot = c_phi * q - s_phi * r;
    let psi_dot = s_phi * sec_t * q + c_phi * sec_t * r;

    Ok(Vector6::new(phi_dot, theta_dot, psi_dot, p_dot, q_dot, r_dot))
}

/// Continuous-time hover model `ẋ = A x + B δΩ`.
#[derive(Debug, Clone, PartialEq)]
pub struct HoverLinearization {
    /// 6x6 state Jacobian.
    pub a: DMatrix<f64>,
    /// 6x4 Jacobian with respect to rotor speeds.
    pub b: DMatrix<f64>,
}

/// Analytic Jacobians of [`nonlinear_rhs`] at zero attitude and rates with
/// rotors at `omega_trim`.
///
/// At hover the Euler kinematics reduce to the identity, the `qr`, `pr`,
/// `pq` products vanish, and only the gyroscopic coupling `±J_r Ω_r` remains
/// in the rate block.
pub fn linearize_hover(params: &QuadrotorParams) -> HoverLinearization {
    let QuadrotorParams {
        ixx,
        iyy,
        izz,
        jr,
        b,
        d,
        l,
        omega_r,
        omega_trim,
    } = *params;
    let mut a = DMatrix::zeros(6, 6);
    for i in 0..3 {
        a[(i, i + 3)] = 1.0;
    }
    a[(3, 4)] = jr * omega_r / ixx;
    a[(4, 3)] = -jr * omega_r / iyy;

    let [o1, o2, o3, o4] = omega_trim;
    let mut bm = DMatrix::zeros(6, 4);
    bm[(3, 1)] = -2.0 * b * l * o2 / ixx;
    bm[(3, 3)] = 2.0 * b * l * o4 / ixx;
    bm[(4, 0)] = 2.0 * b * l * o1 / iyy;
    bm[(4, 2)] = -2.0 * b * l * o3 / iyy;
    bm[(5, 0)] = -2.0 * d * o1 / izz;
    bm[(5, 1)] = 2.0 * d * o2 / izz;
    bm[(5, 2)] = -2.0 * d * o3 / izz;
    bm[(5, 3)] = 2.0 * d * o4 / izz;
    HoverLinearization { a, b: bm }
}

/// Zero-order-hold discretization `exp(A dt)` (scaling and squaring with a
/// Padé approximant).
pub fn discretize(continuous: &DMatrix<f64>, dt: f64) -> Result<DMatrix<f64>> {
    check_dt(continuous, dt)?;
    Ok((continuous * dt).exp())
}

/// Forward-Euler discretization `I + A dt`. First-order accurate only.
pub fn discretize_euler(continuous: &DMatrix<f64>, dt: f64) -> Result<DMatrix<f64>> {
    check_dt(continuous, dt)?;
    let n = continuous.nrows();
    Ok(DMatrix::identity(n, n) + continuous * dt)
}

fn check_dt(m: &DMatrix<f64>, dt: f64) -> Result<()> {
    if !m.is_square() {
        return Err(Error::dimension("continuous matrix", (m.nrows(), m.nrows()), m.shape()));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Input(format!("sampling time must be positive, got {dt}")));
    }
    Ok(())
}

/// Discrete jump system whose modes are the hover linearization closed by
/// each gain (`u = K_i x`, `K_i` 4x6), discretized at `dt`.
pub fn build_quadrotor_jump_system(params: &QuadrotorParams, gains: &[DMatrix<f64>], dt: f64) -> Result<JumpSystem> {
    params.validate()?;
    if gains.is_empty() {
        return Err(Error::Config("at least one quadrotor gain is required".into()));
    }
    let lin = linearize_hover(params);
    let mut modes = Vec::with_capacity(gains.len());
    for (i, k) in gains.iter().enumerate() {
        if k.shape() != (4, 6) {
            return Err(Error::dimension(format!("quadrotor gain {}", i + 1), (4, 6), k.shape()));
        }
        let closed = &lin.a + &lin.b * k;
        let max_real = Schur::try_new(closed.clone(), f64::EPSILON, 60_000)
            .ok_or_else(|| Error::Numerical(format!("eigenvalues of closed loop {} did not converge", i + 1)))?
            .complex_eigenvalues()
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max);
        if max_real >= 0.0 {
            return Err(Error::Precondition(format!(
                "quadrotor gain {} does not stabilize the hover linearization (max Re λ = {max_real:.6})",
                i + 1
            )));
        }
        let discrete = discretize(&closed, dt)?;
        let radius = spectral_radius(&discrete)?;
        if radius >= 1.0 {
            return Err(Error::NotSchurStable { mode: i + 1, radius });
        }
        modes.push(discrete);
    }
    JumpSystem::new(modes)
}
