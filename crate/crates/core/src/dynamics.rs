//! Quadrotor rigid-body dynamics expressed in the ground vehicle's
//! (non-inertial) body frame `N`.
//!
//! The state couples to the UGV's motion through the measured non-inertial
//! quantities: IMU specific force, body rate, and angular acceleration.
//! When those quantities equal `[(0,0,g); 0; 0]` the flow degenerates to the
//! familiar world-frame quadrotor dynamics, which is what the simulator's
//! ground truth integrates and what the equivalence tests exploit.

use crate::math::{pure, quat_finite, skew, vec3_finite, Quat, UnitQuat, Vec3};
use crate::{Error, Result, GRAVITY};
use serde::{Deserialize, Serialize};

/// Quadrotor pose and velocity relative to the UGV body frame `N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelativeState {
    /// UAV position in frame `N`, m.
    pub p: Vec3,
    /// Rate of change of `p` in frame `N`, m/s.
    pub v: Vec3,
    /// Orientation of the UAV body frame `B` relative to `N`.
    pub q: UnitQuat,
}

impl RelativeState {
    pub fn new(p: Vec3, v: Vec3, q: UnitQuat) -> Self {
        Self { p, v, q }
    }

    /// Stationary at the frame origin, axes aligned with `N`.
    pub fn at_rest() -> Self {
        Self::new(Vec3::zeros(), Vec3::zeros(), UnitQuat::identity())
    }

    pub fn is_finite(&self) -> bool {
        vec3_finite(&self.p) && vec3_finite(&self.v) && quat_finite(self.q.quaternion())
    }
}

/// Mass-normalized collective thrust plus body rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlInput {
    /// Collective thrust divided by vehicle mass, m/s².
    pub thrust: f64,
    /// UAV body rate in frame `B`, rad/s.
    pub omega: Vec3,
}

impl ControlInput {
    pub fn new(thrust: f64, omega: Vec3) -> Self {
        Self { thrust, omega }
    }

    /// Hover input: thrust `g`, zero body rate.
    pub fn hover() -> Self {
        Self::new(GRAVITY, Vec3::zeros())
    }

    pub fn is_finite(&self) -> bool {
        self.thrust.is_finite() && vec3_finite(&self.omega)
    }
}

/// The UGV-side quantities that parameterize the relative dynamics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonInertialQuantities {
    /// UGV IMU specific-force measurement in frame `N`, m/s².
    /// Includes the gravity reaction: a static upright UGV reports `(0,0,g)`.
    pub a_imu: Vec3,
    /// UGV body rate in frame `N`, rad/s.
    pub omega_n: Vec3,
    /// UGV angular acceleration, rad/s². Estimators typically report zero.
    pub beta_n: Vec3,
}

impl NonInertialQuantities {
    pub fn new(a_imu: Vec3, omega_n: Vec3, beta_n: Vec3) -> Self {
        Self {
            a_imu,
            omega_n,
            beta_n,
        }
    }

    /// The degenerate (world-frame) parameter set `[(0,0,g); 0; 0]`.
    pub fn degenerate() -> Self {
        Self::new(Vec3::new(0.0, 0.0, GRAVITY), Vec3::zeros(), Vec3::zeros())
    }

    pub fn is_finite(&self) -> bool {
        vec3_finite(&self.a_imu) && vec3_finite(&self.omega_n) && vec3_finite(&self.beta_n)
    }
}

/// Time derivative of a [`RelativeState`]; the quaternion rate is a raw
/// (non-unit) quaternion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateDerivative {
    pub p_dot: Vec3,
    pub v_dot: Vec3,
    pub q_dot: Quat,
}

/// Continuous relative flow:
///
/// ```text
/// ṗ = v
/// v̇ = -[β]×p - 2[Ω]×ṗ - [Ω]×²p + q ⊙ (0,0,T) ⊙ q⁻¹ - a_imu
/// q̇ = -½ Ω_N ⊙ q + ½ q ⊙ Ω_B
/// ```
///
/// with the body rates embedded as pure quaternions.
pub fn derivative(
    x: &RelativeState,
    u: &ControlInput,
    n: &NonInertialQuantities,
) -> Result<StateDerivative> {
    if !x.is_finite() {
        return Err(Error::NonFinite("relative state"));
    }
    if !u.is_finite() {
        return Err(Error::NonFinite("control input"));
    }
    if !n.is_finite() {
        return Err(Error::NonFinite("non-inertial quantities"));
    }
    Ok(derivative_raw(&x.p, &x.v, x.q.quaternion(), u, n))
}

/// Flow evaluated at a raw quaternion; used by the RK4 stages where the
/// intermediate quaternion is slightly off the unit sphere.
pub(crate) fn derivative_raw(
    p: &Vec3,
    v: &Vec3,
    q: &Quat,
    u: &ControlInput,
    n: &NonInertialQuantities,
) -> StateDerivative {
    let omega = &n.omega_n;
    let thrust_body = pure(&Vec3::new(0.0, 0.0, u.thrust));
    // Exact inverse (conjugate over squared norm) so the sandwich product is
    // well-defined off the unit sphere.
    let q_inv = q.conjugate() * (1.0 / q.norm_squared());
    let thrust_n = (q * thrust_body * q_inv).imag();

    let v_dot = -skew(&n.beta_n) * p - 2.0 * skew(omega) * v - skew(omega) * (skew(omega) * p)
        + thrust_n
        - n.a_imu;
    let q_dot = -0.5 * (pure(omega) * q) + 0.5 * (q * pure(&u.omega));

    StateDerivative {
        p_dot: *v,
        v_dot,
        q_dot,
    }
}

/// One classical RK4 step with the non-inertial quantities held constant;
/// the quaternion is renormalized after the step.
pub fn integrate_rk4(
    x: &RelativeState,
    u: &ControlInput,
    n: &NonInertialQuantities,
    dt: f64,
) -> Result<RelativeState> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "integration step must be positive, got {dt}"
        )));
    }
    if !x.is_finite() {
        return Err(Error::NonFinite("relative state"));
    }
    if !u.is_finite() {
        return Err(Error::NonFinite("control input"));
    }
    if !n.is_finite() {
        return Err(Error::NonFinite("non-inertial quantities"));
    }
    let (p, v, q_raw) = rk4_raw(&x.p, &x.v, x.q.quaternion(), u, n, dt);
    Ok(RelativeState::new(p, v, UnitQuat::from_quaternion(q_raw)))
}

/// RK4 step before quaternion renormalization.
pub(crate) fn rk4_raw(
    p: &Vec3,
    v: &Vec3,
    q: &Quat,
    u: &ControlInput,
    n: &NonInertialQuantities,
    dt: f64,
) -> (Vec3, Vec3, Quat) {
    let half = 0.5 * dt;
    let k1 = derivative_raw(p, v, q, u, n);
    let k2 = derivative_raw(
        &(p + half * k1.p_dot),
        &(v + half * k1.v_dot),
        &(q + half * k1.q_dot),
        u,
        n,
    );
    let k3 = derivative_raw(
        &(p + half * k2.p_dot),
        &(v + half * k2.v_dot),
        &(q + half * k2.q_dot),
        u,
        n,
    );
    let k4 = derivative_raw(
        &(p + dt * k3.p_dot),
        &(v + dt * k3.v_dot),
        &(q + dt * k3.q_dot),
        u,
        n,
    );
    let sixth = dt / 6.0;
    (
        p + sixth * (k1.p_dot + 2.0 * k2.p_dot + 2.0 * k3.p_dot + k4.p_dot),
        v + sixth * (k1.v_dot + 2.0 * k2.v_dot + 2.0 * k3.v_dot + k4.v_dot),
        q + sixth * (k1.q_dot + 2.0 * k2.q_dot + 2.0 * k3.q_dot + k4.q_dot),
    )
}

/// True iff the parameter set equals `[(0,0,g); 0; 0]` within 1e-9, i.e. the
/// relative flow coincides with world-frame quadrotor dynamics.
pub fn is_degenerate(n: &NonInertialQuantities) -> bool {
    const TOL: f64 = 1e-9;
    (n.a_imu - Vec3::new(0.0, 0.0, GRAVITY)).amax() <= TOL
        && n.omega_n.amax() <= TOL
        && n.beta_n.amax() <= TOL
}
