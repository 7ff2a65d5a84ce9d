//! Iterative generation of a local collision-free reference trajectory in
//! frame `N`.
//!
//! Each sample advances the previous position by the previous modulated
//! velocity, recomputes the modulation at the new point, and derives the
//! attitude that a quadrotor must hold to realize the velocity change under
//! the relative dynamics (differential flatness: the required thrust
//! direction fixes the body z axis, and yaw is locked to the frame's x axis).
//!
//! The whole window uses one sensor snapshot and one set of non-inertial
//! quantities; cost is linear in `points × horizon`.

use crate::dynamics::NonInertialQuantities;
use crate::math::{quat_from_rotation, skew, Mat3, UnitQuat, Vec3};
use crate::modulation::{modulation_matrix, ModulationParams, SampleCloud};
use crate::{Error, Result, GRAVITY};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

/// Tuning knobs of the trajectory generator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrajectoryParams {
    /// Proportional gain pulling the reference toward the goal, 1/s.
    pub k_p: f64,
    /// Sample spacing, s.
    pub dt: f64,
    /// Number of emitted samples.
    pub horizon: usize,
    /// Minimum elevation of the reference thrust axis above the horizontal
    /// plane of frame `N`, rad. Must lie in (0, π/2).
    pub theta_low: f64,
    /// Gravity, m/s².
    pub g: f64,
}

impl Default for TrajectoryParams {
    fn default() -> Self {
        Self {
            k_p: 1.0,
            dt: 0.1,
            horizon: 20,
            theta_low: 0.35,
            g: GRAVITY,
        }
    }
}

impl TrajectoryParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "trajectory dt must be positive, got {}",
                self.dt
            )));
        }
        if self.horizon < 1 {
            return Err(Error::InvalidArgument("horizon must be at least 1".into()));
        }
        if !(self.theta_low > 0.0 && self.theta_low < FRAC_PI_2) {
            return Err(Error::InvalidArgument(format!(
                "theta_low must lie in (0, π/2), got {}",
                self.theta_low
            )));
        }
        if !(self.k_p > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "k_p must be positive, got {}",
                self.k_p
            )));
        }
        Ok(())
    }
}

/// One reference sample: position, velocity, and attitude in frame `N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub p_ref: Vec3,
    pub v_ref: Vec3,
    pub q_ref: UnitQuat,
}

/// Discrete reference trajectory consumed by the tracker.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceTrajectory {
    pub samples: Vec<TrajectorySample>,
    /// Sample spacing, s.
    pub dt: f64,
    /// True if any modulation step reported contact; the remaining samples
    /// hold position as an emergency-stop reference.
    pub collided: bool,
}

impl ReferenceTrajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Window starting at `start`, padded by repeating the last sample so the
    /// result always holds `len` samples.
    pub fn window(&self, start: usize, len: usize) -> ReferenceTrajectory {
        let last = *self.samples.last().expect("trajectory is never empty");
        let samples = (start..start + len)
            .map(|i| self.samples.get(i).copied().unwrap_or(last))
            .collect();
        ReferenceTrajectory {
            samples,
            dt: self.dt,
            collided: self.collided,
        }
    }
}

/// Caps the norm of a nominal velocity at 1.
pub fn bound(x: &Vec3) -> Vec3 {
    let norm = x.norm();
    if norm >= 1.0 {
        x / norm
    } else {
        *x
    }
}

/// Proportional goal-seeking velocity, capped at unit norm.
pub fn initial_velocity(p_ref: &Vec3, p_goal: &Vec3, k_p: f64) -> Vec3 {
    bound(&(-k_p * (p_ref - p_goal)))
}

/// Reference attitude from the modulated acceleration.
///
/// The required thrust direction is the modulated acceleration minus every
/// non-thrust term of the relative dynamics evaluated at the reference state.
/// Its elevation is clamped to at least `theta_low` above the horizontal
/// plane (rotating within the plane spanned by the raw direction and +z), and
/// yaw is locked to the frame's x axis. Falls back to `last_attitude` when
/// the thrust direction is numerically undefined.
pub fn reference_attitude(
    p_ref: &Vec3,
    v_ref: &Vec3,
    v_last: &Vec3,
    n: &NonInertialQuantities,
    dt: f64,
    theta_low: f64,
    last_attitude: &UnitQuat,
) -> UnitQuat {
    let a_ref = (v_ref - v_last) / dt;
    let non_thrust = -skew(&n.beta_n) * p_ref
        - 2.0 * skew(&n.omega_n) * v_ref
        - skew(&n.omega_n) * (skew(&n.omega_n) * p_ref)
        - n.a_imu;
    let thrust_dir = a_ref - non_thrust;
    let norm = thrust_dir.norm();
    if norm < 1e-9 {
        return *last_attitude;
    }
    let mut z_axis = thrust_dir / norm;
    let sin_low = theta_low.sin();
    if z_axis.z < sin_low {
        // Rotate toward +z within span{z_axis, e_z} until the elevation
        // reaches theta_low. Straight-down is degenerate; any horizontal
        // direction works, use +x.
        let horizontal = Vec3::new(z_axis.x, z_axis.y, 0.0);
        let h_norm = horizontal.norm();
        let h_hat = if h_norm > 1e-12 {
            horizontal / h_norm
        } else {
            Vec3::x()
        };
        z_axis = h_hat * theta_low.cos() + Vec3::z() * sin_low;
    }
    let x_c = Vec3::x();
    let y_axis = z_axis.cross(&x_c).normalize();
    let x_axis = y_axis.cross(&z_axis);
    let rotation = Mat3::from_columns(&[x_axis, y_axis, z_axis]);
    quat_from_rotation(&rotation)
}

/// Generates a reference trajectory of `params.horizon` samples from one
/// sensor snapshot.
///
/// If the modulation reports contact at any reference point, that sample and
/// all remaining samples become an emergency-stop reference: velocity zero,
/// position frozen, attitude held, and the trajectory is flagged.
pub fn gen_trajectory(
    p_now: &Vec3,
    cloud: &SampleCloud,
    n: &NonInertialQuantities,
    p_goal: &Vec3,
    params: &TrajectoryParams,
    mod_params: &ModulationParams,
) -> ReferenceTrajectory {
    let dt = params.dt;
    let mut samples = Vec::with_capacity(params.horizon);

    let mut p_last = *p_now;
    let seed_v_init = initial_velocity(&p_last, p_goal, params.k_p);
    let seed = modulation_matrix(&p_last, &seed_v_init, cloud, mod_params);
    let mut collided = seed.collided;
    let mut v_last = if collided {
        Vec3::zeros()
    } else {
        seed.matrix * seed_v_init
    };
    let mut q_last = UnitQuat::identity();

    for _ in 0..params.horizon {
        let p_ref = p_last + v_last * dt;
        if !collided {
            let v_init = initial_velocity(&p_ref, p_goal, params.k_p);
            let m = modulation_matrix(&p_ref, &v_init, cloud, mod_params);
            if m.collided {
                collided = true;
            } else {
                let v_ref = m.matrix * v_init;
                let q_ref =
                    reference_attitude(&p_ref, &v_ref, &v_last, n, dt, params.theta_low, &q_last);
                samples.push(TrajectorySample { p_ref, v_ref, q_ref });
                p_last = p_ref;
                v_last = v_ref;
                q_last = q_ref;
                continue;
            }
        }
        // Emergency stop: hold position and attitude from here on.
        samples.push(TrajectorySample {
            p_ref,
            v_ref: Vec3::zeros(),
            q_ref: q_last,
        });
        p_last = p_ref;
        v_last = Vec3::zeros();
    }

    ReferenceTrajectory {
        samples,
        dt,
        collided,
    }
}
