//! Ground-truth world state, relative observation synthesis, and task goal
//! generators.

use crate::dynamics::RelativeState;
use crate::math::{rotate, UnitQuat, Vec3};
use serde::{Deserialize, Serialize};

/// World-frame pose and twist of one vehicle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidBodyState {
    pub position: Vec3,
    pub velocity: Vec3,
    pub orientation: UnitQuat,
    /// Body-frame angular rate.
    pub body_rate: Vec3,
}

impl RigidBodyState {
    pub fn at_rest() -> Self {
        Self {
            position: Vec3::zeros(),
            velocity: Vec3::zeros(),
            orientation: UnitQuat::identity(),
            body_rate: Vec3::zeros(),
        }
    }
}

/// Ground truth from which relative observations are synthesized.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WorldState {
    pub ugv: RigidBodyState,
    /// World-frame linear acceleration of the UGV body origin.
    pub ugv_accel: Vec3,
    pub uav: RigidBodyState,
    pub time: f64,
}

/// Exact relative state of the UAV in the UGV body frame `N`.
///
/// The velocity is the frame-N derivative of the relative position, so it
/// carries the transport term `-ω × p` of the rotating frame.
pub fn relative_observation(world: &WorldState) -> RelativeState {
    let ugv_rot_inv = world.ugv.orientation.inverse();
    let p = rotate(&ugv_rot_inv, &(world.uav.position - world.ugv.position));
    let q = ugv_rot_inv * world.uav.orientation;
    let v = rotate(&ugv_rot_inv, &(world.uav.velocity - world.ugv.velocity))
        - world.ugv.body_rate.cross(&p);
    RelativeState::new(p, v, q)
}

/// Task goal generator: where the UAV should be, in frame `N`, at time `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum TaskSpec {
    /// Hold a fixed offset relative to the UGV.
    LeaderFollow { offset: Vec3 },
    /// Circle of the given radius and angular rate about a fixed center.
    Orbit { radius: f64, omega: f64, center: Vec3 },
    /// Straight-line descent from an approach point to a touchdown point at
    /// constant speed.
    Land {
        approach: Vec3,
        touchdown: Vec3,
        descent_speed: f64,
    },
}

impl TaskSpec {
    pub fn validate(&self) -> Result<(), String> {
        match self {
            TaskSpec::LeaderFollow { .. } => Ok(()),
            TaskSpec::Orbit { radius, .. } => {
                if !(*radius > 0.0) {
                    Err(format!("orbit radius must be positive, got {radius}"))
                } else {
                    Ok(())
                }
            }
            TaskSpec::Land {
                approach,
                touchdown,
                descent_speed,
            } => {
                if !(*descent_speed > 0.0) {
                    return Err("descent_speed must be positive".into());
                }
                if (approach - touchdown).norm() < 1e-9 {
                    return Err("approach and touchdown must differ".into());
                }
                Ok(())
            }
        }
    }

    /// Goal position in frame `N` at time `t`.
    pub fn goal(&self, t: f64) -> Vec3 {
        match self {
            TaskSpec::LeaderFollow { offset } => *offset,
            TaskSpec::Orbit {
                radius,
                omega,
                center,
            } => {
                let phase = omega * t;
                center + Vec3::new(radius * phase.cos(), radius * phase.sin(), 0.0)
            }
            TaskSpec::Land {
                approach,
                touchdown,
                descent_speed,
            } => {
                let leg = approach - touchdown;
                let total = leg.norm();
                let remaining = (total - descent_speed * t).max(0.0);
                touchdown + leg * (remaining / total)
            }
        }
    }
}
