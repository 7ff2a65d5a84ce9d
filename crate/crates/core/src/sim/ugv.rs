//! Planar unicycle ground vehicle: scripted and random motion programs, and
//! the non-inertial quantities its IMU would report.
//!
//! The body origin travels at speed `v` along the heading; commanded speed
//! and turn rate are rate-limited, so the reported specific force is the
//! exact derivative of the ground-truth velocity (no finite differencing).
//! The angular-acceleration term is reported as zero, matching what a real
//! estimator assumes over one prediction window.

use crate::dynamics::NonInertialQuantities;
use crate::math::{UnitQuat, Vec3};
use crate::GRAVITY;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Motion program for the ground vehicle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum UgvProgram {
    /// Parked: the frame is inertial (degenerate mode).
    Static,
    /// In-place rotation at constant yaw rate, rad/s.
    Rotate { omega: f64 },
    /// Visit a fixed list of planar waypoints, then stop at the last one.
    Waypoints {
        points: Vec<[f64; 2]>,
        v_max: f64,
        omega_max: f64,
    },
    /// Drive to uniformly sampled goals inside the given planar bounds,
    /// resampling on arrival. Deterministic for a fixed seed.
    RandomGoals {
        bounds_min: [f64; 2],
        bounds_max: [f64; 2],
        v_max: f64,
        omega_max: f64,
    },
}

impl UgvProgram {
    pub fn validate(&self) -> Result<(), String> {
        match self {
            UgvProgram::Static => Ok(()),
            UgvProgram::Rotate { omega } => {
                if !omega.is_finite() {
                    Err("rotate omega must be finite".into())
                } else {
                    Ok(())
                }
            }
            UgvProgram::Waypoints {
                points,
                v_max,
                omega_max,
            } => {
                if points.is_empty() {
                    return Err("waypoint list must not be empty".into());
                }
                if !(*v_max > 0.0 && *omega_max > 0.0) {
                    return Err("waypoint v_max and omega_max must be positive".into());
                }
                Ok(())
            }
            UgvProgram::RandomGoals {
                bounds_min,
                bounds_max,
                v_max,
                omega_max,
            } => {
                if !(bounds_max[0] > bounds_min[0] && bounds_max[1] > bounds_min[1]) {
                    return Err("random-goal bounds must be a non-empty rectangle".into());
                }
                if !(*v_max > 0.0 && *omega_max > 0.0) {
                    return Err("random-goal v_max and omega_max must be positive".into());
                }
                Ok(())
            }
        }
    }
}

/// Ground-truth pose and rates of the unicycle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UgvState {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
    /// Forward speed along the heading, m/s.
    pub v: f64,
    /// Yaw rate, rad/s.
    pub omega: f64,
    /// World-frame linear acceleration of the body origin, m/s².
    pub accel_world: Vec3,
}

impl UgvState {
    pub fn at(x: f64, y: f64, yaw: f64) -> Self {
        Self {
            x,
            y,
            yaw,
            v: 0.0,
            omega: 0.0,
            accel_world: Vec3::zeros(),
        }
    }

    pub fn position(&self) -> Vec3 {
        Vec3::new(self.x, self.y, 0.0)
    }

    pub fn orientation(&self) -> UnitQuat {
        UnitQuat::from_axis_angle(&Vec3::z_axis(), self.yaw)
    }

    pub fn velocity_world(&self) -> Vec3 {
        Vec3::new(self.v * self.yaw.cos(), self.v * self.yaw.sin(), 0.0)
    }

    pub fn body_rate(&self) -> Vec3 {
        Vec3::new(0.0, 0.0, self.omega)
    }

    /// Non-inertial quantities as the UGV estimator would publish them:
    /// specific force in the body frame (gravity reaction included), body
    /// rate, and zero angular acceleration.
    pub fn non_inertial_quantities(&self) -> NonInertialQuantities {
        let specific_world = self.accel_world + Vec3::new(0.0, 0.0, GRAVITY);
        let (sin_yaw, cos_yaw) = self.yaw.sin_cos();
        let a_imu = Vec3::new(
            cos_yaw * specific_world.x + sin_yaw * specific_world.y,
            -sin_yaw * specific_world.x + cos_yaw * specific_world.y,
            specific_world.z,
        );
        NonInertialQuantities::new(a_imu, self.body_rate(), Vec3::zeros())
    }
}

/// Acceleration limits of the drive controller.
const LINEAR_ACCEL_MAX: f64 = 1.0;
const ANGULAR_ACCEL_MAX: f64 = 2.0;
/// A goal counts as reached within this distance, m.
const GOAL_TOLERANCE: f64 = 0.3;
/// UGV body radius used for steering clearance, m.
const UGV_RADIUS: f64 = 0.4;
/// Obstacles start deflecting the heading within this gap, m.
const AVOID_RANGE: f64 = 1.5;

/// Planar footprint of a world obstacle, used by the drive controller to
/// steer around pillars instead of running through them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlanarDisc {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
}

/// Steps a motion program forward; owns the program state (waypoint index,
/// RNG for random goals).
#[derive(Clone, Debug)]
pub struct UgvSim {
    pub state: UgvState,
    program: UgvProgram,
    waypoint_index: usize,
    current_goal: Option<[f64; 2]>,
    rng: ChaCha8Rng,
    obstacles: Vec<PlanarDisc>,
}

impl UgvSim {
    pub fn new(program: UgvProgram, start: UgvState, seed: u64) -> Self {
        Self {
            state: start,
            program,
            waypoint_index: 0,
            current_goal: None,
            rng: ChaCha8Rng::seed_from_u64(seed),
            obstacles: Vec::new(),
        }
    }

    /// Gives the goal-seeking driver planar obstacle footprints to steer
    /// around. Scripted programs (static, rotate) ignore them.
    pub fn with_obstacles(mut self, obstacles: Vec<PlanarDisc>) -> Self {
        self.obstacles = obstacles;
        self
    }

    pub fn program(&self) -> &UgvProgram {
        &self.program
    }

    /// Advances one step of `dt` seconds and returns the non-inertial
    /// quantities measured over that step.
    pub fn step(&mut self, dt: f64) -> NonInertialQuantities {
        let (v_des, omega_des) = self.desired_rates();
        let s = &mut self.state;
        let dv = (v_des - s.v).clamp(-LINEAR_ACCEL_MAX * dt, LINEAR_ACCEL_MAX * dt);
        let domega = (omega_des - s.omega).clamp(-ANGULAR_ACCEL_MAX * dt, ANGULAR_ACCEL_MAX * dt);
        let v_dot = dv / dt;

        // Exact derivative of v·(cos yaw, sin yaw, 0) under the realized
        // rates, evaluated at the start of the step.
        let (sin_yaw, cos_yaw) = s.yaw.sin_cos();
        s.accel_world = Vec3::new(
            v_dot * cos_yaw - s.v * s.omega * sin_yaw,
            v_dot * sin_yaw + s.v * s.omega * cos_yaw,
            0.0,
        );
        let quantities = s.non_inertial_quantities();

        s.x += s.v * cos_yaw * dt;
        s.y += s.v * sin_yaw * dt;
        s.yaw += s.omega * dt;
        s.v += dv;
        s.omega += domega;
        quantities
    }

    fn desired_rates(&mut self) -> (f64, f64) {
        match &self.program {
            UgvProgram::Static => (0.0, 0.0),
            UgvProgram::Rotate { omega } => (0.0, *omega),
            UgvProgram::Waypoints {
                points,
                v_max,
                omega_max,
            } => {
                if self.waypoint_index >= points.len() {
                    return (0.0, 0.0);
                }
                let goal = points[self.waypoint_index];
                if planar_distance(&self.state, goal) < GOAL_TOLERANCE {
                    self.waypoint_index += 1;
                    return (0.0, 0.0);
                }
                drive_toward(&self.state, goal, *v_max, *omega_max)
            }
            UgvProgram::RandomGoals {
                bounds_min,
                bounds_max,
                v_max,
                omega_max,
            } => {
                let need_new = match self.current_goal {
                    None => true,
                    Some(goal) => planar_distance(&self.state, goal) < GOAL_TOLERANCE,
                };
                if need_new {
                    let gx = self.rng.gen_range(bounds_min[0]..bounds_max[0]);
                    let gy = self.rng.gen_range(bounds_min[1]..bounds_max[1]);
                    self.current_goal = Some([gx, gy]);
                }
                let goal = self.current_goal.unwrap();
                drive_toward(&self.state, goal, *v_max, *omega_max)
            }
        }
    }
}

fn planar_distance(state: &UgvState, goal: [f64; 2]) -> f64 {
    ((state.x - goal[0]).powi(2) + (state.y - goal[1]).powi(2)).sqrt()
}

fn drive_toward(state: &UgvState, goal: [f64; 2], v_max: f64, omega_max: f64) -> (f64, f64) {
    let heading_to_goal = (goal[1] - state.y).atan2(goal[0] - state.x);
    let heading_err = wrap_angle(heading_to_goal - state.yaw);
    let omega_des = (2.0 * heading_err).clamp(-omega_max, omega_max);
    let dist = planar_distance(state, goal);
    // Slow down for sharp turns and on final approach.
    let v_des = (dist.min(v_max)) * heading_err.cos().max(0.0);
    (v_des, omega_des)
}

fn wrap_angle(a: f64) -> f64 {
    let mut a = a % std::f64::consts::TAU;
    if a > std::f64::consts::PI {
        a -= std::f64::consts::TAU;
    } else if a < -std::f64::consts::PI {
        a += std::f64::consts::TAU;
    }
    a
}
