//! Declarative scenario files: a JSON tree mirroring the simulation inputs,
//! with schema versioning, semantic validation, and seeded random map
//! generation.

use crate::math::Vec3;
use crate::modulation::ModulationParams;
use crate::mpc::MpcConfig;
use crate::sim::obstacles::ObstaclePrimitive;
use crate::sim::sensor::SensorModel;
use crate::sim::ugv::UgvProgram;
use crate::sim::world::TaskSpec;
use crate::trajectory::TrajectoryParams;
use crate::{Error, Result};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Current scenario schema version. Any format change bumps this.
pub const SCENARIO_SCHEMA_VERSION: u32 = 1;

fn default_version() -> u32 {
    SCENARIO_SCHEMA_VERSION
}

fn default_clearance() -> f64 {
    0.1
}

fn default_control_rate() -> f64 {
    100.0
}

fn default_sim_dt() -> f64 {
    1e-3
}

/// Axis-aligned map bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub bounds_min: Vec3,
    pub bounds_max: Vec3,
}

impl MapSpec {
    pub fn extent(&self) -> Vec3 {
        self.bounds_max - self.bounds_min
    }
}

/// Obstacle field: explicit primitives, a random field, or both.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObstacleFieldSpec {
    pub explicit: Vec<ObstaclePrimitive>,
    pub random: Option<RandomObstacleSpec>,
}

/// Random obstacle field, regenerated per seed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RandomObstacleSpec {
    pub count: usize,
    /// Cylinder/sphere radii drawn uniformly from this range, m.
    pub radius_min: f64,
    pub radius_max: f64,
    /// Fraction of spheres (the rest are full-height cylinders).
    pub sphere_fraction: f64,
    /// Obstacles keep at least this margin from both start positions, m.
    pub start_clear_radius: f64,
}

impl Default for RandomObstacleSpec {
    fn default() -> Self {
        Self {
            count: 0,
            radius_min: 0.3,
            radius_max: 0.8,
            sphere_fraction: 0.0,
            start_clear_radius: 1.2,
        }
    }
}

/// UGV start pose and motion program.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UgvSpec {
    /// Start pose `[x, y, yaw]`.
    #[serde(default)]
    pub start: [f64; 3],
    pub program: UgvProgram,
}

/// Optional robustness knobs; all default to off.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobustnessKnobs {
    /// Actuation delay in whole control ticks.
    pub input_delay_ticks: usize,
    /// Gaussian noise on the measured specific force, m/s² (1σ per axis).
    pub imu_accel_noise_std: f64,
    /// Gaussian noise on the measured body rate, rad/s (1σ per axis).
    pub imu_gyro_noise_std: f64,
}

/// Full scenario description: world, vehicles, task, sensor, and tuning.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    #[serde(default = "default_version")]
    pub version: u32,
    #[serde(default)]
    pub name: String,
    pub map: MapSpec,
    #[serde(default)]
    pub obstacles: ObstacleFieldSpec,
    pub ugv: UgvSpec,
    pub task: TaskSpec,
    #[serde(default)]
    pub sensor: SensorModel,
    /// UAV start position in frame `N`; defaults to the task goal at t = 0.
    #[serde(default)]
    pub uav_start: Option<Vec3>,
    /// Trial length, s.
    pub duration: f64,
    /// A trial fails if clearance (inflated by the robot radius) ever drops
    /// to this value or below, m.
    #[serde(default = "default_clearance")]
    pub success_clearance: f64,
    #[serde(default)]
    pub seed: u64,
    /// Tracker re-solve rate, Hz.
    #[serde(default = "default_control_rate")]
    pub control_rate: f64,
    /// Ground-truth physics step, s.
    #[serde(default = "default_sim_dt")]
    pub sim_dt: f64,
    #[serde(default)]
    pub knobs: RobustnessKnobs,
    #[serde(default)]
    pub planner: TrajectoryParams,
    #[serde(default)]
    pub modulation: ModulationParams,
    #[serde(default)]
    pub mpc: MpcConfig,
}

impl ScenarioSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ScenarioSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// UAV start position in frame `N`.
    pub fn uav_start_position(&self) -> Vec3 {
        self.uav_start.unwrap_or_else(|| self.task.goal(0.0))
    }

    /// Semantic validation with dotted field paths in every error.
    pub fn validate(&self) -> Result<()> {
        if self.version != SCENARIO_SCHEMA_VERSION {
            return Err(Error::invalid_scenario(
                "version",
                format!(
                    "unsupported schema version {} (expected {SCENARIO_SCHEMA_VERSION})",
                    self.version
                ),
            ));
        }
        let ext = self.map.extent();
        if !(ext.x > 0.0 && ext.y > 0.0 && ext.z > 0.0) {
            return Err(Error::invalid_scenario(
                "map.bounds_max",
                "map bounds must enclose a positive volume",
            ));
        }
        for (i, o) in self.obstacles.explicit.iter().enumerate() {
            o.validate()
                .map_err(|m| Error::invalid_scenario(format!("obstacles.explicit[{i}]"), m))?;
        }
        if let Some(r) = &self.obstacles.random {
            if !(r.radius_min > 0.0 && r.radius_max >= r.radius_min) {
                return Err(Error::invalid_scenario(
                    "obstacles.random.radius_min",
                    "radii must satisfy 0 < radius_min ≤ radius_max",
                ));
            }
            if !(0.0..=1.0).contains(&r.sphere_fraction) {
                return Err(Error::invalid_scenario(
                    "obstacles.random.sphere_fraction",
                    "must lie in [0, 1]",
                ));
            }
            if !(r.start_clear_radius >= 0.0) {
                return Err(Error::invalid_scenario(
                    "obstacles.random.start_clear_radius",
                    "must be non-negative",
                ));
            }
        }
        self.ugv
            .program
            .validate()
            .map_err(|m| Error::invalid_scenario("ugv.program", m))?;
        self.task
            .validate()
            .map_err(|m| Error::invalid_scenario("task", m))?;
        self.sensor
            .validate()
            .map_err(|m| Error::invalid_scenario("sensor", m))?;
        if !(self.duration > 0.0) {
            return Err(Error::invalid_scenario(
                "duration",
                "must be a positive number of seconds",
            ));
        }
        if !(self.success_clearance >= 0.0) {
            return Err(Error::invalid_scenario(
                "success_clearance",
                "must be non-negative",
            ));
        }
        if !(self.control_rate > 0.0) {
            return Err(Error::invalid_scenario("control_rate", "must be positive"));
        }
        if !(self.sim_dt > 0.0 && self.sim_dt <= 1e-3 + 1e-12) {
            return Err(Error::invalid_scenario(
                "sim_dt",
                "must lie in (0, 0.001] seconds",
            ));
        }
        if self.knobs.imu_accel_noise_std < 0.0 || self.knobs.imu_gyro_noise_std < 0.0 {
            return Err(Error::invalid_scenario(
                "knobs",
                "noise standard deviations must be non-negative",
            ));
        }
        self.planner
            .validate()
            .map_err(|e| Error::invalid_scenario("planner", e.to_string()))?;
        self.mpc
            .validate()
            .map_err(|e| Error::invalid_scenario("mpc", e.to_string()))?;
        if !(self.modulation.robot_radius > 0.0
            && self.modulation.dist_scale > 0.0
            && self.modulation.dist_power > 0.0
            && self.modulation.max_weight > 0.0
            && self.modulation.align_power > 0.0)
        {
            return Err(Error::invalid_scenario(
                "modulation",
                "all modulation parameters must be strictly positive",
            ));
        }
        // Start regions must be obstacle-free for the explicit field; the
        // random field enforces this during generation.
        let uav_start_world = self.uav_start_world();
        let margin = self.modulation.robot_radius + self.success_clearance;
        for (i, o) in self.obstacles.explicit.iter().enumerate() {
            if o.signed_distance(&uav_start_world) <= margin {
                return Err(Error::invalid_scenario(
                    format!("obstacles.explicit[{i}]"),
                    "obstacle intersects the UAV start region",
                ));
            }
            let ugv_pos = Vec3::new(self.ugv.start[0], self.ugv.start[1], 0.0);
            if o.signed_distance(&ugv_pos) <= 0.3 {
                return Err(Error::invalid_scenario(
                    format!("obstacles.explicit[{i}]"),
                    "obstacle intersects the UGV start region",
                ));
            }
        }
        Ok(())
    }

    /// UAV start position in world coordinates.
    pub fn uav_start_world(&self) -> Vec3 {
        let yaw = self.ugv.start[2];
        let rel = self.uav_start_position();
        let (s, c) = yaw.sin_cos();
        Vec3::new(
            self.ugv.start[0] + c * rel.x - s * rel.y,
            self.ugv.start[1] + s * rel.x + c * rel.y,
            rel.z,
        )
    }

    /// Materializes the obstacle field for this scenario's seed: explicit
    /// primitives plus the seeded random field (placements that intrude on
    /// either start region are rejected and redrawn).
    pub fn build_obstacles(&self) -> Vec<ObstaclePrimitive> {
        let mut obstacles = self.obstacles.explicit.clone();
        let Some(spec) = self.obstacles.random else {
            return obstacles;
        };
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed.wrapping_mul(0x9e37_79b9).wrapping_add(1));
        let uav_start = self.uav_start_world();
        let ugv_start = Vec3::new(self.ugv.start[0], self.ugv.start[1], 0.0);
        let (lo, hi) = (self.map.bounds_min, self.map.bounds_max);
        let mut placed = 0;
        let mut attempts = 0;
        while placed < spec.count && attempts < spec.count * 200 {
            attempts += 1;
            let radius = rng.gen_range(spec.radius_min..=spec.radius_max);
            let x = rng.gen_range(lo.x + radius..hi.x - radius);
            let y = rng.gen_range(lo.y + radius..hi.y - radius);
            let candidate = if rng.gen_range(0.0..1.0) < spec.sphere_fraction {
                let z = rng.gen_range((lo.z + radius).min(hi.z)..hi.z);
                ObstaclePrimitive::Sphere {
                    center: Vec3::new(x, y, z),
                    radius,
                }
            } else {
                ObstaclePrimitive::VerticalCylinder {
                    center_x: x,
                    center_y: y,
                    radius,
                    z_min: lo.z,
                    z_max: hi.z,
                }
            };
            if candidate.signed_distance(&uav_start) <= spec.start_clear_radius
                || candidate.signed_distance(&ugv_start) <= spec.start_clear_radius
            {
                continue;
            }
            obstacles.push(candidate);
            placed += 1;
        }
        obstacles
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn minimal_json() -> String {
        r#"{
            "map": {"bounds_min": [-6.0, -4.5, 0.0], "bounds_max": [6.0, 4.5, 3.0]},
            "ugv": {"start": [0.0, 0.0, 0.0], "program": {"type": "static"}},
            "task": {"type": "leader_follow", "offset": [1.0, 0.0, 0.5]},
            "duration": 5.0
        }"#
        .to_string()
    }

    #[test]
    fn minimal_scenario_parses_with_defaults() {
        let spec = ScenarioSpec::from_json(&minimal_json()).unwrap();
        assert_eq!(spec.version, SCENARIO_SCHEMA_VERSION);
        assert_eq!(spec.success_clearance, 0.1);
        assert_eq!(spec.sensor.azimuth_rays, 64);
        assert_eq!(spec.uav_start_position(), Vec3::new(1.0, 0.0, 0.5));
        assert_eq!(spec.mpc.horizon_steps, 20);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let json = minimal_json().replace("\"duration\": 5.0", "\"duration\": 5.0, \"junk\": 1");
        assert!(ScenarioSpec::from_json(&json).is_err());
    }

    #[test]
    fn negative_radius_names_the_field() {
        let json = minimal_json().replace(
            "\"duration\": 5.0",
            r#""duration": 5.0,
               "obstacles": {"explicit": [{"kind": "sphere", "center": [3.0, 0.0, 1.0], "radius": -0.5}]}"#,
        );
        let err = ScenarioSpec::from_json(&json).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("obstacles.explicit[0]"), "message: {msg}");
        assert!(msg.contains("radius"), "message: {msg}");
    }

    #[test]
    fn obstacle_on_start_is_rejected() {
        let json = minimal_json().replace(
            "\"duration\": 5.0",
            r#""duration": 5.0,
               "obstacles": {"explicit": [{"kind": "sphere", "center": [1.0, 0.0, 0.5], "radius": 0.3}]}"#,
        );
        let err = ScenarioSpec::from_json(&json).unwrap_err();
        assert!(err.to_string().contains("start region"));
    }

    #[test]
    fn random_field_is_seeded_and_respects_clearance() {
        let json = minimal_json().replace(
            "\"duration\": 5.0",
            r#""duration": 5.0, "seed": 9,
               "obstacles": {"random": {"count": 12}}"#,
        );
        let spec = ScenarioSpec::from_json(&json).unwrap();
        let a = spec.build_obstacles();
        let b = spec.build_obstacles();
        assert_eq!(a, b);
        assert_eq!(a.len(), 12);
        let uav_start = spec.uav_start_world();
        for o in &a {
            assert!(o.signed_distance(&uav_start) > 1.2);
        }
        // Different seed, different field.
        let mut other = spec.clone();
        other.seed = 10;
        assert_ne!(other.build_obstacles(), a);
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let json = minimal_json().replace("\"duration\": 5.0", "\"duration\": 5.0, \"version\": 3");
        let err = ScenarioSpec::from_json(&json).unwrap_err();
        assert!(err.to_string().contains("version"));
    }
}
