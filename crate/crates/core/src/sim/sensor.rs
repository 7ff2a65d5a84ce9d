//! Synthetic LiDAR: a deterministic azimuth × elevation ray grid cast from
//! the UAV's world position, with hits transformed into the UGV body frame.

use crate::math::{rotate, Vec3};
use crate::modulation::SampleCloud;
use crate::sim::obstacles::{first_hit, ObstaclePrimitive};
use crate::sim::world::WorldState;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Ray-grid sensor model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorModel {
    pub azimuth_rays: usize,
    pub elevation_rays: usize,
    /// Elevation span, rad (symmetric grid between these bounds).
    pub elevation_min: f64,
    pub elevation_max: f64,
    /// Maximum return range, m.
    pub max_range: f64,
    /// Sweep rate, Hz.
    pub rate: f64,
    /// Inflation radius attached to emitted sample points, m.
    pub point_radius: f64,
}

impl Default for SensorModel {
    fn default() -> Self {
        Self {
            azimuth_rays: 64,
            elevation_rays: 16,
            elevation_min: -0.6,
            elevation_max: 0.6,
            max_range: 10.0,
            rate: 10.0,
            point_radius: 0.05,
        }
    }
}

impl SensorModel {
    pub fn validate(&self) -> Result<(), String> {
        if self.azimuth_rays < 1 || self.elevation_rays < 1 {
            return Err("ray counts must be at least 1".into());
        }
        if !(self.elevation_max >= self.elevation_min) {
            return Err("elevation_max must be ≥ elevation_min".into());
        }
        if !(self.max_range > 0.0) {
            return Err("max_range must be positive".into());
        }
        if !(self.rate > 0.0) {
            return Err("rate must be positive".into());
        }
        if !(self.point_radius > 0.0) {
            return Err("point_radius must be positive".into());
        }
        Ok(())
    }

    /// Ray directions of one sweep (unit vectors, world-aligned).
    pub fn ray_directions(&self) -> Vec<Vec3> {
        let mut dirs = Vec::with_capacity(self.azimuth_rays * self.elevation_rays);
        for ei in 0..self.elevation_rays {
            let el = if self.elevation_rays == 1 {
                0.5 * (self.elevation_min + self.elevation_max)
            } else {
                self.elevation_min
                    + (self.elevation_max - self.elevation_min) * ei as f64
                        / (self.elevation_rays - 1) as f64
            };
            let (sin_el, cos_el) = el.sin_cos();
            for ai in 0..self.azimuth_rays {
                let az = TAU * ai as f64 / self.azimuth_rays as f64;
                let (sin_az, cos_az) = az.sin_cos();
                dirs.push(Vec3::new(cos_el * cos_az, cos_el * sin_az, sin_el));
            }
        }
        dirs
    }
}

/// One instantaneous sweep: every first hit within range, expressed in the
/// UGV body frame `N`.
pub fn lidar_sample(
    world: &WorldState,
    obstacles: &[ObstaclePrimitive],
    sensor: &SensorModel,
) -> SampleCloud {
    let origin = world.uav.position;
    let ugv_rot_inv = world.ugv.orientation.inverse();
    let mut points = Vec::new();
    for dir in sensor.ray_directions() {
        if let Some(t) = first_hit(obstacles, &origin, &dir, sensor.max_range) {
            let hit_world = origin + t * dir;
            points.push(rotate(&ugv_rot_inv, &(hit_world - world.ugv.position)));
        }
    }
    SampleCloud::new(points, sensor.point_radius)
}
