//! Analytic obstacle primitives: signed distance and first-hit ray casting.
//!
//! Primitives are static in the world frame. Signed distances are exact
//! (negative inside), which the harness uses for clearance accounting; ray
//! casting is the closed-form first intersection, used by the synthetic
//! LiDAR.

use crate::math::Vec3;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObstaclePrimitive {
    Sphere {
        center: Vec3,
        radius: f64,
    },
    /// Finite cylinder with a vertical axis.
    VerticalCylinder {
        center_x: f64,
        center_y: f64,
        radius: f64,
        z_min: f64,
        z_max: f64,
    },
    /// Axis-aligned box given by opposite corners.
    #[serde(rename = "box")]
    Cuboid {
        min: Vec3,
        max: Vec3,
    },
}

impl ObstaclePrimitive {
    /// Extents must be positive and corners ordered.
    pub fn validate(&self) -> Result<(), String> {
        match self {
            ObstaclePrimitive::Sphere { radius, .. } => {
                if !(*radius > 0.0) {
                    return Err(format!("sphere radius must be positive, got {radius}"));
                }
            }
            ObstaclePrimitive::VerticalCylinder {
                radius,
                z_min,
                z_max,
                ..
            } => {
                if !(*radius > 0.0) {
                    return Err(format!("cylinder radius must be positive, got {radius}"));
                }
                if !(z_max > z_min) {
                    return Err(format!("cylinder z range [{z_min}, {z_max}] is empty"));
                }
            }
            ObstaclePrimitive::Cuboid { min, max } => {
                if !(max.x > min.x && max.y > min.y && max.z > min.z) {
                    return Err("box corners must satisfy min < max componentwise".into());
                }
            }
        }
        Ok(())
    }

    /// Exact signed distance to the surface; negative inside.
    pub fn signed_distance(&self, p: &Vec3) -> f64 {
        match self {
            ObstaclePrimitive::Sphere { center, radius } => (p - center).norm() - radius,
            ObstaclePrimitive::VerticalCylinder {
                center_x,
                center_y,
                radius,
                z_min,
                z_max,
            } => {
                let radial =
                    ((p.x - center_x).powi(2) + (p.y - center_y).powi(2)).sqrt() - radius;
                let half_height = 0.5 * (z_max - z_min);
                let axial = (p.z - 0.5 * (z_min + z_max)).abs() - half_height;
                let outside =
                    (radial.max(0.0).powi(2) + axial.max(0.0).powi(2)).sqrt();
                outside + radial.max(axial).min(0.0)
            }
            ObstaclePrimitive::Cuboid { min, max } => {
                let center = 0.5 * (min + max);
                let half = 0.5 * (max - min);
                let q = (p - center).abs() - half;
                let outside = Vec3::new(q.x.max(0.0), q.y.max(0.0), q.z.max(0.0)).norm();
                outside + q.x.max(q.y).max(q.z).min(0.0)
            }
        }
    }

    /// Distance along the unit direction `dir` to the first surface hit, if
    /// any within `max_range`. An origin inside the primitive reports the
    /// exit point.
    pub fn ray_hit(&self, origin: &Vec3, dir: &Vec3, max_range: f64) -> Option<f64> {
        const T_EPS: f64 = 1e-12;
        let t = match self {
            ObstaclePrimitive::Sphere { center, radius } => {
                let oc = origin - center;
                let b = oc.dot(dir);
                let c = oc.norm_squared() - radius * radius;
                let disc = b * b - c;
                if disc < 0.0 {
                    return None;
                }
                let sqrt_disc = disc.sqrt();
                let t_near = -b - sqrt_disc;
                let t_far = -b + sqrt_disc;
                first_valid(t_near, t_far)?
            }
            ObstaclePrimitive::VerticalCylinder {
                center_x,
                center_y,
                radius,
                z_min,
                z_max,
            } => {
                let mut best: Option<f64> = None;
                // Lateral surface: 2D quadratic in xy.
                let ox = origin.x - center_x;
                let oy = origin.y - center_y;
                let a = dir.x * dir.x + dir.y * dir.y;
                if a > 0.0 {
                    let b = (ox * dir.x + oy * dir.y) / a;
                    let c = (ox * ox + oy * oy - radius * radius) / a;
                    let disc = b * b - c;
                    if disc >= 0.0 {
                        let sqrt_disc = disc.sqrt();
                        for t in [-b - sqrt_disc, -b + sqrt_disc] {
                            if t > T_EPS {
                                let z = origin.z + t * dir.z;
                                if z >= *z_min && z <= *z_max {
                                    best = Some(best.map_or(t, |b: f64| b.min(t)));
                                    break;
                                }
                            }
                        }
                    }
                }
                // End caps as disks.
                if dir.z.abs() > 0.0 {
                    for plane_z in [*z_min, *z_max] {
                        let t = (plane_z - origin.z) / dir.z;
                        if t > T_EPS {
                            let x = origin.x + t * dir.x - center_x;
                            let y = origin.y + t * dir.y - center_y;
                            if x * x + y * y <= radius * radius {
                                best = Some(best.map_or(t, |b: f64| b.min(t)));
                            }
                        }
                    }
                }
                best?
            }
            ObstaclePrimitive::Cuboid { min, max } => {
                let mut t_near = f64::NEG_INFINITY;
                let mut t_far = f64::INFINITY;
                for axis in 0..3 {
                    let o = origin[axis];
                    let d = dir[axis];
                    if d.abs() < 1e-15 {
                        if o < min[axis] || o > max[axis] {
                            return None;
                        }
                        continue;
                    }
                    let t1 = (min[axis] - o) / d;
                    let t2 = (max[axis] - o) / d;
                    let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
                    t_near = t_near.max(lo);
                    t_far = t_far.min(hi);
                }
                if t_near > t_far {
                    return None;
                }
                first_valid(t_near, t_far)?
            }
        };
        (t <= max_range).then_some(t)
    }
}

fn first_valid(t_near: f64, t_far: f64) -> Option<f64> {
    const T_EPS: f64 = 1e-12;
    if t_near > T_EPS {
        Some(t_near)
    } else if t_far > T_EPS {
        Some(t_far)
    } else {
        None
    }
}

/// Minimum signed distance over a set of primitives (+∞ for an empty set).
pub fn min_signed_distance(obstacles: &[ObstaclePrimitive], p: &Vec3) -> f64 {
    obstacles
        .iter()
        .map(|o| o.signed_distance(p))
        .fold(f64::INFINITY, f64::min)
}

/// First hit over a set of primitives.
pub fn first_hit(
    obstacles: &[ObstaclePrimitive],
    origin: &Vec3,
    dir: &Vec3,
    max_range: f64,
) -> Option<f64> {
    let mut best: Option<f64> = None;
    for o in obstacles {
        if let Some(t) = o.ray_hit(origin, dir, max_range) {
            best = Some(best.map_or(t, |b| b.min(t)));
        }
    }
    best
}
