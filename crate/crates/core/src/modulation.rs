//! Sample-based velocity modulation built from one sweep of raw obstacle
//! points.
//!
//! Every sample point is treated as a small spherical obstacle. A distance-
//! weighted sum of point-to-robot unit vectors gives the reference direction
//! `r(ξ)` (the normal of a virtual weighted obstacle); a Householder basis
//! aligned with `r` and a pair of eigenvalues assemble the modulation matrix
//! `M = E·D·E` that scales velocity components normal and tangential to the
//! virtual obstacle. Far from obstacles `M → I`; near contact the normal
//! eigenvalue drops to -1, reversing approach velocity.
//!
//! All functions are pure and deterministic for a fixed point order.

use crate::math::{Mat3, Vec3};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

/// One sweep of obstacle sample points expressed in frame `N`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleCloud {
    /// Obstacle samples, m. Order is part of the value: reductions run in
    /// this order so results are bitwise-reproducible.
    pub points: Vec<Vec3>,
    /// Nominal inflation radius δ of each sample point, m.
    pub point_radius: f64,
}

impl SampleCloud {
    pub fn new(points: Vec<Vec3>, point_radius: f64) -> Self {
        Self {
            points,
            point_radius,
        }
    }

    pub fn empty() -> Self {
        Self::new(Vec::new(), 0.05)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Parameters of the weighted reference direction and eigenvalue blending.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulationParams {
    /// Radius of the sphere enclosing the robot, m.
    pub robot_radius: f64,
    /// Distance scale `D^scal` of the point weights, m.
    pub dist_scale: f64,
    /// Exponent applied to the scaled inverse distance.
    pub dist_power: f64,
    /// Cap on the summed raw weights.
    pub max_weight: f64,
    /// Exponent of the velocity-alignment weight.
    pub align_power: f64,
}

impl Default for ModulationParams {
    fn default() -> Self {
        Self {
            robot_radius: 0.3,
            dist_scale: 0.5,
            dist_power: 2.0,
            max_weight: 3.0,
            align_power: 2.0,
        }
    }
}

/// Output of [`modulation_matrix`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModulationResult {
    /// Weighted reference direction `r(ξ)`.
    pub r: Vec3,
    /// Symmetric orthonormal basis whose first column is `r/‖r‖`.
    pub basis: Mat3,
    /// `diag(λ̃_r, λ̃_t, λ̃_t)`.
    pub diag: Mat3,
    /// The modulation matrix `M = basis · diag · basis`.
    pub matrix: Mat3,
    /// True if any sample point lies within the robot's enclosing radius.
    pub collided: bool,
}

impl ModulationResult {
    /// Identity modulation (no obstacles, or perfectly cancelled direction).
    pub fn identity(collided: bool) -> Self {
        Self {
            r: Vec3::zeros(),
            basis: Mat3::identity(),
            diag: Mat3::identity(),
            matrix: Mat3::identity(),
            collided,
        }
    }

    /// Normal-direction eigenvalue λ̃_r.
    pub fn lambda_r(&self) -> f64 {
        self.diag[(0, 0)]
    }

    /// Tangential eigenvalue λ̃_t.
    pub fn lambda_t(&self) -> f64 {
        self.diag[(1, 1)]
    }
}

#[inline]
fn powf_fast(x: f64, e: f64) -> f64 {
    // dist_power/align_power default to 2; skip the libm call on that path.
    if e == 2.0 {
        x * x
    } else if e == 1.0 {
        x
    } else {
        x.powf(e)
    }
}

/// Distance-weighted sum of unit vectors from each sample point to the robot.
///
/// Weights are `ŵ_o = (D^scal / D_o)^s` with `D_o = ‖ξ-ξ_o‖ - R`, normalized
/// by `min(Σŵ, w^max)` whenever that sum exceeds one. A point at or inside
/// the inflated radius (`D_o ≤ 0`) sets the collision flag and contributes
/// the capped weight `w^max`, keeping the output finite.
pub fn weighted_reference_direction(
    xi: &Vec3,
    cloud: &SampleCloud,
    params: &ModulationParams,
) -> (Vec3, bool) {
    let mut weighted_dirs = Vec3::zeros();
    let mut raw_sum = 0.0;
    let mut collided = false;
    for point in &cloud.points {
        let offset = xi - point;
        let dist = offset.norm();
        let gap = dist - params.robot_radius;
        let w = if gap > 0.0 {
            powf_fast(params.dist_scale / gap, params.dist_power)
        } else {
            collided = true;
            params.max_weight
        };
        if dist > 0.0 {
            weighted_dirs += (w / dist) * offset;
        }
        raw_sum += w;
    }
    let capped = raw_sum.min(params.max_weight);
    let r = if capped > 1.0 {
        weighted_dirs / capped
    } else {
        weighted_dirs
    };
    (r, collided)
}

/// Householder basis with its first column aligned with `r`.
///
/// Fails when `r` is zero; the caller short-circuits that case to identity
/// modulation. The result is symmetric and orthonormal, so it is its own
/// inverse.
pub fn gen_basis_matrix(r: &Vec3) -> Result<Mat3> {
    let norm = r.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "basis requires a nonzero finite reference direction, got norm {norm}"
        )));
    }
    let rn = r / norm;
    let e1 = Vec3::x();
    // Choose the sign that keeps w away from zero (non-collinear guarantee).
    let w = if rn.x > 0.0 { rn + e1 } else { rn - e1 };
    let mut basis = Mat3::identity() - (2.0 / w.norm_squared()) * (w * w.transpose());
    if r.dot(&(basis * e1)) < 0.0 {
        basis = -basis;
    }
    Ok(basis)
}

/// Eigenvalues `(λ̃_r, λ̃_t)` for the normal and tangential directions.
///
/// The raw values depend only on `‖r‖`; approach direction flips the sign of
/// the normal eigenvalue when the robot is already moving away from a close
/// virtual obstacle, and the alignment weight relaxes both eigenvalues toward
/// one (no modulation) as the velocity points away from the obstacle.
pub fn eigenvalues(r: &Vec3, v_init: &Vec3, params: &ModulationParams) -> (f64, f64) {
    let r_norm = r.norm();
    let mut lambda_r = if r_norm < 2.0 {
        (FRAC_PI_2 * r_norm).cos()
    } else {
        -1.0
    };
    let inner = r.dot(v_init);
    if inner > 0.0 && r_norm > 1.0 {
        lambda_r = -lambda_r;
    }
    let lambda_t = if r_norm < 1.0 {
        1.0 + (FRAC_PI_2 * r_norm).sin()
    } else {
        2.0 * (PI / (2.0 * r_norm)).sin()
    };

    let p = if r_norm > 1.0 { 1.0 / r_norm } else { 1.0 };
    let v_norm = v_init.norm();
    let align = if v_norm > 0.0 && r_norm > 0.0 {
        powf_fast((inner / (r_norm * v_norm)).max(0.0), params.align_power)
    } else {
        0.0
    };
    let gate = if align > 0.0 { 1.0 } else { 0.0 };

    let lambda_t_tilde = p * align + (1.0 - p * align) * lambda_t;
    let lambda_r_tilde = gate * p * lambda_t_tilde + (1.0 - gate * p) * lambda_r;
    (lambda_r_tilde, lambda_t_tilde)
}

/// Assembles the full modulation matrix at position `xi` for the nominal
/// velocity `v_init`.
pub fn modulation_matrix(
    xi: &Vec3,
    v_init: &Vec3,
    cloud: &SampleCloud,
    params: &ModulationParams,
) -> ModulationResult {
    let (r, collided) = weighted_reference_direction(xi, cloud, params);
    if r.norm_squared() == 0.0 {
        return ModulationResult::identity(collided);
    }
    let basis = gen_basis_matrix(&r).expect("nonzero reference direction");
    let (lambda_r, lambda_t) = eigenvalues(&r, v_init, params);
    let diag = Mat3::from_diagonal(&Vec3::new(lambda_r, lambda_t, lambda_t));
    let matrix = basis * diag * basis;
    ModulationResult {
        r,
        basis,
        diag,
        matrix,
        collided,
    }
}

/// Modulated velocity `M(ξ, v)·v`.
pub fn modulate(
    xi: &Vec3,
    v_init: &Vec3,
    cloud: &SampleCloud,
    params: &ModulationParams,
) -> Vec3 {
    modulation_matrix(xi, v_init, cloud, params).matrix * v_init
}
