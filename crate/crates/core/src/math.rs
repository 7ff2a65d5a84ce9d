//! Shared 3D vector, quaternion, and skew-symmetric algebra.
//!
//! Thin layer over `nalgebra`: type aliases pin the scalar to `f64`, and the
//! free functions fix the conventions used everywhere else in the crate.
//!
//! Conventions (stated once, used everywhere):
//! - Quaternions are Hamilton, scalar-first `(w, x, y, z)`, right-handed.
//! - A state quaternion maps body-frame vectors into the parent frame
//!   (body-to-parent semantics), so `rotate(q, v_body) = v_parent`.
//! - SI units throughout: meters, seconds, radians.

use nalgebra::{Matrix3, Quaternion, Rotation3, UnitQuaternion, Vector3};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;
pub type Quat = Quaternion<f64>;
pub type UnitQuat = UnitQuaternion<f64>;

/// Skew-symmetric (cross-product) matrix: `skew(v) * u == v.cross(u)`.
pub fn skew(v: &Vec3) -> Mat3 {
    Mat3::new(
        0.0, -v.z, v.y, //
        v.z, 0.0, -v.x, //
        -v.y, v.x, 0.0,
    )
}

/// Embeds a vector as a pure quaternion (w = 0).
pub fn pure(v: &Vec3) -> Quat {
    Quat::new(0.0, v.x, v.y, v.z)
}

/// Hamilton product of two (not necessarily unit) quaternions.
pub fn hamilton(a: &Quat, b: &Quat) -> Quat {
    a * b
}

/// Rotates `v` by the sandwich product `q ⊙ v ⊙ q⁻¹`.
pub fn rotate(q: &UnitQuat, v: &Vec3) -> Vec3 {
    q.transform_vector(v)
}

/// Unit quaternion from a rotation matrix with orthonormal columns.
pub fn quat_from_rotation(r: &Mat3) -> UnitQuat {
    UnitQuat::from_rotation_matrix(&Rotation3::from_matrix_unchecked(*r))
}

/// True iff every component is finite.
pub fn vec3_finite(v: &Vec3) -> bool {
    v.iter().all(|c| c.is_finite())
}

/// True iff every coefficient is finite.
pub fn quat_finite(q: &Quat) -> bool {
    q.coords.iter().all(|c| c.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn rng() -> StdRng {
        StdRng::seed_from_u64(0x5e3_0a01)
    }

    fn random_vec(rng: &mut StdRng) -> Vec3 {
        Vec3::new(
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
        )
    }

    fn random_unit_quat(rng: &mut StdRng) -> UnitQuat {
        let axis = random_vec(rng);
        if axis.norm() < 1e-9 {
            return UnitQuat::identity();
        }
        UnitQuat::from_axis_angle(
            &nalgebra::Unit::new_normalize(axis),
            rng.gen_range(-PI..PI),
        )
    }

    #[test]
    fn skew_of_zero_is_zero() {
        assert_eq!(skew(&Vec3::zeros()), Mat3::zeros());
    }

    #[test]
    fn skew_canonical_cross_product() {
        let s = skew(&Vec3::new(1.0, 0.0, 0.0));
        assert_relative_eq!(s * Vec3::new(0.0, 1.0, 0.0), Vec3::new(0.0, 0.0, 1.0));
    }

    #[test]
    fn skew_matches_cross_product_oracle() {
        let mut rng = rng();
        for _ in 0..200 {
            let v = random_vec(&mut rng);
            let u = random_vec(&mut rng);
            let via_matrix = skew(&v) * u;
            let via_cross = v.cross(&u);
            assert_relative_eq!(via_matrix, via_cross, epsilon = 1e-12);
        }
    }

    #[test]
    fn skew_is_antisymmetric() {
        let mut rng = rng();
        for _ in 0..100 {
            let s = skew(&random_vec(&mut rng));
            assert_eq!(s.transpose(), -s);
        }
    }

    #[test]
    fn hamilton_identity_and_inverse() {
        let mut rng = rng();
        for _ in 0..100 {
            let q = random_unit_quat(&mut rng);
            let id = Quat::new(1.0, 0.0, 0.0, 0.0);
            assert_relative_eq!(hamilton(&id, q.quaternion()), *q.quaternion());
            let qinv = q.inverse();
            let prod = hamilton(q.quaternion(), qinv.quaternion());
            assert_relative_eq!(prod, id, epsilon = 1e-12);
        }
    }

    #[test]
    fn hamilton_rotates_x_to_y_about_z() {
        // 90° about z applied as the sandwich product.
        let q = UnitQuat::from_axis_angle(&Vec3::z_axis(), FRAC_PI_2);
        let v = pure(&Vec3::new(1.0, 0.0, 0.0));
        let rotated = hamilton(&hamilton(q.quaternion(), &v), q.inverse().quaternion());
        assert_relative_eq!(rotated.w, 0.0, epsilon = 1e-12);
        assert_relative_eq!(rotated.i, 0.0, epsilon = 1e-12);
        assert_relative_eq!(rotated.j, 1.0, epsilon = 1e-12);
        assert_relative_eq!(rotated.k, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn hamilton_is_associative() {
        let mut rng = rng();
        for _ in 0..200 {
            let a = *random_unit_quat(&mut rng).quaternion();
            let b = *random_unit_quat(&mut rng).quaternion();
            let c = *random_unit_quat(&mut rng).quaternion();
            let left = hamilton(&hamilton(&a, &b), &c);
            let right = hamilton(&a, &hamilton(&b, &c));
            assert_relative_eq!(left, right, epsilon = 1e-12);
        }
    }

    #[test]
    fn rotate_identity_is_noop() {
        let v = Vec3::new(0.3, -1.2, 2.0);
        assert_eq!(rotate(&UnitQuat::identity(), &v), v);
    }

    #[test]
    fn rotate_half_turn_about_x_flips_z() {
        let q = UnitQuat::from_axis_angle(&Vec3::x_axis(), PI);
        let out = rotate(&q, &Vec3::new(0.0, 0.0, 1.0));
        assert_relative_eq!(out, Vec3::new(0.0, 0.0, -1.0), epsilon = 1e-12);
    }

    #[test]
    fn rotate_matches_matrix_and_sandwich_oracles() {
        let mut rng = rng();
        for _ in 0..200 {
            let q = random_unit_quat(&mut rng);
            let v = random_vec(&mut rng);
            let out = rotate(&q, &v);
            // Matrix-from-quaternion oracle.
            let m = q.to_rotation_matrix();
            assert_relative_eq!(out, m * v, epsilon = 1e-12);
            // Sandwich-product oracle built from hamilton() directly.
            let s = hamilton(&hamilton(q.quaternion(), &pure(&v)), q.inverse().quaternion());
            assert_relative_eq!(out, Vec3::new(s.i, s.j, s.k), epsilon = 1e-12);
        }
    }

    #[test]
    fn rotate_preserves_norms_and_angles() {
        let mut rng = rng();
        for _ in 0..200 {
            let q = random_unit_quat(&mut rng);
            let u = random_vec(&mut rng);
            let v = random_vec(&mut rng);
            let (ru, rv) = (rotate(&q, &u), rotate(&q, &v));
            assert_relative_eq!(ru.norm(), u.norm(), epsilon = 1e-9);
            assert_relative_eq!(ru.dot(&rv), u.dot(&v), epsilon = 1e-9, max_relative = 1e-9);
        }
    }

    #[test]
    fn rotation_matrix_constructors_are_orthonormal() {
        let mut rng = rng();
        for _ in 0..100 {
            let q = random_unit_quat(&mut rng);
            let m: Mat3 = *q.to_rotation_matrix().matrix();
            assert_relative_eq!(m.transpose() * m, Mat3::identity(), epsilon = 1e-9);
            assert_relative_eq!(m.determinant(), 1.0, epsilon = 1e-9);
            // Round trip through quat_from_rotation.
            let q2 = quat_from_rotation(&m);
            assert_relative_eq!(
                rotate(&q2, &Vec3::x()),
                rotate(&q, &Vec3::x()),
                epsilon = 1e-9
            );
        }
    }
}
