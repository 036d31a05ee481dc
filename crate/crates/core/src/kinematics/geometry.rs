//! Vector helpers shared by the FABRIK engine and the analytic recovery code.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

const UNIT_TOLERANCE: f64 = 1e-12;

/// Reduces an angle to the principal interval `(-π, π]`.
pub fn wrap_angle(angle: f64) -> f64 {
    if angle > -PI && angle <= PI {
        return angle;
    }
    let wrapped = angle.rem_euclid(TAU);
    if wrapped > PI {
        wrapped - TAU
    } else {
        wrapped
    }
}

/// Rodrigues rotation of `v` about the unit axis `axis` by `theta`.
///
/// `R_u(θ) = cos θ · I + sin θ · [u]ₓ + (1 − cos θ) · u ⊗ u`
pub fn rotate_about_axis(axis: &Vec3, theta: f64, v: &Vec3) -> Result<Vec3> {
    let norm = axis.norm();
    if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::NonUnitAxis { norm });
    }
    Ok(rodrigues(axis, theta, v))
}

/// Unchecked Rodrigues rotation; callers guarantee `axis` is unit length.
#[inline]
pub(crate) fn rodrigues(axis: &Vec3, theta: f64, v: &Vec3) -> Vec3 {
    if theta == 0.0 {
        return *v;
    }
    let (s, c) = theta.sin_cos();
    v * c + axis.cross(v) * s + axis * (axis.dot(v) * (1.0 - c))
}

/// Rotation matrix form of [`rotate_about_axis`].
pub fn axis_angle_matrix(axis: &Vec3, theta: f64) -> Matrix3<f64> {
    let (s, c) = theta.sin_cos();
    let k = axis.cross_matrix();
    Matrix3::identity() * c + k * s + axis * axis.transpose() * (1.0 - c)
}

/// Signed angle from `a` to `b` measured about `reference`.
///
/// The magnitude is the angle between the two unit vectors, and the sign is that
/// of `⟨reference, a × b⟩` (zero counts as positive). The magnitude is evaluated
/// as `atan2(‖a × b‖, ⟨a, b⟩)`, which equals `arccos(clamp(⟨a, b⟩))` but keeps
/// full precision near 0 and π.
pub fn signed_angle(a: &Vec3, b: &Vec3, reference: &Vec3) -> f64 {
    let cross = a.cross(b);
    let magnitude = cross.norm().atan2(a.dot(b));
    if reference.dot(&cross) >= 0.0 {
        magnitude
    } else {
        -magnitude
    }
}

/// Unsigned angle between two vectors in `[0, π]`.
pub fn angle_between(a: &Vec3, b: &Vec3) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}

/// Clamps `x` to `[-1, 1]` before an `acos`/`asin`.
#[inline]
pub fn clamp_unit(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

/// Normalizes `v`, returning `None` when its norm is below `eps`.
#[inline]
pub fn try_normalize(v: &Vec3, eps: f64) -> Option<Vec3> {
    let n = v.norm();
    if n > eps && n.is_finite() {
        Some(v / n)
    } else {
        None
    }
}

/// A unit vector orthogonal to `v`: the normalized cross product of `v` with
/// whichever coordinate axis is least parallel to it (x̂ wins ties, then ŷ).
pub fn orthogonal_unit(v: &Vec3) -> Vec3 {
    let ax = v.x.abs();
    let ay = v.y.abs();
    let az = v.z.abs();
    let basis = if ax <= ay && ax <= az {
        Vec3::x()
    } else if ay <= az {
        Vec3::y()
    } else {
        Vec3::z()
    };
    v.cross(&basis).normalize()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn quarter_turn_about_z() {
        let v = rotate_about_axis(&Vec3::z(), FRAC_PI_2, &Vec3::x()).unwrap();
        assert_abs_diff_eq!(v, Vec3::y(), epsilon = 1e-12);
    }

    #[test]
    fn zero_angle_is_identity() {
        let u = Vec3::new(0.3, -0.4, 0.5).normalize();
        let v = Vec3::new(1.5, -2.0, 0.25);
        assert_eq!(rotate_about_axis(&u, 0.0, &v).unwrap(), v);
    }

    #[test]
    fn body_diagonal_cycles_axes() {
        // Oracle: the unit quaternion for (u, 2π/3) is (1/2, 1/2, 1/2, 1/2); applying
        // it by quaternion sandwich product maps x̂ → ŷ → ẑ → x̂.
        let u = Vec3::new(1.0, 1.0, 1.0) / 3f64.sqrt();
        let q = [0.5, 0.5, 0.5, 0.5];
        let quat_rotate = |v: Vec3| -> Vec3 {
            let (w, x, y, z) = (q[0], q[1], q[2], q[3]);
            let qv = Vec3::new(x, y, z);
            let t = qv.cross(&v) * 2.0;
            v + t * w + qv.cross(&t)
        };
        let theta = 2.0 * std::f64::consts::PI / 3.0;
        for (from, to) in [(Vec3::x(), Vec3::y()), (Vec3::y(), Vec3::z()), (Vec3::z(), Vec3::x())] {
            let got = rotate_about_axis(&u, theta, &from).unwrap();
            assert_abs_diff_eq!(got, to, epsilon = 1e-12);
            assert_abs_diff_eq!(got, quat_rotate(from), epsilon = 1e-12);
        }
    }

    #[test]
    fn non_unit_axis_is_rejected() {
        let err = rotate_about_axis(&Vec3::new(1.0, 1.0, 0.0), 0.1, &Vec3::x()).unwrap_err();
        assert!(matches!(err, Error::NonUnitAxis { .. }));
    }

    #[test]
    fn matrix_form_matches_vector_form() {
        let u = Vec3::new(-0.2, 0.9, 0.1).normalize();
        let v = Vec3::new(0.4, 0.1, -1.2);
        let m = axis_angle_matrix(&u, 1.1);
        assert_abs_diff_eq!(m * v, rodrigues(&u, 1.1, &v), epsilon = 1e-14);
    }

    #[test]
    fn signed_angle_cases() {
        assert_abs_diff_eq!(
            signed_angle(&Vec3::x(), &Vec3::y(), &Vec3::z()),
            FRAC_PI_2,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            signed_angle(&Vec3::x(), &Vec3::y(), &-Vec3::z()),
            -FRAC_PI_2,
            epsilon = 1e-15
        );
        let a = Vec3::new(0.6, 0.0, 0.8);
        assert_eq!(signed_angle(&a, &a, &Vec3::y()), 0.0);
    }

    #[test]
    fn wrap_angle_range() {
        assert_abs_diff_eq!(wrap_angle(3.0 * PI), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_angle(-3.0 * PI / 2.0), FRAC_PI_2, epsilon = 1e-12);
        assert_eq!(wrap_angle(0.25), 0.25);
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
    }

    #[test]
    fn orthogonal_unit_is_orthogonal() {
        for v in [
            Vec3::z(),
            Vec3::x(),
            Vec3::new(1.0, 1.0, 1.0),
            Vec3::new(0.0, -2.0, 0.1),
        ] {
            let o = orthogonal_unit(&v);
            assert_abs_diff_eq!(o.norm(), 1.0, epsilon = 1e-15);
            assert!(o.dot(&v).abs() < 1e-14);
        }
        assert_abs_diff_eq!(orthogonal_unit(&Vec3::z()), Vec3::y(), epsilon = 1e-15);
    }
}
