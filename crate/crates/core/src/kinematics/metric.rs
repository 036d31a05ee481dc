use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::model::RobotModel;
use super::transform::Transform;
use crate::error::{Error, Result};

/// Rotations within this deviation are used as given.
pub const ORTHONORMAL_TOLERANCE: f64 = 1e-9;
/// Rotations up to this deviation are projected onto SO(3); beyond it they are rejected.
pub const REPAIRABLE_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CartesianError {
    pub eps_pos: f64,
    pub eps_rot: f64,
}

impl CartesianError {
    /// `D = ε_rot + ε_pos` (radians and meters summed as-is).
    pub fn mismatch(&self) -> f64 {
        self.eps_rot + self.eps_pos
    }
}

/// Position distance and geodesic rotation angle between two poses.
///
/// The angle of `R = R_tempᵀ R_des` is `arccos((tr R − 1) / 2)`; it is computed as
/// `atan2(‖vee(R − Rᵀ)‖ / 2, (tr R − 1) / 2)`, the same quantity without the
/// `arccos` precision loss near zero.
pub fn cartesian_error(t_temp: &Transform, t_des: &Transform) -> CartesianError {
    let r = t_temp.rotation.transpose() * t_des.rotation;
    let cos = (r.trace() - 1.0) / 2.0;
    let sin = 0.5 * nalgebra::Vector3::new(r[(2, 1)] - r[(1, 2)], r[(0, 2)] - r[(2, 0)], r[(1, 0)] - r[(0, 1)]).norm();
    CartesianError {
        eps_pos: (t_temp.translation - t_des.translation).norm(),
        eps_rot: sin.atan2(cos),
    }
}

/// `D(Θ)` for a joint vector against a desired pose.
pub fn pose_mismatch(model: &RobotModel, theta: &[f64], t_des: &Transform) -> Result<f64> {
    let fk = model.forward_kinematics(theta)?;
    Ok(cartesian_error(&fk, t_des).mismatch())
}

/// `‖RᵀR − I‖_∞`, taken as the largest absolute entry.
pub fn orthonormality_deviation(r: &Matrix3<f64>) -> f64 {
    (r.transpose() * r - Matrix3::identity()).amax()
}

/// Nearest rotation in the Frobenius sense (`U Vᵀ` from the SVD).
pub fn polar_projection(r: &Matrix3<f64>) -> Option<Matrix3<f64>> {
    let svd = r.svd(true, true);
    let p = svd.u? * svd.v_t?;
    (p.determinant() > 0.0).then_some(p)
}

/// Validates an incoming pose: near-orthonormal rotations are projected onto SO(3),
/// larger deviations and reflections are rejected.
pub fn sanitize_pose(t: &Transform) -> Result<Transform> {
    if !t.is_finite() {
        return Err(Error::InvalidInput("pose contains a non-finite entry".into()));
    }
    let deviation = orthonormality_deviation(&t.rotation);
    if deviation > REPAIRABLE_TOLERANCE {
        return Err(Error::InvalidPose {
            deviation,
            limit: REPAIRABLE_TOLERANCE,
        });
    }
    let rotation = if deviation <= ORTHONORMAL_TOLERANCE {
        t.rotation
    } else {
        polar_projection(&t.rotation).ok_or(Error::InvalidPose {
            deviation,
            limit: REPAIRABLE_TOLERANCE,
        })?
    };
    if rotation.determinant() < 0.0 {
        return Err(Error::InvalidPose {
            deviation: 2.0,
            limit: REPAIRABLE_TOLERANCE,
        });
    }
    Ok(Transform::new(rotation, t.translation))
}
