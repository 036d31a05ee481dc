//! Geometric primitives, DH kinematics and the pose error metric.

pub mod geometry;
pub mod metric;
pub mod model;
pub mod transform;

pub use geometry::{angle_between, rotate_about_axis, signed_angle, wrap_angle, Vec3};
pub use metric::{cartesian_error, pose_mismatch, sanitize_pose, CartesianError};
pub use model::{dh_transform, forward_kinematics, DhRow, JointLimit, RobotKind, RobotModel};
pub use transform::Transform;
