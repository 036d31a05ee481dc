//! Hybrid inverse kinematics for 6-DOF and 7-DOF serial manipulators: FABRIK on a
//! reduced positional chain, a bounded quasi-Newton fallback, and analytic recovery of
//! the joint angles.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmark;
pub mod error;
pub mod fabrik;
pub mod io;
pub mod kinematics;
pub mod kuka;
pub mod solver;
pub mod sqp;
pub mod tracking;
pub mod ur5;

pub use error::{Error, Result};
pub use kinematics::{cartesian_error, CartesianError, JointLimit, RobotKind, RobotModel, Transform, Vec3};
pub use solver::{solve, ChainInit, IkQuery, IkResult, IkStatus, SolveMode, SolverConfig};
