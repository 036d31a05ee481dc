//! Combined FABRIK + optimizer pipeline shared by both manipulators.
//!
//! Each robot module reduces the pose to one or more low-dimensional chain problems
//! ("branches"), solves them, and recovers full joint vectors. This module validates the
//! query, admits candidates whose pose mismatch is within tolerance, and picks the one
//! closest to the initial configuration in L1.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fabrik::{ChainState, PreBend};
use crate::kinematics::geometry::{wrap_angle, Vec3};
use crate::kinematics::metric::{cartesian_error, sanitize_pose, CartesianError};
use crate::kinematics::{RobotKind, RobotModel, Transform};
use crate::{kuka, sqp, ur5};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveMode {
    /// FABRIK up to `n_l` sweeps, then the optimizer.
    Combined,
    /// FABRIK alone, up to `n_max` sweeps.
    FabrikOnly,
}

/// How the reduced chain is laid out before iterating.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChainInit {
    /// Straight along the initial direction (UR5: `−x̂₁`; KUKA: `v_init`).
    Straight,
    /// Joint positions of the query's initial configuration.
    Warm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub eps_tol: f64,
    /// FABRIK sweep budget before switching to the optimizer.
    pub n_l: usize,
    /// FABRIK sweep cap in [`SolveMode::FabrikOnly`].
    pub n_max: usize,
    pub mode: SolveMode,
    pub opt_max_iters: usize,
    pub chain_init: ChainInit,
    pub pre_bend: Option<PreBend>,
    /// Initial chain direction for the KUKA reduction.
    pub v_init: Vec3,
    /// Cone half-angle of the KUKA shoulder ball joint.
    pub shoulder_cone: f64,
}

impl SolverConfig {
    pub fn for_robot(kind: RobotKind) -> Self {
        Self {
            eps_tol: 1e-6,
            n_l: match kind {
                RobotKind::Ur5 => 5,
                RobotKind::Kuka => 15,
            },
            n_max: 100,
            mode: SolveMode::Combined,
            opt_max_iters: sqp::DEFAULT_MAX_ITERS,
            chain_init: ChainInit::Straight,
            pre_bend: Some(PreBend::default()),
            v_init: Vec3::z(),
            shoulder_cone: std::f64::consts::PI,
        }
    }

    pub fn fabrik_only(kind: RobotKind, n_max: usize) -> Self {
        Self {
            mode: SolveMode::FabrikOnly,
            n_max,
            ..Self::for_robot(kind)
        }
    }

    pub fn with_n_l(mut self, n_l: usize) -> Self {
        self.n_l = n_l;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if !(self.eps_tol > 0.0 && self.eps_tol.is_finite()) {
            return bad(format!("eps_tol must be positive, got {}", self.eps_tol));
        }
        match self.mode {
            SolveMode::Combined if self.n_l == 0 => return bad("n_l must be at least 1".into()),
            SolveMode::FabrikOnly if self.n_max == 0 => return bad("n_max must be at least 1".into()),
            _ => {}
        }
        if (self.v_init.norm() - 1.0).abs() > 1e-9 {
            return bad("v_init must be a unit vector".into());
        }
        if !(self.shoulder_cone > 0.0) {
            return bad("shoulder cone half-angle must be positive".into());
        }
        Ok(())
    }

    /// Sweep cap for the FABRIK stage under the current mode.
    pub fn fabrik_cap(&self) -> usize {
        match self.mode {
            SolveMode::Combined => self.n_l,
            SolveMode::FabrikOnly => self.n_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IkQuery {
    pub t_des: Transform,
    pub theta_init: Vec<f64>,
}

impl IkQuery {
    pub fn new(t_des: Transform, theta_init: Vec<f64>) -> Self {
        Self { t_des, theta_init }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IkStatus {
    Solved,
    Unreachable,
    Failed,
}

impl IkStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            IkStatus::Solved => "Solved",
            IkStatus::Unreachable => "Unreachable",
            IkStatus::Failed => "Failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IkResult {
    pub status: IkStatus,
    /// Selected joint vector; the initial configuration when nothing was admitted.
    pub theta: Vec<f64>,
    /// Error of `theta` against the (sanitized) desired pose.
    pub error: CartesianError,
    /// Sweeps of the branch that produced `theta`, or the total over all branches when
    /// nothing was admitted.
    pub fabrik_iterations: usize,
    pub optimizer_used: bool,
    pub optimizer_iterations: usize,
    pub solve_time: f64,
    /// Every admitted joint vector, in enumeration order.
    pub candidates: Vec<Vec<f64>>,
}

impl IkResult {
    pub fn solved(&self) -> bool {
        self.status == IkStatus::Solved
    }

    /// FABRIK sweeps plus optimizer steps.
    pub fn total_steps(&self) -> usize {
        self.fabrik_iterations + self.optimizer_iterations
    }
}

/// What one reduced chain problem produced.
#[derive(Debug, Clone, Default)]
pub(crate) struct BranchOutcome {
    pub reachable: bool,
    pub fabrik_iterations: usize,
    pub optimizer_used: bool,
    pub optimizer_iterations: usize,
    pub candidates: Vec<Vec<f64>>,
}

/// A reduced chain and its target, as iterated by FABRIK.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedProblem {
    pub chain: ChainState,
    pub target: Vec3,
}

/// Solves an IK query with the combined (or FABRIK-only) algorithm.
///
/// Input problems (wrong joint count, initial configuration outside the limits, pose
/// rotation too far from orthonormal, invalid config) are errors; per-query outcomes are
/// reported through [`IkResult::status`].
pub fn solve(model: &RobotModel, query: &IkQuery, config: &SolverConfig) -> Result<IkResult> {
    let start = Instant::now();
    let (t_des, theta_init) = prepare(model, query, config)?;
    let branches = match model.kind() {
        RobotKind::Ur5 => ur5::solve_branches(model, &t_des, &theta_init, config),
        RobotKind::Kuka => kuka::solve_branches(model, &t_des, &theta_init, config),
    }?;
    let mut result = select(model, &t_des, &theta_init, config.eps_tol, &branches);
    result.solve_time = start.elapsed().as_secs_f64();
    Ok(result)
}

/// The reduced chain problems a query is turned into (UR5: one per reachable branch;
/// KUKA: one), with pre-bending applied as configured.
pub fn reduced_problems(model: &RobotModel, query: &IkQuery, config: &SolverConfig) -> Result<Vec<ReducedProblem>> {
    let (t_des, theta_init) = prepare(model, query, config)?;
    match model.kind() {
        RobotKind::Ur5 => ur5::reduced_problems(model, &t_des, &theta_init, config),
        RobotKind::Kuka => kuka::reduced_problems(model, &t_des, &theta_init, config).map(|p| p.into_iter().collect()),
    }
}

fn prepare(model: &RobotModel, query: &IkQuery, config: &SolverConfig) -> Result<(Transform, Vec<f64>)> {
    config.validate()?;
    model.check_dof(&query.theta_init)?;
    if !model.within_limits(&query.theta_init) {
        return Err(Error::InvalidInput(format!(
            "initial configuration {:?} lies outside the joint limits",
            query.theta_init
        )));
    }
    Ok((sanitize_pose(&query.t_des)?, query.theta_init.clone()))
}

fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

fn select(
    model: &RobotModel,
    t_des: &Transform,
    theta_init: &[f64],
    eps_tol: f64,
    branches: &[BranchOutcome],
) -> IkResult {
    let mut admitted: Vec<(Vec<f64>, CartesianError, usize)> = Vec::new();
    // The initial configuration competes too: when it already meets the tolerance it is
    // the exact L1 minimizer, whatever the branches reconstructed. It goes first so that
    // near-duplicates from the branches do not displace it.
    if let Some(b) = branches.iter().position(|b| b.reachable) {
        let theta: Vec<f64> = theta_init.iter().map(|t| wrap_angle(*t)).collect();
        if model.within_limits(&theta) {
            let err = cartesian_error(&model.fk_prefix(&theta, model.dof()), t_des);
            if err.mismatch() <= eps_tol {
                admitted.push((theta, err, b));
            }
        }
    }

    for (b, branch) in branches.iter().enumerate() {
        for raw in &branch.candidates {
            let theta: Vec<f64> = raw.iter().map(|t| wrap_angle(*t)).collect();
            if !model.within_limits(&theta) {
                continue;
            }
            if admitted.iter().any(|(t, _, _)| l1_distance(t, &theta) < 1e-9) {
                continue;
            }
            let fk = model.fk_prefix(&theta, model.dof());
            let err = cartesian_error(&fk, t_des);
            if err.mismatch() <= eps_tol {
                admitted.push((theta, err, b));
            }
        }
    }
    let best = admitted
        .iter()
        .enumerate()
        .fold(None::<(usize, f64)>, |best, (i, (theta, _, _))| {
            let d = l1_distance(theta, theta_init);
            match best {
                Some((_, bd)) if bd <= d => best,
                _ => Some((i, d)),
            }
        })
        .map(|(i, _)| i);

    let candidates = admitted.iter().map(|(t, _, _)| t.clone()).collect();
    match best {
        Some(i) => {
            let (theta, error, b) = admitted[i].clone();
            let branch = &branches[b];
            IkResult {
                status: IkStatus::Solved,
                theta,
                error,
                fabrik_iterations: branch.fabrik_iterations,
                optimizer_used: branch.optimizer_used,
                optimizer_iterations: branch.optimizer_iterations,
                solve_time: 0.0,
                candidates,
            }
        }
        None => {
            let reachable = branches.iter().any(|b| b.reachable);
            let fk = model.fk_prefix(theta_init, model.dof());
            IkResult {
                status: if reachable {
                    IkStatus::Failed
                } else {
                    IkStatus::Unreachable
                },
                theta: theta_init.to_vec(),
                error: cartesian_error(&fk, t_des),
                fabrik_iterations: branches.iter().map(|b| b.fabrik_iterations).sum(),
                optimizer_used: branches.iter().any(|b| b.optimizer_used),
                optimizer_iterations: branches.iter().map(|b| b.optimizer_iterations).sum(),
                solve_time: 0.0,
                candidates,
            }
        }
    }
}
