//! Two-phase path tracking with warm starts.
//!
//! Phase 1 drives the arm point (UR5: origin of frame 3; KUKA: the wrist, origin of
//! frame 5) along a straight line from its initial position to its position in the zero
//! configuration while the tool orientation stays at its initial value. Phase 2 follows
//! the forward kinematics of a joint-space interpolation from the zero configuration to
//! an end configuration. Each waypoint is solved from the previous solution.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{csv_writer, fmt_f64};
use crate::kinematics::{wrap_angle, RobotKind, RobotModel, Transform, Vec3};
use crate::solver::{self, ChainInit, IkQuery, IkStatus, SolverConfig};

/// Waypoints on each side of the phase boundary that count as "near the boundary".
pub const BOUNDARY_WINDOW: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub theta_init: Vec<f64>,
    pub theta_end: Vec<f64>,
    pub phase1_points: usize,
    pub phase2_points: usize,
}

impl Scenario {
    /// The scripted runs: 80 phase-1 and 100 phase-2 waypoints.
    pub fn scripted(kind: RobotKind) -> Self {
        let (theta_init, theta_end) = match kind {
            RobotKind::Ur5 => (
                vec![0.0, -0.959, 2.05, -1.091, 0.0, 0.0],
                vec![-0.179, 0.581, 2.8, -2.308, -1.028, 2.185],
            ),
            RobotKind::Kuka => (
                vec![0.0, 1.0, 0.0, -2.084, 0.0, 1.084, 0.0],
                vec![1.953, -0.711, -1.608, 1.648, -0.888, 0.782, 0.893],
            ),
        };
        Self {
            theta_init,
            theta_end,
            phase1_points: 80,
            phase2_points: 100,
        }
    }
}

/// The tracked point of the reduced chain for this robot.
pub fn arm_point(model: &RobotModel, theta: &[f64]) -> Result<Vec3> {
    model.check_dof(theta)?;
    let frame = match model.kind() {
        RobotKind::Ur5 => 3,
        RobotKind::Kuka => 5,
    };
    Ok(model.fk_prefix(theta, frame).translation)
}

fn check_points(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("a path needs at least 2 points, got {n}")));
    }
    Ok(())
}

fn lerp_fraction(k: usize, n: usize) -> f64 {
    k as f64 / (n - 1) as f64
}

/// `n_points` arm-point targets evenly spaced from the initial arm point to the arm point
/// of the zero configuration.
pub fn build_phase1_path(model: &RobotModel, theta_init: &[f64], n_points: usize) -> Result<Vec<Vec3>> {
    check_points(n_points)?;
    let start = arm_point(model, theta_init)?;
    let end = arm_point(model, &vec![0.0; model.dof()])?;
    Ok((0..n_points)
        .map(|k| {
            if k == n_points - 1 {
                end
            } else {
                start + (end - start) * lerp_fraction(k, n_points)
            }
        })
        .collect())
}

/// Full poses for phase 1: the initial tool pose translated with the arm point.
///
/// The tool orientation, and with it the offset from the arm point to the flange, is
/// held fixed.
pub fn phase1_poses(model: &RobotModel, theta_init: &[f64], points: &[Vec3]) -> Result<Vec<Transform>> {
    let init = model.forward_kinematics(theta_init)?;
    let start = arm_point(model, theta_init)?;
    Ok(points
        .iter()
        .map(|p| Transform::new(init.rotation, init.translation + (p - start)))
        .collect())
}

/// Forward kinematics of `n_points` joint-space samples from `theta_start` to `theta_end`.
pub fn build_phase2_path(
    model: &RobotModel,
    theta_start: &[f64],
    theta_end: &[f64],
    n_points: usize,
) -> Result<Vec<Transform>> {
    check_points(n_points)?;
    model.check_dof(theta_start)?;
    model.check_dof(theta_end)?;
    if !(model.within_limits(theta_start) && model.within_limits(theta_end)) {
        return Err(Error::InvalidInput(
            "path endpoints must lie within the joint limits".into(),
        ));
    }
    (0..n_points)
        .map(|k| {
            let s = lerp_fraction(k, n_points);
            let theta: Vec<f64> = if k == n_points - 1 {
                theta_end.to_vec()
            } else {
                theta_start
                    .iter()
                    .zip(theta_end)
                    .map(|(a, b)| a + (b - a) * s)
                    .collect()
            };
            model.forward_kinematics(&theta)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingRecord {
    pub index: usize,
    /// 1 or 2.
    pub phase: u8,
    pub theta: Vec<f64>,
    pub eps_pos: f64,
    pub eps_rot: f64,
    pub optimizer_used: bool,
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingTrace {
    pub theta_init: Vec<f64>,
    pub records: Vec<TrackingRecord>,
    pub phase1_len: usize,
    pub phase2_len: usize,
    /// Index of the waypoint that did not solve; `records` stops before it.
    pub failed_at: Option<(usize, IkStatus)>,
}

impl TrackingTrace {
    pub fn completed(&self) -> bool {
        self.failed_at.is_none() && self.records.len() == self.phase1_len + self.phase2_len
    }

    /// Largest wrapped per-joint change between consecutive configurations, starting from
    /// the initial configuration.
    pub fn max_joint_step(&self) -> f64 {
        let mut prev = self.theta_init.as_slice();
        let mut worst: f64 = 0.0;
        for r in &self.records {
            for (a, b) in r.theta.iter().zip(prev) {
                worst = worst.max(wrap_angle(a - b).abs());
            }
            prev = &r.theta;
        }
        worst
    }

    pub fn max_eps_pos(&self) -> f64 {
        self.records.iter().map(|r| r.eps_pos).fold(0.0, f64::max)
    }

    pub fn max_eps_rot(&self) -> f64 {
        self.records.iter().map(|r| r.eps_rot).fold(0.0, f64::max)
    }

    /// Optimizer activations among the last `window` phase-1 and first `window` phase-2
    /// waypoints.
    pub fn boundary_activations(&self, window: usize) -> usize {
        let lo = self.phase1_len.saturating_sub(window);
        let hi = self.phase1_len + window;
        self.records
            .iter()
            .filter(|r| r.index >= lo && r.index < hi && r.optimizer_used)
            .count()
    }
}

/// Solves the waypoints in order, each warm-started from the previous solution (the first
/// from `theta_init`). Stops at the first waypoint that does not solve.
pub fn track(
    model: &RobotModel,
    phase1: &[Transform],
    phase2: &[Transform],
    theta_init: &[f64],
    config: &SolverConfig,
) -> Result<TrackingTrace> {
    let config = SolverConfig {
        chain_init: ChainInit::Warm,
        ..*config
    };
    let mut trace = TrackingTrace {
        theta_init: theta_init.to_vec(),
        records: Vec::with_capacity(phase1.len() + phase2.len()),
        phase1_len: phase1.len(),
        phase2_len: phase2.len(),
        failed_at: None,
    };
    let mut current = theta_init.to_vec();
    let waypoints = phase1.iter().map(|t| (1, t)).chain(phase2.iter().map(|t| (2, t)));
    for (index, (phase, t_des)) in waypoints.enumerate() {
        let r = solver::solve(model, &IkQuery::new(*t_des, current.clone()), &config)?;
        if !r.solved() {
            trace.failed_at = Some((index, r.status));
            break;
        }
        trace.records.push(TrackingRecord {
            index,
            phase,
            theta: r.theta.clone(),
            eps_pos: r.error.eps_pos,
            eps_rot: r.error.eps_rot,
            optimizer_used: r.optimizer_used,
            time: r.solve_time,
        });
        current = r.theta;
    }
    Ok(trace)
}

/// Builds both phases of `scenario` and tracks them.
pub fn run_scenario(model: &RobotModel, scenario: &Scenario, config: &SolverConfig) -> Result<TrackingTrace> {
    let points = build_phase1_path(model, &scenario.theta_init, scenario.phase1_points)?;
    let phase1 = phase1_poses(model, &scenario.theta_init, &points)?;
    let zero = vec![0.0; model.dof()];
    let phase2 = build_phase2_path(model, &zero, &scenario.theta_end, scenario.phase2_points)?;
    track(model, &phase1, &phase2, &scenario.theta_init, config)
}

/// `index,phase,theta_1..theta_k,eps_pos,eps_rot,opt_used,time_seconds`.
pub fn write_trace_csv(trace: &TrackingTrace, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    let err = |e| Error::csv(path, e);
    let dof = trace.theta_init.len();
    let mut header = vec!["index".to_string(), "phase".to_string()];
    header.extend((1..=dof).map(|i| format!("theta_{i}")));
    header.extend(["eps_pos", "eps_rot", "opt_used", "time_seconds"].map(String::from));
    w.write_record(&header).map_err(err)?;
    for r in &trace.records {
        let mut row = vec![r.index.to_string(), r.phase.to_string()];
        row.extend(r.theta.iter().map(|t| fmt_f64(*t)));
        row.extend([
            fmt_f64(r.eps_pos),
            fmt_f64(r.eps_rot),
            r.optimizer_used.to_string(),
            fmt_f64(r.time),
        ]);
        w.write_record(&row).map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
