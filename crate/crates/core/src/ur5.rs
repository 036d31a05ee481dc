//! UR5 pipeline: the wrist pins θ₁, which fixes the arm plane; the shoulder–elbow pair is
//! a planar two-link chain solved by FABRIK (or the optimizer), and the remaining angles
//! follow from link directions.

use std::f64::consts::FRAC_PI_2;

use crate::error::Result;
use crate::fabrik::{self, ChainState, JointSpec};
use crate::kinematics::geometry::{orthogonal_unit, signed_angle, try_normalize, wrap_angle, Vec3};
use crate::kinematics::{JointLimit, RobotModel, Transform};
use crate::solver::{BranchOutcome, ChainInit, ReducedProblem, SolveMode, SolverConfig};
use crate::sqp::{self, OptProblem};

const DEGENERATE_WRIST: f64 = 1e-8;
const DUPLICATE_ANGLE: f64 = 1e-9;

/// Link lengths `[l1 … l6]` of a UR5 model.
fn lengths(model: &RobotModel) -> [f64; 6] {
    let l = model.link_lengths();
    [l[0], l[1], l[2], l[3], l[4], l[5]]
}

/// Wrist centre `P_des − R_des · (0, 0, l6)`.
pub fn wrist_position(t_des: &Transform, model: &RobotModel) -> Vec3 {
    t_des.translation - t_des.z_axis() * lengths(model)[5]
}

/// The two base angles that put the wrist at lateral offset `l4` from the arm plane, or
/// `None` when the wrist lies inside the `l4` cylinder.
pub fn theta1_candidates(p_w: &Vec3, model: &RobotModel) -> Option<[f64; 2]> {
    let l4 = lengths(model)[3];
    let rho = p_w.x.hypot(p_w.y);
    if rho < l4 || rho == 0.0 {
        return None;
    }
    let spread = (l4 / rho).min(1.0).acos();
    let base = FRAC_PI_2 + p_w.y.atan2(p_w.x);
    Some([wrap_angle(base + spread), wrap_angle(base - spread)])
}

/// Arm-plane quantities for one base angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarFrame {
    pub theta1: f64,
    pub x1d: Vec3,
    /// Plane normal and axis of joints 2–4.
    pub z2d: Vec3,
    pub v_init: Vec3,
    pub l6d: Vec3,
    pub x6d: Vec3,
    /// `±` forearm-to-wrist directions.
    pub l5d: [Vec3; 2],
    /// Planar targets for the elbow chain, one per `l5d` sign.
    pub targets: [Vec3; 2],
    /// Tool axis parallel to the plane normal; θ₅ = θ₆ = 0 downstream.
    pub degenerate: bool,
}

pub fn planar_frame(theta1: f64, t_des: &Transform, p_w: &Vec3, model: &RobotModel) -> PlanarFrame {
    let l = lengths(model);
    let (s1, c1) = theta1.sin_cos();
    let z2d = Vec3::new(s1, -c1, 0.0);
    let x1d = Vec3::new(c1, s1, 0.0);
    let l6d = t_des.z_axis();
    let x6d = t_des.x_axis();
    let cross = z2d.cross(&l6d);
    let degenerate = cross.norm() < DEGENERATE_WRIST;
    let l5 = if degenerate {
        // With θ₅ = θ₆ = 0 the tool x axis is z2d × l5d, so l5d ⟂ {x6d, z2d}.
        try_normalize(&x6d.cross(&z2d), 1e-12).unwrap_or_else(|| orthogonal_unit(&z2d))
    } else {
        cross.normalize()
    };
    let l5d = [l5, -l5];
    let p_proj = p_w - z2d * p_w.dot(&z2d);
    PlanarFrame {
        theta1,
        x1d,
        z2d,
        v_init: -x1d,
        l6d,
        x6d,
        l5d,
        targets: [p_proj - l5d[0] * l[4], p_proj - l5d[1] * l[4]],
        degenerate,
    }
}

/// Upper-arm and forearm directions for joint angles θ₂, θ₃ in the given plane.
pub fn link_directions(frame: &PlanarFrame, theta2: f64, theta3: f64) -> (Vec3, Vec3) {
    let down = -Vec3::z();
    let dir = |a: f64| -frame.x1d * a.cos() + down * a.sin();
    (dir(theta2), dir(theta2 + theta3))
}

/// Elbow-chain end `P₃(θ₂, θ₃)` and its partial derivatives.
///
/// `P₃ = (0, 0, l1) − (l2 cos θ₂ + l3 cos(θ₂+θ₃)) x̂₁ − (l2 sin θ₂ + l3 sin(θ₂+θ₃)) ẑ`
pub fn elbow_position(theta1: f64, theta2: f64, theta3: f64, model: &RobotModel) -> (Vec3, [Vec3; 2]) {
    let l = lengths(model);
    let (s1, c1) = theta1.sin_cos();
    let x1 = Vec3::new(c1, s1, 0.0);
    let (s2, c2) = theta2.sin_cos();
    let (s23, c23) = (theta2 + theta3).sin_cos();
    let horiz = l[1] * c2 + l[2] * c23;
    let vert = l[1] * s2 + l[2] * s23;
    let p = Vec3::new(0.0, 0.0, l[0]) - x1 * horiz - Vec3::z() * vert;
    let d2 = x1 * vert - Vec3::z() * horiz;
    let d3 = x1 * (l[2] * s23) - Vec3::z() * (l[2] * c23);
    (p, [d2, d3])
}

/// All six angles from the arm-plane link directions.
pub fn recover_angles(frame: &PlanarFrame, l5d: &Vec3, l2d: &Vec3, l3d: &Vec3, model: &RobotModel) -> [f64; 6] {
    let z2d = frame.z2d;
    let theta2 = signed_angle(&frame.v_init, l2d, &z2d);
    let theta3 = signed_angle(l2d, l3d, &z2d);
    let theta4 = wrap_angle(signed_angle(l3d, l5d, &z2d) - FRAC_PI_2);
    let (theta5, theta6) = if frame.degenerate {
        (0.0, 0.0)
    } else {
        let theta5 = signed_angle(&z2d, &frame.l6d, l5d);
        let partial = [frame.theta1, theta2, theta3, theta4, theta5];
        let x5d = model.fk_prefix(&partial, 5).x_axis();
        (theta5, signed_angle(&x5d, &frame.x6d, &frame.l6d))
    };
    [frame.theta1, theta2, theta3, theta4, theta5, theta6]
}

/// Result of the elbow optimization.
#[derive(Debug, Clone, PartialEq)]
pub struct ElbowSolution {
    pub theta2: f64,
    pub theta3: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `‖P₃(θ₂, θ₃) − target‖²` over the joint box, stopping at `eps_tol²`.
pub fn elbow_optimize(
    theta1: f64,
    target: &Vec3,
    seeds: (f64, f64),
    model: &RobotModel,
    bounds: [JointLimit; 2],
    eps_tol: f64,
    max_iters: usize,
) -> Result<ElbowSolution> {
    let objective = |x: &[f64], g: &mut [f64]| {
        let (p, jac) = elbow_position(theta1, x[0], x[1], model);
        let r = p - target;
        g[0] = 2.0 * r.dot(&jac[0]);
        g[1] = 2.0 * r.dot(&jac[1]);
        r.norm_squared()
    };
    let x0 = vec![bounds[0].clamp(seeds.0), bounds[1].clamp(seeds.1)];
    let stop = eps_tol * eps_tol;
    let res = sqp::minimize(
        &OptProblem {
            x0,
            bounds: bounds.to_vec(),
            objective: &objective,
        },
        stop,
        max_iters,
    )?;
    Ok(ElbowSolution {
        theta2: res.x[0],
        theta3: res.x[1],
        residual: res.f,
        iterations: res.iterations,
        converged: res.f <= stop,
    })
}

fn initial_chain(
    frame: &PlanarFrame,
    target: &Vec3,
    model: &RobotModel,
    theta_init: &[f64],
    config: &SolverConfig,
) -> Result<ChainState> {
    let l = lengths(model);
    let limits = model.limits();
    let base = Vec3::new(0.0, 0.0, l[0]);
    let joints = vec![
        JointSpec::hinge(frame.z2d, limits[1]),
        JointSpec::hinge(frame.z2d, limits[2]),
    ];
    let chain = match config.chain_init {
        ChainInit::Straight => ChainState::straight(base, frame.v_init, vec![l[1], l[2]], joints, Some(frame.v_init))?,
        ChainInit::Warm => {
            let (l2d, l3d) = link_directions(frame, theta_init[1], theta_init[2]);
            let elbow = base + l2d * l[1];
            let chain = ChainState {
                positions: vec![base, elbow, elbow + l3d * l[2]],
                link_lengths: vec![l[1], l[2]],
                joints,
                base,
                reference: Some(frame.v_init),
            };
            chain.validate()?;
            chain
        }
    };
    Ok(match &config.pre_bend {
        Some(pb) => fabrik::pre_bend(&chain, target, pb),
        None => chain,
    })
}

fn frames(t_des: &Transform, model: &RobotModel) -> Vec<PlanarFrame> {
    let p_w = wrist_position(t_des, model);
    let Some(t1) = theta1_candidates(&p_w, model) else {
        return Vec::new();
    };
    let mut out = vec![planar_frame(t1[0], t_des, &p_w, model)];
    if (t1[0] - t1[1]).abs() >= DUPLICATE_ANGLE {
        out.push(planar_frame(t1[1], t_des, &p_w, model));
    }
    out
}

pub(crate) fn reduced_problems(
    model: &RobotModel,
    t_des: &Transform,
    theta_init: &[f64],
    config: &SolverConfig,
) -> Result<Vec<ReducedProblem>> {
    let l = lengths(model);
    let base = Vec3::new(0.0, 0.0, l[0]);
    let mut out = Vec::new();
    for frame in frames(t_des, model) {
        for target in frame.targets {
            if (target - base).norm() <= l[1] + l[2] + config.eps_tol {
                let chain = initial_chain(&frame, &target, model, theta_init, config)?;
                out.push(ReducedProblem { chain, target });
            }
        }
    }
    Ok(out)
}

/// Runs every (θ₁ sign × l̂₅ sign) branch; branch order is θ₁ `+` then `−`, l̂₅ `+` then `−`.
pub(crate) fn solve_branches(
    model: &RobotModel,
    t_des: &Transform,
    theta_init: &[f64],
    config: &SolverConfig,
) -> Result<Vec<BranchOutcome>> {
    let frames = frames(t_des, model);
    if frames.is_empty() {
        return Ok(vec![BranchOutcome::default()]);
    }
    let mut out = Vec::with_capacity(4);
    for frame in &frames {
        for k in 0..2 {
            out.push(solve_branch(model, frame, k, theta_init, config)?);
        }
    }
    Ok(out)
}

fn solve_branch(
    model: &RobotModel,
    frame: &PlanarFrame,
    k: usize,
    theta_init: &[f64],
    config: &SolverConfig,
) -> Result<BranchOutcome> {
    let target = frame.targets[k];
    let l5d = frame.l5d[k];
    let chain = initial_chain(frame, &target, model, theta_init, config)?;
    let run = fabrik::solve(&chain, &target, config.eps_tol, config.fabrik_cap(), false)?;
    let mut outcome = BranchOutcome {
        reachable: run.status != fabrik::FabrikStatus::Unreachable,
        fabrik_iterations: run.iterations,
        ..Default::default()
    };
    if !outcome.reachable {
        return Ok(outcome);
    }

    let dirs = if run.converged() {
        Some((run.chain.link_direction(0), run.chain.link_direction(1)))
    } else if config.mode == SolveMode::Combined {
        let seeds = run.chain.joint_angles();
        let limits = model.limits();
        let sol = elbow_optimize(
            frame.theta1,
            &target,
            (seeds[0], seeds[1]),
            model,
            [limits[1].search_interval(seeds[0]), limits[2].search_interval(seeds[1])],
            config.eps_tol,
            config.opt_max_iters,
        )?;
        outcome.optimizer_used = true;
        outcome.optimizer_iterations = sol.iterations;
        sol.converged.then(|| link_directions(frame, sol.theta2, sol.theta3))
    } else {
        None
    };

    if let Some((l2d, l3d)) = dirs {
        outcome
            .candidates
            .push(recover_angles(frame, &l5d, &l2d, &l3d, model).to_vec());
    }
    Ok(outcome)
}
