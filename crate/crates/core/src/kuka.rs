//! KUKA LBR iiwa pipeline: the flange offset is peeled off analytically, leaving a
//! shoulder (ball) – elbow – wrist chain whose end must reach the wrist target. Joint
//! angles are recovered from the chain's joint positions and the desired orientation.
//!
//! Point naming follows the reduced chain: `P0` base, `P1` shoulder, `P2` elbow,
//! `P3` wrist, `P4` flange.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::Matrix3x4;

use crate::error::Result;
use crate::fabrik::{self, ChainState, JointSpec};
use crate::kinematics::geometry::{angle_between, wrap_angle, Vec3};
use crate::kinematics::{cartesian_error, dh_transform, JointLimit, RobotModel, Transform};
use crate::solver::{BranchOutcome, ChainInit, ReducedProblem, SolveMode, SolverConfig};
use crate::sqp::{self, OptProblem};

/// Below this amplitude (meters) a joint has no effect on the row equations and its
/// initial value is used instead.
const SINGULAR_AMPLITUDE: f64 = 1e-12;
const DUPLICATE_ANGLE: f64 = 1e-9;
const PREFILTER_FACTOR: f64 = 2.0;

/// `[l1, l2, l3, l4]`: base height, upper arm, forearm, flange offset.
fn lengths(model: &RobotModel) -> [f64; 4] {
    let l = model.link_lengths();
    [l[0], l[1], l[2], l[3]]
}

/// `P_des − R_des · (0, 0, l4)`.
pub fn wrist_target(t_des: &Transform, model: &RobotModel) -> Vec3 {
    t_des.translation - t_des.z_axis() * lengths(model)[3]
}

pub fn shoulder(model: &RobotModel) -> Vec3 {
    Vec3::new(0.0, 0.0, lengths(model)[0])
}

/// Elbow position (origin of frame 3), which depends on θ₁ and θ₂ only.
pub fn elbow_position(theta1: f64, theta2: f64, model: &RobotModel) -> Vec3 {
    let (s1, c1) = theta1.sin_cos();
    let (s2, c2) = theta2.sin_cos();
    shoulder(model) + Vec3::new(c1 * s2, s1 * s2, c2) * lengths(model)[1]
}

/// Wrist position (origin of frame 5) as a closed-form function of θ₁…θ₄, with its
/// Jacobian. With `A = l2 + l3 cos θ₄` and `B = l3 sin θ₄`:
///
/// ```text
/// x = A c1 s2 + B (c3 c1 c2 − s3 s1)
/// y = A s1 s2 + B (c3 s1 c2 + s3 c1)
/// z = l1 + A c2 − B c3 s2
/// ```
pub fn wrist_analytic(theta: &[f64; 4], model: &RobotModel) -> (Vec3, Matrix3x4<f64>) {
    let [l1, l2, l3, _] = lengths(model);
    let (s1, c1) = theta[0].sin_cos();
    let (s2, c2) = theta[1].sin_cos();
    let (s3, c3) = theta[2].sin_cos();
    let (s4, c4) = theta[3].sin_cos();
    let a = l2 + l3 * c4;
    let b = l3 * s4;

    let u = c3 * c1 * c2 - s3 * s1;
    let v = c3 * s1 * c2 + s3 * c1;
    let p = Vec3::new(a * c1 * s2 + b * u, a * s1 * s2 + b * v, l1 + a * c2 - b * c3 * s2);

    #[rustfmt::skip]
    let jac = Matrix3x4::new(
        -p.y, a * c1 * c2 - b * c3 * c1 * s2, b * (-s3 * c1 * c2 - c3 * s1), -l3 * s4 * c1 * s2 + l3 * c4 * u,
         p.x, a * s1 * c2 - b * c3 * s1 * s2, b * (-s3 * s1 * c2 + c3 * c1), -l3 * s4 * s1 * s2 + l3 * c4 * v,
         0.0, -a * s2 - b * c3 * c2,          b * s3 * s2,                   -l3 * s4 * c2 - l3 * c4 * c3 * s2,
    );
    (p, jac)
}

/// `|θ₂|, |θ₄|, |θ₆|` as the bends between consecutive links of `P0 … P4`.
///
/// Each equals `|π − arccos((l_j² + l_{j+1}² − ‖P_{j+1} − P_{j−1}‖²) / (2 l_j l_{j+1}))|`;
/// the bend is evaluated with `atan2` on the link directions, which is better
/// conditioned near full extension.
pub fn elbow_magnitudes(points: &[Vec3; 5]) -> [f64; 3] {
    let link = |i: usize| points[i + 1] - points[i];
    [
        angle_between(&link(0), &link(1)),
        angle_between(&link(1), &link(2)),
        angle_between(&link(2), &link(3)),
    ]
}

/// Roots of `f(θ)_x = target_x` where `f(θ) = a cos θ + b sin θ + c` row-wise.
///
/// The x and y rows together determine `(cos θ, sin θ)` exactly; that root and its
/// mirror about `atan2(b_x, a_x)` are the two solutions of the x-row equation. Returns
/// `None` when θ has (numerically) no effect on the rows.
fn trig_roots(f: impl Fn(f64) -> Vec3, target: &Vec3) -> Option<Vec<f64>> {
    let f0 = f(0.0);
    let f90 = f(FRAC_PI_2);
    let f180 = f(PI);
    let c = (f0 + f180) * 0.5;
    let a = (f0 - f180) * 0.5;
    let b = f90 - c;
    let det = a.x * b.y - b.x * a.y;
    if det.abs().sqrt() < SINGULAR_AMPLITUDE {
        return None;
    }
    let rx = target.x - c.x;
    let ry = target.y - c.y;
    let cos = (b.y * rx - b.x * ry) / det;
    let sin = (a.x * ry - a.y * rx) / det;
    let root = sin.atan2(cos);
    let mirror = wrap_angle(2.0 * b.x.atan2(a.x) - root);
    let mut out = vec![root];
    if wrap_angle(mirror - root).abs() >= DUPLICATE_ANGLE {
        out.push(mirror);
    }
    Some(out)
}

/// θ₁ candidates placing the elbow at `p2` for the given (signed) θ₂.
pub fn recover_theta1(p2: &Vec3, theta2: f64, model: &RobotModel) -> Option<Vec<f64>> {
    trig_roots(|t1| elbow_position(t1, theta2, model), p2)
}

/// θ₃ candidates placing the wrist at `p3`, solved in frame 2 where θ₃ acts as a rotation.
pub fn recover_theta3(theta1: f64, theta2: f64, theta4: f64, p3: &Vec3, model: &RobotModel) -> Option<Vec<f64>> {
    let dh = model.dh();
    let t02 = dh_transform(&dh[0], theta1) * dh_transform(&dh[1], theta2);
    theta3_in_frame2(&t02, theta4, p3, model)
}

fn theta3_in_frame2(t02: &Transform, theta4: f64, p3: &Vec3, model: &RobotModel) -> Option<Vec<f64>> {
    let dh = model.dh();
    let local = t02.inverse().transform_point(p3);
    let tail = dh_transform(&dh[3], theta4) * dh_transform(&dh[4], 0.0);
    trig_roots(|t3| (dh_transform(&dh[2], t3) * tail).translation, &local)
}

/// θ₅ candidates placing the flange at `p4`, solved in frame 4.
pub fn recover_theta5(theta: &[f64; 4], theta6: f64, p4: &Vec3, model: &RobotModel) -> Option<Vec<f64>> {
    let t04 = model.fk_prefix(theta, 4);
    theta5_in_frame4(&t04.inverse().transform_point(p4), theta6, model)
}

fn theta5_in_frame4(local_p4: &Vec3, theta6: f64, model: &RobotModel) -> Option<Vec<f64>> {
    let dh = model.dh();
    let tail = dh_transform(&dh[5], theta6) * dh_transform(&dh[6], 0.0);
    trig_roots(|t5| (dh_transform(&dh[4], t5) * tail).translation, local_p4)
}

/// `|θ₇|`: angle between the x axis of frame 6 and the desired tool x axis.
pub fn theta7_magnitude(theta: &[f64; 6], t_des: &Transform, model: &RobotModel) -> f64 {
    let x6 = model.fk_prefix(theta, 6).x_axis();
    angle_between(&x6, &t_des.x_axis())
}

fn signed(mag: f64) -> impl Iterator<Item = f64> {
    let neg = (mag != 0.0).then_some(-mag);
    std::iter::once(mag).chain(neg)
}

/// All joint vectors consistent with the chain points `P0 … P4` and the desired
/// orientation. Sign branches run (θ₂, θ₄, θ₆, θ₇) = (+, +, +, +) first, in
/// lexicographic order; singular joints take their value from `theta_init`.
pub fn recover_all(points: &[Vec3; 5], t_des: &Transform, theta_init: &[f64], model: &RobotModel) -> Vec<[f64; 7]> {
    recover_with_poses(points, t_des, theta_init, model)
        .into_iter()
        .map(|(q, _)| q)
        .collect()
}

/// [`recover_all`] with each candidate's flange pose, built from shared prefix transforms.
pub fn recover_with_poses(
    points: &[Vec3; 5],
    t_des: &Transform,
    theta_init: &[f64],
    model: &RobotModel,
) -> Vec<([f64; 7], Transform)> {
    let dh = model.dh();
    let [m2, m4, m6] = elbow_magnitudes(points);
    let x7 = t_des.x_axis();
    let mut out = Vec::new();
    for t2 in signed(m2) {
        let t1s = recover_theta1(&points[2], t2, model).unwrap_or_else(|| vec![theta_init[0]]);
        for &t1 in &t1s {
            let t02 = dh_transform(&dh[0], t1) * dh_transform(&dh[1], t2);
            for t4 in signed(m4) {
                let t3s = theta3_in_frame2(&t02, t4, &points[3], model).unwrap_or_else(|| vec![theta_init[2]]);
                for &t3 in &t3s {
                    let t04 = t02 * dh_transform(&dh[2], t3) * dh_transform(&dh[3], t4);
                    let local_p4 = t04.inverse().transform_point(&points[4]);
                    for t6 in signed(m6) {
                        let a6 = dh_transform(&dh[5], t6);
                        let t5s = theta5_in_frame4(&local_p4, t6, model).unwrap_or_else(|| vec![theta_init[4]]);
                        for &t5 in &t5s {
                            let t06 = t04 * dh_transform(&dh[4], t5) * a6;
                            let m7 = angle_between(&t06.x_axis(), &x7);
                            for t7 in signed(m7) {
                                out.push(([t1, t2, t3, t4, t5, t6, t7], t06 * dh_transform(&dh[6], t7)));
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Arm angles whose closed-form wrist best matches the chain's wrist; used to seed the
/// optimizer from a non-converged chain.
pub fn seeds_from_chain(p2: &Vec3, p3: &Vec3, theta_init: &[f64], model: &RobotModel) -> [f64; 4] {
    let p1 = shoulder(model);
    let m2 = angle_between(&Vec3::z(), &(p2 - p1));
    let m4 = angle_between(&(p2 - p1), &(p3 - p2));
    let mut best: Option<([f64; 4], f64)> = None;
    for t2 in signed(m2) {
        for t1 in recover_theta1(p2, t2, model).unwrap_or_else(|| vec![theta_init[0]]) {
            for t4 in signed(m4) {
                for t3 in recover_theta3(t1, t2, t4, p3, model).unwrap_or_else(|| vec![theta_init[2]]) {
                    let q = [t1, t2, t3, t4];
                    let err = (wrist_analytic(&q, model).0 - p3).norm();
                    if best.is_none_or(|(_, e)| err < e) {
                        best = Some((q, err));
                    }
                }
            }
        }
    }
    best.map(|(q, _)| q).expect("at least one seed candidate")
}

#[derive(Debug, Clone, PartialEq)]
pub struct WristSolution {
    pub theta: [f64; 4],
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `‖P₃(θ₁…θ₄) − target‖²` over the joint box with the analytic gradient,
/// stopping at `eps_tol²`.
pub fn wrist_optimize(
    seeds: &[f64; 4],
    target: &Vec3,
    model: &RobotModel,
    bounds: &[JointLimit; 4],
    eps_tol: f64,
    max_iters: usize,
) -> Result<WristSolution> {
    let objective = |x: &[f64], g: &mut [f64]| {
        let (p, jac) = wrist_analytic(&[x[0], x[1], x[2], x[3]], model);
        let r = p - target;
        let grad = jac.transpose() * r * 2.0;
        g.copy_from_slice(grad.as_slice());
        r.norm_squared()
    };
    let x0 = seeds.iter().zip(bounds).map(|(s, b)| b.clamp(*s)).collect();
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
    Ok(WristSolution {
        theta: [res.x[0], res.x[1], res.x[2], res.x[3]],
        residual: res.f,
        iterations: res.iterations,
        converged: res.f <= stop,
    })
}

fn initial_chain(model: &RobotModel, target: &Vec3, theta_init: &[f64], config: &SolverConfig) -> Result<ChainState> {
    let [_, l2, l3, _] = lengths(model);
    let p1 = shoulder(model);
    let elbow_limit = model.limits()[3];
    let elbow_cone = elbow_limit.lo.abs().max(elbow_limit.hi.abs()).min(PI);
    let joints = vec![JointSpec::ball(config.shoulder_cone), JointSpec::ball(elbow_cone)];
    let chain = match config.chain_init {
        ChainInit::Straight => ChainState::straight(p1, config.v_init, vec![l2, l3], joints, Some(Vec3::z()))?,
        ChainInit::Warm => {
            let q = [theta_init[0], theta_init[1], theta_init[2], theta_init[3]];
            let chain = ChainState {
                positions: vec![p1, elbow_position(q[0], q[1], model), wrist_analytic(&q, model).0],
                link_lengths: vec![l2, l3],
                joints,
                base: p1,
                reference: Some(Vec3::z()),
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

pub(crate) fn reduced_problems(
    model: &RobotModel,
    t_des: &Transform,
    theta_init: &[f64],
    config: &SolverConfig,
) -> Result<Option<ReducedProblem>> {
    let [_, l2, l3, _] = lengths(model);
    let target = wrist_target(t_des, model);
    if (target - shoulder(model)).norm() > l2 + l3 + config.eps_tol {
        return Ok(None);
    }
    let chain = initial_chain(model, &target, theta_init, config)?;
    Ok(Some(ReducedProblem { chain, target }))
}

pub(crate) fn solve_branches(
    model: &RobotModel,
    t_des: &Transform,
    theta_init: &[f64],
    config: &SolverConfig,
) -> Result<Vec<BranchOutcome>> {
    let target = wrist_target(t_des, model);
    let chain = initial_chain(model, &target, theta_init, config)?;
    let run = fabrik::solve(&chain, &target, config.eps_tol, config.fabrik_cap(), false)?;
    let mut outcome = BranchOutcome {
        reachable: run.status != fabrik::FabrikStatus::Unreachable,
        fabrik_iterations: run.iterations,
        ..Default::default()
    };
    if !outcome.reachable {
        return Ok(vec![outcome]);
    }

    let arm_points = if run.converged() {
        Some((run.chain.positions[1], run.chain.positions[2]))
    } else if config.mode == SolveMode::Combined {
        let seeds = seeds_from_chain(&run.chain.positions[1], &run.chain.positions[2], theta_init, model);
        let l = model.limits();
        let bounds: [JointLimit; 4] = std::array::from_fn(|j| l[j].search_interval(seeds[j]));
        let sol = wrist_optimize(&seeds, &target, model, &bounds, config.eps_tol, config.opt_max_iters)?;
        outcome.optimizer_used = true;
        outcome.optimizer_iterations = sol.iterations;
        sol.converged.then(|| {
            let q = sol.theta;
            (elbow_position(q[0], q[1], model), wrist_analytic(&q, model).0)
        })
    } else {
        None
    };

    if let Some((p2, p3)) = arm_points {
        let p4 = p3 + t_des.z_axis() * lengths(model)[3];
        let points = [Vec3::zeros(), shoulder(model), p2, p3, p4];
        // Sign branches that miss the pose by far are dropped here; the survivors are
        // checked again against the exact forward kinematics during selection.
        outcome.candidates = recover_with_poses(&points, t_des, theta_init, model)
            .into_iter()
            .filter(|(_, pose)| cartesian_error(pose, t_des).mismatch() <= PREFILTER_FACTOR * config.eps_tol)
            .map(|(q, _)| q.to_vec())
            .collect();
    }
    Ok(vec![outcome])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{solve, IkQuery, IkStatus};
    use crate::RobotKind;
    use approx::assert_abs_diff_eq;
    use nalgebra::Rotation3;

    fn model() -> RobotModel {
        RobotModel::kuka_iiwa14()
    }

    fn points_of(theta: &[f64; 7], m: &RobotModel) -> [Vec3; 5] {
        let f = m.frames(theta).unwrap();
        [
            Vec3::zeros(),
            f[1].translation,
            f[3].translation,
            f[5].translation,
            f[7].translation,
        ]
    }

    const SAMPLES: [[f64; 7]; 3] = [
        [-0.745, 1.655, -1.686, -0.019, 1.003, -2.025, -0.505],
        [0.3, -0.8, 1.2, 1.9, -2.4, 0.6, 2.9],
        [2.5, 0.2, -0.4, -1.1, 0.7, -1.3, -0.2],
    ];

    #[test]
    fn wrist_target_trivial_cases() {
        let m = model();
        let zero = Transform::from_translation(Vec3::new(0.0, 0.0, 1.306));
        assert_abs_diff_eq!(wrist_target(&zero, &m), Vec3::new(0.0, 0.0, 1.18), epsilon = 1e-12);
        let flipped = Transform::new(
            Rotation3::from_axis_angle(&Vec3::x_axis(), PI).into_inner(),
            Vec3::zeros(),
        );
        assert_abs_diff_eq!(wrist_target(&flipped, &m), Vec3::new(0.0, 0.0, 0.126), epsilon = 1e-15);
    }

    #[test]
    fn wrist_at_zero_configuration() {
        let (p, _) = wrist_analytic(&[0.0; 4], &model());
        assert_abs_diff_eq!(p, Vec3::new(0.0, 0.0, 1.18), epsilon = 1e-15);
    }

    #[test]
    fn magnitudes_trivial_cases() {
        let straight = [
            Vec3::zeros(),
            Vec3::z(),
            Vec3::z() * 2.0,
            Vec3::z() * 3.0,
            Vec3::z() * 4.0,
        ];
        assert_eq!(elbow_magnitudes(&straight), [0.0; 3]);
        let bent = [
            Vec3::zeros(),
            Vec3::z(),
            Vec3::new(1.0, 0.0, 1.0),
            Vec3::new(1.0, 0.0, 2.0),
            Vec3::new(1.0, 0.0, 3.0),
        ];
        let m = elbow_magnitudes(&bent);
        assert_abs_diff_eq!(m[0], FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(m[1], FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(m[2], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn theta1_symmetry_at_zero_pose() {
        // Elbow straight up: θ₂ = 0 makes θ₁ irrelevant, so the initial value is used.
        let m = model();
        assert!(recover_theta1(&elbow_position(0.0, 0.0, &m), 0.0, &m).is_none());
        // Elbow in the x = 0 plane with θ₂ = π/2: θ₁ = ±π/2 and its mirror.
        let p2 = elbow_position(FRAC_PI_2, FRAC_PI_2, &m);
        let roots = recover_theta1(&p2, FRAC_PI_2, &m).unwrap();
        assert_abs_diff_eq!(roots[0], FRAC_PI_2, epsilon = 1e-12);
        assert_abs_diff_eq!(roots[1], -FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn theta3_zero_at_zero_pose_family() {
        let m = model();
        let q = [0.4, 0.9, 0.0, 1.2];
        let (p3, _) = wrist_analytic(&q, &m);
        let roots = recover_theta3(q[0], q[1], q[3], &p3, &m).unwrap();
        assert_abs_diff_eq!(roots[0], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn recovery_contains_generating_configuration() {
        let m = model();
        for q in SAMPLES {
            let t = m.forward_kinematics(&q).unwrap();
            let cands = recover_all(&points_of(&q, &m), &t, &[0.0; 7], &m);
            let best = cands
                .iter()
                .map(|c| {
                    c.iter()
                        .zip(&q)
                        .map(|(a, b)| wrap_angle(a - b).abs())
                        .fold(0.0, f64::max)
                })
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-9, "closest candidate differs by {best}");
            assert!(cands
                .iter()
                .any(|c| cartesian_error(&m.forward_kinematics(c).unwrap(), &t).mismatch() < 1e-10));
        }
    }

    #[test]
    fn prefix_poses_match_forward_kinematics() {
        let m = model();
        let q = SAMPLES[2];
        let t = m.forward_kinematics(&q).unwrap();
        for (c, pose) in recover_with_poses(&points_of(&q, &m), &t, &[0.0; 7], &m) {
            let fk = m.forward_kinematics(&c).unwrap();
            assert_abs_diff_eq!(pose.rotation, fk.rotation, epsilon = 1e-13);
            assert_abs_diff_eq!(pose.translation, fk.translation, epsilon = 1e-13);
        }
    }

    #[test]
    fn theta7_zero_when_axes_agree() {
        let m = model();
        let q = [0.3, 0.5, -0.2, 1.0, 0.4, -0.6, 0.0];
        let t = m.forward_kinematics(&q).unwrap();
        let mut six = [0.0; 6];
        six.copy_from_slice(&q[..6]);
        assert_abs_diff_eq!(theta7_magnitude(&six, &t, &m), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn wrist_matches_fk_and_finite_differences() {
        let m = model();
        for q in SAMPLES {
            let arm = [q[0], q[1], q[2], q[3]];
            let (p, jac) = wrist_analytic(&arm, &m);
            assert_abs_diff_eq!(p, m.fk_prefix(&q, 5).translation, epsilon = 1e-12);
            let h = 1e-6;
            for j in 0..4 {
                let (mut a, mut b) = (arm, arm);
                a[j] += h;
                b[j] -= h;
                let fd = (wrist_analytic(&a, &m).0 - wrist_analytic(&b, &m).0) / (2.0 * h);
                assert_abs_diff_eq!(jac.column(j).into_owned(), fd, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn optimizer_returns_immediately_when_seeds_fit() {
        let m = model();
        let q = [0.1, 0.7, -0.3, 1.4];
        let (p, _) = wrist_analytic(&q, &m);
        let sol = wrist_optimize(&q, &p, &m, &[JointLimit::FULL_TURN; 4], 1e-6, 200).unwrap();
        assert_eq!(sol.iterations, 0);
        assert!(sol.converged);
    }

    #[test]
    fn optimizer_reaches_random_target() {
        let m = model();
        let target = wrist_analytic(&[1.1, -0.6, 0.8, 1.7], &m).0;
        let sol = wrist_optimize(
            &[0.2, 0.3, 0.0, 0.5],
            &target,
            &m,
            &[JointLimit::FULL_TURN; 4],
            1e-6,
            200,
        )
        .unwrap();
        assert!(sol.converged, "residual {}", sol.residual);
        assert!((wrist_analytic(&sol.theta, &m).0 - target).norm() <= 1e-6);
    }

    #[test]
    fn fixed_point_query_is_exact() {
        let m = model();
        let theta = SAMPLES[1].to_vec();
        let t = m.forward_kinematics(&theta).unwrap();
        let r = solve(
            &m,
            &IkQuery::new(t, theta.clone()),
            &SolverConfig::for_robot(RobotKind::Kuka),
        )
        .unwrap();
        assert_eq!(r.status, IkStatus::Solved);
        assert!(r.error.eps_rot <= 1e-9);
    }

    #[test]
    fn beyond_reach_is_unreachable() {
        let m = model();
        let t = Transform::from_translation(Vec3::new(1.5, 0.0, 0.4));
        let r = solve(
            &m,
            &IkQuery::new(t, vec![0.0; 7]),
            &SolverConfig::for_robot(RobotKind::Kuka),
        )
        .unwrap();
        assert_eq!(r.status, IkStatus::Unreachable);
    }
}
