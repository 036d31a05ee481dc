//! Joint-limited FABRIK for serial chains.
//!
//! A chain is a list of joint positions `P_0 … P_{m-1}`. `joints[i]` sits at `P_i` and
//! constrains the angle between link `i − 1` (or the chain's reference direction for
//! `i = 0`) and link `i`. Hinge angles are signed about the hinge axis; ball joints use
//! the axis spanned by the two links, so their angle is the unsigned bend.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::geometry::{orthogonal_unit, rodrigues, signed_angle, try_normalize, Vec3};
use crate::kinematics::JointLimit;

const AXIS_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum JointKind {
    Hinge { axis: Vec3 },
    Ball,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointSpec {
    pub kind: JointKind,
    pub limit: JointLimit,
}

impl JointSpec {
    pub fn hinge(axis: Vec3, limit: JointLimit) -> Self {
        Self {
            kind: JointKind::Hinge { axis },
            limit,
        }
    }

    /// Ball joint whose bend is limited to a cone of the given half-angle.
    pub fn ball(cone: f64) -> Self {
        Self {
            kind: JointKind::Ball,
            limit: JointLimit::new(-cone, cone),
        }
    }

    pub fn free_ball() -> Self {
        Self::ball(std::f64::consts::PI)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainState {
    pub positions: Vec<Vec3>,
    pub link_lengths: Vec<f64>,
    pub joints: Vec<JointSpec>,
    pub base: Vec3,
    /// Direction joint 0's angle is measured from; `None` leaves joint 0 unconstrained.
    pub reference: Option<Vec3>,
}

impl ChainState {
    /// Straight chain from `base` along the unit vector `direction`.
    pub fn straight(
        base: Vec3,
        direction: Vec3,
        link_lengths: Vec<f64>,
        joints: Vec<JointSpec>,
        reference: Option<Vec3>,
    ) -> Result<Self> {
        let dir =
            try_normalize(&direction, AXIS_EPS).ok_or_else(|| Error::InvalidInput("chain direction is zero".into()))?;
        let mut positions = Vec::with_capacity(link_lengths.len() + 1);
        let mut p = base;
        positions.push(p);
        for l in &link_lengths {
            p += dir * *l;
            positions.push(p);
        }
        let chain = Self {
            positions,
            link_lengths,
            joints,
            base,
            reference,
        };
        chain.validate()?;
        Ok(chain)
    }

    /// Chain through the given points; link lengths are taken from the points.
    pub fn from_positions(positions: Vec<Vec3>, joints: Vec<JointSpec>, reference: Option<Vec3>) -> Result<Self> {
        let link_lengths = positions.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
        let base = *positions
            .first()
            .ok_or_else(|| Error::InvalidInput("chain has no points".into()))?;
        let chain = Self {
            positions,
            link_lengths,
            joints,
            base,
            reference,
        };
        chain.validate()?;
        Ok(chain)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.positions.len();
        if m < 2 {
            return Err(Error::InvalidInput("chain needs at least one link".into()));
        }
        if self.link_lengths.len() != m - 1 || self.joints.len() != m - 1 {
            return Err(Error::InvalidInput(format!(
                "chain with {m} points needs {} link lengths and joints (got {} and {})",
                m - 1,
                self.link_lengths.len(),
                self.joints.len()
            )));
        }
        if !self.link_lengths.iter().all(|l| l.is_finite() && *l > 0.0) {
            return Err(Error::InvalidInput("link lengths must be positive".into()));
        }
        if !self
            .positions
            .iter()
            .chain([&self.base])
            .all(|p| p.iter().all(|v| v.is_finite()))
        {
            return Err(Error::InvalidInput("chain positions must be finite".into()));
        }
        for j in &self.joints {
            if let JointKind::Hinge { axis } = j.kind {
                let norm = axis.norm();
                if (norm - 1.0).abs() > AXIS_EPS {
                    return Err(Error::NonUnitAxis { norm });
                }
            }
            if !(j.limit.lo < j.limit.hi) {
                return Err(Error::InvalidInput("joint limit must satisfy lo < hi".into()));
            }
        }
        if let Some(r) = self.reference {
            if ((r.norm()) - 1.0).abs() > AXIS_EPS {
                return Err(Error::NonUnitAxis { norm: r.norm() });
            }
        }
        Ok(())
    }

    pub fn end(&self) -> Vec3 {
        *self.positions.last().expect("validated chain is non-empty")
    }

    pub fn reach(&self) -> f64 {
        self.link_lengths.iter().sum()
    }

    pub fn link_direction(&self, i: usize) -> Vec3 {
        (self.positions[i + 1] - self.positions[i]) / self.link_lengths[i]
    }

    /// Canonical joint angles: joint 0 against the reference (0 when there is none),
    /// then every interior joint between consecutive links.
    pub fn joint_angles(&self) -> Vec<f64> {
        let n = self.link_lengths.len();
        (0..n)
            .map(|i| {
                let dir = unit_or(&(self.positions[i + 1] - self.positions[i]), Vec3::x());
                let prev = if i == 0 {
                    match self.reference {
                        Some(r) => r,
                        None => return 0.0,
                    }
                } else {
                    unit_or(&(self.positions[i] - self.positions[i - 1]), Vec3::x())
                };
                let axis = joint_axis(&self.joints[i].kind, &prev, &dir);
                signed_angle(&prev, &dir, &axis)
            })
            .collect()
    }
}

/// Per-link quantities of one phase update.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhaseGeometry {
    /// Distance between the anchor and the retained point before repositioning.
    pub d: f64,
    /// `l / d`.
    pub alpha: f64,
    /// Joint angle measured for the limit check (0 when the joint is not checked).
    pub phi: f64,
    pub delta_phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FabrikStatus {
    Converged,
    IterationCap,
    Unreachable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FabrikOutcome {
    pub status: FabrikStatus,
    /// Completed forward + backward sweeps.
    pub iterations: usize,
    pub dist: f64,
    pub chain: ChainState,
    pub trace: Option<Vec<(usize, f64)>>,
}

impl FabrikOutcome {
    pub fn converged(&self) -> bool {
        self.status == FabrikStatus::Converged
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreBend {
    pub angle: f64,
    /// Links whose pairwise angles are all below this count as collinear.
    pub threshold: f64,
}

impl Default for PreBend {
    fn default() -> Self {
        Self {
            angle: 1e-3,
            threshold: 1e-6,
        }
    }
}

/// Limit-violation correction: 0 inside `[lo, hi]`, otherwise the signed step back to the
/// nearest bound.
pub fn clamp_correction(phi: f64, limit: JointLimit) -> f64 {
    if phi > limit.hi {
        limit.hi - phi
    } else if phi < limit.lo {
        limit.lo - phi
    } else {
        0.0
    }
}

/// `normalize(unit(p1 − p0) × unit(p2 − p1))`; for collinear points, the cross product of
/// the first link with the coordinate axis least parallel to it.
pub fn ball_joint_axis(p0: &Vec3, p1: &Vec3, p2: &Vec3) -> Vec3 {
    let a = unit_or(&(p1 - p0), Vec3::x());
    let b = unit_or(&(p2 - p1), a);
    joint_axis(&JointKind::Ball, &a, &b)
}

fn joint_axis(kind: &JointKind, prev: &Vec3, next: &Vec3) -> Vec3 {
    match kind {
        JointKind::Hinge { axis } => *axis,
        JointKind::Ball => try_normalize(&prev.cross(next), AXIS_EPS).unwrap_or_else(|| orthogonal_unit(prev)),
    }
}

fn unit_or(v: &Vec3, fallback: Vec3) -> Vec3 {
    try_normalize(v, 0.0).unwrap_or(fallback)
}

/// One forward phase: the end is pinned to `target` and every preceding joint is pulled
/// along, with interior joint limits enforced.
pub fn forward_phase(chain: &ChainState, target: &Vec3) -> ChainState {
    let mut out = chain.clone();
    forward_in_place(&mut out, target, None);
    out
}

/// [`forward_phase`] plus the per-link geometry, indexed by link.
pub fn forward_phase_geometry(chain: &ChainState, target: &Vec3) -> (ChainState, Vec<PhaseGeometry>) {
    let mut out = chain.clone();
    let mut geometry = vec![PhaseGeometry::default(); chain.link_lengths.len()];
    forward_in_place(&mut out, target, Some(&mut geometry));
    (out, geometry)
}

/// One backward phase: the root is re-anchored at the base and every following joint is
/// pulled along, with all joint limits enforced.
pub fn backward_phase(chain: &ChainState) -> ChainState {
    let mut out = chain.clone();
    backward_in_place(&mut out, None);
    out
}

/// [`backward_phase`] plus the per-link geometry, indexed by link.
pub fn backward_phase_geometry(chain: &ChainState) -> (ChainState, Vec<PhaseGeometry>) {
    let mut out = chain.clone();
    let mut geometry = vec![PhaseGeometry::default(); chain.link_lengths.len()];
    backward_in_place(&mut out, Some(&mut geometry));
    (out, geometry)
}

fn forward_in_place(chain: &mut ChainState, target: &Vec3, mut geometry: Option<&mut [PhaseGeometry]>) {
    let m = chain.positions.len();
    let last_old = chain.positions[m - 1] - chain.positions[m - 2];
    chain.positions[m - 1] = *target;
    // Direction of the link processed just before, pointing from the base side to the end.
    let mut next_dir: Option<Vec3> = None;
    for i in (0..m - 1).rev() {
        let anchor = chain.positions[i + 1];
        let mut retained = chain.positions[i];
        let l = chain.link_lengths[i];
        let d = (retained - anchor).norm();
        let mut geo = PhaseGeometry {
            d,
            ..Default::default()
        };

        if !(d > 0.0) {
            let dir = next_dir.unwrap_or_else(|| unit_or(&last_old, Vec3::x()));
            chain.positions[i] = anchor - dir * l;
            next_dir = Some(dir);
            if let Some(g) = geometry.as_deref_mut() {
                g[i] = geo;
            }
            continue;
        }

        // Interior joint at `anchor` couples this link with the one already placed.
        if let Some(nd) = next_dir {
            let joint = &chain.joints[i + 1];
            let dir = (anchor - retained) / d;
            let axis = joint_axis(&joint.kind, &dir, &nd);
            let phi = signed_angle(&nd, &dir, &axis);
            let mirrored = JointLimit::new(-joint.limit.hi, -joint.limit.lo);
            let delta = clamp_correction(phi, mirrored);
            geo.phi = phi;
            geo.delta_phi = delta;
            if delta != 0.0 {
                retained = anchor + rodrigues(&axis, delta, &(retained - anchor));
            }
        }

        let alpha = l / d;
        geo.alpha = alpha;
        let placed = anchor * (1.0 - alpha) + retained * alpha;
        chain.positions[i] = placed;
        next_dir = Some((anchor - placed) / l);
        if let Some(g) = geometry.as_deref_mut() {
            g[i] = geo;
        }
    }
}

fn backward_in_place(chain: &mut ChainState, mut geometry: Option<&mut [PhaseGeometry]>) {
    let m = chain.positions.len();
    let first_old = chain.positions[1] - chain.positions[0];
    chain.positions[0] = chain.base;
    let mut prev_dir: Option<Vec3> = chain.reference;
    for i in 1..m {
        let anchor = chain.positions[i - 1];
        let mut retained = chain.positions[i];
        let l = chain.link_lengths[i - 1];
        let d = (retained - anchor).norm();
        let mut geo = PhaseGeometry {
            d,
            ..Default::default()
        };

        if !(d > 0.0) {
            let dir = prev_dir.unwrap_or_else(|| unit_or(&first_old, Vec3::x()));
            chain.positions[i] = anchor + dir * l;
            prev_dir = Some(dir);
            if let Some(g) = geometry.as_deref_mut() {
                g[i - 1] = geo;
            }
            continue;
        }

        if let Some(pd) = prev_dir {
            let joint = &chain.joints[i - 1];
            let dir = (retained - anchor) / d;
            let axis = joint_axis(&joint.kind, &pd, &dir);
            let phi = signed_angle(&pd, &dir, &axis);
            let delta = clamp_correction(phi, joint.limit);
            geo.phi = phi;
            geo.delta_phi = delta;
            if delta != 0.0 {
                retained = anchor + rodrigues(&axis, delta, &(retained - anchor));
            }
        }

        let alpha = l / d;
        geo.alpha = alpha;
        let placed = anchor * (1.0 - alpha) + retained * alpha;
        chain.positions[i] = placed;
        prev_dir = Some((placed - anchor) / l);
        if let Some(g) = geometry.as_deref_mut() {
            g[i - 1] = geo;
        }
    }
}

/// Bends a fully collinear chain by `config.angle` at every interior joint so iteration
/// does not start in the straight-chain dead spot. Hinges bend about their axis; ball
/// joints bend toward the plane containing the chain and `target`.
pub fn pre_bend(chain: &ChainState, target: &Vec3, config: &PreBend) -> ChainState {
    let mut out = chain.clone();
    let n = chain.link_lengths.len();
    if n < 2 {
        return out;
    }
    let dirs: Vec<Vec3> = (0..n).map(|i| chain.link_direction(i)).collect();
    let collinear = dirs.iter().enumerate().all(|(i, a)| {
        dirs[i + 1..]
            .iter()
            .all(|b| a.cross(b).norm().atan2(a.dot(b)) < config.threshold)
    });
    if !collinear {
        return out;
    }
    let line = dirs[0];
    let ball_axis =
        try_normalize(&line.cross(&(target - chain.positions[0])), 1e-9).unwrap_or_else(|| orthogonal_unit(&line));
    for j in 1..n {
        let axis = match chain.joints[j].kind {
            JointKind::Hinge { axis } => axis,
            JointKind::Ball => ball_axis,
        };
        let pivot = out.positions[j];
        for k in j + 1..=n {
            out.positions[k] = pivot + rodrigues(&axis, config.angle, &(out.positions[k] - pivot));
        }
    }
    out
}

/// Alternates forward and backward phases until the end is within `eps_tol` of `target`
/// (measured after each backward phase) or `iter_cap` sweeps have run.
///
/// Targets farther than the total reach plus `eps_tol` from the base are reported as
/// [`FabrikStatus::Unreachable`] without iterating.
pub fn solve(
    chain: &ChainState,
    target: &Vec3,
    eps_tol: f64,
    iter_cap: usize,
    record_trace: bool,
) -> Result<FabrikOutcome> {
    if !(eps_tol > 0.0) {
        return Err(Error::InvalidInput(format!("eps_tol must be positive, got {eps_tol}")));
    }
    if !target.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidInput("FABRIK target must be finite".into()));
    }
    chain.validate()?;

    let mut state = chain.clone();
    let mut dist = (state.end() - target).norm();
    let mut trace = record_trace.then(Vec::new);
    if (target - state.base).norm() > state.reach() + eps_tol {
        return Ok(FabrikOutcome {
            status: FabrikStatus::Unreachable,
            iterations: 0,
            dist,
            chain: state,
            trace,
        });
    }

    let mut n = 0;
    let status = loop {
        if dist <= eps_tol {
            break FabrikStatus::Converged;
        }
        if n >= iter_cap {
            break FabrikStatus::IterationCap;
        }
        forward_in_place(&mut state, target, None);
        backward_in_place(&mut state, None);
        n += 1;
        dist = (state.end() - target).norm();
        if let Some(t) = trace.as_mut() {
            t.push((n, dist));
        }
    };

    Ok(FabrikOutcome {
        status,
        iterations: n,
        dist,
        chain: state,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn planar_unit_chain(limit: JointLimit) -> ChainState {
        let joints = vec![
            JointSpec::hinge(Vec3::z(), JointLimit::FULL_TURN),
            JointSpec::hinge(Vec3::z(), limit),
        ];
        ChainState::straight(Vec3::zeros(), Vec3::x(), vec![1.0, 1.0], joints, None).unwrap()
    }

    fn assert_lengths(chain: &ChainState) {
        for (i, l) in chain.link_lengths.iter().enumerate() {
            let got = (chain.positions[i + 1] - chain.positions[i]).norm();
            assert!((got - l).abs() <= 1e-9, "link {i}: {got} vs {l}");
        }
    }

    #[test]
    fn clamp_correction_cases() {
        let lim = JointLimit::new(-1.0, 1.0);
        assert_eq!(clamp_correction(0.5, lim), 0.0);
        assert_eq!(clamp_correction(1.5, lim), -0.5);
        assert_eq!(clamp_correction(-2.0, lim), 1.0);
    }

    #[test]
    fn ball_axis_cases() {
        let z = ball_joint_axis(&Vec3::zeros(), &Vec3::x(), &Vec3::new(1.0, 1.0, 0.0));
        assert_abs_diff_eq!(z, Vec3::z(), epsilon = 1e-15);
        let mx = ball_joint_axis(&Vec3::zeros(), &Vec3::z(), &Vec3::new(0.0, 1.0, 1.0));
        assert_abs_diff_eq!(mx, -Vec3::x(), epsilon = 1e-15);
        let fallback = ball_joint_axis(&Vec3::zeros(), &Vec3::z(), &(Vec3::z() * 2.0));
        assert!(fallback.dot(&Vec3::z()).abs() < 1e-15);
        assert_abs_diff_eq!(fallback.norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn forward_fixed_point() {
        let chain = planar_unit_chain(JointLimit::FULL_TURN);
        let out = forward_phase(&chain, &Vec3::new(2.0, 0.0, 0.0));
        assert_eq!(out.positions, chain.positions);
    }

    #[test]
    fn forward_preserves_lengths() {
        let chain = planar_unit_chain(JointLimit::FULL_TURN);
        let out = forward_phase(&chain, &Vec3::new(0.0, 2.0, 0.0));
        assert_eq!(out.end(), Vec3::new(0.0, 2.0, 0.0));
        assert_lengths(&out);
    }

    #[test]
    fn forward_clamps_limited_hinge() {
        // Hand-rolled single step. Pinning the end at (1, 2.5, 0) drags P2 and P1 up the
        // y axis; the base link then meets joint 1 at atan2(1, 0.5) ≈ 1.107 rad, beyond the
        // ±π/4 limit, so P0 is swung back about P1 before blending.
        let joints = vec![
            JointSpec::hinge(Vec3::z(), JointLimit::FULL_TURN),
            JointSpec::hinge(Vec3::z(), JointLimit::new(-FRAC_PI_4, FRAC_PI_4)),
            JointSpec::hinge(Vec3::z(), JointLimit::FULL_TURN),
        ];
        let chain = ChainState::from_positions(
            vec![
                Vec3::zeros(),
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(1.0, 1.0, 0.0),
                Vec3::new(1.0, 2.0, 0.0),
            ],
            joints,
            None,
        )
        .unwrap();
        let target = Vec3::new(1.0, 2.5, 0.0);
        let (out, geo) = forward_phase_geometry(&chain, &target);

        let p2 = Vec3::new(1.0, 1.5, 0.0);
        let p1 = Vec3::new(1.0, 0.5, 0.0);
        let w = Vec3::new(-1.0, -0.5, 0.0);
        let d = w.norm();
        // Link 0 points along (1, 0.5), link 1 along +y; the end-side measurement is mirrored.
        let canonical = FRAC_PI_2 - 0.5f64.atan2(1.0);
        let phi = -canonical;
        let delta = -FRAC_PI_4 - phi;
        let (s, c) = delta.sin_cos();
        let rotated = p1 + Vec3::new(c * w.x - s * w.y, s * w.x + c * w.y, 0.0);
        let alpha = 1.0 / d;
        let expected = p1 * (1.0 - alpha) + rotated * alpha;

        assert_eq!(out.positions[3], target);
        assert_abs_diff_eq!(out.positions[2], p2, epsilon = 1e-15);
        assert_abs_diff_eq!(out.positions[1], p1, epsilon = 1e-15);
        assert_abs_diff_eq!(geo[0].d, d, epsilon = 1e-15);
        assert_abs_diff_eq!(geo[0].phi, -canonical, epsilon = 1e-12);
        assert_abs_diff_eq!(geo[0].delta_phi, delta, epsilon = 1e-12);
        assert_abs_diff_eq!(out.positions[0], expected, epsilon = 1e-12);
        let l0 = (out.positions[1] - out.positions[0]).normalize();
        let l1 = (out.positions[2] - out.positions[1]).normalize();
        assert_abs_diff_eq!(signed_angle(&l0, &l1, &Vec3::z()), FRAC_PI_4, epsilon = 1e-12);
        assert_lengths(&out);
    }

    #[test]
    fn backward_fixed_point_and_reanchor() {
        let chain = planar_unit_chain(JointLimit::FULL_TURN);
        let out = backward_phase(&chain);
        for (a, b) in out.positions.iter().zip(&chain.positions) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        let mut drifted = chain.clone();
        for p in &mut drifted.positions {
            p.x += 0.1;
        }
        let out = backward_phase(&drifted);
        assert_eq!(out.positions[0], Vec3::zeros());
        assert_lengths(&out);
    }

    #[test]
    fn backward_clamps_against_reference() {
        // Joint 0 limited to [−0.5, 0.5] relative to +x; link 0 points +y (φ = π/2).
        let joints = vec![
            JointSpec::hinge(Vec3::z(), JointLimit::new(-0.5, 0.5)),
            JointSpec::hinge(Vec3::z(), JointLimit::FULL_TURN),
        ];
        let chain = ChainState::from_positions(
            vec![Vec3::zeros(), Vec3::y(), Vec3::new(0.0, 2.0, 0.0)],
            joints,
            Some(Vec3::x()),
        )
        .unwrap();
        let (out, geo) = backward_phase_geometry(&chain);
        assert_abs_diff_eq!(geo[0].phi, FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(geo[0].delta_phi, 0.5 - FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(
            out.positions[1],
            Vec3::new(0.5f64.cos(), 0.5f64.sin(), 0.0),
            epsilon = 1e-15
        );
        let angles = out.joint_angles();
        assert_abs_diff_eq!(angles[0], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn coincident_points_fall_back_to_previous_direction() {
        let chain = planar_unit_chain(JointLimit::FULL_TURN);
        // Target on joint 1: link 1 collapses onto it in the forward phase.
        let out = forward_phase(&chain, &Vec3::new(1.0, 0.0, 0.0));
        assert!(out.positions.iter().all(|p| p.iter().all(|v| v.is_finite())));
        assert_lengths(&out);
    }

    #[test]
    fn pre_bend_straight_and_bent() {
        let chain = planar_unit_chain(JointLimit::FULL_TURN);
        let cfg = PreBend::default();
        let bent = pre_bend(&chain, &Vec3::new(1.0, 1.0, 0.0), &cfg);
        assert_abs_diff_eq!(bent.joint_angles()[1], cfg.angle, epsilon = 1e-12);
        assert_lengths(&bent);
        let again = pre_bend(&bent, &Vec3::new(1.0, 1.0, 0.0), &cfg);
        assert_eq!(again, bent);
    }

    #[test]
    fn pre_bend_ball_chain_bends_toward_target() {
        let chain = ChainState::straight(
            Vec3::zeros(),
            Vec3::z(),
            vec![1.0, 1.0, 1.0],
            vec![JointSpec::free_ball(); 3],
            Some(Vec3::z()),
        )
        .unwrap();
        let target = Vec3::new(0.0, 1.0, 1.0);
        let bent = pre_bend(&chain, &target, &PreBend::default());
        let angles = bent.joint_angles();
        assert_abs_diff_eq!(angles[1], 1e-3, epsilon = 1e-12);
        assert_abs_diff_eq!(angles[2], 1e-3, epsilon = 1e-12);
        // Bending happens in the plane spanned by the chain and the target.
        assert!(bent.positions.iter().all(|p| p.x.abs() < 1e-15));
    }

    #[test]
    fn target_at_end_needs_no_sweep() {
        let chain = planar_unit_chain(JointLimit::FULL_TURN);
        let out = solve(&chain, &Vec3::new(2.0, 0.0, 0.0), 1e-6, 10, true).unwrap();
        assert!(out.converged());
        assert_eq!(out.iterations, 0);
        assert_eq!(out.trace.unwrap().len(), 0);
    }

    #[test]
    fn reach_sphere_target_approaches_full_extension() {
        // Full extension is the only solution; progress is sublinear on the boundary,
        // while a target slightly inside converges.
        let chain = planar_unit_chain(JointLimit::FULL_TURN);
        for beta in [0.3, 1.0, 2.0, -2.5] {
            let dir = Vec3::new(f64::cos(beta), f64::sin(beta), 0.0);
            let short = solve(&chain, &(dir * 2.0), 1e-6, 100, true).unwrap();
            let long = solve(&chain, &(dir * 2.0), 1e-6, 1000, false).unwrap();
            let trace = short.trace.unwrap();
            assert!(trace.windows(2).all(|w| w[1].1 <= w[0].1), "beta {beta}");
            assert!(long.dist < short.dist);
            let elbow_offset = (long.chain.positions[1] - dir).norm();
            assert!(
                elbow_offset <= 2.0 * long.dist.sqrt(),
                "beta {beta}: elbow off by {elbow_offset}"
            );

            let inside = solve(&chain, &(dir * 1.99), 1e-9, 1000, false).unwrap();
            assert!(inside.converged(), "beta {beta}: dist {}", inside.dist);
        }
    }

    #[test]
    fn unreachable_target_is_not_iterated() {
        let chain = planar_unit_chain(JointLimit::FULL_TURN);
        let out = solve(&chain, &Vec3::new(3.0, 0.0, 0.0), 1e-6, 10, false).unwrap();
        assert_eq!(out.status, FabrikStatus::Unreachable);
        assert_eq!(out.iterations, 0);
        assert_eq!(out.chain, chain);
    }

    #[test]
    fn slight_bend_needs_many_sweeps() {
        let chain = pre_bend(
            &planar_unit_chain(JointLimit::FULL_TURN),
            &Vec3::x(),
            &PreBend::default(),
        );
        let target = Vec3::new(1.99, 0.05, 0.0);
        let out = solve(&chain, &target, 1e-6, 100_000, true).unwrap();
        assert!(out.converged());
        assert!(out.iterations > 15, "took {}", out.iterations);
        let trace = out.trace.unwrap();
        assert_eq!(trace.len(), out.iterations);
        assert!(trace.iter().all(|(_, d)| d.is_finite()));
    }

    #[test]
    fn invalid_inputs_are_errors() {
        let chain = planar_unit_chain(JointLimit::FULL_TURN);
        assert!(solve(&chain, &Vec3::x(), 0.0, 10, false).is_err());
        assert!(solve(&chain, &Vec3::new(f64::NAN, 0.0, 0.0), 1e-6, 10, false).is_err());
        let bad_axis = vec![JointSpec::hinge(Vec3::new(0.0, 0.0, 2.0), JointLimit::FULL_TURN); 2];
        assert!(ChainState::straight(Vec3::zeros(), Vec3::x(), vec![1.0, 1.0], bad_axis, None).is_err());
        assert!(ChainState::straight(
            Vec3::zeros(),
            Vec3::x(),
            vec![1.0, -1.0],
            vec![JointSpec::free_ball(); 2],
            None
        )
        .is_err());
    }
}
