use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::geometry::wrap_angle;
use super::transform::Transform;
use crate::error::{Error, Result};

const BUILTIN_MODELS: &str = include_str!("../../data/robots.json");
const STRUCTURE_TOLERANCE: f64 = 1e-9;

/// One row of a standard Denavit–Hartenberg table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DhRow {
    pub a: f64,
    pub alpha: f64,
    pub d: f64,
    #[serde(default)]
    pub theta_offset: f64,
}

impl DhRow {
    pub const fn new(a: f64, alpha: f64, d: f64) -> Self {
        Self {
            a,
            alpha,
            d,
            theta_offset: 0.0,
        }
    }
}

/// Link transform `Rot_z(θ) · Trans_z(d) · Trans_x(a) · Rot_x(α)` with θ including the row offset.
pub fn dh_transform(row: &DhRow, theta: f64) -> Transform {
    let (st, ct) = (theta + row.theta_offset).sin_cos();
    let (sa, ca) = row.alpha.sin_cos();
    #[rustfmt::skip]
    let rotation = Matrix3::new(
        ct, -st * ca,  st * sa,
        st,  ct * ca, -ct * sa,
        0.0,      sa,       ca,
    );
    Transform::new(rotation, Vector3::new(row.a * ct, row.a * st, row.d))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct JointLimit {
    pub lo: f64,
    pub hi: f64,
}

impl JointLimit {
    pub const FULL_TURN: JointLimit = JointLimit { lo: -PI, hi: PI };

    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.lo <= theta && theta <= self.hi
    }

    pub fn clamp(&self, theta: f64) -> f64 {
        theta.clamp(self.lo, self.hi)
    }

    /// True when the interval covers every angle, so it constrains nothing modulo 2π.
    pub fn is_full_turn(&self) -> bool {
        self.hi - self.lo >= 2.0 * PI - 1e-12
    }

    /// Box for a local search started at `seed`: the limit itself, or for a full-turn
    /// joint an interval of ±2π around the seed, so the search never pins at the ±π seam.
    /// Results must be wrapped before they are compared against the limit.
    pub fn search_interval(&self, seed: f64) -> JointLimit {
        if self.is_full_turn() {
            JointLimit::new(seed - 2.0 * PI, seed + 2.0 * PI)
        } else {
            *self
        }
    }
}

impl From<[f64; 2]> for JointLimit {
    fn from(v: [f64; 2]) -> Self {
        JointLimit::new(v[0], v[1])
    }
}

impl From<JointLimit> for [f64; 2] {
    fn from(l: JointLimit) -> Self {
        [l.lo, l.hi]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RobotKind {
    Ur5,
    Kuka,
}

impl RobotKind {
    pub fn dof(self) -> usize {
        match self {
            RobotKind::Ur5 => 6,
            RobotKind::Kuka => 7,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RobotKind::Ur5 => "ur5",
            RobotKind::Kuka => "kuka",
        }
    }
}

impl std::fmt::Display for RobotKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for RobotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ur5" => Ok(RobotKind::Ur5),
            "kuka" | "iiwa" | "iiwa14" => Ok(RobotKind::Kuka),
            other => Err(Error::InvalidInput(format!(
                "unknown robot '{other}' (expected ur5 or kuka)"
            ))),
        }
    }
}

/// DH kinematics plus joint limits of one manipulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelDoc", into = "ModelDoc")]
pub struct RobotModel {
    kind: RobotKind,
    dh: Vec<DhRow>,
    limits: Vec<JointLimit>,
}

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    name: RobotKind,
    dh: Vec<DhRow>,
    limits: Vec<JointLimit>,
}

impl TryFrom<ModelDoc> for RobotModel {
    type Error = Error;

    fn try_from(doc: ModelDoc) -> Result<Self> {
        RobotModel::new(doc.name, doc.dh, doc.limits)
    }
}

impl From<RobotModel> for ModelDoc {
    fn from(m: RobotModel) -> Self {
        ModelDoc {
            name: m.kind,
            dh: m.dh,
            limits: m.limits,
        }
    }
}

#[derive(Deserialize)]
struct ModelLibrary {
    version: u32,
    models: Vec<RobotModel>,
}

impl RobotModel {
    /// Builds and validates a model. `alpha` values are wrapped to `(-π, π]`.
    pub fn new(kind: RobotKind, mut dh: Vec<DhRow>, limits: Vec<JointLimit>) -> Result<Self> {
        for row in &mut dh {
            row.alpha = wrap_angle(row.alpha);
        }
        let model = Self { kind, dh, limits };
        model.validate()?;
        Ok(model)
    }

    /// Universal Robots UR5 with ±π limits.
    pub fn ur5() -> Self {
        Self::builtin(RobotKind::Ur5)
    }

    /// KUKA LBR iiwa 14 R820 with ±π limits.
    pub fn kuka_iiwa14() -> Self {
        Self::builtin(RobotKind::Kuka)
    }

    pub fn builtin(kind: RobotKind) -> Self {
        let library: ModelLibrary = serde_json::from_str(BUILTIN_MODELS).expect("embedded robot data is valid");
        debug_assert_eq!(library.version, 1);
        library
            .models
            .into_iter()
            .find(|m| m.kind == kind)
            .expect("embedded robot data covers every kind")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDoc = serde_json::from_str(text)?;
        Self::try_from(doc)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn kind(&self) -> RobotKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.as_str()
    }

    pub fn dof(&self) -> usize {
        self.dh.len()
    }

    pub fn dh(&self) -> &[DhRow] {
        &self.dh
    }

    pub fn limits(&self) -> &[JointLimit] {
        &self.limits
    }

    pub fn with_limits(mut self, limits: Vec<JointLimit>) -> Result<Self> {
        self.limits = limits;
        self.validate()?;
        Ok(self)
    }

    /// Link lengths of the reduced chains.
    ///
    /// UR5: `[d1, |a2|, |a3|, d4, d5, d6]`; `l4` is the lateral shoulder/wrist offset
    /// `d4`, which equals the wrist's distance from the arm plane.
    /// KUKA: `[d1, d3, d5, d7]` (base, upper arm, forearm, flange).
    pub fn link_lengths(&self) -> Vec<f64> {
        let r = &self.dh;
        match self.kind {
            RobotKind::Ur5 => vec![r[0].d, r[1].a.abs(), r[2].a.abs(), r[3].d, r[4].d, r[5].d],
            RobotKind::Kuka => vec![r[0].d, r[2].d, r[4].d, r[6].d],
        }
    }

    pub fn within_limits(&self, theta: &[f64]) -> bool {
        theta.len() == self.dof() && theta.iter().zip(&self.limits).all(|(t, l)| l.contains(*t))
    }

    pub fn check_dof(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.dof() {
            return Err(Error::DofMismatch {
                expected: self.dof(),
                got: theta.len(),
            });
        }
        Ok(())
    }

    /// `∏ A_n` over all joints.
    pub fn forward_kinematics(&self, theta: &[f64]) -> Result<Transform> {
        self.check_dof(theta)?;
        Ok(self.fk_prefix(theta, self.dof()))
    }

    /// Product of the first `n` link transforms; `theta` must hold at least `n` angles.
    pub fn fk_prefix(&self, theta: &[f64], n: usize) -> Transform {
        self.dh
            .iter()
            .zip(theta)
            .take(n)
            .fold(Transform::identity(), |acc, (row, &t)| acc * dh_transform(row, t))
    }

    /// Cumulative frames `T_0 = I, T_1, …, T_k`.
    pub fn frames(&self, theta: &[f64]) -> Result<Vec<Transform>> {
        self.check_dof(theta)?;
        let mut out = Vec::with_capacity(self.dof() + 1);
        let mut acc = Transform::identity();
        out.push(acc);
        for (row, &t) in self.dh.iter().zip(theta) {
            acc = acc * dh_transform(row, t);
            out.push(acc);
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.kind.dof();
        if self.dh.len() != k {
            return Err(invalid(format!(
                "{} needs {k} DH rows, got {}",
                self.kind,
                self.dh.len()
            )));
        }
        if self.limits.len() != k {
            return Err(invalid(format!(
                "{} needs {k} joint limits, got {}",
                self.kind,
                self.limits.len()
            )));
        }
        for (i, row) in self.dh.iter().enumerate() {
            if ![row.a, row.alpha, row.d, row.theta_offset]
                .iter()
                .all(|v| v.is_finite())
            {
                return Err(invalid(format!("DH row {} has a non-finite entry", i + 1)));
            }
            if row.theta_offset != 0.0 {
                return Err(invalid(format!(
                    "DH row {}: non-zero theta_offset is not supported by the analytic solvers",
                    i + 1
                )));
            }
        }
        for (i, l) in self.limits.iter().enumerate() {
            if !(l.lo.is_finite() && l.hi.is_finite() && l.lo < l.hi) {
                return Err(invalid(format!(
                    "joint {} limit [{}, {}] is not an interval",
                    i + 1,
                    l.lo,
                    l.hi
                )));
            }
        }
        match self.kind {
            RobotKind::Ur5 => self.validate_ur5(),
            RobotKind::Kuka => self.validate_kuka(),
        }
    }

    fn validate_ur5(&self) -> Result<()> {
        let alphas = [FRAC_PI_2, 0.0, 0.0, FRAC_PI_2, -FRAC_PI_2, 0.0];
        self.check_alphas(&alphas)?;
        let r = &self.dh;
        let zero_a = [0, 3, 4, 5].iter().all(|&i| r[i].a == 0.0);
        let zero_d = r[1].d == 0.0 && r[2].d == 0.0;
        if !(zero_a && zero_d) {
            return Err(invalid("ur5 layout needs a1 = a4 = a5 = a6 = 0 and d2 = d3 = 0".into()));
        }
        if !(r[1].a < 0.0 && r[2].a < 0.0) {
            return Err(invalid("ur5 layout needs negative a2 and a3".into()));
        }
        if ![0, 3, 4, 5].iter().all(|&i| r[i].d > 0.0) {
            return Err(invalid("ur5 layout needs positive d1, d4, d5, d6".into()));
        }
        Ok(())
    }

    fn validate_kuka(&self) -> Result<()> {
        let alphas = [-FRAC_PI_2, FRAC_PI_2, -FRAC_PI_2, FRAC_PI_2, -FRAC_PI_2, FRAC_PI_2, 0.0];
        self.check_alphas(&alphas)?;
        let r = &self.dh;
        if r.iter().any(|row| row.a != 0.0) || [1, 3, 5].iter().any(|&i| r[i].d != 0.0) {
            return Err(invalid("kuka layout needs all a = 0 and d2 = d4 = d6 = 0".into()));
        }
        if ![0, 2, 4, 6].iter().all(|&i| r[i].d > 0.0) {
            return Err(invalid("kuka layout needs positive d1, d3, d5, d7".into()));
        }
        Ok(())
    }

    fn check_alphas(&self, expected: &[f64]) -> Result<()> {
        for (i, (row, want)) in self.dh.iter().zip(expected).enumerate() {
            if (row.alpha - want).abs() > STRUCTURE_TOLERANCE {
                return Err(invalid(format!(
                    "{} layout needs alpha{} = {want}, got {}",
                    self.kind,
                    i + 1,
                    row.alpha
                )));
            }
        }
        Ok(())
    }
}

fn invalid(msg: String) -> Error {
    Error::InvalidModel(msg)
}

/// Free-function form of [`RobotModel::forward_kinematics`].
pub fn forward_kinematics(model: &RobotModel, theta: &[f64]) -> Result<Transform> {
    model.forward_kinematics(theta)
}
