//! File formats shared by the harnesses and the command line.

use std::path::Path;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{Transform, Vec3};

/// Pose document: `{"position": [x, y, z], "rotation": [[r11, r12, r13], …]}`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseDoc {
    pub position: [f64; 3],
    pub rotation: [[f64; 3]; 3],
}

impl From<&Transform> for PoseDoc {
    fn from(t: &Transform) -> Self {
        let r = &t.rotation;
        Self {
            position: [t.translation.x, t.translation.y, t.translation.z],
            rotation: std::array::from_fn(|i| std::array::from_fn(|j| r[(i, j)])),
        }
    }
}

impl From<&PoseDoc> for Transform {
    fn from(doc: &PoseDoc) -> Self {
        let r = &doc.rotation;
        Transform::new(
            Matrix3::from_fn(|i, j| r[i][j]),
            Vec3::new(doc.position[0], doc.position[1], doc.position[2]),
        )
    }
}

/// Parses a pose document; the error names the offending field.
pub fn pose_from_json(text: &str) -> Result<Transform> {
    let doc: PoseDoc = serde_json::from_str(text)?;
    let t = Transform::from(&doc);
    if !t.is_finite() {
        return Err(Error::InvalidInput("pose contains non-finite values".into()));
    }
    Ok(t)
}

pub fn read_pose(path: &Path) -> Result<Transform> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    pose_from_json(&text)
}

pub fn pose_to_json(t: &Transform) -> String {
    serde_json::to_string_pretty(&PoseDoc::from(t)).expect("pose serializes")
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))
}

pub(crate) fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}
