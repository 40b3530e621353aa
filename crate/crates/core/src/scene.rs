//! Scene documents: a complete, re-renderable visualization setup that the
//! interactive viewer loads.
//!
//! Serialized as pretty-printed JSON with keys in declaration order and
//! floats in shortest round-trip form, so `serialize` output is canonical.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{AnalysisReport, EigenplaneElement, IntersectionSegment, Singularity};
use crate::integrator::{Trajectory, TrajectoryPoint};
use crate::model::{CircuitParams, StateVector};
use crate::render::SceneStyle;
use crate::trajectory_io::{self, write_atomic, TrajectoryFormat, TrajectoryIoError};

pub const SCENE_FORMAT_VERSION: u32 = 1;
pub const SCENE_EXTENSION: &str = ".chua-scene.json";

pub const COMET_MIN: u32 = 512;
pub const COMET_MAX: u32 = 16384;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("MALFORMED: {0}")]
    Malformed(String),
    #[error("INVALID at `{path}`: {reason}")]
    Invalid { path: String, reason: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryIoError),
}

impl SceneError {
    fn invalid(path: &str, reason: impl Into<String>) -> Self {
        SceneError::Invalid { path: path.to_string(), reason: reason.into() }
    }
}

/// Length of the comet tail in sequential playback, in trajectory points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct CometLength(u32);

#[derive(Debug, Error, PartialEq)]
#[error("comet_length {0} outside [{COMET_MIN}, {COMET_MAX}]")]
pub struct CometLengthError(pub u32);

impl CometLength {
    pub const DEFAULT: CometLength = CometLength(4096);

    pub fn new(n: u32) -> Result<Self, CometLengthError> {
        if (COMET_MIN..=COMET_MAX).contains(&n) {
            Ok(CometLength(n))
        } else {
            Err(CometLengthError(n))
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

impl TryFrom<u32> for CometLength {
    type Error = CometLengthError;
    fn try_from(n: u32) -> Result<Self, Self::Error> {
        CometLength::new(n)
    }
}

impl From<CometLength> for u32 {
    fn from(c: CometLength) -> u32 {
        c.0
    }
}

impl fmt::Display for CometLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PlaybackMode {
    /// Whole attractor at once.
    #[default]
    Continuous,
    /// Moving point with a fading comet tail.
    Sequential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViewerDefaults {
    pub mode: PlaybackMode,
    pub comet_length: CometLength,
    /// Playback rate, trajectory points per wall-clock second.
    pub draw_speed: f64,
    /// Camera rotation step in degrees.
    pub angle_step: f64,
}

impl Default for ViewerDefaults {
    fn default() -> Self {
        ViewerDefaults { mode: PlaybackMode::Continuous, comet_length: CometLength::DEFAULT, draw_speed: 2000.0, angle_step: 5.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrajectorySource {
    /// Rows of `[t, u1, u2, i]`.
    Inline { points: Vec<[f64; 4]> },
    /// Path relative to the scene file.
    File { path: String, format: TrajectoryFormat },
}

impl Default for TrajectorySource {
    fn default() -> Self {
        TrajectorySource::Inline { points: Vec::new() }
    }
}

impl TrajectorySource {
    pub fn inline(traj: &Trajectory) -> Self {
        TrajectorySource::Inline { points: traj.points.iter().map(|p| [p.t, p.state.u1, p.state.u2, p.state.i]).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneDocument {
    pub format_version: u32,
    pub params: CircuitParams,
    pub trajectory: TrajectorySource,
    pub singularities: Vec<Singularity>,
    pub planes: Vec<EigenplaneElement>,
    pub segments: Vec<IntersectionSegment>,
    pub style: SceneStyle,
    pub viewer_defaults: ViewerDefaults,
}

impl SceneDocument {
    /// Document with only parameters set; everything else defaulted.
    pub fn new(params: CircuitParams) -> Self {
        SceneDocument {
            format_version: SCENE_FORMAT_VERSION,
            params,
            trajectory: TrajectorySource::default(),
            singularities: Vec::new(),
            planes: Vec::new(),
            segments: Vec::new(),
            style: SceneStyle::default(),
            viewer_defaults: ViewerDefaults::default(),
        }
    }

    pub fn from_analysis(report: &AnalysisReport, trajectory: TrajectorySource, style: SceneStyle, viewer: ViewerDefaults) -> Self {
        SceneDocument {
            format_version: SCENE_FORMAT_VERSION,
            params: report.params,
            trajectory,
            singularities: report.singularities.clone(),
            planes: report.planes.clone(),
            segments: report.intersection_segments(),
            style,
            viewer_defaults: viewer,
        }
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        if self.format_version != SCENE_FORMAT_VERSION {
            return Err(SceneError::invalid("format_version", format!("unsupported version {}", self.format_version)));
        }
        self.params.validate().map_err(|e| SceneError::invalid("params", e.to_string()))?;
        self.style.validate().map_err(|e| SceneError::invalid("style", e))?;
        let v = &self.viewer_defaults;
        if !(v.draw_speed > 0.0 && v.draw_speed.is_finite()) {
            return Err(SceneError::invalid("viewer_defaults.draw_speed", "must be > 0"));
        }
        if !(v.angle_step != 0.0 && v.angle_step.is_finite()) {
            return Err(SceneError::invalid("viewer_defaults.angle_step", "must be non-zero"));
        }
        match &self.trajectory {
            TrajectorySource::Inline { points } => {
                if let Some(k) = points.iter().position(|p| !p.iter().all(|x| x.is_finite())) {
                    return Err(SceneError::invalid(&format!("trajectory.points[{k}]"), "non-finite value"));
                }
            }
            TrajectorySource::File { path, .. } => {
                if path.is_empty() {
                    return Err(SceneError::invalid("trajectory.path", "empty path"));
                }
            }
        }
        for (k, p) in self.planes.iter().enumerate() {
            if !(p.half_width > 0.0 && p.half_length > 0.0) {
                return Err(SceneError::invalid(&format!("planes[{k}]"), "extents must be > 0"));
            }
        }
        Ok(())
    }

    pub fn serialize(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scene documents always serialize");
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<Self, SceneError> {
        let mut de = serde_json::Deserializer::from_str(text);
        let doc: SceneDocument = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            match inner.classify() {
                serde_json::error::Category::Data => SceneError::Invalid { path, reason: inner.to_string() },
                _ => SceneError::Malformed(inner.to_string()),
            }
        })?;
        de.end().map_err(|e| SceneError::Malformed(e.to_string()))?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn load(path: &Path) -> Result<Self, SceneError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), SceneError> {
        self.validate()?;
        let text = self.serialize();
        write_atomic(path, |f| std::io::Write::write_all(f, text.as_bytes()))?;
        Ok(())
    }

    /// Absolute location of a referenced trajectory file.
    pub fn trajectory_path(&self, scene_path: &Path) -> Option<PathBuf> {
        match &self.trajectory {
            TrajectorySource::File { path, .. } => {
                let base = scene_path.parent().unwrap_or(Path::new(""));
                Some(base.join(path))
            }
            TrajectorySource::Inline { .. } => None,
        }
    }

    /// Materializes the trajectory, decimating on load when `max_points` is set.
    pub fn load_trajectory(&self, scene_path: &Path, max_points: Option<usize>) -> Result<Trajectory, SceneError> {
        match &self.trajectory {
            TrajectorySource::Inline { points } => {
                let traj = Trajectory::from_points(
                    points.iter().map(|p| TrajectoryPoint { t: p[0], state: StateVector::new(p[1], p[2], p[3]) }).collect(),
                );
                match max_points {
                    Some(n) if traj.len() >= 2 => Ok(crate::integrator::decimate(&traj, n.max(2)).expect("len >= 2")),
                    _ => Ok(traj),
                }
            }
            TrajectorySource::File { .. } => {
                let path = self.trajectory_path(scene_path).expect("file source");
                Ok(trajectory_io::load_trajectory(&path, max_points)?)
            }
        }
    }
}

/// Relative path from the scene file's directory to `target`, when both
/// share a prefix; otherwise `target` as given.
pub fn relative_reference(scene_path: &Path, target: &Path) -> String {
    let base = scene_path.parent().unwrap_or(Path::new(""));
    let abs = |p: &Path| std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf());
    let (base, target_abs) = (abs(base), abs(target));
    let b: Vec<_> = base.components().collect();
    let t: Vec<_> = target_abs.components().collect();
    let common = b.iter().zip(&t).take_while(|(x, y)| x == y).count();
    if common == 0 {
        return target.to_string_lossy().into_owned();
    }
    let mut rel = PathBuf::new();
    for _ in common..b.len() {
        rel.push("..");
    }
    for c in &t[common..] {
        rel.push(c.as_os_str());
    }
    rel.to_string_lossy().into_owned()
}
