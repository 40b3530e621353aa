//! Orthographic projection of state space and deterministic rendering of
//! trajectories, eigenplanes, intersection segments and I-V curves.
//!
//! World coordinates are `(u1, u2, i)`. The axonometric camera first turns
//! the scene about the `u2` axis by the azimuth, then about the horizontal
//! screen axis by the elevation:
//!
//! ```text
//! x1    =  u1·cos(az) + i·sin(az)
//! d1    = −u1·sin(az) + i·cos(az)
//! sx    =  x1
//! sy    =  u2·cos(el) + d1·sin(el)
//! depth = −u2·sin(el) + d1·cos(el)
//! ```
//!
//! so `(az, el) = (0, 0)` is exactly the `u2`–`u1` Monge view and `(0, 90)`
//! exactly the `i`–`u1` view. The `i`–`u2` view is `(90, 0)` with the screen
//! axes transposed.

pub mod raster;
pub mod svg;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{EigenplaneElement, IntersectionSegment};
use crate::color::Rgba;
use crate::integrator::Bounds;
use crate::linalg::Vec3;
use crate::model::{CircuitParams, StateVector};
use crate::trajectory_io::write_atomic;

pub use raster::Image;

pub const MIN_IMAGE_SIDE: u32 = 64;
pub const IV_SAMPLES: usize = 1000;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("EMPTY_SCENE: nothing to draw")]
    EmptyScene,
    #[error("image size {0}x{1} below the {MIN_IMAGE_SIDE}px minimum")]
    TooSmall(u32, u32),
    #[error("invalid render argument: {0}")]
    Invalid(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MongePlane {
    /// `(u1, i)`
    IU1,
    /// `(u2, i)`
    IU2,
    /// `(u1, u2)`
    U2U1,
}

impl MongePlane {
    pub fn project(self, x: StateVector) -> [f64; 2] {
        match self {
            MongePlane::IU1 => [x.u1, x.i],
            MongePlane::IU2 => [x.u2, x.i],
            MongePlane::U2U1 => [x.u1, x.u2],
        }
    }

    /// Camera angles whose axonometric view matches this plane, and whether
    /// the screen axes must be transposed to get there.
    pub fn axonometric_equivalent(self) -> (f64, f64, bool) {
        match self {
            MongePlane::U2U1 => (0.0, 0.0, false),
            MongePlane::IU1 => (0.0, 90.0, false),
            MongePlane::IU2 => (90.0, 0.0, true),
        }
    }

    /// Whether the I-V overlay is drawn in this view.
    pub fn shows_iv(self) -> bool {
        matches!(self, MongePlane::IU1 | MongePlane::U2U1)
    }
}

pub fn project_monge(points: &[StateVector], plane: MongePlane) -> Vec<[f64; 2]> {
    points.iter().map(|&x| plane.project(x)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CameraMode {
    #[default]
    Orthographic,
}

/// `sin` and `cos` of an angle in degrees, exact at multiples of 90°.
pub fn sin_cos_deg(deg: f64) -> (f64, f64) {
    let r = deg.rem_euclid(360.0);
    if r == 0.0 {
        (0.0, 1.0)
    } else if r == 90.0 {
        (1.0, 0.0)
    } else if r == 180.0 {
        (0.0, -1.0)
    } else if r == 270.0 {
        (-1.0, 0.0)
    } else {
        r.to_radians().sin_cos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    pub azimuth: f64,
    pub elevation: f64,
    pub center: StateVector,
    /// State-space units per pixel.
    pub scale: f64,
    #[serde(default)]
    pub mode: CameraMode,
}

impl Default for Camera {
    fn default() -> Self {
        Camera { azimuth: 0.0, elevation: 0.0, center: StateVector::ORIGIN, scale: 0.01, mode: CameraMode::Orthographic }
    }
}

impl Camera {
    /// Camera with azimuth in `[0, 360)` and elevation in `[-90, 90]`.
    /// Elevations past a pole continue from the opposite azimuth, which
    /// keeps the viewing direction and turns the picture upright.
    pub fn new(azimuth: f64, elevation: f64, center: StateVector, scale: f64) -> Result<Self, RenderError> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(RenderError::Invalid(format!("camera scale must be > 0, got {scale}")));
        }
        if !(azimuth.is_finite() && elevation.is_finite()) {
            return Err(RenderError::Invalid("camera angles must be finite".into()));
        }
        let mut az = azimuth;
        let mut el = (elevation + 180.0).rem_euclid(360.0) - 180.0;
        if el > 90.0 {
            el = 180.0 - el;
            az += 180.0;
        } else if el < -90.0 {
            el = -180.0 - el;
            az += 180.0;
        }
        Ok(Camera { azimuth: az.rem_euclid(360.0), elevation: el, center, scale, mode: CameraMode::Orthographic })
    }

    pub fn with_angles(&self, azimuth: f64, elevation: f64) -> Result<Self, RenderError> {
        Camera::new(azimuth, elevation, self.center, self.scale)
    }

    /// Rotated coordinates `(sx, sy, depth)`; linear in `x`.
    pub fn rotate(&self, x: StateVector) -> Vec3 {
        let (sa, ca) = sin_cos_deg(self.azimuth);
        let (se, ce) = sin_cos_deg(self.elevation);
        let x1 = x.u1 * ca + x.i * sa;
        let d1 = -x.u1 * sa + x.i * ca;
        [x1, x.u2 * ce + d1 * se, -x.u2 * se + d1 * ce]
    }

    /// Screen offset from the view centre, in pixels (y up).
    pub fn project(&self, x: StateVector) -> [f64; 2] {
        let p = self.rotate(x);
        let c = self.rotate(self.center);
        [(p[0] - c[0]) / self.scale, (p[1] - c[1]) / self.scale]
    }
}

pub fn project_axonometric(points: &[StateVector], cam: &Camera) -> Vec<[f64; 2]> {
    points.iter().map(|&x| cam.project(x)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "plane", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Projection {
    Monge(MongePlane),
    Axonometric,
}

/// Projection plus the camera supplying centre and scale (and, for the
/// axonometric projection, the angles).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct View {
    pub projection: Projection,
    pub camera: Camera,
}

impl View {
    /// Screen offset from the view centre in pixels, y up.
    pub fn project(&self, x: StateVector) -> [f64; 2] {
        match self.projection {
            Projection::Monge(plane) => {
                let p = plane.project(x);
                let c = plane.project(self.camera.center);
                [(p[0] - c[0]) / self.camera.scale, (p[1] - c[1]) / self.camera.scale]
            }
            Projection::Axonometric => self.camera.project(x),
        }
    }

    /// Pixel coordinates in a `w × h` image (row 0 at the top).
    pub fn to_pixel(&self, x: StateVector, size: (u32, u32)) -> [f64; 2] {
        let p = self.project(x);
        [size.0 as f64 / 2.0 + p[0], size.1 as f64 / 2.0 - p[1]]
    }

    fn shows_iv(&self) -> Option<MongePlane> {
        match self.projection {
            Projection::Monge(p) if p.shows_iv() => Some(p),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneStyle {
    pub background: Rgba,
    pub trajectory_color: Rgba,
    pub trajectory_point_size: u32,
    /// `g(u1)` and load-line colours.
    pub iv_colors: [Rgba; 2],
    pub iv_line_width: u32,
    /// EP+, E0, EP−.
    pub plane_colors: [Rgba; 3],
    pub segment_color: Rgba,
    pub segment_width: u32,
}

impl Default for SceneStyle {
    fn default() -> Self {
        SceneStyle {
            background: Rgba::rgb(255, 255, 255),
            trajectory_color: Rgba::rgb(20, 20, 140),
            trajectory_point_size: 1,
            iv_colors: [Rgba::rgb(200, 30, 30), Rgba::rgb(30, 140, 30)],
            iv_line_width: 1,
            plane_colors: [Rgba::rgba(220, 60, 60, 90), Rgba::rgba(60, 180, 90, 90), Rgba::rgba(60, 100, 220, 90)],
            segment_color: Rgba::rgb(255, 160, 0),
            segment_width: 3,
        }
    }
}

impl SceneStyle {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("trajectory_point_size", self.trajectory_point_size),
            ("iv_line_width", self.iv_line_width),
            ("segment_width", self.segment_width),
        ] {
            if v == 0 {
                return Err(format!("{name} must be > 0"));
            }
        }
        Ok(())
    }
}

/// Everything drawable in one frame.
#[derive(Debug, Clone, Copy)]
pub struct Scene<'a> {
    pub params: &'a CircuitParams,
    pub trajectory: &'a [StateVector],
    pub planes: &'a [EigenplaneElement],
    pub segments: &'a [IntersectionSegment],
    pub iv_overlay: bool,
}

impl Scene<'_> {
    pub fn is_empty(&self) -> bool {
        self.trajectory.is_empty() && self.planes.is_empty() && self.segments.is_empty() && !self.iv_overlay
    }

    /// All 3D content points (trajectory, plane corners, segment endpoints).
    fn content_points(&self) -> impl Iterator<Item = StateVector> + '_ {
        self.trajectory
            .iter()
            .copied()
            .chain(self.planes.iter().flat_map(|p| p.corners()))
            .chain(self.segments.iter().flat_map(|s| s.endpoints()))
    }
}

/// Fits a camera so the scene fills the frame with `margin` (fraction of
/// the half-size) to spare. Uses the bounding sphere, so the fit does not
/// change as the camera orbits.
pub fn fit_camera(scene: &Scene<'_>, size: (u32, u32), margin: f64) -> Camera {
    let mut pts: Vec<StateVector> = scene.content_points().collect();
    if pts.is_empty() && scene.iv_overlay {
        pts.extend([StateVector::new(-3.0, -3.0, -3.0), StateVector::new(3.0, 3.0, 3.0)]);
    }
    let Some(b) = Bounds::of(pts.iter().copied()) else {
        return Camera::default();
    };
    let center = (b.min + b.max) * 0.5;
    let radius = pts.iter().map(|&p| {
        let d = p - center;
        (d.u1 * d.u1 + d.u2 * d.u2 + d.i * d.i).sqrt()
    }).fold(0.0, f64::max);
    let half = size.0.min(size.1) as f64 / 2.0;
    let scale = if radius > 0.0 { radius * (1.0 + margin) / half } else { 0.01 };
    Camera { center, scale, ..Camera::default() }
}

/// Sampled `g(u1)` and load line over `[lo, hi]`.
///
/// The load line is `−G_eff·u1 − I` with `G_eff = G / (1 + G·ρ)`: the value
/// of `i` on the equilibrium set, so the two curves cross exactly at the
/// singularities' `(u1, i)` projections.
pub fn iv_curves(params: &CircuitParams, lo: f64, hi: f64, samples: usize) -> [Vec<[f64; 2]>; 2] {
    let n = samples.max(2);
    let g_eff = params.g_load / (1.0 + params.g_load * params.rho);
    let xs: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect();
    [
        xs.iter().map(|&u| [u, params.nonlinearity(u)]).collect(),
        xs.iter().map(|&u| [u, -g_eff * u - params.i_pulse]).collect(),
    ]
}

/// I-V curves in pixel space for a Monge view, sampled over the visible
/// `u1` range.
fn iv_pixels(scene: &Scene<'_>, view: &View, plane: MongePlane, size: (u32, u32)) -> [Vec<[f64; 2]>; 2] {
    let cam = &view.camera;
    let c = plane.project(cam.center);
    let half = size.0 as f64 / 2.0 * cam.scale;
    let curves = iv_curves(scene.params, c[0] - half, c[0] + half, IV_SAMPLES);
    curves.map(|pts| {
        pts.into_iter()
            .map(|[u, v]| [size.0 as f64 / 2.0 + (u - c[0]) / cam.scale, size.1 as f64 / 2.0 - (v - c[1]) / cam.scale])
            .collect()
    })
}

fn check_size(size: (u32, u32)) -> Result<(), RenderError> {
    if size.0 < MIN_IMAGE_SIDE || size.1 < MIN_IMAGE_SIDE {
        return Err(RenderError::TooSmall(size.0, size.1));
    }
    Ok(())
}

/// Rasterizes one frame: background, plane rectangles, I-V curves,
/// trajectory points, then the intersection segments on top.
pub fn render_frame(scene: &Scene<'_>, view: &View, style: &SceneStyle, size: (u32, u32)) -> Result<Image, RenderError> {
    check_size(size)?;
    if scene.is_empty() {
        return Err(RenderError::EmptyScene);
    }
    style.validate().map_err(RenderError::Invalid)?;
    let mut img = Image::new(size.0, size.1, style.background);
    for plane in scene.planes {
        let quad = plane.corners().map(|c| view.to_pixel(c, size));
        img.fill_convex_polygon(&quad, plane.color);
    }
    if scene.iv_overlay {
        if let Some(plane) = view.shows_iv() {
            let [g, load] = iv_pixels(scene, view, plane, size);
            img.draw_polyline(&g, style.iv_line_width, style.iv_colors[0]);
            img.draw_polyline(&load, style.iv_line_width, style.iv_colors[1]);
        }
    }
    for &x in scene.trajectory {
        let p = view.to_pixel(x, size);
        if p[0].is_finite() && p[1].is_finite() && p[0].abs() < 1e9 && p[1].abs() < 1e9 {
            img.fill_square(p[0].floor() as i64, p[1].floor() as i64, style.trajectory_point_size, style.trajectory_color);
        }
    }
    for seg in scene.segments {
        let [a, b] = seg.endpoints().map(|e| view.to_pixel(e, size));
        img.draw_line(a, b, style.segment_width, style.segment_color);
    }
    Ok(img)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SweepAxis {
    Horizontal,
    Vertical,
}

/// Cameras of an orbit: frame `k` is `cam0` turned by `k·angle_step`.
pub fn sweep_cameras(cam0: &Camera, angle_step: f64, n_frames: usize, axis: SweepAxis) -> Result<Vec<Camera>, RenderError> {
    if n_frames < 1 {
        return Err(RenderError::Invalid("n_frames must be >= 1".into()));
    }
    if angle_step == 0.0 || !angle_step.is_finite() {
        return Err(RenderError::Invalid("angle_step must be non-zero".into()));
    }
    (0..n_frames)
        .map(|k| {
            let delta = k as f64 * angle_step;
            match axis {
                SweepAxis::Horizontal => cam0.with_angles(cam0.azimuth + delta, cam0.elevation),
                SweepAxis::Vertical => cam0.with_angles(cam0.azimuth, cam0.elevation + delta),
            }
        })
        .collect()
}

/// Renders an orbit in the axonometric projection; frames render in parallel.
pub fn render_sweep(
    scene: &Scene<'_>,
    cam0: &Camera,
    style: &SceneStyle,
    size: (u32, u32),
    angle_step: f64,
    n_frames: usize,
    axis: SweepAxis,
) -> Result<Vec<Image>, RenderError> {
    let cams = sweep_cameras(cam0, angle_step, n_frames, axis)?;
    cams.par_iter()
        .map(|cam| render_frame(scene, &View { projection: Projection::Axonometric, camera: *cam }, style, size))
        .collect()
}

pub fn frame_file_name(index: usize, extension: &str) -> String {
    format!("frame_{index:05}.{extension}")
}

/// Writes `frame_00000.ppm`, `frame_00001.ppm`, … into `dir`.
pub fn write_frames(dir: &Path, frames: &[Image]) -> Result<Vec<PathBuf>, RenderError> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::with_capacity(frames.len());
    for (k, img) in frames.iter().enumerate() {
        let path = dir.join(frame_file_name(k, "ppm"));
        write_atomic(&path, |f| img.write_ppm(f))?;
        paths.push(path);
    }
    Ok(paths)
}
