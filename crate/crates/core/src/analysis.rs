//! Equilibria of the circuit, their eigenstructure, the eigenplanes through
//! them and the lines where those planes meet.
//!
//! The eigenplane of a saddle-focus is the zero set of the modal coordinate
//! `y1 = α·(x − x*)`, where `α` is the left eigenvector of the real
//! eigenvalue. It contains the real and imaginary parts of the complex right
//! eigenvectors, i.e. the plane the trajectory spirals in near `x*`.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::color::Rgba;
use crate::eigen::{eigen_decompose, EigenDecomposition, EigenError, Spectrum};
use crate::linalg::{self, cross, dot, norm, normalize, scale, sub, Matrix3, Vec3};
use crate::model::{CircuitParams, ModelError, Region, StateVector};

/// Eigenvalue/eigenvector consistency tolerance.
pub const EIGEN_TOL: f64 = 1e-9;
/// Normals closer to parallel than this (cross-product norm) do not intersect.
pub const PARALLEL_TOL: f64 = 1e-9;
pub const DEFAULT_PLANE_HALF_EXTENT: f64 = 3.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error(transparent)]
    Params(#[from] ModelError),
    #[error("DEGENERATE: singular equilibrium equation in region {0}")]
    Degenerate(Region),
    #[error("REPEATED_EIGENVALUE: {0}")]
    RepeatedEigenvalue(String),
    #[error("eigen decomposition failed: {0}")]
    Eigen(String),
    #[error("eigenvectors inconsistent with plane (residual {0:e})")]
    Inconsistent(f64),
    #[error("PARALLEL: planes {0} and {1} do not intersect")]
    Parallel(PlaneLabel, PlaneLabel),
    #[error("planes {0} and {1} intersect outside their rectangles")]
    NoOverlap(PlaneLabel, PlaneLabel),
}

impl From<EigenError> for AnalysisError {
    fn from(e: EigenError) -> Self {
        match e {
            EigenError::RepeatedEigenvalue(z) => AnalysisError::RepeatedEigenvalue(format!("{z}")),
            other => AnalysisError::Eigen(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SingularityLabel {
    PPlus,
    Origin,
    PMinus,
}

impl SingularityLabel {
    pub fn for_region(region: Region) -> Self {
        match region {
            Region::PosMid | Region::PosOuter => SingularityLabel::PPlus,
            Region::Inner => SingularityLabel::Origin,
            Region::NegMid | Region::NegOuter => SingularityLabel::PMinus,
        }
    }

    pub fn plane_label(self) -> PlaneLabel {
        match self {
            SingularityLabel::PPlus => PlaneLabel::EpPlus,
            SingularityLabel::Origin => PlaneLabel::E0,
            SingularityLabel::PMinus => PlaneLabel::EpMinus,
        }
    }
}

impl fmt::Display for SingularityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SingularityLabel::PPlus => "P_PLUS",
            SingularityLabel::Origin => "ORIGIN",
            SingularityLabel::PMinus => "P_MINUS",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PlaneLabel {
    EpPlus,
    E0,
    EpMinus,
}

impl fmt::Display for PlaneLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlaneLabel::EpPlus => "EP_PLUS",
            PlaneLabel::E0 => "E0",
            PlaneLabel::EpMinus => "EP_MINUS",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Singularity {
    pub label: SingularityLabel,
    pub region: Region,
    pub location: StateVector,
    pub jacobian: Matrix3,
    pub eigen: EigenDecomposition,
}

impl Singularity {
    /// The α coefficients: left eigenvector of the real eigenvalue.
    pub fn real_left_eigenvector(&self) -> Vec3 {
        self.eigen.real_left_eigenvector()
    }
}

/// An equilibrium (or a region's candidate) that could not be analysed.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularityFailure {
    pub region: Region,
    pub location: Option<StateVector>,
    pub error: AnalysisError,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SingularitySet {
    pub singularities: Vec<Singularity>,
    pub failures: Vec<SingularityFailure>,
}

impl SingularitySet {
    pub fn get(&self, label: SingularityLabel) -> Option<&Singularity> {
        self.singularities.iter().find(|s| s.label == label)
    }
}

/// Equilibria of the vector field, one linear solve per PWL region.
///
/// Regions are visited from `POS_OUTER` down to `NEG_OUTER`; a root is kept
/// only if it lies in the region that produced it.
pub fn find_singularities(params: &CircuitParams) -> Result<SingularitySet, AnalysisError> {
    params.validate()?;
    let mut set = SingularitySet::default();
    let coupling = 1.0 + params.g_load * params.rho;
    for region in Region::ALL.into_iter().rev() {
        if coupling == 0.0 {
            set.failures.push(SingularityFailure { region, location: None, error: AnalysisError::Degenerate(region) });
            continue;
        }
        // i = -G_eff·u1 and u2 = -ρ·i on the equilibrium manifold.
        let g_eff = params.g_load / coupling;
        let slope = params.region_slope(region);
        let denom = slope + g_eff;
        if denom.abs() <= f64::EPSILON * (slope.abs() + g_eff.abs()) {
            set.failures.push(SingularityFailure { region, location: None, error: AnalysisError::Degenerate(region) });
            continue;
        }
        let u1 = -(params.i_pulse + params.region_offset(region)) / denom;
        if params.region_of(u1) != region {
            continue;
        }
        let i = -g_eff * u1;
        let location = StateVector::new(u1, -params.rho * i, i);
        let jacobian = params.region_jacobian(region);
        match eigen_decompose(&jacobian) {
            Ok(eigen) => set.singularities.push(Singularity {
                label: SingularityLabel::for_region(region),
                region,
                location,
                jacobian,
                eigen,
            }),
            Err(e) => set.failures.push(SingularityFailure { region, location: Some(location), error: e.into() }),
        }
    }
    Ok(set)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PlaneSpan {
    /// Spanned by the real and imaginary parts of the complex eigenvector.
    ComplexPair,
    /// No complex pair: spanned by the two other real eigenvectors.
    RealPair,
}

/// A finite rectangle of the eigenplane through a singularity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenplaneElement {
    pub label: PlaneLabel,
    pub anchor: StateVector,
    pub normal: Vec3,
    pub basis: [Vec3; 2],
    pub half_width: f64,
    pub half_length: f64,
    pub color: Rgba,
    pub span: PlaneSpan,
}

impl EigenplaneElement {
    /// The modal coordinate `y1 = α·(x − anchor)` with unit `α`.
    pub fn modal_coordinate(&self, x: StateVector) -> f64 {
        dot(self.normal, sub(x.to_array(), self.anchor.to_array()))
    }

    pub fn point_at(&self, s: f64, t: f64) -> StateVector {
        let a = self.anchor.to_array();
        StateVector::from_array(linalg::add(a, linalg::add(scale(self.basis[0], s), scale(self.basis[1], t))))
    }

    /// Rectangle corners in drawing order.
    pub fn corners(&self) -> [StateVector; 4] {
        let (w, l) = (self.half_width, self.half_length);
        [self.point_at(-w, -l), self.point_at(w, -l), self.point_at(w, l), self.point_at(-w, l)]
    }
}

/// Unit vector with its largest-magnitude component positive.
fn canonical_sign(v: Vec3) -> Vec3 {
    let pivot = (0..3).max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs())).unwrap();
    if v[pivot] < 0.0 {
        scale(v, -1.0)
    } else {
        v
    }
}

fn reject(v: Vec3, unit: Vec3) -> Vec3 {
    sub(v, scale(unit, dot(v, unit)))
}

pub fn eigenplane(
    singularity: &Singularity,
    half_width: f64,
    half_length: f64,
    color: Rgba,
) -> Result<EigenplaneElement, AnalysisError> {
    let eigen = &singularity.eigen;
    let normal = normalize(eigen.real_left_eigenvector())
        .map(canonical_sign)
        .ok_or(AnalysisError::Inconsistent(f64::NAN))?;
    let [p, q] = eigen.other_indices();
    let (raw, span) = match eigen.spectrum {
        Spectrum::SaddleFocus => {
            let v = eigen.right[p];
            ([v.map(|z| z.re), v.map(|z| z.im)], PlaneSpan::ComplexPair)
        }
        Spectrum::AllReal => ([eigen.right[p].map(|z| z.re), eigen.right[q].map(|z| z.re)], PlaneSpan::RealPair),
    };
    let residual = raw
        .iter()
        .filter_map(|&v| normalize(v))
        .map(|v| dot(normal, v).abs())
        .fold(0.0, f64::max);
    if !(residual <= EIGEN_TOL) {
        return Err(AnalysisError::Inconsistent(residual));
    }
    let b0 = normalize(reject(raw[0], normal)).ok_or(AnalysisError::Inconsistent(residual))?;
    let b1 = normalize(reject(reject(raw[1], normal), b0)).ok_or(AnalysisError::Inconsistent(residual))?;
    Ok(EigenplaneElement {
        label: singularity.label.plane_label(),
        anchor: singularity.location,
        normal,
        basis: [b0, b1],
        half_width,
        half_length,
        color,
        span,
    })
}

/// Default fill for each plane.
pub fn default_plane_color(label: PlaneLabel) -> Rgba {
    match label {
        PlaneLabel::EpPlus => Rgba::rgba(220, 60, 60, 90),
        PlaneLabel::E0 => Rgba::rgba(60, 180, 90, 90),
        PlaneLabel::EpMinus => Rgba::rgba(60, 100, 220, 90),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectionSegment {
    pub pair: (PlaneLabel, PlaneLabel),
    pub point: StateVector,
    pub direction: Vec3,
    pub clip: (f64, f64),
}

impl IntersectionSegment {
    pub fn at(&self, t: f64) -> StateVector {
        StateVector::from_array(linalg::add(self.point.to_array(), scale(self.direction, t)))
    }

    pub fn endpoints(&self) -> [StateVector; 2] {
        [self.at(self.clip.0), self.at(self.clip.1)]
    }

    pub fn length(&self) -> f64 {
        self.clip.1 - self.clip.0
    }
}

/// Parameter interval of `point + t·dir` inside a plane's rectangle.
fn rectangle_interval(plane: &EigenplaneElement, point: Vec3, dir: Vec3) -> Option<(f64, f64)> {
    let rel = sub(point, plane.anchor.to_array());
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for (axis, half) in [(plane.basis[0], plane.half_width), (plane.basis[1], plane.half_length)] {
        let s0 = dot(axis, rel);
        let ds = dot(axis, dir);
        if ds.abs() < 1e-15 {
            if s0.abs() > half {
                return None;
            }
            continue;
        }
        let (a, b) = ((-half - s0) / ds, (half - s0) / ds);
        lo = lo.max(a.min(b));
        hi = hi.min(a.max(b));
    }
    (lo <= hi).then_some((lo, hi))
}

/// Line of intersection of two eigenplanes, clipped to the part lying in
/// both rectangles.
pub fn intersect_planes(a: &EigenplaneElement, b: &EigenplaneElement) -> Result<IntersectionSegment, AnalysisError> {
    let c = cross(a.normal, b.normal);
    let cn = norm(c);
    if cn <= PARALLEL_TOL {
        return Err(AnalysisError::Parallel(a.label, b.label));
    }
    let direction = canonical_sign(scale(c, 1.0 / cn));
    let da = dot(a.normal, a.anchor.to_array());
    let db = dot(b.normal, b.anchor.to_array());
    let k = dot(a.normal, b.normal);
    let det = 1.0 - k * k;
    let alpha = (da - k * db) / det;
    let beta = (db - k * da) / det;
    let point = linalg::add(scale(a.normal, alpha), scale(b.normal, beta));
    let ia = rectangle_interval(a, point, direction).ok_or(AnalysisError::NoOverlap(a.label, b.label))?;
    let ib = rectangle_interval(b, point, direction).ok_or(AnalysisError::NoOverlap(a.label, b.label))?;
    let (lo, hi) = (ia.0.max(ib.0), ia.1.min(ib.1));
    if lo > hi {
        return Err(AnalysisError::NoOverlap(a.label, b.label));
    }
    Ok(IntersectionSegment { pair: (a.label, b.label), point: StateVector::from_array(point), direction, clip: (lo, hi) })
}

/// Median `|y1|` of `states` with respect to `plane`.
pub fn median_plane_distance(plane: &EigenplaneElement, states: impl IntoIterator<Item = StateVector>) -> Option<f64> {
    let mut d: Vec<f64> = states.into_iter().map(|x| plane.modal_coordinate(x).abs()).collect();
    if d.is_empty() {
        return None;
    }
    let mid = d.len() / 2;
    let (_, m, _) = d.select_nth_unstable_by(mid, |a, b| a.total_cmp(b));
    Some(*m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneSettings {
    pub half_width: f64,
    pub half_length: f64,
    pub colors: [Rgba; 3],
}

impl Default for PlaneSettings {
    fn default() -> Self {
        PlaneSettings {
            half_width: DEFAULT_PLANE_HALF_EXTENT,
            half_length: DEFAULT_PLANE_HALF_EXTENT,
            colors: [PlaneLabel::EpPlus, PlaneLabel::E0, PlaneLabel::EpMinus].map(default_plane_color),
        }
    }
}

impl PlaneSettings {
    pub fn color_for(&self, label: PlaneLabel) -> Rgba {
        match label {
            PlaneLabel::EpPlus => self.colors[0],
            PlaneLabel::E0 => self.colors[1],
            PlaneLabel::EpMinus => self.colors[2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub region: Region,
    pub location: Option<StateVector>,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub pair: (PlaneLabel, PlaneLabel),
    pub segment: Option<IntersectionSegment>,
    pub error: Option<String>,
}

/// Everything `analyze` produces for one parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub params: CircuitParams,
    pub singularities: Vec<Singularity>,
    pub failures: Vec<FailureRecord>,
    pub planes: Vec<EigenplaneElement>,
    pub plane_failures: Vec<FailureRecord>,
    pub segments: Vec<SegmentRecord>,
}

pub fn analyze(params: &CircuitParams, settings: &PlaneSettings) -> Result<AnalysisReport, AnalysisError> {
    let set = find_singularities(params)?;
    let mut planes = Vec::new();
    let mut plane_failures = Vec::new();
    for s in &set.singularities {
        let color = settings.color_for(s.label.plane_label());
        match eigenplane(s, settings.half_width, settings.half_length, color) {
            Ok(p) => planes.push(p),
            Err(e) => plane_failures.push(FailureRecord { region: s.region, location: Some(s.location), error: e.to_string() }),
        }
    }
    let mut segments = Vec::new();
    for i in 0..planes.len() {
        for j in i + 1..planes.len() {
            let (a, b) = (&planes[i], &planes[j]);
            let (segment, error) = match intersect_planes(a, b) {
                Ok(s) => (Some(s), None),
                Err(e) => (None, Some(e.to_string())),
            };
            segments.push(SegmentRecord { pair: (a.label, b.label), segment, error });
        }
    }
    Ok(AnalysisReport {
        params: *params,
        singularities: set.singularities,
        failures: set
            .failures
            .into_iter()
            .map(|f| FailureRecord { region: f.region, location: f.location, error: f.error.to_string() })
            .collect(),
        planes,
        plane_failures,
        segments,
    })
}

impl AnalysisReport {
    pub fn plane(&self, label: PlaneLabel) -> Option<&EigenplaneElement> {
        self.planes.iter().find(|p| p.label == label)
    }

    pub fn intersection_segments(&self) -> Vec<IntersectionSegment> {
        self.segments.iter().filter_map(|s| s.segment.clone()).collect()
    }

    /// Fixed-layout text report, all floats in shortest round-trip form.
    pub fn to_text(&self) -> String {
        fn v3(v: Vec3) -> String {
            format!("[{:?}, {:?}, {:?}]", v[0], v[1], v[2])
        }
        let mut out = String::new();
        for s in &self.singularities {
            let _ = writeln!(out, "singularity {} region={}", s.label, s.region);
            let _ = writeln!(out, "  location: u1={:?} u2={:?} i={:?}", s.location.u1, s.location.u2, s.location.i);
            let _ = writeln!(out, "  spectrum: {}", match s.eigen.spectrum {
                Spectrum::SaddleFocus => "SADDLE_FOCUS",
                Spectrum::AllReal => "ALL_REAL",
            });
            for (k, z) in s.eigen.eigenvalues.iter().enumerate() {
                let _ = writeln!(out, "  eigenvalue[{k}]: re={:?} im={:?}", z.re, z.im);
            }
            let _ = writeln!(out, "  alpha: {}", v3(s.real_left_eigenvector()));
            if let Some(p) = self.plane(s.label.plane_label()) {
                let _ = writeln!(out, "  plane {}: normal={}", p.label, v3(p.normal));
                let _ = writeln!(out, "    basis[0]={}", v3(p.basis[0]));
                let _ = writeln!(out, "    basis[1]={}", v3(p.basis[1]));
                if p.span == PlaneSpan::RealPair {
                    let _ = writeln!(out, "    NO_COMPLEX_PAIR");
                }
            }
        }
        for f in self.failures.iter().chain(&self.plane_failures) {
            let _ = writeln!(out, "failure region={}: {}", f.region, f.error);
        }
        for s in &self.segments {
            match &s.segment {
                Some(seg) => {
                    let _ = writeln!(
                        out,
                        "segment {} x {}: point={} direction={} t=[{:?}, {:?}]",
                        s.pair.0,
                        s.pair.1,
                        v3(seg.point.to_array()),
                        v3(seg.direction),
                        seg.clip.0,
                        seg.clip.1
                    );
                }
                None => {
                    let _ = writeln!(out, "segment {} x {}: {}", s.pair.0, s.pair.1, s.error.as_deref().unwrap_or(""));
                }
            }
        }
        out
    }
}
