//! Python module `chua`: parameters, integration, singularity analysis,
//! rendering and scene files. Structured results come back as plain
//! dicts and lists, mirroring the JSON the CLI emits.

use std::path::PathBuf;

use chua_core::analysis::PlaneSettings;
use chua_core::render::svg::render_svg as core_render_svg;
use chua_core::render::{fit_camera, render_frame, MongePlane, Projection, Scene, SceneStyle, View};
use chua_core::scene::{CometLength, PlaybackMode, SceneDocument, TrajectorySource, ViewerDefaults};
use chua_core::trajectory_io::{self, TrajectoryFormat};
use chua_core::{IntegrationConfig, StateVector};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;
use serde::Serialize;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(value_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

type Triple = (f64, f64, f64);

fn state(x: Triple) -> StateVector {
    StateVector::new(x.0, x.1, x.2)
}

#[pyclass(name = "CircuitParams", module = "chua", from_py_object)]
#[derive(Clone)]
struct PyParams {
    inner: chua_core::CircuitParams,
}

#[pymethods]
impl PyParams {
    /// Keyword arguments override the double-scroll defaults.
    #[new]
    #[pyo3(signature = (**kwargs))]
    fn new(kwargs: Option<&Bound<'_, pyo3::types::PyDict>>) -> PyResult<Self> {
        let mut p = chua_core::DOUBLE_SCROLL;
        if let Some(kw) = kwargs {
            for (k, v) in kw.iter() {
                let key: String = k.extract()?;
                let v: f64 = v.extract()?;
                let slot = match key.as_str() {
                    "c1" => &mut p.c1,
                    "c2" => &mut p.c2,
                    "l" => &mut p.l,
                    "G" | "g_load" => &mut p.g_load,
                    "rho" => &mut p.rho,
                    "I" | "i_pulse" => &mut p.i_pulse,
                    "m0" => &mut p.m0,
                    "m1" => &mut p.m1,
                    "m2" => &mut p.m2,
                    "Bp" | "bp" => &mut p.bp,
                    "B0" | "b0" => &mut p.b0,
                    other => return Err(PyValueError::new_err(format!("unknown parameter {other}"))),
                };
                *slot = v;
            }
        }
        p.validate().map_err(value_err)?;
        Ok(PyParams { inner: p })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyParams { inner: chua_core::CircuitParams::from_json(text).map_err(value_err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner)
    }

    fn nonlinearity(&self, u1: f64) -> f64 {
        self.inner.nonlinearity(u1)
    }

    fn region(&self, u1: f64) -> String {
        self.inner.region_of(u1).to_string()
    }

    fn vector_field(&self, x: (f64, f64, f64)) -> (f64, f64, f64) {
        let d = self.inner.vector_field(state(x));
        (d.du1_dt, d.du2_dt, d.di_dt)
    }

    fn jacobian(&self, x: (f64, f64, f64)) -> [[f64; 3]; 3] {
        self.inner.jacobian(state(x)).0
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "CircuitParams(c1={}, c2={}, l={}, G={}, rho={}, I={}, m0={}, m1={}, m2={}, Bp={}, B0={})",
            p.c1, p.c2, p.l, p.g_load, p.rho, p.i_pulse, p.m0, p.m1, p.m2, p.bp, p.b0
        )
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

fn params_or_default(p: Option<PyParams>) -> chua_core::CircuitParams {
    p.map(|p| p.inner).unwrap_or(chua_core::DOUBLE_SCROLL)
}

#[pyclass(name = "Trajectory", module = "chua", from_py_object)]
#[derive(Clone)]
struct PyTrajectory {
    inner: chua_core::Trajectory,
}

#[pymethods]
impl PyTrajectory {
    #[staticmethod]
    #[pyo3(signature = (path, max_points=None))]
    fn load(path: PathBuf, max_points: Option<usize>) -> PyResult<Self> {
        let inner = trajectory_io::load_trajectory(&path, max_points).map_err(|e| PyIOError::new_err(e.to_string()))?;
        Ok(PyTrajectory { inner })
    }

    /// Writes csv or bin, chosen by `format` or else the file extension.
    #[pyo3(signature = (path, format=None))]
    fn save(&self, path: PathBuf, format: Option<&str>) -> PyResult<()> {
        let fmt = match format {
            Some("csv") => TrajectoryFormat::Csv,
            Some("bin") => TrajectoryFormat::Bin,
            Some(other) => return Err(PyValueError::new_err(format!("unknown format {other}"))),
            None => TrajectoryFormat::from_extension(&path).unwrap_or(TrajectoryFormat::Bin),
        };
        trajectory_io::save_trajectory(&self.inner, &path, fmt).map_err(|e| PyIOError::new_err(e.to_string()))
    }

    fn decimate(&self, target: usize) -> PyResult<Self> {
        Ok(PyTrajectory { inner: chua_core::decimate(&self.inner, target).map_err(value_err)? })
    }

    /// Rows of `(t, u1, u2, i)`.
    fn points(&self) -> Vec<(f64, f64, f64, f64)> {
        self.inner.points.iter().map(|p| (p.t, p.state.u1, p.state.u2, p.state.i)).collect()
    }

    fn bounds(&self) -> Option<(Triple, Triple)> {
        self.inner.bounds().map(|b| ((b.min.u1, b.min.u2, b.min.i), (b.max.u1, b.max.u2, b.max.i)))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyfunction]
#[pyo3(signature = (params=None, dt=IntegrationConfig::DEFAULT_DT, steps=IntegrationConfig::DEFAULT_STEPS, skip=IntegrationConfig::DEFAULT_SKIP, stride=1, x0=None))]
fn integrate(
    py: Python<'_>,
    params: Option<PyParams>,
    dt: f64,
    steps: u64,
    skip: u64,
    stride: u64,
    x0: Option<(f64, f64, f64)>,
) -> PyResult<PyTrajectory> {
    let p = params_or_default(params);
    let cfg = IntegrationConfig {
        dt,
        n_steps: steps,
        transient_skip: skip,
        record_stride: stride,
        initial: x0.map(state).unwrap_or(IntegrationConfig::DEFAULT_INITIAL),
    };
    let inner = py.detach(|| chua_core::integrate(&p, &cfg)).map_err(value_err)?;
    Ok(PyTrajectory { inner })
}

#[pyfunction]
#[pyo3(signature = (params=None))]
fn find_singularities<'py>(py: Python<'py>, params: Option<PyParams>) -> PyResult<Bound<'py, PyAny>> {
    let set = chua_core::find_singularities(&params_or_default(params)).map_err(value_err)?;
    to_py(py, &set.singularities)
}

/// Full report: singularities, failures, eigenplanes and intersection segments.
#[pyfunction]
#[pyo3(signature = (params=None, plane_size=chua_core::analysis::DEFAULT_PLANE_HALF_EXTENT))]
fn analyze<'py>(py: Python<'py>, params: Option<PyParams>, plane_size: f64) -> PyResult<Bound<'py, PyAny>> {
    let settings = PlaneSettings { half_width: plane_size, half_length: plane_size, ..Default::default() };
    let report = chua_core::analyze(&params_or_default(params), &settings).map_err(value_err)?;
    to_py(py, &report)
}

struct RenderJob {
    params: chua_core::CircuitParams,
    states: Vec<StateVector>,
    planes: Vec<chua_core::EigenplaneElement>,
    segments: Vec<chua_core::IntersectionSegment>,
    iv: bool,
    view_projection: Projection,
    azimuth: f64,
    elevation: f64,
    size: (u32, u32),
}

impl RenderJob {
    #[allow(clippy::too_many_arguments)]
    fn new(
        trajectory: Option<&PyTrajectory>,
        params: Option<PyParams>,
        projection: &str,
        azimuth: f64,
        elevation: f64,
        planes: bool,
        segments: bool,
        iv: bool,
        size: (u32, u32),
    ) -> PyResult<Self> {
        let params = params_or_default(params);
        let view_projection = match projection {
            "iu1" => Projection::Monge(MongePlane::IU1),
            "iu2" => Projection::Monge(MongePlane::IU2),
            "u2u1" => Projection::Monge(MongePlane::U2U1),
            "axo" => Projection::Axonometric,
            other => return Err(PyValueError::new_err(format!("unknown projection {other}"))),
        };
        let (pl, sg) = if planes || segments {
            let style = SceneStyle::default();
            let settings = PlaneSettings { colors: style.plane_colors, ..Default::default() };
            let rep = chua_core::analyze(&params, &settings).map_err(value_err)?;
            let sg = rep.intersection_segments();
            (if planes { rep.planes } else { Vec::new() }, if segments { sg } else { Vec::new() })
        } else {
            (Vec::new(), Vec::new())
        };
        Ok(RenderJob {
            params,
            states: trajectory.map(|t| t.inner.states().collect()).unwrap_or_default(),
            planes: pl,
            segments: sg,
            iv,
            view_projection,
            azimuth,
            elevation,
            size,
        })
    }

    fn scene(&self) -> Scene<'_> {
        Scene { params: &self.params, trajectory: &self.states, planes: &self.planes, segments: &self.segments, iv_overlay: self.iv }
    }

    fn view(&self) -> PyResult<View> {
        let cam = fit_camera(&self.scene(), self.size, 0.05).with_angles(self.azimuth, self.elevation).map_err(value_err)?;
        Ok(View { projection: self.view_projection, camera: cam })
    }
}

/// Renders one frame and returns it as binary PPM bytes.
#[pyfunction]
#[pyo3(signature = (trajectory=None, params=None, projection="iu1", azimuth=0.0, elevation=0.0, planes=false, segments=false, iv=false, size=(800, 800)))]
#[allow(clippy::too_many_arguments)]
fn render_ppm<'py>(
    py: Python<'py>,
    trajectory: Option<PyRef<'_, PyTrajectory>>,
    params: Option<PyParams>,
    projection: &str,
    azimuth: f64,
    elevation: f64,
    planes: bool,
    segments: bool,
    iv: bool,
    size: (u32, u32),
) -> PyResult<Bound<'py, PyBytes>> {
    let job = RenderJob::new(trajectory.as_deref(), params, projection, azimuth, elevation, planes, segments, iv, size)?;
    let view = job.view()?;
    let img = render_frame(&job.scene(), &view, &SceneStyle::default(), size).map_err(value_err)?;
    Ok(PyBytes::new(py, &img.to_ppm()))
}

#[pyfunction]
#[pyo3(signature = (trajectory=None, params=None, projection="iu1", azimuth=0.0, elevation=0.0, planes=false, segments=false, iv=false, size=(800, 800)))]
#[allow(clippy::too_many_arguments)]
fn render_svg(
    trajectory: Option<PyRef<'_, PyTrajectory>>,
    params: Option<PyParams>,
    projection: &str,
    azimuth: f64,
    elevation: f64,
    planes: bool,
    segments: bool,
    iv: bool,
    size: (u32, u32),
) -> PyResult<String> {
    let job = RenderJob::new(trajectory.as_deref(), params, projection, azimuth, elevation, planes, segments, iv, size)?;
    let view = job.view()?;
    core_render_svg(&job.scene(), &view, &SceneStyle::default(), size).map_err(value_err)
}

/// Scene document text with the trajectory inlined.
#[pyfunction]
#[pyo3(signature = (trajectory, params=None, comet_length=CometLength::DEFAULT.get(), mode="continuous", plane_size=chua_core::analysis::DEFAULT_PLANE_HALF_EXTENT))]
fn export_scene(
    trajectory: PyRef<'_, PyTrajectory>,
    params: Option<PyParams>,
    comet_length: u32,
    mode: &str,
    plane_size: f64,
) -> PyResult<String> {
    let params = params_or_default(params);
    let mode = match mode {
        "continuous" => PlaybackMode::Continuous,
        "sequential" => PlaybackMode::Sequential,
        other => return Err(PyValueError::new_err(format!("unknown mode {other}"))),
    };
    let viewer = ViewerDefaults { mode, comet_length: CometLength::new(comet_length).map_err(value_err)?, ..Default::default() };
    let style = SceneStyle::default();
    let settings = PlaneSettings { half_width: plane_size, half_length: plane_size, colors: style.plane_colors };
    let report = chua_core::analyze(&params, &settings).map_err(value_err)?;
    let doc = SceneDocument::from_analysis(&report, TrajectorySource::inline(&trajectory.inner), style, viewer);
    doc.validate().map_err(value_err)?;
    Ok(doc.serialize())
}

/// Validates scene text and returns it as a dict.
#[pyfunction]
fn parse_scene<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    let doc = SceneDocument::parse(text).map_err(value_err)?;
    to_py(py, &doc)
}

#[pymodule]
fn chua(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(find_singularities, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(render_ppm, m)?)?;
    m.add_function(wrap_pyfunction!(render_svg, m)?)?;
    m.add_function(wrap_pyfunction!(export_scene, m)?)?;
    m.add_function(wrap_pyfunction!(parse_scene, m)?)?;
    Ok(())
}
