//! Fixed-step RK4 integration of the circuit equations.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{CircuitParams, ModelError, StateVector};

#[derive(Debug, Error, PartialEq)]
pub enum IntegrationError {
    #[error("integration blew up at step {step}")]
    Blowup { step: u64 },
    #[error("invalid integration config: {0}")]
    InvalidConfig(String),
    #[error("trajectory too short: {0} points (need at least 2)")]
    TooShort(usize),
    #[error(transparent)]
    Params(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationConfig {
    pub dt: f64,
    pub n_steps: u64,
    pub transient_skip: u64,
    pub record_stride: u64,
    pub initial: StateVector,
}

impl IntegrationConfig {
    pub const DEFAULT_DT: f64 = 0.01;
    pub const DEFAULT_STEPS: u64 = 2_000_000;
    pub const DEFAULT_SKIP: u64 = 100_000;
    pub const DEFAULT_INITIAL: StateVector = StateVector::new(0.1, 0.1, 0.1);

    pub fn validate(&self) -> Result<(), IntegrationError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(IntegrationError::InvalidConfig(format!("dt must be > 0, got {}", self.dt)));
        }
        if self.n_steps < 1 {
            return Err(IntegrationError::InvalidConfig("n_steps must be >= 1".into()));
        }
        if self.record_stride < 1 {
            return Err(IntegrationError::InvalidConfig("record_stride must be >= 1".into()));
        }
        if !self.initial.is_finite() {
            return Err(IntegrationError::InvalidConfig("initial state must be finite".into()));
        }
        Ok(())
    }

    /// Number of points [`integrate`] records for this config.
    pub fn recorded_count(&self) -> u64 {
        let kept = self.n_steps.saturating_sub(self.transient_skip);
        kept.div_ceil(self.record_stride)
    }
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        IntegrationConfig {
            dt: Self::DEFAULT_DT,
            n_steps: Self::DEFAULT_STEPS,
            transient_skip: Self::DEFAULT_SKIP,
            record_stride: 1,
            initial: Self::DEFAULT_INITIAL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub state: StateVector,
}

/// How a trajectory was produced; absent for trajectories loaded from files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub params: CircuitParams,
    pub config: IntegrationConfig,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub provenance: Option<Provenance>,
    pub points: Vec<TrajectoryPoint>,
}

impl Trajectory {
    pub fn from_points(points: Vec<TrajectoryPoint>) -> Self {
        Trajectory { provenance: None, points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn states(&self) -> impl Iterator<Item = StateVector> + '_ {
        self.points.iter().map(|p| p.state)
    }

    pub fn bounds(&self) -> Option<Bounds> {
        Bounds::of(self.states())
    }
}

/// Axis-aligned bounding box in state space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: StateVector,
    pub max: StateVector,
}

impl Bounds {
    pub fn of(states: impl IntoIterator<Item = StateVector>) -> Option<Bounds> {
        let mut it = states.into_iter();
        let first = it.next()?;
        let mut b = Bounds { min: first, max: first };
        for s in it {
            b.min.u1 = b.min.u1.min(s.u1);
            b.min.u2 = b.min.u2.min(s.u2);
            b.min.i = b.min.i.min(s.i);
            b.max.u1 = b.max.u1.max(s.u1);
            b.max.u2 = b.max.u2.max(s.u2);
            b.max.i = b.max.i.max(s.i);
        }
        Some(b)
    }

    pub fn diagonal(&self) -> f64 {
        let d = self.max - self.min;
        (d.u1 * d.u1 + d.u2 * d.u2 + d.i * d.i).sqrt()
    }
}

/// One classical fourth-order Runge–Kutta step.
pub fn rk4_step(params: &CircuitParams, x: StateVector, dt: f64) -> Result<StateVector, IntegrationError> {
    let next = rk4_step_unchecked(params, x, dt);
    if next.is_finite() {
        Ok(next)
    } else {
        Err(IntegrationError::Blowup { step: 1 })
    }
}

#[inline]
fn rk4_step_unchecked(params: &CircuitParams, x: StateVector, dt: f64) -> StateVector {
    let half = 0.5 * dt;
    let k1 = params.vector_field(x);
    let k2 = params.vector_field(x.advanced(k1, half));
    let k3 = params.vector_field(x.advanced(k2, half));
    let k4 = params.vector_field(x.advanced(k3, dt));
    let w = dt / 6.0;
    StateVector {
        u1: x.u1 + w * (k1.du1_dt + 2.0 * k2.du1_dt + 2.0 * k3.du1_dt + k4.du1_dt),
        u2: x.u2 + w * (k1.du2_dt + 2.0 * k2.du2_dt + 2.0 * k3.du2_dt + k4.du2_dt),
        i: x.i + w * (k1.di_dt + 2.0 * k2.di_dt + 2.0 * k3.di_dt + k4.di_dt),
    }
}

/// Integrates `n_steps` RK4 steps from `config.initial`.
///
/// The state after step `k` (1-based) carries timestamp `k·dt`. States with
/// `k <= transient_skip` are discarded; of the rest, the first and every
/// `record_stride`-th after it are recorded.
pub fn integrate(params: &CircuitParams, config: &IntegrationConfig) -> Result<Trajectory, IntegrationError> {
    params.validate()?;
    config.validate()?;
    let mut points = Vec::with_capacity(config.recorded_count() as usize);
    let mut x = config.initial;
    for k in 1..=config.n_steps {
        x = rk4_step_unchecked(params, x, config.dt);
        if !x.is_finite() {
            return Err(IntegrationError::Blowup { step: k });
        }
        if k > config.transient_skip && (k - config.transient_skip - 1).is_multiple_of(config.record_stride) {
            points.push(TrajectoryPoint { t: k as f64 * config.dt, state: x });
        }
    }
    Ok(Trajectory { provenance: Some(Provenance { params: *params, config: *config }), points })
}

/// Stride that brings `len` points into `[target, 2·target)`; 1 when
/// `len < target`.
pub fn decimation_stride(len: usize, target: usize) -> usize {
    (len / target.max(1)).max(1)
}

/// Uniformly strided sub-trajectory with between `target_count` and
/// `2·target_count - 1` points. The first point is always retained; a
/// trajectory already shorter than `target_count` is returned unchanged.
pub fn decimate(traj: &Trajectory, target_count: usize) -> Result<Trajectory, IntegrationError> {
    if traj.len() < 2 {
        return Err(IntegrationError::TooShort(traj.len()));
    }
    if target_count < 2 {
        return Err(IntegrationError::InvalidConfig(format!("target_count must be >= 2, got {target_count}")));
    }
    let stride = decimation_stride(traj.len(), target_count);
    let points = traj.points.iter().step_by(stride).copied().collect();
    let provenance = traj.provenance.map(|mut p| {
        p.config.record_stride *= stride as u64;
        p
    });
    Ok(Trajectory { provenance, points })
}
