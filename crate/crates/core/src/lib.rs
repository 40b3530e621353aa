//! Simulation, equilibrium analysis and rendering of Chua's circuit.

pub mod analysis;
pub mod color;
pub mod eigen;
pub mod integrator;
pub mod linalg;
pub mod model;
pub mod render;
pub mod scene;
pub mod trajectory_io;

pub use analysis::{
    analyze, eigenplane, find_singularities, intersect_planes, AnalysisError, AnalysisReport, EigenplaneElement,
    IntersectionSegment, PlaneLabel, PlaneSettings, Singularity, SingularityLabel,
};
pub use color::Rgba;
pub use eigen::{eigen_decompose, EigenDecomposition, Spectrum};
pub use integrator::{decimate, integrate, rk4_step, IntegrationConfig, IntegrationError, Trajectory, TrajectoryPoint};
pub use linalg::Matrix3;
pub use model::{CircuitParams, Derivative, ModelError, Region, StateVector, DOUBLE_SCROLL};
