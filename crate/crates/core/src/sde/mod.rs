//! Reproducible stochastic integration of the three representations.

mod particles;
mod path;
mod polys;
pub mod rng;
mod wishart;

pub use particles::{
    drift_at_zero, pair_ratio, particle_drift, simulate_particles, step_particles, StepOptions,
};
pub use path::{Event, EventKind, PathRecord, SimulationGrid, StateKind, ZeroBoundary};
pub(crate) use path::EventLog;
pub use polys::simulate_polys;
pub use rng::{gaussian_stream, GaussianStream, NoiseSource, RngSpec};
pub use wishart::simulate_wishart;
