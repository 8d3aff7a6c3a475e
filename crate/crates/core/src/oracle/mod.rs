//! Brute-force reference integrators.

pub mod grid;
pub mod ode;
pub mod snapshot;

pub use grid::{grid_evolve, GridSpec, OracleResult, Probe};
pub use ode::{ode_three_level, ode_two_level, Method, StepControl};
pub use snapshot::Snapshot;
