//! Single-photon atomic diffraction under gravity, laser chirping, dilaton
//! dark matter, EEP violation and the relativistic mass defect.
//!
//! Internal units have ħ = 1; [`units::UnitSystem`] converts to and from SI.

pub mod cli;
pub mod dilaton;
pub mod elimination;
pub mod error;
pub mod oracle;
pub mod phases;
pub mod propagator;
pub mod resonance;
pub mod scenario;
pub mod threelevel;
pub mod units;

pub use error::{Error, Result};
