//! Dilaton field ϱ = ϱ_DM + ϱ_EP and the dilaton-dependent atomic masses.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Internal state of the three-level atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InternalState {
    Excited,
    Ground,
    Ancilla,
}

impl InternalState {
    /// Sign of the rotating-frame momentum displacement: +κ for e and a, −κ for g.
    pub fn kick_sign(self) -> f64 {
        match self {
            InternalState::Ground => -1.0,
            _ => 1.0,
        }
    }
}

/// Classical scalar field: an oscillating dark-matter part plus an
/// EEP-violating gradient β_S g z / c². All quantities in internal units.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DilatonField {
    /// ϱ̄₀
    pub amplitude: f64,
    /// ω_ϱ
    pub frequency: f64,
    /// k_ϱ
    pub wavenumber: f64,
    /// φ_ϱ
    pub phase: f64,
    /// β_S
    pub eep_coefficient: f64,
}

impl DilatonField {
    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude >= 0.0 && self.frequency >= 0.0 && self.wavenumber >= 0.0) {
            return Err(Error::InvalidArgument(
                "dilaton amplitude, frequency and wavenumber must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// ϱ_DM(z, t) = ϱ̄₀ cos(ω_ϱ t − k_ϱ z + φ_ϱ)
    pub fn dm_value(&self, z: f64, t: f64) -> f64 {
        self.amplitude * (self.frequency * t - self.wavenumber * z + self.phase).cos()
    }

    /// ∂_z ϱ_DM(z, t)
    pub fn dm_gradient(&self, z: f64, t: f64) -> f64 {
        self.amplitude * self.wavenumber * (self.frequency * t - self.wavenumber * z + self.phase).sin()
    }

    /// ϱ_EP(z) = β_S g z / c²
    pub fn ep_value(&self, z: f64, g: f64, c: f64) -> f64 {
        self.eep_coefficient * g * z / (c * c)
    }

    /// Full field ϱ(z, t).
    pub fn field_value(&self, z: f64, t: f64, g: f64, c: f64) -> f64 {
        self.dm_value(z, t) + self.ep_value(z, g, c)
    }

    /// Dark-matter part frozen at the start of the pulse, ϱ_DM(z, 0).
    pub fn dm_frozen_value(&self, z: f64) -> f64 {
        self.dm_value(z, 0.0)
    }
}

/// Three-level atom in internal units (ħ = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomSpecies {
    /// m̄
    pub mass: f64,
    /// ω_eg
    pub transition_frequency: f64,
    /// ω_a − ω̄, stored as an offset so it never carries the Compton frequency.
    pub ancilla_offset: f64,
    pub beta_e: f64,
    pub beta_g: f64,
}

impl AtomSpecies {
    pub fn validate(&self) -> Result<()> {
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err(Error::InvalidArgument(format!("mass must be positive, got {}", self.mass)));
        }
        Ok(())
    }

    /// ω̄ = m̄c² (ħ = 1).
    pub fn mean_frequency(&self, c: f64) -> f64 {
        self.mass * c * c
    }

    /// Δβ = β_e − β_g
    pub fn delta_beta(&self) -> f64 {
        self.beta_e - self.beta_g
    }

    /// β̄ = (β_e + β_g)/2
    pub fn mean_beta(&self) -> f64 {
        0.5 * (self.beta_e + self.beta_g)
    }

    /// Dilaton coupling of a state. The ancilla is given the mean coupling β̄.
    pub fn beta(&self, state: InternalState) -> f64 {
        match state {
            InternalState::Excited => self.beta_e,
            InternalState::Ground => self.beta_g,
            InternalState::Ancilla => self.mean_beta(),
        }
    }

    /// Rest mass m_j(0). With `mass_defect` off all states carry m̄.
    pub fn rest_mass(&self, state: InternalState, c: f64, mass_defect: bool) -> f64 {
        if !mass_defect {
            return self.mass;
        }
        let c2 = c * c;
        match state {
            InternalState::Excited => self.mass + 0.5 * self.transition_frequency / c2,
            InternalState::Ground => self.mass - 0.5 * self.transition_frequency / c2,
            InternalState::Ancilla => self.mass + self.ancilla_offset / c2,
        }
    }

    /// m_j(ϱ) = m_j(0)(1 + β_j ϱ).
    pub fn state_mass(&self, state: InternalState, rho: f64, c: f64) -> Result<f64> {
        if rho.abs() >= 1.0 {
            return Err(Error::PerturbativeRegime { quantity: "dilaton field", value: rho });
        }
        Ok(self.rest_mass(state, c, true) * (1.0 + self.beta(state) * rho))
    }
}
