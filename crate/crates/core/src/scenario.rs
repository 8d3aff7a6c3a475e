//! A fully specified physical scenario in internal units, plus regime guards.

use serde::{Deserialize, Serialize};

use crate::dilaton::{AtomSpecies, DilatonField};
use crate::error::{Error, Result};
use crate::threelevel::{Coupling, LaserField};
use crate::units::UnitSystem;

/// Independent switches for the perturbation channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Channels {
    pub mass_defect: bool,
    pub dark_matter: bool,
    pub eep: bool,
    /// Spatial 1/c and 1/c² corrections of the laser phase (chirp-modified wave vector).
    pub wave_vector: bool,
}

impl Default for Channels {
    fn default() -> Self {
        Self::all()
    }
}

impl Channels {
    pub fn all() -> Self {
        Self { mass_defect: true, dark_matter: true, eep: true, wave_vector: true }
    }

    pub fn none() -> Self {
        Self { mass_defect: false, dark_matter: false, eep: false, wave_vector: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuardMode {
    /// Violations are logged and reported.
    #[default]
    Soft,
    /// Violations are errors.
    Strict,
}

/// Thresholds for the perturbative-regime guards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GuardLimits {
    pub dilaton_amplitude: f64,
    pub defect_ratio: f64,
    pub elimination: f64,
    pub rwa_ratio: f64,
    pub dm_freeze: f64,
    pub perturbative: f64,
    pub dm_wavenumber: f64,
    pub pulse_area: f64,
}

impl Default for GuardLimits {
    fn default() -> Self {
        Self {
            dilaton_amplitude: 1e-2,
            defect_ratio: 1e-3,
            elimination: 0.1,
            rwa_ratio: 10.0,
            dm_freeze: 0.1,
            perturbative: 0.1,
            dm_wavenumber: 0.1,
            pulse_area: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuardStatus {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub units: UnitSystem,
    pub species: AtomSpecies,
    pub laser: LaserField,
    pub dilaton: DilatonField,
    pub channels: Channels,
    pub guard_mode: GuardMode,
    pub limits: GuardLimits,
}

impl Scenario {
    pub fn new(
        units: UnitSystem,
        species: AtomSpecies,
        laser: LaserField,
        dilaton: DilatonField,
        channels: Channels,
    ) -> Result<Self> {
        species.validate()?;
        dilaton.validate()?;
        let s = Self {
            units,
            species,
            laser,
            dilaton,
            channels,
            guard_mode: GuardMode::Soft,
            limits: GuardLimits::default(),
        };
        s.laser.check_dispersion(s.c())?;
        if let Coupling::Magnetic { .. } = s.laser.coupling {
            if s.ancilla_detuning() == 0.0 {
                return Err(Error::SingularDetuning);
            }
        }
        Ok(s)
    }

    pub fn with_guard_mode(mut self, mode: GuardMode) -> Self {
        self.guard_mode = mode;
        self
    }

    /// Speed of light in internal units.
    pub fn c(&self) -> f64 {
        self.units.c()
    }

    /// Gravitational acceleration in internal units.
    pub fn g(&self) -> f64 {
        self.units.g()
    }

    /// ω̄ = m̄c²
    pub fn mean_frequency(&self) -> f64 {
        self.species.mean_frequency(self.c())
    }

    /// Δ = ω_a − ω̄ − ω_L/2
    pub fn ancilla_detuning(&self) -> f64 {
        self.species.ancilla_offset - 0.5 * self.laser.frequency
    }

    /// δ = ω_e − ω_g − ω_L
    pub fn two_level_detuning(&self) -> f64 {
        self.species.transition_frequency - self.laser.frequency
    }

    /// Recoil frequency ω_k = k²/(2m̄).
    pub fn recoil_frequency(&self) -> f64 {
        let k = self.laser.wavenumber;
        k * k / (2.0 * self.species.mass)
    }

    /// Recoil velocity v_r = k/m̄.
    pub fn recoil_velocity(&self) -> f64 {
        self.laser.wavenumber / self.species.mass
    }

    /// ω_eg/ω̄ if the mass-defect channel is on, else 0.
    pub fn defect_ratio(&self) -> f64 {
        if self.channels.mass_defect {
            self.species.transition_frequency / self.mean_frequency()
        } else {
            0.0
        }
    }

    /// ϱ(z, t) restricted to the enabled channels.
    pub fn rho(&self, z: f64, t: f64) -> f64 {
        let mut r = 0.0;
        if self.channels.dark_matter {
            r += self.dilaton.dm_value(z, t);
        }
        if self.channels.eep {
            r += self.dilaton.ep_value(z, self.g(), self.c());
        }
        r
    }

    /// ϱ_DM(z, 0) if the dark-matter channel is on.
    pub fn rho_dm_frozen(&self, z: f64) -> f64 {
        if self.channels.dark_matter {
            self.dilaton.dm_frozen_value(z)
        } else {
            0.0
        }
    }

    /// β_S if the EEP channel is on.
    pub fn eep_coefficient(&self) -> f64 {
        if self.channels.eep {
            self.dilaton.eep_coefficient
        } else {
            0.0
        }
    }

    /// Check `value <= limit`; soft mode logs, strict mode fails.
    pub fn guard(&self, name: &'static str, value: f64, limit: f64) -> Result<()> {
        if value.abs() <= limit {
            return Ok(());
        }
        match self.guard_mode {
            GuardMode::Strict => Err(Error::Guard { name, value: value.abs(), limit }),
            GuardMode::Soft => {
                log::warn!("guard `{name}` violated: {:e} > {limit:e}", value.abs());
                Ok(())
            }
        }
    }

    /// Static guard values of the scenario (not depending on a phase-space point).
    pub fn guard_statuses(&self) -> Vec<GuardStatus> {
        let l = &self.limits;
        let mut out = Vec::new();
        let mut push = |name: &str, value: f64, limit: f64| {
            out.push(GuardStatus { name: name.to_string(), value: value.abs(), limit, passed: value.abs() <= limit });
        };
        push("dilaton_amplitude", self.dilaton.amplitude, l.dilaton_amplitude);
        push("defect_ratio", self.species.transition_frequency / self.mean_frequency(), l.defect_ratio);
        if let Coupling::Magnetic { electric_rabi, magnetic_rabi } = self.laser.coupling {
            let d = self.ancilla_detuning();
            push("elimination_electric", electric_rabi / d, l.elimination);
            push("elimination_magnetic", magnetic_rabi / d, l.elimination);
        }
        let fundamental = self.laser.fundamental_rabi();
        if fundamental != 0.0 {
            push("rwa_inverse", fundamental / self.laser.frequency, 1.0 / l.rwa_ratio);
        }
        out
    }

    pub fn guards_passed(&self) -> bool {
        self.guard_statuses().iter().all(|g| g.passed)
    }
}
