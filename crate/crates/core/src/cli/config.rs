//! Scenario configuration files.
//!
//! Every dimensional field carries its SI unit in the key name. Values are
//! converted to internal units (ħ = 1) through the `[units]` table.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dilaton::{AtomSpecies, DilatonField};
use crate::elimination::effective_parameters;
use crate::error::{Error, Result};
use crate::phases::GaussianWavePacket;
use crate::scenario::{Channels, GuardLimits, GuardMode, Scenario};
use crate::threelevel::{Coupling, LaserField};
use crate::units::{Dimension, UnitSystem, SPEED_OF_LIGHT, STANDARD_GRAVITY};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub units: UnitsConfig,
    pub species: SpeciesConfig,
    pub laser: LaserConfig,
    #[serde(default)]
    pub dilaton: DilatonConfig,
    #[serde(default)]
    pub channels: Channels,
    pub packet: PacketConfig,
    #[serde(default)]
    pub pulse: PulseConfig,
    #[serde(default)]
    pub engine: EngineConfig,
    #[serde(default)]
    pub guards: GuardLimits,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guard_mode: Option<GuardMode>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepAxis>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitsConfig {
    pub time_scale_s: f64,
    pub length_scale_m: f64,
    #[serde(default = "default_c")]
    pub speed_of_light_m_per_s: f64,
    #[serde(default = "default_g")]
    pub grav_accel_m_per_s2: f64,
}

fn default_c() -> f64 {
    SPEED_OF_LIGHT
}

fn default_g() -> f64 {
    STANDARD_GRAVITY
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesConfig {
    pub mass_kg: f64,
    pub transition_frequency_rad_per_s: f64,
    /// Ancilla detuning Δ for a laser at the bare transition frequency.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ancilla_detuning_rad_per_s: Option<f64>,
    #[serde(default)]
    pub beta_e: f64,
    #[serde(default)]
    pub beta_g: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum CouplingConfig {
    Direct { rabi_rad_per_s: f64 },
    Magnetic { electric_rabi_rad_per_s: f64, magnetic_rabi_rad_per_s: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserConfig {
    /// Laser frequency. When absent the laser is tuned to resonance at
    /// `resonant_momentum_kg_m_per_s`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency_rad_per_s: Option<f64>,
    #[serde(default)]
    pub resonant_momentum_kg_m_per_s: f64,
    #[serde(default)]
    pub chirp_rate_m_per_s2: f64,
    #[serde(default)]
    pub phase_offset_rad: f64,
    pub coupling: CouplingConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DilatonConfig {
    pub amplitude: f64,
    pub frequency_rad_per_s: f64,
    pub wavenumber_per_m: f64,
    pub phase_rad: f64,
    pub eep_coefficient: f64,
}

/// Gaussian input packets. Momenta default to the resonant pair p_r ∓ ħk/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketConfig {
    pub width_e_kg_m_per_s: f64,
    pub width_g_kg_m_per_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub momentum_e_kg_m_per_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub momentum_g_kg_m_per_s: Option<f64>,
    #[serde(default)]
    pub position_e_m: f64,
    #[serde(default)]
    pub position_g_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PulseConfig {
    pub area_rad: f64,
    /// Overrides `area_rad` when present.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
}

impl Default for PulseConfig {
    fn default() -> Self {
        Self { area_rad: PI, duration_s: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Analytic,
    Oracle,
    #[default]
    Both,
}

impl Engine {
    pub fn analytic(self) -> bool {
        self != Engine::Oracle
    }

    pub fn oracle(self) -> bool {
        self != Engine::Analytic
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EngineConfig {
    pub kind: Engine,
    pub grid_points: usize,
    pub grid_steps: usize,
    /// Relative tolerance of oracle phase comparisons; the grid convergence
    /// gate allows a tenth of it.
    pub relative_tolerance: f64,
    /// Absolute tolerance for the total oracle phase and for vanishing lines.
    pub phase_tolerance_rad: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self { kind: Engine::Both, grid_points: 1 << 12, grid_steps: 512, relative_tolerance: 0.02, phase_tolerance_rad: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// One sweep axis. `path` is a dotted key into this schema, for example
/// `laser.chirp_rate_m_per_s2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub path: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
    /// Draw the points uniformly from [start, stop] with the run seed.
    #[serde(default)]
    pub random: bool,
}

impl SweepAxis {
    pub fn values(&self, seed: u64) -> Result<Vec<f64>> {
        use rand::{Rng, SeedableRng};
        if self.count == 0 {
            return Err(Error::Config(format!("sweep over {} has zero points", self.path)));
        }
        if self.spacing == Spacing::Log && !(self.start > 0.0 && self.stop > 0.0) {
            return Err(Error::Config(format!("log sweep over {} needs positive bounds", self.path)));
        }
        let map = |u: f64| match self.spacing {
            Spacing::Linear => self.start + u * (self.stop - self.start),
            Spacing::Log => (self.start.ln() + u * (self.stop.ln() - self.start.ln())).exp(),
        };
        if self.random {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            return Ok((0..self.count).map(|_| map(rng.random::<f64>())).collect());
        }
        if self.count == 1 {
            return Ok(vec![self.start]);
        }
        let n = (self.count - 1) as f64;
        Ok((0..self.count).map(|i| if i + 1 == self.count { self.stop } else { map(i as f64 / n) }).collect())
    }
}

/// Scenario plus packet and pulse, all in internal units.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub scenario: Scenario,
    pub packet: GaussianWavePacket,
    /// Pulse duration.
    pub duration: f64,
    /// Canonical resonant momentum used for tuning and default packet momenta.
    pub resonant_momentum: f64,
}

impl Resolved {
    /// Nominal final momentum of the g output of the e input.
    pub fn final_momentum(&self) -> f64 {
        self.packet.momentum_g - self.scenario.species.mass * self.scenario.g() * self.duration
    }

    /// Heisenberg-frame starting point (z, p) of the g-input packet centre.
    pub fn ground_point(&self) -> (f64, f64) {
        let k = self.scenario.laser.wavenumber;
        (self.packet.center(crate::dilaton::InternalState::Ground), self.packet.momentum_g + 0.5 * k)
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a TOML config, or the `config` member of a JSON sidecar.
    pub fn load(path: &Path) -> Result<(Self, Option<u64>)> {
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            let v: serde_json::Value = serde_json::from_str(&text)?;
            let cfg = v.get("config").ok_or_else(|| Error::Config(format!("{}: sidecar has no config member", path.display())))?;
            let seed = v.get("seed").and_then(|s| s.as_u64());
            let cfg = serde_json::from_value(cfg.clone()).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            return Ok((cfg, seed));
        }
        let cfg = Self::from_toml_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Ok((cfg, None))
    }

    /// Copy with the numeric field at a dotted path replaced.
    pub fn with_value(&self, path: &str, value: f64) -> Result<Self> {
        let mut v = serde_json::to_value(self)?;
        let (parent, field) = match path.rsplit_once('.') {
            Some((parent, field)) => (format!("/{}", parent.replace('.', "/")), field),
            None => (String::new(), path),
        };
        let obj = v
            .pointer_mut(&parent)
            .and_then(|t| t.as_object_mut())
            .ok_or_else(|| Error::Config(format!("unknown sweep path {path}")))?;
        if !known_numeric_field(path) && !obj.contains_key(field) {
            return Err(Error::Config(format!("unknown sweep path {path}")));
        }
        obj.insert(field.to_string(), serde_json::json!(value));
        serde_json::from_value(v).map_err(|e| Error::Config(format!("sweep path {path}: {e}")))
    }

    pub fn resolve(&self) -> Result<Resolved> {
        let u = &self.units;
        let units = UnitSystem::new(u.time_scale_s, u.length_scale_m, u.speed_of_light_m_per_s, u.grav_accel_m_per_s2)?;
        let nd = |v: f64, d: Dimension| units.nondimensionalize(v, d);
        let c = units.c();
        let w_eg = nd(self.species.transition_frequency_rad_per_s, Dimension::Frequency);
        let ancilla_offset = match (self.species.ancilla_detuning_rad_per_s, self.laser.coupling) {
            (Some(d), _) => nd(d, Dimension::Frequency) + 0.5 * w_eg,
            (None, CouplingConfig::Magnetic { .. }) => {
                return Err(Error::Config("magnetic coupling needs species.ancilla_detuning_rad_per_s".into()))
            }
            (None, CouplingConfig::Direct { .. }) => 0.0,
        };
        let species = AtomSpecies {
            mass: nd(self.species.mass_kg, Dimension::Mass),
            transition_frequency: w_eg,
            ancilla_offset,
            beta_e: self.species.beta_e,
            beta_g: self.species.beta_g,
        };
        let coupling = match self.laser.coupling {
            CouplingConfig::Direct { rabi_rad_per_s } => Coupling::Direct { rabi: nd(rabi_rad_per_s, Dimension::Frequency) },
            CouplingConfig::Magnetic { electric_rabi_rad_per_s, magnetic_rabi_rad_per_s } => Coupling::Magnetic {
                electric_rabi: nd(electric_rabi_rad_per_s, Dimension::Frequency),
                magnetic_rabi: nd(magnetic_rabi_rad_per_s, Dimension::Frequency),
            },
        };
        let chirp = nd(self.laser.chirp_rate_m_per_s2, Dimension::Acceleration);
        let w_l = self.laser.frequency_rad_per_s.map(|w| nd(w, Dimension::Frequency)).unwrap_or(w_eg);
        let laser = LaserField::new(w_l, c, chirp, self.laser.phase_offset_rad, coupling);
        let d = &self.dilaton;
        let dilaton = DilatonField {
            amplitude: d.amplitude,
            frequency: nd(d.frequency_rad_per_s, Dimension::Frequency),
            wavenumber: nd(d.wavenumber_per_m, Dimension::Wavenumber),
            phase: d.phase_rad,
            eep_coefficient: d.eep_coefficient,
        };
        let mut scenario = Scenario::new(units, species, laser, dilaton, self.channels)?;
        scenario.limits = self.guards;
        scenario.guard_mode = self.guard_mode.unwrap_or_default();
        let p_r = nd(self.laser.resonant_momentum_kg_m_per_s, Dimension::Momentum);
        if self.laser.frequency_rad_per_s.is_none() {
            scenario = scenario.tuned_to(p_r)?;
        }
        let k = scenario.laser.wavenumber;
        let pk = &self.packet;
        let packet = GaussianWavePacket {
            width_e: nd(pk.width_e_kg_m_per_s, Dimension::Momentum),
            width_g: nd(pk.width_g_kg_m_per_s, Dimension::Momentum),
            momentum_e: pk.momentum_e_kg_m_per_s.map(|p| nd(p, Dimension::Momentum)).unwrap_or(p_r + 0.5 * k),
            momentum_g: pk.momentum_g_kg_m_per_s.map(|p| nd(p, Dimension::Momentum)).unwrap_or(p_r - 0.5 * k),
            position_e: nd(pk.position_e_m, Dimension::Length),
            position_g: nd(pk.position_g_m, Dimension::Length),
        };
        packet.validate()?;
        let duration = match self.pulse.duration_s {
            Some(t) => nd(t, Dimension::Time),
            None => {
                let rabi = effective_parameters(&scenario)?.rabi.abs();
                if rabi == 0.0 {
                    return Err(Error::Config("pulse area needs a non-zero Rabi frequency".into()));
                }
                self.pulse.area_rad / rabi
            }
        };
        if !(duration.is_finite() && duration >= 0.0) {
            return Err(Error::Config(format!("pulse duration must be non-negative, got {duration}")));
        }
        Ok(Resolved { scenario, packet, duration, resonant_momentum: p_r })
    }
}

/// Optional numeric fields that may be absent from a serialized config but are valid sweep targets.
fn known_numeric_field(path: &str) -> bool {
    matches!(
        path,
        "species.ancilla_detuning_rad_per_s"
            | "laser.frequency_rad_per_s"
            | "packet.momentum_e_kg_m_per_s"
            | "packet.momentum_g_kg_m_per_s"
            | "pulse.duration_s"
    )
}
