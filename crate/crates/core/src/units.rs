//! Unit system and nondimensionalization.
//!
//! Internally every quantity is expressed with ħ = 1, time in units of
//! `time_scale` (usually 1/Ω) and length in units of `length_scale`
//! (usually 1/k). Momentum is then measured in ħ/length_scale and mass in
//! ħ·time_scale/length_scale².

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant in J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Physical speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Standard gravitational acceleration in m/s².
pub const STANDARD_GRAVITY: f64 = 9.806_65;

/// Physical dimension of a scalar quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Time,
    Length,
    Momentum,
    Frequency,
    Acceleration,
    Phase,
    Velocity,
    Mass,
    Wavenumber,
    Dimensionless,
}

impl std::str::FromStr for Dimension {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "time" => Dimension::Time,
            "length" => Dimension::Length,
            "momentum" => Dimension::Momentum,
            "frequency" => Dimension::Frequency,
            "acceleration" => Dimension::Acceleration,
            "phase" => Dimension::Phase,
            "velocity" => Dimension::Velocity,
            "mass" => Dimension::Mass,
            "wavenumber" => Dimension::Wavenumber,
            "dimensionless" => Dimension::Dimensionless,
            other => return Err(Error::UnknownDimension(other.to_string())),
        })
    }
}

/// Characteristic scales plus the two physical constants `c` and `g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    /// Seconds per internal time unit.
    pub time_scale: f64,
    /// Meters per internal length unit.
    pub length_scale: f64,
    /// Speed of light in m/s. May be reduced to amplify relativistic terms.
    pub speed_of_light: f64,
    /// Gravitational acceleration in m/s².
    pub grav_accel: f64,
}

impl UnitSystem {
    pub fn new(time_scale: f64, length_scale: f64, speed_of_light: f64, grav_accel: f64) -> Result<Self> {
        for (name, value) in [
            ("time_scale", time_scale),
            ("length_scale", length_scale),
            ("speed_of_light", speed_of_light),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::NonPositiveScale { name, value });
            }
        }
        if !grav_accel.is_finite() {
            return Err(Error::InvalidArgument(format!("grav_accel must be finite, got {grav_accel}")));
        }
        Ok(Self { time_scale, length_scale, speed_of_light, grav_accel })
    }

    /// Momentum scale ħ/length_scale in kg·m/s.
    pub fn momentum_scale(&self) -> f64 {
        HBAR / self.length_scale
    }

    /// Mass scale ħ·T/L² in kg.
    pub fn mass_scale(&self) -> f64 {
        HBAR * self.time_scale / (self.length_scale * self.length_scale)
    }

    /// SI value of one internal unit of the given dimension.
    pub fn scale(&self, kind: Dimension) -> f64 {
        let t = self.time_scale;
        let l = self.length_scale;
        match kind {
            Dimension::Time => t,
            Dimension::Length => l,
            Dimension::Momentum => self.momentum_scale(),
            Dimension::Frequency => 1.0 / t,
            Dimension::Acceleration => l / (t * t),
            Dimension::Velocity => l / t,
            Dimension::Mass => self.mass_scale(),
            Dimension::Wavenumber => 1.0 / l,
            Dimension::Phase | Dimension::Dimensionless => 1.0,
        }
    }

    pub fn nondimensionalize(&self, value: f64, kind: Dimension) -> f64 {
        match kind {
            Dimension::Phase | Dimension::Dimensionless => value,
            Dimension::Frequency => value * self.time_scale,
            Dimension::Wavenumber => value * self.length_scale,
            _ => value / self.scale(kind),
        }
    }

    pub fn redimensionalize(&self, value: f64, kind: Dimension) -> f64 {
        match kind {
            Dimension::Phase | Dimension::Dimensionless => value,
            Dimension::Frequency => value / self.time_scale,
            Dimension::Wavenumber => value / self.length_scale,
            _ => value * self.scale(kind),
        }
    }

    /// Tag-by-name variant used by config loading.
    pub fn nondimensionalize_tagged(&self, value: f64, kind: &str) -> Result<f64> {
        Ok(self.nondimensionalize(value, kind.parse()?))
    }

    pub fn redimensionalize_tagged(&self, value: f64, kind: &str) -> Result<f64> {
        Ok(self.redimensionalize(value, kind.parse()?))
    }

    /// Speed of light in internal units.
    pub fn c(&self) -> f64 {
        self.nondimensionalize(self.speed_of_light, Dimension::Velocity)
    }

    /// Gravitational acceleration in internal units.
    pub fn g(&self) -> f64 {
        self.nondimensionalize(self.grav_accel, Dimension::Acceleration)
    }
}
