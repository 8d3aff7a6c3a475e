//! Laser phase, momentum displacement and the rotating-frame three-level Hamiltonian.
//!
//! Basis order for 3×3 matrices is (a, e, g); for 2×2 matrices (e, g).

use nalgebra::{Matrix2, Matrix3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dilaton::InternalState;
use crate::error::{Error, Result};
use crate::scenario::Scenario;

/// How the e↔g transition is driven.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Coupling {
    /// E1 laser coupling g↔a plus static M1 coupling e↔a through a far-detuned ancilla.
    Magnetic { electric_rabi: f64, magnetic_rabi: f64 },
    /// Direct single-photon transition with Rabi frequency Ω and no Stark shifts.
    Direct { rabi: f64 },
}

/// Laser in internal units. `wavenumber` and `frequency` obey kc = ω_L.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaserField {
    pub wavenumber: f64,
    pub frequency: f64,
    /// α
    pub chirp_rate: f64,
    /// φ₀
    pub phase_offset: f64,
    pub coupling: Coupling,
}

impl LaserField {
    /// Laser with k fixed by the dispersion relation.
    pub fn new(frequency: f64, c: f64, chirp_rate: f64, phase_offset: f64, coupling: Coupling) -> Self {
        Self { wavenumber: frequency / c, frequency, chirp_rate, phase_offset, coupling }
    }

    /// Same laser retuned to a new frequency, keeping kc = ω_L.
    pub fn retuned(&self, frequency: f64, c: f64) -> Self {
        Self { wavenumber: frequency / c, frequency, ..*self }
    }

    pub fn check_dispersion(&self, c: f64) -> Result<()> {
        let rel = (self.wavenumber * c - self.frequency).abs() / self.frequency.abs().max(f64::MIN_POSITIVE);
        if rel > 1e-12 {
            return Err(Error::InvalidArgument(format!("dispersion kc = ω_L violated (relative {rel:e})")));
        }
        Ok(())
    }

    /// Ω_E for magnetically induced transitions, Ω for direct ones.
    pub fn fundamental_rabi(&self) -> f64 {
        match self.coupling {
            Coupling::Magnetic { electric_rabi, .. } => electric_rabi,
            Coupling::Direct { rabi } => rabi,
        }
    }
}

/// φ_L(z, t) = kz(1 + αt/c − (g+α)z/(2c²)) − φ₀ − ω_L t(1 + αt/(2c))
pub fn laser_phase(laser: &LaserField, z: f64, t: f64, g: f64, c: f64) -> f64 {
    let k = laser.wavenumber;
    let a = laser.chirp_rate;
    k * z * (1.0 + a * t / c - (g + a) * z / (2.0 * c * c)) - laser.phase_offset
        - laser.frequency * t * (1.0 + a * t / (2.0 * c))
}

/// Spatial part of φ_L, without the chirp-modified wave vector when that channel is off.
pub fn spatial_phase(scn: &Scenario, z: f64, t: f64) -> f64 {
    let k = scn.laser.wavenumber;
    if scn.channels.wave_vector {
        let (a, g, c) = (scn.laser.chirp_rate, scn.g(), scn.c());
        k * z * (1.0 + a * t / c - (g + a) * z / (2.0 * c * c))
    } else {
        k * z
    }
}

/// Temporal part of φ_L: −φ₀ − ω_L t(1 + αt/(2c)).
pub fn temporal_phase(laser: &LaserField, t: f64, c: f64) -> f64 {
    -laser.phase_offset - laser.frequency * t * (1.0 + laser.chirp_rate * t / (2.0 * c))
}

/// κ(z, t) = k[1 + αt/c − (g+α)z/c²]/2, i.e. half the gradient of the spatial phase.
pub fn momentum_displacement(scn: &Scenario, z: f64, t: f64) -> f64 {
    let k = scn.laser.wavenumber;
    if scn.channels.wave_vector {
        let (a, g, c) = (scn.laser.chirp_rate, scn.g(), scn.c());
        0.5 * k * (1.0 + a * t / c - (g + a) * z / (c * c))
    } else {
        0.5 * k
    }
}

/// |∂_t φ_L| / |Ω_E|. Values below about 10 make the rotating-wave approximation suspect.
pub fn rwa_validity(laser: &LaserField, z: f64, t: f64, c: f64) -> Result<f64> {
    let omega = laser.fundamental_rabi();
    if omega == 0.0 {
        return Err(Error::UndefinedRatio("fundamental Rabi frequency is zero"));
    }
    let dphi = laser.wavenumber * z * laser.chirp_rate / c - laser.frequency * (1.0 + laser.chirp_rate * t / c);
    Ok(dphi.abs() / omega.abs())
}

/// Rotating-frame diagonal block ν_j at the phase-space point (z, p, t).
///
/// `p` is the canonical (rotating-frame) momentum: states a and e carry
/// kinetic momentum p + κ, state g carries p − κ. The chirp term
/// ±kα(z − ct)/(2c) keeps only its temporal part −kαt/2 when the
/// wave-vector channel is off.
pub fn state_energy(scn: &Scenario, state: InternalState, z: f64, p: f64, t: f64) -> Result<f64> {
    let c = scn.c();
    let g = scn.g();
    let s = state.kick_sign();
    let rho = scn.rho(z, t);
    let md = scn.channels.mass_defect;
    let m0 = scn.species.rest_mass(state, c, md);
    if rho.abs() >= 1.0 {
        return Err(Error::PerturbativeRegime { quantity: "dilaton field", value: rho });
    }
    let beta = scn.species.beta(state);
    let m = m0 * (1.0 + beta * rho);
    let rest = m0 * c * c * beta * rho;
    let kappa = momentum_displacement(scn, z, t);
    let q = p + s * kappa;
    let k = scn.laser.wavenumber;
    let a = scn.laser.chirp_rate;
    let chirp = if scn.channels.wave_vector { k * a * (z - c * t) / (2.0 * c) } else { -k * a * t / 2.0 };
    Ok(rest + q * q / (2.0 * m) + m * g * z + s * chirp)
}

/// Rotating-frame three-level Hamiltonian (ħ = 1), basis (a, e, g).
pub fn build_rotating_hamiltonian(scn: &Scenario, z: f64, p: f64, t: f64) -> Result<Matrix3<Complex64>> {
    let (oe, ob) = match scn.laser.coupling {
        Coupling::Magnetic { electric_rabi, magnetic_rabi } => (electric_rabi, magnetic_rabi),
        Coupling::Direct { .. } => {
            return Err(Error::InvalidArgument("direct transitions have no ancilla; use the two-level form".into()))
        }
    };
    let na = state_energy(scn, InternalState::Ancilla, z, p, t)?;
    let ne = state_energy(scn, InternalState::Excited, z, p, t)?;
    let ng = state_energy(scn, InternalState::Ground, z, p, t)?;
    let d = scn.ancilla_detuning();
    let dl = scn.two_level_detuning();
    let r = |x: f64| Complex64::new(x, 0.0);
    Ok(Matrix3::new(
        r(na + d),
        r(0.5 * ob),
        r(0.5 * oe),
        r(0.5 * ob),
        r(ne + 0.5 * dl),
        r(0.0),
        r(0.5 * oe),
        r(0.0),
        r(ng - 0.5 * dl),
    ))
}

/// Rotating-frame two-level Hamiltonian for direct transitions, basis (e, g).
pub fn build_direct_hamiltonian(scn: &Scenario, z: f64, p: f64, t: f64) -> Result<Matrix2<Complex64>> {
    let omega = match scn.laser.coupling {
        Coupling::Direct { rabi } => rabi,
        Coupling::Magnetic { .. } => {
            return Err(Error::InvalidArgument("magnetically induced transitions need the three-level form".into()))
        }
    };
    let ne = state_energy(scn, InternalState::Excited, z, p, t)?;
    let ng = state_energy(scn, InternalState::Ground, z, p, t)?;
    let dl = scn.two_level_detuning();
    let r = |x: f64| Complex64::new(x, 0.0);
    Ok(Matrix2::new(r(ne + 0.5 * dl), r(0.5 * omega), r(0.5 * omega), r(ng - 0.5 * dl)))
}
