//! Detuning and mean energy in the mean Heisenberg picture, their
//! polynomial-in-time coefficients, and the resonant laser frequency.
//!
//! Operators are replaced by classical trajectories p_H(t) = p − m̄gt and
//! z_H(t) = z + pt/m̄ − gt²/2, with p the canonical momentum at the start of
//! the pulse. Anticommutators become twice the product.

use serde::{Deserialize, Serialize};

use crate::elimination::effective_parameters;
use crate::error::{Error, Result};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeisenbergTrajectory {
    pub z: f64,
    pub p: f64,
    pub mass: f64,
    pub g: f64,
}

impl HeisenbergTrajectory {
    pub fn new(scn: &Scenario, z: f64, p: f64) -> Self {
        Self { z, p, mass: scn.species.mass, g: scn.g() }
    }

    pub fn momentum(&self, t: f64) -> f64 {
        self.p - self.mass * self.g * t
    }

    pub fn position(&self, t: f64) -> f64 {
        self.z + self.p * t / self.mass - 0.5 * self.g * t * t
    }
}

/// How the dark-matter field is evaluated along the trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DarkMatterEvaluation {
    /// ϱ_DM(z_H(t), t)
    Full,
    /// ϱ_DM(z, 0), constant during the pulse
    Frozen,
}

fn rho_along(scn: &Scenario, traj: &HeisenbergTrajectory, t: f64, dm: DarkMatterEvaluation) -> f64 {
    let zh = traj.position(t);
    let mut r = 0.0;
    if scn.channels.dark_matter {
        r += match dm {
            DarkMatterEvaluation::Full => scn.dilaton.dm_value(zh, t),
            DarkMatterEvaluation::Frozen => scn.dilaton.dm_frozen_value(traj.z),
        };
    }
    if scn.channels.eep {
        r += scn.dilaton.ep_value(zh, scn.g(), scn.c());
    }
    r
}

/// ν_H(t): effective detuning in the Heisenberg picture.
pub fn heisenberg_detuning(scn: &Scenario, z: f64, p: f64, t: f64, dm: DarkMatterEvaluation) -> Result<f64> {
    let eff = effective_parameters(scn)?;
    let traj = HeisenbergTrajectory::new(scn, z, p);
    let (ph, zh) = (traj.momentum(t), traj.position(t));
    let m = scn.species.mass;
    let k = scn.laser.wavenumber;
    let a = scn.laser.chirp_rate;
    let (g, c) = (scn.g(), scn.c());
    let r = scn.defect_ratio();
    let mut nu = (scn.species.transition_frequency + k * p / m + eff.diff_stark) - scn.laser.frequency - k * (a + g) * t;
    nu += r * (m * g * zh - ph * ph / (2.0 * m) - 0.25 * scn.recoil_frequency());
    nu += scn.mean_frequency() * scn.species.delta_beta() * rho_along(scn, &traj, t, dm);
    if scn.channels.wave_vector {
        nu += k * a * zh / c;
        nu += 2.0 * (k * ph / (2.0 * m)) * (a * t / c - (g + a) * zh / (c * c));
    }
    Ok(nu)
}

/// ν̄_H(t): reduced mean energy in the Heisenberg picture.
pub fn heisenberg_mean_energy(scn: &Scenario, z: f64, p: f64, t: f64, dm: DarkMatterEvaluation) -> f64 {
    let traj = HeisenbergTrajectory::new(scn, z, p);
    let (ph, zh) = (traj.momentum(t), traj.position(t));
    let m = scn.species.mass;
    let k = scn.laser.wavenumber;
    let a = scn.laser.chirp_rate;
    let (g, c) = (scn.g(), scn.c());
    let mut nu = scn.mean_frequency() * scn.species.mean_beta() * rho_along(scn, &traj, t, dm);
    nu -= k * ph / (4.0 * m) * scn.defect_ratio();
    if scn.channels.wave_vector {
        nu += 0.5 * scn.recoil_frequency() * (a * t / c + (0.5 * a * a * t * t - (g + a) * zh) / (c * c));
    }
    nu
}

/// Coefficients of ν_H = Σ ν^(j) t^j and ν̄_H = Σ ν̄^(j) t^j at an initial
/// phase-space point, with the dark-matter field frozen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolynomialDetuning {
    pub det_coeffs: [f64; 4],
    pub mean_coeffs: [f64; 4],
    pub laser_frequency: f64,
}

impl PolynomialDetuning {
    pub fn zero() -> Self {
        Self { det_coeffs: [0.0; 4], mean_coeffs: [0.0; 4], laser_frequency: 0.0 }
    }

    pub fn detuning(&self, t: f64) -> f64 {
        horner(&self.det_coeffs, t)
    }

    pub fn mean_energy(&self, t: f64) -> f64 {
        horner(&self.mean_coeffs, t)
    }

    /// ∫₀ᵗ ν̄_H = Σ ν̄^(j) t^{j+1}/(j+1)
    pub fn mean_phase(&self, t: f64) -> f64 {
        self.mean_coeffs.iter().enumerate().map(|(j, c)| c * t.powi(j as i32 + 1) / (j as f64 + 1.0)).sum()
    }

    /// Largest |ν^(j) t^j| / |Ω| and |ν̄^(j) t^j| / |Ω| over j.
    pub fn guard_parameter(&self, rabi: f64, t: f64) -> f64 {
        self.det_coeffs
            .iter()
            .chain(self.mean_coeffs.iter())
            .enumerate()
            .map(|(i, c)| (c * t.powi((i % 4) as i32)).abs())
            .fold(0.0, f64::max)
            / rabi.abs()
    }
}

fn horner(c: &[f64; 4], t: f64) -> f64 {
    ((c[3] * t + c[2]) * t + c[1]) * t + c[0]
}

/// Polynomial coefficients of the detuning and mean energy.
///
/// These are the time-Taylor coefficients of `heisenberg_detuning` and
/// `heisenberg_mean_energy` with the dark-matter field frozen.
pub fn table1_coefficients(scn: &Scenario, z: f64, p: f64) -> Result<PolynomialDetuning> {
    let eff = effective_parameters(scn)?;
    let m = scn.species.mass;
    let k = scn.laser.wavenumber;
    let a = scn.laser.chirp_rate;
    let (g, c) = (scn.g(), scn.c());
    let c2 = c * c;
    let gs = g + a;
    let wbar = scn.mean_frequency();
    let wk = scn.recoil_frequency();
    let nuk = k * p / m;
    let r = scn.defect_ratio();
    let dm = scn.rho_dm_frozen(z);
    let bs = scn.eep_coefficient();
    let (db, bb) = (scn.species.delta_beta(), scn.species.mean_beta());
    let wv = scn.channels.wave_vector;
    let on = |b: bool| if b { 1.0 } else { 0.0 };
    let w = on(wv);

    let nu0 = (scn.species.transition_frequency + nuk + eff.diff_stark) - scn.laser.frequency
        + w * k * a * z / c
        + r * (m * g * z - p * p / (2.0 * m) - 0.25 * wk)
        + wbar * db * dm
        + wbar * db * bs * g * z / c2
        - w * 2.0 * (k * p / (2.0 * m)) * gs * z / c2;
    let nu1 = -k * gs - w * k * gs * (p * p / (m * m * c2) - g * z / c2) + w * 2.0 * nuk * a / c
        + (2.0 * r + db * bs * wbar / (m * c2)) * g * p;
    let nu2 = w * (-1.5 * k * g * a / c + 1.5 * nuk * g * gs / c2) - r * m * g * g - wbar * db * bs * g * g / (2.0 * c2);
    let nu3 = -w * k * gs * g * g / (2.0 * c2);

    let mu0 = wbar * bb * dm + wbar * bb * bs * g * z / c2 - nuk / 4.0 * r - w * 0.5 * wk * gs * z / c2;
    let mu1 = wbar * bb * bs * g * (p / m) / c2 + 0.25 * k * g * r + w * 0.5 * wk * (a / c - gs * p / (m * c2));
    let mu2 = -wbar * bb * bs * g * g / (2.0 * c2) + w * 0.5 * wk * (a * a / (2.0 * c2) + gs * g / (2.0 * c2));

    Ok(PolynomialDetuning {
        det_coeffs: [nu0, nu1, nu2, nu3],
        mean_coeffs: [mu0, mu1, mu2, 0.0],
        laser_frequency: scn.laser.frequency,
    })
}

/// ω_L = ω_eg + k p_r/m̄ + Δω_ac with k = ω_L/c, solved by fixed-point iteration.
/// The Stark shift is re-evaluated each step because Δ = ω_a − ω̄ − ω_L/2.
pub fn resonant_laser_frequency(scn: &Scenario, p_r: f64) -> Result<f64> {
    if !p_r.is_finite() {
        return Err(Error::InvalidArgument("resonant momentum must be finite".into()));
    }
    let c = scn.c();
    let m = scn.species.mass;
    let mut w = scn.laser.frequency;
    let mut probe = scn.clone();
    for _ in 0..20 {
        probe.laser = scn.laser.retuned(w, c);
        let stark = effective_parameters(&probe)?.diff_stark;
        let next = scn.species.transition_frequency + (w / c) * p_r / m + stark;
        if (next - w).abs() <= 4.0 * f64::EPSILON * next.abs() {
            return Ok(next);
        }
        w = next;
    }
    Err(Error::DispersionConsistency { iterations: 20 })
}

impl Scenario {
    /// Copy of the scenario with the laser tuned to resonance at canonical momentum `p_r`.
    pub fn tuned_to(&self, p_r: f64) -> Result<Scenario> {
        let w = resonant_laser_frequency(self, p_r)?;
        let mut s = self.clone();
        s.laser = self.laser.retuned(w, self.c());
        Ok(s)
    }

    /// Momentum for which the current laser frequency is resonant (inverse of `tuned_to`).
    pub fn resonant_momentum(&self) -> Result<f64> {
        let eff = effective_parameters(self)?;
        Ok((self.laser.frequency - self.species.transition_frequency - eff.diff_stark) * self.species.mass
            / self.laser.wavenumber)
    }
}
