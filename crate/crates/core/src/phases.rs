//! Closed-form mirror-pulse phase budget φ_π = φ₀ + φ_DM + φ_EP + φ_MD + φ_WV.
//!
//! Conventions: the initial packets are ⟨p|ψ₀,j⟩ ∝ exp(−(p−p_j)²/(2σ_j²) + i p z_j),
//! so the packet of state j is centred at position −z_j. `p` is the final
//! momentum of the g-output of the e-input (the e-output of the g-input is
//! evaluated at p + k). The pulse is a mirror pulse, |Ω|t = π.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dilaton::InternalState;
use crate::elimination::effective_parameters;
use crate::error::{Error, Result};
use crate::scenario::Scenario;

/// Gaussian initial state in internal units. Widths are momentum widths ħσ_j.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianWavePacket {
    pub width_e: f64,
    pub width_g: f64,
    pub momentum_e: f64,
    pub momentum_g: f64,
    pub position_e: f64,
    pub position_g: f64,
}

impl GaussianWavePacket {
    pub fn validate(&self) -> Result<()> {
        if !(self.width_e > 0.0 && self.width_g > 0.0) {
            return Err(Error::InvalidArgument("packet widths must be positive".into()));
        }
        Ok(())
    }

    pub fn width(&self, s: InternalState) -> f64 {
        if s == InternalState::Excited { self.width_e } else { self.width_g }
    }

    pub fn momentum(&self, s: InternalState) -> f64 {
        if s == InternalState::Excited { self.momentum_e } else { self.momentum_g }
    }

    /// The z_j parameter of the state's packet.
    pub fn position(&self, s: InternalState) -> f64 {
        if s == InternalState::Excited { self.position_e } else { self.position_g }
    }

    /// Mean physical position of the state's packet, −z_j.
    pub fn center(&self, s: InternalState) -> f64 {
        -self.position(s)
    }

    /// Δz = z_e − z_g
    pub fn delta_z(&self) -> f64 {
        self.position_e - self.position_g
    }

    /// z̄ = (z_e + z_g)/2
    pub fn mean_z(&self) -> f64 {
        0.5 * (self.position_e + self.position_g)
    }

    /// Normalized momentum-space amplitude ⟨p|ψ₀,j⟩.
    pub fn amplitude(&self, s: InternalState, p: f64) -> Complex64 {
        let w = self.width(s);
        let d = p - self.momentum(s);
        let norm = (PI * w * w).powf(-0.25);
        Complex64::from_polar(norm * (-d * d / (2.0 * w * w)).exp(), p * self.position(s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseBudget {
    pub phi0: f64,
    pub phi_dm: f64,
    pub phi_ep: f64,
    pub phi_md: f64,
    pub phi_wv: f64,
    pub total: f64,
    pub chirp_perfect: bool,
}

impl PhaseBudget {
    fn from_lines(phi0: f64, phi_dm: f64, phi_ep: f64, phi_md: f64, phi_wv: f64, chirp_perfect: bool) -> Self {
        Self { phi0, phi_dm, phi_ep, phi_md, phi_wv, total: phi0 + phi_dm + phi_ep + phi_md + phi_wv, chirp_perfect }
    }

    pub fn lines(&self) -> [(&'static str, f64); 6] {
        [
            ("phi0", self.phi0),
            ("phi_dm", self.phi_dm),
            ("phi_ep", self.phi_ep),
            ("phi_md", self.phi_md),
            ("phi_wv", self.phi_wv),
            ("total", self.total),
        ]
    }
}

/// |g + α| below this fraction of g (or absolutely zero) counts as perfect chirping.
const PERFECT_CHIRP_TOLERANCE: f64 = 1e-12;

pub fn is_chirp_perfect(scn: &Scenario) -> bool {
    let (g, a) = (scn.g(), scn.laser.chirp_rate);
    (g + a).abs() <= PERFECT_CHIRP_TOLERANCE * g.abs().max(a.abs())
}

/// D = 2p/m̄ + v_r + gt, the mean displacement rate entering φ_MD and φ_WV.
fn drift(scn: &Scenario, p: f64, t: f64) -> f64 {
    2.0 * p / scn.species.mass + scn.recoil_velocity() + scn.g() * t
}

fn rabi_abs(scn: &Scenario) -> Result<f64> {
    let r = effective_parameters(scn)?.rabi.abs();
    if r == 0.0 {
        return Err(Error::InvalidArgument("phase budget needs a non-zero Rabi frequency".into()));
    }
    Ok(r)
}

/// φ₀ = −2φ₀ − k(z̄ + Δz/2) − Δz(p + m̄gt) + 2k(g+α)/Ω² − ω_L(t + αt²/(2c))
pub fn phi0(scn: &Scenario, packet: &GaussianWavePacket, p: f64, t: f64) -> Result<f64> {
    let om = rabi_abs(scn)?;
    let k = scn.laser.wavenumber;
    let a = scn.laser.chirp_rate;
    let (g, c, m) = (scn.g(), scn.c(), scn.species.mass);
    let dz = packet.delta_z();
    Ok(-2.0 * scn.laser.phase_offset - k * (packet.mean_z() + 0.5 * dz) - dz * (p + m * g * t)
        + 2.0 * k * (g + a) / (om * om)
        - scn.laser.frequency * (t + a * t * t / (2.0 * c)))
}

/// φ_DM = −ω̄ t β̄ Δz ∂_zϱ_DM(z, 0) at the mean packet position z = −z̄.
pub fn phi_dm(scn: &Scenario, packet: &GaussianWavePacket, t: f64) -> f64 {
    if !scn.channels.dark_matter {
        return 0.0;
    }
    -scn.mean_frequency() * t * scn.species.mean_beta() * packet.delta_z() * scn.dilaton.dm_gradient(-packet.mean_z(), 0.0)
}

/// φ_EP = −β̄β_S m̄gΔz t − 2Δββ_S (g/Ω²)(p + k/2 + m̄gt/2)
pub fn phi_ep(scn: &Scenario, packet: &GaussianWavePacket, p: f64, t: f64) -> Result<f64> {
    if !scn.channels.eep {
        return Ok(0.0);
    }
    let om = rabi_abs(scn)?;
    let (g, m) = (scn.g(), scn.species.mass);
    let bs = scn.dilaton.eep_coefficient;
    Ok(-scn.species.mean_beta() * bs * m * g * packet.delta_z() * t
        - scn.species.delta_beta() * bs * g * m * drift(scn, p, t) / (om * om))
}

/// φ_MD = −4(ω_eg/ω̄)(g/Ω²)(p + k/2 + m̄gt/2)
pub fn phi_md(scn: &Scenario, p: f64, t: f64) -> Result<f64> {
    if !scn.channels.mass_defect {
        return Ok(0.0);
    }
    let om = rabi_abs(scn)?;
    Ok(-2.0 * scn.defect_ratio() * scn.species.mass * scn.g() * drift(scn, p, t) / (om * om))
}

/// Wave-vector phase for perfect chirping α = −g:
/// (kgt/c)(z̄ − pt/m̄ − v_r t/2 − gt²/2) + (kg/(cΩ²))(4p/m̄ + 2v_r + gt).
pub fn phi_wv_perfect(scn: &Scenario, packet: &GaussianWavePacket, p: f64, t: f64) -> Result<f64> {
    if !scn.channels.wave_vector {
        return Ok(0.0);
    }
    let om = rabi_abs(scn)?;
    let (g, c, m) = (scn.g(), scn.c(), scn.species.mass);
    let k = scn.laser.wavenumber;
    let vr = scn.recoil_velocity();
    let center = packet.mean_z() - p * t / m - 0.5 * vr * t - 0.5 * g * t * t;
    Ok(k * g * t / c * center + k * g / (c * om * om) * (4.0 * p / m + 2.0 * vr + g * t))
}

/// Wave-vector phase for arbitrary chirp, including the finite-width terms
/// that only appear for a chirp mismatch g + α ≠ 0.
pub fn wv_phase_general(packet: &GaussianWavePacket, scn: &Scenario, p: f64, t: f64) -> Result<f64> {
    if !scn.channels.wave_vector {
        return Ok(0.0);
    }
    let om = rabi_abs(scn)?;
    let (g, c, m) = (scn.g(), scn.c(), scn.species.mass);
    let c2 = c * c;
    let k = scn.laser.wavenumber;
    let a = scn.laser.chirp_rate;
    let gs = g + a;
    let vr = scn.recoil_velocity();
    let wk = scn.recoil_frequency();
    let (zb, dz) = (packet.mean_z(), packet.delta_z());
    let center = zb - p * t / m - 0.5 * vr * t - 0.5 * g * t * t;

    let line1 = -k * a * t / c * center - k * a / (c * om * om) * (4.0 * p / m + 2.0 * vr + g * t);
    let line2 = k * gs / (2.0 * c2) * width_terms(packet, scn, p, t)
        - k * gs / (2.0 * c2) * (center * center + zb * zb + 0.5 * dz * dz);
    let gt_c = g * t / c;
    let line3 = dz * gs / (2.0 * c2) * wk * t
        + k * gs / (om * om)
            * (2.0 * (p / (m * c) + vr / (2.0 * c)).powi(2)
                + p * g * t / (m * c2)
                + vr * g * t / (2.0 * c2)
                + 2.0 * g * zb / c2
                + (PI * PI - 12.0) / (2.0 * PI * PI) * gt_c * gt_c);
    Ok(line1 + line2 + line3)
}

/// [(p_e − p − k − m̄gt)/σ_e²]² − 1/σ_e² + [(p_g − p − m̄gt)/σ_g²]² − 1/σ_g²
fn width_terms(packet: &GaussianWavePacket, scn: &Scenario, p: f64, t: f64) -> f64 {
    let (se, sg) = (packet.width_e, packet.width_g);
    let mgt = scn.species.mass * scn.g() * t;
    let k = scn.laser.wavenumber;
    let de = (packet.momentum_e - p - k - mgt) / (se * se);
    let dg = (packet.momentum_g - p - mgt) / (sg * sg);
    de * de - 1.0 / (se * se) + dg * dg - 1.0 / (sg * sg)
}

/// Finite-width (σ-dependent) part of the general wave-vector phase.
pub fn wv_width_terms(packet: &GaussianWavePacket, scn: &Scenario, p: f64, t: f64) -> f64 {
    if !scn.channels.wave_vector {
        return 0.0;
    }
    let (g, c) = (scn.g(), scn.c());
    let gs = g + scn.laser.chirp_rate;
    scn.laser.wavenumber * gs / (2.0 * c * c) * width_terms(packet, scn, p, t)
}

/// φ_WV/φ_MD in closed form:
/// kc/(2ω_eg) · [π²/2 − 2 − (π²z̄ − gt²)/(2pt/m̄ + v_r t + gt²)].
pub fn wv_md_ratio(scn: &Scenario, packet: &GaussianWavePacket, p: f64, t: f64) -> Result<f64> {
    let w = scn.species.transition_frequency;
    let d = drift(scn, p, t) * t;
    if w == 0.0 || d == 0.0 || !scn.channels.mass_defect {
        return Err(Error::UndefinedRatio("mass-defect phase vanishes"));
    }
    let k = scn.laser.wavenumber;
    let g = scn.g();
    Ok(k * scn.c() / (2.0 * w) * (PI * PI / 2.0 - 2.0 - (PI * PI * packet.mean_z() - g * t * t) / d))
}

/// Guard checks specific to the closed-form budget.
pub fn check_budget_guards(scn: &Scenario, packet: &GaussianWavePacket, p: f64, t: f64) -> Result<()> {
    let om = rabi_abs(scn)?;
    let l = scn.limits;
    scn.guard("mirror_pulse_area", om * t / PI - 1.0, l.pulse_area)?;
    if scn.channels.dark_matter && scn.dilaton.amplitude != 0.0 {
        let kr = scn.dilaton.wavenumber;
        let smallest = packet.width_e.min(packet.width_g);
        scn.guard("dm_wavenumber_over_width", kr / smallest, l.dm_wavenumber)?;
        scn.guard("dm_frequency_over_rabi", scn.dilaton.frequency / om, l.dm_freeze)?;
        scn.guard("dm_doppler_over_rabi", kr * p / (scn.species.mass * om), l.dm_freeze)?;
        scn.guard("dm_gravity_over_rabi", kr * scn.g() / (om * om), l.dm_freeze)?;
    }
    Ok(())
}

/// Full mirror-pulse budget. φ_WV uses the perfect-chirp form at α = −g and
/// the general form otherwise.
pub fn mirror_phase_budget(packet: &GaussianWavePacket, scn: &Scenario, p: f64, t: f64) -> Result<PhaseBudget> {
    packet.validate()?;
    check_budget_guards(scn, packet, p, t)?;
    let perfect = is_chirp_perfect(scn);
    let wv = if perfect { phi_wv_perfect(scn, packet, p, t)? } else { wv_phase_general(packet, scn, p, t)? };
    Ok(PhaseBudget::from_lines(
        phi0(scn, packet, p, t)?,
        phi_dm(scn, packet, t),
        phi_ep(scn, packet, p, t)?,
        phi_md(scn, p, t)?,
        wv,
        perfect,
    ))
}

/// Wrap a phase to (−π, π].
pub fn wrap(phase: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut x = phase % two_pi;
    if x > PI {
        x -= two_pi;
    } else if x <= -PI {
        x += two_pi;
    }
    x
}

/// Continue `phase` to the branch closest to `reference`.
pub fn unwrap_near(phase: f64, reference: f64) -> f64 {
    reference + wrap(phase - reference)
}
