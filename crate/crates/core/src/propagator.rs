//! First-order Dyson propagator of a square pulse in the Heisenberg picture
//! and its reassembly into Schrödinger-picture wave-packet amplitudes.
//!
//! Matrices are in the basis (e, g).

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dilaton::InternalState;
use crate::elimination::effective_parameters;
use crate::error::{Error, Result};
use crate::phases::GaussianWavePacket;
use crate::resonance::{table1_coefficients, HeisenbergTrajectory, PolynomialDetuning};
use crate::scenario::Scenario;
use crate::threelevel::temporal_phase;

/// (η_j, ξ_j) at half pulse area φ_t for j ∈ {0, 1, 2, 3}.
///
/// η_j = ∫₀^{2φ_t} s^j cos(s − φ_t) ds weights ν^(j) in the diagonal elements,
/// ξ_j = −∫₀^{2φ_t} s^j sin(s − φ_t) ds in the off-diagonal elements.
pub fn dyson_coefficients(j: usize, phi: f64) -> Result<(f64, f64)> {
    let (s, c) = phi.sin_cos();
    let u = -s + phi * c;
    Ok(match j {
        0 => (2.0 * s, 0.0),
        1 => (2.0 * phi * s, -2.0 * s + 2.0 * phi * c),
        2 => (-4.0 * s + 4.0 * phi * c + 4.0 * phi * phi * s, 4.0 * phi * u),
        3 => (
            -12.0 * phi * s + 12.0 * phi * phi * c + 8.0 * phi.powi(3) * s,
            2.0 * (4.0 * phi * phi - 6.0) * u - 4.0 * phi * phi * s,
        ),
        _ => return Err(Error::InvalidArgument(format!("Dyson coefficient order {j} out of range 0..=3"))),
    })
}

/// How the mean-energy factor enters the matrix elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanEnergyForm {
    /// 1 − i Σ ν̄^(j) t^{j+1}/(j+1), as in the first-order expansion.
    #[default]
    Linearized,
    /// exp(−i Σ ν̄^(j) t^{j+1}/(j+1)), for stability comparisons.
    Exponentiated,
}

/// λ_n in the matrix elements: −1 for e, +1 for g.
pub fn lambda(state: InternalState) -> f64 {
    match state {
        InternalState::Excited => -1.0,
        _ => 1.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulsePropagator {
    /// φ_t = Ωt/2
    pub pulse_area: f64,
    pub matrix: Matrix2<Complex64>,
}

impl PulsePropagator {
    /// Assemble the first-order matrix elements from polynomial coefficients.
    pub fn from_coefficients(poly: &PolynomialDetuning, rabi: f64, t: f64, form: MeanEnergyForm) -> Result<Self> {
        Self::with_lambdas(poly, rabi, t, form, (lambda(InternalState::Excited), lambda(InternalState::Ground)))
    }

    /// Same as `from_coefficients` with explicit (λ_e, λ_g).
    pub fn with_lambdas(
        poly: &PolynomialDetuning,
        rabi: f64,
        t: f64,
        form: MeanEnergyForm,
        lambdas: (f64, f64),
    ) -> Result<Self> {
        if rabi == 0.0 {
            return Err(Error::InvalidArgument("the Dyson propagator needs a non-zero Rabi frequency".into()));
        }
        let phi = 0.5 * rabi * t;
        let mut diag = 0.0;
        let mut off = 0.0;
        for j in 0..4 {
            let (eta, xi) = dyson_coefficients(j, phi)?;
            let scale = rabi.powi(j as i32);
            diag += poly.det_coeffs[j] * eta / scale;
            off += poly.det_coeffs[j] * xi / scale;
        }
        let mean = match form {
            MeanEnergyForm::Linearized => Complex64::new(1.0, -poly.mean_phase(t)),
            MeanEnergyForm::Exponentiated => Complex64::from_polar(1.0, -poly.mean_phase(t)),
        };
        let i = Complex64::new(0.0, 1.0);
        let (s, c) = phi.sin_cos();
        let elem_diag = |l: f64| mean * c + i * (l / (2.0 * rabi)) * diag;
        let elem_off = |l: f64| -i * s * mean - Complex64::new(l / (2.0 * rabi) * off, 0.0);
        let (le, lg) = lambdas;
        Ok(Self { pulse_area: phi, matrix: Matrix2::new(elem_diag(le), elem_off(le), elem_off(lg), elem_diag(lg)) })
    }

    /// ‖U†U − 1‖ (Frobenius).
    pub fn unitarity_defect(&self) -> f64 {
        (self.matrix.adjoint() * self.matrix - Matrix2::identity()).norm()
    }
}

/// Heisenberg-picture propagator at the phase-space point (z, p) for a pulse of duration t.
pub fn propagate_heisenberg(scn: &Scenario, z: f64, p: f64, t: f64) -> Result<PulsePropagator> {
    propagate_heisenberg_with(scn, z, p, t, MeanEnergyForm::Linearized)
}

pub fn propagate_heisenberg_with(scn: &Scenario, z: f64, p: f64, t: f64, form: MeanEnergyForm) -> Result<PulsePropagator> {
    let eff = effective_parameters(scn)?;
    let poly = table1_coefficients(scn, z, p)?;
    scn.guard("perturbative_detuning", poly.guard_parameter(eff.rabi, t), scn.limits.perturbative)?;
    PulsePropagator::from_coefficients(&poly, eff.rabi, t, form)
}

/// Phase a·φ₀ + b·Φ_L(t) + c·ω̄t kept symbolically, where
/// Φ_L(t) = ω_L t(1 + αt/(2c)) is the accumulated temporal laser phase.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SymbolicPhase {
    pub phase_offset: f64,
    pub laser: f64,
    pub compton: f64,
}

impl SymbolicPhase {
    pub fn minus(&self, other: &SymbolicPhase) -> SymbolicPhase {
        SymbolicPhase {
            phase_offset: self.phase_offset - other.phase_offset,
            laser: self.laser - other.laser,
            compton: self.compton - other.compton,
        }
    }

    /// Numerical value. Terms with a vanishing coefficient are skipped, so a
    /// cancelled Compton phase never enters floating point.
    pub fn materialize(&self, scn: &Scenario, t: f64) -> f64 {
        let mut v = 0.0;
        if self.phase_offset != 0.0 {
            v += self.phase_offset * scn.laser.phase_offset;
        }
        if self.laser != 0.0 {
            let accumulated = -(temporal_phase(&scn.laser, t, scn.c()) + scn.laser.phase_offset);
            v += self.laser * accumulated;
        }
        if self.compton != 0.0 {
            v += self.compton * scn.mean_frequency() * t;
        }
        v
    }
}

/// Amplitude split into a reduced part and a symbolic large phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitude {
    pub reduced: Complex64,
    pub offset: SymbolicPhase,
}

impl Amplitude {
    pub fn norm_sqr(&self) -> f64 {
        self.reduced.norm_sqr()
    }
}

/// arg(a) − arg(b) with the symbolic parts cancelled before evaluation.
pub fn phase_difference(scn: &Scenario, a: &Amplitude, b: &Amplitude, t: f64) -> f64 {
    (a.reduced * b.reduced.conj()).arg() + a.offset.minus(&b.offset).materialize(scn, t)
}

/// Symbolic frame phases for initial state j and final state n:
/// U_rot,n(t) contributes s_n(−φ₀ − Φ_L)/2 − ω̄t and U_rot,j†(0) contributes s_jφ₀/2.
pub fn frame_offset(initial: InternalState, fin: InternalState) -> SymbolicPhase {
    let (sj, sn) = (initial.kick_sign(), fin.kick_sign());
    SymbolicPhase { phase_offset: 0.5 * (sj - sn), laser: -0.5 * sn, compton: -1.0 }
}

/// ∫₀ᵗ (q + m̄g(t−s))²/(2m̄) ds: kinetic phase of the mean Heisenberg
/// transformation for a packet that ends at momentum q.
pub fn free_fall_phase(q: f64, mass: f64, g: f64, t: f64) -> f64 {
    let a = mass * g * t;
    t * (q * q + q * a + a * a / 3.0) / (2.0 * mass)
}

/// Schrödinger-picture amplitude ψ_{n,j}(p, t) of a Gaussian packet.
///
/// The frame displacements e^{±iκz} act as exact momentum shifts; the
/// Heisenberg propagator is evaluated at the packet's initial position
/// and at the canonical momentum that maps onto `p`; quadratic frame
/// phases (only present for imperfect chirping) are evaluated on the
/// classical trajectory.
pub fn propagate_schroedinger(
    scn: &Scenario,
    packet: &GaussianWavePacket,
    initial: InternalState,
    fin: InternalState,
    p: f64,
    t: f64,
) -> Result<Amplitude> {
    let eff = effective_parameters(scn)?;
    let m = scn.species.mass;
    let (g, c) = (scn.g(), scn.c());
    let k = scn.laser.wavenumber;
    let a = scn.laser.chirp_rate;
    let (sj, sn) = (initial.kick_sign(), fin.kick_sign());
    let wv = scn.channels.wave_vector;
    let kappa_t = if wv { 0.5 * k * (1.0 + a * t / c) } else { 0.5 * k };
    let kappa_0 = 0.5 * k;
    let quad = if wv { -k * (g + a) / (4.0 * c * c) } else { 0.0 };

    let q = p - sn * kappa_t;
    let pc = q + m * g * t;
    let p0 = pc + sj * kappa_0;
    let z0 = packet.center(initial);

    let u = propagate_heisenberg(scn, z0, pc, t)?;
    let idx = |s: InternalState| if s == InternalState::Excited { 0 } else { 1 };
    let elem = u.matrix[(idx(fin), idx(initial))];

    let traj = HeisenbergTrajectory::new(scn, z0, pc);
    let zt = traj.position(t);
    let phase = -free_fall_phase(q, m, g, t) - (0.25 * scn.recoil_frequency() + eff.mean_stark) * t
        + sn * quad * zt * zt
        - sj * quad * z0 * z0;
    let reduced = packet.amplitude(initial, p0) * elem * Complex64::from_polar(1.0, phase);
    Ok(Amplitude { reduced, offset: frame_offset(initial, fin) })
}

/// φ_π = arg ψ_{e,g}(p + k, t) − arg ψ_{g,e}(p, t) through the propagator path.
pub fn mirror_phase(scn: &Scenario, packet: &GaussianWavePacket, p: f64, t: f64) -> Result<f64> {
    let eg = propagate_schroedinger(scn, packet, InternalState::Ground, InternalState::Excited, p + scn.laser.wavenumber, t)?;
    let ge = propagate_schroedinger(scn, packet, InternalState::Excited, InternalState::Ground, p, t)?;
    Ok(phase_difference(scn, &eg, &ge, t))
}
