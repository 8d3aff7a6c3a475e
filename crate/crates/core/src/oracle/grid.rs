//! Position-grid split-step solver for the two-component wave packet.
//!
//! The solver works in the frame that removes only the temporal laser phase
//! and the Compton phase ω̄t. In that frame the state-dependent energies are
//!
//!   E_e = δ/2 + Δω_ac/2 + ω̄_ac − kαt/2 + ω_eβ_eϱ + p²/(2m_e) + m_e(ϱ) g z
//!   E_g = −δ/2 − Δω_ac/2 + ω̄_ac + kαt/2 + ω_gβ_gϱ + p²/(2m_g) + m_g(ϱ) g z
//!
//! and the coupling is ⟨e|H|g⟩ = (Ω/2) e^{iS(z,t)} with S the spatial laser
//! phase. Kinetic energies use the rest masses m_j(0); the dilaton enters
//! through the rest-energy and potential terms. Amplitudes are reported
//! together with the symbolic frame phase that maps them to the lab frame.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::dilaton::InternalState;
use crate::elimination::effective_parameters;
use crate::error::{Error, Result};
use crate::phases::GaussianWavePacket;
use crate::propagator::{frame_offset, phase_difference, Amplitude};
use crate::scenario::Scenario;
use crate::threelevel::spatial_phase;

/// Edge density relative to the peak above which a run is rejected.
pub const BOUNDARY_LIMIT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Total length of the periodic box.
    pub extent: f64,
    /// Number of points, a power of two.
    pub points: usize,
    /// Requested time step; the actual step divides the pulse evenly.
    pub time_step: f64,
    /// Centre of the box.
    pub center: f64,
    /// Operator-splitting order (only 2 is implemented).
    pub splitting_order: u8,
}

impl GridSpec {
    pub fn new(extent: f64, points: usize, time_step: f64, center: f64) -> Result<Self> {
        if !points.is_power_of_two() || points < 16 {
            return Err(Error::InvalidArgument(format!("grid points must be a power of two ≥ 16, got {points}")));
        }
        if !(extent > 0.0 && time_step > 0.0) {
            return Err(Error::InvalidArgument("grid extent and time step must be positive".into()));
        }
        Ok(Self { extent, points, time_step, center, splitting_order: 2 })
    }

    /// Default grid: `points` samples spanning the initial and kicked packet
    /// positions of both states, padded by 12 position widths on each side.
    pub fn auto(scn: &Scenario, packet: &GaussianWavePacket, t: f64, points: usize, steps: usize) -> Result<Self> {
        let m = scn.species.mass;
        let k = scn.laser.wavenumber;
        let g = scn.g();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in [InternalState::Excited, InternalState::Ground] {
            let z0 = packet.center(s);
            for kick in [-k, 0.0, k] {
                let z1 = z0 + (packet.momentum(s) + kick) * t / m - 0.5 * g * t * t;
                lo = lo.min(z0.min(z1));
                hi = hi.max(z0.max(z1));
            }
        }
        let widest = 1.0 / packet.width_e.min(packet.width_g);
        let pad = 12.0 * widest * (1.0 + (packet.width_e.max(packet.width_g).powi(2) * t / m).powi(2)).sqrt();
        let extent = hi - lo + 2.0 * pad;
        let spec = Self::new(extent, points, t / steps as f64, 0.5 * (lo + hi))?;

        // Gravity shifts momenta by m g t during the run; the FFT band has to hold
        // every kicked packet before and after that shift.
        let mut p_max: f64 = 0.0;
        for (s, kick) in [(InternalState::Excited, -k), (InternalState::Ground, k)] {
            for p0 in [packet.momentum(s), packet.momentum(s) + kick] {
                p_max = p_max.max(p0.abs()).max((p0 - m * g * t).abs());
            }
        }
        p_max += 12.0 * packet.width_e.max(packet.width_g);
        let nyquist = std::f64::consts::PI / spec.spacing();
        if nyquist < p_max {
            let needed = (extent * p_max / std::f64::consts::PI).ceil() as usize;
            return Err(Error::InvalidArgument(format!(
                "grid of {points} points resolves momenta up to {nyquist:e} but the packets reach {p_max:e}; use at least {} points",
                needed.next_power_of_two()
            )));
        }
        Ok(spec)
    }

    pub fn spacing(&self) -> f64 {
        self.extent / self.points as f64
    }

    pub fn position(&self, i: usize) -> f64 {
        self.center - 0.5 * self.extent + i as f64 * self.spacing()
    }

    /// Angular wavenumber of FFT bin `i`.
    pub fn momentum(&self, i: usize) -> f64 {
        let n = self.points as i64;
        let j = i as i64;
        let j = if j < n / 2 { j } else { j - n };
        2.0 * std::f64::consts::PI * j as f64 / self.extent
    }

    /// Same grid with half the time step.
    pub fn refined(&self) -> Self {
        Self { time_step: 0.5 * self.time_step, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub state: InternalState,
    pub momentum: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeAmplitude {
    pub probe: Probe,
    pub amplitude: Amplitude,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub grid: GridSpec,
    pub initial: InternalState,
    pub time: f64,
    pub steps: usize,
    /// Final wave functions on the position grid, (e, g).
    pub excited: Vec<Complex64>,
    pub ground: Vec<Complex64>,
    pub transfer_probability: f64,
    pub norm: f64,
    pub norm_drift: f64,
    pub boundary_leak: f64,
    pub probes: Vec<ProbeAmplitude>,
}

impl OracleResult {
    pub fn component(&self, s: InternalState) -> &[Complex64] {
        if s == InternalState::Excited { &self.excited } else { &self.ground }
    }

    /// Momentum amplitude of a component at an arbitrary momentum, in the lab
    /// frame up to the symbolic offset.
    pub fn amplitude_at(&self, s: InternalState, p: f64) -> Amplitude {
        Amplitude { reduced: momentum_amplitude(&self.grid, self.component(s), p), offset: frame_offset(self.initial, s) }
    }

    /// Momentum of the largest |ψ̃| on the FFT grid, refined by a parabola through the neighbours.
    pub fn peak_momentum(&self, s: InternalState) -> f64 {
        let spec = spectrum(&self.grid, self.component(s));
        let n = spec.len();
        let (imax, _) = spec.iter().enumerate().fold((0, 0.0), |acc, (i, z)| if z.norm() > acc.1 { (i, z.norm()) } else { acc });
        let f = |i: usize| spec[i % n].norm().ln();
        let (a, b, c) = (f(imax + n - 1), f(imax), f(imax + 1));
        let denom = a - 2.0 * b + c;
        let shift = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
        self.grid.momentum(imax) + shift * 2.0 * std::f64::consts::PI / self.grid.extent
    }

    /// Phase weighted by |ψ̃(p)|² over the FFT grid, arg Σ |ψ̃| ψ̃.
    pub fn weighted_phase(&self, s: InternalState) -> f64 {
        let spec = spectrum(&self.grid, self.component(s));
        spec.iter().map(|z| z * z.norm()).sum::<Complex64>().arg()
    }

    /// Second central moment of |ψ(z)|² summed over both components.
    pub fn position_variance(&self) -> f64 {
        let dz = self.grid.spacing();
        let mut n = 0.0;
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for i in 0..self.grid.points {
            let z = self.grid.position(i);
            let d = (self.excited[i].norm_sqr() + self.ground[i].norm_sqr()) * dz;
            n += d;
            m1 += d * z;
            m2 += d * z * z;
        }
        let mean = m1 / n;
        m2 / n - mean * mean
    }
}

/// ψ̃(p) = (2π)^{-1/2} Σ ψ(z_i) e^{−ipz_i} Δz
pub fn momentum_amplitude(grid: &GridSpec, psi: &[Complex64], p: f64) -> Complex64 {
    let dz = grid.spacing();
    let mut acc = Complex64::new(0.0, 0.0);
    // Rotate incrementally: e^{−ip z_i} = e^{−ip z_0} (e^{−ip Δz})^i, resynchronised periodically.
    let step = Complex64::from_polar(1.0, -p * dz);
    let mut phase = Complex64::from_polar(1.0, -p * grid.position(0));
    for (i, v) in psi.iter().enumerate() {
        if i % 256 == 0 {
            phase = Complex64::from_polar(1.0, -p * grid.position(i));
        }
        acc += v * phase;
        phase *= step;
    }
    acc * dz / (2.0 * std::f64::consts::PI).sqrt()
}

/// ψ̃ on the FFT momentum grid with the same normalization as `momentum_amplitude`.
fn spectrum(grid: &GridSpec, psi: &[Complex64]) -> Vec<Complex64> {
    let mut buf = psi.to_vec();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(grid.points).process(&mut buf);
    let z0 = grid.position(0);
    let scale = grid.spacing() / (2.0 * std::f64::consts::PI).sqrt();
    for (i, v) in buf.iter_mut().enumerate() {
        *v *= Complex64::from_polar(scale, -grid.momentum(i) * z0);
    }
    buf
}

/// Position-space wave function of the Gaussian packet, ψ(z) = (σ²/π)^{1/4} e^{ip_j(z+z_j) − σ²(z+z_j)²/2}.
pub fn initial_wavefunction(grid: &GridSpec, packet: &GaussianWavePacket, s: InternalState) -> Vec<Complex64> {
    let w = packet.width(s);
    let p0 = packet.momentum(s);
    let zj = packet.position(s);
    let norm = (w * w / std::f64::consts::PI).powf(0.25);
    (0..grid.points)
        .map(|i| {
            let x = grid.position(i) + zj;
            Complex64::from_polar(norm * (-0.5 * w * w * x * x).exp(), p0 * x)
        })
        .collect()
}

struct Stepper<'a> {
    scn: &'a Scenario,
    grid: GridSpec,
    positions: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    rabi: f64,
    mean_stark: f64,
    diff_stark: f64,
    mass_e: f64,
    mass_g: f64,
}

impl<'a> Stepper<'a> {
    fn new(scn: &'a Scenario, grid: GridSpec) -> Result<Self> {
        let eff = effective_parameters(scn)?;
        let mut planner = FftPlanner::new();
        let c = scn.c();
        let md = scn.channels.mass_defect;
        Ok(Self {
            scn,
            grid,
            positions: (0..grid.points).map(|i| grid.position(i)).collect(),
            fft: planner.plan_fft_forward(grid.points),
            ifft: planner.plan_fft_inverse(grid.points),
            rabi: eff.rabi,
            mean_stark: eff.mean_stark,
            diff_stark: eff.diff_stark,
            mass_e: scn.species.rest_mass(InternalState::Excited, c, md),
            mass_g: scn.species.rest_mass(InternalState::Ground, c, md),
        })
    }

    /// Apply exp(−i M τ) pointwise with M the 2×2 potential-plus-coupling matrix at time t.
    fn potential(&self, e: &mut [Complex64], g: &mut [Complex64], t: f64, tau: f64) {
        let scn = self.scn;
        let (c, grav) = (scn.c(), scn.g());
        let k = scn.laser.wavenumber;
        let a = scn.laser.chirp_rate;
        let delta = scn.two_level_detuning();
        let (be, bg) = (scn.species.beta_e, scn.species.beta_g);
        let (me, mg) = (self.mass_e, self.mass_g);
        let (we, wg) = (me * c * c, mg * c * c);
        let ce = 0.5 * delta + 0.5 * self.diff_stark + self.mean_stark - 0.5 * k * a * t;
        let cg = -0.5 * delta - 0.5 * self.diff_stark + self.mean_stark + 0.5 * k * a * t;
        let half_rabi = 0.5 * self.rabi;
        for (i, &z) in self.positions.iter().enumerate() {
            let rho = scn.rho(z, t);
            let ve = ce + we * be * rho + me * (1.0 + be * rho) * grav * z;
            let vg = cg + wg * bg * rho + mg * (1.0 + bg * rho) * grav * z;
            let mean = 0.5 * (ve + vg);
            let bz = 0.5 * (ve - vg);
            let coupling = Complex64::from_polar(half_rabi, spatial_phase(scn, z, t));
            let b = (bz * bz + half_rabi * half_rabi).sqrt();
            let (s, cs) = (b * tau).sin_cos();
            let (sb_z, sb_c) = if b > 0.0 { (s * bz / b, s / b) } else { (0.0, 0.0) };
            let global = Complex64::from_polar(1.0, -mean * tau);
            let (x, y) = (e[i], g[i]);
            let ne = Complex64::new(cs, -sb_z) * x - Complex64::new(0.0, sb_c) * coupling * y;
            let ng = -Complex64::new(0.0, sb_c) * coupling.conj() * x + Complex64::new(cs, sb_z) * y;
            e[i] = global * ne;
            g[i] = global * ng;
        }
    }

    fn kinetic(&self, psi: &mut [Complex64], mass: f64, dt: f64) {
        self.fft.process(psi);
        let n = self.grid.points as f64;
        for (i, v) in psi.iter_mut().enumerate() {
            let p = self.grid.momentum(i);
            *v *= Complex64::from_polar(1.0 / n, -p * p / (2.0 * mass) * dt);
        }
        self.ifft.process(psi);
    }

    fn step(&self, e: &mut [Complex64], g: &mut [Complex64], t: f64, dt: f64) {
        let mid = t + 0.5 * dt;
        self.potential(e, g, mid, 0.5 * dt);
        self.kinetic(e, self.mass_e, dt);
        self.kinetic(g, self.mass_g, dt);
        self.potential(e, g, mid, 0.5 * dt);
    }
}

fn total_norm(grid: &GridSpec, e: &[Complex64], g: &[Complex64]) -> f64 {
    let dz = grid.spacing();
    e.iter().chain(g.iter()).map(|z| z.norm_sqr()).sum::<f64>() * dz
}

fn boundary_leak(grid: &GridSpec, e: &[Complex64], g: &[Complex64]) -> f64 {
    let n = grid.points;
    let edge = (n / 64).max(1);
    let dens = |i: usize| e[i].norm_sqr() + g[i].norm_sqr();
    let peak = (0..n).map(dens).fold(0.0, f64::max);
    let edge_max = (0..edge).chain(n - edge..n).map(dens).fold(0.0, f64::max);
    edge_max / peak
}

/// Evolve the packet of internal state `initial` for `t_final` and sample the
/// requested momentum amplitudes.
pub fn grid_evolve(
    scn: &Scenario,
    packet: &GaussianWavePacket,
    initial: InternalState,
    grid: &GridSpec,
    t_final: f64,
    probes: &[Probe],
) -> Result<OracleResult> {
    packet.validate()?;
    let stepper = Stepper::new(scn, *grid)?;
    let zero = vec![Complex64::new(0.0, 0.0); grid.points];
    let start = initial_wavefunction(grid, packet, initial);
    let (mut e, mut g) = if initial == InternalState::Excited { (start, zero) } else { (zero, start) };
    let norm0 = total_norm(grid, &e, &g);
    let leak0 = boundary_leak(grid, &e, &g);
    let steps = ((t_final / grid.time_step).round() as usize).max(1);
    let dt = t_final / steps as f64;
    for i in 0..steps {
        stepper.step(&mut e, &mut g, i as f64 * dt, dt);
    }
    let norm = total_norm(grid, &e, &g);
    let leak = boundary_leak(grid, &e, &g).max(leak0);
    if leak > BOUNDARY_LIMIT {
        return Err(Error::BoundaryLeak { ratio: leak, limit: BOUNDARY_LIMIT });
    }
    let other = if initial == InternalState::Excited { &g } else { &e };
    let transfer = other.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.spacing() / norm;
    let mut result = OracleResult {
        grid: *grid,
        initial,
        time: t_final,
        steps,
        excited: e,
        ground: g,
        transfer_probability: transfer,
        norm,
        norm_drift: (norm - norm0).abs(),
        boundary_leak: leak,
        probes: Vec::new(),
    };
    result.probes = probes.iter().map(|&probe| ProbeAmplitude { probe, amplitude: result.amplitude_at(probe.state, probe.momentum) }).collect();
    Ok(result)
}

/// The two grid runs behind a mirror-pulse phase: g input and e input.
#[derive(Debug, Clone, PartialEq)]
pub struct MirrorRuns {
    pub from_ground: OracleResult,
    pub from_excited: OracleResult,
}

impl MirrorRuns {
    pub fn run(scn: &Scenario, packet: &GaussianWavePacket, grid: &GridSpec, t: f64) -> Result<Self> {
        let (a, b) = rayon::join(
            || grid_evolve(scn, packet, InternalState::Ground, grid, t, &[]),
            || grid_evolve(scn, packet, InternalState::Excited, grid, t, &[]),
        );
        Ok(Self { from_ground: a?, from_excited: b? })
    }

    /// Peak momentum of the g output of the e input.
    pub fn peak_momentum(&self) -> f64 {
        self.from_excited.peak_momentum(InternalState::Ground)
    }

    /// φ_π = arg ψ_{e,g}(p + k) − arg ψ_{g,e}(p).
    pub fn phase(&self, scn: &Scenario, p: f64) -> f64 {
        let k = scn.laser.wavenumber;
        let a = self.from_ground.amplitude_at(InternalState::Excited, p + k);
        let b = self.from_excited.amplitude_at(InternalState::Ground, p);
        phase_difference(scn, &a, &b, self.from_ground.time)
    }

    /// Same difference with both phases taken as amplitude-weighted means over momentum.
    pub fn weighted_phase(&self, scn: &Scenario) -> f64 {
        let t = self.from_ground.time;
        let offset = frame_offset(InternalState::Ground, InternalState::Excited)
            .minus(&frame_offset(InternalState::Excited, InternalState::Ground))
            .materialize(scn, t);
        self.from_ground.weighted_phase(InternalState::Excited) - self.from_excited.weighted_phase(InternalState::Ground) + offset
    }
}

/// Mirror-pulse phase φ_π at final momentum `p` from two grid runs.
pub fn grid_mirror_phase(scn: &Scenario, packet: &GaussianWavePacket, grid: &GridSpec, t: f64, p: f64) -> Result<f64> {
    Ok(MirrorRuns::run(scn, packet, grid, t)?.phase(scn, p))
}

/// Accepts `fine` when it differs from `coarse` by less than `tolerance/10`.
pub fn gate(coarse: f64, fine: f64, tolerance: f64) -> Result<f64> {
    let change = crate::phases::wrap(fine - coarse).abs();
    if change >= 0.1 * tolerance {
        return Err(Error::ConvergenceGate { change, limit: 0.1 * tolerance });
    }
    Ok(fine)
}

/// Mirror phase that passes the time-step convergence gate: the result at the
/// refined step must differ from the coarse one by less than `tolerance/10`.
pub fn converged_mirror_phase(
    scn: &Scenario,
    packet: &GaussianWavePacket,
    grid: &GridSpec,
    t: f64,
    p: f64,
    tolerance: f64,
) -> Result<f64> {
    let (coarse, fine) = rayon::join(
        || grid_mirror_phase(scn, packet, grid, t, p),
        || grid_mirror_phase(scn, packet, &grid.refined(), t, p),
    );
    gate(coarse?, fine?, tolerance)
}

/// Change of the mirror phase between a reference scenario and a perturbed
/// one, φ_π(perturbed) − φ_π(reference), behind the convergence gate.
pub fn converged_phase_shift(
    reference: &Scenario,
    perturbed: &Scenario,
    packet: &GaussianWavePacket,
    grid: &GridSpec,
    t: f64,
    p: f64,
    tolerance: f64,
) -> Result<f64> {
    let shift = |g: &GridSpec| -> Result<f64> {
        let (a, b) = rayon::join(
            || grid_mirror_phase(perturbed, packet, g, t, p),
            || grid_mirror_phase(reference, packet, g, t, p),
        );
        Ok(crate::phases::wrap(a? - b?))
    };
    let (coarse, fine) = rayon::join(|| shift(grid), || shift(&grid.refined()));
    gate(coarse?, fine?, tolerance)
}
