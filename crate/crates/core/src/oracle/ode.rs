//! Fixed-step unitary integrators with step halving, and the c-number
//! two- and three-level oracles built on them.

use nalgebra::{Matrix2, Matrix3, SMatrix};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::elimination::effective_hamiltonian;
use crate::error::{Error, Result};
use crate::resonance::{heisenberg_detuning, heisenberg_mean_energy, DarkMatterEvaluation, HeisenbergTrajectory, PolynomialDetuning};
use crate::scenario::Scenario;
use crate::threelevel::{build_direct_hamiltonian, build_rotating_hamiltonian};

pub type CMatrix<const N: usize> = SMatrix<Complex64, N, N>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Classic fourth-order Runge–Kutta on i dU/dt = H U.
    Rk4,
    /// Fourth-order commutator-free Magnus integrator with exact matrix
    /// exponentials. Exact for constant H, so it copes with the large
    /// ancilla detuning of the three-level system.
    Magnus4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeSolution<const N: usize> {
    pub propagator: CMatrix<N>,
    pub steps: usize,
    pub halvings: usize,
    pub last_change: f64,
}

/// Step-halving controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub initial_steps: usize,
    pub tolerance: f64,
    pub max_halvings: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { initial_steps: 16, tolerance: 1e-12, max_halvings: 20 }
    }
}

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn rk4_step<const N: usize, F: Fn(f64) -> CMatrix<N>>(h: &F, t: f64, dt: f64, u: &CMatrix<N>) -> CMatrix<N> {
    let f = |tt: f64, y: &CMatrix<N>| -(h(tt) * y) * I;
    let k1 = f(t, u);
    let k2 = f(t + 0.5 * dt, &(u + k1 * Complex64::new(0.5 * dt, 0.0)));
    let k3 = f(t + 0.5 * dt, &(u + k2 * Complex64::new(0.5 * dt, 0.0)));
    let k4 = f(t + dt, &(u + k3 * Complex64::new(dt, 0.0)));
    let two = Complex64::new(2.0, 0.0);
    u + (k1 + k2 * two + k3 * two + k4) * Complex64::new(dt / 6.0, 0.0)
}

/// Matrix exponential by scaling and squaring with a Taylor kernel.
pub fn expm<const N: usize>(a: &CMatrix<N>) -> CMatrix<N> {
    let norm = a.iter().map(|z| z.norm()).sum::<f64>();
    let squarings = if norm > 0.25 { (norm / 0.25).log2().ceil() as i32 } else { 0 };
    let scaled = a * Complex64::new(0.5f64.powi(squarings), 0.0);
    let mut term = CMatrix::<N>::identity();
    let mut sum = term;
    for n in 1..=18 {
        term = term * scaled * Complex64::new(1.0 / n as f64, 0.0);
        sum += term;
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

fn magnus4_step<const N: usize, F: Fn(f64) -> CMatrix<N>>(h: &F, t: f64, dt: f64, u: &CMatrix<N>) -> CMatrix<N> {
    let r3 = 3f64.sqrt();
    let (c1, c2) = (0.5 - r3 / 6.0, 0.5 + r3 / 6.0);
    let (a1, a2) = (0.25 + r3 / 6.0, 0.25 - r3 / 6.0);
    let h1 = h(t + c1 * dt);
    let h2 = h(t + c2 * dt);
    let scale = Complex64::new(0.0, -dt);
    let (a1, a2) = (Complex64::new(a1, 0.0), Complex64::new(a2, 0.0));
    // The earlier exponential weights the first node more heavily.
    let first = expm(&((h1 * a1 + h2 * a2) * scale));
    let second = expm(&((h1 * a2 + h2 * a1) * scale));
    second * first * u
}

fn propagate<const N: usize, F: Fn(f64) -> CMatrix<N>>(h: &F, t0: f64, t1: f64, steps: usize, method: Method) -> CMatrix<N> {
    let dt = (t1 - t0) / steps as f64;
    let mut u = CMatrix::<N>::identity();
    for i in 0..steps {
        let t = t0 + i as f64 * dt;
        u = match method {
            Method::Rk4 => rk4_step(h, t, dt, &u),
            Method::Magnus4 => magnus4_step(h, t, dt, &u),
        };
    }
    u
}

/// Integrate i dU/dt = H(t) U from t0 to t1, doubling the step count until
/// the largest matrix-element change drops below the tolerance.
pub fn integrate<const N: usize, F: Fn(f64) -> CMatrix<N>>(
    h: F,
    t0: f64,
    t1: f64,
    method: Method,
    control: StepControl,
) -> Result<OdeSolution<N>> {
    let mut steps = control.initial_steps.max(1);
    let mut prev = propagate(&h, t0, t1, steps, method);
    let mut change = f64::INFINITY;
    for halving in 1..=control.max_halvings {
        steps *= 2;
        let next = propagate(&h, t0, t1, steps, method);
        change = (next - prev).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if change < control.tolerance {
            return Ok(OdeSolution { propagator: next, steps, halvings: halving, last_change: change });
        }
        prev = next;
    }
    Err(Error::Stiffness { halvings: control.max_halvings, change })
}

/// ½[[2ν̄ + ν, Ω], [Ω, 2ν̄ − ν]]
pub fn heisenberg_matrix(nu: f64, nu_bar: f64, rabi: f64) -> Matrix2<Complex64> {
    let r = |x: f64| Complex64::new(x, 0.0);
    Matrix2::new(r(nu_bar + 0.5 * nu), r(0.5 * rabi), r(0.5 * rabi), r(nu_bar - 0.5 * nu))
}

/// Two-level Heisenberg-picture oracle for arbitrary c-number ν_H(t), ν̄_H(t).
pub fn ode_two_level_profile<F, G>(nu: F, nu_bar: G, rabi: f64, t_final: f64) -> Result<OdeSolution<2>>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    integrate(|t| heisenberg_matrix(nu(t), nu_bar(t), rabi), 0.0, t_final, Method::Rk4, StepControl::default())
}

/// Two-level oracle for a polynomial detuning.
pub fn ode_two_level_polynomial(poly: &PolynomialDetuning, rabi: f64, t_final: f64) -> Result<OdeSolution<2>> {
    ode_two_level_profile(|t| poly.detuning(t), |t| poly.mean_energy(t), rabi, t_final)
}

/// Two-level oracle on the trajectory of (z, p), with ν_H and ν̄_H evaluated
/// directly (no polynomial expansion).
pub fn ode_two_level(scn: &Scenario, z: f64, p: f64, t_final: f64, dm: DarkMatterEvaluation) -> Result<Matrix2<Complex64>> {
    let rabi = crate::elimination::effective_parameters(scn)?.rabi;
    // Detuning evaluation can only fail on configuration errors, which show up at t = 0.
    heisenberg_detuning(scn, z, p, 0.0, dm)?;
    let nu = |t: f64| heisenberg_detuning(scn, z, p, t, dm).unwrap_or(f64::NAN);
    let nb = |t: f64| heisenberg_mean_energy(scn, z, p, t, dm);
    Ok(ode_two_level_profile(nu, nb, rabi, t_final)?.propagator)
}

/// Exact rotating-frame three-level evolution at a fixed phase-space point, basis (a, e, g).
pub fn ode_three_level(scn: &Scenario, z: f64, p: f64, t_final: f64) -> Result<Matrix3<Complex64>> {
    build_rotating_hamiltonian(scn, z, p, 0.0)?;
    let h = |t: f64| build_rotating_hamiltonian(scn, z, p, t).unwrap_or_else(|_| Matrix3::from_element(Complex64::new(f64::NAN, 0.0)));
    Ok(integrate(h, 0.0, t_final, Method::Magnus4, StepControl::default())?.propagator)
}

/// Effective two-level evolution at a fixed phase-space point, basis (e, g).
pub fn ode_effective_two_level(scn: &Scenario, z: f64, p: f64, t_final: f64) -> Result<Matrix2<Complex64>> {
    effective_hamiltonian(scn, z, p, 0.0)?;
    let h = |t: f64| {
        effective_hamiltonian(scn, z, p, t).map(|x| x.1).unwrap_or_else(|_| Matrix2::from_element(Complex64::new(f64::NAN, 0.0)))
    };
    Ok(integrate(h, 0.0, t_final, Method::Magnus4, StepControl::default())?.propagator)
}

/// Rotating-frame direct two-level evolution at a fixed phase-space point, basis (e, g).
pub fn ode_direct_two_level(scn: &Scenario, z: f64, p: f64, t_final: f64) -> Result<Matrix2<Complex64>> {
    build_direct_hamiltonian(scn, z, p, 0.0)?;
    let h = |t: f64| build_direct_hamiltonian(scn, z, p, t).unwrap_or_else(|_| Matrix2::from_element(Complex64::new(f64::NAN, 0.0)));
    Ok(integrate(h, 0.0, t_final, Method::Magnus4, StepControl::default())?.propagator)
}

/// Three-level evolution with the centre of mass following the classical
/// free-fall trajectory of the canonical point (z, p).
pub fn ode_three_level_classical(scn: &Scenario, z: f64, p: f64, t_final: f64) -> Result<Matrix3<Complex64>> {
    let traj = HeisenbergTrajectory::new(scn, z, p);
    build_rotating_hamiltonian(scn, z, p, 0.0)?;
    let h = |t: f64| {
        build_rotating_hamiltonian(scn, traj.position(t), traj.momentum(t), t)
            .unwrap_or_else(|_| Matrix3::from_element(Complex64::new(f64::NAN, 0.0)))
    };
    Ok(integrate(h, 0.0, t_final, Method::Magnus4, StepControl::default())?.propagator)
}

/// Direct two-level evolution along the classical trajectory of (z, p).
pub fn ode_direct_classical(scn: &Scenario, z: f64, p: f64, t_final: f64) -> Result<Matrix2<Complex64>> {
    let traj = HeisenbergTrajectory::new(scn, z, p);
    build_direct_hamiltonian(scn, z, p, 0.0)?;
    let h = |t: f64| {
        build_direct_hamiltonian(scn, traj.position(t), traj.momentum(t), t)
            .unwrap_or_else(|_| Matrix2::from_element(Complex64::new(f64::NAN, 0.0)))
    };
    Ok(integrate(h, 0.0, t_final, Method::Magnus4, StepControl::default())?.propagator)
}

/// Closed-form propagator of ½[[ν, Ω], [Ω, −ν]] with constant ν.
pub fn generalized_rabi(nu: f64, rabi: f64, t: f64) -> Matrix2<Complex64> {
    let w = (nu * nu + rabi * rabi).sqrt();
    let (s, c) = (0.5 * w * t).sin_cos();
    let a = Complex64::new(c, -nu / w * s);
    let b = Complex64::new(0.0, -rabi / w * s);
    Matrix2::new(a, b, b, a.conj())
}
