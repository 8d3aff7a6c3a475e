//! Adiabatic elimination of the ancilla: projector series, effective two-level
//! Hamiltonian, Stark shifts and effective Rabi frequency.
//!
//! The ancilla amplitude is slaved to the (e, g) amplitudes through
//! ψ_a = P ψ_eg with P = Σ_n P_n and P_n = O(Δ^{-(n+1)}). Inserting this into
//! the Schrödinger equation gives the Bloch equation
//!
//! Δ P = −T† + i∂_t P + P ν_eg − ν_a P + P T P,
//!
//! which is solved order by order.

use nalgebra::{Matrix2, RowVector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dilaton::InternalState;
use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::threelevel::{state_energy, Coupling};

pub type Row = RowVector2<Complex64>;

/// Blocks of the rotating-frame Hamiltonian evaluated at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Blocks {
    /// ν_a (the ancilla diagonal without Δ).
    pub nu_a: f64,
    /// diagonal of ν_eg: (ν_e + δ/2, ν_g − δ/2)
    pub nu_eg: (f64, f64),
    /// T† = (Ω_B/2, Ω_E/2)
    pub t_dag: (f64, f64),
}

impl Blocks {
    pub fn at(scn: &Scenario, z: f64, p: f64, t: f64) -> Result<Self> {
        let (oe, ob) = magnetic_rabis(scn)?;
        let dl = scn.two_level_detuning();
        Ok(Self {
            nu_a: state_energy(scn, InternalState::Ancilla, z, p, t)?,
            nu_eg: (
                state_energy(scn, InternalState::Excited, z, p, t)? + 0.5 * dl,
                state_energy(scn, InternalState::Ground, z, p, t)? - 0.5 * dl,
            ),
            t_dag: (0.5 * ob, 0.5 * oe),
        })
    }

    fn t_dag_row(&self) -> Row {
        Row::new(Complex64::new(self.t_dag.0, 0.0), Complex64::new(self.t_dag.1, 0.0))
    }
}

fn magnetic_rabis(scn: &Scenario) -> Result<(f64, f64)> {
    match scn.laser.coupling {
        Coupling::Magnetic { electric_rabi, magnetic_rabi } => Ok((electric_rabi, magnetic_rabi)),
        Coupling::Direct { .. } => Err(Error::InvalidArgument("direct transitions have no ancilla to eliminate".into())),
    }
}

/// Projector series P_0..=P_N at one point, with the time derivatives taken
/// by central finite differences of step `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorSeries {
    pub orders: Vec<Row>,
    pub truncation_order: usize,
}

impl ProjectorSeries {
    pub fn sum(&self) -> Row {
        self.orders.iter().fold(Row::zeros(), |acc, p| acc + p)
    }

    /// Euclidean (matrix 2-) norms of the individual orders.
    pub fn norms(&self) -> Vec<f64> {
        self.orders.iter().map(|p| p.norm()).collect()
    }
}

/// Generic projector recursion on a time-dependent block function.
///
/// `blocks(t)` must return the blocks at time t; `delta` is the ancilla detuning.
pub fn projector_orders<F>(n_max: usize, blocks: &F, delta: f64, t: f64, h: f64) -> Result<Vec<Row>>
where
    F: Fn(f64) -> Result<Blocks>,
{
    if delta == 0.0 {
        return Err(Error::SingularDetuning);
    }
    orders_at(n_max, blocks, delta, t, h)
}

fn orders_at<F>(n_max: usize, blocks: &F, delta: f64, t: f64, h: f64) -> Result<Vec<Row>>
where
    F: Fn(f64) -> Result<Blocks>,
{
    let b = blocks(t)?;
    let mut out = vec![-b.t_dag_row() / Complex64::new(delta, 0.0)];
    if n_max == 0 {
        return Ok(out);
    }
    // Derivatives of order n need the series up to n at t ± h.
    let (plus, minus) = if n_max >= 1 {
        (orders_at(n_max - 1, blocks, delta, t + h, h)?, orders_at(n_max - 1, blocks, delta, t - h, h)?)
    } else {
        (Vec::new(), Vec::new())
    };
    let tcol = b.t_dag_row().transpose();
    let i = Complex64::new(0.0, 1.0);
    for n in 0..n_max {
        let pn = out[n];
        let dpn = (plus[n] - minus[n]) / Complex64::new(2.0 * h, 0.0);
        let mut rhs = dpn * i;
        rhs[0] += pn[0] * b.nu_eg.0 - b.nu_a * pn[0];
        rhs[1] += pn[1] * b.nu_eg.1 - b.nu_a * pn[1];
        if n >= 1 {
            for k in 0..n {
                let l = n - 1 - k;
                let scalar = (out[k] * tcol)[(0, 0)];
                rhs += out[l] * scalar;
            }
        }
        out.push(rhs / Complex64::new(delta, 0.0));
    }
    Ok(out)
}

/// Projector order `n` for the scenario at (z, p, t). The finite-difference
/// step is 1e-4/|Ω| with Ω the effective Rabi frequency.
pub fn projector_order(scn: &Scenario, n: usize, z: f64, p: f64, t: f64) -> Result<Row> {
    Ok(projector_series(scn, n, z, p, t)?.orders[n])
}

pub fn projector_series(scn: &Scenario, n: usize, z: f64, p: f64, t: f64) -> Result<ProjectorSeries> {
    let delta = scn.ancilla_detuning();
    let eff = effective_parameters(scn)?;
    let h = 1e-4 / eff.rabi.abs().max(f64::MIN_POSITIVE);
    let blocks = |tt: f64| Blocks::at(scn, z, p, tt);
    Ok(ProjectorSeries { orders: projector_orders(n, &blocks, delta, t, h)?, truncation_order: n })
}

/// Effective two-level parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveTwoLevel {
    /// Ω
    pub rabi: f64,
    /// ω̄_ac
    pub mean_stark: f64,
    /// Δω_ac
    pub diff_stark: f64,
}

/// Ω = −Ω_BΩ_E/(2Δ), ω̄_ac = −(Ω_E² + Ω_B²)/(8Δ), Δω_ac = (Ω_E² − Ω_B²)/(4Δ).
pub fn magnetic_parameters(electric_rabi: f64, magnetic_rabi: f64, delta: f64) -> Result<EffectiveTwoLevel> {
    if delta == 0.0 {
        return Err(Error::SingularDetuning);
    }
    let (oe, ob) = (electric_rabi, magnetic_rabi);
    Ok(EffectiveTwoLevel {
        rabi: -ob * oe / (2.0 * delta),
        mean_stark: -(oe * oe + ob * ob) / (8.0 * delta),
        diff_stark: (oe * oe - ob * ob) / (4.0 * delta),
    })
}

/// Direct single-photon transition: fundamental Rabi frequency, no Stark shifts.
pub fn direct_transition_mode(rabi: f64) -> EffectiveTwoLevel {
    EffectiveTwoLevel { rabi, mean_stark: 0.0, diff_stark: 0.0 }
}

pub fn effective_parameters(scn: &Scenario) -> Result<EffectiveTwoLevel> {
    match scn.laser.coupling {
        Coupling::Magnetic { electric_rabi, magnetic_rabi } => {
            magnetic_parameters(electric_rabi, magnetic_rabi, scn.ancilla_detuning())
        }
        Coupling::Direct { rabi } => Ok(direct_transition_mode(rabi)),
    }
}

/// Effective Hamiltonian (ħ = 1) at order 1/Δ, basis (e, g):
/// [[ν̄ + ν/2, Ω/2], [Ω/2, ν̄ − ν/2]] with ν̄ = (ν_e+ν_g)/2 + ω̄_ac and
/// ν = ν_e − ν_g + δ + Δω_ac. The dilaton corrections to Ω_E, Ω_B are dropped.
pub fn effective_hamiltonian(scn: &Scenario, z: f64, p: f64, t: f64) -> Result<(EffectiveTwoLevel, Matrix2<Complex64>)> {
    let eff = effective_parameters(scn)?;
    if let Coupling::Magnetic { electric_rabi, magnetic_rabi } = scn.laser.coupling {
        let d = scn.ancilla_detuning();
        scn.guard("elimination_electric", electric_rabi / d, scn.limits.elimination)?;
        scn.guard("elimination_magnetic", magnetic_rabi / d, scn.limits.elimination)?;
    }
    let ne = state_energy(scn, InternalState::Excited, z, p, t)?;
    let ng = state_energy(scn, InternalState::Ground, z, p, t)?;
    let mean = 0.5 * (ne + ng) + eff.mean_stark;
    let diff = ne - ng + scn.two_level_detuning() + eff.diff_stark;
    let r = |x: f64| Complex64::new(x, 0.0);
    Ok((eff, Matrix2::new(r(mean + 0.5 * diff), r(0.5 * eff.rabi), r(0.5 * eff.rabi), r(mean - 0.5 * diff))))
}

/// T T† for T† = (Ω_B/2, Ω_E/2).
pub fn coupling_product(electric_rabi: f64, magnetic_rabi: f64) -> Matrix2<f64> {
    let (b, e) = (0.5 * magnetic_rabi, 0.5 * electric_rabi);
    Matrix2::new(b * b, b * e, e * b, e * e)
}
