//! The batch experiments behind the CLI subcommands.

use std::path::PathBuf;

use rayon::prelude::*;
use serde_json::json;

use crate::elimination::effective_parameters;
use crate::error::{Error, Result};
use crate::oracle::grid::{gate, grid_mirror_phase, GridSpec, MirrorRuns};
use crate::oracle::ode::{generalized_rabi, ode_direct_classical, ode_three_level_classical};
use crate::oracle::snapshot::Snapshot;
use crate::phases::{mirror_phase_budget, unwrap_near, wrap, wv_md_ratio, wv_phase_general, wv_width_terms, phi_wv_perfect};
use crate::propagator::{mirror_phase, propagate_heisenberg};
use crate::resonance::{heisenberg_detuning, resonant_laser_frequency, table1_coefficients, DarkMatterEvaluation};
use crate::scenario::{Channels, GuardMode, Scenario};
use crate::threelevel::Coupling;
use crate::units::Dimension;

use super::config::{Engine, Resolved, ScenarioConfig, SweepAxis};
use super::output::{Cell, Row, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Experiment {
    Rabi,
    ResonanceScan,
    PhaseBudget,
    ChirpSweep,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Rabi => "rabi",
            Experiment::ResonanceScan => "resonance-scan",
            Experiment::PhaseBudget => "phase-budget",
            Experiment::ChirpSweep => "chirp-sweep",
        }
    }
}

/// Run-wide settings that are not part of the scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub seed: u64,
    pub engine: Engine,
    pub strict: bool,
    /// Directory for grid snapshots, when requested.
    pub snapshot_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub table: Table,
    pub summary: serde_json::Value,
    /// Rows with at least one violated guard.
    pub guard_violations: usize,
    /// Rows that could not be evaluated.
    pub row_errors: usize,
}

/// Swept (path, value) pairs of one point and the config they produce.
pub type SweepPoint = (Vec<(String, f64)>, ScenarioConfig);

/// Cartesian product of the sweep axes, first axis slowest. Without axes the
/// base config is the single point.
pub fn sweep_points(cfg: &ScenarioConfig, axes: &[SweepAxis], seed: u64) -> Result<Vec<SweepPoint>> {
    let mut points = vec![(Vec::new(), cfg.clone())];
    for (i, axis) in axes.iter().enumerate() {
        let values = axis.values(seed.wrapping_add(i as u64))?;
        let mut next = Vec::with_capacity(points.len() * values.len());
        for (coords, c) in &points {
            for &v in &values {
                let mut coords = coords.clone();
                coords.push((axis.path.clone(), v));
                next.push((coords, c.with_value(&axis.path, v)?));
            }
        }
        points = next;
    }
    Ok(points)
}

/// Evaluate one row, first with strict guards to detect violations. In soft
/// mode a violating row is re-evaluated with warnings and annotated. The row
/// function may return notes, e.g. failed convergence gates.
fn evaluate<F>(cfg: &ScenarioConfig, strict: bool, f: &F) -> (Row, bool, bool)
where
    F: Fn(&Resolved) -> Result<(Row, Vec<String>)>,
{
    let mut resolved = match cfg.resolve() {
        Ok(r) => r,
        Err(e) => return (vec![("notes".into(), "".into()), ("guards".into(), "".into()), ("error".into(), e.to_string().into())], false, true),
    };
    let mut violated: Vec<String> =
        resolved.scenario.guard_statuses().into_iter().filter(|g| !g.passed).map(|g| g.name).collect();
    resolved.scenario.guard_mode = GuardMode::Strict;
    let attempt = if strict && !violated.is_empty() {
        Err(Error::Config(format!("static guards violated: {}", violated.join(", "))))
    } else {
        f(&resolved)
    };
    let result = match attempt {
        Err(Error::Guard { name, .. }) => {
            violated.push(name.to_string());
            if strict {
                Err(Error::Guard { name, value: f64::NAN, limit: f64::NAN })
            } else {
                resolved.scenario.guard_mode = GuardMode::Soft;
                f(&resolved)
            }
        }
        other => other,
    };
    let (mut row, notes, error) = match result {
        Ok((row, notes)) => (row, notes.join(";"), String::new()),
        Err(e) => (Vec::new(), String::new(), e.to_string()),
    };
    let guards = if violated.is_empty() { "ok".to_string() } else { violated.join(";") };
    let had_error = !error.is_empty();
    row.push(("notes".into(), notes.into()));
    row.push(("guards".into(), guards.into()));
    row.push(("error".into(), error.into()));
    (row, !violated.is_empty(), had_error)
}

fn run_rows<F>(cfg: &ScenarioConfig, axes: &[SweepAxis], opts: &RunOptions, f: F) -> Result<(Table, usize, usize)>
where
    F: Fn(usize, &Resolved) -> Result<(Row, Vec<String>)> + Sync,
{
    let points = sweep_points(cfg, axes, opts.seed)?;
    let rows: Vec<(Row, bool, bool)> = points
        .par_iter()
        .enumerate()
        .map(|(i, (coords, c))| {
            let (body, violated, failed) = evaluate(c, opts.strict, &|r: &Resolved| f(i, r));
            let mut row: Row = coords.iter().map(|(p, v)| (p.clone(), Cell::Num(*v))).collect();
            row.extend(body);
            (row, violated, failed)
        })
        .collect();
    let violations = rows.iter().filter(|r| r.1).count();
    let errors = rows.iter().filter(|r| r.2).count();
    let mut table = Table::from_rows(rows.into_iter().map(|r| r.0).collect());
    // Keep the annotation columns last even when the first row failed.
    for name in ["notes", "guards", "error"] {
        if let Some(i) = table.columns.iter().position(|c| c == name) {
            let col = table.columns.remove(i);
            table.columns.push(col);
            for row in &mut table.rows {
                let v = row.remove(i);
                row.push(v);
            }
        }
    }
    Ok((table, violations, errors))
}

fn si(scn: &Scenario, value: f64, kind: Dimension) -> f64 {
    scn.units.redimensionalize(value, kind)
}

/// Transfer probability g → e at a phase-space point from the exact
/// rotating-frame dynamics along the classical trajectory.
pub fn oracle_transfer(scn: &Scenario, z: f64, p: f64, t: f64) -> Result<f64> {
    Ok(match scn.laser.coupling {
        Coupling::Direct { .. } => ode_direct_classical(scn, z, p, t)?[(0, 1)].norm_sqr(),
        Coupling::Magnetic { .. } => ode_three_level_classical(scn, z, p, t)?[(1, 2)].norm_sqr(),
    })
}

/// Transfer probability g → e from the first-order Dyson propagator.
pub fn analytic_transfer(scn: &Scenario, z: f64, p: f64, t: f64) -> Result<f64> {
    Ok(propagate_heisenberg(scn, z, p, t)?.matrix[(0, 1)].norm_sqr())
}

fn transfer_columns(r: &Resolved, engine: Engine, row: &mut Row) -> Result<()> {
    let scn = &r.scenario;
    let (z, p) = r.ground_point();
    if engine.analytic() {
        row.push(("transfer_analytic".into(), analytic_transfer(scn, z, p, r.duration)?.into()));
    }
    if engine.oracle() {
        row.push(("transfer_oracle".into(), oracle_transfer(scn, z, p, r.duration)?.into()));
    }
    Ok(())
}

pub fn run_rabi(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<Outcome> {
    let axes = if cfg.sweep.is_empty() {
        vec![SweepAxis { path: "pulse.area_rad".into(), start: 0.0, stop: 2.0 * std::f64::consts::PI, count: 25, spacing: Default::default(), random: false }]
    } else {
        cfg.sweep.clone()
    };
    let (table, guard_violations, row_errors) = run_rows(cfg, &axes, opts, |_, r| {
        let scn = &r.scenario;
        let rabi = effective_parameters(scn)?.rabi;
        let (z, p) = r.ground_point();
        let mut row: Row = vec![
            ("pulse_area_rad".into(), (rabi.abs() * r.duration).into()),
            ("duration_s".into(), si(scn, r.duration, Dimension::Time).into()),
            ("laser_frequency_rad_per_s".into(), si(scn, scn.laser.frequency, Dimension::Frequency).into()),
            (
                "detuning_rad_per_s".into(),
                si(scn, heisenberg_detuning(scn, z, p, 0.0, DarkMatterEvaluation::Full)?, Dimension::Frequency).into(),
            ),
        ];
        transfer_columns(r, opts.engine, &mut row)?;
        Ok((row, Vec::new()))
    })?;
    let peak = table.column("transfer_oracle").or_else(|| table.column("transfer_analytic")).map(|col| {
        col.iter().filter_map(|c| c.as_f64()).fold(f64::NEG_INFINITY, f64::max)
    });
    Ok(Outcome { summary: json!({ "peak_transfer": peak }), table, guard_violations, row_errors })
}

/// Vertex of the parabola through the largest sample and its neighbours.
pub fn parabolic_peak(x: &[f64], y: &[f64]) -> Option<f64> {
    let (i, _) = y.iter().enumerate().filter(|(_, v)| v.is_finite()).max_by(|a, b| a.1.total_cmp(b.1))?;
    if i == 0 || i + 1 >= x.len() {
        return Some(x[i]);
    }
    let (x0, x1, x2) = (x[i - 1], x[i], x[i + 1]);
    let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
    let d = (x0 - x1) * (x0 - x2) * (x1 - x2);
    let a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / d;
    let b = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / d;
    if a >= 0.0 {
        return Some(x1);
    }
    Some(-b / (2.0 * a))
}

pub fn run_resonance_scan(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<Outcome> {
    let base = cfg.resolve()?;
    let scn = &base.scenario;
    let predicted = resonant_laser_frequency(scn, base.resonant_momentum)?;
    let rabi = effective_parameters(scn)?.rabi.abs();
    let axes = if cfg.sweep.is_empty() {
        let (lo, hi) = (predicted - 2.0 * rabi, predicted + 2.0 * rabi);
        vec![SweepAxis {
            path: "laser.frequency_rad_per_s".into(),
            start: si(scn, lo, Dimension::Frequency),
            stop: si(scn, hi, Dimension::Frequency),
            count: 41,
            spacing: Default::default(),
            random: false,
        }]
    } else {
        cfg.sweep.clone()
    };
    let (table, guard_violations, row_errors) = run_rows(cfg, &axes, opts, |_, r| {
        let scn = &r.scenario;
        let analytic = resonant_laser_frequency(scn, r.resonant_momentum)?;
        let (z, p) = r.ground_point();
        let mut row: Row = vec![
            ("laser_frequency_rad_per_s".into(), si(scn, scn.laser.frequency, Dimension::Frequency).into()),
            ("analytic_resonance_rad_per_s".into(), si(scn, analytic, Dimension::Frequency).into()),
        ];
        if opts.engine.analytic() {
            // Far from resonance the Dyson series does not apply; use the
            // constant-detuning Rabi formula at the initial detuning.
            let nu = heisenberg_detuning(scn, z, p, 0.0, DarkMatterEvaluation::Full)?;
            let rabi = effective_parameters(scn)?.rabi;
            row.push(("transfer_analytic".into(), generalized_rabi(nu, rabi, r.duration)[(0, 1)].norm_sqr().into()));
        }
        if opts.engine.oracle() {
            row.push(("transfer_oracle".into(), oracle_transfer(scn, z, p, r.duration)?.into()));
        }
        Ok((row, Vec::new()))
    })?;
    let column = |name: &str| table.column(name).map(|c| c.iter().map(|v| v.as_f64().unwrap_or(f64::NAN)).collect::<Vec<_>>());
    let freqs = column("laser_frequency_rad_per_s").unwrap_or_default();
    let peak = |name: &str| column(name).and_then(|y| parabolic_peak(&freqs, &y));
    let oracle_peak = peak("transfer_oracle");
    let stark = effective_parameters(scn)?.diff_stark;
    let predicted_si = si(scn, predicted, Dimension::Frequency);
    let rabi_si = si(scn, rabi, Dimension::Frequency);
    let summary = json!({
        "analytic_resonance_rad_per_s": predicted_si,
        "oracle_peak_rad_per_s": oracle_peak,
        "analytic_peak_rad_per_s": peak("transfer_analytic"),
        "oracle_offset_over_rabi": oracle_peak.map(|p| (p - predicted_si) / rabi_si),
        "stark_shift_rad_per_s": si(scn, stark, Dimension::Frequency),
    });
    Ok(Outcome { table, summary, guard_violations, row_errors })
}

fn with_channels(scn: &Scenario, channels: Channels) -> Scenario {
    Scenario { channels, ..scn.clone() }
}

fn phase_budget_row(i: usize, r: &Resolved, cfg: &ScenarioConfig, opts: &RunOptions) -> Result<(Row, Vec<String>)> {
    let scn = &r.scenario;
    let packet = &r.packet;
    let t = r.duration;
    let mut p = r.final_momentum();
    let mut row: Row = Vec::new();
    let mut notes = Vec::new();

    let grid = GridSpec::auto(scn, packet, t, cfg.engine.grid_points, cfg.engine.grid_steps)?;
    let runs = if opts.engine.oracle() {
        let runs = MirrorRuns::run(scn, packet, &grid, t)?;
        p = runs.peak_momentum();
        if let Some(dir) = &opts.snapshot_dir {
            std::fs::create_dir_all(dir)?;
            for (tag, res) in [("from_ground", &runs.from_ground), ("from_excited", &runs.from_excited)] {
                let snap = Snapshot { extent: res.grid.extent, components: vec![res.excited.clone(), res.ground.clone()] };
                snap.write(std::io::BufWriter::new(std::fs::File::create(dir.join(format!("phase-budget_{i}_{tag}.spdf")))?))?;
            }
        }
        Some(runs)
    } else {
        None
    };
    row.push(("momentum_kg_m_per_s".into(), si(scn, p, Dimension::Momentum).into()));

    let budget = mirror_phase_budget(packet, scn, p, t)?;
    for (name, value) in budget.lines() {
        row.push((name.into(), value.into()));
    }
    row.push(("chirp_perfect".into(), budget.chirp_perfect.into()));
    if opts.engine.analytic() {
        row.push(("wv_general".into(), wv_phase_general(packet, scn, p, t)?.into()));
        row.push(("wv_width_terms".into(), wv_width_terms(packet, scn, p, t).into()));
        row.push(("wv_md_ratio".into(), wv_md_ratio(scn, packet, p, t).unwrap_or(f64::NAN).into()));
        row.push(("propagator_phase".into(), unwrap_near(mirror_phase(scn, packet, p, t)?, budget.total).into()));
        let doubled = |f: fn(&mut Scenario)| -> Result<Scenario> {
            let mut s = scn.clone();
            f(&mut s);
            Ok(s)
        };
        let dm2 = mirror_phase_budget(packet, &doubled(|s| s.dilaton.amplitude *= 2.0)?, p, t)?.phi_dm;
        let ep2 = mirror_phase_budget(packet, &doubled(|s| s.dilaton.eep_coefficient *= 2.0)?, p, t)?.phi_ep;
        let ratio = |a: f64, b: f64| if b == 0.0 { f64::NAN } else { a / b };
        row.push(("dm_doubling_ratio".into(), ratio(dm2, budget.phi_dm).into()));
        row.push(("ep_doubling_ratio".into(), ratio(ep2, budget.phi_ep).into()));
    }
    if let Some(runs) = runs {
        let fine_grid = grid.refined();
        let fine = MirrorRuns::run(scn, packet, &fine_grid, t)?;
        match gate(runs.phase(scn, p), fine.phase(scn, p), cfg.engine.phase_tolerance_rad) {
            Ok(total) => row.push(("oracle_total".into(), unwrap_near(total, budget.total).into())),
            Err(e) => {
                notes.push(format!("total: {e}"));
                row.push(("oracle_total".into(), f64::NAN.into()));
            }
        }
        row.push(("oracle_weighted_total".into(), unwrap_near(fine.weighted_phase(scn), budget.total).into()));
        let reference = with_channels(scn, Channels::none());
        let base = (grid_mirror_phase(&reference, packet, &grid, t, p)?, grid_mirror_phase(&reference, packet, &fine_grid, t, p)?);
        let channels: [(&str, bool, Channels, f64); 4] = [
            ("dm", scn.channels.dark_matter, Channels { dark_matter: true, ..Channels::none() }, budget.phi_dm),
            ("ep", scn.channels.eep, Channels { eep: true, ..Channels::none() }, budget.phi_ep),
            ("md", scn.channels.mass_defect, Channels { mass_defect: true, ..Channels::none() }, budget.phi_md),
            ("wv", scn.channels.wave_vector, Channels { wave_vector: true, ..Channels::none() }, phi_wv_alone(scn, packet, p, t)?),
        ];
        for (name, on, channels, line) in channels {
            if !on {
                continue;
            }
            let perturbed = with_channels(scn, channels);
            let coarse = wrap(grid_mirror_phase(&perturbed, packet, &grid, t, p)? - base.0);
            let shift = wrap(grid_mirror_phase(&perturbed, packet, &fine_grid, t, p)? - base.1);
            row.push((format!("oracle_phi_{name}"), shift.into()));
            row.push((format!("deviation_{name}"), (shift / line - 1.0).into()));
            let tol = if line == 0.0 { cfg.engine.phase_tolerance_rad } else { cfg.engine.relative_tolerance * line.abs() };
            if let Err(e) = gate(coarse, shift, tol) {
                notes.push(format!("{name}: {e}"));
            }
        }
    }
    Ok((row, notes))
}

/// Wave-vector line as the closed form gives it with only that channel on.
fn phi_wv_alone(scn: &Scenario, packet: &crate::phases::GaussianWavePacket, p: f64, t: f64) -> Result<f64> {
    let s = with_channels(scn, Channels { wave_vector: true, ..Channels::none() });
    if crate::phases::is_chirp_perfect(&s) {
        phi_wv_perfect(&s, packet, p, t)
    } else {
        wv_phase_general(packet, &s, p, t)
    }
}

pub fn run_phase_budget(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<Outcome> {
    let (table, guard_violations, row_errors) = run_rows(cfg, &cfg.sweep, opts, |i, r| phase_budget_row(i, r, cfg, opts))?;
    let sum_identity = table
        .rows
        .iter()
        .filter_map(|row| {
            let get = |n: &str| table.columns.iter().position(|c| c == n).and_then(|i| row[i].as_f64());
            let lines = ["phi0", "phi_dm", "phi_ep", "phi_md", "phi_wv"].iter().map(|n| get(n)).sum::<Option<f64>>()?;
            Some((lines - get("total")?).abs())
        })
        .fold(0.0, f64::max);
    Ok(Outcome { table, summary: json!({ "max_sum_identity_error": sum_identity }), guard_violations, row_errors })
}

pub fn run_chirp_sweep(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<Outcome> {
    let base = cfg.resolve()?;
    let g_si = cfg.units.grav_accel_m_per_s2;
    let axes = if cfg.sweep.is_empty() {
        vec![SweepAxis { path: "laser.chirp_rate_m_per_s2".into(), start: -1.1 * g_si, stop: -0.9 * g_si, count: 21, spacing: Default::default(), random: false }]
    } else {
        cfg.sweep.clone()
    };
    let _ = base;
    let (table, guard_violations, row_errors) = run_rows(cfg, &axes, opts, |_, r| {
        let scn = &r.scenario;
        let packet = &r.packet;
        let t = r.duration;
        let p = r.final_momentum();
        let (z, pc) = r.ground_point();
        let poly = table1_coefficients(scn, z, pc)?;
        let tscale = scn.units.time_scale;
        let g_plus_alpha = scn.g() + scn.laser.chirp_rate;
        let general = wv_phase_general(packet, scn, p, t)?;
        let perfect = phi_wv_perfect(scn, packet, p, t)?;
        let row: Row = vec![
            ("chirp_rate_m_per_s2".into(), si(scn, scn.laser.chirp_rate, Dimension::Acceleration).into()),
            ("g_plus_alpha_m_per_s2".into(), si(scn, g_plus_alpha, Dimension::Acceleration).into()),
            ("chirp_perfect".into(), crate::phases::is_chirp_perfect(scn).into()),
            ("nu1_rad_per_s2".into(), (poly.det_coeffs[1] / tscale.powi(2)).into()),
            ("nu3_rad_per_s4".into(), (poly.det_coeffs[3] / tscale.powi(4)).into()),
            ("wv_width_terms".into(), wv_width_terms(packet, scn, p, t).into()),
            ("wv_general".into(), general.into()),
            ("wv_perfect_form".into(), perfect.into()),
            ("wv_difference".into(), (general - perfect).into()),
        ];
        Ok((row, Vec::new()))
    })?;
    let col = |n: &str| table.column(n).map(|c| c.iter().map(|v| v.as_f64().unwrap_or(f64::NAN)).collect::<Vec<_>>()).unwrap_or_default();
    let (x, y) = (col("g_plus_alpha_m_per_s2"), col("nu1_rad_per_s2"));
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let slope = sxy / sxx;
    let resid = x.iter().zip(&y).map(|(a, b)| (b - slope * a).powi(2)).sum::<f64>().sqrt();
    let norm = y.iter().map(|b| b * b).sum::<f64>().sqrt();
    let diff = col("wv_difference");
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].abs().total_cmp(&x[b].abs()));
    let monotone = |sign: f64| {
        let side: Vec<f64> = order.iter().filter(|&&i| x[i] * sign >= 0.0).map(|&i| diff[i].abs()).collect();
        side.windows(2).all(|w| w[1] >= w[0])
    };
    let summary = json!({
        "doppler_slope_rad_per_m": slope,
        "doppler_fit_relative_residual": if norm > 0.0 { resid / norm } else { 0.0 },
        "wv_difference_monotone": monotone(1.0) && monotone(-1.0),
    });
    Ok(Outcome { table, summary, guard_violations, row_errors })
}

pub fn run(experiment: Experiment, cfg: &ScenarioConfig, opts: &RunOptions) -> Result<Outcome> {
    match experiment {
        Experiment::Rabi => run_rabi(cfg, opts),
        Experiment::ResonanceScan => run_resonance_scan(cfg, opts),
        Experiment::PhaseBudget => run_phase_budget(cfg, opts),
        Experiment::ChirpSweep => run_chirp_sweep(cfg, opts),
    }
}
