//! Batch front end: config loading, sweeps, CSV tables and JSON sidecars.

pub mod config;
pub mod experiments;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::scenario::GuardMode;

pub use config::{Engine, ScenarioConfig};
pub use experiments::{Experiment, Outcome, RunOptions};
pub use output::{Sidecar, Table};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// Bad config, bad arguments or I/O failure.
    pub const USAGE: i32 = 1;
    /// Guards failed under `--strict`.
    pub const STRICT_GUARD: i32 = 2;
    /// Guards failed and soft mode was not explicitly requested.
    pub const GUARD_VIOLATION: i32 = 3;
    /// Some rows could not be evaluated.
    pub const ROW_ERRORS: i32 = 4;
}

#[derive(Debug, Parser)]
#[command(name = "spdiff", version, about = "Single-photon atom diffraction experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Transfer probability against pulse area or detuning.
    Rabi(RunArgs),
    /// Transfer maximum against laser frequency.
    ResonanceScan(RunArgs),
    /// Mirror phase budget with oracle comparison.
    PhaseBudget(RunArgs),
    /// Wave-vector phase and detuning coefficients around α = −g.
    ChirpSweep(RunArgs),
    /// Resolve a config and print it with its guard statuses.
    ValidateConfig {
        config: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML scenario, or a JSON sidecar from an earlier run.
    pub config: PathBuf,
    /// Turn guard violations into row errors.
    #[arg(long, conflicts_with = "soft")]
    pub strict: bool,
    /// Accept guard violations (annotated) with exit code 0.
    #[arg(long)]
    pub soft: bool,
    #[arg(long, value_enum)]
    pub engine: Option<Engine>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Seed for random sweep axes. Defaults to the sidecar seed, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write `<command>.baseline.csv` and grid snapshots under the output directory.
    #[arg(long)]
    pub snapshot: bool,
}

/// Effective settings for one run after merging flags into the config.
pub fn prepare(args: &RunArgs) -> Result<(ScenarioConfig, RunOptions, bool)> {
    let (mut cfg, sidecar_seed) = ScenarioConfig::load(&args.config)?;
    if let Some(engine) = args.engine {
        cfg.engine.kind = engine;
    }
    if args.strict {
        cfg.guard_mode = Some(GuardMode::Strict);
    } else if args.soft {
        cfg.guard_mode = Some(GuardMode::Soft);
    }
    let explicit_soft = cfg.guard_mode == Some(GuardMode::Soft);
    let opts = RunOptions {
        seed: args.seed.or(sidecar_seed).unwrap_or(0),
        engine: cfg.engine.kind,
        strict: cfg.guard_mode == Some(GuardMode::Strict),
        snapshot_dir: args.snapshot.then(|| args.out_dir.join("snapshots")),
    };
    Ok((cfg, opts, explicit_soft))
}

/// Runs one experiment, writes its table and sidecar, returns the exit code.
pub fn run_experiment(experiment: Experiment, args: &RunArgs) -> Result<i32> {
    let (cfg, opts, explicit_soft) = prepare(args)?;
    let outcome = experiments::run(experiment, &cfg, &opts)?;
    let guards = cfg.resolve()?.scenario.guard_statuses();
    let sidecar = Sidecar {
        command: experiment.name(),
        config: &cfg,
        seed: opts.seed,
        strict: opts.strict,
        engine_versions: Default::default(),
        guards,
        rows: outcome.table.rows.len(),
        row_errors: outcome.row_errors,
        summary: outcome.summary.clone(),
    };
    let written = output::write_outputs(&args.out_dir, experiment.name(), &outcome.table, &sidecar)?;
    if args.snapshot {
        std::fs::copy(&written.table, args.out_dir.join(format!("{}.baseline.csv", experiment.name())))?;
    }
    log::info!("wrote {} and {}", written.table.display(), written.sidecar.display());
    Ok(exit_code(&outcome, opts.strict, explicit_soft))
}

pub fn exit_code(outcome: &Outcome, strict: bool, explicit_soft: bool) -> i32 {
    if outcome.guard_violations > 0 && strict {
        exit::STRICT_GUARD
    } else if outcome.guard_violations > 0 && !explicit_soft {
        exit::GUARD_VIOLATION
    } else if outcome.row_errors > 0 {
        exit::ROW_ERRORS
    } else {
        exit::OK
    }
}

pub fn validate_config(path: &std::path::Path) -> Result<(String, bool)> {
    let (cfg, _) = ScenarioConfig::load(path)?;
    let resolved = cfg.resolve()?;
    let guards = resolved.scenario.guard_statuses();
    let passed = guards.iter().all(|g| g.passed);
    let report = serde_json::json!({
        "config": cfg,
        "internal": {
            "mass": resolved.scenario.species.mass,
            "transition_frequency": resolved.scenario.species.transition_frequency,
            "laser_frequency": resolved.scenario.laser.frequency,
            "wavenumber": resolved.scenario.laser.wavenumber,
            "chirp_rate": resolved.scenario.laser.chirp_rate,
            "c": resolved.scenario.c(),
            "g": resolved.scenario.g(),
            "duration": resolved.duration,
            "packet": resolved.packet,
        },
        "guards": guards,
    });
    Ok((serde_json::to_string_pretty(&report)?, passed))
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::USAGE } else { exit::OK };
        }
    };
    if let Some(n) = std::env::var("SPDIFF_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        // Fails only if a pool was already built, which is harmless here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let result = match &cli.command {
        Command::Rabi(a) => run_experiment(Experiment::Rabi, a),
        Command::ResonanceScan(a) => run_experiment(Experiment::ResonanceScan, a),
        Command::PhaseBudget(a) => run_experiment(Experiment::PhaseBudget, a),
        Command::ChirpSweep(a) => run_experiment(Experiment::ChirpSweep, a),
        Command::ValidateConfig { config } => validate_config(config).map(|(report, passed)| {
            println!("{report}");
            if passed {
                exit::OK
            } else {
                exit::GUARD_VIOLATION
            }
        }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Guard { .. } => exit::STRICT_GUARD,
                _ => exit::USAGE,
            }
        }
    }
}
