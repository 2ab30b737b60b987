//! `ising-qoc`: run sweep, optimization and transfer experiments from a TOML
//! configuration and write plot-ready CSV.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ising_qoc::experiments::{run, ExperimentConfig, ExperimentError, ExperimentKind};
use ising_qoc::sweep::Execution;

#[derive(Debug, Parser)]
#[command(
    name = "ising-qoc",
    version,
    about = "Irreversibility of driven transverse-field Ising rings"
)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    /// TOML configuration; built-in defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// CSV destination; a `<out>.meta.json` sidecar is written next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Directory for per-point pulse files.
    #[arg(long, global = true)]
    pulse_dir: Option<PathBuf>,
    /// Run sweep points one after another on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Debug, Clone, Subcommand)]
enum Verb {
    /// Sudden quench at every f0 of the sweep.
    SweepQuench,
    /// Linear ramp at every f0 of the sweep.
    SweepRamp,
    /// Quench, ramp and dCRAB-optimized protocol at every f0.
    SweepOptimize,
    /// Per-evaluation optimizer trace at f0_start.
    Trace,
    /// Apply stored pulses to the configured ring size.
    Transfer {
        /// Pulse file or directory of pulse files; repeatable.
        #[arg(long = "pulse", required = false)]
        pulses: Vec<PathBuf>,
    },
    /// Average work of quench and optimized protocol.
    WorkCompare,
    /// Step-doubling error of the linear-ramp propagation.
    Convergence,
}

fn configure(cli: &Cli) -> Result<ExperimentConfig, ExperimentError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    cfg.experiment = match &cli.verb {
        Verb::SweepQuench => ExperimentKind::QuenchSweep,
        Verb::SweepRamp => ExperimentKind::RampSweep,
        Verb::SweepOptimize => ExperimentKind::OptimizeSweep,
        Verb::Trace => ExperimentKind::ConvergenceTrace,
        Verb::Transfer { .. } => ExperimentKind::Transfer,
        Verb::WorkCompare => ExperimentKind::WorkCompare,
        Verb::Convergence => ExperimentKind::Convergence,
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output = Some(out.clone());
    }
    if let Some(dir) = &cli.pulse_dir {
        cfg.pulse_dir = Some(dir.clone());
    }
    if let Verb::Transfer { pulses } = &cli.verb {
        if !pulses.is_empty() {
            cfg.pulses = pulses.clone();
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<(), ExperimentError> {
    let cfg = configure(cli)?;
    let execution = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::available()
    };
    let output = run(&cfg, execution)?;
    output.write(cfg.output.as_deref(), cfg.pulse_dir.as_deref())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
