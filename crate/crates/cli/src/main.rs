//! Command-line front end: scenario runs, parameter sweeps, sharp-constant
//! estimation, and empirical linear-estimate checks.

mod config;
mod output;
mod runner;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ScenarioConfig, SweepConfig};
use runner::CliError;

#[derive(Parser)]
#[command(name = "kdv", about = "Damped KdV simulator and diagnostics", version)]
struct Cli {
    /// Redirect all file output under this directory (configs are echoed
    /// with their original output_dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Replace the seed of random initial data; ignored for deterministic
    /// data kinds.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Suppress progress messages on stderr (sweep size is still reported).
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a single scenario from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a cartesian parameter sweep from a JSON config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Estimate the sharp constant of the cubic interpolation bound.
    K0 {
        #[arg(long = "grid-n", default_value_t = 512)]
        grid_n: usize,
        #[arg(long = "box", default_value_t = 80.0)]
        box_length: f64,
        #[arg(long, default_value_t = 2)]
        restarts: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Measure empirical constants of the free-evolution smoothing bounds
    /// over a battery of initial data (JSON array of data specs).
    EstimateC1 {
        #[arg(long = "T")]
        t_horizon: f64,
        #[arg(long)]
        battery: PathBuf,
        #[arg(long = "grid-n", default_value_t = 512)]
        grid_n: usize,
        #[arg(long = "box", default_value_t = 80.0)]
        box_length: f64,
        #[arg(long = "time-samples", default_value_t = 257)]
        time_samples: usize,
    },
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.cmd {
        Cmd::Run { config } => {
            let mut cfg: ScenarioConfig = read_json(config)?;
            if cli.seed.is_some() {
                let randomized =
                    matches!(cfg.initial_data, kdv_core::InitialDataSpec::RandomH1 { .. });
                runner::apply_seed_override(&mut cfg, cli.seed);
                if !cli.quiet && !randomized {
                    eprintln!("note: --seed has no effect on deterministic initial data");
                }
            }
            let out_dir = cli
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
            run_scenario_checked(&cfg, &out_dir, cli.quiet)
        }
        Cmd::Sweep { config } => {
            let mut cfg: SweepConfig = read_json(config)?;
            runner::apply_seed_override(&mut cfg.base, cli.seed);
            let out_root = cli
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from(&cfg.base.output_dir));
            runner::run_sweep(&cfg, &out_root, cli.quiet)
        }
        Cmd::K0 {
            grid_n,
            box_length,
            restarts,
            tol,
        } => runner::run_k0(
            *grid_n,
            *box_length,
            *restarts,
            *tol,
            cli.out.as_ref(),
            cli.quiet,
        ),
        Cmd::EstimateC1 {
            t_horizon,
            battery,
            grid_n,
            box_length,
            time_samples,
        } => runner::run_estimate_c1(
            *t_horizon,
            battery,
            *grid_n,
            *box_length,
            *time_samples,
            cli.out.as_ref(),
            cli.quiet,
        ),
    }
}

fn run_scenario_checked(cfg: &ScenarioConfig, out_dir: &Path, quiet: bool) -> Result<(), CliError> {
    match runner::run_scenario(cfg, out_dir, quiet) {
        (_, None) => Ok(()),
        (_, Some(e)) => Err(e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
