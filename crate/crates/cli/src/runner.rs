//! Scenario and sweep execution with the exit-code contract:
//! 0 success, 1 I/O failure, 2 config error, 3 blow-up, 4 analysis
//! precondition unmet or non-convergence.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use kdv_core::{
    construct_supercritical, dissipation_residual, estimate_k0, fit_decay, hamiltonian_residual,
    kpv_norms, make_damping, make_grid, observability_ratio, picard_solve, realize, simulate,
    t_kappa, vitillaro_experiment, ContractionReport, DampingKind, DampingProfile, DecayFit, Field,
    Grid, InitialDataSpec, KdvError, KpvNorms, TimeSeries, VitillaroReport,
};

use crate::config::{AnalysisSpec, DampingConfig, ScenarioConfig, SweepConfig};
use crate::output::{fmt_num, write_energy_csv, write_field_csv, write_json, CsvWriter};

#[derive(Debug)]
pub enum CliError {
    Io(String),
    Config(String),
    Blowup(String),
    Analysis(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Blowup(_) => 3,
            CliError::Analysis(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(m) => write!(f, "I/O error: {m}"),
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Blowup(m) => write!(f, "blow-up: {m}"),
            CliError::Analysis(m) => write!(f, "analysis error: {m}"),
        }
    }
}

fn map_core(e: KdvError) -> CliError {
    match e {
        KdvError::Blowup { t_last, .. } => {
            CliError::Blowup(format!("solution left the finite range after t = {t_last}"))
        }
        KdvError::NonConvergence { .. } | KdvError::PreconditionUnmet(_) => {
            CliError::Analysis(e.to_string())
        }
        KdvError::InvalidParameter(_) | KdvError::GridMismatch(_) => {
            CliError::Config(e.to_string())
        }
    }
}

fn map_io(e: std::io::Error) -> CliError {
    CliError::Io(e.to_string())
}

pub fn build_damping(cfg: &DampingConfig, grid: &Grid) -> Result<DampingProfile, KdvError> {
    match *cfg {
        DampingConfig::Zero => Ok(DampingProfile::zero(grid)),
        DampingConfig::Constant { alpha0 } => {
            make_damping(grid, DampingKind::Constant, alpha0, 0.0, 0.0)
        }
        DampingConfig::RightStep { alpha0, r1, width } => {
            make_damping(grid, DampingKind::RightStep, alpha0, r1, width)
        }
        DampingConfig::LeftStep { alpha0, r1, width } => {
            make_damping(grid, DampingKind::LeftStep, alpha0, r1, width)
        }
        DampingConfig::Sponge { alpha0, r1, width } => {
            make_damping(grid, DampingKind::Sponge, alpha0, r1, width)
        }
    }
}

#[derive(Serialize)]
struct BlowupInfo {
    t_last: f64,
}

#[derive(Serialize)]
struct PicardOut {
    iterations: usize,
    distances: Vec<f64>,
    kpv: KpvNorms,
    contraction: ContractionReport,
}

#[derive(Default, Serialize)]
struct AnalysisOut {
    scenario_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    blowup: Option<BlowupInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dissipation_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hamiltonian_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    decay_fit: Option<Vec<DecayFit>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    observability: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    vitillaro: Option<VitillaroReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    picard: Option<PicardOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

/// Summary row for one scenario; blank entries mean the quantity was not
/// produced (analysis absent or the run failed).
#[derive(Clone, Debug)]
pub struct ScenarioOutcome {
    pub scenario_id: String,
    pub status: String,
    pub omega: Option<f64>,
    pub rms_residual: Option<f64>,
    pub observability: Option<f64>,
    pub vitillaro_verdict: Option<bool>,
}

impl ScenarioOutcome {
    fn failed(id: &str, err: &CliError) -> Self {
        let status = match err {
            CliError::Io(_) => "io_error",
            CliError::Config(_) => "config_error",
            CliError::Blowup(_) => "blowup",
            CliError::Analysis(_) => "analysis_error",
        };
        ScenarioOutcome {
            scenario_id: id.to_string(),
            status: status.to_string(),
            omega: None,
            rms_residual: None,
            observability: None,
            vitillaro_verdict: None,
        }
    }
}

/// Applies `--seed` to random initial data; other kinds are unaffected.
pub fn apply_seed_override(cfg: &mut ScenarioConfig, seed: Option<u64>) {
    if let (Some(s), InitialDataSpec::RandomH1 { seed, .. }) = (seed, &mut cfg.initial_data) {
        *seed = s;
    }
}

/// Runs one scenario: simulate, write artifacts, run requested analyses.
///
/// The outcome row is always produced; the error (if any) decides the exit
/// code. Config errors surface before any file is created; blow-ups retain
/// the partial records.
pub fn run_scenario(
    cfg: &ScenarioConfig,
    out_dir: &Path,
    quiet: bool,
) -> (ScenarioOutcome, Option<CliError>) {
    match run_scenario_inner(cfg, out_dir, quiet) {
        Ok(outcome) => (outcome, None),
        Err(e) => (ScenarioOutcome::failed(&cfg.scenario_id, &e), Some(e)),
    }
}

fn run_scenario_inner(
    cfg: &ScenarioConfig,
    out_dir: &Path,
    quiet: bool,
) -> Result<ScenarioOutcome, CliError> {
    if cfg.scenario_id.is_empty() {
        return Err(CliError::Config("scenario_id must be non-empty".into()));
    }
    let grid = make_grid(cfg.grid.box_length, cfg.grid.n).map_err(map_core)?;
    let u0 = realize(&cfg.initial_data, &grid).map_err(map_core)?;
    let a = build_damping(&cfg.damping, &grid).map_err(map_core)?;

    if !quiet {
        eprintln!("running {}", cfg.scenario_id);
    }
    let sim = simulate(&u0, &a, &cfg.solver);

    let mut analysis = AnalysisOut {
        scenario_id: cfg.scenario_id.clone(),
        ..AnalysisOut::default()
    };

    let (series, run_error): (TimeSeries, Option<CliError>) = match sim {
        Ok(series) => (series, None),
        Err(KdvError::Blowup { t_last, partial }) => {
            let partial = partial.ok_or_else(|| {
                CliError::Blowup(format!("blow-up at t = {t_last}, no partial records"))
            })?;
            analysis.blowup = Some(BlowupInfo { t_last });
            (
                *partial,
                Some(CliError::Blowup(format!(
                    "solution left the finite range after t = {t_last}"
                ))),
            )
        }
        Err(e) => return Err(map_core(e)),
    };

    fs::create_dir_all(out_dir).map_err(map_io)?;
    write_energy_csv(&out_dir.join("energy.csv"), &series.records).map_err(map_io)?;
    for (i, (t, field)) in series.snapshots.iter().enumerate() {
        write_field_csv(&out_dir.join(format!("snapshot_{i:03}.csv")), *t, field)
            .map_err(map_io)?;
    }
    write_json(&out_dir.join("config_echo.json"), cfg).map_err(map_io)?;

    let mut outcome = ScenarioOutcome {
        scenario_id: cfg.scenario_id.clone(),
        status: if run_error.is_some() { "blowup" } else { "ok" }.to_string(),
        omega: None,
        rms_residual: None,
        observability: None,
        vitillaro_verdict: None,
    };

    let analysis_error = if run_error.is_none() {
        run_analyses(
            cfg,
            &grid,
            &u0,
            &a,
            &series,
            &mut analysis,
            &mut outcome,
            quiet,
        )
        .err()
    } else {
        None
    };
    if let Some(err) = &analysis_error {
        analysis.error = Some(err.to_string());
        outcome.status = ScenarioOutcome::failed("", err).status;
    }
    write_json(&out_dir.join("analysis.json"), &analysis).map_err(map_io)?;

    if !quiet {
        eprintln!("done {}: {}", cfg.scenario_id, outcome.status);
    }
    match run_error.or(analysis_error) {
        Some(e) => Err(e),
        None => Ok(outcome),
    }
}

#[allow(clippy::too_many_arguments)]
fn run_analyses(
    cfg: &ScenarioConfig,
    grid: &Grid,
    u0: &Field,
    a: &DampingProfile,
    series: &TimeSeries,
    analysis: &mut AnalysisOut,
    outcome: &mut ScenarioOutcome,
    quiet: bool,
) -> Result<(), CliError> {
    analysis.dissipation_residual = Some(dissipation_residual(&series.records).map_err(map_core)?);
    analysis.hamiltonian_residual = Some(hamiltonian_residual(&series.records).map_err(map_core)?);

    for spec in &cfg.analyses {
        match spec {
            AnalysisSpec::DecayFit { windows } => {
                let mut fits = Vec::with_capacity(windows.len());
                for &window in windows {
                    fits.push(fit_decay(&series.records, window).map_err(map_core)?);
                }
                if let Some(first) = fits.first() {
                    outcome.omega = Some(first.omega);
                    outcome.rms_residual = Some(first.rms_residual);
                }
                analysis.decay_fit = Some(fits);
            }
            AnalysisSpec::Observability { r1, t_upper, t0 } => {
                let ratio = observability_ratio(&series.records, a, *r1, *t_upper, *t0)
                    .map_err(map_core)?;
                outcome.observability = Some(ratio);
                analysis.observability = Some(ratio);
            }
            AnalysisSpec::Vitillaro {
                mu,
                supercritical_margin,
                restarts,
            } => {
                if !quiet {
                    eprintln!("estimating well constants for {}", cfg.scenario_id);
                }
                let consts = estimate_k0(grid, restarts.unwrap_or(2), 1e-10).map_err(map_core)?;
                let data = match supercritical_margin {
                    Some(margin) => {
                        construct_supercritical(grid, &consts, *margin).map_err(map_core)?
                    }
                    None => u0.clone(),
                };
                let report =
                    vitillaro_experiment(&data, *mu, &cfg.solver, &consts).map_err(map_core)?;
                outcome.vitillaro_verdict = Some(report.verdict);
                analysis.vitillaro = Some(report);
            }
            AnalysisSpec::Picard {
                t_horizon,
                tol,
                c1,
                n_t,
            } => {
                let (traj, distances) =
                    picard_solve(u0, a, *t_horizon, *n_t, *tol, 50).map_err(map_core)?;
                let contraction =
                    t_kappa(u0.norms().h1_sq.sqrt(), a.w2inf_norm(), *c1).map_err(map_core)?;
                analysis.picard = Some(PicardOut {
                    iterations: distances.len(),
                    distances,
                    kpv: kpv_norms(&traj),
                    contraction,
                });
            }
        }
    }
    Ok(())
}

/// Axis names accepted by sweeps and how they edit the base scenario.
fn apply_axis(cfg: &mut ScenarioConfig, name: &str, value: f64) -> Result<(), CliError> {
    match name {
        "mu" => match &mut cfg.damping {
            DampingConfig::Constant { alpha0 } => {
                *alpha0 = value;
                Ok(())
            }
            _ => Err(CliError::Config(
                "axis `mu` requires constant damping in the base scenario".into(),
            )),
        },
        "alpha0" => match &mut cfg.damping {
            DampingConfig::Constant { alpha0 }
            | DampingConfig::RightStep { alpha0, .. }
            | DampingConfig::LeftStep { alpha0, .. }
            | DampingConfig::Sponge { alpha0, .. } => {
                *alpha0 = value;
                Ok(())
            }
            DampingConfig::Zero => Err(CliError::Config(
                "axis `alpha0` requires a non-zero damping kind in the base scenario".into(),
            )),
        },
        "seed" => match &mut cfg.initial_data {
            InitialDataSpec::RandomH1 { seed, .. } => {
                if value < 0.0 || value.fract() != 0.0 || value > u64::MAX as f64 {
                    return Err(CliError::Config(format!(
                        "axis `seed` values must be non-negative integers, got {value}"
                    )));
                }
                *seed = value as u64;
                Ok(())
            }
            _ => Err(CliError::Config(
                "axis `seed` requires random_h1 initial data in the base scenario".into(),
            )),
        },
        "target_h1" => match &mut cfg.initial_data {
            InitialDataSpec::RandomH1 { target_h1, .. } => {
                *target_h1 = value;
                Ok(())
            }
            _ => Err(CliError::Config(
                "axis `target_h1` requires random_h1 initial data in the base scenario".into(),
            )),
        },
        other => Err(CliError::Config(format!(
            "unknown sweep axis `{other}` (expected mu, alpha0, seed, or target_h1)"
        ))),
    }
}

fn axis_value_label(name: &str, value: f64) -> String {
    if name == "seed" {
        format!("{}", value as u64)
    } else {
        format!("{value}")
    }
}

/// Expands the cartesian product into per-scenario configs, first axis
/// slowest, preserving the order values were given in.
fn expand_sweep(cfg: &SweepConfig) -> Result<Vec<(Vec<f64>, ScenarioConfig)>, CliError> {
    for axis in &cfg.axes {
        if axis.values.is_empty() {
            return Err(CliError::Config(format!(
                "axis `{}` has no values",
                axis.name
            )));
        }
    }
    let size = cfg.axes.iter().map(|a| a.values.len()).product::<usize>();
    if size > cfg.max_runs {
        return Err(CliError::Config(format!(
            "sweep size {size} exceeds max_runs {}",
            cfg.max_runs
        )));
    }
    let mut combos: Vec<Vec<f64>> = vec![vec![]];
    for axis in &cfg.axes {
        let mut next = Vec::with_capacity(combos.len() * axis.values.len());
        for combo in &combos {
            for &v in &axis.values {
                let mut c = combo.clone();
                c.push(v);
                next.push(c);
            }
        }
        combos = next;
    }
    let mut scenarios = Vec::with_capacity(combos.len());
    for combo in combos {
        let mut sc = cfg.base.clone();
        for (axis, &v) in cfg.axes.iter().zip(&combo) {
            apply_axis(&mut sc, &axis.name, v)?;
            sc.scenario_id = format!(
                "{}__{}{}",
                sc.scenario_id,
                axis.name,
                axis_value_label(&axis.name, v)
            );
        }
        sc.output_dir = format!("{}/{}", cfg.base.output_dir, sc.scenario_id);
        scenarios.push((combo, sc));
    }
    Ok(scenarios)
}

/// Runs the whole sweep and writes `summary.csv` at the output root. Scenario
/// failures become rows, not sweep failures; row order is the cartesian
/// order regardless of completion order.
pub fn run_sweep(cfg: &SweepConfig, out_root: &Path, quiet: bool) -> Result<(), CliError> {
    let scenarios = expand_sweep(cfg)?;
    eprintln!(
        "sweep: {} scenario(s) across {} axis/axes, parallelism {}",
        scenarios.len(),
        cfg.axes.len(),
        cfg.parallelism.max(1)
    );
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism.max(1))
        .build()
        .map_err(|e| CliError::Io(e.to_string()))?;
    let results: Vec<ScenarioOutcome> = pool.install(|| {
        scenarios
            .par_iter()
            .map(|(_, sc)| run_scenario(sc, &out_root.join(&sc.scenario_id), quiet).0)
            .collect()
    });

    fs::create_dir_all(out_root).map_err(map_io)?;
    let axis_names: Vec<&str> = cfg.axes.iter().map(|a| a.name.as_str()).collect();
    let header = {
        let mut cols = vec!["scenario_id".to_string()];
        cols.extend(axis_names.iter().map(|s| s.to_string()));
        cols.extend(
            [
                "status",
                "omega",
                "rms_residual",
                "observability",
                "vitillaro_verdict",
            ]
            .iter()
            .map(|s| s.to_string()),
        );
        cols.join(",")
    };
    let mut writer = CsvWriter::create(&out_root.join("summary.csv"), &header).map_err(map_io)?;
    for ((combo, _), outcome) in scenarios.iter().zip(&results) {
        let mut cells = vec![outcome.scenario_id.clone()];
        for (axis, &v) in cfg.axes.iter().zip(combo) {
            cells.push(if axis.name == "seed" {
                format!("{}", v as u64)
            } else {
                fmt_num(v)
            });
        }
        cells.push(outcome.status.clone());
        for v in [outcome.omega, outcome.rms_residual, outcome.observability] {
            cells.push(v.map(fmt_num).unwrap_or_default());
        }
        cells.push(
            outcome
                .vitillaro_verdict
                .map(|b| b.to_string())
                .unwrap_or_default(),
        );
        writer.row(&cells).map_err(map_io)?;
    }
    Ok(())
}

/// `k0` subcommand: estimate the sharp constant and optionally write the
/// report and maximizer profile.
pub fn run_k0(
    grid_n: usize,
    box_length: f64,
    restarts: usize,
    tol: f64,
    out: Option<&PathBuf>,
    quiet: bool,
) -> Result<(), CliError> {
    let grid = make_grid(box_length, grid_n).map_err(map_core)?;
    if !quiet {
        eprintln!("estimating k0 on n = {grid_n}, box = {box_length}, restarts = {restarts}");
    }
    let consts = estimate_k0(&grid, restarts, tol).map_err(map_core)?;
    println!(
        "k0 = {:.12}\nxi1 = {:.12}\nd = {:.12}\nedge_tail = {:.3e}",
        consts.k0, consts.xi1, consts.d, consts.edge_tail
    );
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(map_io)?;
        write_json(&dir.join("k0.json"), &consts).map_err(map_io)?;
        write_field_csv(&dir.join("maximizer.csv"), 0.0, &consts.maximizer).map_err(map_io)?;
    }
    Ok(())
}

/// `estimate-c1` subcommand: empirical worst ratios of the linear smoothing
/// estimates over a JSON battery of initial data specs.
pub fn run_estimate_c1(
    t_horizon: f64,
    battery_path: &Path,
    grid_n: usize,
    box_length: f64,
    time_samples: usize,
    out: Option<&PathBuf>,
    quiet: bool,
) -> Result<(), CliError> {
    let text = fs::read_to_string(battery_path).map_err(map_io)?;
    let battery: Vec<InitialDataSpec> =
        serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
    let grid = make_grid(box_length, grid_n).map_err(map_core)?;
    if !quiet {
        eprintln!(
            "checking linear estimates: {} field(s), T = {t_horizon}, {time_samples} time samples",
            battery.len()
        );
    }
    let report = kdv_core::verify_linear_estimates(&grid, t_horizon, &battery, time_samples)
        .map_err(map_core)?;
    println!(
        "gamma_ratios = [{:.6}, {:.6}, {:.6}]\nc1_empirical = {:.6}",
        report.gamma_ratios[0], report.gamma_ratios[1], report.gamma_ratios[2], report.c1_empirical
    );
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(map_io)?;
        write_json(&dir.join("c1_report.json"), &report).map_err(map_io)?;
    }
    Ok(())
}
