//! `simulate`: analytic and Monte Carlo co-inclusion side by side.

use std::path::PathBuf;

use serde::Serialize;
use serde_json::json;

use sandwich_core::seq::{
    co_inclusion, reference, simulate_co_inclusion, AttackerStrategy, CoInclusionReport,
    SequencerConfig,
};

use crate::error::{CliError, CliResult};
use crate::report::{Input, Outputs, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    CentralFcfs,
    CentralPga,
}

#[derive(Debug, Clone, clap::Args)]
pub struct SimulateArgs {
    /// Sequencer configuration JSON.
    #[arg(long, required_unless_present = "preset")]
    pub config: Option<PathBuf>,
    /// Attacker strategy JSON.
    #[arg(long, required_unless_present = "preset")]
    pub strategy: Option<PathBuf>,
    /// Built-in configuration instead of --config/--strategy.
    #[arg(long, value_enum, conflicts_with_all = ["config", "strategy"])]
    pub preset: Option<Preset>,
    /// Batch window for --preset, in seconds.
    #[arg(long, default_value_t = 0.5)]
    pub batch_window: f64,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Agreement threshold in Monte Carlo standard errors.
    #[arg(long, default_value_t = 3.0)]
    pub tolerance: f64,
    /// Sweep the batch window over 0.30..=0.80 s in 0.05 s steps and emit a CSV.
    #[arg(long)]
    pub sweep: bool,
    /// Directory for report.json (and sweep.csv); without it the primary
    /// output goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub analytic: CoInclusionReport,
    pub monte_carlo: CoInclusionReport,
    pub difference: f64,
    /// `|difference|` in Monte Carlo standard errors; absent when the
    /// estimate has zero variance.
    pub standard_errors: Option<f64>,
    pub agrees: bool,
}

fn compare(
    strategy: &AttackerStrategy,
    config: &SequencerConfig,
    trials: u64,
    seed: u64,
    tolerance: f64,
) -> CliResult<Comparison> {
    let analytic = co_inclusion(strategy, config)?;
    let monte_carlo = simulate_co_inclusion(strategy, config, trials, seed)?;
    let difference = monte_carlo.p_co_inclusion - analytic.p_co_inclusion;
    let se = monte_carlo.std_error.unwrap_or(0.0);
    let standard_errors = (se > 0.0).then(|| difference.abs() / se);
    let agrees = match standard_errors {
        Some(z) => z <= tolerance,
        None => difference.abs() <= 1e-12,
    };
    Ok(Comparison {
        analytic,
        monte_carlo,
        difference,
        standard_errors,
        agrees,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub batch_window: f64,
    pub comparison: Comparison,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateResult {
    pub comparison: Comparison,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepPoint>,
}

/// Batch windows 0.30, 0.35, ..., 0.80, built from integers to avoid drift.
pub fn sweep_windows() -> Vec<f64> {
    (30..=80).step_by(5).map(|c| c as f64 / 100.0).collect()
}

fn sweep_csv(points: &[SweepPoint]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = [
        "batch_window",
        "policy",
        "p_batch",
        "p_priority",
        "p_arrival",
        "p_co_inclusion",
        "mc_p_co_inclusion",
        "mc_std_error",
        "agrees",
    ];
    w.write_record(header).map_err(CliError::runtime)?;
    for p in points {
        let (a, m) = (&p.comparison.analytic, &p.comparison.monte_carlo);
        w.write_record([
            p.batch_window.to_string(),
            a.policy.to_string(),
            a.p_batch.to_string(),
            a.p_priority.to_string(),
            a.p_arrival.to_string(),
            a.p_co_inclusion.to_string(),
            m.p_co_inclusion.to_string(),
            m.std_error.map(|s| s.to_string()).unwrap_or_default(),
            p.comparison.agrees.to_string(),
        ])
        .map_err(CliError::runtime)?;
    }
    let bytes = w.into_inner().map_err(CliError::runtime)?;
    String::from_utf8(bytes).map_err(CliError::runtime)
}

pub fn run(args: &SimulateArgs) -> CliResult<Outputs> {
    if !(args.tolerance.is_finite() && args.tolerance > 0.0) {
        return Err(CliError::validation(format!(
            "--tolerance must be positive, got {}",
            args.tolerance
        )));
    }
    if args.trials == 0 {
        return Err(CliError::validation("--trials must be at least 1"));
    }
    let mut inputs = Vec::new();
    let (config, strategy) = match args.preset {
        Some(Preset::CentralFcfs) => reference::central_fcfs(args.batch_window),
        Some(Preset::CentralPga) => reference::central_pga(args.batch_window),
        None => {
            let (Some(config_path), Some(strategy_path)) = (&args.config, &args.strategy) else {
                return Err(CliError::validation("--config and --strategy are required without --preset"));
            };
            let config_file = Input::read("config", config_path)?;
            let strategy_file = Input::read("strategy", strategy_path)?;
            let parsed = (config_file.json()?, strategy_file.json()?);
            inputs.push(config_file);
            inputs.push(strategy_file);
            parsed
        }
    };
    config.validate().map_err(|e| CliError::from(e).context("sequencer config"))?;
    strategy.validate().map_err(|e| CliError::from(e).context("attacker strategy"))?;

    let comparison = compare(&strategy, &config, args.trials, args.seed, args.tolerance)?;
    let mut sweep = Vec::new();
    if args.sweep {
        for w in sweep_windows() {
            let cfg = SequencerConfig {
                batch_window: w,
                ..config.clone()
            };
            sweep.push(SweepPoint {
                batch_window: w,
                comparison: compare(&strategy, &cfg, args.trials, args.seed, args.tolerance)?,
            });
        }
    }
    if !comparison.agrees {
        log::warn!(
            "Monte Carlo and analytic co-inclusion disagree by {:.3e}",
            comparison.difference
        );
    }

    let config_json = json!({
        "sequencer": config,
        "strategy": strategy,
        "preset": args.preset,
        "trials": args.trials,
        "tolerance": args.tolerance,
        "sweep": args.sweep.then(sweep_windows),
    });
    let csv = if args.sweep { Some(sweep_csv(&sweep)?) } else { None };
    let input_refs: Vec<&Input> = inputs.iter().collect();
    let report = Report::new(
        "simulate",
        Some(args.seed),
        config_json,
        &input_refs,
        SimulateResult { comparison, sweep },
    );
    let mut out = Outputs::default();
    if let Some(csv) = csv {
        out.add("sweep.csv", report.hash_comment() + &csv);
    }
    out.add("report.json", report.to_json()?);
    Ok(out)
}
