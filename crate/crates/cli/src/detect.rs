//! `detect`: sandwich triples and summary tables from a swap-event export.

use std::path::PathBuf;

use serde::Serialize;
use serde_json::json;

use sandwich_core::detect::{
    bot_efficiency, detect, efficiency_csv, log10_histogram, read_events, read_tx_counts,
    summary_csv, summary_markdown, summary_stats, ActorRegistry, DetectOptions, DetectStats,
    EventFormat, SnapshotSet, DEFAULT_GAS_USD, STRONG_SIGNATURE_TOLERANCE,
};

use crate::error::{CliError, CliResult};
use crate::report::{Input, Outputs, Report};

/// Runs with more unreadable rows than this are aborted.
pub const MAX_SKIP_RATE: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, clap::Args)]
pub struct DetectArgs {
    /// Swap events, CSV or JSON lines.
    #[arg(long)]
    pub events: PathBuf,
    /// Input format; inferred from the extension by default.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Actor registry JSON. Without it every swap is attributed to the
    /// contract it called.
    #[arg(long)]
    pub registry: Option<PathBuf>,
    /// Pool snapshots JSON for PnL.
    #[arg(long)]
    pub snapshots: Option<PathBuf>,
    /// Per-actor daily transaction counts CSV for efficiency.
    #[arg(long)]
    pub tx_counts: Option<PathBuf>,
    /// Chains to list in the summary even without triples.
    #[arg(long, value_delimiter = ',')]
    pub chains: Vec<String>,
    /// Gas cost used when neither leg reports one, in USD.
    #[arg(long, default_value_t = DEFAULT_GAS_USD)]
    pub default_gas: f64,
    /// Relative backrun/frontrun size tolerance for the strong signature.
    #[arg(long, default_value_t = STRONG_SIGNATURE_TOLERANCE)]
    pub tolerance: f64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize)]
pub struct Ingestion {
    pub rows: usize,
    pub skipped: usize,
    pub skip_rate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DetectResult {
    pub ingestion: Ingestion,
    pub stats: DetectStats,
    /// Counts of actor efficiencies per power of ten, from 1e-6 to 1.
    pub efficiency_histogram: Vec<(i32, usize)>,
    pub files: Vec<String>,
}

pub fn run(args: &DetectArgs) -> CliResult<Outputs> {
    if !(args.default_gas.is_finite() && args.default_gas >= 0.0) {
        return Err(CliError::validation(format!(
            "--default-gas must be non-negative, got {}",
            args.default_gas
        )));
    }
    if !(args.tolerance.is_finite() && args.tolerance >= 0.0) {
        return Err(CliError::validation(format!(
            "--tolerance must be non-negative, got {}",
            args.tolerance
        )));
    }

    // read and parse everything before any work starts
    let events_file = Input::read("events", &args.events)?;
    let registry_file = args.registry.as_deref().map(|p| Input::read("registry", p)).transpose()?;
    let snapshots_file = args.snapshots.as_deref().map(|p| Input::read("snapshots", p)).transpose()?;
    let counts_file = args.tx_counts.as_deref().map(|p| Input::read("tx_counts", p)).transpose()?;

    let registry = registry_file
        .as_ref()
        .map(|f| ActorRegistry::from_json(f.text()?).map_err(|e| CliError::from(e).context("registry")))
        .transpose()?;
    let snapshots = snapshots_file
        .as_ref()
        .map(|f| SnapshotSet::from_json(f.text()?).map_err(|e| CliError::from(e).context("snapshots")))
        .transpose()?;
    let tx_counts = match &counts_file {
        Some(f) => read_tx_counts(f.bytes.as_slice())
            .map_err(|e| CliError::from(e).context("tx counts"))?,
        None => Vec::new(),
    };
    let format = match args.format {
        Some(Format::Csv) => EventFormat::Csv,
        Some(Format::Jsonl) => EventFormat::Jsonl,
        None => EventFormat::from_path(&args.events),
    };
    let load = read_events(events_file.bytes.as_slice(), format)
        .map_err(|e| CliError::from(e).context("events"))?;
    for s in load.skipped.iter().take(10) {
        log::warn!("skipping events line {}: {}", s.line, s.message);
    }
    if load.skipped.len() > 10 {
        log::warn!("... and {} more skipped rows", load.skipped.len() - 10);
    }
    let ingestion = Ingestion {
        rows: load.rows(),
        skipped: load.skipped.len(),
        skip_rate: load.skip_rate(),
    };
    if ingestion.skip_rate > MAX_SKIP_RATE {
        return Err(CliError::validation(format!(
            "{} of {} event rows are unreadable ({:.1}%), above the {:.0}% limit",
            ingestion.skipped,
            ingestion.rows,
            100.0 * ingestion.skip_rate,
            100.0 * MAX_SKIP_RATE
        )));
    }
    if registry.is_none() {
        eprintln!(
            "WARNING: no actor registry given; swaps are attributed to the contract called, \
             so users of a shared router will be merged into one actor"
        );
    }

    let options = DetectOptions {
        default_gas_usd: args.default_gas,
        strong_signature_tolerance: args.tolerance,
    };
    let detection = detect(load.events, registry.as_ref(), snapshots.as_ref(), &options);
    let summary = summary_stats(&detection.triples, &args.chains);
    let efficiency = bot_efficiency(&detection.triples, &tx_counts);
    let eff_values: Vec<f64> = efficiency.actors.iter().filter_map(|a| a.efficiency).collect();

    let config = json!({
        "format": match format { EventFormat::Csv => "csv", EventFormat::Jsonl => "jsonl" },
        "options": options,
        "chains": args.chains,
        "max_skip_rate": MAX_SKIP_RATE,
        "registry_fallback": registry.is_none(),
    });
    let inputs: Vec<&Input> = std::iter::once(&events_file)
        .chain(registry_file.as_ref())
        .chain(snapshots_file.as_ref())
        .chain(counts_file.as_ref())
        .collect();
    let files = ["triples.jsonl", "summary.csv", "summary.md", "efficiency.csv", "report.json"];
    let report = Report::new(
        "detect",
        None,
        config,
        &inputs,
        DetectResult {
            ingestion,
            stats: detection.stats.clone(),
            efficiency_histogram: log10_histogram(&eff_values, -6, 0),
            files: files.iter().map(|s| s.to_string()).collect(),
        },
    );

    let mut triples = report.hash_comment();
    for t in &detection.triples {
        triples.push_str(&serde_json::to_string(t).map_err(CliError::runtime)?);
        triples.push('\n');
    }
    let mut out = Outputs::default();
    out.add(files[0], triples);
    out.add(files[1], report.hash_comment() + &summary_csv(&summary)?);
    out.add(files[2], report.html_comment() + &summary_markdown(&summary));
    out.add(files[3], report.hash_comment() + &efficiency_csv(&efficiency)?);
    out.add(files[4], report.to_json()?);
    Ok(out)
}
