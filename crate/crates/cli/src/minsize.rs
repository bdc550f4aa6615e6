//! `minsize`: break-even victim size over a parameter grid.

use std::path::PathBuf;

use serde::Serialize;
use serde_json::json;

use sandwich_core::econ::min_victim_size;
use sandwich_core::Error;

use crate::error::{CliError, CliResult};
use crate::report::{Outputs, Report};

#[derive(Debug, Clone, clap::Args)]
pub struct MinsizeArgs {
    /// Pool depths L in USD.
    #[arg(long, value_delimiter = ',', default_values_t = [5e4, 1e5, 1.75e5, 2.5e5, 3e5])]
    pub depth: Vec<f64>,
    /// Success probabilities in [0, 1].
    #[arg(long, value_delimiter = ',', default_values_t = [0.05, 0.1, 0.125, 0.15, 0.2])]
    pub success_prob: Vec<f64>,
    /// Total per-attack costs (gas plus slippage) in USD.
    #[arg(long, value_delimiter = ',', default_values_t = [0.2, 0.45, 0.7])]
    pub costs: Vec<f64>,
    /// Directory for minsize.csv and report.json; without it the CSV goes
    /// to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinsizeRow {
    pub depth: f64,
    pub success_prob: f64,
    pub costs: f64,
    pub min_victim_size: Option<f64>,
    pub feasible: bool,
}

pub fn grid(args: &MinsizeArgs) -> CliResult<Vec<MinsizeRow>> {
    for (name, values) in [("depth", &args.depth), ("costs", &args.costs), ("success-prob", &args.success_prob)] {
        if values.is_empty() {
            return Err(CliError::validation(format!("--{name} needs at least one value")));
        }
    }
    if let Some(d) = args.depth.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
        return Err(CliError::validation(format!("depth must be positive, got {d}")));
    }
    if let Some(c) = args.costs.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
        return Err(CliError::validation(format!("costs must be non-negative, got {c}")));
    }
    if let Some(p) = args.success_prob.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(CliError::validation(format!("success probability must lie in [0, 1], got {p}")));
    }
    let mut rows = Vec::new();
    for &depth in &args.depth {
        for &success_prob in &args.success_prob {
            for &costs in &args.costs {
                let min = match min_victim_size(depth, costs, 0.0, success_prob) {
                    Ok(v) => Some(v),
                    Err(Error::Infeasible(_)) => None,
                    Err(e) => return Err(e.into()),
                };
                rows.push(MinsizeRow {
                    depth,
                    success_prob,
                    costs,
                    min_victim_size: min,
                    feasible: min.is_some(),
                });
            }
        }
    }
    Ok(rows)
}

fn to_csv(rows: &[MinsizeRow]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["depth", "success_prob", "costs", "min_victim_size", "status"])
        .map_err(CliError::runtime)?;
    for r in rows {
        w.write_record([
            r.depth.to_string(),
            r.success_prob.to_string(),
            r.costs.to_string(),
            r.min_victim_size.map(|v| v.to_string()).unwrap_or_default(),
            if r.feasible { "ok" } else { "infeasible" }.to_string(),
        ])
        .map_err(CliError::runtime)?;
    }
    let bytes = w.into_inner().map_err(CliError::runtime)?;
    String::from_utf8(bytes).map_err(CliError::runtime)
}

pub fn run(args: &MinsizeArgs) -> CliResult<Outputs> {
    let rows = grid(args)?;
    let csv = to_csv(&rows)?;
    let config = json!({
        "depth": args.depth,
        "success_prob": args.success_prob,
        "costs": args.costs,
    });
    let report = Report::new("minsize", None, config, &[], rows);
    let mut out = Outputs::default();
    out.add("minsize.csv", report.hash_comment() + &csv);
    out.add("report.json", report.to_json()?);
    Ok(out)
}
