//! `optimize`: optimal frontrun for a scenario, checked against the exact
//! replay when a pool snapshot is given.

use std::path::PathBuf;

use serde::Serialize;
use serde_json::json;

use sandwich_core::amm::Pool;
use sandwich_core::econ::{
    exact_sandwich_profit, expected_value, gross_profit, incremental_profit_quadratic,
    min_victim_size, optimal_frontrun_clmm, optimal_frontrun_cpmm, slippage_cap, AttackPlan,
    SandwichScenario, SlippageCap,
};

use crate::error::{CliError, CliResult};
use crate::report::{Input, Outputs, Report};

#[derive(Debug, Clone, clap::Args)]
pub struct OptimizeArgs {
    /// Scenario JSON (victim_input, fee, depth, costs, ...).
    #[arg(long, visible_alias = "config")]
    pub scenario: PathBuf,
    /// Pool snapshot JSON; enables the exact replay and CLMM gap search.
    #[arg(long)]
    pub pool: Option<PathBuf>,
    /// Victim slippage tolerance in (0, 1); derives the frontrun cap from
    /// the pool when the scenario has none.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Directory for report.json; without it the report goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvBreakdown {
    pub success_prob: f64,
    pub gross_profit: f64,
    pub gas_cost: f64,
    pub slippage_cost: f64,
    pub expected_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizeResult {
    pub pool_type: &'static str,
    pub plan: AttackPlan,
    /// Quadratic profit at the planned size, before gas.
    pub quadratic_profit: f64,
    /// Exact replay profit at the planned size, before gas; absent without
    /// a pool or when the pool cannot absorb the trades.
    pub oracle_profit: Option<f64>,
    pub ev: EvBreakdown,
    /// Smallest victim with non-negative expected value; absent when the
    /// success probability is zero.
    pub min_victim_size: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slippage_cap: Option<SlippageCap>,
}

pub fn run(args: &OptimizeArgs) -> CliResult<Outputs> {
    let scenario_file = Input::read("scenario", &args.scenario)?;
    let pool_file = args.pool.as_deref().map(|p| Input::read("pool", p)).transpose()?;
    let mut scenario: SandwichScenario = scenario_file.json()?;
    scenario.validate().map_err(|e| CliError::from(e).context("scenario"))?;
    let pool: Option<Pool> = pool_file.as_ref().map(|f| f.json()).transpose()?;
    if let Some(t) = args.tolerance {
        if !(t > 0.0 && t < 1.0) {
            return Err(CliError::validation(format!("--tolerance must lie in (0, 1), got {t}")));
        }
        if pool.is_none() {
            return Err(CliError::validation("--tolerance needs --pool to derive a frontrun cap"));
        }
    }

    let cap = match (args.tolerance, &pool) {
        (Some(t), Some(p)) => Some(slippage_cap(p, scenario.victim_input, t)?),
        _ => None,
    };
    if let (Some(c), None) = (&cap, scenario.frontrun_cap) {
        scenario.frontrun_cap = Some(c.cap);
    }

    let (pool_type, plan) = match &pool {
        Some(Pool::Clmm(p)) => ("clmm", optimal_frontrun_clmm(p, &scenario)?),
        Some(Pool::Cpmm(_)) => ("cpmm", optimal_frontrun_cpmm(&scenario)?),
        None => ("none", optimal_frontrun_cpmm(&scenario)?),
    };
    let f = plan.frontrun_size;
    let v = scenario.victim_input;
    let oracle_profit = match &pool {
        Some(p) => match exact_sandwich_profit(p, f, v, 0.0) {
            Ok(x) => Some(x),
            Err(e) => {
                log::warn!("exact replay failed at frontrun {f}: {e}");
                None
            }
        },
        None => None,
    };
    let result = OptimizeResult {
        pool_type,
        plan,
        quadratic_profit: incremental_profit_quadratic(f, v, scenario.fee, scenario.depth)?,
        oracle_profit,
        ev: EvBreakdown {
            success_prob: scenario.success_prob,
            gross_profit: gross_profit(f, v, scenario.depth),
            gas_cost: scenario.gas_cost,
            slippage_cost: scenario.slippage_cost,
            expected_value: expected_value(&scenario, f),
        },
        min_victim_size: min_victim_size(
            scenario.depth,
            scenario.gas_cost,
            scenario.slippage_cost,
            scenario.success_prob,
        )
        .ok(),
        slippage_cap: cap,
    };

    let config = json!({
        "scenario": scenario,
        "pool": pool,
        "tolerance": args.tolerance,
    });
    let inputs: Vec<&Input> = std::iter::once(&scenario_file).chain(pool_file.as_ref()).collect();
    let report = Report::new("optimize", None, config, &inputs, result);
    let mut out = Outputs::default();
    out.add("report.json", report.to_json()?);
    Ok(out)
}
