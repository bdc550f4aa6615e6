//! Co-inclusion probability of a sandwich's three legs under a private
//! mempool sequencer.
//!
//! The analytic model factors the probability into three parts:
//!
//! - same batch: `max(0, 1 - Δ/T_s)`
//! - ordering: `exp(-λΔ)` under FCFS, or the no-interference expectation
//!   over tips under a priority gas auction (PGA)
//! - arrival: `exp(-Δ²/(2σ²))`
//!
//! PGA attackers send both legs together, so Δ is taken as zero there.
//! [`simulate_co_inclusion`] estimates the same quantity by Monte Carlo.

mod dist;
mod montecarlo;
mod optimize;
pub mod reference;

use serde::{Deserialize, Serialize};

pub use dist::{poisson_truncated_sum, BatchSizeModel, KSampler, TipDistribution, TipSampler, TRUNCATION_TOLERANCE};
pub use montecarlo::{simulate_co_inclusion, MC_CHUNK_TRIALS};
pub use optimize::{optimize_delay_fcfs, optimize_tips_pga, DelayPlan, TipPlan, DELAY_TOLERANCE};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    #[serde(alias = "FCFS")]
    Fcfs,
    #[serde(alias = "PGA")]
    Pga,
}

impl std::fmt::Display for Policy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Policy::Fcfs => "fcfs",
            Policy::Pga => "pga",
        })
    }
}

/// Times are in seconds, rates in transactions per second.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequencerConfig {
    pub policy: Policy,
    /// Carried for reporting; no formula depends on it.
    pub block_time: f64,
    pub batch_window: f64,
    pub latency_std: f64,
    pub background_rate: f64,
    /// Background tip distribution G.
    #[serde(default)]
    pub tip_distribution: TipDistribution,
    #[serde(default)]
    pub batch_size_model: BatchSizeModel,
}

impl SequencerConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("block_time", self.block_time),
            ("batch_window", self.batch_window),
            ("latency_std", self.latency_std),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.background_rate.is_finite() && self.background_rate >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "background_rate must be non-negative, got {}",
                self.background_rate
            )));
        }
        self.tip_distribution.validate()?;
        if !self.tip_distribution.is_continuous() {
            return Err(Error::InvalidInput(
                "background tip distribution must be continuous".into(),
            ));
        }
        self.batch_size_model.validate()
    }

    /// `λ·T_s`, the default mean batch size.
    pub fn expected_batch_size(&self) -> f64 {
        self.background_rate * self.batch_window
    }
}

fn default_victim_prior() -> TipDistribution {
    TipDistribution::LogNormal { mu: 0.0, sigma: 1.0 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackerStrategy {
    /// Seconds between frontrun and backrun submission.
    #[serde(default)]
    pub delay: f64,
    pub tip_front: f64,
    pub tip_back: f64,
    #[serde(default = "default_victim_prior")]
    pub victim_tip_prior: TipDistribution,
}

impl AttackerStrategy {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("delay", self.delay),
            ("tip_front", self.tip_front),
            ("tip_back", self.tip_back),
        ] {
            crate::error::ensure_finite_non_negative(name, v)?;
        }
        self.victim_tip_prior.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Analytic,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoInclusionReport {
    pub policy: Policy,
    pub p_batch: f64,
    pub p_priority: f64,
    pub p_arrival: f64,
    pub p_co_inclusion: f64,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    /// Set when a PGA strategy has `t_f ≤ t_b`.
    pub structurally_invalid: bool,
}

pub fn p_batch(delay: f64, batch_window: f64) -> f64 {
    (1.0 - delay / batch_window).max(0.0)
}

/// Probability that no background transaction arrives within `delay`.
pub fn p_priority_fcfs(rate: f64, delay: f64) -> f64 {
    (-rate * delay).exp()
}

pub fn p_arrival(delay: f64, latency_std: f64) -> f64 {
    (-delay * delay / (2.0 * latency_std * latency_std)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PgaPriority {
    pub probability: f64,
    pub structurally_invalid: bool,
}

/// `Pr[t_b < t_v < t_f] · E_K[(1 - (G(t_f) - G(t_b)))^K]`.
pub fn p_priority_pga(strategy: &AttackerStrategy, config: &SequencerConfig) -> Result<PgaPriority> {
    strategy.validate()?;
    config.validate()?;
    let (tf, tb) = (strategy.tip_front, strategy.tip_back);
    if tf <= tb {
        return Ok(PgaPriority {
            probability: 0.0,
            structurally_invalid: true,
        });
    }
    let victim_inside = strategy.victim_tip_prior.prob_between(tb, tf);
    let q = config.tip_distribution.prob_between(tb, tf);
    let clear = config
        .batch_size_model
        .no_interference(q, config.expected_batch_size());
    Ok(PgaPriority {
        probability: (victim_inside * clear).clamp(0.0, 1.0),
        structurally_invalid: false,
    })
}

pub fn co_inclusion(strategy: &AttackerStrategy, config: &SequencerConfig) -> Result<CoInclusionReport> {
    strategy.validate()?;
    config.validate()?;
    let (delay, p_priority, structurally_invalid) = match config.policy {
        Policy::Fcfs => (
            strategy.delay,
            p_priority_fcfs(config.background_rate, strategy.delay),
            false,
        ),
        Policy::Pga => {
            let pga = p_priority_pga(strategy, config)?;
            (0.0, pga.probability, pga.structurally_invalid)
        }
    };
    let p_batch = p_batch(delay, config.batch_window);
    let p_arrival = p_arrival(delay, config.latency_std);
    Ok(CoInclusionReport {
        policy: config.policy,
        p_batch,
        p_priority,
        p_arrival,
        p_co_inclusion: p_batch * p_priority * p_arrival,
        method: Method::Analytic,
        std_error: None,
        trials: None,
        structurally_invalid,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub batch_window: f64,
    pub report: CoInclusionReport,
}

/// Analytic co-inclusion for each batch window in `windows`.
pub fn sweep_batch_window(
    strategy: &AttackerStrategy,
    config: &SequencerConfig,
    windows: &[f64],
) -> Result<Vec<SweepRow>> {
    windows
        .iter()
        .map(|&w| {
            let cfg = SequencerConfig {
                batch_window: w,
                ..config.clone()
            };
            co_inclusion(strategy, &cfg).map(|report| SweepRow {
                batch_window: w,
                report,
            })
        })
        .collect()
}
