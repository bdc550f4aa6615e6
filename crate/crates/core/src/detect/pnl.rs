use serde::{Deserialize, Serialize};

use crate::econ::tick_epsilon;
use crate::error::{Error, Result};

/// Gas per sandwich when the events carry none, in USD.
pub const DEFAULT_GAS_USD: f64 = 0.45;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoolContext {
    /// Depth `L` in USD.
    pub depth: f64,
    pub fee: f64,
    #[serde(default = "one")]
    pub tick_width: u32,
}

fn one() -> u32 {
    1
}

/// Pool context valid for blocks `block_from..=block_to`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolSnapshot {
    #[serde(default)]
    pub chain: Option<String>,
    pub pool_address: String,
    pub block_from: u64,
    pub block_to: u64,
    #[serde(flatten)]
    pub context: PoolContext,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SnapshotSet {
    pub snapshots: Vec<PoolSnapshot>,
}

impl SnapshotSet {
    /// A JSON array of snapshots.
    pub fn from_json(text: &str) -> Result<Self> {
        let set: SnapshotSet = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        for s in &set.snapshots {
            if !(s.context.depth.is_finite() && s.context.depth > 0.0) {
                return Err(Error::InvalidDepth(s.context.depth));
            }
            crate::error::ensure_fee(s.context.fee)?;
            if s.block_from > s.block_to {
                return Err(Error::InvalidInput(format!(
                    "snapshot for {} has block_from > block_to",
                    s.pool_address
                )));
            }
        }
        Ok(set)
    }

    /// First snapshot covering the pool at `block`. Snapshots without a
    /// chain match any chain.
    pub fn lookup(&self, chain: &str, pool: &str, block: u64) -> Option<PoolContext> {
        self.snapshots
            .iter()
            .find(|s| {
                s.pool_address.eq_ignore_ascii_case(pool)
                    && s.chain.as_deref().is_none_or(|c| c == chain)
                    && (s.block_from..=s.block_to).contains(&block)
            })
            .map(|s| s.context)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PnlBreakdown {
    pub gross: f64,
    pub net_slippage: f64,
    pub net: f64,
}

/// With `k = (1-φ)² ε / L`:
/// gross `k V_f ΣV_v`, then less the attacker's own impact `k V_f²`, then
/// less fees `2 V_f φ` and gas.
pub fn triple_pnl(front: f64, victims: f64, ctx: &PoolContext, gas: f64) -> PnlBreakdown {
    let keep = 1.0 - ctx.fee;
    let k = keep * keep * tick_epsilon(ctx.tick_width) / ctx.depth;
    let gross = k * front * victims;
    let net_slippage = gross - k * front * front;
    PnlBreakdown {
        gross,
        net_slippage,
        net: net_slippage - 2.0 * front * ctx.fee - gas,
    }
}
