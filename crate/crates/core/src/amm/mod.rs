//! Swap math for constant-product (CPMM) and concentrated-liquidity (CLMM)
//! pools.
//!
//! Prices are quoted as Y per X. Fees are taken from the input before it
//! reaches the pool and are not credited back to reserves: a swap of
//! `amount_in` moves the pool by `(1 - fee) * amount_in`.
//!
//! An X→Y swap adds X and removes Y, so the quoted price (Y per X) falls and
//! the price of Y in X terms rises. On a CLMM this means X→Y walks the tick
//! list downwards and Y→X walks it upwards.

mod clmm;
mod cpmm;

use serde::{Deserialize, Serialize};

pub use clmm::ClmmPool;
pub use cpmm::CpmmPool;

use crate::error::{Error, Result};

/// Default upper bound on `alpha` for the small-trade regime.
pub const SMALL_TRADE_THRESHOLD: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "x_to_y", alias = "X->Y", alias = "XtoY", alias = "x->y")]
    XToY,
    #[serde(rename = "y_to_x", alias = "Y->X", alias = "YtoX", alias = "y->x")]
    YToX,
}

impl Direction {
    pub fn reverse(self) -> Self {
        match self {
            Direction::XToY => Direction::YToX,
            Direction::YToX => Direction::XToY,
        }
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Direction::XToY => f.write_str("x_to_y"),
            Direction::YToX => f.write_str("y_to_x"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwapQuote {
    /// Gross input, before the fee.
    pub amount_in: f64,
    pub amount_out: f64,
    pub ticks_crossed: u32,
    /// √P (Y per X) once the swap has executed.
    pub end_sqrt_price: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedTrade {
    pub alpha: f64,
    pub small_trade: bool,
}

/// `(1 - fee) * volume / depth`, flagged as small-trade below
/// [`SMALL_TRADE_THRESHOLD`].
pub fn normalized_size(volume: f64, fee: f64, depth: f64) -> Result<NormalizedTrade> {
    normalized_size_with_threshold(volume, fee, depth, SMALL_TRADE_THRESHOLD)
}

pub fn normalized_size_with_threshold(
    volume: f64,
    fee: f64,
    depth: f64,
    threshold: f64,
) -> Result<NormalizedTrade> {
    if !(depth.is_finite() && depth > 0.0) {
        return Err(Error::InvalidDepth(depth));
    }
    crate::error::ensure_finite_non_negative("volume", volume)?;
    crate::error::ensure_fee(fee)?;
    let alpha = (1.0 - fee) * volume / depth;
    Ok(NormalizedTrade {
        alpha,
        small_trade: alpha < threshold,
    })
}

/// A pool of either kind. Serialized with a `type` tag:
///
/// ```json
/// {"type": "cpmm", "fee": 0.003, "reserves": [1000.0, 1000.0]}
/// {"type": "clmm", "fee": 0.0005, "boundaries": [0.81, 0.9025, 1.0],
///  "liquidities": [100000.0, 1000000.0], "sqrt_price": 1.0}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PoolSnapshot", into = "PoolSnapshot")]
pub enum Pool {
    Cpmm(CpmmPool),
    Clmm(ClmmPool),
}

impl Pool {
    pub fn fee(&self) -> f64 {
        match self {
            Pool::Cpmm(p) => p.fee(),
            Pool::Clmm(p) => p.fee(),
        }
    }

    pub fn swap_exact_in(&self, amount_in: f64, direction: Direction) -> Result<SwapQuote> {
        match self {
            Pool::Cpmm(p) => p.swap_exact_in(amount_in, direction),
            Pool::Clmm(p) => p.swap_exact_in(amount_in, direction),
        }
    }

    /// Executes the swap and returns the resulting pool with its quote.
    pub fn apply_swap(&self, amount_in: f64, direction: Direction) -> Result<(Pool, SwapQuote)> {
        match self {
            Pool::Cpmm(p) => {
                let quote = p.swap_exact_in(amount_in, direction)?;
                Ok((Pool::Cpmm(p.apply_swap(amount_in, direction)?), quote))
            }
            Pool::Clmm(p) => {
                let (next, quote) = p.apply_swap(amount_in, direction)?;
                Ok((Pool::Clmm(next), quote))
            }
        }
    }

    /// USD-equivalent depth used by the small-trade approximations.
    pub fn effective_depth(&self) -> f64 {
        match self {
            Pool::Cpmm(p) => p.effective_depth(),
            Pool::Clmm(p) => p.effective_depth(),
        }
    }
}

impl From<CpmmPool> for Pool {
    fn from(p: CpmmPool) -> Self {
        Pool::Cpmm(p)
    }
}

impl From<ClmmPool> for Pool {
    fn from(p: ClmmPool) -> Self {
        Pool::Clmm(p)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum PoolSnapshot {
    Cpmm {
        fee: f64,
        reserves: [f64; 2],
    },
    Clmm {
        fee: f64,
        boundaries: Vec<f64>,
        liquidities: Vec<f64>,
        sqrt_price: f64,
    },
}

impl TryFrom<PoolSnapshot> for Pool {
    type Error = Error;

    fn try_from(snapshot: PoolSnapshot) -> Result<Self> {
        match snapshot {
            PoolSnapshot::Cpmm { fee, reserves } => {
                CpmmPool::new(reserves[0], reserves[1], fee).map(Pool::Cpmm)
            }
            PoolSnapshot::Clmm {
                fee,
                boundaries,
                liquidities,
                sqrt_price,
            } => ClmmPool::new(boundaries, liquidities, sqrt_price, fee).map(Pool::Clmm),
        }
    }
}

impl From<Pool> for PoolSnapshot {
    fn from(pool: Pool) -> Self {
        match pool {
            Pool::Cpmm(p) => PoolSnapshot::Cpmm {
                fee: p.fee(),
                reserves: [p.reserve_x(), p.reserve_y()],
            },
            Pool::Clmm(p) => PoolSnapshot::Clmm {
                fee: p.fee(),
                boundaries: p.boundaries().to_vec(),
                liquidities: p.liquidities().to_vec(),
                sqrt_price: p.sqrt_price(),
            },
        }
    }
}
