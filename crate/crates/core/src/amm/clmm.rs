use serde::{Deserialize, Serialize};

use super::{CpmmPool, Direction, SwapQuote};
use crate::error::{ensure_fee, ensure_finite_non_negative, Error, Result};

/// Inputs within this relative distance of a tick's remaining capacity
/// finish exactly on the boundary.
const BOUNDARY_SNAP: f64 = 1e-12;

/// Concentrated-liquidity pool with piecewise-constant liquidity.
///
/// `boundaries` holds `n + 1` strictly increasing prices (Y per X) and
/// `liquidities` the `n` per-interval liquidities. Inside interval `i` the
/// pool behaves as a CPMM with virtual reserves `x = L_i / √P` and
/// `y = L_i * √P`; traversing the whole interval moves
/// `L_i (1/√P_i - 1/√P_{i+1})` of X and `L_i (√P_{i+1} - √P_i)` of Y.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClmmPool {
    boundaries: Vec<f64>,
    sqrt_boundaries: Vec<f64>,
    liquidities: Vec<f64>,
    sqrt_price: f64,
    fee: f64,
}

impl ClmmPool {
    pub fn new(
        boundaries: Vec<f64>,
        liquidities: Vec<f64>,
        sqrt_price: f64,
        fee: f64,
    ) -> Result<Self> {
        let invalid = |msg: String| Err(Error::InvalidPool(msg));
        if liquidities.is_empty() || boundaries.len() != liquidities.len() + 1 {
            return invalid(format!(
                "expected n+1 boundaries for n liquidities, got {} and {}",
                boundaries.len(),
                liquidities.len()
            ));
        }
        if boundaries.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
            return invalid("tick boundaries must be finite and positive".into());
        }
        if boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("tick boundaries must be strictly increasing".into());
        }
        if liquidities.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return invalid("tick liquidity must be finite and non-negative".into());
        }
        ensure_fee(fee).map_err(|e| Error::InvalidPool(e.to_string()))?;
        let sqrt_boundaries: Vec<f64> = boundaries.iter().map(|b| b.sqrt()).collect();
        let (lo, hi) = (sqrt_boundaries[0], sqrt_boundaries[sqrt_boundaries.len() - 1]);
        if !(sqrt_price.is_finite() && sqrt_price >= lo && sqrt_price <= hi) {
            return invalid(format!(
                "sqrt_price {sqrt_price} outside tick range [{lo}, {hi}]"
            ));
        }
        Ok(Self {
            boundaries,
            sqrt_boundaries,
            liquidities,
            sqrt_price,
            fee,
        })
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn liquidities(&self) -> &[f64] {
        &self.liquidities
    }

    pub fn sqrt_price(&self) -> f64 {
        self.sqrt_price
    }

    pub fn price(&self) -> f64 {
        self.sqrt_price * self.sqrt_price
    }

    pub fn fee(&self) -> f64 {
        self.fee
    }

    pub fn tick_count(&self) -> usize {
        self.liquidities.len()
    }

    /// √P bounds of tick `i`.
    pub fn sqrt_bounds(&self, i: usize) -> (f64, f64) {
        (self.sqrt_boundaries[i], self.sqrt_boundaries[i + 1])
    }

    /// Same pool at a different √P.
    pub fn with_sqrt_price(&self, sqrt_price: f64) -> Result<Self> {
        Self::new(
            self.boundaries.clone(),
            self.liquidities.clone(),
            sqrt_price,
            self.fee,
        )
    }

    /// Tick the next swap in `direction` draws from, if any.
    ///
    /// On a boundary, an X→Y swap uses the interval below and a Y→X swap
    /// the interval above.
    pub fn tick_for(&self, direction: Direction) -> Option<usize> {
        let s = self.sqrt_price;
        let n = self.tick_count();
        match direction {
            // first boundary >= s, minus one
            Direction::XToY => {
                let k = self.sqrt_boundaries.partition_point(|b| *b < s);
                k.checked_sub(1)
            }
            // last boundary <= s
            Direction::YToX => {
                let k = self.sqrt_boundaries.partition_point(|b| *b <= s);
                let i = k - 1;
                (i < n).then_some(i)
            }
        }
    }

    /// The active tick: the one an X→Y trade consumes first, or the lowest
    /// tick when the price sits on the bottom boundary.
    pub fn active_tick(&self) -> usize {
        self.tick_for(Direction::XToY).unwrap_or(0)
    }

    pub fn active_liquidity(&self) -> f64 {
        self.liquidities[self.active_tick()]
    }

    /// `L_i / P` for the active tick.
    pub fn effective_depth(&self) -> f64 {
        self.active_liquidity() / self.price()
    }

    /// CPMM with the active tick's virtual reserves. Matches the CLMM
    /// exactly for swaps that stay inside the tick.
    pub fn local_cpmm(&self) -> Result<CpmmPool> {
        let l = self.active_liquidity();
        CpmmPool::new(l / self.sqrt_price, l * self.sqrt_price, self.fee)
    }

    /// `|dP/dx| = 2 P^{3/2} / L_i` at the current price.
    pub fn marginal_impact(&self) -> Result<f64> {
        let l = self.active_liquidity();
        if l <= 0.0 {
            return Err(Error::ZeroLiquidity);
        }
        Ok(2.0 * self.price() * self.sqrt_price / l)
    }

    /// Effective input needed to move from the current price to the far
    /// boundary of the tick used in `direction`.
    pub fn capacity_to_boundary(&self, direction: Direction) -> Option<f64> {
        let i = self.tick_for(direction)?;
        let (lo, hi) = self.sqrt_bounds(i);
        let l = self.liquidities[i];
        let s = self.sqrt_price;
        Some(match direction {
            Direction::XToY => l * (s - lo) / (lo * s),
            Direction::YToX => l * (hi - s),
        })
    }

    pub fn swap_exact_in(&self, amount_in: f64, direction: Direction) -> Result<SwapQuote> {
        self.walk(amount_in, direction)
    }

    pub fn apply_swap(&self, amount_in: f64, direction: Direction) -> Result<(ClmmPool, SwapQuote)> {
        let quote = self.walk(amount_in, direction)?;
        let mut next = self.clone();
        next.sqrt_price = quote.end_sqrt_price;
        Ok((next, quote))
    }

    fn walk(&self, amount_in: f64, direction: Direction) -> Result<SwapQuote> {
        ensure_finite_non_negative("amount_in", amount_in)?;
        let keep = 1.0 - self.fee;
        let mut remaining = keep * amount_in;
        let mut s = self.sqrt_price;
        let mut out = 0.0;
        let mut crossed = 0u32;
        let mut tick = self.tick_for(direction);

        while remaining > 0.0 {
            let Some(i) = tick else {
                let partial = SwapQuote {
                    amount_in: amount_in - remaining / keep,
                    amount_out: out,
                    ticks_crossed: crossed,
                    end_sqrt_price: s,
                };
                return Err(Error::RangeExhausted {
                    partial,
                    requested: amount_in,
                });
            };
            let (lo, hi) = self.sqrt_bounds(i);
            let l = self.liquidities[i];
            match direction {
                Direction::XToY => {
                    let capacity = l * (s - lo) / (lo * s);
                    if remaining >= capacity * (1.0 - BOUNDARY_SNAP) {
                        out += l * (s - lo);
                        remaining = (remaining - capacity).max(0.0);
                        s = lo;
                        crossed += 1;
                        tick = i.checked_sub(1);
                    } else {
                        // y out = L s^2 r / (L + r s)
                        out += l * s * s * remaining / (l + remaining * s);
                        s = l * s / (l + remaining * s);
                        remaining = 0.0;
                    }
                }
                Direction::YToX => {
                    let capacity = l * (hi - s);
                    if remaining >= capacity * (1.0 - BOUNDARY_SNAP) {
                        out += l * (hi - s) / (s * hi);
                        remaining = (remaining - capacity).max(0.0);
                        s = hi;
                        crossed += 1;
                        tick = (i + 1 < self.tick_count()).then_some(i + 1);
                    } else {
                        let next = s + remaining / l;
                        out += remaining / (s * next);
                        s = next;
                        remaining = 0.0;
                    }
                }
            }
        }

        Ok(SwapQuote {
            amount_in,
            amount_out: out,
            ticks_crossed: crossed,
            end_sqrt_price: s,
        })
    }
}
