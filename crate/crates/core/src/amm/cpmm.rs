use serde::{Deserialize, Serialize};

use super::{Direction, SwapQuote};
use crate::error::{ensure_fee, ensure_finite_non_negative, Error, Result};

/// Constant-product pool, `x * y = k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpmmPool {
    reserve_x: f64,
    reserve_y: f64,
    fee: f64,
}

impl CpmmPool {
    pub fn new(reserve_x: f64, reserve_y: f64, fee: f64) -> Result<Self> {
        for (name, r) in [("reserve_x", reserve_x), ("reserve_y", reserve_y)] {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::InvalidPool(format!(
                    "{name} must be finite and positive, got {r}"
                )));
            }
        }
        ensure_fee(fee).map_err(|e| Error::InvalidPool(e.to_string()))?;
        Ok(Self {
            reserve_x,
            reserve_y,
            fee,
        })
    }

    pub fn reserve_x(&self) -> f64 {
        self.reserve_x
    }

    pub fn reserve_y(&self) -> f64 {
        self.reserve_y
    }

    pub fn fee(&self) -> f64 {
        self.fee
    }

    pub fn invariant(&self) -> f64 {
        self.reserve_x * self.reserve_y
    }

    /// √(y/x).
    pub fn sqrt_price(&self) -> f64 {
        (self.reserve_y / self.reserve_x).sqrt()
    }

    pub fn effective_depth(&self) -> f64 {
        self.reserve_x
    }

    fn oriented(&self, direction: Direction) -> (f64, f64) {
        match direction {
            Direction::XToY => (self.reserve_x, self.reserve_y),
            Direction::YToX => (self.reserve_y, self.reserve_x),
        }
    }

    /// Output `r_out * e / (r_in + e)` with `e = (1 - fee) * amount_in`.
    /// The pool is not modified.
    pub fn swap_exact_in(&self, amount_in: f64, direction: Direction) -> Result<SwapQuote> {
        ensure_finite_non_negative("amount_in", amount_in)?;
        let (r_in, r_out) = self.oriented(direction);
        let effective = (1.0 - self.fee) * amount_in;
        let amount_out = r_out * effective / (r_in + effective);
        let (new_in, new_out) = Self::post_reserves(r_in, r_out, effective);
        let end_sqrt_price = match direction {
            Direction::XToY => (new_out / new_in).sqrt(),
            Direction::YToX => (new_in / new_out).sqrt(),
        };
        Ok(SwapQuote {
            amount_in,
            amount_out,
            ticks_crossed: 0,
            end_sqrt_price,
        })
    }

    /// Post-trade pool. The effective input joins the in-reserve and the
    /// quoted output leaves the out-reserve.
    pub fn apply_swap(&self, amount_in: f64, direction: Direction) -> Result<CpmmPool> {
        let quote = self.swap_exact_in(amount_in, direction)?;
        let (r_in, r_out) = self.oriented(direction);
        let effective = (1.0 - self.fee) * amount_in;
        let (new_in, new_out) = Self::post_reserves(r_in, r_out, effective);
        if !(new_out > 0.0 && new_in.is_finite()) {
            return Err(Error::Depletion {
                output: quote.amount_out,
                reserve: r_out,
            });
        }
        let (reserve_x, reserve_y) = match direction {
            Direction::XToY => (new_in, new_out),
            Direction::YToX => (new_out, new_in),
        };
        Ok(CpmmPool {
            reserve_x,
            reserve_y,
            fee: self.fee,
        })
    }

    // r_out - r_out*e/(r_in+e) written as r_out*r_in/(r_in+e) to keep the
    // product exact to rounding.
    fn post_reserves(r_in: f64, r_out: f64, effective: f64) -> (f64, f64) {
        let new_in = r_in + effective;
        (new_in, r_out * (r_in / new_in))
    }
}
