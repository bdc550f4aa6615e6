//! Attacker economics: profit approximations, optimal frontrun sizing,
//! expected value under probabilistic inclusion and the minimum profitable
//! victim size.
//!
//! The closed-form approximations work in USD on an effective depth `L`.
//! [`exact_sandwich_profit`] replays the three legs on the exact swap math
//! in [`crate::amm`] and is the reference every approximation is checked
//! against.

use serde::{Deserialize, Serialize};

use crate::amm::{ClmmPool, Direction, Pool};
use crate::error::{ensure_fee, ensure_finite_non_negative, Error, Result};

/// Relative tolerance for every bisection in this module.
pub const BISECTION_TOLERANCE: f64 = 1e-9;
pub const BISECTION_MAX_ITERATIONS: usize = 200;
/// Candidate profits closer than this are a tie, resolved toward the
/// smaller frontrun.
pub const PROFIT_TIE: f64 = 1e-12;

/// Price ratio between adjacent ticks.
pub const TICK_BASE: f64 = 1.0001;

fn default_tick_width() -> u32 {
    1
}

fn default_success_prob() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichScenario {
    pub victim_input: f64,
    /// Largest frontrun the victim's slippage bound admits. `None` means
    /// unbounded.
    #[serde(default)]
    pub frontrun_cap: Option<f64>,
    pub fee: f64,
    pub depth: f64,
    #[serde(default = "default_tick_width")]
    pub tick_width: u32,
    #[serde(default)]
    pub gas_cost: f64,
    #[serde(default)]
    pub slippage_cost: f64,
    #[serde(default = "default_success_prob")]
    pub success_prob: f64,
}

impl SandwichScenario {
    pub fn validate(&self) -> Result<()> {
        ensure_finite_non_negative("victim_input", self.victim_input)?;
        if let Some(cap) = self.frontrun_cap {
            if cap.is_nan() || cap < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "frontrun_cap must be non-negative, got {cap}"
                )));
            }
        }
        ensure_fee(self.fee)?;
        if !(self.depth.is_finite() && self.depth > 0.0) {
            return Err(Error::InvalidDepth(self.depth));
        }
        if self.tick_width == 0 {
            return Err(Error::InvalidInput("tick_width must be at least 1".into()));
        }
        ensure_finite_non_negative("gas_cost", self.gas_cost)?;
        ensure_finite_non_negative("slippage_cost", self.slippage_cost)?;
        if !(0.0..=1.0).contains(&self.success_prob) {
            return Err(Error::InvalidInput(format!(
                "success_prob must lie in [0, 1], got {}",
                self.success_prob
            )));
        }
        Ok(())
    }

    pub fn cap(&self) -> f64 {
        self.frontrun_cap.unwrap_or(f64::INFINITY)
    }

    /// Relative tick width `1.0001^Δtick - 1`.
    pub fn tick_epsilon(&self) -> f64 {
        tick_epsilon(self.tick_width)
    }
}

pub fn tick_epsilon(tick_width: u32) -> f64 {
    TICK_BASE.powi(tick_width as i32) - 1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    InTick,
    GapCrossing,
    Capped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackPlan {
    pub frontrun_size: f64,
    pub regime: Regime,
    /// Profit at `frontrun_size`: the quadratic approximation for CPMM
    /// plans, the exact replay net of gas for CLMM plans.
    pub expected_profit: f64,
}

/// `(1-φ)²/L · (V_f V_v - V_f²) - 2φ V_f`.
pub fn incremental_profit_quadratic(
    frontrun: f64,
    victim: f64,
    fee: f64,
    depth: f64,
) -> Result<f64> {
    if !(depth.is_finite() && depth > 0.0) {
        return Err(Error::InvalidDepth(depth));
    }
    let keep = 1.0 - fee;
    Ok(keep * keep / depth * (frontrun * victim - frontrun * frontrun) - 2.0 * fee * frontrun)
}

/// Half-the-victim rule, capped by the slippage bound.
pub fn optimal_frontrun_cpmm(scenario: &SandwichScenario) -> Result<AttackPlan> {
    scenario.validate()?;
    let half = scenario.victim_input / 2.0;
    let cap = scenario.cap();
    let (frontrun_size, regime) = if cap < half {
        (cap, Regime::Capped)
    } else {
        (half, Regime::InTick)
    };
    Ok(AttackPlan {
        frontrun_size,
        regime,
        expected_profit: incremental_profit_quadratic(
            frontrun_size,
            scenario.victim_input,
            scenario.fee,
            scenario.depth,
        )?,
    })
}

/// Outputs of each leg of a replayed sandwich.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichReplay {
    pub frontrun_output: f64,
    pub victim_output: f64,
    pub backrun_output: f64,
    pub profit: f64,
}

/// Frontrun X→Y, victim X→Y, then a Y→X backrun selling exactly the
/// frontrun's Y. Fees come from the pool.
pub fn replay_sandwich(pool: &Pool, frontrun: f64, victim: f64, gas: f64) -> Result<SandwichReplay> {
    let (after_front, front) = pool.apply_swap(frontrun, Direction::XToY)?;
    let (after_victim, victim_quote) = after_front.apply_swap(victim, Direction::XToY)?;
    let back = after_victim.swap_exact_in(front.amount_out, Direction::YToX)?;
    Ok(SandwichReplay {
        frontrun_output: front.amount_out,
        victim_output: victim_quote.amount_out,
        backrun_output: back.amount_out,
        profit: back.amount_out - frontrun - gas,
    })
}

/// Backrun X output minus frontrun input minus gas.
pub fn exact_sandwich_profit(pool: &Pool, frontrun: f64, victim: f64, gas: f64) -> Result<f64> {
    replay_sandwich(pool, frontrun, victim, gas).map(|r| r.profit)
}

/// Attacker's own execution loss: frontrun input minus what an immediate
/// reverse trade returns, with no victim in between. Includes fees.
pub fn round_trip_slippage(pool: &Pool, frontrun: f64) -> Result<f64> {
    exact_sandwich_profit(pool, frontrun, 0.0, 0.0).map(|p| -p)
}

/// Smallest `x` in `(lo, hi]` with `pred(x)`, given `!pred(lo)` and
/// `pred(hi)`.
fn bisect<F>(mut lo: f64, mut hi: f64, mut pred: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<bool>,
{
    for _ in 0..BISECTION_MAX_ITERATIONS {
        if hi - lo <= BISECTION_TOLERANCE * hi.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if pred(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Grows `start` geometrically until `pred` holds, up to `limit`.
fn bracket<F>(start: f64, limit: f64, mut pred: F) -> Result<Option<f64>>
where
    F: FnMut(f64) -> Result<bool>,
{
    let mut hi = start;
    loop {
        if pred(hi)? {
            return Ok(Some(hi));
        }
        if hi >= limit {
            return Ok(None);
        }
        hi = (hi * 2.0).min(limit);
    }
}

/// Minimal frontrun that pushes frontrun plus victim flow to the far
/// boundary of the active tick in the X→Y direction. Zero when the victim
/// gets there alone.
pub fn gap_frontrun(pool: &ClmmPool, victim: f64) -> Result<f64> {
    ensure_finite_non_negative("victim", victim)?;
    let Some(tick) = pool.tick_for(Direction::XToY) else {
        let partial = pool.swap_exact_in(0.0, Direction::XToY)?;
        return Err(Error::RangeExhausted {
            partial,
            requested: victim,
        });
    };
    let target = pool.sqrt_bounds(tick).0;
    let reaches = |total: f64| -> Result<bool> {
        match pool.swap_exact_in(total, Direction::XToY) {
            Ok(q) => Ok(q.end_sqrt_price <= target),
            Err(Error::RangeExhausted { .. }) => Ok(true),
            Err(e) => Err(e),
        }
    };
    if reaches(victim)? {
        return Ok(0.0);
    }
    let start = victim.max(pool.liquidities()[tick] * 1e-9).max(1e-12);
    let hi = bracket(start, f64::MAX / 4.0, |f| reaches(victim + f))?.ok_or_else(|| {
        Error::Infeasible("tick boundary unreachable".into())
    })?;
    bisect(0.0, hi, |f| reaches(victim + f))
}

/// Frontrun size on a CLMM pool.
///
/// If the next tick in the X→Y direction is thinner than the active one,
/// the in-tick candidate `min(V_v/2, cap)` is compared with the boundary
/// candidate `min(V_f^gap, cap)` on the exact replay and the more
/// profitable one wins. Otherwise the in-tick candidate stands.
pub fn optimal_frontrun_clmm(pool: &ClmmPool, scenario: &SandwichScenario) -> Result<AttackPlan> {
    scenario.validate()?;
    let victim = scenario.victim_input;
    let cap = scenario.cap();
    let whole = Pool::Clmm(pool.clone());
    let profit = |f: f64| exact_sandwich_profit(&whole, f, victim, scenario.gas_cost);

    let half = victim / 2.0;
    let in_tick = half.min(cap);
    let in_tick_regime = if cap < half {
        Regime::Capped
    } else {
        Regime::InTick
    };

    let thinner_next = pool
        .tick_for(Direction::XToY)
        .and_then(|i| i.checked_sub(1).map(|j| (i, j)))
        .is_some_and(|(i, j)| pool.liquidities()[j] < pool.liquidities()[i]);

    if !thinner_next {
        return Ok(AttackPlan {
            frontrun_size: in_tick,
            regime: in_tick_regime,
            expected_profit: profit(in_tick)?,
        });
    }

    let gap = gap_frontrun(pool, victim)?;
    let gap_candidate = gap.min(cap);
    let gap_regime = if cap < gap {
        Regime::Capped
    } else {
        Regime::GapCrossing
    };
    let p_in = profit(in_tick)?;
    let p_gap = profit(gap_candidate)?;

    let tie = (p_gap - p_in).abs() <= PROFIT_TIE * p_in.abs().max(p_gap.abs()).max(1.0);
    let pick_gap = if tie {
        gap_candidate < in_tick
    } else {
        p_gap > p_in
    };
    Ok(if pick_gap {
        AttackPlan {
            frontrun_size: gap_candidate,
            regime: gap_regime,
            expected_profit: p_gap,
        }
    } else {
        AttackPlan {
            frontrun_size: in_tick,
            // a half-victim frontrun past the gap already crosses the boundary
            regime: if in_tick_regime == Regime::InTick && in_tick >= gap {
                Regime::GapCrossing
            } else {
                in_tick_regime
            },
            expected_profit: p_in,
        }
    })
}

/// `(1-φ)² (ε/L)(V_f V_v - V_f²) - 2 V_f φ`, before gas.
pub fn empirical_pnl(scenario: &SandwichScenario, frontrun: f64) -> f64 {
    let keep = 1.0 - scenario.fee;
    keep * keep * scenario.tick_epsilon() / scenario.depth
        * (frontrun * scenario.victim_input - frontrun * frontrun)
        - 2.0 * frontrun * scenario.fee
}

/// Gross capture `(V_f V_v - V_f²)/L`; equals `V_v²/(4L)` at `V_f = V_v/2`.
pub fn gross_profit(frontrun: f64, victim: f64, depth: f64) -> f64 {
    (frontrun * victim - frontrun * frontrun) / depth
}

/// `p_succ · gross - C_gas - C_slip`.
pub fn expected_value(scenario: &SandwichScenario, frontrun: f64) -> f64 {
    scenario.success_prob * gross_profit(frontrun, scenario.victim_input, scenario.depth)
        - scenario.gas_cost
        - scenario.slippage_cost
}

/// `2 √(L (C_gas + C_slip) / p_succ)`.
pub fn min_victim_size(depth: f64, gas_cost: f64, slippage_cost: f64, success_prob: f64) -> Result<f64> {
    if !(depth.is_finite() && depth > 0.0) {
        return Err(Error::InvalidDepth(depth));
    }
    ensure_finite_non_negative("gas_cost", gas_cost)?;
    ensure_finite_non_negative("slippage_cost", slippage_cost)?;
    if !(success_prob > 0.0 && success_prob <= 1.0) {
        return Err(Error::Infeasible(format!(
            "success probability {success_prob} leaves no positive expected value"
        )));
    }
    Ok(2.0 * (depth * (gas_cost + slippage_cost) / success_prob).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlippageCap {
    pub cap: f64,
    /// The search hit the pool's capacity before the tolerance bound.
    pub capacity_bounded: bool,
}

/// Largest frontrun after which the victim still receives at least
/// `(1 - tolerance)` of its quote on the untouched pool.
pub fn slippage_cap(pool: &Pool, victim: f64, tolerance: f64) -> Result<SlippageCap> {
    ensure_finite_non_negative("victim", victim)?;
    if !(tolerance > 0.0 && tolerance < 1.0) {
        return Err(Error::InvalidInput(format!(
            "tolerance must lie in (0, 1), got {tolerance}"
        )));
    }
    let victim_output = |p: &Pool| -> Result<f64> {
        match p.swap_exact_in(victim, Direction::XToY) {
            Ok(q) => Ok(q.amount_out),
            Err(Error::RangeExhausted { partial, .. }) => Ok(partial.amount_out),
            Err(e) => Err(e),
        }
    };
    let threshold = (1.0 - tolerance) * victim_output(pool)?;
    let breaks = |f: f64| -> Result<bool> {
        match pool.apply_swap(f, Direction::XToY) {
            Ok((after, _)) => Ok(victim_output(&after)? < threshold),
            Err(Error::RangeExhausted { .. }) | Err(Error::Depletion { .. }) => Ok(true),
            Err(e) => Err(e),
        }
    };

    let limit = match pool {
        Pool::Cpmm(p) => p.reserve_x() * 1e12,
        Pool::Clmm(p) => x_capacity(p) / (1.0 - p.fee()),
    };
    if !breaks(limit)? {
        return Ok(SlippageCap {
            cap: limit,
            capacity_bounded: true,
        });
    }
    let start = (pool.effective_depth() * 1e-9).max(1e-12).min(limit);
    if breaks(start)? {
        // the bound binds below the search floor
        let cap = bisect(0.0, start, &breaks)?;
        return Ok(SlippageCap {
            cap: largest_ok(cap, &breaks)?,
            capacity_bounded: false,
        });
    }
    let hi = bracket(start, limit, &breaks)?.unwrap_or(limit);
    let first_break = bisect(hi / 2.0, hi, &breaks)?;
    Ok(SlippageCap {
        cap: largest_ok(first_break, &breaks)?,
        capacity_bounded: false,
    })
}

// Steps just below the first breaking point.
fn largest_ok<F>(first_break: f64, breaks: &F) -> Result<f64>
where
    F: Fn(f64) -> Result<bool>,
{
    let below = first_break * (1.0 - BISECTION_TOLERANCE);
    Ok(if breaks(below)? { 0.0 } else { below })
}

/// Total effective X the pool absorbs before running out of ticks.
fn x_capacity(pool: &ClmmPool) -> f64 {
    let Some(tick) = pool.tick_for(Direction::XToY) else {
        return 0.0;
    };
    let mut total = pool.capacity_to_boundary(Direction::XToY).unwrap_or(0.0);
    for i in (0..tick).rev() {
        let (lo, hi) = pool.sqrt_bounds(i);
        total += pool.liquidities()[i] * (hi - lo) / (lo * hi);
    }
    total
}
