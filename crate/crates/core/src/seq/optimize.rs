use serde::{Deserialize, Serialize};

use super::{co_inclusion, p_priority_pga, AttackerStrategy, Policy, SequencerConfig, TipDistribution};
use crate::error::{Error, Result};

/// Absolute tolerance on the optimal delay, in seconds.
pub const DELAY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayPlan {
    pub delay: f64,
    pub probability: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TipPlan {
    pub tip_front: f64,
    pub tip_back: f64,
    pub probability: f64,
}

/// Maximizes analytic FCFS co-inclusion over `Δ ∈ [0, T_s]`.
///
/// Golden-section search, then the bracket endpoints are compared against
/// the interior point since the objective need not be unimodal in general.
pub fn optimize_delay_fcfs(config: &SequencerConfig, strategy: &AttackerStrategy) -> Result<DelayPlan> {
    if config.policy != Policy::Fcfs {
        return Err(Error::InvalidInput("delay optimization requires an FCFS sequencer".into()));
    }
    config.validate()?;
    let objective = |delay: f64| -> Result<f64> {
        let s = AttackerStrategy {
            delay,
            ..strategy.clone()
        };
        co_inclusion(&s, config).map(|r| r.p_co_inclusion)
    };

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, config.batch_window);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (objective(c)?, objective(d)?);
    while b - a > DELAY_TOLERANCE {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d)?;
        }
    }
    let interior = 0.5 * (a + b);
    let mut best = DelayPlan {
        delay: 0.0,
        probability: objective(0.0)?,
    };
    for delay in [interior, config.batch_window] {
        let p = objective(delay)?;
        if p > best.probability {
            best = DelayPlan { delay, probability: p };
        }
    }
    Ok(best)
}

/// Exhaustive search over `(t_f, t_b)` pairs from `tip_grid` with
/// `t_f > t_b`. Ties go to the lower total tip.
pub fn optimize_tips_pga(
    config: &SequencerConfig,
    victim_tip_prior: &TipDistribution,
    tip_grid: &[f64],
) -> Result<TipPlan> {
    if config.policy != Policy::Pga {
        return Err(Error::InvalidInput("tip optimization requires a PGA sequencer".into()));
    }
    config.validate()?;
    if let Some(t) = tip_grid.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return Err(Error::InvalidInput(format!(
            "tip grid values must be finite and positive, got {t}"
        )));
    }
    let mut best: Option<TipPlan> = None;
    for &tip_front in tip_grid {
        for &tip_back in tip_grid {
            if tip_front <= tip_back {
                continue;
            }
            let s = AttackerStrategy {
                delay: 0.0,
                tip_front,
                tip_back,
                victim_tip_prior: victim_tip_prior.clone(),
            };
            let probability = p_priority_pga(&s, config)?.probability;
            let candidate = TipPlan {
                tip_front,
                tip_back,
                probability,
            };
            best = Some(match best {
                None => candidate,
                Some(b) if probability > b.probability => candidate,
                Some(b)
                    if probability == b.probability
                        && tip_front + tip_back < b.tip_front + b.tip_back =>
                {
                    candidate
                }
                Some(b) => b,
            });
        }
    }
    best.ok_or_else(|| Error::Infeasible("tip grid has no pair with t_f > t_b".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::{reference, BatchSizeModel};

    fn pga_config() -> SequencerConfig {
        let (mut cfg, _) = reference::central_pga(0.5);
        cfg.batch_size_model = BatchSizeModel::Poisson { mean: Some(3.0) };
        cfg
    }

    #[test]
    fn fcfs_optimum_is_zero_delay() {
        for window in [0.3, 0.5, 0.8] {
            let (cfg, s) = reference::central_fcfs(window);
            let plan = optimize_delay_fcfs(&cfg, &s).unwrap();
            assert!(plan.delay <= DELAY_TOLERANCE);
            assert_eq!(plan.probability, 1.0);
        }
    }

    #[test]
    fn fcfs_optimum_beats_grid() {
        let (cfg, s) = reference::central_fcfs(0.6);
        let plan = optimize_delay_fcfs(&cfg, &s).unwrap();
        for i in 0..=200 {
            let delay = cfg.batch_window * i as f64 / 200.0;
            let p = co_inclusion(&AttackerStrategy { delay, ..s.clone() }, &cfg)
                .unwrap()
                .p_co_inclusion;
            assert!(plan.probability >= p);
        }
        assert!((0.0..=1.0).contains(&plan.probability));
    }

    #[test]
    fn policy_mismatch_rejected() {
        let (cfg, s) = reference::central_pga(0.5);
        assert!(optimize_delay_fcfs(&cfg, &s).is_err());
        let (cfg, _) = reference::central_fcfs(0.5);
        assert!(optimize_tips_pga(&cfg, &TipDistribution::default(), &[1.0, 2.0]).is_err());
    }

    #[test]
    fn known_victim_tip() {
        let cfg = pga_config();
        let prior = TipDistribution::Point { value: 1.0 };
        let grid = [0.5, 0.9, 0.95, 1.05, 1.1, 2.0];
        let plan = optimize_tips_pga(&cfg, &prior, &grid).unwrap();
        assert_eq!((plan.tip_front, plan.tip_back), (1.05, 0.95));
        let q = (-0.95f64).exp() - (-1.05f64).exp();
        assert!((plan.probability - (-3.0 * q).exp()).abs() < 1e-15);
    }

    #[test]
    fn grid_below_victim_support() {
        let prior = TipDistribution::Point { value: 5.0 };
        let plan = optimize_tips_pga(&pga_config(), &prior, &[0.5, 1.0, 2.0]).unwrap();
        assert_eq!(plan.probability, 0.0);
        // all pairs tie at zero: lowest total wins
        assert_eq!((plan.tip_front, plan.tip_back), (1.0, 0.5));
    }

    #[test]
    fn empty_feasible_grid() {
        let prior = TipDistribution::default();
        assert!(matches!(
            optimize_tips_pga(&pga_config(), &prior, &[1.0]),
            Err(Error::Infeasible(_))
        ));
        assert!(matches!(
            optimize_tips_pga(&pga_config(), &prior, &[]),
            Err(Error::Infeasible(_))
        ));
        assert!(optimize_tips_pga(&pga_config(), &prior, &[1.0, -2.0]).is_err());
    }

    #[test]
    fn grid_optimum_dominates_every_pair() {
        let cfg = pga_config();
        let prior = TipDistribution::LogNormal { mu: 0.0, sigma: 0.5 };
        let grid: Vec<f64> = (1..=30).map(|i| i as f64 * 0.1).collect();
        let plan = optimize_tips_pga(&cfg, &prior, &grid).unwrap();
        for &tf in &grid {
            for &tb in grid.iter().filter(|&&tb| tb < tf) {
                let s = AttackerStrategy {
                    delay: 0.0,
                    tip_front: tf,
                    tip_back: tb,
                    victim_tip_prior: prior.clone(),
                };
                assert!(p_priority_pga(&s, &cfg).unwrap().probability <= plan.probability);
            }
        }
    }
}
