//! Central configurations for rollup-style sequencers: sub-second batches,
//! 50 ms latency jitter, a few background transactions per second and tips
//! on the scale of one unit.

use super::{AttackerStrategy, BatchSizeModel, Policy, SequencerConfig, TipDistribution};

pub const BLOCK_TIME: f64 = 0.25;
pub const LATENCY_STD: f64 = 0.05;
pub const FCFS_RATE: f64 = 2.0;
pub const FCFS_DELAY: f64 = 0.1;
pub const PGA_RATE: f64 = 4.0;
pub const PGA_TIP_FRONT: f64 = 1.5;
pub const PGA_TIP_BACK: f64 = 1.0;
/// Batch windows the central configurations are meant for, in seconds.
pub const BATCH_WINDOW_RANGE: (f64, f64) = (0.3, 0.8);

fn config(policy: Policy, rate: f64, batch_window: f64) -> SequencerConfig {
    SequencerConfig {
        policy,
        block_time: BLOCK_TIME,
        batch_window,
        latency_std: LATENCY_STD,
        background_rate: rate,
        tip_distribution: TipDistribution::Exponential { mean: 1.0 },
        batch_size_model: BatchSizeModel::Poisson { mean: None },
    }
}

fn victim_prior() -> TipDistribution {
    TipDistribution::LogNormal { mu: 0.0, sigma: 1.0 }
}

/// FCFS with a 100 ms delay between the legs.
pub fn central_fcfs(batch_window: f64) -> (SequencerConfig, AttackerStrategy) {
    (
        config(Policy::Fcfs, FCFS_RATE, batch_window),
        AttackerStrategy {
            delay: FCFS_DELAY,
            tip_front: PGA_TIP_FRONT,
            tip_back: PGA_TIP_BACK,
            victim_tip_prior: victim_prior(),
        },
    )
}

/// PGA with the legs bracketing the upper-middle of the victim prior.
pub fn central_pga(batch_window: f64) -> (SequencerConfig, AttackerStrategy) {
    (
        config(Policy::Pga, PGA_RATE, batch_window),
        AttackerStrategy {
            delay: 0.0,
            tip_front: PGA_TIP_FRONT,
            tip_back: PGA_TIP_BACK,
            victim_tip_prior: victim_prior(),
        },
    )
}
