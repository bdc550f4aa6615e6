use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::{AttackerStrategy, CoInclusionReport, KSampler, Method, Policy, SequencerConfig, TipSampler};
use crate::error::{Error, Result};

/// Trials per independently seeded chunk. Chunk `c` draws from stream `c`
/// of the seeded generator, so results do not depend on the thread count.
pub const MC_CHUNK_TRIALS: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Back,
    Victim,
    Background,
    Front,
}

#[derive(Debug, Clone, Copy)]
struct Tx {
    arrival: f64,
    tip: f64,
    role: Role,
}

// Full ties go against the attacker: the backrun wins a tie with the victim
// and the victim wins a tie with the frontrun.
fn tie_rank(role: Role) -> u8 {
    match role {
        Role::Back => 0,
        Role::Victim | Role::Background => 1,
        Role::Front => 2,
    }
}

fn order(policy: Policy, a: &Tx, b: &Tx) -> Ordering {
    let by_arrival = a.arrival.total_cmp(&b.arrival);
    let by_tip = b.tip.total_cmp(&a.tip);
    match policy {
        Policy::Fcfs => by_arrival.then(by_tip),
        Policy::Pga => by_tip.then(by_arrival),
    }
    .then(tie_rank(a.role).cmp(&tie_rank(b.role)))
}

#[derive(Debug, Default, Clone, Copy)]
struct Tally {
    batch: u64,
    priority: u64,
    arrival: u64,
    all: u64,
}

impl Tally {
    fn add(self, o: Tally) -> Tally {
        Tally {
            batch: self.batch + o.batch,
            priority: self.priority + o.priority,
            arrival: self.arrival + o.arrival,
            all: self.all + o.all,
        }
    }
}

struct Samplers {
    background_tip: TipSampler,
    victim_tip: TipSampler,
    batch_size: KSampler,
    latency: Normal<f64>,
}

fn run_chunk(
    strategy: &AttackerStrategy,
    config: &SequencerConfig,
    samplers: &Samplers,
    seed: u64,
    chunk: u64,
    trials: u64,
) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let window = config.batch_window;
    let delay = match config.policy {
        Policy::Fcfs => strategy.delay,
        Policy::Pga => 0.0,
    };
    let mut tally = Tally::default();
    for _ in 0..trials {
        let t_front = rng.random_range(0.0..window);
        let t_back = t_front + delay;
        let in_batch = t_back < window;

        let z1 = samplers.latency.sample(&mut rng);
        let z2 = samplers.latency.sample(&mut rng);
        let arrival_ok = z1 * z1 + z2 * z2 >= delay * delay;

        let t_victim = if delay > 0.0 {
            rng.random_range(t_front..t_back)
        } else {
            t_front
        };
        let front = Tx {
            arrival: t_front,
            tip: strategy.tip_front,
            role: Role::Front,
        };
        let back = Tx {
            arrival: t_back,
            tip: strategy.tip_back,
            role: Role::Back,
        };
        let victim = Tx {
            arrival: t_victim,
            tip: samplers.victim_tip.sample(&mut rng),
            role: Role::Victim,
        };

        let before = |a: &Tx, b: &Tx| order(config.policy, a, b) == Ordering::Less;
        // FCFS places the victim between the legs by construction; with
        // Δ = 0 that is the Δ → 0⁺ limit, not a three-way arrival tie.
        let mut ordered = match config.policy {
            Policy::Fcfs => true,
            Policy::Pga => before(&front, &victim) && before(&victim, &back),
        };
        let k = samplers.batch_size.sample(&mut rng);
        for _ in 0..k {
            let g = Tx {
                arrival: rng.random_range(0.0..window),
                tip: samplers.background_tip.sample(&mut rng),
                role: Role::Background,
            };
            if before(&front, &g) && before(&g, &back) {
                ordered = false;
            }
        }

        tally.batch += in_batch as u64;
        tally.priority += ordered as u64;
        tally.arrival += arrival_ok as u64;
        tally.all += (in_batch && ordered && arrival_ok) as u64;
    }
    tally
}

/// Monte Carlo estimate of co-inclusion.
///
/// Each trial places the frontrun uniformly in a batch window anchored at
/// zero, the backrun `Δ` later (`Δ = 0` under PGA) and the victim uniformly
/// between them. The batch holds `K` background transactions at uniform
/// times with tips from G. A trial succeeds when both legs share the batch,
/// the policy orders front, victim, back with no background in between,
/// and the arrival check passes: two latency draws `z₁, z₂ ~ N(0, σ²)`
/// satisfy `z₁² + z₂² ≥ Δ²`, an event of probability `exp(-Δ²/(2σ²))`.
///
/// Components are reported as marginal frequencies and `p_co_inclusion` as
/// the joint frequency with its binomial standard error.
pub fn simulate_co_inclusion(
    strategy: &AttackerStrategy,
    config: &SequencerConfig,
    trials: u64,
    seed: u64,
) -> Result<CoInclusionReport> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    strategy.validate()?;
    config.validate()?;
    let samplers = Samplers {
        background_tip: config.tip_distribution.sampler()?,
        victim_tip: strategy.victim_tip_prior.sampler()?,
        batch_size: config.batch_size_model.sampler(config.expected_batch_size())?,
        latency: Normal::new(0.0, config.latency_std)
            .map_err(|e| Error::InvalidInput(e.to_string()))?,
    };
    let chunks = trials.div_ceil(MC_CHUNK_TRIALS);
    let tallies: Vec<Tally> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let n = MC_CHUNK_TRIALS.min(trials - c * MC_CHUNK_TRIALS);
            run_chunk(strategy, config, &samplers, seed, c, n)
        })
        .collect();
    let total = tallies.into_iter().fold(Tally::default(), Tally::add);

    let n = trials as f64;
    let p = total.all as f64 / n;
    Ok(CoInclusionReport {
        policy: config.policy,
        p_batch: total.batch as f64 / n,
        p_priority: total.priority as f64 / n,
        p_arrival: total.arrival as f64 / n,
        p_co_inclusion: p,
        method: Method::MonteCarlo,
        std_error: Some((p * (1.0 - p) / n).sqrt()),
        trials: Some(trials),
        structurally_invalid: config.policy == Policy::Pga
            && strategy.tip_front <= strategy.tip_back,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::{co_inclusion, BatchSizeModel, TipDistribution};

    fn config(policy: Policy, rate: f64, window: f64) -> SequencerConfig {
        SequencerConfig {
            policy,
            block_time: 0.25,
            batch_window: window,
            latency_std: 0.05,
            background_rate: rate,
            tip_distribution: TipDistribution::default(),
            batch_size_model: BatchSizeModel::default(),
        }
    }

    fn strategy(delay: f64, tf: f64, tb: f64, prior: TipDistribution) -> AttackerStrategy {
        AttackerStrategy {
            delay,
            tip_front: tf,
            tip_back: tb,
            victim_tip_prior: prior,
        }
    }

    fn within_3se(sim: &CoInclusionReport, analytic: f64) -> bool {
        (sim.p_co_inclusion - analytic).abs() <= 3.0 * sim.std_error.unwrap()
    }

    #[test]
    fn nothing_interferes() {
        let s = strategy(0.0, 3.0, 1.0, TipDistribution::Point { value: 2.0 });
        for policy in [Policy::Fcfs, Policy::Pga] {
            let r = simulate_co_inclusion(&s, &config(policy, 0.0, 0.5), 1000, 1).unwrap();
            assert_eq!(r.p_co_inclusion, 1.0);
            assert_eq!(r.std_error, Some(0.0));
        }
    }

    #[test]
    fn fcfs_ignores_tips_at_zero_delay() {
        let s = strategy(0.0, 1.0, 1.0, TipDistribution::default());
        let r = simulate_co_inclusion(&s, &config(Policy::Fcfs, 0.0, 0.5), 1000, 1).unwrap();
        assert_eq!(r.p_co_inclusion, 1.0);
    }

    #[test]
    fn zero_trials_rejected() {
        let s = strategy(0.0, 3.0, 1.0, TipDistribution::default());
        assert!(matches!(
            simulate_co_inclusion(&s, &config(Policy::Fcfs, 1.0, 0.5), 0, 1),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn fcfs_agrees_with_analytic() {
        // λ=4, Δ=0.2, T_s=0.5 is ~9e-5: use a milder delay for power
        let s = strategy(0.05, 1.0, 0.5, TipDistribution::default());
        let cfg = config(Policy::Fcfs, 4.0, 0.5);
        let sim = simulate_co_inclusion(&s, &cfg, 200_000, 11).unwrap();
        let analytic = co_inclusion(&s, &cfg).unwrap().p_co_inclusion;
        assert!(within_3se(&sim, analytic), "{} vs {analytic}", sim.p_co_inclusion);
    }

    #[test]
    fn pga_point_victim_agrees_with_analytic() {
        let s = strategy(0.0, 2.0, 0.5, TipDistribution::Point { value: 1.0 });
        let mut cfg = config(Policy::Pga, 3.0, 1.0);
        cfg.batch_size_model = BatchSizeModel::Poisson { mean: Some(3.0) };
        let sim = simulate_co_inclusion(&s, &cfg, 1_000_000, 5).unwrap();
        let analytic = co_inclusion(&s, &cfg).unwrap().p_co_inclusion;
        assert!(within_3se(&sim, analytic), "{} vs {analytic}", sim.p_co_inclusion);
    }

    #[test]
    fn same_seed_same_report() {
        let s = strategy(0.08, 1.0, 0.5, TipDistribution::default());
        let cfg = config(Policy::Fcfs, 3.0, 0.6);
        let a = simulate_co_inclusion(&s, &cfg, 20_000, 99).unwrap();
        let b = simulate_co_inclusion(&s, &cfg, 20_000, 99).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let c = simulate_co_inclusion(&s, &cfg, 20_000, 100).unwrap();
        assert_ne!(a.p_co_inclusion, c.p_co_inclusion);
    }

    #[test]
    fn independent_of_thread_count() {
        let s = strategy(0.08, 1.0, 0.5, TipDistribution::default());
        let cfg = config(Policy::Fcfs, 3.0, 0.6);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| simulate_co_inclusion(&s, &cfg, 50_000, 3).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn equal_tips_fail_under_pga() {
        let s = strategy(0.0, 1.0, 0.5, TipDistribution::Point { value: 1.0 });
        let r = simulate_co_inclusion(&s, &config(Policy::Pga, 0.0, 0.5), 100, 1).unwrap();
        assert_eq!(r.p_co_inclusion, 0.0);
    }
}
