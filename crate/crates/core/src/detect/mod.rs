//! Sandwich detection over decoded swap events.
//!
//! The pipeline runs in five steps:
//!
//! 1. Drop atomic-arbitrage transactions, i.e. those whose legs form a
//!    closed token cycle.
//! 2. Attribute each swap to an actor. Transactions sent to a registered
//!    router or system contract belong to their sender; anything else
//!    belongs to the contract called.
//! 3. Partition by chain, block and pool. Router-style pools are further
//!    split by currency pair.
//! 4. Match front/victims/back triples inside each partition.
//! 5. Attach size and PnL metrics.
//!
//! Events are sorted canonically before matching, so the output does not
//! depend on input order or on how partitions are scheduled.

mod arbitrage;
mod event;
mod matching;
mod pnl;
mod registry;
mod summary;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use crate::amm::Direction;
pub use arbitrage::{filter_atomic_arbitrage, has_token_cycle, ArbitrageFilter};
pub use event::{read_events, EventFormat, EventLoad, SkippedRow, SwapEvent};
pub use matching::{
    find_triples, partition, strong_signature, AttributedEvent, CandidateTriple, GroupKey, Match,
    TripleMetrics, STRONG_SIGNATURE_TOLERANCE,
};
pub use pnl::{triple_pnl, PnlBreakdown, PoolContext, PoolSnapshot, SnapshotSet, DEFAULT_GAS_USD};
pub use registry::{normalize, resolve_actor_id, ActorRegistry};
pub use summary::{
    bot_efficiency, efficiency_csv, log10_histogram, read_tx_counts, summary_csv, summary_markdown,
    summary_stats, ActorEfficiency, ChainBotSummary, ChainSummary, EfficiencyReport, MinMedMax,
    TxCountRow,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectOptions {
    /// Used when neither leg carries a gas cost.
    pub default_gas_usd: f64,
    pub strong_signature_tolerance: f64,
}

impl Default for DetectOptions {
    fn default() -> Self {
        DetectOptions {
            default_gas_usd: DEFAULT_GAS_USD,
            strong_signature_tolerance: STRONG_SIGNATURE_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DetectStats {
    pub input_events: usize,
    pub arbitrage_txs_removed: usize,
    pub arbitrage_events_removed: usize,
    pub unchecked_multi_leg_txs: usize,
    /// Events dropped because they could not be attributed.
    pub unattributed_events: usize,
    pub groups: usize,
    pub triples: usize,
    pub triples_without_pnl: usize,
    /// No registry was supplied; every swap was attributed to `tx_to`.
    pub registry_fallback: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub triples: Vec<CandidateTriple>,
    pub stats: DetectStats,
}

/// Gas of whichever legs report it, else the default.
fn triple_gas(front: &SwapEvent, back: &SwapEvent, default: f64) -> f64 {
    match (front.gas_cost_usd, back.gas_cost_usd) {
        (None, None) => default,
        (f, b) => f.unwrap_or(0.0) + b.unwrap_or(0.0),
    }
}

fn build_triple(
    group: &[AttributedEvent],
    m: &Match,
    snapshots: Option<&SnapshotSet>,
    options: &DetectOptions,
) -> CandidateTriple {
    let front = group[m.front].event.clone();
    let back = group[m.back].event.clone();
    let victims: Vec<SwapEvent> = m.victims.iter().map(|&k| group[k].event.clone()).collect();
    let gas = triple_gas(&front, &back, options.default_gas_usd);
    let (vf, vb) = (front.amount_in_usd, back.amount_in_usd);
    let victim_volume: f64 = victims.iter().map(|v| v.amount_in_usd).sum();
    let pnl = snapshots
        .and_then(|s| s.lookup(&front.chain, &front.pool_address, front.block_number))
        .map(|ctx| triple_pnl(vf, victim_volume, &ctx, gas));
    CandidateTriple {
        actor_id: group[m.front].actor_id.clone(),
        metrics: TripleMetrics {
            size_ratio: (vf > 0.0).then(|| vb / vf),
            strong_signature: strong_signature(vf, vb, options.strong_signature_tolerance),
            gas_usd: gas,
            pnl,
        },
        front,
        victims,
        back,
    }
}

/// Runs the full pipeline. With `registry = None` every swap is attributed
/// to the contract it called.
pub fn detect(
    mut events: Vec<SwapEvent>,
    registry: Option<&ActorRegistry>,
    snapshots: Option<&SnapshotSet>,
    options: &DetectOptions,
) -> Detection {
    let mut stats = DetectStats {
        input_events: events.len(),
        registry_fallback: registry.is_none(),
        ..Default::default()
    };
    if registry.is_none() {
        log::warn!("no actor registry: attributing every swap to tx_to; router users will collide");
    }
    events.sort_by(|a, b| a.canonical_key().cmp(&b.canonical_key()));

    let filtered = filter_atomic_arbitrage(events);
    stats.arbitrage_txs_removed = filtered.removed_txs.len();
    stats.arbitrage_events_removed = filtered.removed_events;
    stats.unchecked_multi_leg_txs = filtered.malformed_txs;

    let empty = ActorRegistry::default();
    let registry = registry.unwrap_or(&empty);
    let mut attributed = Vec::with_capacity(filtered.kept.len());
    for event in filtered.kept {
        match resolve_actor_id(&event, registry) {
            Ok(actor_id) => attributed.push(AttributedEvent { event, actor_id }),
            Err(e) => {
                log::warn!("excluding event: {e}");
                stats.unattributed_events += 1;
            }
        }
    }

    let groups: Vec<(GroupKey, Vec<AttributedEvent>)> = partition(attributed).into_iter().collect();
    stats.groups = groups.len();
    let mut triples: Vec<CandidateTriple> = groups
        .par_iter()
        .flat_map_iter(|(_, members)| {
            find_triples(members)
                .into_iter()
                .map(|m| build_triple(members, &m, snapshots, options))
                .collect::<Vec<_>>()
        })
        .collect();
    triples.sort_by(|a, b| {
        (a.key(), a.front.tx_index, a.front.log_index).cmp(&(b.key(), b.front.tx_index, b.front.log_index))
    });
    stats.triples = triples.len();
    stats.triples_without_pnl = triples.iter().filter(|t| t.metrics.pnl.is_none()).count();
    Detection { triples, stats }
}

/// Checks the ordering, actor and direction constraints of a triple.
pub fn triple_violations(t: &CandidateTriple, registry: &ActorRegistry) -> Vec<String> {
    let mut problems = Vec::new();
    if t.victims.is_empty() {
        problems.push("no victims".to_string());
    }
    let key = t.key();
    let pos = |e: &SwapEvent| (e.tx_index, e.log_index);
    let mut last = pos(&t.front);
    for v in &t.victims {
        if pos(v) <= last {
            problems.push(format!("victim {} out of order", v.tx_hash));
        }
        last = pos(v);
    }
    if pos(&t.back) <= last {
        problems.push("back does not follow the victims".into());
    }
    for e in t.victims.iter().chain([&t.back]) {
        if GroupKey::of(e) != key {
            problems.push(format!("{} is outside the front's partition", e.tx_hash));
        }
    }
    let actor = |e: &SwapEvent| resolve_actor_id(e, registry).ok();
    if actor(&t.front).as_deref() != Some(t.actor_id.as_str())
        || actor(&t.back).as_deref() != Some(t.actor_id.as_str())
    {
        problems.push("front and back actors differ from actor_id".into());
    }
    for v in &t.victims {
        if actor(v).as_deref() == Some(t.actor_id.as_str()) {
            problems.push(format!("victim {} shares the attacker's actor", v.tx_hash));
        }
        if v.direction != t.front.direction {
            problems.push(format!("victim {} trades against the front", v.tx_hash));
        }
    }
    if t.back.direction != t.front.direction.reverse() {
        problems.push("back does not reverse the front".into());
    }
    problems
}
