use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::pnl::PnlBreakdown;
use super::registry::normalize;
use super::SwapEvent;

/// Backrun within this relative distance of the frontrun's size.
pub const STRONG_SIGNATURE_TOLERANCE: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroupKey {
    pub chain: String,
    pub block_number: u64,
    pub pool_address: String,
    /// Set only for router-style pools.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub currency_pair: Option<String>,
}

impl GroupKey {
    pub fn of(event: &SwapEvent) -> GroupKey {
        GroupKey {
            chain: event.chain.clone(),
            block_number: event.block_number,
            pool_address: normalize(&event.pool_address),
            currency_pair: event
                .is_router_pool
                .then(|| event.currency_pair.as_deref().map(normalize))
                .flatten(),
        }
    }
}

/// A swap with its resolved initiator.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributedEvent {
    pub event: SwapEvent,
    pub actor_id: String,
}

/// Groups by `(chain, block, pool[, currency_pair])`, members in canonical
/// order.
pub fn partition(events: Vec<AttributedEvent>) -> BTreeMap<GroupKey, Vec<AttributedEvent>> {
    let mut groups: BTreeMap<GroupKey, Vec<AttributedEvent>> = BTreeMap::new();
    for e in events {
        groups.entry(GroupKey::of(&e.event)).or_default().push(e);
    }
    for members in groups.values_mut() {
        members.sort_by(|a, b| {
            a.event
                .canonical_key()
                .cmp(&b.event.canonical_key())
                .then_with(|| a.actor_id.cmp(&b.actor_id))
        });
    }
    groups
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleMetrics {
    /// Backrun over frontrun input size; absent for a zero-sized frontrun.
    pub size_ratio: Option<f64>,
    pub strong_signature: bool,
    pub gas_usd: f64,
    /// Absent when no pool snapshot covers the triple.
    pub pnl: Option<PnlBreakdown>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateTriple {
    pub actor_id: String,
    pub front: SwapEvent,
    pub victims: Vec<SwapEvent>,
    pub back: SwapEvent,
    pub metrics: TripleMetrics,
}

impl CandidateTriple {
    pub fn key(&self) -> GroupKey {
        GroupKey::of(&self.front)
    }

    pub fn victim_volume(&self) -> f64 {
        self.victims.iter().map(|v| v.amount_in_usd).sum()
    }
}

/// `|back - front| / front ≤ tolerance`; false for a zero-sized front.
pub fn strong_signature(front: f64, back: f64, tolerance: f64) -> bool {
    front > 0.0 && (back - front).abs() / front <= tolerance
}

/// A matched front/victims/back before metrics are attached.
#[derive(Debug, Clone, PartialEq)]
pub struct Match {
    pub front: usize,
    pub victims: Vec<usize>,
    pub back: usize,
}

/// Matches sandwiches inside one canonically ordered group.
///
/// Each swap `b` is paired with the actor's nearest earlier swap in the
/// opposite direction, `f`. Victims are the other actors' swaps between
/// them in `f`'s direction. A pair is emitted only with at least one
/// victim, and a swap is used as front or back at most once.
pub fn find_triples(group: &[AttributedEvent]) -> Vec<Match> {
    let mut used: HashSet<usize> = HashSet::new();
    let mut latest: HashMap<(&str, super::Direction), usize> = HashMap::new();
    let mut out = Vec::new();
    for (j, b) in group.iter().enumerate() {
        let opposite = (b.actor_id.as_str(), b.event.direction.reverse());
        if let Some(&i) = latest.get(&opposite) {
            if !used.contains(&i) && !used.contains(&j) {
                let f = &group[i];
                let victims: Vec<usize> = (i + 1..j)
                    .filter(|&k| {
                        group[k].actor_id != f.actor_id && group[k].event.direction == f.event.direction
                    })
                    .collect();
                if !victims.is_empty() {
                    used.insert(i);
                    used.insert(j);
                    out.push(Match {
                        front: i,
                        victims,
                        back: j,
                    });
                }
            }
        }
        latest.insert((b.actor_id.as_str(), b.event.direction), j);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amm::Direction::{XToY, YToX};
    use crate::amm::Direction;
    use crate::detect::tests::event;

    fn at(actor: &str, dir: Direction, index: u32) -> AttributedEvent {
        let mut e = event(actor, actor, index);
        e.direction = dir;
        AttributedEvent {
            event: e,
            actor_id: actor.into(),
        }
    }

    #[test]
    fn canonical_pattern() {
        let g = [at("a", XToY, 0), at("b", XToY, 1), at("a", YToX, 2)];
        assert_eq!(
            find_triples(&g),
            vec![Match {
                front: 0,
                victims: vec![1],
                back: 2
            }]
        );
    }

    #[test]
    fn victim_direction_mismatch() {
        let g = [at("a", XToY, 0), at("b", YToX, 1), at("a", YToX, 2)];
        assert!(find_triples(&g).is_empty());
    }

    #[test]
    fn victim_shares_actor() {
        let g = [at("a", XToY, 0), at("a", XToY, 1), at("a", YToX, 2)];
        assert!(find_triples(&g).is_empty());
    }

    #[test]
    fn short_groups_are_empty() {
        assert!(find_triples(&[at("a", XToY, 0), at("a", YToX, 1)]).is_empty());
        assert!(find_triples(&[]).is_empty());
    }

    #[test]
    fn nearest_front_wins_and_is_used_once() {
        // a's second X->Y is nearest to the back; the first stays unused
        let g = [
            at("a", XToY, 0),
            at("b", XToY, 1),
            at("a", XToY, 2),
            at("c", XToY, 3),
            at("a", YToX, 4),
            at("a", YToX, 5),
        ];
        let m = find_triples(&g);
        assert_eq!(m.len(), 1);
        assert_eq!((m[0].front, m[0].victims.clone(), m[0].back), (2, vec![3], 4));
    }

    #[test]
    fn multiple_victims_and_bystanders() {
        let g = [
            at("a", XToY, 0),
            at("b", XToY, 1),
            at("c", YToX, 2),
            at("d", XToY, 3),
            at("a", YToX, 4),
        ];
        assert_eq!(find_triples(&g)[0].victims, vec![1, 3]);
    }

    #[test]
    fn reverse_orientation_sandwich() {
        let g = [at("a", YToX, 0), at("b", YToX, 1), at("a", XToY, 2)];
        assert_eq!(find_triples(&g).len(), 1);
    }

    #[test]
    fn strong_signature_examples() {
        assert!(strong_signature(1000.0, 1050.0, 0.1));
        assert!(!strong_signature(1000.0, 1200.0, 0.1));
        assert!(strong_signature(1000.0, 900.0, 0.1));
        assert!(!strong_signature(0.0, 0.0, 0.1));
    }

    #[test]
    fn partition_keys() {
        let mut a = event("x", "x", 0);
        let mut b = event("x", "x", 1);
        b.pool_address = "0xother".into();
        assert_eq!(partition(vec![wrap(a.clone()), wrap(b.clone())]).len(), 2);

        a.is_router_pool = true;
        a.currency_pair = Some("WETH/USDC".into());
        b.pool_address = a.pool_address.clone();
        b.is_router_pool = true;
        b.currency_pair = Some("WETH/DAI".into());
        assert_eq!(partition(vec![wrap(a.clone()), wrap(b.clone())]).len(), 2);

        b.currency_pair = a.currency_pair.clone();
        b.block_number += 1;
        assert_eq!(partition(vec![wrap(a), wrap(b)]).len(), 2);
    }

    #[test]
    fn non_router_pool_ignores_pair() {
        let mut a = event("x", "x", 0);
        let mut b = event("x", "x", 1);
        a.currency_pair = Some("A/B".into());
        b.currency_pair = Some("C/D".into());
        let groups = partition(vec![wrap(b), wrap(a)]);
        assert_eq!(groups.len(), 1);
        let members = groups.values().next().unwrap();
        assert_eq!(members[0].event.tx_index, 0);
    }

    fn wrap(event: SwapEvent) -> AttributedEvent {
        AttributedEvent {
            actor_id: event.tx_from.clone(),
            event,
        }
    }
}
