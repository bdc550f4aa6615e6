use std::collections::{BTreeMap, BTreeSet};

use super::SwapEvent;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ArbitrageFilter {
    pub kept: Vec<SwapEvent>,
    /// `(chain, tx_hash)` of every removed transaction.
    pub removed_txs: Vec<(String, String)>,
    pub removed_events: usize,
    /// Multi-leg transactions passed through because a leg lacked tokens.
    pub malformed_txs: usize,
}

/// True when the directed token graph `token_in → token_out` over `legs`
/// contains a cycle, i.e. some subset of legs chains each output into the
/// next input and returns to the starting token.
pub fn has_token_cycle<S: AsRef<str>>(legs: &[(S, S)]) -> bool {
    let mut index: BTreeMap<&str, usize> = BTreeMap::new();
    for (a, b) in legs {
        let n = index.len();
        index.entry(a.as_ref()).or_insert(n);
        let n = index.len();
        index.entry(b.as_ref()).or_insert(n);
    }
    let n = index.len();
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut indegree = vec![0usize; n];
    for (a, b) in legs {
        let (i, j) = (index[a.as_ref()], index[b.as_ref()]);
        out[i].push(j);
        indegree[j] += 1;
    }
    // Kahn: a cycle exists iff some node is never released.
    let mut ready: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut released = 0;
    while let Some(i) = ready.pop() {
        released += 1;
        for &j in &out[i] {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                ready.push(j);
            }
        }
    }
    released < n
}

/// Drops every transaction whose swap legs form a closed token cycle.
pub fn filter_atomic_arbitrage(events: Vec<SwapEvent>) -> ArbitrageFilter {
    let mut by_tx: BTreeMap<(String, u64, String), Vec<usize>> = BTreeMap::new();
    for (i, e) in events.iter().enumerate() {
        by_tx
            .entry((e.chain.clone(), e.block_number, e.tx_hash.clone()))
            .or_default()
            .push(i);
    }
    let mut drop: BTreeSet<usize> = BTreeSet::new();
    let mut result = ArbitrageFilter::default();
    for ((chain, _, tx), idx) in &by_tx {
        let legs: Option<Vec<(&str, &str)>> = idx
            .iter()
            .map(|&i| {
                let e = &events[i];
                Some((e.token_in.as_deref()?, e.token_out.as_deref()?))
            })
            .collect();
        match legs {
            Some(legs) => {
                if has_token_cycle(&legs) {
                    drop.extend(idx.iter().copied());
                    result.removed_txs.push((chain.clone(), tx.clone()));
                }
            }
            None if idx.len() > 1 => {
                log::warn!("transaction {tx} on {chain} has legs without tokens; not checked for arbitrage");
                result.malformed_txs += 1;
            }
            None => {}
        }
    }
    result.removed_events = drop.len();
    result.kept = events
        .into_iter()
        .enumerate()
        .filter(|(i, _)| !drop.contains(i))
        .map(|(_, e)| e)
        .collect();
    result
}
