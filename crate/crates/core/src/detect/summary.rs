use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::CandidateTriple;
use crate::error::{Error, Result};
use crate::stats::{pearson, Spread};

/// Per-chain summary of matched triples. Fields are `None` when the chain
/// has too few triples (or no PnL context) to compute them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSummary {
    pub chain: String,
    pub count: usize,
    pub front: Option<Spread>,
    /// Aggregated victim input per triple.
    pub victim: Option<Spread>,
    pub back: Option<Spread>,
    pub strong_signature_share: Option<f64>,
    pub size_ratio: Option<Spread>,
    pub corr_victim_front: Option<f64>,
    pub corr_victim_back: Option<f64>,
    pub corr_front_back: Option<f64>,
    /// Number of triples with PnL available.
    pub pnl_count: usize,
    pub pnl_gross: Option<Spread>,
    pub pnl_net_slippage: Option<Spread>,
    pub pnl_net: Option<Spread>,
}

fn summarize(chain: &str, triples: &[&CandidateTriple]) -> ChainSummary {
    let fronts: Vec<f64> = triples.iter().map(|t| t.front.amount_in_usd).collect();
    let victims: Vec<f64> = triples.iter().map(|t| t.victim_volume()).collect();
    let backs: Vec<f64> = triples.iter().map(|t| t.back.amount_in_usd).collect();
    let ratios: Vec<f64> = triples.iter().filter_map(|t| t.metrics.size_ratio).collect();
    let pnl: Vec<_> = triples.iter().filter_map(|t| t.metrics.pnl).collect();
    let strong = triples.iter().filter(|t| t.metrics.strong_signature).count();
    let pnl_spread = |f: fn(&super::PnlBreakdown) -> f64| Spread::of(&pnl.iter().map(f).collect::<Vec<_>>());
    ChainSummary {
        chain: chain.to_string(),
        count: triples.len(),
        front: Spread::of(&fronts),
        victim: Spread::of(&victims),
        back: Spread::of(&backs),
        strong_signature_share: (!triples.is_empty()).then(|| strong as f64 / triples.len() as f64),
        size_ratio: Spread::of(&ratios),
        corr_victim_front: pearson(&victims, &fronts),
        corr_victim_back: pearson(&victims, &backs),
        corr_front_back: pearson(&fronts, &backs),
        pnl_count: pnl.len(),
        pnl_gross: pnl_spread(|p| p.gross),
        pnl_net_slippage: pnl_spread(|p| p.net_slippage),
        pnl_net: pnl_spread(|p| p.net),
    }
}

/// One row per chain, sorted by chain name. Chains listed in `chains`
/// appear even without triples.
pub fn summary_stats(triples: &[CandidateTriple], chains: &[String]) -> Vec<ChainSummary> {
    let mut by_chain: BTreeMap<&str, Vec<&CandidateTriple>> = BTreeMap::new();
    for c in chains {
        by_chain.entry(c.as_str()).or_default();
    }
    for t in triples {
        by_chain.entry(t.front.chain.as_str()).or_default().push(t);
    }
    by_chain.into_iter().map(|(c, ts)| summarize(c, &ts)).collect()
}

const SUMMARY_COLUMNS: [&str; 20] = [
    "chain",
    "count",
    "front_median",
    "front_iqr",
    "victim_median",
    "victim_iqr",
    "back_median",
    "back_iqr",
    "strong_signature_share",
    "ratio_median",
    "ratio_iqr",
    "corr_victim_front",
    "corr_victim_back",
    "corr_front_back",
    "pnl_gross_median",
    "pnl_gross_iqr",
    "pnl_net_slippage_median",
    "pnl_net_slippage_iqr",
    "pnl_net_median",
    "pnl_net_iqr",
];

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

impl ChainSummary {
    fn cells(&self) -> Vec<String> {
        let med = |s: &Option<Spread>| cell(s.map(|s| s.median));
        let iqr = |s: &Option<Spread>| cell(s.map(|s| s.iqr()));
        vec![
            self.chain.clone(),
            self.count.to_string(),
            med(&self.front),
            iqr(&self.front),
            med(&self.victim),
            iqr(&self.victim),
            med(&self.back),
            iqr(&self.back),
            cell(self.strong_signature_share),
            med(&self.size_ratio),
            iqr(&self.size_ratio),
            cell(self.corr_victim_front),
            cell(self.corr_victim_back),
            cell(self.corr_front_back),
            med(&self.pnl_gross),
            iqr(&self.pnl_gross),
            med(&self.pnl_net_slippage),
            iqr(&self.pnl_net_slippage),
            med(&self.pnl_net),
            iqr(&self.pnl_net),
        ]
    }
}

/// CSV with a header row; unavailable values are empty cells.
pub fn summary_csv(rows: &[ChainSummary]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SUMMARY_COLUMNS).map_err(csv_err)?;
    for r in rows {
        w.write_record(r.cells()).map_err(csv_err)?;
    }
    into_string(w)
}

/// Markdown table; unavailable values are shown as `n/a`.
pub fn summary_markdown(rows: &[ChainSummary]) -> String {
    let mut out = String::new();
    out.push_str(&format!("| {} |\n", SUMMARY_COLUMNS.join(" | ")));
    out.push_str(&format!("|{}\n", "---|".repeat(SUMMARY_COLUMNS.len())));
    for r in rows {
        let cells: Vec<String> = r
            .cells()
            .into_iter()
            .map(|c| if c.is_empty() { "n/a".into() } else { c })
            .collect();
        out.push_str(&format!("| {} |\n", cells.join(" | ")));
    }
    out
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn into_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

/// Transactions sent by one actor on one day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TxCountRow {
    pub chain: String,
    pub actor_id: String,
    pub day: String,
    pub tx_count: u64,
}

pub fn read_tx_counts<R: Read>(reader: R) -> Result<Vec<TxCountRow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    rdr.deserialize()
        .map(|r| {
            r.map_err(|e: csv::Error| Error::Parse {
                line: e.position().map(|p| p.line() as usize).unwrap_or(0),
                message: e.to_string(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActorEfficiency {
    pub chain: String,
    pub actor_id: String,
    pub sandwiches: usize,
    /// `None` when the actor has no transaction counts.
    pub total_tx: Option<u64>,
    pub days: usize,
    pub daily_tx_avg: Option<f64>,
    /// Sandwiches over total transactions; `None` for missing or zero counts.
    pub efficiency: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMedMax {
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

impl MinMedMax {
    fn of(values: &[f64]) -> Option<MinMedMax> {
        let s = Spread::of(values)?;
        Some(MinMedMax {
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            median: s.median,
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainBotSummary {
    pub chain: String,
    /// Actors with at least one sandwich.
    pub bots: usize,
    pub sandwiches: Option<MinMedMax>,
    pub daily_tx_avg: Option<MinMedMax>,
    pub efficiency: Option<MinMedMax>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyReport {
    pub actors: Vec<ActorEfficiency>,
    pub chains: Vec<ChainBotSummary>,
}

/// Sandwich share of each actor's transactions, plus per-chain spreads
/// over the actors that sandwiched.
pub fn bot_efficiency(triples: &[CandidateTriple], tx_counts: &[TxCountRow]) -> EfficiencyReport {
    let key = |chain: &str, actor: &str| (chain.to_string(), super::normalize(actor));
    let mut sandwiches: BTreeMap<(String, String), usize> = BTreeMap::new();
    for t in triples {
        *sandwiches.entry(key(&t.front.chain, &t.actor_id)).or_default() += 1;
    }
    let mut counts: BTreeMap<(String, String), (u64, std::collections::BTreeSet<&str>)> =
        BTreeMap::new();
    for row in tx_counts {
        let e = counts.entry(key(&row.chain, &row.actor_id)).or_default();
        e.0 += row.tx_count;
        e.1.insert(row.day.as_str());
    }

    let mut actors = Vec::new();
    let all_keys: std::collections::BTreeSet<_> = sandwiches.keys().chain(counts.keys()).cloned().collect();
    for (chain, actor_id) in all_keys {
        let n = sandwiches.get(&(chain.clone(), actor_id.clone())).copied().unwrap_or(0);
        let c = counts.get(&(chain.clone(), actor_id.clone()));
        if c.is_none() {
            log::warn!("no transaction counts for actor {actor_id} on {chain}");
        }
        let total_tx = c.map(|c| c.0);
        let days = c.map(|c| c.1.len()).unwrap_or(0);
        actors.push(ActorEfficiency {
            chain,
            actor_id,
            sandwiches: n,
            total_tx,
            days,
            daily_tx_avg: total_tx.filter(|_| days > 0).map(|t| t as f64 / days as f64),
            efficiency: total_tx.filter(|&t| t > 0).map(|t| n as f64 / t as f64),
        });
    }

    let mut by_chain: BTreeMap<&str, Vec<&ActorEfficiency>> = BTreeMap::new();
    for a in actors.iter().filter(|a| a.sandwiches > 0) {
        by_chain.entry(a.chain.as_str()).or_default().push(a);
    }
    let chains = by_chain
        .into_iter()
        .map(|(chain, bots)| {
            let s: Vec<f64> = bots.iter().map(|a| a.sandwiches as f64).collect();
            let d: Vec<f64> = bots.iter().filter_map(|a| a.daily_tx_avg).collect();
            let e: Vec<f64> = bots.iter().filter_map(|a| a.efficiency).collect();
            ChainBotSummary {
                chain: chain.to_string(),
                bots: bots.len(),
                sandwiches: MinMedMax::of(&s),
                daily_tx_avg: MinMedMax::of(&d),
                efficiency: MinMedMax::of(&e),
            }
        })
        .collect();
    EfficiencyReport { actors, chains }
}

pub fn efficiency_csv(report: &EfficiencyReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "chain",
        "actor_id",
        "sandwiches",
        "total_tx",
        "days",
        "daily_tx_avg",
        "efficiency",
    ])
    .map_err(csv_err)?;
    for a in &report.actors {
        w.write_record([
            a.chain.clone(),
            a.actor_id.clone(),
            a.sandwiches.to_string(),
            a.total_tx.map(|t| t.to_string()).unwrap_or_default(),
            a.days.to_string(),
            cell(a.daily_tx_avg),
            cell(a.efficiency),
        ])
        .map_err(csv_err)?;
    }
    into_string(w)
}

/// Counts of positive values per decade `[10^k, 10^(k+1))` for
/// `k = lo..hi`, with values below `10^lo` in the first bin and at or above
/// `10^hi` in the last. Zeros go to the first bin.
pub fn log10_histogram(values: &[f64], lo: i32, hi: i32) -> Vec<(i32, usize)> {
    let mut bins: Vec<(i32, usize)> = (lo..hi).map(|k| (k, 0)).collect();
    if bins.is_empty() {
        return bins;
    }
    let last = bins.len() - 1;
    for &v in values {
        let k = if v > 0.0 { v.log10().floor() as i32 } else { lo };
        let i = (k - lo).clamp(0, last as i32) as usize;
        bins[i].1 += 1;
    }
    bins
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detect::{tests::event, PnlBreakdown, TripleMetrics};

    fn triple(chain: &str, actor: &str, f: f64, v: &[f64], b: f64) -> CandidateTriple {
        let mk = |x: f64| {
            let mut e = event(actor, actor, 0);
            e.chain = chain.into();
            e.amount_in_usd = x;
            e
        };
        CandidateTriple {
            actor_id: actor.into(),
            front: mk(f),
            victims: v.iter().map(|&x| mk(x)).collect(),
            back: mk(b),
            metrics: TripleMetrics {
                size_ratio: (f > 0.0).then(|| b / f),
                strong_signature: super::super::strong_signature(f, b, 0.1),
                gas_usd: 0.45,
                pnl: Some(PnlBreakdown {
                    gross: f * 1e-6,
                    net_slippage: 0.0,
                    net: -f * 1e-3,
                }),
            },
        }
    }

    #[test]
    fn degenerate_perfect_matching() {
        let ts: Vec<_> = [100.0, 250.0, 400.0]
            .iter()
            .map(|&x| triple("base", "a", x, &[x * 3.0], x))
            .collect();
        let s = &summary_stats(&ts, &[])[0];
        assert_eq!(s.strong_signature_share, Some(1.0));
        assert_eq!(s.size_ratio.unwrap().median, 1.0);
        assert!((s.corr_front_back.unwrap() - 1.0).abs() < 1e-15);
    }

    // Medians and quartiles worked by hand on five triples.
    #[test]
    fn five_triple_fixture() {
        let ts = vec![
            triple("base", "a", 100.0, &[50.0, 150.0], 100.0),
            triple("base", "a", 300.0, &[400.0], 330.0),
            triple("base", "b", 200.0, &[100.0], 260.0),
            triple("base", "c", 500.0, &[1000.0], 450.0),
            triple("base", "c", 400.0, &[300.0, 300.0], 400.0),
        ];
        let s = &summary_stats(&ts, &[])[0];
        assert_eq!(s.count, 5);
        let front = s.front.unwrap();
        assert_eq!((front.q1, front.median, front.q3), (200.0, 300.0, 400.0));
        let victim = s.victim.unwrap();
        assert_eq!((victim.q1, victim.median, victim.q3), (200.0, 400.0, 600.0));
        let back = s.back.unwrap();
        assert_eq!((back.q1, back.median, back.q3), (260.0, 330.0, 400.0));
        // ratios 1.0, 1.1, 1.3, 0.9, 1.0 → 4 of 5 within 10%
        assert_eq!(s.strong_signature_share, Some(0.8));
        assert!((s.size_ratio.unwrap().median - 1.0).abs() < 1e-15);
        assert_eq!(s.pnl_count, 5);
        assert!((s.pnl_net.unwrap().median + 0.3).abs() < 1e-15);
    }

    #[test]
    fn empty_and_single_chains() {
        let ts = vec![triple("base", "a", 100.0, &[50.0], 100.0)];
        let rows = summary_stats(&ts, &["arbitrum".into(), "base".into()]);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].chain, "arbitrum");
        assert_eq!(rows[0].count, 0);
        assert!(rows[0].front.is_none() && rows[0].strong_signature_share.is_none());
        assert!(rows[1].corr_front_back.is_none());

        let csv = summary_csv(&rows).unwrap();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().nth(1).unwrap().starts_with("arbitrum,0,,"));
        let md = summary_markdown(&rows);
        assert!(md.contains("| arbitrum | 0 | n/a"));
    }

    #[test]
    fn efficiency_examples() {
        let ts: Vec<_> = (0..5).map(|_| triple("base", "0xbot", 100.0, &[50.0], 100.0)).collect();
        let counts = vec![
            TxCountRow { chain: "base".into(), actor_id: "0xBOT".into(), day: "d1".into(), tx_count: 4000 },
            TxCountRow { chain: "base".into(), actor_id: "0xbot".into(), day: "d2".into(), tx_count: 6000 },
            TxCountRow { chain: "base".into(), actor_id: "0xidle".into(), day: "d1".into(), tx_count: 10 },
            TxCountRow { chain: "base".into(), actor_id: "0xzero".into(), day: "d1".into(), tx_count: 0 },
        ];
        let r = bot_efficiency(&ts, &counts);
        let find = |id: &str| r.actors.iter().find(|a| a.actor_id == id).unwrap();
        assert_eq!(find("0xbot").efficiency, Some(5e-4));
        assert_eq!(find("0xbot").daily_tx_avg, Some(5000.0));
        assert_eq!(find("0xidle").efficiency, Some(0.0));
        assert_eq!(find("0xzero").efficiency, None);
        assert_eq!(r.chains.len(), 1);
        assert_eq!(r.chains[0].bots, 1);

        let missing = bot_efficiency(&ts, &[]);
        assert_eq!(missing.actors[0].total_tx, None);
        assert_eq!(missing.actors[0].efficiency, None);
    }

    #[test]
    fn histogram_bins() {
        let h = log10_histogram(&[1e-5, 3e-4, 5e-4, 2e-3, 0.5, 0.0], -4, 0);
        assert_eq!(h, vec![(-4, 4), (-3, 1), (-2, 0), (-1, 1)]);
    }

    #[test]
    fn tx_counts_csv() {
        let rows = read_tx_counts("chain,actor_id,day,tx_count\nbase,0xa,2025-01-01,12\n".as_bytes()).unwrap();
        assert_eq!(rows[0].tx_count, 12);
        assert!(read_tx_counts("chain,actor_id,day,tx_count\nbase,0xa,d,x\n".as_bytes()).is_err());
    }
}
