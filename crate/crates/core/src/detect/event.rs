use std::io::{BufRead, Read};

use serde::{Deserialize, Serialize};

use crate::amm::Direction;
use crate::error::{Error, Result};

/// One decoded swap, with USD-denominated amounts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwapEvent {
    pub chain: String,
    pub block_number: u64,
    pub tx_hash: String,
    pub tx_index: u32,
    /// Position of the swap log within its transaction.
    #[serde(default)]
    pub log_index: u32,
    pub pool_address: String,
    /// `"TOKEN0/TOKEN1"`. Required for router-style pools, where the log
    /// carries only the router address.
    #[serde(default)]
    pub currency_pair: Option<String>,
    #[serde(default)]
    pub is_router_pool: bool,
    pub tx_from: String,
    #[serde(default)]
    pub tx_to: Option<String>,
    /// Pool-level taker. Diagnostic only; attribution uses tx_from/tx_to.
    #[serde(default)]
    pub taker: Option<String>,
    pub direction: Direction,
    /// Token symbols or addresses, needed only for the atomic-arbitrage
    /// filter.
    #[serde(default)]
    pub token_in: Option<String>,
    #[serde(default)]
    pub token_out: Option<String>,
    pub amount_in_usd: f64,
    pub amount_out_usd: f64,
    #[serde(default)]
    pub gas_cost_usd: Option<f64>,
}

impl SwapEvent {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("amount_in_usd", self.amount_in_usd),
            ("amount_out_usd", self.amount_out_usd),
        ] {
            crate::error::ensure_finite_non_negative(name, v)?;
        }
        if let Some(g) = self.gas_cost_usd {
            crate::error::ensure_finite_non_negative("gas_cost_usd", g)?;
        }
        if self.chain.is_empty() || self.tx_hash.is_empty() || self.pool_address.is_empty() {
            return Err(Error::InvalidInput(
                "chain, tx_hash and pool_address must be non-empty".into(),
            ));
        }
        if self.is_router_pool && self.currency_pair.as_deref().is_none_or(str::is_empty) {
            return Err(Error::InvalidInput(
                "router-pool events need a currency_pair".into(),
            ));
        }
        Ok(())
    }

    /// Total order used before any matching, so results do not depend on
    /// input order.
    pub fn canonical_key(&self) -> (&str, u64, u32, u32, &str, &str) {
        (
            &self.chain,
            self.block_number,
            self.tx_index,
            self.log_index,
            &self.tx_hash,
            &self.pool_address,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventFormat {
    Csv,
    Jsonl,
}

impl EventFormat {
    /// `.csv` selects CSV; anything else is read as JSON lines.
    pub fn from_path(path: &std::path::Path) -> EventFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => EventFormat::Csv,
            _ => EventFormat::Jsonl,
        }
    }
}

/// A row that could not be used, with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedRow {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventLoad {
    pub events: Vec<SwapEvent>,
    pub skipped: Vec<SkippedRow>,
}

impl EventLoad {
    pub fn rows(&self) -> usize {
        self.events.len() + self.skipped.len()
    }

    pub fn skip_rate(&self) -> f64 {
        if self.rows() == 0 {
            0.0
        } else {
            self.skipped.len() as f64 / self.rows() as f64
        }
    }
}

/// Reads events, keeping rows that parse and validate and recording the
/// rest. Fails only on I/O errors or an unreadable CSV header.
pub fn read_events<R: Read>(reader: R, format: EventFormat) -> Result<EventLoad> {
    match format {
        EventFormat::Csv => read_csv(reader),
        EventFormat::Jsonl => read_jsonl(reader),
    }
}

fn accept(load: &mut EventLoad, line: usize, parsed: std::result::Result<SwapEvent, String>) {
    match parsed.and_then(|e| e.validate().map(|_| e).map_err(|err| err.to_string())) {
        Ok(e) => load.events.push(e),
        Err(message) => {
            log::warn!("skipping event on line {line}: {message}");
            load.skipped.push(SkippedRow { line, message });
        }
    }
}

fn read_csv<R: Read>(reader: R) -> Result<EventLoad> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    rdr.headers().map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    let mut load = EventLoad::default();
    for row in rdr.deserialize::<SwapEvent>() {
        match row {
            Ok(e) => {
                // header is line 1
                let line = load.rows() + 2;
                accept(&mut load, line, Ok(e));
            }
            Err(e) => {
                if let csv::ErrorKind::Io(_) = e.kind() {
                    return Err(Error::Io(e.to_string()));
                }
                let line = e
                    .position()
                    .map(|p| p.line() as usize)
                    .unwrap_or(load.rows() + 2);
                accept(&mut load, line, Err(e.to_string()));
            }
        }
    }
    Ok(load)
}

fn read_jsonl<R: Read>(reader: R) -> Result<EventLoad> {
    let mut load = EventLoad::default();
    for (i, line) in std::io::BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        accept(
            &mut load,
            i + 1,
            serde_json::from_str::<SwapEvent>(trimmed).map_err(|e| e.to_string()),
        );
    }
    Ok(load)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "chain,block_number,tx_hash,tx_index,pool_address,tx_from,tx_to,direction,amount_in_usd,amount_out_usd,gas_cost_usd";

    #[test]
    fn csv_with_optional_columns() {
        let data = format!(
            "{HEADER}\nbase,10,0xa,0,0xp,0xf,0xt,x_to_y,100,99,0.2\nbase,10,0xb,1,0xp,0xf,,Y->X,5,4.9,\n"
        );
        let load = read_events(data.as_bytes(), EventFormat::Csv).unwrap();
        assert!(load.skipped.is_empty(), "{:?}", load.skipped);
        assert_eq!(load.events.len(), 2);
        assert_eq!(load.events[0].gas_cost_usd, Some(0.2));
        assert_eq!(load.events[1].tx_to, None);
        assert_eq!(load.events[1].gas_cost_usd, None);
        assert_eq!(load.events[1].direction, Direction::YToX);
        assert!(!load.events[0].is_router_pool);
    }

    #[test]
    fn bad_rows_are_counted_with_lines() {
        let data = format!(
            "{HEADER}\nbase,10,0xa,0,0xp,0xf,0xt,x_to_y,100,99,0.2\nbase,ten,0xb,1,0xp,0xf,0xt,x_to_y,1,1,\nbase,10,0xc,2,0xp,0xf,0xt,x_to_y,-1,1,\n"
        );
        let load = read_events(data.as_bytes(), EventFormat::Csv).unwrap();
        assert_eq!(load.events.len(), 1);
        let lines: Vec<usize> = load.skipped.iter().map(|s| s.line).collect();
        assert_eq!(lines, vec![3, 4]);
        assert!((load.skip_rate() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn jsonl_round_trip() {
        let e = SwapEvent {
            chain: "base".into(),
            block_number: 7,
            tx_hash: "0x1".into(),
            tx_index: 3,
            log_index: 1,
            pool_address: "0xrouter".into(),
            currency_pair: Some("WETH/USDC".into()),
            is_router_pool: true,
            tx_from: "0xf".into(),
            tx_to: Some("0xt".into()),
            taker: None,
            direction: Direction::XToY,
            token_in: Some("WETH".into()),
            token_out: Some("USDC".into()),
            amount_in_usd: 10.0,
            amount_out_usd: 9.9,
            gas_cost_usd: None,
        };
        let text = format!("{}\n\n# comment\nnot json\n", serde_json::to_string(&e).unwrap());
        let load = read_events(text.as_bytes(), EventFormat::Jsonl).unwrap();
        assert_eq!(load.events, vec![e]);
        assert_eq!(load.skipped.len(), 1);
        assert_eq!(load.skipped[0].line, 4);
    }

    #[test]
    fn router_pool_requires_pair() {
        let line = r#"{"chain":"base","block_number":1,"tx_hash":"0x1","tx_index":0,"pool_address":"0xr","is_router_pool":true,"tx_from":"0xf","direction":"x_to_y","amount_in_usd":1,"amount_out_usd":1}"#;
        let load = read_events(line.as_bytes(), EventFormat::Jsonl).unwrap();
        assert_eq!(load.skipped.len(), 1);
    }

    #[test]
    fn empty_input() {
        let load = read_events(HEADER.as_bytes(), EventFormat::Csv).unwrap();
        assert_eq!(load.rows(), 0);
        assert_eq!(load.skip_rate(), 0.0);
        let load = read_events(&b""[..], EventFormat::Jsonl).unwrap();
        assert_eq!(load.rows(), 0);
    }
}
