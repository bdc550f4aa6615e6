//! Sandwich-attack economics on constant-product and concentrated-liquidity
//! pools, co-inclusion models for private-mempool sequencers, and a
//! heuristic detector for sandwich-shaped swap triples.
//!
//! The crate is organised bottom-up:
//!
//! - [`amm`]: exact swap math for CPMM and CLMM pools. Every economic
//!   approximation in [`econ`] is checked against these routines.
//! - [`econ`]: attacker profit models, optimal frontrun sizing, expected
//!   value and the minimum victim size.
//! - [`seq`]: same-batch, ordering and arrival probabilities under FCFS and
//!   priority-gas-auction sequencing, with a Monte Carlo simulator.
//! - [`detect`]: swap-event ingestion, actor attribution, atomic-arbitrage
//!   filtering, triple matching and the summary statistics built on top.
//!
//! All values are `f64`. Monetary quantities are USD-equivalent.

pub mod amm;
pub mod detect;
pub mod econ;
mod error;
pub mod seq;
pub mod stats;

pub use error::{Error, Result};
