//! Acquisition and normalization of raw inputs into canonical records.
//!
//! Raw material arrives from pluggable sources — local fixture files or
//! HTTP endpoints — and is normalized into a small set of canonical
//! formats consumed by the rest of the pipeline:
//!
//! * asset metadata (`assets.jsonl`, one JSON object per line);
//! * DEX swap event logs (`swap_events.log`) decoded into trades and
//!   reconstructed into half-day price series;
//! * market capitalization observations (`caps.csv`), merged across
//!   providers by averaging;
//! * generic half-day/daily series (`series.csv`) for native-token
//!   prices, staking rates, interest rates, and equity open/close bars.
//!
//! Fixture sources are replayable: reading one twice yields identical
//! record streams, which the golden-file tests rely on.

pub mod assets;
pub mod caps;
pub mod http;
pub mod swaps;

pub use assets::fetch_universe;
pub use caps::{merge_market_cap, read_caps_csv, CapSource, RawCapObservation};
pub use http::{FixtureSource, HttpSource, Source};
pub use swaps::{
    decode_swap_events, read_pools_csv, reconstruct_price_series, DecodePolicy, PoolMeta,
};

use crate::timebase::HalfDayId;
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Errors raised while acquiring or normalizing raw inputs.
#[derive(Debug, Error)]
pub enum IngestError {
    /// A record could not be parsed; `index` is its zero-based position
    /// in the stream.
    #[error("malformed event at record {index}: {detail}")]
    MalformedEvent { index: usize, detail: String },
    /// Strict decoding met an event for a pool absent from the registry.
    #[error("unknown pool '{pool_id}' at record {index}")]
    UnknownPool { index: usize, pool_id: String },
    /// Price reconstruction produced no value anywhere on the grid.
    #[error("no trades price any half-day of the requested grid")]
    NoTrades,
    /// The source could not be reached or read.
    #[error("source unavailable: {uri}: {detail}")]
    SourceUnavailable { uri: String, detail: String },
    /// A payload decoded but did not carry the expected fields.
    #[error("schema mismatch: {detail}")]
    SchemaMismatch { detail: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Trade side from the pool's perspective of the base asset: the trader
/// sold base into the pool (`Sell`) or bought base out of it (`Buy`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Buy,
    Sell,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Buy => "buy",
            Direction::Sell => "sell",
        })
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "buy" => Ok(Direction::Buy),
            "sell" => Ok(Direction::Sell),
            other => Err(format!("unknown direction '{other}'")),
        }
    }
}

/// One decoded swap: positive human-unit amounts on both legs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwapTrade {
    pub pool_id: String,
    pub ts: DateTime<Utc>,
    /// Quantity of the asset being priced.
    pub base_amount: f64,
    /// Quantity of the paired (native or numeraire) token.
    pub quote_amount: f64,
    pub direction: Direction,
}

impl SwapTrade {
    /// Price of one base unit in quote units.
    pub fn price(&self) -> f64 {
        self.quote_amount / self.base_amount
    }

    /// Bar this trade falls in.
    pub fn half_day(&self) -> HalfDayId {
        crate::timebase::half_day_index(self.ts)
    }
}

/// How a source is reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    FixtureFile,
    HttpEndpoint,
}

/// Where records come from. For HTTP endpoints, `credentials` names the
/// source for API-key lookup via `CHAINSPILL_API_KEY_<NAME>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceDescriptor {
    pub kind: SourceKind,
    /// File path for fixtures, URL for endpoints.
    pub uri: String,
    /// Optional source name for API-key lookup.
    pub credentials: Option<String>,
    /// Request budget for endpoints, requests per second.
    pub rate_limit: f64,
}

impl SourceDescriptor {
    pub fn fixture(path: impl Into<String>) -> Self {
        SourceDescriptor {
            kind: SourceKind::FixtureFile,
            uri: path.into(),
            credentials: None,
            rate_limit: f64::INFINITY,
        }
    }
}
