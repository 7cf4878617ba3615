//! Swap-event decoding and half-day price reconstruction.
//!
//! Raw pool events arrive as a line-delimited log, one event per line:
//!
//! ```text
//! pool_id,rfc3339-utc-timestamp,payload_hex
//! ```
//!
//! The payload is the concatenation of two 32-byte big-endian
//! two's-complement words — the raw-unit deltas of token0 and token1 from
//! the pool's perspective (positive = tokens flowed into the pool,
//! negative = out). The pool registry (`pools.csv`) declares which word
//! is the base asset and the decimal scaling of both legs.

use super::{Direction, IngestError, SwapTrade};
use crate::series::Series;
use crate::timebase::{grid, half_day_index, HalfDayId};
use crate::universe::ChainId;
use chrono::{DateTime, Utc};
use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;
use std::path::Path;

/// Decoding metadata for one pool.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolMeta {
    pub pool_id: String,
    pub chain: ChainId,
    /// Asset being priced.
    pub base_asset_id: String,
    /// Paired token the price is denominated in.
    pub quote_asset_id: String,
    /// Which payload word (0 or 1) carries the base asset.
    pub base_token_index: u8,
    pub base_decimals: u32,
    pub quote_decimals: u32,
}

/// Read the pool registry: header
/// `pool_id,chain,base_asset_id,quote_asset_id,base_token_index,base_decimals,quote_decimals`.
pub fn read_pools_csv(path: &Path) -> Result<Vec<PoolMeta>, IngestError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| IngestError::SourceUnavailable {
        uri: path.display().to_string(),
        detail: e.to_string(),
    })?;
    let mut pools = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| IngestError::MalformedEvent { index: i, detail: e.to_string() })?;
        let field = |j: usize| -> Result<&str, IngestError> {
            row.get(j).ok_or_else(|| IngestError::SchemaMismatch {
                detail: format!("pools.csv row {i}: missing column {j}"),
            })
        };
        let parse_err = |what: &str| IngestError::SchemaMismatch {
            detail: format!("pools.csv row {i}: bad {what}"),
        };
        pools.push(PoolMeta {
            pool_id: field(0)?.to_string(),
            chain: field(1)?.parse().map_err(|_| parse_err("chain"))?,
            base_asset_id: field(2)?.to_string(),
            quote_asset_id: field(3)?.to_string(),
            base_token_index: field(4)?.parse().map_err(|_| parse_err("base_token_index"))?,
            base_decimals: field(5)?.parse().map_err(|_| parse_err("base_decimals"))?,
            quote_decimals: field(6)?.parse().map_err(|_| parse_err("quote_decimals"))?,
        });
    }
    Ok(pools)
}

/// Error-handling policy for event streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodePolicy {
    /// Skip malformed records and events for unregistered pools.
    Lenient,
    /// Abort on the first malformed record or unregistered pool.
    Strict,
}

/// One signed word from the payload, interpreted as a two's-complement
/// 256-bit integer and returned as (magnitude, is_negative). Magnitudes
/// are assumed to fit f64 after decimal rescaling.
fn decode_word(hex: &str) -> Result<(f64, bool), String> {
    if hex.len() != 64 {
        return Err(format!("word has {} hex chars, expected 64", hex.len()));
    }
    let mut bytes = [0u8; 32];
    for (i, chunk) in hex.as_bytes().chunks(2).enumerate() {
        let s = std::str::from_utf8(chunk).map_err(|_| "non-utf8".to_string())?;
        bytes[i] = u8::from_str_radix(s, 16).map_err(|e| e.to_string())?;
    }
    let negative = bytes[0] & 0x80 != 0;
    if negative {
        // two's complement negation: invert and add one
        for b in bytes.iter_mut() {
            *b = !*b;
        }
        let mut carry = 1u16;
        for b in bytes.iter_mut().rev() {
            let v = *b as u16 + carry;
            *b = (v & 0xff) as u8;
            carry = v >> 8;
        }
    }
    let mut magnitude = 0.0f64;
    for b in bytes {
        magnitude = magnitude * 256.0 + b as f64;
    }
    Ok((magnitude, negative))
}

/// Decode an event log into the trades of one pool.
///
/// Well-formed events for `pool` yield one [`SwapTrade`] each, amounts
/// rescaled to human units by the registry's decimals; events for other
/// pools in `known_pools` are skipped. Timestamp order of the stream is
/// preserved. Under [`DecodePolicy::Strict`], a malformed record aborts
/// with its zero-based index and an event for an unregistered pool is an
/// error; under [`DecodePolicy::Lenient`] both are skipped.
pub fn decode_swap_events<R: BufRead>(
    stream: R,
    pool: &PoolMeta,
    known_pools: &BTreeSet<String>,
    policy: DecodePolicy,
) -> Result<Vec<SwapTrade>, IngestError> {
    let mut trades = Vec::new();
    for (index, line) in stream.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match decode_line(&line, pool) {
            Ok(Some(trade)) => trades.push(trade),
            Ok(None) => {
                // event for some other pool
                let event_pool = line.split(',').next().unwrap_or_default();
                if policy == DecodePolicy::Strict
                    && !known_pools.contains(event_pool)
                    && event_pool != pool.pool_id
                {
                    return Err(IngestError::UnknownPool {
                        index,
                        pool_id: event_pool.to_string(),
                    });
                }
            }
            Err(detail) => {
                if policy == DecodePolicy::Strict {
                    return Err(IngestError::MalformedEvent { index, detail });
                }
            }
        }
    }
    Ok(trades)
}

/// Decode one line; `Ok(None)` means the event belongs to another pool.
fn decode_line(line: &str, pool: &PoolMeta) -> Result<Option<SwapTrade>, String> {
    let mut parts = line.splitn(3, ',');
    let (pool_id, ts_raw, payload) = match (parts.next(), parts.next(), parts.next()) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return Err("expected pool_id,ts,payload".to_string()),
    };
    if pool_id != pool.pool_id {
        return Ok(None);
    }
    let ts: DateTime<Utc> = ts_raw
        .parse()
        .map_err(|e| format!("bad timestamp '{ts_raw}': {e}"))?;
    let payload = payload.trim();
    if payload.len() != 128 {
        return Err(format!("payload has {} hex chars, expected 128", payload.len()));
    }
    let (amount0, neg0) = decode_word(&payload[..64])?;
    let (amount1, neg1) = decode_word(&payload[64..])?;
    let (base_raw, base_neg, quote_raw, quote_neg) = if pool.base_token_index == 0 {
        (amount0, neg0, amount1, neg1)
    } else {
        (amount1, neg1, amount0, neg0)
    };
    if base_neg == quote_neg {
        return Err("both legs flow the same direction".to_string());
    }
    let base_amount = base_raw / 10f64.powi(pool.base_decimals as i32);
    let quote_amount = quote_raw / 10f64.powi(pool.quote_decimals as i32);
    if base_amount <= 0.0 || quote_amount <= 0.0 {
        return Err("zero-amount swap".to_string());
    }
    // base flowing into the pool means the trader sold the base asset
    let direction = if base_neg { Direction::Buy } else { Direction::Sell };
    Ok(Some(SwapTrade {
        pool_id: pool.pool_id.clone(),
        ts,
        base_amount,
        quote_amount,
        direction,
    }))
}

/// Rebuild a half-day price series from a trade sequence.
///
/// Each half-day takes the price (quote/base) of its last trade. A
/// half-day without trades inherits the most recent price as long as the
/// gap between the end of the priced half-day and the start of the
/// current one is at most `staleness_limit` half-days; in index terms a
/// price at bar `t0` covers bars through `t0 + 1 + staleness_limit`.
/// Beyond that the value is missing. Trades before the grid may still
/// seed its early bars.
pub fn reconstruct_price_series(
    trades: &[SwapTrade],
    grid_range: (HalfDayId, HalfDayId),
    staleness_limit: usize,
    series_id: impl Into<String>,
) -> Result<Series, IngestError> {
    let mut last_price_by_bar: BTreeMap<i64, f64> = BTreeMap::new();
    let mut sorted: Vec<&SwapTrade> = trades.iter().collect();
    sorted.sort_by_key(|t| t.ts);
    for t in sorted {
        last_price_by_bar.insert(half_day_index(t.ts).index(), t.price());
    }

    let bars = grid(grid_range.0, grid_range.1);
    let mut values = Vec::with_capacity(bars.len());
    let mut any = false;
    for bar in &bars {
        let idx = bar.index();
        let price = last_price_by_bar
            .range(..=idx)
            .next_back()
            .filter(|(t0, _)| idx - **t0 <= 1 + staleness_limit as i64)
            .map(|(_, p)| *p);
        any |= price.is_some();
        values.push(price);
    }
    if !any {
        return Err(IngestError::NoTrades);
    }
    Ok(Series::new(series_id, grid_range.0, values))
}

// ---------------------------------------------------------------------------
