//! Asset-metadata acquisition: `assets.jsonl` fixtures or HTTP listings
//! normalized into [`AssetRecord`]s.

use super::http::{FixtureSource, HttpSource, Source};
use super::{IngestError, SourceDescriptor, SourceKind};
use crate::universe::{mark_multi_chain, AssetRecord, ChainId, ExclusionClass};
use serde::Deserialize;

/// Wire schema of one `assets.jsonl` line.
#[derive(Debug, Deserialize)]
struct AssetJson {
    asset_id: String,
    chain: String,
    #[allow(dead_code)]
    address: String,
    symbol: String,
    #[serde(default)]
    cex_listing_date: Option<String>,
    #[serde(default)]
    tags: Vec<String>,
    logical_id: String,
}

/// Fetch and normalize the asset universe from a source, keeping only
/// `chain` when given. Multi-chain flags are computed over the full
/// payload before any chain filter so bridging is never masked.
pub fn fetch_universe(
    source: &SourceDescriptor,
    chain: Option<ChainId>,
) -> Result<Vec<AssetRecord>, IngestError> {
    let payload = match source.kind {
        SourceKind::FixtureFile => FixtureSource::new(&source.uri).request(0)?,
        SourceKind::HttpEndpoint => HttpSource::from_descriptor(source)?.request(0)?,
    };
    let mut records = parse_assets_jsonl(&payload)?;
    mark_multi_chain(&mut records);
    if let Some(chain) = chain {
        records.retain(|r| r.chain == chain);
    }
    Ok(records)
}

/// Parse an `assets.jsonl` payload into canonical records (multi_chain
/// not yet computed).
pub fn parse_assets_jsonl(payload: &[u8]) -> Result<Vec<AssetRecord>, IngestError> {
    let text = std::str::from_utf8(payload).map_err(|e| IngestError::SchemaMismatch {
        detail: format!("assets payload is not UTF-8: {e}"),
    })?;
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let raw: AssetJson =
            serde_json::from_str(line).map_err(|e| IngestError::SchemaMismatch {
                detail: format!("assets.jsonl line {i}: {e}"),
            })?;
        let chain: ChainId = raw.chain.parse().map_err(|_| IngestError::SchemaMismatch {
            detail: format!("assets.jsonl line {i}: unknown chain '{}'", raw.chain),
        })?;
        let cex_listing_date = match &raw.cex_listing_date {
            None => None,
            Some(d) => Some(d.parse().map_err(|_| IngestError::SchemaMismatch {
                detail: format!("assets.jsonl line {i}: bad cex_listing_date '{d}'"),
            })?),
        };
        let exclusion = raw
            .tags
            .iter()
            .map(|t| ExclusionClass::from_tag(t))
            .find(|c| *c != ExclusionClass::None)
            .unwrap_or(ExclusionClass::None);
        records.push(AssetRecord {
            asset_id: raw.asset_id,
            logical_id: raw.logical_id,
            chain,
            symbol: raw.symbol,
            cex_listing_date,
            exclusion,
            multi_chain: false,
        });
    }
    Ok(records)
}

/// Serialize records back to the canonical `assets.jsonl` form (used when
/// materializing the canonical store).
pub fn to_assets_jsonl(records: &[AssetRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let mut tags: Vec<&str> = Vec::new();
        match r.exclusion {
            ExclusionClass::LiquidStaking => tags.push("liquid_staking"),
            ExclusionClass::WrappedNative => tags.push("wrapped_native"),
            ExclusionClass::Stablecoin => tags.push("stablecoin"),
            ExclusionClass::None => {}
        }
        let obj = serde_json::json!({
            "asset_id": r.asset_id,
            "chain": r.chain.key(),
            "address": format!("0x{}", r.asset_id),
            "symbol": r.symbol,
            "cex_listing_date": r.cex_listing_date.map(|d| d.to_string()),
            "tags": tags,
            "logical_id": r.logical_id,
        });
        out.push_str(&obj.to_string());
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
