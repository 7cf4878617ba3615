//! Chain identifiers, asset classification, and portfolio membership.
//!
//! Each of the five chains carries four portfolios rebuilt every half-day:
//!
//! * **All** — every non-excluded asset on the chain;
//! * **CEX** — the subset already listed on a centralized exchange as of
//!   the query half-day (listing takes effect at the first half-day of the
//!   listing date);
//! * **nonCEX** — the complement within All;
//! * **Local** — All minus assets that exist on more than one chain.
//!
//! Liquid-staking tokens, wrapped native tokens, and stablecoins are
//! excluded from every portfolio. Exclusions come from ingest metadata
//! tags plus an explicit override list in configuration, keeping the
//! curation auditable.

use crate::timebase::HalfDayId;
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

// ---------------------------------------------------------------------------
// Chains
// ---------------------------------------------------------------------------

/// The five chains of the panel, in canonical order. Every cross-chain
/// iteration in the crate follows this order so that reports and seeds
/// are reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainId {
    Ethereum,
    Solana,
    Bsc,
    Arbitrum,
    Avalanche,
}

impl ChainId {
    pub const ALL: [ChainId; 5] = [
        ChainId::Ethereum,
        ChainId::Solana,
        ChainId::Bsc,
        ChainId::Arbitrum,
        ChainId::Avalanche,
    ];

    /// Lowercase identifier used in files and config.
    pub fn key(&self) -> &'static str {
        match self {
            ChainId::Ethereum => "ethereum",
            ChainId::Solana => "solana",
            ChainId::Bsc => "bsc",
            ChainId::Arbitrum => "arbitrum",
            ChainId::Avalanche => "avalanche",
        }
    }

    /// Human-readable name used in report tables.
    pub fn display_name(&self) -> &'static str {
        match self {
            ChainId::Ethereum => "Ethereum",
            ChainId::Solana => "Solana",
            ChainId::Bsc => "BSC",
            ChainId::Arbitrum => "Arbitrum",
            ChainId::Avalanche => "Avalanche",
        }
    }

    /// Ticker of the chain's native token.
    pub fn native_symbol(&self) -> &'static str {
        match self {
            ChainId::Ethereum => "ETH",
            ChainId::Solana => "SOL",
            ChainId::Bsc => "BNB",
            ChainId::Arbitrum => "ARB",
            ChainId::Avalanche => "AVAX",
        }
    }

    /// The other four chains, in canonical order.
    pub fn rivals(&self) -> Vec<ChainId> {
        ChainId::ALL.iter().copied().filter(|c| c != self).collect()
    }

    /// Position in canonical order.
    pub fn ordinal(&self) -> usize {
        ChainId::ALL.iter().position(|c| c == self).expect("member of ALL")
    }
}

impl fmt::Display for ChainId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

/// Failure to parse a chain identifier.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown chain '{0}'")]
pub struct ParseChainError(String);

impl FromStr for ChainId {
    type Err = ParseChainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ethereum" | "eth" => Ok(ChainId::Ethereum),
            "solana" | "sol" => Ok(ChainId::Solana),
            "bsc" | "bnb" => Ok(ChainId::Bsc),
            "arbitrum" | "arb" => Ok(ChainId::Arbitrum),
            "avalanche" | "avax" => Ok(ChainId::Avalanche),
            _ => Err(ParseChainError(s.to_string())),
        }
    }
}

// ---------------------------------------------------------------------------
// Portfolio kinds
// ---------------------------------------------------------------------------

/// The four portfolio constructions maintained per chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PortfolioKind {
    All,
    Cex,
    NonCex,
    Local,
}

impl PortfolioKind {
    pub const ALL: [PortfolioKind; 4] = [
        PortfolioKind::All,
        PortfolioKind::Cex,
        PortfolioKind::NonCex,
        PortfolioKind::Local,
    ];

    /// Identifier used in `panel.csv` and config.
    pub fn key(&self) -> &'static str {
        match self {
            PortfolioKind::All => "all",
            PortfolioKind::Cex => "cex",
            PortfolioKind::NonCex => "non_cex",
            PortfolioKind::Local => "local",
        }
    }
}

impl fmt::Display for PortfolioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for PortfolioKind {
    type Err = ParseChainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "all" => Ok(PortfolioKind::All),
            "cex" => Ok(PortfolioKind::Cex),
            "non_cex" | "noncex" => Ok(PortfolioKind::NonCex),
            "local" => Ok(PortfolioKind::Local),
            _ => Err(ParseChainError(s.to_string())),
        }
    }
}

// ---------------------------------------------------------------------------
// Assets
// ---------------------------------------------------------------------------

/// Why an asset is kept out of every portfolio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionClass {
    None,
    LiquidStaking,
    WrappedNative,
    Stablecoin,
}

impl ExclusionClass {
    /// Map an ingest metadata tag to an exclusion class; unrecognized
    /// tags carry no exclusion.
    pub fn from_tag(tag: &str) -> ExclusionClass {
        match tag {
            "liquid_staking" | "restaking" | "lst" => ExclusionClass::LiquidStaking,
            "wrapped_native" | "wrapped" => ExclusionClass::WrappedNative,
            "stablecoin" | "stable" => ExclusionClass::Stablecoin,
            _ => ExclusionClass::None,
        }
    }
}

/// Canonical asset metadata after ingest normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssetRecord {
    /// Chain-scoped identifier (one per contract deployment).
    pub asset_id: String,
    /// Shared across chains for bridged deployments of one logical asset.
    pub logical_id: String,
    pub chain: ChainId,
    pub symbol: String,
    /// Day the asset first traded on a centralized exchange, if ever.
    pub cex_listing_date: Option<NaiveDate>,
    pub exclusion: ExclusionClass,
    /// True iff at least two records share this logical_id on different
    /// chains. Maintained by [`mark_multi_chain`].
    pub multi_chain: bool,
}

/// Recompute the `multi_chain` flag across a record set: an asset is
/// multi-chain iff its logical_id appears on two or more distinct chains.
pub fn mark_multi_chain(records: &mut [AssetRecord]) {
    let mut chains_by_logical: BTreeMap<&str, BTreeSet<ChainId>> = BTreeMap::new();
    for r in records.iter() {
        chains_by_logical.entry(r.logical_id.as_str()).or_default().insert(r.chain);
    }
    let multi: BTreeSet<String> = chains_by_logical
        .iter()
        .filter(|(_, chains)| chains.len() >= 2)
        .map(|(id, _)| id.to_string())
        .collect();
    for r in records.iter_mut() {
        r.multi_chain = multi.contains(&r.logical_id);
    }
}

/// Configured exclusion override lists, one per class. Asset ids listed
/// here are excluded regardless of their ingest tags.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExclusionOverrides {
    pub liquid_staking: Vec<String>,
    pub wrapped_native: Vec<String>,
    pub stablecoin: Vec<String>,
}

impl ExclusionOverrides {
    pub fn is_empty(&self) -> bool {
        self.liquid_staking.is_empty()
            && self.wrapped_native.is_empty()
            && self.stablecoin.is_empty()
    }

    /// Apply the overrides on top of tag-derived exclusions.
    pub fn apply(&self, records: &mut [AssetRecord]) {
        for r in records.iter_mut() {
            if self.liquid_staking.contains(&r.asset_id) {
                r.exclusion = ExclusionClass::LiquidStaking;
            } else if self.wrapped_native.contains(&r.asset_id) {
                r.exclusion = ExclusionClass::WrappedNative;
            } else if self.stablecoin.contains(&r.asset_id) {
                r.exclusion = ExclusionClass::Stablecoin;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

/// Membership sets per (chain, portfolio kind) at one half-day.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Membership {
    sets: BTreeMap<(ChainId, PortfolioKind), BTreeSet<String>>,
}

impl Membership {
    /// Asset ids in the given portfolio; empty set when none.
    pub fn members(&self, chain: ChainId, kind: PortfolioKind) -> &BTreeSet<String> {
        static EMPTY: std::sync::OnceLock<BTreeSet<String>> = std::sync::OnceLock::new();
        self.sets
            .get(&(chain, kind))
            .unwrap_or_else(|| EMPTY.get_or_init(BTreeSet::new))
    }

    pub fn contains(&self, chain: ChainId, kind: PortfolioKind, asset_id: &str) -> bool {
        self.members(chain, kind).contains(asset_id)
    }
}

/// Classify assets into per-chain portfolio memberships as of one
/// half-day. CEX membership compares the listing date against the
/// half-day's calendar date, so a listing activates at H1 of its day.
pub fn classify(records: &[AssetRecord], as_of: HalfDayId) -> Membership {
    let mut sets: BTreeMap<(ChainId, PortfolioKind), BTreeSet<String>> = BTreeMap::new();
    for chain in ChainId::ALL {
        for kind in PortfolioKind::ALL {
            sets.insert((chain, kind), BTreeSet::new());
        }
    }
    for r in records {
        if r.exclusion != ExclusionClass::None {
            continue;
        }
        let id = r.asset_id.clone();
        sets.get_mut(&(r.chain, PortfolioKind::All)).expect("prefilled").insert(id.clone());
        let listed = r.cex_listing_date.map(|d| d <= as_of.date).unwrap_or(false);
        let sub = if listed { PortfolioKind::Cex } else { PortfolioKind::NonCex };
        sets.get_mut(&(r.chain, sub)).expect("prefilled").insert(id.clone());
        if !r.multi_chain {
            sets.get_mut(&(r.chain, PortfolioKind::Local)).expect("prefilled").insert(id);
        }
    }
    Membership { sets }
}

// ---------------------------------------------------------------------------
