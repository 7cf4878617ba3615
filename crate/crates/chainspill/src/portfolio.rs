//! Half-day log returns and cap-weighted chain portfolio construction.
//!
//! Every chain carries four portfolios (All / CEX / nonCEX / Local) whose
//! half-day returns are market-cap-weighted averages of member asset log
//! returns. Weights use capitalization at the *previous* half-day so a
//! period's return never weights itself. Assets missing either the return
//! or the prior cap at a half-day are dropped from that half-day and the
//! remaining weights renormalized; the weights actually used are kept in
//! a per-half-day log for audit.

use crate::series::Series;
use crate::timebase::HalfDayId;
use crate::universe::{classify, AssetRecord, ChainId, Membership, PortfolioKind};
use chrono::NaiveDate;
use std::collections::BTreeMap;
use thiserror::Error;

/// Errors from return and portfolio computation.
#[derive(Debug, Error)]
pub enum PortfolioError {
    /// Log returns need strictly positive prices.
    #[error("non-positive price for '{series_id}' at {bar}")]
    NonPositivePrice { series_id: String, bar: HalfDayId },
    /// No asset had both a return and a positive prior cap.
    #[error("empty portfolio: no eligible asset")]
    EmptyPortfolio,
}

/// Continuously compounded returns: `r_t = ln(p_t / p_{t-1})`, missing
/// wherever either side is missing.
pub fn log_return(prices: &Series) -> Result<Series, PortfolioError> {
    let Some(start) = prices.start() else {
        return Ok(Series::empty(format!("ret.{}", prices.id())));
    };
    let mut out = Vec::with_capacity(prices.len());
    let mut prev: Option<f64> = None;
    for (bar, value) in prices.iter() {
        if let Some(p) = value {
            if p <= 0.0 {
                return Err(PortfolioError::NonPositivePrice {
                    series_id: prices.id().to_string(),
                    bar,
                });
            }
        }
        out.push(match (prev, value) {
            (Some(a), Some(b)) => Some((b / a).ln()),
            _ => None,
        });
        prev = value;
    }
    Ok(Series::new(format!("ret.{}", prices.id()), start, out))
}

/// One half-day's cap-weighted portfolio return.
///
/// Assets contribute when they appear in both maps with a cap > 0 (zero
/// caps carry zero weight, so dropping them never changes the result);
/// weights are caps renormalized over the contributors.
pub fn portfolio_return(
    member_returns: &BTreeMap<&str, f64>,
    caps_prev: &BTreeMap<&str, f64>,
) -> Result<f64, PortfolioError> {
    let mut total_cap = 0.0;
    let mut weighted = 0.0;
    for (asset, r) in member_returns {
        if let Some(cap) = caps_prev.get(asset) {
            if *cap > 0.0 {
                total_cap += cap;
                weighted += cap * r;
            }
        }
    }
    if total_cap <= 0.0 {
        return Err(PortfolioError::EmptyPortfolio);
    }
    Ok(weighted / total_cap)
}

/// How CEX membership evolves over the build grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CexMembershipMode {
    /// Listings take effect at the first half-day of their listing date.
    TimeVarying,
    /// Membership frozen to its state at the given date.
    FrozenAt(NaiveDate),
}

/// The four portfolio return series of one chain plus the weights used.
#[derive(Debug, Clone)]
pub struct ChainPanel {
    pub chain: ChainId,
    pub all: Series,
    pub cex: Series,
    pub non_cex: Series,
    pub local: Series,
    /// (kind, half-day index) -> the (asset, weight) pairs actually used.
    pub weight_log: BTreeMap<(PortfolioKind, i64), Vec<(String, f64)>>,
}

impl ChainPanel {
    pub fn series(&self, kind: PortfolioKind) -> &Series {
        match kind {
            PortfolioKind::All => &self.all,
            PortfolioKind::Cex => &self.cex,
            PortfolioKind::NonCex => &self.non_cex,
            PortfolioKind::Local => &self.local,
        }
    }
}

/// Build one chain's four portfolio series over `grid`.
///
/// `prices` and `caps` are canonical per-asset series; returns are
/// derived in place. Half-days where a portfolio has no eligible member
/// are missing in the output rather than fatal (a chain can legitimately
/// have an empty Local portfolio, for example).
pub fn build_chain_panel(
    chain: ChainId,
    records: &[AssetRecord],
    prices: &BTreeMap<String, Series>,
    caps: &BTreeMap<String, Series>,
    grid: &[HalfDayId],
    mode: CexMembershipMode,
) -> Result<ChainPanel, PortfolioError> {
    let chain_records: Vec<&AssetRecord> =
        records.iter().filter(|r| r.chain == chain).collect();
    let mut returns: BTreeMap<&str, Series> = BTreeMap::new();
    for r in &chain_records {
        if let Some(p) = prices.get(&r.asset_id) {
            returns.insert(r.asset_id.as_str(), log_return(p)?);
        }
    }

    let owned: Vec<AssetRecord> = chain_records.iter().map(|r| (*r).clone()).collect();
    let mut panel = ChainPanel {
        chain,
        all: Series::empty(format!("{}.all", chain.key())),
        cex: Series::empty(format!("{}.cex", chain.key())),
        non_cex: Series::empty(format!("{}.non_cex", chain.key())),
        local: Series::empty(format!("{}.local", chain.key())),
        weight_log: BTreeMap::new(),
    };

    for bar in grid {
        let membership_at = match mode {
            CexMembershipMode::TimeVarying => *bar,
            CexMembershipMode::FrozenAt(date) => HalfDayId::new(date, crate::timebase::Half::H1),
        };
        let membership: Membership = classify(&owned, membership_at);
        let prev = bar.predecessor();
        for kind in PortfolioKind::ALL {
            let members = membership.members(chain, kind);
            let mut member_returns: BTreeMap<&str, f64> = BTreeMap::new();
            let mut caps_prev: BTreeMap<&str, f64> = BTreeMap::new();
            for asset in members {
                if let Some(r) = returns.get(asset.as_str()).and_then(|s| s.get(*bar)) {
                    member_returns.insert(asset.as_str(), r);
                }
                if let Some(c) = caps.get(asset.as_str()).and_then(|s| s.get(prev)) {
                    caps_prev.insert(asset.as_str(), c);
                }
            }
            let value = portfolio_return(&member_returns, &caps_prev).ok();
            if value.is_some() {
                let total: f64 = member_returns
                    .keys()
                    .filter_map(|a| caps_prev.get(a))
                    .filter(|c| **c > 0.0)
                    .sum();
                let weights: Vec<(String, f64)> = member_returns
                    .keys()
                    .filter_map(|a| {
                        caps_prev.get(a).filter(|c| **c > 0.0).map(|c| (a.to_string(), c / total))
                    })
                    .collect();
                panel.weight_log.insert((kind, bar.index()), weights);
            }
            match kind {
                PortfolioKind::All => panel.all.set(*bar, value),
                PortfolioKind::Cex => panel.cex.set(*bar, value),
                PortfolioKind::NonCex => panel.non_cex.set(*bar, value),
                PortfolioKind::Local => panel.local.set(*bar, value),
            }
        }
    }
    Ok(panel)
}

/// Render a panel set as `panel.csv` rows: header
/// `chain,kind,date,half,value,missing_flag`, chains in canonical order,
/// kinds in All/CEX/nonCEX/Local order, bars ascending. Missing values
/// print an empty value with flag 1; the format is byte-stable for
/// identical inputs.
pub fn panels_to_csv(panels: &BTreeMap<ChainId, ChainPanel>, grid: &[HalfDayId]) -> String {
    let mut out = String::from("chain,kind,date,half,value,missing_flag\n");
    for chain in ChainId::ALL {
        let Some(panel) = panels.get(&chain) else { continue };
        for kind in PortfolioKind::ALL {
            let series = panel.series(kind);
            for bar in grid {
                match series.get(*bar) {
                    Some(v) => out.push_str(&format!(
                        "{},{},{},{},{},0\n",
                        chain.key(),
                        kind.key(),
                        bar.date,
                        bar.half,
                        v
                    )),
                    None => out.push_str(&format!(
                        "{},{},{},{},,1\n",
                        chain.key(),
                        kind.key(),
                        bar.date,
                        bar.half
                    )),
                }
            }
        }
    }
    out
}

/// Parse `panel.csv` back into per-chain series keyed by kind.
pub fn panels_from_csv(
    text: &str,
) -> Result<BTreeMap<ChainId, BTreeMap<PortfolioKind, Series>>, String> {
    let mut out: BTreeMap<ChainId, BTreeMap<PortfolioKind, Series>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 6 {
            return Err(format!("panel.csv line {i}: expected 6 fields"));
        }
        let chain: ChainId = parts[0].parse().map_err(|_| format!("line {i}: bad chain"))?;
        let kind: PortfolioKind = parts[1].parse().map_err(|_| format!("line {i}: bad kind"))?;
        let date: NaiveDate = parts[2].parse().map_err(|_| format!("line {i}: bad date"))?;
        let half = parts[3].parse().map_err(|_| format!("line {i}: bad half"))?;
        let bar = HalfDayId::new(date, half);
        let value = if parts[5] == "1" || parts[4].is_empty() {
            None
        } else {
            Some(parts[4].parse::<f64>().map_err(|_| format!("line {i}: bad value"))?)
        };
        out.entry(chain)
            .or_default()
            .entry(kind)
            .or_insert_with(|| Series::empty(format!("{}.{}", chain.key(), kind.key())))
            .set(bar, value);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
