//! Cap-weighted chain portfolios from asset-level data.
//!
//! Uses the portfolio fixture shipped with the tests: a small Ethereum
//! universe with a wrapped-native exclusion and a bridged twin, ten days
//! of native-denominated prices, and market caps from two sources. Each
//! bar's portfolio return weights every eligible asset by its cap at the
//! *previous* half-day, and membership splits the whole into CEX-listed,
//! unlisted, and chain-local sub-portfolios.
//!
//! Run with: `cargo run --example build_portfolios`

use chainspill::ingest::{fetch_universe, merge_market_cap, read_caps_csv, SourceDescriptor};
use chainspill::portfolio::{build_chain_panel, CexMembershipMode};
use chainspill::series::Series;
use chainspill::timebase::{grid, HalfDayId};
use chainspill::universe::{ChainId, PortfolioKind};
use std::collections::BTreeMap;
use std::path::Path;

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/portfolio");

    // Asset metadata: ids, CEX listing dates, exclusion classes, and the
    // multi-chain flag that keeps bridged twins out of Local portfolios.
    let source = SourceDescriptor::fixture(dir.join("assets.jsonl").to_string_lossy());
    let records = fetch_universe(&source, None).expect("fixture universe");
    println!("{} asset records:", records.len());
    for r in &records {
        println!(
            "  {:<8} on {:<9} listed {:<11} exclusion {:?} multi-chain {}",
            r.asset_id,
            r.chain.key(),
            r.cex_listing_date.map_or("never".into(), |d| d.to_string()),
            r.exclusion,
            r.multi_chain,
        );
    }

    // Prices in native units, one series per asset.
    let mut prices: BTreeMap<String, Series> = BTreeMap::new();
    let text = std::fs::read_to_string(dir.join("prices.csv")).expect("prices fixture");
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let id = f[0].strip_prefix("price.").expect("price.<asset> ids");
        let bar: HalfDayId = format!("{} {}", f[1], f[2]).parse().expect("bar");
        prices
            .entry(id.to_string())
            .or_insert_with(|| Series::empty(id))
            .set(bar, Some(f[3].parse().expect("price")));
    }

    // Market caps arrive per source and per bar; merging averages the
    // sources that reported.
    let raw_caps = read_caps_csv(&dir.join("caps.csv")).expect("caps fixture");
    let caps: BTreeMap<String, Series> = raw_caps
        .iter()
        .map(|(asset, obs)| (asset.clone(), merge_market_cap(obs, format!("cap.{asset}"))))
        .collect();

    let bars = grid("2024-01-01 H1".parse().unwrap(), "2024-01-10 H2".parse().unwrap());
    let panel = build_chain_panel(
        ChainId::Ethereum,
        &records,
        &prices,
        &caps,
        &bars,
        CexMembershipMode::TimeVarying,
    )
    .expect("panel construction");

    println!("\nEthereum portfolio returns (first bar has no prior price):");
    println!("{:>16} {:>10} {:>10} {:>10} {:>10}", "bar", "all", "cex", "non_cex", "local");
    for bar in &bars {
        let cell = |s: &Series| {
            s.get(*bar).map_or_else(|| "      --".into(), |v| format!("{v:>10.6}"))
        };
        println!(
            "{:>16} {} {} {} {}",
            bar.to_string(),
            cell(&panel.all),
            cell(&panel.cex),
            cell(&panel.non_cex),
            cell(&panel.local),
        );
    }

    // The weight log records exactly which assets carried each bar.
    let sample = bars[9];
    println!("\ncontributors to `all` at {sample}:");
    let weights = &panel.weight_log[&(PortfolioKind::All, sample.index())];
    for (asset, weight) in weights {
        println!("  {asset:<8} {weight:.4}");
    }
}
