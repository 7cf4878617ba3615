//! From raw DEX event logs to a half-day price series.
//!
//! Reads the swap fixture shipped with the tests: a pool registry and a
//! small event log for a WETH/USDC pool. Each event's payload words are
//! two's-complement 256-bit amounts; decoding rescales them to human
//! units, classifies the trade direction, and prices the base asset in
//! quote units. The last trade of each bar then becomes the bar's price,
//! carried forward through short gaps.
//!
//! Run with: `cargo run --example decode_swaps`

use chainspill::ingest::{
    decode_swap_events, read_pools_csv, reconstruct_price_series, DecodePolicy,
};
use std::collections::BTreeSet;
use std::io::BufReader;
use std::path::Path;

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/swaps");
    let pools = read_pools_csv(&dir.join("pools.csv")).expect("pool registry");
    let weth = pools.iter().find(|p| p.pool_id == "p-weth-usdc").expect("fixture pool");

    // The registry holds metadata only for pools we price; the known set is
    // the broader allow-list of every pool the venue emits, so strict mode
    // still catches genuinely unexpected pool ids.
    let mut known: BTreeSet<String> = pools.iter().map(|p| p.pool_id.clone()).collect();
    known.insert("p-dai-usdc".to_string());

    println!(
        "pool {}: {} priced in {} ({} / {} decimals)",
        weth.pool_id, weth.base_asset_id, weth.quote_asset_id, weth.base_decimals,
        weth.quote_decimals
    );

    let log = std::fs::File::open(dir.join("swap_events.log")).expect("fixture log");
    let trades = decode_swap_events(BufReader::new(log), weth, &known, DecodePolicy::Strict)
        .expect("clean fixture decodes strictly");

    println!("\n{} decoded trades:", trades.len());
    for t in &trades {
        println!(
            "  {}  {:>4}  {:>10.4} base  {:>12.2} quote  price {:>8.2}  bar {}",
            t.ts.format("%Y-%m-%d %H:%M:%S"),
            format!("{:?}", t.direction).to_lowercase(),
            t.base_amount,
            t.quote_amount,
            t.price(),
            t.half_day(),
        );
    }

    // Bars with no trades inherit the previous price for up to
    // `staleness_limit` bars, then go missing until trading resumes.
    let first = trades.first().expect("non-empty fixture").half_day();
    let last = trades.last().expect("non-empty fixture").half_day();
    let series = reconstruct_price_series(&trades, (first, last), 2, "price.eth-weth")
        .expect("price reconstruction");

    println!("\nhalf-day last-price series (staleness limit 2):");
    for (bar, value) in series.iter() {
        match value {
            Some(p) => println!("  {bar}  {p:.2}"),
            None => println!("  {bar}  (stale beyond limit)"),
        }
    }
}
