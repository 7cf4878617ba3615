//! The half-day timebase underneath everything else.
//!
//! Crypto markets trade around the clock, so the crate's observation unit
//! is a 12-hour UTC bar: H1 = [00:00, 12:00) and H2 = [12:00, 24:00).
//! This demo parses bars, walks an inclusive grid, and shows how each
//! global equity market's trading session lines up with the two halves.
//!
//! Run with: `cargo run --example half_day_grid`

use chainspill::timebase::{grid, half_day_index, session_alignment, EquityMarket, Half, HalfDayId};

fn main() {
    let start: HalfDayId = "2024-02-28 H2".parse().expect("well-formed bar");
    let end: HalfDayId = "2024-03-01 H2".parse().expect("well-formed bar");

    // Grids are inclusive on both ends and cross month boundaries (and, in
    // 2024, a leap day) without any special casing.
    println!("grid {start} .. {end}:");
    for bar in grid(start, end) {
        println!(
            "  {bar}   index {:>6}   predecessor {}",
            bar.index(),
            bar.predecessor()
        );
    }

    // Timestamps map onto bars by simple UTC truncation.
    let ts: chrono::DateTime<chrono::Utc> =
        "2024-02-29T11:59:59Z".parse().expect("rfc3339 timestamp");
    println!("\n{ts} falls in bar {}", half_day_index(ts));

    // A half-day overlaps one component of each equity market's daily
    // close-to-close return: either the trading session itself (intraday)
    // or the gap since the previous close (overnight). The two components
    // of one day always telescope back to close-over-close.
    println!("\nsession alignment:");
    for market in EquityMarket::ALL {
        println!(
            "  {:<10} H1 = {:?}, H2 = {:?}",
            market.to_string(),
            session_alignment(market, Half::H1),
            session_alignment(market, Half::H2),
        );
    }
}
