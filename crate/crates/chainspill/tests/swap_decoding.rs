//! Golden-file contract for raw swap-event decoding.
//!
//! The fixture log under `tests/fixtures/swaps/` carries two pools' events
//! in the documented wire format (`pool_id,ts,payload_hex` with two signed
//! 256-bit words). `expected_trades.csv` was computed by hand from the
//! payloads when the fixture was frozen; these tests pin the decoder to it
//! and to the strict-mode error positions.

use chainspill::ingest::{
    decode_swap_events, read_pools_csv, reconstruct_price_series, DecodePolicy, Direction,
    IngestError, PoolMeta, SwapTrade,
};
use chainspill::timebase::{Half, HalfDayId};
use chrono::NaiveDate;
use std::collections::BTreeSet;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/swaps").join(name)
}

fn weth_pool() -> PoolMeta {
    let pools = read_pools_csv(&fixture("pools.csv")).expect("pools.csv parses");
    assert_eq!(pools.len(), 1, "fixture registers exactly the WETH/USDC pool");
    pools.into_iter().next().unwrap()
}

fn decode(log: &str, known: &[&str], policy: DecodePolicy) -> Result<Vec<SwapTrade>, IngestError> {
    let reader = BufReader::new(File::open(fixture(log)).expect("fixture log opens"));
    let known: BTreeSet<String> = known.iter().map(|s| s.to_string()).collect();
    decode_swap_events(reader, &weth_pool(), &known, policy)
}

struct ExpectedTrade {
    ts: String,
    base_amount: f64,
    quote_amount: f64,
    direction: Direction,
    price: f64,
}

fn expected_trades() -> Vec<ExpectedTrade> {
    let text = std::fs::read_to_string(fixture("expected_trades.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("ts,base_amount,quote_amount,direction,price"));
    lines
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            assert_eq!(f.len(), 5, "bad expected row: {line}");
            ExpectedTrade {
                ts: f[0].to_string(),
                base_amount: f[1].parse().unwrap(),
                quote_amount: f[2].parse().unwrap(),
                direction: f[3].parse().unwrap(),
                price: f[4].parse().unwrap(),
            }
        })
        .collect()
}

#[test]
fn golden_log_decodes_to_expected_trades() {
    let trades =
        decode("swap_events.log", &["p-weth-usdc", "p-dai-usdc"], DecodePolicy::Strict).unwrap();
    let expected = expected_trades();
    assert_eq!(trades.len(), 12, "twelve WETH/USDC events in the fixture");
    assert_eq!(trades.len(), expected.len());
    for (got, want) in trades.iter().zip(&expected) {
        assert_eq!(got.pool_id, "p-weth-usdc");
        assert_eq!(got.ts.to_rfc3339_opts(chrono::SecondsFormat::Secs, true), want.ts);
        assert_eq!(got.direction, want.direction);
        // amounts are exact decimal rescalings of the fixture payloads
        assert!((got.base_amount - want.base_amount).abs() <= 1e-12 * want.base_amount.abs());
        assert!((got.quote_amount - want.quote_amount).abs() <= 1e-12 * want.quote_amount.abs());
        assert!((got.price() - want.price).abs() <= 1e-12 * want.price.abs());
    }
}

#[test]
fn strict_mode_flags_the_unregistered_pool_by_line_index() {
    // p-dai-usdc is not in the registry here; its first event sits on the
    // third line of the log (zero-based index 2).
    let err = decode("swap_events.log", &["p-weth-usdc"], DecodePolicy::Strict).unwrap_err();
    match err {
        IngestError::UnknownPool { index, pool_id } => {
            assert_eq!(index, 2);
            assert_eq!(pool_id, "p-dai-usdc");
        }
        other => panic!("expected UnknownPool, got {other:?}"),
    }
}

#[test]
fn strict_mode_reports_the_malformed_record_index() {
    // swap_events_bad.log inserts a truncated payload at zero-based line 5.
    let err =
        decode("swap_events_bad.log", &["p-weth-usdc", "p-dai-usdc"], DecodePolicy::Strict)
            .unwrap_err();
    match err {
        IngestError::MalformedEvent { index, detail } => {
            assert_eq!(index, 5);
            assert!(detail.contains("128"), "detail should name the length rule: {detail}");
        }
        other => panic!("expected MalformedEvent, got {other:?}"),
    }
}

#[test]
fn lenient_mode_skips_bad_records_and_matches_the_golden_decode() {
    let good =
        decode("swap_events.log", &["p-weth-usdc", "p-dai-usdc"], DecodePolicy::Strict).unwrap();
    let salvaged = decode("swap_events_bad.log", &[], DecodePolicy::Lenient).unwrap();
    assert_eq!(good, salvaged);
}

#[test]
fn fixture_trades_reconstruct_a_last_price_half_day_series() {
    let trades =
        decode("swap_events.log", &["p-weth-usdc", "p-dai-usdc"], DecodePolicy::Strict).unwrap();
    let start = HalfDayId::new(NaiveDate::from_ymd_opt(2024, 5, 1).unwrap(), Half::H1);
    let end = HalfDayId::new(NaiveDate::from_ymd_opt(2024, 5, 4).unwrap(), Half::H2);
    let series = reconstruct_price_series(&trades, (start, end), 4, "price.eth-weth").unwrap();
    // last trade of each half-day wins: 2024-05-01 H1 closes on the
    // 11:59:59 trade at 3010, H2 on the 18:00 trade at 3035
    assert_eq!(series.get(start), Some(3010.0));
    assert_eq!(series.get(start.offset(1)), Some(3035.0));
    // 2024-05-04 H1 has the 09:00 trade at 3040
    assert_eq!(series.get(end.predecessor()), Some(3040.0));
    assert!(series.present().len() >= 7, "every fixture half-day with trades is priced");
}
