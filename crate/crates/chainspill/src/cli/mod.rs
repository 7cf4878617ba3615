//! Command-line pipeline driver.
//!
//! Six verbs cover the batch workflow, all operating on one data
//! directory:
//!
//! | verb | reads | writes |
//! |---|---|---|
//! | `synth`    | config only | `canonical/*`, `build/*`, ground truth |
//! | `ingest`   | `raw/*` | `canonical/*` |
//! | `build`    | `canonical/*` | `build/panel.csv`, `build/covariates.csv`, `build/arima_report.csv` |
//! | `describe` | `canonical/*`, `build/*` | `report/describe.csv` |
//! | `estimate` | `build/*` | `report/report.csv`, `report/report.md` |
//! | `report`   | `report/report.csv` | `report/report.md` |
//!
//! Every verb is deterministic given identical inputs, config, and seed,
//! so reruns produce byte-identical artifacts.
//!
//! Exit codes: `0` success, `1` fatal error, `2` partial study
//! completion (some cells estimated, some failed), `64` command-line or
//! config misuse. `estimate` refuses to run when the canonical store is
//! newer than the build outputs; rerun `build` first.

pub mod config;

pub use config::{parse_window, CliFlags, FileConfig, Settings};

use crate::covariates::{
    arima_report_from_csv, build_covariates, covariates_from_csv, covariates_to_csv,
    arima_report_to_csv, native_return_id, staking_innovation_id, CovariateInputs,
};
use crate::econometrics::{adf_test, jarque_bera, ArimaOrder, FitResult, GjrParams};
use crate::ingest::{
    assets::to_assets_jsonl, decode_swap_events, fetch_universe, merge_market_cap, read_caps_csv,
    read_pools_csv, reconstruct_price_series, DecodePolicy, IngestError, SourceDescriptor,
};
use crate::portfolio::{build_chain_panel, panels_from_csv, panels_to_csv, CexMembershipMode};
use crate::series::Series;
use crate::stats;
use crate::study::{
    render_report_csv, render_report_md, run_study, StudyCell, StudyConfig, StudyInputs,
    StudyPanel, StudyReport, Variant,
};
use crate::timebase::{grid, EquityMarket, HalfDayId};
use crate::universe::{ChainId, PortfolioKind};
use chrono::NaiveDate;
use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::SystemTime;

/// Fixed layout inside the data directory.
#[derive(Debug, Clone)]
pub struct DataLayout {
    pub root: PathBuf,
}

impl DataLayout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        DataLayout { root: root.into() }
    }

    pub fn raw(&self) -> PathBuf {
        self.root.join("raw")
    }

    pub fn canonical(&self) -> PathBuf {
        self.root.join("canonical")
    }

    pub fn build_dir(&self) -> PathBuf {
        self.root.join("build")
    }

    pub fn report_dir(&self) -> PathBuf {
        self.root.join("report")
    }

    pub fn canonical_assets(&self) -> PathBuf {
        self.canonical().join("assets.jsonl")
    }

    pub fn canonical_prices(&self) -> PathBuf {
        self.canonical().join("prices.csv")
    }

    pub fn canonical_caps(&self) -> PathBuf {
        self.canonical().join("caps.csv")
    }

    pub fn canonical_series(&self) -> PathBuf {
        self.canonical().join("series.csv")
    }

    pub fn build_panel(&self) -> PathBuf {
        self.build_dir().join("panel.csv")
    }

    pub fn build_covariates(&self) -> PathBuf {
        self.build_dir().join("covariates.csv")
    }

    pub fn build_arima_report(&self) -> PathBuf {
        self.build_dir().join("arima_report.csv")
    }

    pub fn report_csv(&self) -> PathBuf {
        self.report_dir().join("report.csv")
    }

    pub fn report_md(&self) -> PathBuf {
        self.report_dir().join("report.md")
    }

    pub fn describe_csv(&self) -> PathBuf {
        self.report_dir().join("describe.csv")
    }
}

#[derive(Debug, Parser)]
#[command(name = "chainspill", version, about = "Cross-chain return spillover pipeline")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    #[command(flatten)]
    flags: CliFlags,
}

#[derive(Debug, Subcommand)]
enum Verb {
    /// Normalize raw source files into the canonical store.
    Ingest,
    /// Construct portfolio panels and covariates from the canonical store.
    Build,
    /// Emit descriptive statistics for panels and covariate series.
    Describe,
    /// Run the spillover study and write report files.
    Estimate,
    /// Generate a synthetic data directory with known ground truth.
    Synth,
    /// Re-render the readable tables from an existing report.csv.
    Report,
}

/// Parse `argv` and run the requested verb, returning the process exit
/// code. Command-line and config mistakes return 64; runtime failures
/// return 1; a partially completed study returns 2.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            return code;
        }
    };
    let settings = match Settings::resolve(&cli.flags) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return 64;
        }
    };
    if let Some(jobs) = cli.flags.jobs {
        // Ignore failure: the global pool can only be set once per
        // process (relevant when dispatch runs repeatedly in tests).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    let outcome = match cli.verb {
        Verb::Ingest => run_ingest(&settings),
        Verb::Build => run_build(&settings),
        Verb::Describe => run_describe(&settings),
        Verb::Estimate => run_estimate(&settings),
        Verb::Synth => run_synth(&settings),
        Verb::Report => run_report(&settings),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

fn run_synth(settings: &Settings) -> Result<i32, String> {
    let config = settings.synth_config();
    let output = crate::synth::write_synth_data(&config, &settings.data_dir)
        .map_err(|e| e.to_string())?;
    println!(
        "synth: {} half-days over {} .. {} -> {}",
        config.n_half_days,
        output.truth.window.0,
        output.truth.window.1,
        settings.data_dir.display()
    );
    Ok(0)
}

// ---------------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------------

/// Normalize the raw store. `raw/assets.jsonl` is required; pool swap
/// logs (`raw/pools.csv` + `raw/swaps.log`), direct price rows
/// (`raw/prices.csv`), capitalizations (`raw/caps.csv`), and auxiliary
/// level series (`raw/series.csv`) are optional. Prices reconstructed
/// from swap logs win over direct rows for the same asset; caps from
/// several providers are averaged per half-day.
fn run_ingest(settings: &Settings) -> Result<i32, String> {
    let layout = DataLayout::new(&settings.data_dir);
    let raw = layout.raw();
    fs::create_dir_all(layout.canonical())
        .map_err(|e| format!("cannot create {}: {e}", layout.canonical().display()))?;

    // Asset universe.
    let assets_path = raw.join("assets.jsonl");
    if !assets_path.is_file() {
        return Err(format!("missing {}", assets_path.display()));
    }
    let source = SourceDescriptor::fixture(assets_path.to_string_lossy());
    let mut records = fetch_universe(&source, None).map_err(|e| e.to_string())?;
    settings.exclusion.apply(&mut records);
    write_file(&layout.canonical_assets(), &to_assets_jsonl(&records))?;

    // Prices: swap-log reconstruction first, direct rows as fallback.
    let mut prices: BTreeMap<String, Series> = BTreeMap::new();
    let pools_path = raw.join("pools.csv");
    let swaps_path = raw.join("swaps.log");
    if pools_path.is_file() && swaps_path.is_file() {
        let pools = read_pools_csv(&pools_path).map_err(|e| e.to_string())?;
        let known: BTreeSet<String> = pools.iter().map(|p| p.pool_id.clone()).collect();
        let policy = if settings.strict { DecodePolicy::Strict } else { DecodePolicy::Lenient };
        for pool in &pools {
            // The log holds all pools interleaved; each decode pass
            // filters to one pool. Fine at raw-store scale.
            let file = fs::File::open(&swaps_path)
                .map_err(|e| format!("cannot read {}: {e}", swaps_path.display()))?;
            let trades = decode_swap_events(BufReader::new(file), pool, &known, policy)
                .map_err(|e| e.to_string())?;
            if trades.is_empty() {
                log::info!("pool {}: no trades in log", pool.pool_id);
                continue;
            }
            let range = match settings.window {
                Some(w) => w,
                None => {
                    let mut bars = trades.iter().map(|t| t.half_day());
                    let first = bars.next().expect("nonempty trades");
                    bars.fold((first, first), |(lo, hi), b| (lo.min(b), hi.max(b)))
                }
            };
            let id = format!("price.{}", pool.base_asset_id);
            match reconstruct_price_series(&trades, range, settings.staleness_limit, id) {
                Ok(series) => {
                    prices.entry(pool.base_asset_id.clone()).or_insert(series);
                }
                Err(IngestError::NoTrades) => {
                    log::info!("pool {}: no trades inside the window", pool.pool_id);
                }
                Err(e) => return Err(e.to_string()),
            }
        }
    }
    let direct_path = raw.join("prices.csv");
    if direct_path.is_file() {
        let text = read_file(&direct_path)?;
        for (id, series) in covariates_from_csv(&text)? {
            let Some(asset_id) = id.strip_prefix("price.") else {
                return Err(format!("{}: unexpected series id '{id}'", direct_path.display()));
            };
            prices.entry(asset_id.to_string()).or_insert(series);
        }
    }
    let mut price_rows = String::from("series_id,date,half,value\n");
    for series in prices.values() {
        series.push_csv_rows(&mut price_rows);
    }
    write_file(&layout.canonical_prices(), &price_rows)?;

    // Capitalizations, averaged across providers.
    let caps_path = raw.join("caps.csv");
    if caps_path.is_file() {
        let by_asset = read_caps_csv(&caps_path).map_err(|e| e.to_string())?;
        let mut cap_rows = String::from("asset_id,date,half,source,cap\n");
        for (asset_id, observations) in &by_asset {
            let merged = merge_market_cap(observations, format!("cap.{asset_id}"));
            for (bar, value) in merged.iter() {
                if let Some(v) = value {
                    cap_rows
                        .push_str(&format!("{asset_id},{},{},computed,{v}\n", bar.date, bar.half));
                }
            }
        }
        write_file(&layout.canonical_caps(), &cap_rows)?;
    }

    // Auxiliary level series pass through untouched.
    let series_path = raw.join("series.csv");
    if series_path.is_file() {
        fs::copy(&series_path, layout.canonical_series())
            .map_err(|e| format!("cannot copy {}: {e}", series_path.display()))?;
    }

    println!("ingest: {} assets, {} priced -> {}", records.len(), prices.len(),
        layout.canonical().display());
    Ok(0)
}

// ---------------------------------------------------------------------------
// build
// ---------------------------------------------------------------------------

fn run_build(settings: &Settings) -> Result<i32, String> {
    let layout = DataLayout::new(&settings.data_dir);
    let assets_path = layout.canonical_assets();
    if !assets_path.is_file() {
        return Err(format!(
            "missing {}: run ingest or synth first",
            assets_path.display()
        ));
    }
    let source = SourceDescriptor::fixture(assets_path.to_string_lossy());
    let mut records = fetch_universe(&source, None).map_err(|e| e.to_string())?;
    settings.exclusion.apply(&mut records);

    let prices = read_price_csv(&layout.canonical_prices())?;
    let caps = {
        let by_asset = read_caps_csv(&layout.canonical_caps()).map_err(|e| e.to_string())?;
        by_asset
            .iter()
            .map(|(a, obs)| (a.clone(), merge_market_cap(obs, format!("cap.{a}"))))
            .collect::<BTreeMap<String, Series>>()
    };

    let (start, end) = match settings.window {
        Some(w) => w,
        None => derive_price_window(&prices)?,
    };
    let bars = grid(start, end);

    let mut panels = BTreeMap::new();
    for chain in ChainId::ALL {
        let panel =
            build_chain_panel(chain, &records, &prices, &caps, &bars, CexMembershipMode::TimeVarying)
                .map_err(|e| e.to_string())?;
        panels.insert(chain, panel);
    }
    fs::create_dir_all(layout.build_dir())
        .map_err(|e| format!("cannot create {}: {e}", layout.build_dir().display()))?;
    write_file(&layout.build_panel(), &panels_to_csv(&panels, &bars))?;

    let inputs = match fs::read_to_string(layout.canonical_series()) {
        Ok(text) => covariate_inputs_from_series_csv(&text)?,
        Err(_) => CovariateInputs::default(), // panel-only store
    };
    let (activity, global) =
        build_covariates(&inputs, &bars, &settings.arima_bounds).map_err(|e| e.to_string())?;
    write_file(&layout.build_covariates(), &covariates_to_csv(&activity, &global))?;
    write_file(&layout.build_arima_report(), &arima_report_to_csv(&activity.arima_orders))?;

    println!("build: {} half-days ({} .. {}) -> {}", bars.len(), start, end,
        layout.build_dir().display());
    Ok(0)
}

/// Read `prices.csv` into per-asset series (ids carry a `price.` prefix
/// over the asset id).
fn read_price_csv(path: &Path) -> Result<BTreeMap<String, Series>, String> {
    let text = read_file(path)?;
    let mut out = BTreeMap::new();
    for (id, series) in covariates_from_csv(&text)? {
        let Some(asset_id) = id.strip_prefix("price.") else {
            return Err(format!("{}: unexpected series id '{id}'", path.display()));
        };
        out.insert(asset_id.to_string(), series);
    }
    Ok(out)
}

/// Default build window: from one bar after the earliest priced bar
/// (returns need a predecessor) through the latest priced bar.
fn derive_price_window(
    prices: &BTreeMap<String, Series>,
) -> Result<(HalfDayId, HalfDayId), String> {
    let mut lo: Option<HalfDayId> = None;
    let mut hi: Option<HalfDayId> = None;
    for series in prices.values() {
        for (bar, value) in series.iter() {
            if value.is_some() {
                lo = Some(lo.map_or(bar, |b| b.min(bar)));
                hi = Some(hi.map_or(bar, |b| b.max(bar)));
            }
        }
    }
    match (lo, hi) {
        (Some(lo), Some(hi)) if lo < hi => Ok((lo.offset(1), hi)),
        _ => Err("no price data to derive a window from; pass --window".to_string()),
    }
}

/// Route canonical level series into covariate-builder inputs by id
/// convention: `price.native.<SYMBOL>` (with `BTC`), `level.sr.<chain>`,
/// `equity.<market>.open`/`.close` (daily rows on H1), `rate.<ID>`
/// (daily rows on H1).
fn covariate_inputs_from_series_csv(text: &str) -> Result<CovariateInputs, String> {
    let mut inputs = CovariateInputs::default();
    let mut opens: BTreeMap<EquityMarket, BTreeMap<NaiveDate, f64>> = BTreeMap::new();
    let mut closes: BTreeMap<EquityMarket, BTreeMap<NaiveDate, f64>> = BTreeMap::new();

    for (id, series) in covariates_from_csv(text)? {
        if let Some(symbol) = id.strip_prefix("price.native.") {
            if symbol == "BTC" {
                inputs.btc_price = series;
            } else if let Some(chain) =
                ChainId::ALL.into_iter().find(|c| c.native_symbol() == symbol)
            {
                inputs.native_prices.insert(chain, series);
            } else {
                log::warn!("series.csv: unknown native symbol '{symbol}' ignored");
            }
        } else if let Some(key) = id.strip_prefix("level.sr.") {
            match key.parse::<ChainId>() {
                Ok(chain) => {
                    inputs.staking_levels.insert(chain, series);
                }
                Err(_) => log::warn!("series.csv: unknown chain in '{id}' ignored"),
            }
        } else if let Some(rest) = id.strip_prefix("equity.") {
            let Some((market_key, field)) = rest.split_once('.') else {
                return Err(format!("series.csv: bad equity id '{id}'"));
            };
            let market: EquityMarket =
                market_key.parse().map_err(|_| format!("series.csv: bad market in '{id}'"))?;
            let bucket = match field {
                "open" => &mut opens,
                "close" => &mut closes,
                _ => return Err(format!("series.csv: bad equity field in '{id}'")),
            };
            let days = bucket.entry(market).or_default();
            for (bar, value) in series.iter() {
                if let Some(v) = value {
                    days.insert(bar.date, v);
                }
            }
        } else if let Some(rate_id) = id.strip_prefix("rate.") {
            let daily: BTreeMap<NaiveDate, f64> = series
                .iter()
                .filter_map(|(bar, v)| v.map(|v| (bar.date, v)))
                .collect();
            inputs.rate_levels.insert(rate_id.to_string(), daily);
        } else {
            log::warn!("series.csv: unrecognized series '{id}' ignored");
        }
    }

    for (market, open_days) in &opens {
        let Some(close_days) = closes.get(market) else { continue };
        let bars = inputs.equity_bars.entry(*market).or_default();
        for (date, open) in open_days {
            if let Some(close) = close_days.get(date) {
                bars.insert(*date, *open, *close);
            }
        }
    }
    Ok(inputs)
}

// ---------------------------------------------------------------------------
// describe
// ---------------------------------------------------------------------------

/// One descriptive row: moments of the present values, normality and
/// unit-root tests with significance stars, and — for level series that
/// were whitened — the selected ARIMA order and its AIC.
fn describe_row(label: &str, values: &[f64], arima: Option<&(ArimaOrder, f64)>) -> Option<String> {
    if values.len() < 2 {
        return None;
    }
    let jb = jarque_bera(values)
        .map(|r| format!("{:.3}{}", r.statistic, r.rejection.stars()))
        .unwrap_or_default();
    let adf = adf_test(values, None)
        .map(|r| format!("{:.4}{}", r.statistic, r.rejection.stars()))
        .unwrap_or_default();
    let (order, aic) = match arima {
        Some((o, aic)) => (
            format!("({},{},{})", o.p, o.d, o.q),
            if aic.is_nan() { String::new() } else { format!("{aic:.3}") },
        ),
        None => (String::new(), String::new()),
    };
    Some(format!(
        "{label},{:.6},{:.6},{:.6},{:.6},{jb},{adf},{order},{aic}\n",
        stats::mean(values),
        stats::sample_std(values),
        stats::skewness(values),
        stats::excess_kurtosis(values),
    ))
}

/// Table rows in order: the twenty portfolio return series, Bitcoin and
/// native-token returns, session-aligned equity returns, then staking
/// and interest-rate levels with their whitening ARIMA orders.
fn run_describe(settings: &Settings) -> Result<i32, String> {
    let layout = DataLayout::new(&settings.data_dir);
    let panel_text = fs::read_to_string(layout.build_panel())
        .map_err(|_| format!("missing {}: run build first", layout.build_panel().display()))?;
    let panels = panels_from_csv(&panel_text)?;
    let covariates = match fs::read_to_string(layout.build_covariates()) {
        Ok(text) => covariates_from_csv(&text)?,
        Err(_) => BTreeMap::new(),
    };
    let arima_report = match fs::read_to_string(layout.build_arima_report()) {
        Ok(text) => arima_report_from_csv(&text)?,
        Err(_) => BTreeMap::new(),
    };
    let levels = match fs::read_to_string(layout.canonical_series()) {
        Ok(text) => covariates_from_csv(&text)?,
        Err(_) => BTreeMap::new(),
    };

    let mut out = String::from("series,mean,std,skewness,kurtosis,jarque_bera,adf,arima,aic\n");
    for chain in ChainId::ALL {
        for kind in PortfolioKind::ALL {
            if let Some(series) = panels.get(&chain).and_then(|m| m.get(&kind)) {
                let label = format!("{}.{}", chain.key(), kind.key());
                if let Some(row) = describe_row(&label, &series.present(), None) {
                    out.push_str(&row);
                }
            }
        }
    }
    {
        let mut return_row = |id: &str| {
            if let Some(series) = covariates.get(id) {
                if let Some(row) = describe_row(id, &series.present(), None) {
                    out.push_str(&row);
                }
            }
        };
        return_row("R_BTC");
        for chain in ChainId::ALL {
            return_row(&native_return_id(chain));
        }
        for market in EquityMarket::ALL {
            return_row(market.series_id());
        }
    }
    for chain in ChainId::ALL {
        let level_id = format!("level.sr.{}", chain.key());
        let label = staking_innovation_id(chain);
        if let Some(series) = levels.get(&level_id) {
            if let Some(row) = describe_row(&label, &series.present(), arima_report.get(&label)) {
                out.push_str(&row);
            }
        }
    }
    for id in crate::covariates::RATE_IDS {
        let level_id = format!("rate.{id}");
        if let Some(series) = levels.get(&level_id) {
            if let Some(row) = describe_row(id, &series.present(), arima_report.get(id)) {
                out.push_str(&row);
            }
        }
    }

    fs::create_dir_all(layout.report_dir())
        .map_err(|e| format!("cannot create {}: {e}", layout.report_dir().display()))?;
    write_file(&layout.describe_csv(), &out)?;
    print!("{out}");
    Ok(0)
}

// ---------------------------------------------------------------------------
// estimate
// ---------------------------------------------------------------------------

/// True when any existing input is strictly newer than the oldest
/// output.
fn is_stale(inputs: &[PathBuf], outputs: &[PathBuf]) -> Result<bool, String> {
    let mtime = |p: &PathBuf| -> Result<SystemTime, String> {
        fs::metadata(p)
            .and_then(|m| m.modified())
            .map_err(|e| format!("cannot stat {}: {e}", p.display()))
    };
    let mut newest_input: Option<SystemTime> = None;
    for p in inputs.iter().filter(|p| p.is_file()) {
        let t = mtime(p)?;
        newest_input = Some(newest_input.map_or(t, |n| n.max(t)));
    }
    let mut oldest_output: Option<SystemTime> = None;
    for p in outputs {
        let t = mtime(p)?;
        oldest_output = Some(oldest_output.map_or(t, |o| o.min(t)));
    }
    match (newest_input, oldest_output) {
        (Some(i), Some(o)) => Ok(i > o),
        _ => Ok(false),
    }
}

fn run_estimate(settings: &Settings) -> Result<i32, String> {
    let layout = DataLayout::new(&settings.data_dir);
    let panel_path = layout.build_panel();
    let cov_path = layout.build_covariates();
    if !panel_path.is_file() || !cov_path.is_file() {
        return Err(format!("missing {}: run build first", panel_path.display()));
    }
    let canonical_inputs = [
        layout.canonical_assets(),
        layout.canonical_prices(),
        layout.canonical_caps(),
        layout.canonical_series(),
    ];
    if is_stale(&canonical_inputs, &[panel_path.clone(), cov_path.clone()])? {
        return Err("canonical store is newer than build outputs: rerun build".to_string());
    }

    let panel_text = read_file(&panel_path)?;
    let cov_text = read_file(&cov_path)?;
    let inputs = StudyInputs::from_csv(&panel_text, &cov_text)?;
    let window = match settings.window {
        Some(w) => w,
        None => derive_panel_window(&inputs.panels)?,
    };
    let config = StudyConfig {
        variants: settings.variants.clone(),
        window,
        tail: settings.tail,
        bounds: settings.garch_bounds,
        seed: settings.seed,
        restarts: settings.restarts,
    };
    let report = run_study(&inputs, &config);

    fs::create_dir_all(layout.report_dir())
        .map_err(|e| format!("cannot create {}: {e}", layout.report_dir().display()))?;
    write_file(&layout.report_csv(), &render_report_csv(&report))?;
    write_file(&layout.report_md(), &render_report_md(&report))?;

    let done = report.n_cells() - report.n_failed();
    println!("estimate: {}/{} cells estimated -> {}", done, report.n_cells(),
        layout.report_dir().display());
    if report.n_failed() == 0 {
        Ok(0)
    } else if done == 0 {
        Err("every study cell failed".to_string())
    } else {
        Ok(2)
    }
}

/// Default estimation window: the span of present panel observations.
fn derive_panel_window(
    panels: &BTreeMap<ChainId, BTreeMap<PortfolioKind, Series>>,
) -> Result<(HalfDayId, HalfDayId), String> {
    let mut lo: Option<HalfDayId> = None;
    let mut hi: Option<HalfDayId> = None;
    for by_kind in panels.values() {
        for series in by_kind.values() {
            for (bar, value) in series.iter() {
                if value.is_some() {
                    lo = Some(lo.map_or(bar, |b| b.min(bar)));
                    hi = Some(hi.map_or(bar, |b| b.max(bar)));
                }
            }
        }
    }
    match (lo, hi) {
        (Some(lo), Some(hi)) => Ok((lo, hi)),
        _ => Err("panel.csv holds no observations".to_string()),
    }
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

fn run_report(settings: &Settings) -> Result<i32, String> {
    let layout = DataLayout::new(&settings.data_dir);
    let csv_text = fs::read_to_string(layout.report_csv())
        .map_err(|_| format!("missing {}: run estimate first", layout.report_csv().display()))?;
    let window = match settings.window {
        Some(w) => w,
        None => {
            let panel_text = fs::read_to_string(layout.build_panel()).map_err(|_| {
                "cannot determine the report window (no build/panel.csv); pass --window"
                    .to_string()
            })?;
            derive_panel_window(&panels_from_csv(&panel_text)?)?
        }
    };
    let report = parse_report_csv(&csv_text, window)?;
    let md = render_report_md(&report);
    fs::create_dir_all(layout.report_dir())
        .map_err(|e| format!("cannot create {}: {e}", layout.report_dir().display()))?;
    write_file(&layout.report_md(), &md)?;
    print!("{md}");
    Ok(0)
}

/// Rebuild a renderable report from `report.csv` rows. Volatility
/// parameters are not stored there, so the reconstructed cells carry
/// only the order shape; grid slots absent from the file (failed cells)
/// come back as failures and render as em-dashes.
fn parse_report_csv(text: &str, window: (HalfDayId, HalfDayId)) -> Result<StudyReport, String> {
    struct Group {
        names: Vec<String>,
        coefs: Vec<f64>,
        tstats: Vec<f64>,
        order: (usize, usize, usize),
        r2: f64,
        n_obs: usize,
    }

    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.starts_with("variant,chain,panel,coef_name,") => {}
        other => return Err(format!("report.csv: unexpected header {other:?}")),
    }

    let mut groups: BTreeMap<(usize, usize, usize), Group> = BTreeMap::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 12 {
            return Err(format!("report.csv row {i}: {} fields, expected 12", fields.len()));
        }
        let bad = |what: &str| format!("report.csv row {i}: bad {what}");
        let variant: Variant = fields[0].parse().map_err(|_| bad("variant"))?;
        let chain: ChainId = fields[1].parse().map_err(|_| bad("chain"))?;
        let panel: StudyPanel = fields[2].parse().map_err(|_| bad("panel"))?;
        let key = (variant.index(), panel.index(), chain.ordinal());
        let group = groups.entry(key).or_insert_with(|| Group {
            names: Vec::new(),
            coefs: Vec::new(),
            tstats: Vec::new(),
            order: (0, 0, 0),
            r2: f64::NAN,
            n_obs: 0,
        });
        group.names.push(fields[3].to_string());
        group.coefs.push(fields[4].parse().map_err(|_| bad("estimate"))?);
        group.tstats.push(fields[5].parse().map_err(|_| bad("tstat"))?);
        group.order = (
            fields[7].parse().map_err(|_| bad("p"))?,
            fields[8].parse().map_err(|_| bad("o"))?,
            fields[9].parse().map_err(|_| bad("q"))?,
        );
        group.r2 = fields[10].parse().map_err(|_| bad("r2"))?;
        group.n_obs = fields[11].parse().map_err(|_| bad("n_obs"))?;
    }

    let present: BTreeSet<usize> = groups.keys().map(|(v, _, _)| *v).collect();
    let mut cells = Vec::new();
    for variant in Variant::ALL.into_iter().filter(|v| present.contains(&v.index())) {
        for panel in StudyPanel::ALL {
            for chain in ChainId::ALL {
                let key = (variant.index(), panel.index(), chain.ordinal());
                let outcome = match groups.remove(&key) {
                    None => Err("not present in report.csv".to_string()),
                    Some(g) => Ok(FitResult {
                        mean_names: g.names,
                        mean_coefficients: g.coefs,
                        mean_tstats: g.tstats,
                        variance: GjrParams {
                            omega: f64::NAN,
                            arch: vec![f64::NAN; g.order.0],
                            leverage: vec![f64::NAN; g.order.1],
                            garch: vec![f64::NAN; g.order.2],
                        },
                        variance_names: Vec::new(),
                        variance_tstats: Vec::new(),
                        robust_mean_tstats: None,
                        loglik: f64::NAN,
                        aic: f64::NAN,
                        bic: f64::NAN,
                        r2: g.r2,
                        adj_r2: g.r2,
                        n_obs: g.n_obs,
                        residuals: Vec::new(),
                        sigma2_path: Vec::new(),
                        grad_max_norm: f64::NAN,
                        converged: true,
                        stationarity_boundary: false,
                        two_step: false,
                    }),
                };
                cells.push(StudyCell { variant, chain, panel, outcome });
            }
        }
    }
    Ok(StudyReport { cells, window })
}

// ---------------------------------------------------------------------------

fn read_file(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn write_file(path: &Path, content: &str) -> Result<(), String> {
    fs::write(path, content).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

// ---------------------------------------------------------------------------
