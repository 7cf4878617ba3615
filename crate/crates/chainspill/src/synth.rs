//! Synthetic data-generating process: the project's ground-truth oracle.
//!
//! The generator draws a five-chain half-day return panel from a
//! structural model with configurable cross-chain exposures, GJR-GARCH
//! innovations, AR(1) activity processes, and optional injected extreme
//! events — then pushes everything through the *real* universe,
//! portfolio, and covariate builders and writes the same file formats
//! the live pipeline produces. Downstream estimation can therefore be
//! validated end-to-end against parameters known by construction.
//!
//! # Structural model
//!
//! The spillover matrix `B` is split by position relative to the
//! diagonal, chains in canonical order: entries below the diagonal act
//! contemporaneously (chain c may react to chains before it within the
//! same half-day), entries above it act at one half-day lag. With `C`
//! the strict lower part and `U` the strict upper part,
//!
//! ```text
//! (I - C) r_t = own_lag * r_{t-1} + U r_{t-1} + b0 * x_t + e_t
//! ```
//!
//! where `x_t` holds each chain's CEX-portfolio factor and `e_t` the
//! per-chain GJR-GARCH innovations. `I - C` is unit lower triangular,
//! so the solve is forward substitution and the panel is stable iff the
//! spectral radius of `(I - C)^{-1} (own_lag * I + U)` is below one.
//!
//! # Asset line-up per chain
//!
//! | asset | cap | CEX listed | return |
//! |---|---|---|---|
//! | core | 300 | from the past | x (own CEX factor) |
//! | blue | 100 | varies (BSC lists mid-sample) | x |
//! | loc | 250 | never | r + local noise |
//! | bal | 350 | never | residual balancer |
//! | core copy (bridged from previous chain) | 50 | never | previous chain's x |
//! | wnative | 500 | never | excluded from all portfolios |
//!
//! The balancer return is chosen so the cap-weighted portfolio-wide
//! return equals the structural `r_t` *exactly*, and both CEX assets
//! return `x_t` so the CEX portfolio equals the factor exactly. Each
//! chain's `core` asset is bridged to the next chain in the cycle,
//! making it multi-chain (hence absent from Local portfolios) and
//! giving every chain one incoming non-CEX copy.

use crate::covariates::{
    build_covariates, ActivitySet, ArimaOrderBounds, CovariateError, CovariateInputs, DailyBars,
    GlobalSet,
};
use crate::econometrics::GjrParams;
use crate::ingest::assets::to_assets_jsonl;
use crate::portfolio::{
    build_chain_panel, panels_to_csv, CexMembershipMode, ChainPanel, PortfolioError,
};
use crate::series::Series;
use crate::timebase::{grid, EquityMarket, Half, HalfDayId};
use crate::universe::{mark_multi_chain, AssetRecord, ChainId, ExclusionClass};
use chrono::{Datelike, NaiveDate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

/// Minimum panel length: covariate innovation extraction needs fifty
/// level observations, and estimation needs headroom beyond that.
pub const MIN_HALF_DAYS: usize = 60;

const N_CHAINS: usize = 5;

/// Market-cap constants of the synthetic line-up.
const CAP_CORE: f64 = 300.0;
const CAP_COPY: f64 = 50.0;
const CAP_BLUE: f64 = 100.0;
const CAP_LOC: f64 = 250.0;
const CAP_BAL: f64 = 350.0;
const CAP_WNATIVE: f64 = 500.0;
const CAP_ALL: f64 = CAP_CORE + CAP_COPY + CAP_BLUE + CAP_LOC + CAP_BAL;

/// Fixed small-noise scales of the background processes.
const EQUITY_STEP_SIGMA: f64 = 0.01;
const RATE_STEP_SIGMA: f64 = 0.02;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("unstable configuration: companion spectral radius {spectral_radius:.6} >= 1")]
    UnstableConfig { spectral_radius: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Portfolio(#[from] PortfolioError),
    #[error(transparent)]
    Covariate(#[from] CovariateError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// AR(1) process parameters: `y_t = mean + ar (y_{t-1} - mean) + sigma z_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ar1Params {
    pub mean: f64,
    pub ar: f64,
    pub sigma: f64,
}

/// Parameters of the activity block: staking reward-rate levels and
/// native-token log returns (Bitcoin shares the native parameters).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActivityParams {
    pub staking: Ar1Params,
    pub native: Ar1Params,
}

/// Serializable GJR-GARCH variance specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GjrSpec {
    pub omega: f64,
    pub alpha: Vec<f64>,
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
}

impl GjrSpec {
    pub fn params(&self) -> GjrParams {
        GjrParams {
            omega: self.omega,
            arch: self.alpha.clone(),
            leverage: self.gamma.clone(),
            garch: self.beta.clone(),
        }
    }

    pub fn persistence(&self) -> f64 {
        self.params().persistence()
    }

    pub fn unconditional_variance(&self) -> f64 {
        self.params().unconditional_variance()
    }
}

/// One exogenous extreme event: at half-day `offset` the source chain's
/// return is shifted by `magnitude` and every other chain's return by
/// `dummy_effect * magnitude`. The shift is applied after the
/// structural solve, so it lands at exactly the configured bar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InjectedEvent {
    pub offset: usize,
    pub source: ChainId,
    pub magnitude: f64,
}

/// Full generator configuration. Deterministic given `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgpConfig {
    pub seed: u64,
    /// Date of the first half-day (H1).
    pub start_date: NaiveDate,
    pub n_half_days: usize,
    /// Coefficient on each chain's own lagged return.
    pub own_lag: f64,
    /// Coefficient on each chain's own CEX factor.
    pub cex_loading: f64,
    /// 5x5 exposure matrix, `spillover[target][source]`, zero diagonal.
    /// Below-diagonal entries act contemporaneously, above-diagonal at
    /// one half-day lag.
    pub spillover: Vec<Vec<f64>>,
    /// Per-chain variance processes, canonical chain order.
    pub garch: Vec<GjrSpec>,
    pub activity: ActivityParams,
    /// Standard deviation of the CEX factors x.
    pub sigma_x: f64,
    /// Standard deviation of the `loc` asset's idiosyncratic noise.
    pub sigma_local: f64,
    /// Cross-chain effect multiplier of injected events.
    pub dummy_effect: f64,
    pub events: Vec<InjectedEvent>,
    /// ARIMA search grid used when building covariate innovations.
    #[serde(default)]
    pub arima_bounds: ArimaOrderBounds,
}

impl DgpConfig {
    /// A stable, stationary baseline configuration: no spillovers, mild
    /// own-lag, moderately persistent GJR variance on every chain.
    pub fn example(seed: u64) -> Self {
        DgpConfig {
            seed,
            start_date: NaiveDate::from_ymd_opt(2024, 1, 1).unwrap(),
            n_half_days: 800,
            own_lag: 0.05,
            cex_loading: 0.5,
            spillover: vec![vec![0.0; N_CHAINS]; N_CHAINS],
            garch: (0..N_CHAINS)
                .map(|_| GjrSpec {
                    omega: 5e-5,
                    alpha: vec![0.05],
                    gamma: vec![0.08],
                    beta: vec![0.85],
                })
                .collect(),
            activity: ActivityParams {
                staking: Ar1Params { mean: 4.5, ar: 0.9, sigma: 0.1 },
                native: Ar1Params { mean: 0.0005, ar: 0.1, sigma: 0.02 },
            },
            sigma_x: 0.01,
            sigma_local: 0.005,
            dummy_effect: 0.25,
            events: Vec::new(),
            arima_bounds: ArimaOrderBounds::default(),
        }
    }

    pub fn start(&self) -> HalfDayId {
        HalfDayId::new(self.start_date, Half::H1)
    }

    /// The VAR companion matrix `(I - C)^{-1} (own_lag I + U)`.
    pub fn companion(&self) -> nalgebra::DMatrix<f64> {
        let identity_minus_c = nalgebra::DMatrix::<f64>::from_fn(N_CHAINS, N_CHAINS, |i, j| {
            if i == j {
                1.0
            } else if j < i {
                -self.spillover[i][j]
            } else {
                0.0
            }
        });
        let lagged = nalgebra::DMatrix::<f64>::from_fn(N_CHAINS, N_CHAINS, |i, j| {
            if i == j {
                self.own_lag
            } else if j > i {
                self.spillover[i][j]
            } else {
                0.0
            }
        });
        let inv = identity_minus_c.try_inverse().expect("unit lower triangular");
        inv * lagged
    }

    pub fn spectral_radius(&self) -> f64 {
        self.companion().complex_eigenvalues().iter().map(|e| e.norm()).fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.n_half_days < MIN_HALF_DAYS {
            return Err(SynthError::InvalidConfig(format!(
                "n_half_days {} below minimum {MIN_HALF_DAYS}",
                self.n_half_days
            )));
        }
        if self.spillover.len() != N_CHAINS
            || self.spillover.iter().any(|row| row.len() != N_CHAINS)
        {
            return Err(SynthError::InvalidConfig("spillover matrix must be 5x5".into()));
        }
        for (i, row) in self.spillover.iter().enumerate() {
            if row[i] != 0.0 {
                return Err(SynthError::InvalidConfig(format!(
                    "spillover diagonal [{i}][{i}] must be 0 (own lag is separate)"
                )));
            }
        }
        if self.garch.len() != N_CHAINS {
            return Err(SynthError::InvalidConfig(format!(
                "need one GJR spec per chain, got {}",
                self.garch.len()
            )));
        }
        for (i, spec) in self.garch.iter().enumerate() {
            if spec.omega <= 0.0 {
                return Err(SynthError::InvalidConfig(format!("garch[{i}]: omega must be > 0")));
            }
            let coefs = spec.alpha.iter().chain(&spec.gamma).chain(&spec.beta);
            if coefs.into_iter().any(|c| *c < 0.0) {
                return Err(SynthError::InvalidConfig(format!(
                    "garch[{i}]: variance coefficients must be >= 0"
                )));
            }
            if spec.persistence() >= 1.0 {
                return Err(SynthError::InvalidConfig(format!(
                    "garch[{i}]: persistence {} >= 1",
                    spec.persistence()
                )));
            }
        }
        if self.sigma_x <= 0.0 || self.sigma_local < 0.0 {
            return Err(SynthError::InvalidConfig("factor noise scales must be positive".into()));
        }
        for ar1 in [self.activity.staking, self.activity.native] {
            if ar1.ar.abs() >= 1.0 || ar1.sigma <= 0.0 {
                return Err(SynthError::InvalidConfig(
                    "activity AR(1) needs |ar| < 1 and sigma > 0".into(),
                ));
            }
        }
        for (i, event) in self.events.iter().enumerate() {
            if event.offset >= self.n_half_days {
                return Err(SynthError::InvalidConfig(format!(
                    "event {i} offset {} beyond panel length {}",
                    event.offset, self.n_half_days
                )));
            }
        }
        let rho = self.spectral_radius();
        if rho >= 1.0 {
            return Err(SynthError::UnstableConfig { spectral_radius: rho });
        }
        Ok(())
    }
}

/// The generator parameters plus derived quantities, as written to
/// `truth.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub config: DgpConfig,
    /// omega / (1 - persistence) per chain.
    pub unconditional_variances: Vec<f64>,
    pub spectral_radius: f64,
    /// First and last half-day of the panel grid.
    pub window: (String, String),
}

/// Everything one generation run produces, in memory.
#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub config: DgpConfig,
    pub grid: Vec<HalfDayId>,
    pub records: Vec<AssetRecord>,
    /// Asset prices keyed by asset id.
    pub prices: BTreeMap<String, Series>,
    /// Asset market caps keyed by asset id.
    pub caps: BTreeMap<String, Series>,
    /// Structural chain returns r, aligned to `grid`.
    pub chain_returns: BTreeMap<ChainId, Vec<f64>>,
    /// CEX factors x, aligned to `grid`.
    pub cex_factors: BTreeMap<ChainId, Vec<f64>>,
    pub panels: BTreeMap<ChainId, ChainPanel>,
    pub activity: ActivitySet,
    pub global: GlobalSet,
    pub staking_levels: BTreeMap<ChainId, Series>,
    pub native_prices: BTreeMap<ChainId, Series>,
    pub btc_price: Series,
    pub equity: BTreeMap<EquityMarket, DailyBars>,
    pub rates: BTreeMap<String, BTreeMap<NaiveDate, f64>>,
    pub truth: TruthRecord,
}

/// Simulate a GJR-GARCH innovation path from standard-normal draws.
/// Pre-sample squared innovations and variances are pinned at the
/// unconditional variance.
pub fn simulate_gjr_innovations(spec: &GjrSpec, z: &[f64]) -> Vec<f64> {
    let uncond = spec.unconditional_variance();
    let mut e = Vec::with_capacity(z.len());
    let mut sigma2 = Vec::with_capacity(z.len());
    for (t, zt) in z.iter().enumerate() {
        let mut s2 = spec.omega;
        for (i, a) in spec.alpha.iter().enumerate() {
            let e2 = if t > i { e[t - 1 - i] * e[t - 1 - i] } else { uncond };
            s2 += a * e2;
        }
        for (j, g) in spec.gamma.iter().enumerate() {
            let term = if t > j {
                let prev: f64 = e[t - 1 - j];
                if prev < 0.0 {
                    prev * prev
                } else {
                    0.0
                }
            } else {
                // pre-sample: innovations are negative half the time
                0.5 * uncond
            };
            s2 += g * term;
        }
        for (k, b) in spec.beta.iter().enumerate() {
            let s2_prev = if t > k { sigma2[t - 1 - k] } else { uncond };
            s2 += b * s2_prev;
        }
        sigma2.push(s2);
        e.push(s2.sqrt() * zt);
    }
    e
}

/// Draw the full synthetic panel. Deterministic given `config.seed`:
/// a single counter-based stream is consumed in a fixed phase order
/// (CEX factors, GJR shocks, local noise, staking levels, native and
/// Bitcoin returns, equity bars, rates), so adding data of one kind
/// never perturbs another run's draws within a phase.
pub fn generate_panel(config: &DgpConfig) -> Result<SynthOutput, SynthError> {
    config.validate()?;
    let t_len = config.n_half_days;
    let start = config.start();
    let end = start.offset(t_len as i64 - 1);
    let bars = grid(start, end);
    let origin = start.predecessor();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let std_normal = Normal::new(0.0, 1.0).unwrap();
    let mut draws = |n: usize, sigma: f64| -> Vec<f64> {
        (0..n).map(|_| sigma * std_normal.sample(&mut rng)).collect()
    };

    // Phase 1-3: return-block shocks.
    let x: Vec<Vec<f64>> = (0..N_CHAINS).map(|_| draws(t_len, config.sigma_x)).collect();
    let z: Vec<Vec<f64>> = (0..N_CHAINS).map(|_| draws(t_len, 1.0)).collect();
    let delta: Vec<Vec<f64>> = (0..N_CHAINS).map(|_| draws(t_len, config.sigma_local)).collect();

    let e: Vec<Vec<f64>> = (0..N_CHAINS)
        .map(|c| simulate_gjr_innovations(&config.garch[c], &z[c]))
        .collect();

    // Structural forward solve: (I - C) r_t = rhs_t.
    let mut r = vec![vec![0.0f64; t_len]; N_CHAINS];
    for t in 0..t_len {
        let mut solved = [0.0f64; N_CHAINS];
        for c in 0..N_CHAINS {
            let mut rhs = config.cex_loading * x[c][t] + e[c][t];
            if t > 0 {
                rhs += config.own_lag * r[c][t - 1];
                for j in (c + 1)..N_CHAINS {
                    rhs += config.spillover[c][j] * r[j][t - 1];
                }
            }
            for j in 0..c {
                rhs += config.spillover[c][j] * solved[j];
            }
            solved[c] = rhs;
        }
        for c in 0..N_CHAINS {
            r[c][t] = solved[c];
        }
    }
    for event in &config.events {
        for c in 0..N_CHAINS {
            let shift = if c == event.source.ordinal() {
                event.magnitude
            } else {
                config.dummy_effect * event.magnitude
            };
            r[c][event.offset] += shift;
        }
    }

    // Phase 4-6: activity processes.
    let ar1_path = |params: Ar1Params, shocks: &[f64]| -> Vec<f64> {
        let mut level = params.mean;
        shocks
            .iter()
            .map(|s| {
                level = params.mean + params.ar * (level - params.mean) + s;
                level
            })
            .collect()
    };
    let staking: Vec<Vec<f64>> = (0..N_CHAINS)
        .map(|_| {
            let shocks = draws(t_len + 1, config.activity.staking.sigma);
            ar1_path(config.activity.staking, &shocks)
        })
        .collect();
    let native_r: Vec<Vec<f64>> = (0..N_CHAINS)
        .map(|_| {
            let shocks = draws(t_len, config.activity.native.sigma);
            ar1_path(config.activity.native, &shocks)
        })
        .collect();
    let btc_r = {
        let shocks = draws(t_len, config.activity.native.sigma);
        ar1_path(config.activity.native, &shocks)
    };

    // Phase 7: equity daily bars on weekdays, with a lead-in so the
    // first in-window overnight return has a prior close.
    let first_day = start.date - chrono::Duration::days(14);
    let last_day = end.date;
    let mut equity: BTreeMap<EquityMarket, DailyBars> = BTreeMap::new();
    for market in EquityMarket::ALL {
        let mut bars_by_day = DailyBars::default();
        let mut close_prev = 100.0f64;
        let mut day = first_day;
        while day <= last_day {
            if day.weekday().num_days_from_monday() < 5 {
                let steps = draws(2, EQUITY_STEP_SIGMA);
                let open = close_prev * steps[0].exp();
                let close = open * steps[1].exp();
                bars_by_day.insert(day, open, close);
                close_prev = close;
            }
            day = day.succ_opt().unwrap();
        }
        equity.insert(market, bars_by_day);
    }

    // Phase 8: daily interest-rate random walks on weekdays.
    let mut rates: BTreeMap<String, BTreeMap<NaiveDate, f64>> = BTreeMap::new();
    for (id, start_level) in [("HIBOR", 4.5f64), ("EURIBOR", 3.0), ("TREA", 4.0)] {
        let mut level = start_level;
        let mut daily = BTreeMap::new();
        let mut day = first_day;
        while day <= last_day {
            if day.weekday().num_days_from_monday() < 5 {
                level += draws(1, RATE_STEP_SIGMA)[0];
                daily.insert(day, level);
            }
            day = day.succ_opt().unwrap();
        }
        rates.insert(id.to_string(), daily);
    }

    // Asset universe: five locals plus one incoming bridged copy per
    // chain, and one excluded wrapped-native token.
    let listing_old = start.date - chrono::Duration::days(365);
    let listing_mid = start.offset(t_len as i64 / 2).date;
    let mut records: Vec<AssetRecord> = Vec::new();
    for chain in ChainId::ALL {
        let key = chain.key();
        let blue_listing = if chain == ChainId::Bsc { listing_mid } else { listing_old };
        let mut push = |suffix: &str,
                        logical: String,
                        listed: Option<NaiveDate>,
                        exclusion: ExclusionClass| {
            records.push(AssetRecord {
                asset_id: format!("{key}-{suffix}"),
                logical_id: logical,
                chain,
                symbol: format!("{}-{}", suffix.to_uppercase(), chain.native_symbol()),
                cex_listing_date: listed,
                exclusion,
                multi_chain: false,
            });
        };
        push("core", format!("lg-core-{key}"), Some(listing_old), ExclusionClass::None);
        push("blue", format!("lg-blue-{key}"), Some(blue_listing), ExclusionClass::None);
        push("loc", format!("lg-loc-{key}"), None, ExclusionClass::None);
        push("bal", format!("lg-bal-{key}"), None, ExclusionClass::None);
        push("wnative", format!("lg-wnative-{key}"), None, ExclusionClass::WrappedNative);
        // incoming bridged copy of the previous chain's core asset
        let origin_chain = ChainId::ALL[(chain.ordinal() + N_CHAINS - 1) % N_CHAINS];
        records.push(AssetRecord {
            asset_id: format!("{}-core-on-{key}", origin_chain.key()),
            logical_id: format!("lg-core-{}", origin_chain.key()),
            chain,
            symbol: format!("CORE-{}X", origin_chain.native_symbol()),
            cex_listing_date: None,
            exclusion: ExclusionClass::None,
            multi_chain: false,
        });
    }
    mark_multi_chain(&mut records);

    // Per-asset return paths, then prices by cumulative compounding.
    let mut asset_returns: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut caps: BTreeMap<String, Series> = BTreeMap::new();
    for (c, chain) in ChainId::ALL.into_iter().enumerate() {
        let key = chain.key();
        let prev_c = (c + N_CHAINS - 1) % N_CHAINS;
        let loc: Vec<f64> = (0..t_len).map(|t| r[c][t] + delta[c][t]).collect();
        // cap-weighted sum over all five members must equal r exactly
        let bal: Vec<f64> = (0..t_len)
            .map(|t| {
                (CAP_ALL * r[c][t]
                    - CAP_CORE * x[c][t]
                    - CAP_BLUE * x[c][t]
                    - CAP_LOC * loc[t]
                    - CAP_COPY * x[prev_c][t])
                    / CAP_BAL
            })
            .collect();
        let wnative: Vec<f64> = vec![0.01; t_len];
        let origin_key = ChainId::ALL[prev_c].key();
        let rows: [(String, Vec<f64>, f64); 6] = [
            (format!("{key}-core"), x[c].clone(), CAP_CORE),
            (format!("{key}-blue"), x[c].clone(), CAP_BLUE),
            (format!("{key}-loc"), loc, CAP_LOC),
            (format!("{key}-bal"), bal, CAP_BAL),
            (format!("{key}-wnative"), wnative, CAP_WNATIVE),
            (format!("{origin_key}-core-on-{key}"), x[prev_c].clone(), CAP_COPY),
        ];
        for (asset_id, returns, cap) in rows {
            let cap_series = Series::new(
                format!("cap.{asset_id}"),
                origin,
                vec![Some(cap); t_len + 1],
            );
            caps.insert(asset_id.clone(), cap_series);
            asset_returns.insert(asset_id, returns);
        }
    }
    let mut prices: BTreeMap<String, Series> = BTreeMap::new();
    for (asset_id, returns) in &asset_returns {
        let mut values = Vec::with_capacity(t_len + 1);
        let mut level = 100.0f64;
        values.push(Some(level));
        for ret in returns {
            level *= ret.exp();
            values.push(Some(level));
        }
        prices.insert(asset_id.clone(), Series::new(format!("price.{asset_id}"), origin, values));
    }

    // Panels and covariates through the real builders.
    let mut panels = BTreeMap::new();
    for chain in ChainId::ALL {
        let panel = build_chain_panel(
            chain,
            &records,
            &prices,
            &caps,
            &bars,
            CexMembershipMode::TimeVarying,
        )?;
        panels.insert(chain, panel);
    }

    let mut staking_levels = BTreeMap::new();
    let mut native_prices = BTreeMap::new();
    for (c, chain) in ChainId::ALL.into_iter().enumerate() {
        let values: Vec<Option<f64>> = staking[c].iter().map(|v| Some(*v)).collect();
        staking_levels
            .insert(chain, Series::new(format!("level.sr.{}", chain.key()), origin, values));
        let mut level = 100.0f64;
        let mut values = vec![Some(level)];
        for ret in &native_r[c] {
            level *= ret.exp();
            values.push(Some(level));
        }
        native_prices.insert(
            chain,
            Series::new(format!("price.native.{}", chain.native_symbol()), origin, values),
        );
    }
    let btc_price = {
        let mut level = 100.0f64;
        let mut values = vec![Some(level)];
        for ret in &btc_r {
            level *= ret.exp();
            values.push(Some(level));
        }
        Series::new("price.native.BTC", origin, values)
    };

    let inputs = CovariateInputs {
        native_prices: native_prices.clone(),
        btc_price: btc_price.clone(),
        staking_levels: staking_levels.clone(),
        equity_bars: equity.clone(),
        rate_levels: rates.clone(),
    };
    let (activity, global) = build_covariates(&inputs, &bars, &config.arima_bounds)?;

    let truth = TruthRecord {
        config: config.clone(),
        unconditional_variances: config.garch.iter().map(|g| g.unconditional_variance()).collect(),
        spectral_radius: config.spectral_radius(),
        window: (start.to_string(), end.to_string()),
    };

    Ok(SynthOutput {
        config: config.clone(),
        grid: bars,
        records,
        prices,
        caps,
        chain_returns: ChainId::ALL.into_iter().zip(r.into_iter()).collect(),
        cex_factors: ChainId::ALL.into_iter().zip(x.into_iter()).collect(),
        panels,
        activity,
        global,
        staking_levels,
        native_prices,
        btc_price,
        equity,
        rates,
        truth,
    })
}

/// Generate and write a full synthetic data directory:
/// `canonical/{assets.jsonl, prices.csv, caps.csv, series.csv}` plus
/// `build/{panel.csv, covariates.csv, arima_report.csv, truth.json}`.
/// The canonical files round-trip through the real build stage to the
/// same build outputs.
pub fn write_synth_data(config: &DgpConfig, root: &Path) -> Result<SynthOutput, SynthError> {
    let output = generate_panel(config)?;
    let canonical = root.join("canonical");
    let build = root.join("build");
    std::fs::create_dir_all(&canonical)?;
    std::fs::create_dir_all(&build)?;

    std::fs::write(canonical.join("assets.jsonl"), to_assets_jsonl(&output.records))?;

    let mut price_rows = String::from("series_id,date,half,value\n");
    for series in output.prices.values() {
        series.push_csv_rows(&mut price_rows);
    }
    std::fs::write(canonical.join("prices.csv"), price_rows)?;

    let mut cap_rows = String::from("asset_id,date,half,source,cap\n");
    for (asset_id, series) in &output.caps {
        for (bar, value) in series.iter() {
            if let Some(v) = value {
                cap_rows.push_str(&format!(
                    "{asset_id},{},{},computed,{v}\n",
                    bar.date, bar.half
                ));
            }
        }
    }
    std::fs::write(canonical.join("caps.csv"), cap_rows)?;

    let mut series_rows = String::from("series_id,date,half,value\n");
    for series in output.native_prices.values() {
        series.push_csv_rows(&mut series_rows);
    }
    output.btc_price.push_csv_rows(&mut series_rows);
    for series in output.staking_levels.values() {
        series.push_csv_rows(&mut series_rows);
    }
    for market in EquityMarket::ALL {
        let bars_by_day = &output.equity[&market];
        for (date, (open, close)) in &bars_by_day.days {
            series_rows.push_str(&format!("equity.{}.open,{date},H1,{open}\n", market.key()));
            series_rows.push_str(&format!("equity.{}.close,{date},H1,{close}\n", market.key()));
        }
    }
    for (id, daily) in &output.rates {
        for (date, value) in daily {
            series_rows.push_str(&format!("rate.{id},{date},H1,{value}\n"));
        }
    }
    std::fs::write(canonical.join("series.csv"), series_rows)?;

    std::fs::write(build.join("panel.csv"), panels_to_csv(&output.panels, &output.grid))?;
    std::fs::write(
        build.join("covariates.csv"),
        crate::covariates::covariates_to_csv(&output.activity, &output.global),
    )?;
    std::fs::write(
        build.join("arima_report.csv"),
        crate::covariates::arima_report_to_csv(&output.activity.arima_orders),
    )?;
    let mut truth_json = serde_json::to_string_pretty(&output.truth)
        .map_err(|e| SynthError::InvalidConfig(format!("truth serialization: {e}")))?;
    truth_json.push('\n');
    std::fs::write(build.join("truth.json"), truth_json)?;

    Ok(output)
}
