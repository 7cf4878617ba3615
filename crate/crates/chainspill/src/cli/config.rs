//! Run configuration: command-line flags, the optional TOML file, and
//! the precedence rules joining them.
//!
//! Every setting resolves as **flag > config file > environment >
//! built-in default**. The config file is TOML; all sections and keys
//! are optional:
//!
//! ```toml
//! data_dir = "data"
//!
//! [window]
//! start = "2024-01-01:H1"
//! end = "2024-06-30:H2"
//!
//! [garch]            # volatility-order search grid, inclusive bounds
//! p = [1, 3]
//! o = [0, 3]
//! q = [1, 3]
//! restarts = 5
//!
//! [arima]            # covariate innovation search grid
//! p_max = 3
//! d_max = 1
//! q_max = 3
//!
//! [study]
//! variants = ["linear_baseline"]
//! tail = 0.05
//! seed = 7
//!
//! [ingest]
//! staleness_limit = 4
//! strict = false
//!
//! [exclusion]        # asset ids excluded regardless of ingest tags
//! liquid_staking = []
//! wrapped_native = []
//! stablecoin = []
//!
//! [synth]            # overrides on the example generator config
//! seed = 7
//! n_half_days = 800
//!
//! [[synth.events]]
//! offset = 100
//! source = "ethereum"
//! magnitude = -0.3
//! ```
//!
//! Dates and half-days are quoted strings (`"2024-01-01"`,
//! `"2024-01-01:H1"`).

use crate::covariates::ArimaOrderBounds;
use crate::econometrics::{FitOptions, GjrOrderBounds};
use crate::study::Variant;
use crate::synth::{ActivityParams, DgpConfig, GjrSpec, InjectedEvent};
use crate::timebase::HalfDayId;
use crate::universe::ExclusionOverrides;
use chrono::NaiveDate;
use serde::Deserialize;
use std::path::{Path, PathBuf};

/// Global command-line flags, shared by every verb.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct CliFlags {
    /// TOML configuration file (default: ./chainspill.toml when present).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Data directory (default: $CHAINSPILL_DATA_DIR, then ./data).
    #[arg(long, global = true, value_name = "PATH")]
    pub data_dir: Option<PathBuf>,

    /// Half-day window, e.g. 2024-01-01:H1..2024-06-30:H2.
    #[arg(long, global = true, value_name = "START..END")]
    pub window: Option<String>,

    /// Study variants to estimate, comma-separated.
    #[arg(long, global = true, value_delimiter = ',', value_name = "NAME,...")]
    pub variant: Option<Vec<String>>,

    /// Tail probability for extreme-return dummies.
    #[arg(long, global = true, value_name = "PROB")]
    pub tail: Option<f64>,

    /// Root RNG seed.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,

    /// Worker threads (default: logical cores).
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,

    /// Abort ingestion on malformed or unregistered swap events.
    #[arg(long, global = true)]
    pub strict: bool,
}

/// `[window]` section.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowSection {
    pub start: Option<String>,
    pub end: Option<String>,
}

/// `[garch]` section: inclusive `[min, max]` bounds per order slot.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GarchSection {
    pub p: Option<[usize; 2]>,
    pub o: Option<[usize; 2]>,
    pub q: Option<[usize; 2]>,
    pub restarts: Option<usize>,
}

/// `[study]` section.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudySection {
    pub variants: Option<Vec<String>>,
    pub tail: Option<f64>,
    pub seed: Option<u64>,
}

/// `[ingest]` section.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestSection {
    /// Price staleness horizon in half-days.
    pub staleness_limit: Option<usize>,
    pub strict: Option<bool>,
}

/// `[synth]` section: sparse overrides applied on top of
/// [`DgpConfig::example`]. Unset keys keep the example value.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub seed: Option<u64>,
    pub start_date: Option<NaiveDate>,
    pub n_half_days: Option<usize>,
    pub own_lag: Option<f64>,
    pub cex_loading: Option<f64>,
    pub sigma_x: Option<f64>,
    pub sigma_local: Option<f64>,
    pub dummy_effect: Option<f64>,
    /// Full 5x5 `spillover[target][source]` matrix.
    pub spillover: Option<Vec<Vec<f64>>>,
    /// Per-chain variance specs, canonical chain order.
    pub garch: Option<Vec<GjrSpec>>,
    pub activity: Option<ActivityParams>,
    pub events: Option<Vec<InjectedEvent>>,
}

impl SynthSection {
    /// Overlay the set fields onto a base generator config. The seed is
    /// resolved by the caller (it participates in flag precedence).
    pub fn apply(&self, config: &mut DgpConfig) {
        if let Some(v) = self.start_date {
            config.start_date = v;
        }
        if let Some(v) = self.n_half_days {
            config.n_half_days = v;
        }
        if let Some(v) = self.own_lag {
            config.own_lag = v;
        }
        if let Some(v) = self.cex_loading {
            config.cex_loading = v;
        }
        if let Some(v) = self.sigma_x {
            config.sigma_x = v;
        }
        if let Some(v) = self.sigma_local {
            config.sigma_local = v;
        }
        if let Some(v) = self.dummy_effect {
            config.dummy_effect = v;
        }
        if let Some(v) = &self.spillover {
            config.spillover = v.clone();
        }
        if let Some(v) = &self.garch {
            config.garch = v.clone();
        }
        if let Some(v) = self.activity {
            config.activity = v;
        }
        if let Some(v) = &self.events {
            config.events = v.clone();
        }
    }
}

/// The full (all-optional) config file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub data_dir: Option<PathBuf>,
    pub window: WindowSection,
    pub garch: GarchSection,
    pub arima: Option<ArimaOrderBounds>,
    pub study: StudySection,
    pub ingest: IngestSection,
    pub exclusion: ExclusionOverrides,
    pub synth: SynthSection,
}

impl FileConfig {
    pub fn from_path(path: &Path) -> Result<FileConfig, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("bad config {}: {e}", path.display()))
    }
}

/// Parse a `start..end` half-day window.
pub fn parse_window(s: &str) -> Result<(HalfDayId, HalfDayId), String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("bad window '{s}': expected START..END"))?;
    let start: HalfDayId = a.trim().parse().map_err(|e| format!("bad window start: {e}"))?;
    let end: HalfDayId = b.trim().parse().map_err(|e| format!("bad window end: {e}"))?;
    if start > end {
        return Err(format!("bad window '{s}': start is after end"));
    }
    Ok((start, end))
}

/// Fully resolved run settings.
#[derive(Debug, Clone)]
pub struct Settings {
    pub data_dir: PathBuf,
    /// Explicit analysis window; stages derive one from data coverage
    /// when unset.
    pub window: Option<(HalfDayId, HalfDayId)>,
    pub variants: Vec<Variant>,
    pub tail: f64,
    /// Root study seed.
    pub seed: u64,
    /// The raw `--seed` flag, kept so `synth` can give it precedence
    /// over `[synth].seed`.
    pub seed_flag: Option<u64>,
    pub garch_bounds: GjrOrderBounds,
    pub restarts: usize,
    pub arima_bounds: ArimaOrderBounds,
    pub staleness_limit: usize,
    pub strict: bool,
    pub exclusion: ExclusionOverrides,
    pub synth: SynthSection,
}

impl Settings {
    /// Resolve against the config file named by the flags (or
    /// `./chainspill.toml` when present) and the process environment.
    pub fn resolve(flags: &CliFlags) -> Result<Settings, String> {
        let file = match &flags.config {
            Some(path) => FileConfig::from_path(path)?,
            None => {
                let default = Path::new("chainspill.toml");
                if default.is_file() {
                    FileConfig::from_path(default)?
                } else {
                    FileConfig::default()
                }
            }
        };
        let env_dir = std::env::var_os("CHAINSPILL_DATA_DIR").map(PathBuf::from);
        Settings::resolve_with(flags, file, env_dir)
    }

    /// Precedence logic, separated from filesystem and environment
    /// access so it can be tested directly.
    pub fn resolve_with(
        flags: &CliFlags,
        file: FileConfig,
        env_data_dir: Option<PathBuf>,
    ) -> Result<Settings, String> {
        let data_dir = flags
            .data_dir
            .clone()
            .or(file.data_dir)
            .or(env_data_dir)
            .unwrap_or_else(|| PathBuf::from("data"));

        let window = match &flags.window {
            Some(s) => Some(parse_window(s)?),
            None => match (&file.window.start, &file.window.end) {
                (Some(a), Some(b)) => Some(parse_window(&format!("{a}..{b}"))?),
                (None, None) => None,
                _ => return Err("config [window] needs both start and end".to_string()),
            },
        };

        let variant_names = flags.variant.clone().or(file.study.variants);
        let variants = match variant_names {
            None => vec![Variant::LinearBaseline],
            Some(names) => {
                let mut out = Vec::new();
                for name in names {
                    out.push(name.parse::<Variant>().map_err(|e| e.to_string())?);
                }
                if out.is_empty() {
                    return Err("empty variant list".to_string());
                }
                out
            }
        };

        let tail = flags.tail.or(file.study.tail).unwrap_or(0.05);
        if !(tail > 0.0 && tail < 0.5) {
            return Err(format!("tail probability {tail} outside (0, 0.5)"));
        }

        let mut garch_bounds = GjrOrderBounds::default();
        for (slot, configured) in [
            (&mut garch_bounds.p, file.garch.p),
            (&mut garch_bounds.o, file.garch.o),
            (&mut garch_bounds.q, file.garch.q),
        ] {
            if let Some([lo, hi]) = configured {
                if lo > hi {
                    return Err(format!("bad [garch] bounds [{lo}, {hi}]: min exceeds max"));
                }
                *slot = (lo, hi);
            }
        }

        Ok(Settings {
            data_dir,
            window,
            variants,
            tail,
            seed: flags.seed.or(file.study.seed).unwrap_or(7),
            seed_flag: flags.seed,
            garch_bounds,
            restarts: file.garch.restarts.unwrap_or(FitOptions::default().restarts),
            arima_bounds: file.arima.unwrap_or_default(),
            staleness_limit: file.ingest.staleness_limit.unwrap_or(4),
            strict: flags.strict || file.ingest.strict.unwrap_or(false),
            exclusion: file.exclusion,
            synth: file.synth,
        })
    }

    /// The generator config the `synth` verb runs: the example config
    /// under `[synth]` overrides, seeded by `--seed` > `[synth].seed` >
    /// the study seed.
    pub fn synth_config(&self) -> DgpConfig {
        let seed = self.seed_flag.unwrap_or_else(|| self.synth.seed.unwrap_or(self.seed));
        let mut config = DgpConfig::example(seed);
        config.arima_bounds = self.arima_bounds;
        self.synth.apply(&mut config);
        config
    }
}

// ---------------------------------------------------------------------------
