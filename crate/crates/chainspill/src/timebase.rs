//! UTC half-day grid and equity-session alignment.
//!
//! The observation interval is the half-day: H1 = [00:00, 12:00) UTC and
//! H2 = [12:00, 24:00) UTC. The noon boundary belongs to H2 and midnight
//! to H1, so every instant maps to exactly one bar. Half-days are totally
//! ordered and support index arithmetic (`(d, H2)` is followed by
//! `(d+1, H1)`), which the rest of the crate uses for lags, staleness
//! windows, and grid alignment.
//!
//! Equity benchmarks trade a subset of each UTC day, so a half-day overlaps
//! either the exchange's trading session or the gap between sessions. The
//! mapping is fixed per market:
//!
//! | market   | H1        | H2        |
//! |----------|-----------|-----------|
//! | HangSeng | intraday  | overnight |
//! | FTSE100  | overnight | intraday  |
//! | SP500    | overnight | intraday  |

use chrono::{DateTime, Datelike, NaiveDate, Timelike, Utc};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Which 12-hour bar of the UTC day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Half {
    /// [00:00, 12:00)
    H1,
    /// [12:00, 24:00)
    H2,
}

impl fmt::Display for Half {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Half::H1 => "H1",
            Half::H2 => "H2",
        })
    }
}

#[derive(Debug, Error)]
#[error("invalid half-day label {0:?} (expected \"H1\" or \"H2\")")]
pub struct ParseHalfError(String);

impl FromStr for Half {
    type Err = ParseHalfError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "H1" => Ok(Half::H1),
            "H2" => Ok(Half::H2),
            other => Err(ParseHalfError(other.to_string())),
        }
    }
}

/// One bar on the half-day grid: a calendar date plus [`Half`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HalfDayId {
    pub date: NaiveDate,
    pub half: Half,
}

impl HalfDayId {
    pub fn new(date: NaiveDate, half: Half) -> Self {
        HalfDayId { date, half }
    }

    /// Monotone integer index: two units per day, H2 = H1 + 1.
    pub fn index(&self) -> i64 {
        let days = self.date.num_days_from_ce() as i64;
        days * 2 + matches!(self.half, Half::H2) as i64
    }

    /// Inverse of [`HalfDayId::index`].
    pub fn from_index(idx: i64) -> Self {
        let days = idx.div_euclid(2);
        let date = NaiveDate::from_num_days_from_ce_opt(days as i32)
            .expect("half-day index out of calendar range");
        let half = if idx.rem_euclid(2) == 0 { Half::H1 } else { Half::H2 };
        HalfDayId { date, half }
    }

    /// The immediately following bar; `(d, H2)` rolls over to `(d+1, H1)`.
    pub fn successor(&self) -> Self {
        Self::from_index(self.index() + 1)
    }

    /// The immediately preceding bar.
    pub fn predecessor(&self) -> Self {
        Self::from_index(self.index() - 1)
    }

    /// Shift by `n` bars (negative = backwards).
    pub fn offset(&self, n: i64) -> Self {
        Self::from_index(self.index() + n)
    }
}

impl fmt::Display for HalfDayId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.date, self.half)
    }
}

/// Failure to parse a half-day bar from text.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid half-day '{0}', expected e.g. 2024-01-01:H1")]
pub struct ParseHalfDayError(String);

impl FromStr for HalfDayId {
    type Err = ParseHalfDayError;

    /// Accepts `YYYY-MM-DD:H1`, `YYYY-MM-DD H1`, or `YYYY-MM-DD/H1`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (date_part, half_part) = s
            .split_once([':', ' ', '/'])
            .ok_or_else(|| ParseHalfDayError(s.to_string()))?;
        let date: NaiveDate =
            date_part.parse().map_err(|_| ParseHalfDayError(s.to_string()))?;
        let half: Half = half_part.parse().map_err(|_| ParseHalfDayError(s.to_string()))?;
        Ok(HalfDayId { date, half })
    }
}

/// Map a UTC instant to its half-day bar. Hours [0, 12) land in H1,
/// [12, 24) in H2; in particular 12:00:00 exactly belongs to H2 and
/// 00:00:00 to H1.
pub fn half_day_index(ts: DateTime<Utc>) -> HalfDayId {
    let half = if ts.hour() < 12 { Half::H1 } else { Half::H2 };
    HalfDayId { date: ts.date_naive(), half }
}

/// Inclusive range of consecutive half-days. Empty when `end < start`.
pub fn grid(start: HalfDayId, end: HalfDayId) -> Vec<HalfDayId> {
    (start.index()..=end.index()).map(HalfDayId::from_index).collect()
}

// ---------------------------------------------------------------------------
// Equity session alignment
// ---------------------------------------------------------------------------

/// Global equity benchmarks used as market-environment covariates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EquityMarket {
    SP500,
    HangSeng,
    FTSE100,
}

impl EquityMarket {
    pub const ALL: [EquityMarket; 3] =
        [EquityMarket::SP500, EquityMarket::HangSeng, EquityMarket::FTSE100];

    /// Canonical lowercase key used in file formats.
    pub fn key(&self) -> &'static str {
        match self {
            EquityMarket::SP500 => "sp500",
            EquityMarket::HangSeng => "hangseng",
            EquityMarket::FTSE100 => "ftse100",
        }
    }

    /// Covariate column name for the market's half-day return series.
    pub fn series_id(&self) -> &'static str {
        match self {
            EquityMarket::SP500 => "SPR",
            EquityMarket::HangSeng => "HSR",
            EquityMarket::FTSE100 => "FTSER",
        }
    }
}

impl fmt::Display for EquityMarket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for EquityMarket {
    type Err = ParseMarketError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sp500" => Ok(EquityMarket::SP500),
            "hangseng" => Ok(EquityMarket::HangSeng),
            "ftse100" => Ok(EquityMarket::FTSE100),
            other => Err(ParseMarketError(other.to_string())),
        }
    }
}

#[derive(Debug, Error)]
#[error("unknown equity market {0:?} (expected sp500, hangseng, or ftse100)")]
pub struct ParseMarketError(String);

/// Which piece of the daily close-to-close return a half-day overlaps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SessionComponent {
    /// ln(open_d / close_{d-1}): the gap between sessions.
    Overnight,
    /// ln(close_d / open_d): the trading session itself.
    Intraday,
}

/// Which session component a given market contributes during each UTC
/// half-day. Hong Kong trades during H1; London and New York sessions fall
/// in H2, so their H1 contribution is the overnight gap.
pub fn session_alignment(market: EquityMarket, half: Half) -> SessionComponent {
    use EquityMarket::*;
    use SessionComponent::*;
    match (market, half) {
        (HangSeng, Half::H1) => Intraday,
        (HangSeng, Half::H2) => Overnight,
        (FTSE100, Half::H1) => Overnight,
        (FTSE100, Half::H2) => Intraday,
        (SP500, Half::H1) => Overnight,
        (SP500, Half::H2) => Intraday,
    }
}
