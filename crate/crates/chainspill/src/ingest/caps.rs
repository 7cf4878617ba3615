//! Market-capitalization merging across providers.

use super::IngestError;
use crate::series::Series;
use crate::timebase::{Half, HalfDayId};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

/// Capitalization provider. The wire names (`alpha`, `beta`, `computed`)
/// appear in `caps.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapSource {
    ProviderA,
    ProviderB,
    Computed,
}

impl CapSource {
    pub fn wire_name(&self) -> &'static str {
        match self {
            CapSource::ProviderA => "alpha",
            CapSource::ProviderB => "beta",
            CapSource::Computed => "computed",
        }
    }
}

impl FromStr for CapSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "alpha" | "provider_a" => Ok(CapSource::ProviderA),
            "beta" | "provider_b" => Ok(CapSource::ProviderB),
            "computed" => Ok(CapSource::Computed),
            other => Err(format!("unknown cap source '{other}'")),
        }
    }
}

/// One provider's capitalization reading for one asset half-day.
#[derive(Debug, Clone, PartialEq)]
pub struct RawCapObservation {
    pub asset_id: String,
    pub half_day: HalfDayId,
    pub source: CapSource,
    pub cap: f64,
}

/// Merge one asset's observations into a cap series: per half-day, the
/// arithmetic mean over the sources present; half-days with no source are
/// missing. The result is invariant to input ordering (at most one
/// observation per (half-day, source) is assumed; a duplicate pair keeps
/// the last value).
pub fn merge_market_cap(observations: &[RawCapObservation], series_id: impl Into<String>) -> Series {
    let mut by_bar: BTreeMap<i64, BTreeMap<CapSource, f64>> = BTreeMap::new();
    for obs in observations {
        by_bar.entry(obs.half_day.index()).or_default().insert(obs.source, obs.cap);
    }
    let mut series = Series::empty(series_id);
    for (idx, sources) in by_bar {
        let mean = sources.values().sum::<f64>() / sources.len() as f64;
        series.set(HalfDayId::from_index(idx), Some(mean));
    }
    series
}

/// Read `caps.csv` (header `asset_id,date,half,source,cap`), grouping
/// observations by asset.
pub fn read_caps_csv(path: &Path) -> Result<BTreeMap<String, Vec<RawCapObservation>>, IngestError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| IngestError::SourceUnavailable {
        uri: path.display().to_string(),
        detail: e.to_string(),
    })?;
    let mut by_asset: BTreeMap<String, Vec<RawCapObservation>> = BTreeMap::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| IngestError::MalformedEvent { index: i, detail: e.to_string() })?;
        let field = |j: usize| -> Result<&str, IngestError> {
            row.get(j).ok_or_else(|| IngestError::SchemaMismatch {
                detail: format!("caps.csv row {i}: missing column {j}"),
            })
        };
        let bad = |what: &str| IngestError::SchemaMismatch {
            detail: format!("caps.csv row {i}: bad {what}"),
        };
        let date: chrono::NaiveDate = field(1)?.parse().map_err(|_| bad("date"))?;
        let half: Half = field(2)?.parse().map_err(|_| bad("half"))?;
        let obs = RawCapObservation {
            asset_id: field(0)?.to_string(),
            half_day: HalfDayId::new(date, half),
            source: field(3)?.parse().map_err(|_| bad("source"))?,
            cap: field(4)?.parse().map_err(|_| bad("cap"))?,
        };
        by_asset.entry(obs.asset_id.clone()).or_default().push(obs);
    }
    Ok(by_asset)
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bar(date: &str, half: Half) -> HalfDayId {
        HalfDayId::new(date.parse().unwrap(), half)
    }

    fn obs(date: &str, half: Half, source: CapSource, cap: f64) -> RawCapObservation {
        RawCapObservation { asset_id: "a".into(), half_day: bar(date, half), source, cap }
    }

    #[test]
    fn three_sources_average() {
        let observations = vec![
            obs("2024-01-01", Half::H1, CapSource::ProviderA, 10.0),
            obs("2024-01-01", Half::H1, CapSource::ProviderB, 20.0),
            obs("2024-01-01", Half::H1, CapSource::Computed, 30.0),
        ];
        let s = merge_market_cap(&observations, "cap.a");
        assert_abs_diff_eq!(s.get(bar("2024-01-01", Half::H1)).unwrap(), 20.0);
    }

    #[test]
    fn single_source_passes_through() {
        let observations = vec![obs("2024-01-01", Half::H2, CapSource::ProviderB, 42.0)];
        let s = merge_market_cap(&observations, "cap.a");
        assert_abs_diff_eq!(s.get(bar("2024-01-01", Half::H2)).unwrap(), 42.0);
    }

    #[test]
    fn partial_sources_average_what_is_present() {
        let observations = vec![
            obs("2024-01-02", Half::H1, CapSource::ProviderA, 10.0),
            obs("2024-01-02", Half::H1, CapSource::Computed, 30.0),
        ];
        let s = merge_market_cap(&observations, "cap.a");
        assert_abs_diff_eq!(s.get(bar("2024-01-02", Half::H1)).unwrap(), 20.0);
        // the uncovered half-day is missing, not zero
        assert_eq!(s.get(bar("2024-01-02", Half::H2)), None);
    }

    #[test]
    fn merge_is_order_invariant() {
        let mut observations = vec![
            obs("2024-01-01", Half::H1, CapSource::ProviderA, 11.0),
            obs("2024-01-01", Half::H1, CapSource::ProviderB, 19.0),
            obs("2024-01-03", Half::H2, CapSource::Computed, 7.0),
        ];
        let a = merge_market_cap(&observations, "cap.a");
        observations.reverse();
        let b = merge_market_cap(&observations, "cap.a");
        assert_eq!(a.on_grid(&crate::timebase::grid(a.start().unwrap(), a.end().unwrap())),
                   b.on_grid(&crate::timebase::grid(a.start().unwrap(), a.end().unwrap())));
    }
}
