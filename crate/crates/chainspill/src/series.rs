//! Half-day-aligned series with explicit missing values.
//!
//! A [`Series`] is a contiguous range of half-day bars with an optional
//! value at each bar. "Missing" is a first-class state, distinct from
//! zero: portfolio construction, listwise deletion, and staleness handling
//! all branch on it. Lookups outside the covered range are also missing.

use crate::timebase::HalfDayId;
use std::collections::BTreeMap;

/// A series of optional values on a contiguous half-day range. The
/// default is an empty series with an empty id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Series {
    id: String,
    start: Option<HalfDayId>,
    values: Vec<Option<f64>>,
}

/// Series whose values are log returns. Same representation; the alias
/// documents intent in signatures.
pub type ReturnSeries = Series;

impl Series {
    /// Empty series covering no bars.
    pub fn empty(id: impl Into<String>) -> Self {
        Series { id: id.into(), start: None, values: Vec::new() }
    }

    /// Series from a contiguous vector starting at `start`.
    pub fn new(id: impl Into<String>, start: HalfDayId, values: Vec<Option<f64>>) -> Self {
        let start = if values.is_empty() { None } else { Some(start) };
        Series { id: id.into(), start, values }
    }

    /// Build from sparse (bar, value) observations; bars in between are
    /// filled with missing. Later duplicates of the same bar win.
    pub fn from_observations(
        id: impl Into<String>,
        obs: impl IntoIterator<Item = (HalfDayId, f64)>,
    ) -> Self {
        let map: BTreeMap<HalfDayId, f64> = obs.into_iter().collect();
        let Some((&first, _)) = map.iter().next() else {
            return Series::empty(id);
        };
        let (&last, _) = map.iter().next_back().unwrap();
        let n = (last.index() - first.index() + 1) as usize;
        let mut values = vec![None; n];
        for (bar, v) in map {
            values[(bar.index() - first.index()) as usize] = Some(v);
        }
        Series { id: id.into(), start: Some(first), values }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn set_id(&mut self, id: impl Into<String>) {
        self.id = id.into();
    }

    /// First covered bar, if any.
    pub fn start(&self) -> Option<HalfDayId> {
        self.start
    }

    /// Last covered bar, if any.
    pub fn end(&self) -> Option<HalfDayId> {
        self.start.map(|s| s.offset(self.values.len() as i64 - 1))
    }

    /// Number of covered bars (present or missing).
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at a bar; `None` if missing or out of coverage.
    pub fn get(&self, bar: HalfDayId) -> Option<f64> {
        let start = self.start?;
        let off = bar.index() - start.index();
        if off < 0 {
            return None;
        }
        self.values.get(off as usize).copied().flatten()
    }

    /// Set the value at a bar, extending coverage if needed.
    pub fn set(&mut self, bar: HalfDayId, value: Option<f64>) {
        match self.start {
            None => {
                self.start = Some(bar);
                self.values = vec![value];
            }
            Some(start) => {
                let off = bar.index() - start.index();
                if off < 0 {
                    let pad = (-off) as usize;
                    let mut v = vec![None; pad];
                    v.append(&mut self.values);
                    self.values = v;
                    self.start = Some(bar);
                    self.values[0] = value;
                } else {
                    let off = off as usize;
                    if off >= self.values.len() {
                        self.values.resize(off + 1, None);
                    }
                    self.values[off] = value;
                }
            }
        }
    }

    /// Iterate `(bar, value)` over the covered range.
    pub fn iter(&self) -> impl Iterator<Item = (HalfDayId, Option<f64>)> + '_ {
        let start = self.start;
        self.values.iter().enumerate().map(move |(i, v)| {
            (start.expect("non-empty").offset(i as i64), *v)
        })
    }

    /// Values aligned to an arbitrary grid (missing where uncovered).
    pub fn on_grid(&self, grid: &[HalfDayId]) -> Vec<Option<f64>> {
        grid.iter().map(|b| self.get(*b)).collect()
    }

    /// Present values in bar order.
    pub fn present(&self) -> Vec<f64> {
        self.values.iter().copied().flatten().collect()
    }

    /// Count of present values.
    pub fn n_present(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    /// Restrict coverage to `[start, end]` (intersection with current).
    pub fn window(&self, start: HalfDayId, end: HalfDayId) -> Series {
        let mut out = Series::empty(self.id.clone());
        let Some(s) = self.start else { return out };
        let lo = start.index().max(s.index());
        let hi = end.index().min(s.index() + self.values.len() as i64 - 1);
        if lo > hi {
            return out;
        }
        out.start = Some(HalfDayId::from_index(lo));
        out.values = self.values[(lo - s.index()) as usize..=(hi - s.index()) as usize].to_vec();
        out
    }

    /// Applies `f` to present values, keeping missing bars missing.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Series {
        Series {
            id: self.id.clone(),
            start: self.start,
            values: self.values.iter().map(|v| v.map(&f)).collect(),
        }
    }

    /// Append `series_id,date,half,value` CSV rows (no header) for the
    /// present values, in bar order.
    pub fn push_csv_rows(&self, out: &mut String) {
        for (bar, value) in self.iter() {
            if let Some(v) = value {
                out.push_str(&format!("{},{},{},{}\n", self.id, bar.date, bar.half, v));
            }
        }
    }
}
