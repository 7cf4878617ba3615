//! Core numerical engine: ARIMA, joint mean + GJR-GARCH quasi-maximum
//! likelihood, order selection, and the diagnostics battery.
//!
//! Everything here works on plain `&[f64]` slices; alignment of half-day
//! grids, missing-value handling, and column naming live one level up
//! (covariates / study). All estimators are deterministic given the seed
//! passed in their options, and no fit shares mutable state with another,
//! so sweeps may run concurrently.

pub mod arima;
pub mod diagnostics;
pub mod garch;
pub mod ols;
pub mod optim;

pub use arima::{fit_arima, ArimaFit, ArimaOrder};
pub use diagnostics::{
    adf_critical_values, adf_test, adf_test_fixed_lag, jarque_bera, ljung_box, AdfResult,
    JarqueBera, LjungBox, RejectionLevel,
};
pub use garch::{
    fit_garch_regression, fit_garch_two_step, select_garch_order, FitOptions, FitResult,
    GjrOrder, GjrOrderBounds, GjrParams,
};
pub use ols::{ols, OlsFit};
pub use optim::{OptimOptions, OptimResult};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EconError {
    #[error("insufficient data: {got} observations, need at least {needed} ({context})")]
    InsufficientData { needed: usize, got: usize, context: &'static str },

    #[error("design matrix is rank-deficient (column {column} is collinear)")]
    SingularDesign { column: usize },

    #[error("optimizer failed to converge (gradient max-norm {grad_norm:.3e} at best point)")]
    NonConvergence { grad_norm: f64 },

    #[error("sample has zero variance")]
    ZeroVariance,

    #[error("invalid order or bounds: {0}")]
    InvalidOrder(String),
}

/// Named regressor columns, intercept excluded (estimators add their own).
///
/// All columns must be fully observed and the same length as the response;
/// listwise deletion happens upstream where grid alignment is known, but
/// estimators additionally drop rows containing non-finite values as a
/// defensive measure.
#[derive(Debug, Clone, Default)]
pub struct Design {
    pub names: Vec<String>,
    pub cols: Vec<Vec<f64>>,
}

impl Design {
    pub fn new(names: Vec<String>, cols: Vec<Vec<f64>>) -> Self {
        assert_eq!(names.len(), cols.len(), "one name per column");
        Design { names, cols }
    }

    /// Design with no regressors (intercept-only model).
    pub fn intercept_only() -> Self {
        Design::default()
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }
}

/// Two-sided significance stars at conventional normal thresholds:
/// |t| >= 2.576 -> `***`, >= 1.960 -> `**`, >= 1.645 -> `*`.
pub fn stars_for_tstat(t: f64) -> &'static str {
    let a = t.abs();
    if a >= 2.576 {
        "***"
    } else if a >= 1.960 {
        "**"
    } else if a >= 1.645 {
        "*"
    } else {
        ""
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_thresholds_match_reported_examples() {
        assert_eq!(stars_for_tstat(-2.491), "**");
        assert_eq!(stars_for_tstat(-1.661), "*");
        assert_eq!(stars_for_tstat(-18.1133), "***");
        assert_eq!(stars_for_tstat(1.644), "");
        assert_eq!(stars_for_tstat(-1.645), "*");
        assert_eq!(stars_for_tstat(2.576), "***");
        assert_eq!(stars_for_tstat(-1.960), "**");
    }
}
