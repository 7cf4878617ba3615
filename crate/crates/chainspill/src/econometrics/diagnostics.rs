//! Stationarity and residual diagnostics: augmented Dickey-Fuller,
//! Jarque-Bera, and Ljung-Box.

use super::{ols, EconError};
use crate::stats;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Unit-root rejection strength for the ADF test (and star rendering for
/// normality tests that share the convention: stronger rejection, more
/// stars).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectionLevel {
    OnePercent,
    FivePercent,
    TenPercent,
    None,
}

impl RejectionLevel {
    pub fn stars(&self) -> &'static str {
        match self {
            RejectionLevel::OnePercent => "***",
            RejectionLevel::FivePercent => "**",
            RejectionLevel::TenPercent => "*",
            RejectionLevel::None => "",
        }
    }
}

impl std::fmt::Display for RejectionLevel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.stars())
    }
}

// ---------------------------------------------------------------------------
// Augmented Dickey-Fuller
// ---------------------------------------------------------------------------

/// Result of the constant-only augmented Dickey-Fuller regression
/// `dy_t = c + rho * y_{t-1} + sum_i phi_i dy_{t-i} + eps_t`.
#[derive(Debug, Clone)]
pub struct AdfResult {
    /// t-statistic of rho (the Dickey-Fuller tau statistic).
    pub statistic: f64,
    pub rejection: RejectionLevel,
    /// Augmentation lags used in the final regression.
    pub lags: usize,
    /// Effective observations in the final regression.
    pub n_obs: usize,
    /// Finite-sample critical values at 1%, 5%, 10% for that n_obs.
    pub critical_values: [f64; 3],
}

/// Response-surface coefficients for the finite-sample tau distribution
/// (constant-only, single series): cv = b0 + b1/T + b2/T^2 + b3/T^3.
const TAU_SURFACE: [[f64; 4]; 3] = [
    [-3.43035, -6.5393, -16.786, -79.433], // 1%
    [-2.86154, -2.8903, -4.234, -40.04],   // 5%
    [-2.56677, -1.5384, -2.809, 0.0],      // 10%
];

/// Finite-sample tau critical values (1%, 5%, 10%) at effective sample
/// size `n_obs` for the constant-only regression.
pub fn adf_critical_values(n_obs: usize) -> [f64; 3] {
    let t = n_obs as f64;
    let mut cv = [0.0; 3];
    for (i, b) in TAU_SURFACE.iter().enumerate() {
        cv[i] = b[0] + b[1] / t + b[2] / (t * t) + b[3] / (t * t * t);
    }
    cv
}

fn classify_tau(statistic: f64, cv: &[f64; 3]) -> RejectionLevel {
    if statistic <= cv[0] {
        RejectionLevel::OnePercent
    } else if statistic <= cv[1] {
        RejectionLevel::FivePercent
    } else if statistic <= cv[2] {
        RejectionLevel::TenPercent
    } else {
        RejectionLevel::None
    }
}

/// ADF regression with exactly `lags` augmentation terms over the full
/// usable sample; returns the tau statistic and its finite-sample
/// classification.
pub fn adf_test_fixed_lag(y: &[f64], lags: usize) -> Result<AdfResult, EconError> {
    let n = y.len();
    if n < 25 {
        return Err(EconError::InsufficientData { needed: 25, got: n, context: "adf_test" });
    }
    if n <= lags + 2 {
        return Err(EconError::InsufficientData {
            needed: lags + 3,
            got: n,
            context: "adf_test lag order",
        });
    }
    let (tau, n_eff, _aic) = adf_regression(y, lags, lags)?;
    let cv = adf_critical_values(n_eff);
    Ok(AdfResult {
        statistic: tau,
        rejection: classify_tau(tau, &cv),
        lags,
        n_obs: n_eff,
        critical_values: cv,
    })
}

/// Constant-only augmented Dickey-Fuller test with AIC lag selection.
///
/// Candidate lag orders 0..=max_lags (default `floor(12 * (T/100)^0.25)`)
/// are compared by AIC on the common sample implied by the largest
/// candidate, then the chosen order is refit on its own full sample.
pub fn adf_test(y: &[f64], max_lags: Option<usize>) -> Result<AdfResult, EconError> {
    let n = y.len();
    if n < 25 {
        return Err(EconError::InsufficientData { needed: 25, got: n, context: "adf_test" });
    }
    let default_max = (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize;
    // leave room for the regression itself
    let kmax = max_lags.unwrap_or(default_max).min(n.saturating_sub(6) / 2);

    let mut best: Option<(f64, usize)> = None;
    for k in 0..=kmax {
        // common sample: condition every candidate on kmax start rows
        let (_tau, _n, aic) = adf_regression(y, k, kmax)?;
        if best.map_or(true, |(a, _)| aic < a) {
            best = Some((aic, k));
        }
    }
    let (_, k_star) = best.expect("at least lag 0 evaluated");
    adf_test_fixed_lag(y, k_star)
}

/// Run the ADF regression with `lags` augmentation terms, conditioning on
/// `hold_out` initial observations (hold_out >= lags). Returns
/// (tau, effective n, aic).
fn adf_regression(y: &[f64], lags: usize, hold_out: usize) -> Result<(f64, usize, f64), EconError> {
    let n = y.len();
    let first = hold_out + 1; // first index t with all regressors available
    if n <= first {
        return Err(EconError::InsufficientData {
            needed: first + 1,
            got: n,
            context: "adf_test lag order",
        });
    }
    let rows = n - first;
    let dy: Vec<f64> = (1..n).map(|t| y[t] - y[t - 1]).collect(); // dy[t-1] = y_t - y_{t-1}

    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(1 + lags);
    cols.push((first..n).map(|t| y[t - 1]).collect()); // lagged level
    for i in 1..=lags {
        cols.push((first..n).map(|t| dy[t - 1 - i]).collect());
    }
    let resp: Vec<f64> = (first..n).map(|t| dy[t - 1]).collect();
    let x = ols::design_with_intercept(rows, &cols);
    let fit = ols::ols(&resp, &x)?;

    let ssr: f64 = fit.residuals.iter().map(|e| e * e).sum();
    let k_params = (2 + lags) as f64; // constant + level + lags
    let aic = rows as f64 * (ssr / rows as f64).ln() + 2.0 * k_params;
    Ok((fit.tstats[1], rows, aic))
}

// ---------------------------------------------------------------------------
// Jarque-Bera
// ---------------------------------------------------------------------------

/// Moment-based normality test: `JB = n/6 * (S^2 + K^2/4)` with biased
/// (1/n) skewness S and excess kurtosis K, compared against chi-squared(2).
#[derive(Debug, Clone)]
pub struct JarqueBera {
    pub statistic: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub rejection: RejectionLevel,
}

/// Chi-squared(2) upper quantiles at 10%, 5%, 1%.
const CHI2_2: [f64; 3] = [4.605, 5.991, 9.210];

pub fn jarque_bera(x: &[f64]) -> Result<JarqueBera, EconError> {
    let n = x.len();
    if n < 8 {
        return Err(EconError::InsufficientData { needed: 8, got: n, context: "jarque_bera" });
    }
    let (m2, _, _) = stats::central_moments(x);
    if m2 == 0.0 {
        return Err(EconError::ZeroVariance);
    }
    let s = stats::skewness(x);
    let k = stats::excess_kurtosis(x);
    let statistic = n as f64 / 6.0 * (s * s + k * k / 4.0);
    let rejection = if statistic >= CHI2_2[2] {
        RejectionLevel::OnePercent
    } else if statistic >= CHI2_2[1] {
        RejectionLevel::FivePercent
    } else if statistic >= CHI2_2[0] {
        RejectionLevel::TenPercent
    } else {
        RejectionLevel::None
    };
    Ok(JarqueBera { statistic, skewness: s, excess_kurtosis: k, rejection })
}

// ---------------------------------------------------------------------------
// Ljung-Box
// ---------------------------------------------------------------------------

/// Portmanteau autocorrelation test.
#[derive(Debug, Clone)]
pub struct LjungBox {
    pub statistic: f64,
    pub p_value: f64,
    pub lags: usize,
    /// Degrees of freedom after subtracting fitted parameters.
    pub df: usize,
}

/// `Q = n (n + 2) * sum_k rho_k^2 / (n - k)` over lags 1..=lags, referred
/// to chi-squared(lags - fitted_params). `fitted_params` accounts for
/// residuals of an estimated model (e.g. p + q for an ARMA fit).
pub fn ljung_box(resid: &[f64], lags: usize, fitted_params: usize) -> Result<LjungBox, EconError> {
    let n = resid.len();
    if lags == 0 || fitted_params >= lags {
        return Err(EconError::InvalidOrder(format!(
            "ljung_box needs fitted_params ({fitted_params}) < lags ({lags}), lags >= 1"
        )));
    }
    if lags >= n / 4 {
        return Err(EconError::InsufficientData {
            needed: 4 * (lags + 1),
            got: n,
            context: "ljung_box",
        });
    }
    let mu = stats::mean(resid);
    let dev: Vec<f64> = resid.iter().map(|r| r - mu).collect();
    let denom: f64 = dev.iter().map(|d| d * d).sum();
    if denom == 0.0 {
        return Err(EconError::ZeroVariance);
    }
    let mut q = 0.0;
    for k in 1..=lags {
        let num: f64 = (k..n).map(|t| dev[t] * dev[t - k]).sum();
        let rho = num / denom;
        q += rho * rho / (n - k) as f64;
    }
    q *= n as f64 * (n as f64 + 2.0);
    let df = lags - fitted_params;
    let chi = ChiSquared::new(df as f64).expect("df >= 1");
    let p_value = 1.0 - chi.cdf(q);
    Ok(LjungBox { statistic: q, p_value, lags, df })
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    /// Frozen AR(1)-like series (40 points, rounded to 6 decimals) shared
    /// by the ADF / Jarque-Bera / Ljung-Box reference values below.
    const FROZEN40: [f64; 40] = [
        0.0, 0.298746, -0.124765, -0.952974, -0.931158, -1.457226, -0.668469, 1.005981, 0.010784,
        -0.615083, 0.182301, 0.448037, 0.329433, -0.765752, -0.412128, 0.489239, -1.099595,
        -1.007413, -2.404929, -2.492002, -3.087736, -1.778959, -2.156926, -0.807199, -0.246848,
        -0.310355, -2.671937, -1.874662, -0.985832, -0.379607, -1.719939, -1.337723, -1.647381,
        -1.632527, 0.244635, -0.685217, -0.37513, 0.696825, -0.235188, -0.229296,
    ];

    #[test]
    fn adf_fixed_lag_matches_reference_implementation() {
        let r = adf_test_fixed_lag(&FROZEN40, 2).unwrap();
        assert_abs_diff_eq!(r.statistic, -2.450278271587357, epsilon = 1e-9);
        assert_eq!(r.n_obs, 37);
        assert_eq!(r.lags, 2);
    }

    #[test]
    fn critical_value_surface_matches_published_coefficients() {
        let cv = adf_critical_values(100);
        assert_abs_diff_eq!(cv[0], -3.4975010329999994, epsilon = 1e-12);
        assert_abs_diff_eq!(cv[1], -2.89090644, epsilon = 1e-12);
        assert_abs_diff_eq!(cv[2], -2.5824349, epsilon = 1e-12);
        // values tighten toward the asymptote as T grows
        let cv_big = adf_critical_values(100_000);
        assert!(cv_big[0] > cv[0] && cv_big[0] < -3.43);
    }

    #[test]
    fn adf_rejects_stationary_and_keeps_random_walk() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let n = 1500;
        let mut stationary = vec![0.0; n];
        let mut walk = vec![0.0; n];
        for t in 1..n {
            let e: f64 = normal.sample(&mut rng);
            stationary[t] = 0.3 * stationary[t - 1] + e;
            walk[t] = walk[t - 1] + normal.sample(&mut rng);
        }
        let s = adf_test(&stationary, None).unwrap();
        assert_eq!(s.rejection, RejectionLevel::OnePercent, "tau = {}", s.statistic);
        let w = adf_test(&walk, None).unwrap();
        assert_eq!(w.rejection, RejectionLevel::None, "tau = {}", w.statistic);
    }

    #[test]
    fn adf_short_series_is_rejected() {
        let y = vec![0.0; 24];
        assert!(matches!(
            adf_test(&y, None),
            Err(EconError::InsufficientData { needed: 25, .. })
        ));
    }

    #[test]
    fn jarque_bera_matches_reference_implementation() {
        let jb = jarque_bera(&FROZEN40).unwrap();
        assert_abs_diff_eq!(jb.statistic, 1.6510937217211883, epsilon = 1e-10);
        assert_abs_diff_eq!(jb.skewness, -0.4299227079778328, epsilon = 1e-10);
        assert_abs_diff_eq!(jb.excess_kurtosis, -0.501320350367648, epsilon = 1e-10);
        assert_eq!(jb.rejection, RejectionLevel::None);
    }

    #[test]
    fn jarque_bera_flags_heavy_tails() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let normal = Normal::new(0.0, 1.0).unwrap();
        // scale mixture: occasional 6-sigma draws produce excess kurtosis
        let x: Vec<f64> = (0..500)
            .map(|i| {
                let s = if i % 25 == 0 { 6.0 } else { 1.0 };
                s * <Normal<f64> as Distribution<f64>>::sample(&normal, &mut rng)
            })
            .collect();
        let jb = jarque_bera(&x).unwrap();
        assert_eq!(jb.rejection, RejectionLevel::OnePercent, "JB = {}", jb.statistic);
    }

    #[test]
    fn jarque_bera_guards_degenerate_input() {
        assert!(matches!(jarque_bera(&[3.0; 10]), Err(EconError::ZeroVariance)));
        assert!(matches!(
            jarque_bera(&[1.0, 2.0]),
            Err(EconError::InsufficientData { needed: 8, .. })
        ));
    }

    #[test]
    fn ljung_box_matches_reference_implementation() {
        // statistic computed with zero fitted params; the p-value below is
        // the chi-squared(5) tail
        let lb = ljung_box(&FROZEN40, 5, 0).unwrap();
        assert_abs_diff_eq!(lb.statistic, 18.41381850743727, epsilon = 1e-9);
        assert_abs_diff_eq!(lb.p_value, 0.002470084158183533, epsilon = 1e-9);
        assert_eq!(lb.df, 5);
    }

    #[test]
    fn ljung_box_accepts_white_noise_and_flags_ar() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let n = 800;
        let noise: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
        let mut ar = vec![0.0; n];
        for t in 1..n {
            ar[t] = 0.6 * ar[t - 1] + normal.sample(&mut rng);
        }
        assert!(ljung_box(&noise, 10, 0).unwrap().p_value > 0.01);
        assert!(ljung_box(&ar, 10, 0).unwrap().p_value < 1e-6);
    }

    #[test]
    fn ljung_box_validates_arguments() {
        let x = vec![0.5; 100];
        assert!(matches!(ljung_box(&x, 10, 10), Err(EconError::InvalidOrder(_))));
        assert!(matches!(ljung_box(&x, 30, 0), Err(EconError::InsufficientData { .. })));
    }
}
