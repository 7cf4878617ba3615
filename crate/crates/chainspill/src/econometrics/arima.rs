//! ARIMA(p,d,q) by conditional-sum-of-squares Gaussian likelihood.
//!
//! The level series is differenced d times, then
//!
//! ```text
//! w_t = c + phi_1 w_{t-1} + ... + phi_p w_{t-p}
//!         + e_t + theta_1 e_{t-1} + ... + theta_q e_{t-q}
//! ```
//!
//! is fitted by minimizing the sum of squared one-step errors, conditioning
//! on the first max(p,q) observations of `w` and zero pre-sample errors
//! (no Kalman smoothing of the startup — the CSS convention). The
//! concentrated Gaussian log-likelihood is reported together with
//! `AIC = 2k - 2 loglik`, `k = p + q + 2` (intercept and innovation
//! variance count as parameters).
//!
//! Stationarity of the AR part and invertibility of the MA part are
//! enforced by optimizing in partial-autocorrelation space: unconstrained
//! reals map through tanh to partials in (-1, 1), and the Levinson
//! recursion maps those to polynomial coefficients whose roots are
//! guaranteed outside the unit circle.

use super::optim::{minimize, OptimOptions};
use super::EconError;
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArimaOrder {
    pub p: usize,
    pub d: usize,
    pub q: usize,
}

impl ArimaOrder {
    pub fn new(p: usize, d: usize, q: usize) -> Self {
        ArimaOrder { p, d, q }
    }
}

#[derive(Debug, Clone)]
pub struct ArimaFit {
    pub order: ArimaOrder,
    pub intercept: f64,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    /// Innovation variance SSR / n_eff.
    pub sigma2: f64,
    pub loglik: f64,
    pub aic: f64,
    /// One-step residuals aligned to the *input level series*: the first
    /// d + max(p,q) positions are missing (lost to differencing and CSS
    /// conditioning), the rest carry e_t.
    pub residuals: Vec<Option<f64>>,
    /// Number of observations entering the sum of squares.
    pub n_eff: usize,
    pub converged: bool,
}

/// Apply d-fold first differencing.
pub fn difference(y: &[f64], d: usize) -> Vec<f64> {
    let mut w = y.to_vec();
    for _ in 0..d {
        w = w.windows(2).map(|ab| ab[1] - ab[0]).collect();
    }
    w
}

/// Map unconstrained reals to stationary AR coefficients: tanh to partial
/// autocorrelations, then the Levinson recursion to polynomial
/// coefficients.
pub(crate) fn pacf_to_coeffs(z: &[f64]) -> Vec<f64> {
    let r: Vec<f64> = z.iter().map(|v| v.tanh()).collect();
    let p = r.len();
    let mut phi = vec![0.0; p];
    let mut prev = vec![0.0; p];
    for k in 0..p {
        phi[k] = r[k];
        for i in 0..k {
            phi[i] = prev[i] - r[k] * prev[k - 1 - i];
        }
        prev[..=k].copy_from_slice(&phi[..=k]);
    }
    phi
}

/// Inverse of [`pacf_to_coeffs`]: recover unconstrained reals from
/// stationary coefficients. Returns None when the input is not strictly
/// inside the stationarity region (used to sanity-check warm starts).
pub(crate) fn coeffs_to_pacf(phi: &[f64]) -> Option<Vec<f64>> {
    let p = phi.len();
    let mut work = phi.to_vec();
    let mut r = vec![0.0; p];
    for k in (0..p).rev() {
        let rk = work[k];
        if rk.abs() >= 1.0 {
            return None;
        }
        r[k] = rk;
        if k > 0 {
            let denom = 1.0 - rk * rk;
            let prev: Vec<f64> = (0..k)
                .map(|i| (work[i] + rk * work[k - 1 - i]) / denom)
                .collect();
            work[..k].copy_from_slice(&prev);
        }
    }
    // atanh with clamping against roundoff at the boundary
    Some(r.iter().map(|v| v.clamp(-0.999_999, 0.999_999).atanh()).collect())
}

/// One-step CSS errors for fixed parameters. Returns (ssr, errors for
/// t in m..n) where m = max(p, q); pre-sample errors are zero.
pub(crate) fn css_errors(w: &[f64], c: f64, ar: &[f64], ma: &[f64]) -> (f64, Vec<f64>) {
    let n = w.len();
    let m = ar.len().max(ma.len());
    let mut eps = vec![0.0; n];
    let mut ssr = 0.0;
    for t in m..n {
        let mut pred = c;
        for (i, &phi) in ar.iter().enumerate() {
            pred += phi * w[t - 1 - i];
        }
        for (j, &theta) in ma.iter().enumerate() {
            // errors before the conditioning point stay at zero
            pred += theta * eps[t - 1 - j];
        }
        let e = w[t] - pred;
        eps[t] = e;
        ssr += e * e;
    }
    (ssr, eps[m..].to_vec())
}

/// Fit ARIMA(p,d,q) to a level series by conditional sum of squares.
pub fn fit_arima(y: &[f64], order: ArimaOrder) -> Result<ArimaFit, EconError> {
    let ArimaOrder { p, d, q } = order;
    let w_raw = difference(y, d);
    let n = w_raw.len();
    let needed = 10 * (p + q + 1);
    if n < needed {
        return Err(EconError::InsufficientData { needed, got: n, context: "fit_arima" });
    }

    // standardize for optimizer conditioning; map parameters back after
    let scale = {
        let s = stats::sample_std(&w_raw);
        if s.is_finite() && s > 0.0 {
            s
        } else {
            1.0
        }
    };
    let w: Vec<f64> = w_raw.iter().map(|v| v / scale).collect();
    let m = p.max(q);
    let n_eff = n - m;

    // parameter vector: [c, z_ar.., z_ma..] in unconstrained space
    let unpack = |u: &[f64]| -> (f64, Vec<f64>, Vec<f64>) {
        let c = u[0];
        let ar = pacf_to_coeffs(&u[1..1 + p]);
        let psi = pacf_to_coeffs(&u[1 + p..1 + p + q]);
        // MA polynomial 1 + theta_1 B + ... is invertible iff the mirrored
        // coefficients -theta form a stationary AR polynomial
        let ma: Vec<f64> = psi.iter().map(|v| -v).collect();
        (c, ar, ma)
    };
    let mut objective = |u: &[f64]| -> f64 {
        let (c, ar, ma) = unpack(u);
        let (ssr, _) = css_errors(&w, c, &ar, &ma);
        // concentrated average negative log-likelihood, up to constants
        0.5 * (ssr / n_eff as f64).max(1e-300).ln()
    };

    let (c_hat, ar_hat, ma_hat, converged) = if p == 0 && q == 0 {
        (stats::mean(&w), Vec::new(), Vec::new(), true)
    } else {
        // warm start: AR part from a least-squares regression of w on its
        // own lags, pulled inside the stationarity region if needed
        let mut u0 = vec![0.0; 1 + p + q];
        u0[0] = stats::mean(&w);
        if p > 0 && n > 2 * p + 4 {
            let rows = n - p;
            let cols: Vec<Vec<f64>> =
                (0..p).map(|i| (p..n).map(|t| w[t - 1 - i]).collect()).collect();
            let x = super::ols::design_with_intercept(rows, &cols);
            let yy: Vec<f64> = (p..n).map(|t| w[t]).collect();
            if let Ok(fit) = super::ols::ols(&yy, &x) {
                let phi0: Vec<f64> = fit.coef[1..].to_vec();
                if let Some(z) = coeffs_to_pacf(&phi0) {
                    u0[0] = fit.coef[0];
                    u0[1..1 + p].copy_from_slice(&z);
                }
            }
        }
        let opts = OptimOptions { max_iter: 500, ..Default::default() };
        let mut best = minimize(&mut objective, &u0, &opts);
        if !best.converged {
            // single deterministic retry from the flat start
            let retry = minimize(&mut objective, &vec![0.0; 1 + p + q], &opts);
            if retry.f < best.f {
                best = retry;
            }
        }
        if !best.f.is_finite() {
            return Err(EconError::NonConvergence { grad_norm: best.grad_max_norm });
        }
        let (c, ar, ma) = unpack(&best.x);
        (c, ar, ma, best.converged)
    };

    let (ssr_std, eps_std) = css_errors(&w, c_hat, &ar_hat, &ma_hat);
    let sigma2 = ssr_std / n_eff as f64 * scale * scale;
    let loglik = -0.5 * n_eff as f64 * ((2.0 * std::f64::consts::PI * sigma2).ln() + 1.0);
    let k = (p + q + 2) as f64;
    let aic = 2.0 * k - 2.0 * loglik;

    // residuals on the original grid: first d + m slots are missing
    let mut residuals = vec![None; y.len()];
    for (i, e) in eps_std.iter().enumerate() {
        residuals[d + m + i] = Some(e * scale);
    }

    Ok(ArimaFit {
        order,
        intercept: c_hat * scale,
        ar: ar_hat,
        ma: ma_hat,
        sigma2,
        loglik,
        aic,
        residuals,
        n_eff,
        converged,
    })
}
