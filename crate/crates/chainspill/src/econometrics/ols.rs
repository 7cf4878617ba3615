//! Ordinary least squares with conventional t-statistics.
//!
//! Used for GJR-GARCH warm starts, ADF regressions, and as the degenerate
//! homoskedastic case of the joint estimator. Solves the normal equations
//! through a column-pivoted QR so rank deficiency is detected rather than
//! silently amplified.

use super::EconError;
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct OlsFit {
    /// Coefficients in column order of the design (including whatever
    /// intercept column the caller put there).
    pub coef: Vec<f64>,
    pub tstats: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Residual variance SSR / (n - k).
    pub sigma2: f64,
    pub r2: f64,
    pub adj_r2: f64,
    pub n_obs: usize,
}

/// Fit y = X b + e. `x` carries one column per regressor (intercept
/// included if the caller wants one). Requires n > k and full column rank.
pub fn ols(y: &[f64], x: &DMatrix<f64>) -> Result<OlsFit, EconError> {
    let n = x.nrows();
    let k = x.ncols();
    assert_eq!(y.len(), n, "response/design length mismatch");
    if n <= k {
        return Err(EconError::InsufficientData { needed: k + 1, got: n, context: "ols" });
    }

    let qr = x.clone().col_piv_qr();
    // rank check on the R diagonal, relative to its largest element;
    // the reported column is the pivot position at which rank collapsed
    let r = qr.r();
    let rmax = (0..k.min(n)).map(|i| r[(i, i)].abs()).fold(0.0_f64, f64::max);
    for i in 0..k.min(n) {
        if r[(i, i)].abs() <= rmax * 1e-10 {
            return Err(EconError::SingularDesign { column: i });
        }
    }

    // Least-squares solve from the factorization X·P = Q·R: project onto the
    // column space (Qᵀy), back-substitute the k×k triangular block, then undo
    // the column pivoting. ColPivQR::solve itself only accepts square systems.
    let yv = DVector::from_column_slice(y);
    let mut coef = qr.q().tr_mul(&yv);
    if !r.solve_upper_triangular_mut(&mut coef) {
        return Err(EconError::SingularDesign { column: 0 });
    }
    qr.p().inv_permute_rows(&mut coef);

    let fitted = x * &coef;
    let resid = &yv - &fitted;
    let ssr: f64 = resid.iter().map(|e| e * e).sum();
    let ybar = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - ybar) * (v - ybar)).sum();
    let sigma2 = ssr / (n - k) as f64;

    let xtx = x.transpose() * x;
    let xtx_inv = xtx
        .try_inverse()
        .ok_or(EconError::SingularDesign { column: 0 })?;
    let tstats: Vec<f64> = (0..k)
        .map(|j| {
            let se = (sigma2 * xtx_inv[(j, j)]).sqrt();
            coef[j] / se
        })
        .collect();

    let r2 = if sst > 0.0 { 1.0 - ssr / sst } else { f64::NAN };
    let adj_r2 = if sst > 0.0 && n > k {
        1.0 - (1.0 - r2) * (n as f64 - 1.0) / (n - k) as f64
    } else {
        f64::NAN
    };

    Ok(OlsFit {
        coef: coef.as_slice().to_vec(),
        tstats,
        residuals: resid.as_slice().to_vec(),
        sigma2,
        r2,
        adj_r2,
        n_obs: n,
    })
}

/// Convenience: prepend an intercept column to raw regressor columns.
pub fn design_with_intercept(n: usize, cols: &[Vec<f64>]) -> DMatrix<f64> {
    let k = cols.len() + 1;
    let mut x = DMatrix::zeros(n, k);
    for i in 0..n {
        x[(i, 0)] = 1.0;
    }
    for (j, col) in cols.iter().enumerate() {
        assert_eq!(col.len(), n, "column {j} has wrong length");
        for i in 0..n {
            x[(i, j + 1)] = col[i];
        }
    }
    x
}
