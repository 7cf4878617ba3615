//! Descriptive-moment and quantile helpers shared across modules.
//!
//! Conventions: central moments use the 1/n (population) normalization,
//! which is what the Jarque-Bera statistic expects; the reported standard
//! deviation uses the n-1 (sample) normalization; kurtosis is *excess*
//! kurtosis (normal = 0). Quantiles interpolate per the "type 7" rule
//! (h = (n-1)p, linear between order statistics), the default of most
//! numeric environments.

/// Arithmetic mean. Returns NaN on an empty slice.
pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return f64::NAN;
    }
    x.iter().sum::<f64>() / x.len() as f64
}

/// Central moments (m2, m3, m4) with 1/n normalization.
pub fn central_moments(x: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mu = mean(x);
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in x {
        let d = v - mu;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    (m2 / n, m3 / n, m4 / n)
}

/// Population variance (1/n).
pub fn population_variance(x: &[f64]) -> f64 {
    central_moments(x).0
}

/// Sample variance (1/(n-1)). NaN for fewer than two points.
pub fn sample_variance(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return f64::NAN;
    }
    let n = x.len() as f64;
    population_variance(x) * n / (n - 1.0)
}

/// Sample standard deviation.
pub fn sample_std(x: &[f64]) -> f64 {
    sample_variance(x).sqrt()
}

/// Moment-based skewness m3 / m2^(3/2).
pub fn skewness(x: &[f64]) -> f64 {
    let (m2, m3, _) = central_moments(x);
    m3 / m2.powf(1.5)
}

/// Moment-based excess kurtosis m4 / m2^2 - 3.
pub fn excess_kurtosis(x: &[f64]) -> f64 {
    let (m2, _, m4) = central_moments(x);
    m4 / (m2 * m2) - 3.0
}

/// Type-7 quantile of unsorted data: h = (n-1)p, linear interpolation
/// between the floor(h)-th and (floor(h)+1)-th order statistics.
///
/// Panics if `x` is empty or `p` is outside [0, 1].
pub fn quantile_type7(x: &[f64], p: f64) -> f64 {
    assert!(!x.is_empty(), "quantile of empty sample");
    assert!((0.0..=1.0).contains(&p), "quantile level {p} outside [0,1]");
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("NaN in quantile input"));
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 < sorted.len() {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    } else {
        sorted[lo]
    }
}
