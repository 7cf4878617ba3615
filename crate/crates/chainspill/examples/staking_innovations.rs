//! Covariates: whitened activity series and extreme-return dummies.
//!
//! Persistent level series — staking reward rates, money-market rates —
//! enter the spillover regressions as ARIMA innovations, the unexpected
//! component left after a minimum-AIC fit. Tail indicators of a reference
//! return series mark attention-grabbing half-days. This demo builds both
//! from simulated data.
//!
//! Run with: `cargo run --example staking_innovations`

use chainspill::covariates::{extreme_dummies, innovation_series, ArimaOrderBounds};
use chainspill::econometrics::{jarque_bera, ljung_box};
use chainspill::series::Series;
use chainspill::timebase::HalfDayId;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let noise = Normal::new(0.0, 0.12).unwrap();
    let start: HalfDayId = "2024-01-01 H1".parse().unwrap();
    let n = 700;

    // A mean-reverting staking-rate path: 4.5% anchor, strong persistence.
    let mut rate = Series::empty("staking.ethereum");
    let mut level = 4.5f64;
    for i in 0..n {
        level = 4.5 + 0.92 * (level - 4.5) + noise.sample(&mut rng);
        rate.set(start.offset(i), Some(level));
    }

    let fit = innovation_series(&rate, &ArimaOrderBounds::default(), "SR_Ethereum")
        .expect("innovation extraction");
    let resid = fit.residuals.present();
    println!(
        "selected ARIMA({},{},{}) on {} observations; {} innovations",
        fit.order.p,
        fit.order.d,
        fit.order.q,
        n,
        resid.len()
    );

    // The innovations should be unforecastable: no autocorrelation left
    // at low lags once the selected model's own parameters are accounted.
    let lb = ljung_box(&resid, 8, fit.order.p + fit.order.q).expect("whiteness check");
    println!("Ljung-Box Q(8) = {:.2}, p = {:.3} (want: not rejected)", lb.statistic, lb.p_value);
    let jb = jarque_bera(&resid).expect("normality check");
    println!("Jarque-Bera = {:.2}{}", jb.statistic, jb.rejection.stars());

    // Extreme dummies: inclusive 5% tail flags of a reference return.
    let returns = Normal::new(0.0, 0.03).unwrap();
    let mut reference = Series::empty("ethereum.all");
    for i in 0..n {
        reference.set(start.offset(i), Some(returns.sample(&mut rng)));
    }
    let dummies = extreme_dummies(&reference, 0.05).expect("tail flags");
    let (lo, hi) = dummies.thresholds;
    let flagged_hi = dummies.upper.present().iter().sum::<f64>() as usize;
    let flagged_lo = dummies.lower.present().iter().sum::<f64>() as usize;
    println!(
        "\nextreme dummies on {n} half-days: thresholds ({lo:.4}, {hi:.4}), \
         {flagged_lo} lower-tail and {flagged_hi} upper-tail flags"
    );
}
