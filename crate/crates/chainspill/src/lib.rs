//! Half-day cross-chain return spillover toolkit.
//!
//! Crypto markets never close, so every series in this crate lives on a
//! common grid of 12-hour UTC bars: H1 = [00:00, 12:00) and
//! H2 = [12:00, 24:00). On that grid the crate builds market-cap-weighted
//! chain portfolios denominated in each chain's native token, assembles
//! activity and global-market covariates, and estimates spillover
//! regressions with GJR-GARCH errors by joint quasi-maximum likelihood.
//!
//! Pipeline stages (mirrored by the `chainspill` binary's subcommands):
//!
//! 1. [`ingest`] — decode swap events into trades, reconstruct half-day
//!    prices, merge market caps across sources, load asset metadata.
//! 2. [`universe`] — classify assets into All / CEX / non-CEX / Local
//!    portfolio memberships per half-day.
//! 3. [`portfolio`] — cap-weighted log-return panels per chain.
//! 4. [`covariates`] — equity session returns, ARIMA innovations of
//!    staking-reward and money-market rates, extreme-return dummies.
//! 5. [`study`] — design matrices for six model variants and the
//!    5-chain x 3-panel estimation sweep with report rendering.
//! 6. [`synth`] — a seeded data-generating process that writes the same
//!    file formats the real pipeline consumes, for end-to-end testing.
//!
//! Each major capability has a runnable demo under `examples/`; start with
//! `cargo run --example spillover_study`.

pub mod cli;
pub mod covariates;
pub mod econometrics;
pub mod ingest;
pub mod portfolio;
pub mod series;
pub mod stats;
pub mod study;
pub mod synth;
pub mod timebase;
pub mod universe;
