//! Spillover study orchestration.
//!
//! A study runs one estimation per (variant, chain, panel) cell —
//! fifteen cells per variant — selects the volatility order per cell by
//! AIC, and renders two report files: a long-form CSV for machines and
//! paper-style panel tables for humans. Cells are independent jobs and
//! run on a work pool; report assembly is a single-threaded reduction
//! in canonical order, so identical inputs and seed produce
//! byte-identical reports.

mod design;

pub use design::{
    build_design, gamma_ids, rival_col, row_template, DesignMatrix, StudyError, StudyInputs,
    StudyPanel, Variant, THETA_IDS,
};

use crate::covariates::{extreme_dummies, DummyPair};
use crate::econometrics::{
    select_garch_order, stars_for_tstat, FitOptions, FitResult, GjrOrderBounds,
};
use crate::timebase::{grid, HalfDayId};
use crate::universe::{ChainId, PortfolioKind};
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Study-wide settings.
#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub variants: Vec<Variant>,
    /// Inclusive half-day window of the dependent variable.
    pub window: (HalfDayId, HalfDayId),
    /// Tail probability for extreme-return dummies.
    pub tail: f64,
    /// Volatility-order search grid.
    pub bounds: GjrOrderBounds,
    /// Root seed; each cell derives its own stream from it.
    pub seed: u64,
    /// Random restarts per estimation.
    pub restarts: usize,
}

impl StudyConfig {
    pub fn new(window: (HalfDayId, HalfDayId)) -> Self {
        StudyConfig {
            variants: vec![Variant::LinearBaseline],
            window,
            tail: 0.05,
            bounds: GjrOrderBounds::default(),
            seed: 7,
            restarts: FitOptions::default().restarts,
        }
    }
}

/// One estimated (or failed) table cell.
#[derive(Debug, Clone)]
pub struct StudyCell {
    pub variant: Variant,
    pub chain: ChainId,
    pub panel: StudyPanel,
    /// The fit, or a rendered error message. A failure in one cell
    /// never aborts the others.
    pub outcome: Result<FitResult, String>,
}

/// All cells of a study run, in canonical (variant, panel, chain) order.
#[derive(Debug, Clone)]
pub struct StudyReport {
    pub cells: Vec<StudyCell>,
    pub window: (HalfDayId, HalfDayId),
}

impl StudyReport {
    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_failed(&self) -> usize {
        self.cells.iter().filter(|c| c.outcome.is_err()).count()
    }

    pub fn cell(&self, variant: Variant, chain: ChainId, panel: StudyPanel) -> Option<&StudyCell> {
        self.cells
            .iter()
            .find(|c| c.variant == variant && c.chain == chain && c.panel == panel)
    }
}

/// Derive the per-cell seed from the root seed and the cell's canonical
/// coordinates, so cells are independent of scheduling order and of
/// which other cells run.
pub fn cell_seed(seed: u64, variant: Variant, chain: ChainId, panel: StudyPanel) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(
        (variant.index() as u64) * 100 + (chain.ordinal() as u64) * 10 + panel.index() as u64 + 1,
    )
}

/// Run the full study: estimate every requested cell and collect the
/// outcomes. Failed cells carry their error message; callers decide
/// whether partial results are acceptable.
pub fn run_study(inputs: &StudyInputs, config: &StudyConfig) -> StudyReport {
    let window = grid(config.window.0, config.window.1);

    // Tail dummies are shared across cells: one pair per chain, with
    // thresholds from the chain's portfolio-wide return over the window.
    let dummies: Option<BTreeMap<ChainId, DummyPair>> =
        if config.variants.iter().any(|v| v.has_dummies()) {
            let mut map = BTreeMap::new();
            for chain in ChainId::ALL {
                let Ok(series) = inputs.panel_series(chain, PortfolioKind::All) else {
                    continue;
                };
                let windowed = series.window(config.window.0, config.window.1);
                match extreme_dummies(&windowed, config.tail) {
                    Ok(pair) => {
                        map.insert(chain, pair);
                    }
                    Err(e) => log::warn!("no tail dummies for {chain}: {e}"),
                }
            }
            Some(map)
        } else {
            None
        };

    let mut jobs: Vec<(Variant, StudyPanel, ChainId)> = Vec::new();
    for variant in &config.variants {
        for panel in StudyPanel::ALL {
            for chain in ChainId::ALL {
                jobs.push((*variant, panel, chain));
            }
        }
    }

    let cells: Vec<StudyCell> = jobs
        .into_par_iter()
        .map(|(variant, panel, chain)| {
            let outcome = build_design(chain, panel, variant, inputs, &window, dummies.as_ref())
                .map_err(|e| e.to_string())
                .and_then(|dm| {
                    let opts = FitOptions {
                        seed: cell_seed(config.seed, variant, chain, panel),
                        restarts: config.restarts,
                        ..FitOptions::default()
                    };
                    select_garch_order(&dm.y, &dm.design, &config.bounds, &opts)
                        .map(|(fit, _)| fit)
                        .map_err(|e| e.to_string())
                });
            if let Err(e) = &outcome {
                log::warn!("cell ({}, {}, {}) failed: {e}", variant.key(), chain, panel.letter());
            }
            StudyCell { variant, chain, panel, outcome }
        })
        .collect();

    StudyReport { cells, window: config.window }
}

/// Long-form machine-readable report. One row per estimated mean
/// coefficient; failed cells contribute no rows (their errors live in
/// the log and in the human-readable tables). The `r2` column carries
/// the same statistic the table reports for that variant: plain
/// R-squared for the baseline linear model, adjusted for the rest.
pub fn render_report_csv(report: &StudyReport) -> String {
    let mut out = String::from("variant,chain,panel,coef_name,estimate,tstat,stars,p,o,q,r2,n_obs\n");
    for cell in &report.cells {
        let Ok(fit) = &cell.outcome else { continue };
        let order = fit.variance.order();
        let r2 = table_r2(cell.variant, fit);
        for (i, name) in fit.mean_names.iter().enumerate() {
            let t = fit.mean_tstats[i];
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                cell.variant.key(),
                cell.chain.key(),
                cell.panel.letter(),
                name,
                fit.mean_coefficients[i],
                t,
                stars_for_tstat(t),
                order.p,
                order.o,
                order.q,
                r2,
                fit.n_obs,
            ));
        }
    }
    out
}

fn table_r2(variant: Variant, fit: &FitResult) -> f64 {
    if variant == Variant::LinearBaseline {
        fit.r2
    } else {
        fit.adj_r2
    }
}

/// Paper-style panel tables: per variant and panel, one column per
/// chain, coefficient rows with stars and parenthesized t-stats below,
/// then the selected volatility order, fit statistic, and sample size.
/// A failed cell renders an em-dash down its column.
pub fn render_report_md(report: &StudyReport) -> String {
    let mut out = String::from("# Cross-chain spillover study\n");
    out.push_str(&format!("\nWindow: {} .. {}\n", report.window.0, report.window.1));

    for variant in Variant::ALL {
        let variant_cells: Vec<&StudyCell> =
            report.cells.iter().filter(|c| c.variant == variant).collect();
        if variant_cells.is_empty() {
            continue;
        }
        out.push_str(&format!("\n## {}\n", variant.key()));
        for panel in StudyPanel::ALL {
            let by_chain: BTreeMap<ChainId, &StudyCell> = variant_cells
                .iter()
                .filter(|c| c.panel == panel)
                .map(|c| (c.chain, *c))
                .collect();
            if by_chain.is_empty() {
                continue;
            }
            out.push_str(&format!("\n### {}\n\n", panel.label()));
            out.push_str("| |");
            for chain in ChainId::ALL {
                out.push_str(&format!(" {} |", chain.display_name()));
            }
            out.push_str("\n|---|---|---|---|---|---|\n");

            for name in row_template(variant) {
                let mut est_row = format!("| {name} |");
                let mut t_row = String::from("| |");
                for chain in ChainId::ALL {
                    match by_chain.get(&chain).map(|c| &c.outcome) {
                        None => {
                            est_row.push_str(" |");
                            t_row.push_str(" |");
                        }
                        Some(Err(_)) => {
                            est_row.push_str(" — |");
                            t_row.push_str(" |");
                        }
                        Some(Ok(fit)) => {
                            match fit.mean_names.iter().position(|n| *n == name) {
                                None => {
                                    // own-chain rival slot: structurally absent
                                    est_row.push_str(" |");
                                    t_row.push_str(" |");
                                }
                                Some(i) => {
                                    let t = fit.mean_tstats[i];
                                    est_row.push_str(&format!(
                                        " {:.4}{} |",
                                        fit.mean_coefficients[i],
                                        stars_for_tstat(t)
                                    ));
                                    t_row.push_str(&format!(" ({t:.3}) |"));
                                }
                            }
                        }
                    }
                }
                out.push_str(&est_row);
                out.push('\n');
                out.push_str(&t_row);
                out.push('\n');
            }

            // footer: selected order, fit statistic, sample size
            let mut order_row = String::from("| (p,o,q) |");
            let mut r2_row = format!("| {} |", variant.r2_label());
            let mut n_row = String::from("| N |");
            for chain in ChainId::ALL {
                match by_chain.get(&chain).map(|c| &c.outcome) {
                    Some(Ok(fit)) => {
                        let o = fit.variance.order();
                        order_row.push_str(&format!(" ({},{},{}) |", o.p, o.o, o.q));
                        r2_row.push_str(&format!(" {:.4} |", table_r2(variant, fit)));
                        n_row.push_str(&format!(" {} |", fit.n_obs));
                    }
                    _ => {
                        order_row.push_str(" — |");
                        r2_row.push_str(" — |");
                        n_row.push_str(" — |");
                    }
                }
            }
            out.push_str(&order_row);
            out.push('\n');
            out.push_str(&r2_row);
            out.push('\n');
            out.push_str(&n_row);
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::econometrics::GjrOrder;
    use crate::timebase::Half;

    fn small_config(window: (HalfDayId, HalfDayId)) -> StudyConfig {
        StudyConfig {
            variants: vec![Variant::LinearBaseline],
            window,
            tail: 0.05,
            bounds: GjrOrderBounds::single(GjrOrder::new(1, 0, 1)),
            seed: 11,
            restarts: 1,
        }
    }

    fn study_window() -> (HalfDayId, HalfDayId) {
        let start = HalfDayId::new("2024-01-01".parse().unwrap(), Half::H1);
        (start, start.offset(299))
    }

    #[test]
    fn full_grid_runs_and_reports_are_deterministic() {
        let window = study_window();
        let inputs = design::dense_inputs(window.0, 300, 3);
        let config = small_config(window);
        let report = run_study(&inputs, &config);
        assert_eq!(report.n_cells(), 15);
        assert_eq!(report.n_failed(), 0);

        let csv_a = render_report_csv(&report);
        let md_a = render_report_md(&report);
        let report_b = run_study(&inputs, &config);
        assert_eq!(csv_a, render_report_csv(&report_b));
        assert_eq!(md_a, render_report_md(&report_b));

        // every cell present in the CSV with the pinned header
        assert!(csv_a.starts_with("variant,chain,panel,coef_name,estimate,tstat,stars,p,o,q,r2,n_obs\n"));
        for chain in ChainId::ALL {
            for panel in StudyPanel::ALL {
                let prefix = format!("linear_baseline,{},{},alpha_0,", chain.key(), panel.letter());
                assert!(csv_a.lines().any(|l| l.starts_with(&prefix)), "{prefix}");
            }
        }
        // rendered t-stats match the fit fields they came from
        let cell = report.cell(Variant::LinearBaseline, ChainId::Ethereum, StudyPanel::A).unwrap();
        let fit = cell.outcome.as_ref().unwrap();
        let line = csv_a
            .lines()
            .find(|l| l.starts_with("linear_baseline,ethereum,A,lag_own,"))
            .unwrap();
        let fields: Vec<&str> = line.split(',').collect();
        let idx = fit.mean_names.iter().position(|n| n == "lag_own").unwrap();
        assert_eq!(fields[4].parse::<f64>().unwrap(), fit.mean_coefficients[idx]);
        assert_eq!(fields[5].parse::<f64>().unwrap(), fit.mean_tstats[idx]);
    }

    #[test]
    fn failed_cell_dashes_its_column_and_spares_the_rest() {
        let window = study_window();
        let mut inputs = design::dense_inputs(window.0, 300, 4);
        inputs.panels.get_mut(&ChainId::Solana).unwrap().remove(&PortfolioKind::Local);
        let config = small_config(window);
        let report = run_study(&inputs, &config);
        assert_eq!(report.n_cells(), 15);
        assert_eq!(report.n_failed(), 1);
        let failed = report.cell(Variant::LinearBaseline, ChainId::Solana, StudyPanel::C).unwrap();
        assert!(failed.outcome.is_err());

        let csv = render_report_csv(&report);
        assert!(!csv.lines().any(|l| l.starts_with("linear_baseline,solana,C,")));
        assert!(csv.lines().any(|l| l.starts_with("linear_baseline,solana,B,")));

        let md = render_report_md(&report);
        assert!(md.contains("—"));
        // Panel C table still renders the other four chains
        let panel_c = md.split("### Panel C").nth(1).unwrap();
        assert!(panel_c.contains("(p,o,q)"));
    }

    #[test]
    fn cell_seeds_are_unique_across_the_grid() {
        let mut seen = std::collections::BTreeSet::new();
        for variant in Variant::ALL {
            for chain in ChainId::ALL {
                for panel in StudyPanel::ALL {
                    assert!(seen.insert(cell_seed(9, variant, chain, panel)));
                }
            }
        }
        assert_eq!(seen.len(), 90);
    }
}
