//! Regression variants and design-matrix assembly.
//!
//! Every estimated equation explains one chain's half-day portfolio
//! return from its own lag, its own-chain CEX return, the four rival
//! chains' portfolio-wide returns, and optional macro / activity /
//! interaction blocks. Column order is pinned here; the table renderers
//! and the long-form CSV both rely on it.

use crate::covariates::{native_return_id, staking_innovation_id, DummyPair};
use crate::econometrics::Design;
use crate::series::Series;
use crate::timebase::HalfDayId;
use crate::universe::{ChainId, PortfolioKind};
use std::collections::BTreeMap;
use thiserror::Error;

/// Regression specification variants, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variant {
    LinearBaseline,
    LinearMacro,
    LinearMacroActivity,
    NonlinearBaseline,
    NonlinearMacro,
    NonlinearExtreme,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::LinearBaseline,
        Variant::LinearMacro,
        Variant::LinearMacroActivity,
        Variant::NonlinearBaseline,
        Variant::NonlinearMacro,
        Variant::NonlinearExtreme,
    ];

    /// Stable machine name (config files, report rows).
    pub fn key(self) -> &'static str {
        match self {
            Variant::LinearBaseline => "linear_baseline",
            Variant::LinearMacro => "linear_macro",
            Variant::LinearMacroActivity => "linear_macro_activity",
            Variant::NonlinearBaseline => "nonlinear_baseline",
            Variant::NonlinearMacro => "nonlinear_macro",
            Variant::NonlinearExtreme => "nonlinear_extreme",
        }
    }

    pub fn index(self) -> usize {
        Variant::ALL.iter().position(|v| *v == self).unwrap()
    }

    /// Interaction variants (rival returns enter multiplied by activity).
    pub fn is_nonlinear(self) -> bool {
        matches!(
            self,
            Variant::NonlinearBaseline | Variant::NonlinearMacro | Variant::NonlinearExtreme
        )
    }

    /// Carries the six-column global macro block.
    pub fn has_macro_block(self) -> bool {
        matches!(
            self,
            Variant::LinearMacro
                | Variant::LinearMacroActivity
                | Variant::NonlinearMacro
                | Variant::NonlinearExtreme
        )
    }

    /// Carries the eleven-column chain-activity block.
    pub fn has_activity_block(self) -> bool {
        matches!(self, Variant::LinearMacroActivity)
    }

    /// Requires per-rival extreme-return dummies.
    pub fn has_dummies(self) -> bool {
        matches!(self, Variant::NonlinearExtreme)
    }

    /// Fit-statistic label used in the rendered tables: the baseline
    /// table reports plain R-squared, richer models report the
    /// adjusted version.
    pub fn r2_label(self) -> &'static str {
        match self {
            Variant::LinearBaseline => "R²",
            _ => "Adjusted R²",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.key())
    }
}

impl std::str::FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.key() == s)
            .ok_or_else(|| format!("unknown variant '{s}'"))
    }
}

/// Table panels: which portfolio kind is being explained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StudyPanel {
    A,
    B,
    C,
}

impl StudyPanel {
    pub const ALL: [StudyPanel; 3] = [StudyPanel::A, StudyPanel::B, StudyPanel::C];

    /// Portfolio kind of the dependent variable (and its own lag).
    pub fn kind(self) -> PortfolioKind {
        match self {
            StudyPanel::A => PortfolioKind::All,
            StudyPanel::B => PortfolioKind::NonCex,
            StudyPanel::C => PortfolioKind::Local,
        }
    }

    pub fn letter(self) -> &'static str {
        match self {
            StudyPanel::A => "A",
            StudyPanel::B => "B",
            StudyPanel::C => "C",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            StudyPanel::A => "Panel A: portfolio-wide returns",
            StudyPanel::B => "Panel B: non-CEX returns",
            StudyPanel::C => "Panel C: local-asset returns",
        }
    }

    pub fn index(self) -> usize {
        StudyPanel::ALL.iter().position(|p| *p == self).unwrap()
    }
}

impl std::str::FromStr for StudyPanel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(StudyPanel::A),
            "B" => Ok(StudyPanel::B),
            "C" => Ok(StudyPanel::C),
            _ => Err(format!("unknown panel '{s}' (expected A, B, or C)")),
        }
    }
}

/// Errors from design assembly.
#[derive(Debug, Error)]
pub enum StudyError {
    #[error("series '{id}' missing from study inputs")]
    MissingSeries { id: String },
    #[error("window leaves {rows} complete rows for {cols} regressors")]
    WindowTooShort { rows: usize, cols: usize },
    #[error("extreme-return dummies missing for chain {chain}")]
    MissingDummies { chain: ChainId },
}

/// Everything design assembly reads: per-chain portfolio return series
/// and regression-ready covariates keyed by series id.
#[derive(Debug, Clone, Default)]
pub struct StudyInputs {
    pub panels: BTreeMap<ChainId, BTreeMap<PortfolioKind, Series>>,
    pub covariates: BTreeMap<String, Series>,
}

impl StudyInputs {
    /// Assemble from in-memory build products.
    pub fn from_build(
        panels: &BTreeMap<ChainId, crate::portfolio::ChainPanel>,
        activity: &crate::covariates::ActivitySet,
        global: &crate::covariates::GlobalSet,
    ) -> Self {
        let mut inputs = StudyInputs::default();
        for (chain, panel) in panels {
            let by_kind = inputs.panels.entry(*chain).or_default();
            for kind in PortfolioKind::ALL {
                by_kind.insert(kind, panel.series(kind).clone());
            }
        }
        let mut keep = |s: &Series| {
            inputs.covariates.insert(s.id().to_string(), s.clone());
        };
        keep(&activity.btc_return);
        activity.native_returns.values().for_each(&mut keep);
        activity.staking_innovations.values().for_each(&mut keep);
        global.equity.values().for_each(&mut keep);
        global.rate_innovations.values().for_each(&mut keep);
        inputs
    }

    /// Parse from the on-disk interchange files.
    pub fn from_csv(panel_csv: &str, covariates_csv: &str) -> Result<Self, String> {
        Ok(StudyInputs {
            panels: crate::portfolio::panels_from_csv(panel_csv)?,
            covariates: crate::covariates::covariates_from_csv(covariates_csv)?,
        })
    }

    pub fn panel_series(
        &self,
        chain: ChainId,
        kind: PortfolioKind,
    ) -> Result<&Series, StudyError> {
        self.panels
            .get(&chain)
            .and_then(|m| m.get(&kind))
            .ok_or_else(|| StudyError::MissingSeries { id: format!("panel.{}.{}", chain.key(), kind.key()) })
    }

    pub fn covariate(&self, id: &str) -> Result<&Series, StudyError> {
        self.covariates
            .get(id)
            .ok_or_else(|| StudyError::MissingSeries { id: id.to_string() })
    }
}

/// The global macro block, in column order.
pub const THETA_IDS: [&str; 6] = ["FTSER", "HSR", "SPR", "EURIBOR", "HIBOR", "TREA"];

/// The chain-activity block, in column order: Bitcoin's return, the
/// five native-token returns, the five staking innovations.
pub fn gamma_ids() -> Vec<String> {
    let mut ids = vec!["R_BTC".to_string()];
    ids.extend(ChainId::ALL.iter().map(|c| native_return_id(*c)));
    ids.extend(ChainId::ALL.iter().map(|c| staking_innovation_id(*c)));
    ids
}

/// Column name of a rival chain's portfolio-wide return.
pub fn rival_col(chain: ChainId) -> String {
    format!("rival_{}", chain.display_name())
}

/// A regression-ready block: retained bars, dependent values, and the
/// named regressor columns (intercept excluded — estimation adds it).
/// Listwise deletion has already been applied: no retained row has a
/// missing cell anywhere.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    pub bars: Vec<HalfDayId>,
    pub y: Vec<f64>,
    pub design: Design,
}

impl DesignMatrix {
    pub fn n_rows(&self) -> usize {
        self.y.len()
    }

    pub fn n_regressors(&self) -> usize {
        self.design.n_cols()
    }
}

/// Assemble the design matrix for one (chain, panel, variant) cell over
/// a half-day window.
///
/// Column order: linear variants run own-lag, own CEX return, the four
/// rival returns, then the macro block, then the activity block.
/// Nonlinear variants run own CEX return, the own-lag triple (lag,
/// lag x own staking innovation at t-1, lag x own native return at
/// t-1), then per rival the interaction block (return, return x rival
/// staking innovation at t, return x rival native return at t, and for
/// the extreme variant return x upper/lower tail dummies), then the
/// macro block. The own-lag column always uses the dependent variable's
/// portfolio kind; rival columns always use the portfolio-wide return.
pub fn build_design(
    chain: ChainId,
    panel: StudyPanel,
    variant: Variant,
    inputs: &StudyInputs,
    window: &[HalfDayId],
    dummies: Option<&BTreeMap<ChainId, DummyPair>>,
) -> Result<DesignMatrix, StudyError> {
    let dep = inputs.panel_series(chain, panel.kind())?;
    let own_cex = inputs.panel_series(chain, PortfolioKind::Cex)?;

    let at = |s: &Series| -> Vec<Option<f64>> { window.iter().map(|b| s.get(*b)).collect() };
    let lagged = |s: &Series| -> Vec<Option<f64>> {
        window.iter().map(|b| s.get(b.predecessor())).collect()
    };
    let product = |a: &[Option<f64>], b: &[Option<f64>]| -> Vec<Option<f64>> {
        a.iter().zip(b).map(|(x, y)| x.zip(*y).map(|(u, v)| u * v)).collect()
    };

    let mut columns: Vec<(String, Vec<Option<f64>>)> = Vec::new();
    let lag_own = lagged(dep);
    let cex_own = at(own_cex);

    if variant.is_nonlinear() {
        let sr_own = lagged(inputs.covariate(&staking_innovation_id(chain))?);
        let native_own = lagged(inputs.covariate(&native_return_id(chain))?);
        columns.push(("cex_own".to_string(), cex_own));
        columns.push(("lag_own".to_string(), lag_own.clone()));
        columns.push(("lag_own_x_SR".to_string(), product(&lag_own, &sr_own)));
        columns.push(("lag_own_x_native".to_string(), product(&lag_own, &native_own)));
        for rival in chain.rivals() {
            let r = at(inputs.panel_series(rival, PortfolioKind::All)?);
            let sr = at(inputs.covariate(&staking_innovation_id(rival))?);
            let native = at(inputs.covariate(&native_return_id(rival))?);
            let base = rival_col(rival);
            columns.push((base.clone(), r.clone()));
            columns.push((format!("{base}_x_SR"), product(&r, &sr)));
            columns.push((format!("{base}_x_native"), product(&r, &native)));
            if variant.has_dummies() {
                let pair = dummies
                    .and_then(|m| m.get(&rival))
                    .ok_or(StudyError::MissingDummies { chain: rival })?;
                columns.push((format!("{base}_x_DU"), product(&r, &at(&pair.upper))));
                columns.push((format!("{base}_x_DL"), product(&r, &at(&pair.lower))));
            }
        }
    } else {
        columns.push(("lag_own".to_string(), lag_own));
        columns.push(("cex_own".to_string(), cex_own));
        for rival in chain.rivals() {
            let r = at(inputs.panel_series(rival, PortfolioKind::All)?);
            columns.push((rival_col(rival), r));
        }
    }
    if variant.has_macro_block() {
        for id in THETA_IDS {
            columns.push((id.to_string(), at(inputs.covariate(id)?)));
        }
    }
    if variant.has_activity_block() {
        for id in gamma_ids() {
            columns.push((id.clone(), at(inputs.covariate(&id)?)));
        }
    }

    let y_opt = at(dep);
    let mut bars = Vec::new();
    let mut y = Vec::new();
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); columns.len()];
    for (row, bar) in window.iter().enumerate() {
        let Some(yv) = y_opt[row] else { continue };
        if columns.iter().any(|(_, c)| c[row].is_none()) {
            continue;
        }
        bars.push(*bar);
        y.push(yv);
        for (j, (_, c)) in columns.iter().enumerate() {
            cols[j].push(c[row].unwrap());
        }
    }
    if y.len() < columns.len() + 2 {
        return Err(StudyError::WindowTooShort { rows: y.len(), cols: columns.len() });
    }
    let names = columns.into_iter().map(|(n, _)| n).collect();
    Ok(DesignMatrix { bars, y, design: Design::new(names, cols) })
}

/// Row labels of the rendered table for one variant: the union of
/// coefficient names across the five chain equations, in display order.
/// (Each equation contributes four of the five rival blocks.)
pub fn row_template(variant: Variant) -> Vec<String> {
    let mut rows = vec!["alpha_0".to_string()];
    if variant.is_nonlinear() {
        rows.push("cex_own".to_string());
        rows.push("lag_own".to_string());
        rows.push("lag_own_x_SR".to_string());
        rows.push("lag_own_x_native".to_string());
        for chain in ChainId::ALL {
            let base = rival_col(chain);
            rows.push(base.clone());
            rows.push(format!("{base}_x_SR"));
            rows.push(format!("{base}_x_native"));
            if variant.has_dummies() {
                rows.push(format!("{base}_x_DU"));
                rows.push(format!("{base}_x_DL"));
            }
        }
    } else {
        rows.push("lag_own".to_string());
        rows.push("cex_own".to_string());
        for chain in ChainId::ALL {
            rows.push(rival_col(chain));
        }
    }
    if variant.has_macro_block() {
        rows.extend(THETA_IDS.iter().map(|s| s.to_string()));
    }
    if variant.has_activity_block() {
        rows.extend(gamma_ids());
    }
    rows
}

/// Dense iid study inputs for tests: every panel and covariate series
/// is fully present, covering two bars before `start` so lag columns
/// are defined from the first window bar.
#[cfg(test)]
pub(crate) fn dense_inputs(start: HalfDayId, len: usize, seed: u64) -> StudyInputs {
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 0.01).unwrap();
    let mut draw = |n: usize| -> Vec<Option<f64>> {
        (0..n).map(|_| Some(normal.sample(&mut rng))).collect()
    };
    let origin = start.offset(-2);
    let n = len + 2;
    let mut inputs = StudyInputs::default();
    for chain in ChainId::ALL {
        let by_kind = inputs.panels.entry(chain).or_default();
        for kind in PortfolioKind::ALL {
            by_kind.insert(kind, Series::new("p", origin, draw(n)));
        }
    }
    let mut ids: Vec<String> = gamma_ids();
    ids.extend(THETA_IDS.iter().map(|s| s.to_string()));
    for id in ids {
        inputs.covariates.insert(id.clone(), Series::new(id, origin, draw(n)));
    }
    inputs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariates::extreme_dummies;
    use crate::timebase::{grid, Half};
    use approx::assert_abs_diff_eq;

    fn bar(date: &str, half: Half) -> HalfDayId {
        HalfDayId::new(date.parse().unwrap(), half)
    }

    #[test]
    fn regressor_counts_match_for_every_chain() {
        let start = bar("2024-01-01", Half::H1);
        let window = grid(start, start.offset(199));
        let inputs = dense_inputs(start, 200, 5);
        let counts = [
            (Variant::LinearBaseline, 6),
            (Variant::LinearMacro, 12),
            (Variant::LinearMacroActivity, 23),
            (Variant::NonlinearBaseline, 16),
            (Variant::NonlinearMacro, 22),
            (Variant::NonlinearExtreme, 30),
        ];
        let mut dummies = std::collections::BTreeMap::new();
        for chain in ChainId::ALL {
            let s = inputs.panel_series(chain, PortfolioKind::All).unwrap();
            dummies.insert(chain, extreme_dummies(s, 0.05).unwrap());
        }
        for (variant, expected) in counts {
            for chain in ChainId::ALL {
                let dm = build_design(
                    chain,
                    StudyPanel::A,
                    variant,
                    &inputs,
                    &window,
                    Some(&dummies),
                )
                .unwrap();
                assert_eq!(
                    dm.n_regressors(),
                    expected,
                    "{} {}",
                    variant.key(),
                    chain.display_name()
                );
                // names unique
                let mut names = dm.design.names.clone();
                names.sort();
                names.dedup();
                assert_eq!(names.len(), expected);
            }
        }
    }

    #[test]
    fn linear_baseline_columns_are_ordered() {
        let start = bar("2024-01-01", Half::H1);
        let window = grid(start, start.offset(99));
        let inputs = dense_inputs(start, 100, 6);
        let dm = build_design(
            ChainId::Ethereum,
            StudyPanel::A,
            Variant::LinearBaseline,
            &inputs,
            &window,
            None,
        )
        .unwrap();
        assert_eq!(
            dm.design.names,
            vec![
                "lag_own",
                "cex_own",
                "rival_Solana",
                "rival_BSC",
                "rival_Arbitrum",
                "rival_Avalanche"
            ]
        );
        // Arbitrum's equation carries the Ethereum column
        let dm = build_design(
            ChainId::Arbitrum,
            StudyPanel::A,
            Variant::LinearBaseline,
            &inputs,
            &window,
            None,
        )
        .unwrap();
        assert_eq!(dm.design.names[2], "rival_Ethereum");
    }

    #[test]
    fn nonlinear_columns_are_ordered() {
        let start = bar("2024-01-01", Half::H1);
        let window = grid(start, start.offset(149));
        let inputs = dense_inputs(start, 150, 7);
        let dm = build_design(
            ChainId::Ethereum,
            StudyPanel::B,
            Variant::NonlinearMacro,
            &inputs,
            &window,
            None,
        )
        .unwrap();
        let expected_head = [
            "cex_own",
            "lag_own",
            "lag_own_x_SR",
            "lag_own_x_native",
            "rival_Solana",
            "rival_Solana_x_SR",
            "rival_Solana_x_native",
        ];
        assert_eq!(&dm.design.names[..7], &expected_head);
        assert_eq!(&dm.design.names[16..], &THETA_IDS);
    }

    #[test]
    fn lag_and_interaction_columns_use_the_right_bars() {
        let start = bar("2024-01-01", Half::H1);
        let window = grid(start, start.offset(99));
        let inputs = dense_inputs(start, 100, 8);
        let dm = build_design(
            ChainId::Solana,
            StudyPanel::A,
            Variant::NonlinearBaseline,
            &inputs,
            &window,
            None,
        )
        .unwrap();
        let dep = inputs.panel_series(ChainId::Solana, PortfolioKind::All).unwrap();
        let sr_own = inputs.covariate("SR_Solana").unwrap();
        let eth_all = inputs.panel_series(ChainId::Ethereum, PortfolioKind::All).unwrap();
        let sr_eth = inputs.covariate("SR_Ethereum").unwrap();
        let lag_idx = dm.design.names.iter().position(|n| n == "lag_own").unwrap();
        let lag_sr_idx = dm.design.names.iter().position(|n| n == "lag_own_x_SR").unwrap();
        let r_eth_sr = dm.design.names.iter().position(|n| n == "rival_Ethereum_x_SR").unwrap();
        for (row, bar) in dm.bars.iter().enumerate() {
            let prev = bar.predecessor();
            assert_abs_diff_eq!(dm.design.cols[lag_idx][row], dep.get(prev).unwrap());
            assert_abs_diff_eq!(
                dm.design.cols[lag_sr_idx][row],
                dep.get(prev).unwrap() * sr_own.get(prev).unwrap(),
                epsilon = 1e-15
            );
            assert_abs_diff_eq!(
                dm.design.cols[r_eth_sr][row],
                eth_all.get(*bar).unwrap() * sr_eth.get(*bar).unwrap(),
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn listwise_deletion_drops_exactly_the_incomplete_rows() {
        let start = bar("2024-01-01", Half::H1);
        let window = grid(start, start.offset(99));
        let mut inputs = dense_inputs(start, 100, 9);
        // poke holes: one in a rival panel, one in a macro covariate
        let hole_a = start.offset(10);
        let hole_b = start.offset(20);
        inputs
            .panels
            .get_mut(&ChainId::Bsc)
            .unwrap()
            .get_mut(&PortfolioKind::All)
            .unwrap()
            .set(hole_a, None);
        inputs.covariates.get_mut("HIBOR").unwrap().set(hole_b, None);
        let dm = build_design(
            ChainId::Ethereum,
            StudyPanel::A,
            Variant::LinearMacro,
            &inputs,
            &window,
            None,
        )
        .unwrap();
        assert_eq!(dm.n_rows(), 98);
        assert!(!dm.bars.contains(&hole_a));
        assert!(!dm.bars.contains(&hole_b));
        // the lag column also drops the row *after* a dependent hole
        let mut inputs2 = dense_inputs(start, 100, 9);
        inputs2
            .panels
            .get_mut(&ChainId::Ethereum)
            .unwrap()
            .get_mut(&PortfolioKind::All)
            .unwrap()
            .set(hole_a, None);
        let dm2 = build_design(
            ChainId::Ethereum,
            StudyPanel::A,
            Variant::LinearBaseline,
            &inputs2,
            &window,
            None,
        )
        .unwrap();
        assert_eq!(dm2.n_rows(), 98);
        assert!(!dm2.bars.contains(&hole_a));
        assert!(!dm2.bars.contains(&hole_a.offset(1)));
    }

    #[test]
    fn zero_activity_innovations_zero_out_interaction_columns() {
        let start = bar("2024-01-01", Half::H1);
        let window = grid(start, start.offset(99));
        let mut inputs = dense_inputs(start, 100, 10);
        for chain in ChainId::ALL {
            let id = staking_innovation_id(chain);
            let zeroed = inputs.covariates[&id].map(|_| 0.0);
            inputs.covariates.insert(id.clone(), zeroed);
            let nid = native_return_id(chain);
            let zeroed = inputs.covariates[&nid].map(|_| 0.0);
            inputs.covariates.insert(nid, zeroed);
        }
        let dm = build_design(
            ChainId::Avalanche,
            StudyPanel::A,
            Variant::NonlinearBaseline,
            &inputs,
            &window,
            None,
        )
        .unwrap();
        for (j, name) in dm.design.names.iter().enumerate() {
            if name.ends_with("_x_SR") || name.ends_with("_x_native") {
                assert!(dm.design.cols[j].iter().all(|v| *v == 0.0), "{name}");
            }
        }
    }

    #[test]
    fn extreme_variant_requires_dummies() {
        let start = bar("2024-01-01", Half::H1);
        let window = grid(start, start.offset(99));
        let inputs = dense_inputs(start, 100, 11);
        let err = build_design(
            ChainId::Ethereum,
            StudyPanel::A,
            Variant::NonlinearExtreme,
            &inputs,
            &window,
            None,
        )
        .unwrap_err();
        assert!(matches!(err, StudyError::MissingDummies { .. }));
    }

    #[test]
    fn missing_series_is_reported_by_id() {
        let start = bar("2024-01-01", Half::H1);
        let window = grid(start, start.offset(99));
        let mut inputs = dense_inputs(start, 100, 12);
        inputs.covariates.remove("TREA");
        let err = build_design(
            ChainId::Ethereum,
            StudyPanel::A,
            Variant::LinearMacro,
            &inputs,
            &window,
            None,
        )
        .unwrap_err();
        match err {
            StudyError::MissingSeries { id } => assert_eq!(id, "TREA"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn short_window_is_rejected() {
        let start = bar("2024-01-01", Half::H1);
        let window = grid(start, start.offset(5));
        let inputs = dense_inputs(start, 6, 13);
        let err = build_design(
            ChainId::Ethereum,
            StudyPanel::A,
            Variant::LinearBaseline,
            &inputs,
            &window,
            None,
        )
        .unwrap_err();
        assert!(matches!(err, StudyError::WindowTooShort { .. }));
    }

    #[test]
    fn row_template_covers_every_equation() {
        let start = bar("2024-01-01", Half::H1);
        let window = grid(start, start.offset(199));
        let inputs = dense_inputs(start, 200, 14);
        let mut dummies = std::collections::BTreeMap::new();
        for chain in ChainId::ALL {
            let s = inputs.panel_series(chain, PortfolioKind::All).unwrap();
            dummies.insert(chain, extreme_dummies(s, 0.05).unwrap());
        }
        for variant in Variant::ALL {
            let template = row_template(variant);
            for chain in ChainId::ALL {
                let dm = build_design(
                    chain,
                    StudyPanel::A,
                    variant,
                    &inputs,
                    &window,
                    Some(&dummies),
                )
                .unwrap();
                for name in &dm.design.names {
                    assert!(template.contains(name), "{} not in template", name);
                }
            }
        }
    }

    #[test]
    fn variant_keys_roundtrip() {
        for variant in Variant::ALL {
            assert_eq!(variant.key().parse::<Variant>().unwrap(), variant);
        }
        assert!("linear".parse::<Variant>().is_err());
        for panel in StudyPanel::ALL {
            assert_eq!(panel.letter().parse::<StudyPanel>().unwrap(), panel);
        }
    }
}
