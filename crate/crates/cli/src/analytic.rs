//! Population-level tables: signal curves on the two-layer example and the
//! named constructions. No sampling is involved.

use klbss::covkit::ldl_decompose;
use klbss::semgen::{
    ldl_min_diag_recurrence, make_equicorrelation, make_gpc_example, make_indistinguishable_pair,
    make_motivating_example,
};
use klbss::signals::{delta1, delta2, kl_linear_models, signal_report};
use klbss::{Dag, IndexSet, ThetaSpec};

/// Signals of the alternative that swaps `r` roots for `r` children.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalRow {
    pub r: usize,
    pub delta1: f64,
    pub delta2: f64,
    pub delta2_tilde: f64,
}

/// `S* = 0..s` against `T_r = (r..s) ∪ (s..s+r)` on the two-layer example with `d = 2s`.
pub fn run_signal_curves(s: usize, beta_min: f64, beta_max: f64) -> klbss::Result<Vec<SignalRow>> {
    let d = 2 * s;
    let (_, model) = make_motivating_example(d, s, beta_min, beta_max)?;
    let theta = ThetaSpec::exact(d, s, beta_min);
    let truth = IndexSet::range(0, s);
    (1..=s)
        .map(|r| {
            let alt = IndexSet::range(r, s).union(&IndexSet::range(s, s + r));
            let rep = signal_report(&model, &truth, &alt, &theta)?;
            Ok(SignalRow { r, delta1: rep.delta1, delta2: rep.delta2, delta2_tilde: rep.delta2_tilde })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Construction {
    /// Minimum LDL pivot of the equi-correlation matrix.
    Prop43,
    /// KL divergence of the collider pair as `δ → 0`.
    Thm51,
    /// Signal of the path-cancellation example against its bound.
    GpcBound,
}

impl Construction {
    pub fn name(&self) -> &'static str {
        match self {
            Construction::Prop43 => "prop43",
            Construction::Thm51 => "thm51",
            Construction::GpcBound => "gpc_bound",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "prop43" => Construction::Prop43,
            "thm51" => Construction::Thm51,
            "gpc_bound" => Construction::GpcBound,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstructionParams {
    pub omega: f64,
    pub d_grid: Vec<usize>,
    /// Pivots are also taken from an explicit factorization up to this size.
    pub factor_max_d: usize,
    pub deltas: Vec<f64>,
    pub b_grid: Vec<f64>,
    pub s: usize,
    pub beta_min: f64,
    pub sigma_min: f64,
}

impl Default for ConstructionParams {
    fn default() -> Self {
        Self {
            omega: 0.3,
            d_grid: vec![10, 50, 100, 500, 1000, 2000],
            factor_max_d: 50,
            deltas: vec![1e-1, 1e-2, 1e-3, 1e-4],
            b_grid: vec![1.0, 2.0, 4.0],
            s: 4,
            beta_min: 0.1,
            sigma_min: 0.5,
        }
    }
}

/// A headed numeric table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| *h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

/// `prop43 → (d, min_d, omega, gap)`, `thm51 → (delta, kl, kl_over_delta_sq)`,
/// `gpc_bound → (b, signal, bound)`.
pub fn run_constructions(which: Construction, p: &ConstructionParams) -> klbss::Result<Table> {
    match which {
        Construction::Prop43 => {
            let rows = p
                .d_grid
                .iter()
                .map(|&d| {
                    let min_d = if d <= p.factor_max_d {
                        let (_, diag) = ldl_decompose(&make_equicorrelation(d, p.omega)?)?;
                        diag.into_iter().fold(f64::INFINITY, f64::min)
                    } else {
                        ldl_min_diag_recurrence(p.omega, d).into_iter().fold(f64::INFINITY, f64::min)
                    };
                    Ok(vec![d as f64, min_d, p.omega, (min_d - p.omega).abs()])
                })
                .collect::<klbss::Result<_>>()?;
            Ok(Table { header: vec!["d", "min_d", "omega", "gap"], rows })
        }
        Construction::Thm51 => {
            let dag = Dag::new(3, [(0, 2), (1, 2)])?;
            let rows = p
                .deltas
                .iter()
                .map(|&delta| {
                    let (m1, m2) = make_indistinguishable_pair(&dag, delta)?;
                    let kl = kl_linear_models(m1.beta(), m2.beta(), m1.sigma(), m1.noise_var())?;
                    Ok(vec![delta, kl, kl / (delta * delta)])
                })
                .collect::<klbss::Result<_>>()?;
            Ok(Table { header: vec!["delta", "kl", "kl_over_delta_sq"], rows })
        }
        Construction::GpcBound => {
            let s = p.s;
            let a_choice = IndexSet::range(s + 1, s + s / 2);
            let rows = p
                .b_grid
                .iter()
                .map(|&b| {
                    let ex = make_gpc_example(s, b, p.beta_min, p.sigma_min, &a_choice)?;
                    let theta = ThetaSpec::exact(ex.model.d(), ex.model.support().len(), p.beta_min);
                    let truth = ex.model.support();
                    let d1 = delta1(&ex.model, truth, &ex.alt_support)?;
                    let d2 = delta2(&ex.model, truth, &ex.alt_support, &theta)?.value;
                    let bound = p.beta_min.powi(2) * p.sigma_min.powi(2) / (b * b * ex.model.noise_var());
                    Ok(vec![b, d1.max(d2), bound])
                })
                .collect::<klbss::Result<_>>()?;
            Ok(Table { header: vec!["b", "signal", "bound"], rows })
        }
    }
}
