//! Population identification signals, design diagnostics and KL divergences.
//!
//! For a true support `S` and an alternative `T`, with `S' = S\T`,
//! `T' = T\S`, `W = S∩T`:
//!
//! - `Δ₁ = β_{S'}ᵀ Σ_{S'|T} β_{S'} / σ²`
//! - `α_β = Σ_{T'|W}⁻¹ Σ_{T'S'|W} β_{S'}`
//! - `Δ₂ = min_{α∈Θ_{T'}} (α_β − α)ᵀ Σ_{T'|W} (α_β − α) / σ²`
//! - `Δ̃₂ = min_{α∈Θ_T} (α̃_β − α)ᵀ Σ_{TT} (α̃_β − α) / σ²` with `α̃_β = Σ_{TT}⁻¹ Σ_{TS} β_S`
//!
//! Everything is computed on exact covariances.

use itertools::Itertools;
use nalgebra::DVector;

use crate::covkit::{
    conditional_covariance, conditional_cross, min_eigenvalue, subvector, IndexSet, Ldl, SymMatrix,
};
use crate::error::{Error, Result};
use crate::semgen::LinearModel;
use crate::theta::{population_project, ThetaSpec};

/// Upper bound on enumerated alternatives.
pub const MAX_SIGNAL_CANDIDATES: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SignalReport {
    pub pair: (IndexSet, IndexSet),
    pub delta1: f64,
    pub delta2: f64,
    pub delta2_tilde: f64,
    /// Population partial regression coefficients on `T\S`.
    pub alpha_beta: DVector<f64>,
    /// Minimizer of the `Δ₂` problem.
    pub alpha_star: DVector<f64>,
}

impl SignalReport {
    pub fn max_delta(&self) -> f64 {
        self.delta1.max(self.delta2)
    }

    /// `S=i|j|k;T=...`.
    pub fn pair_label(&self) -> String {
        format!("S={};T={}", self.pair.0, self.pair.1)
    }
}

/// Value and minimizer of the `Δ₂` problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Delta2 {
    pub value: f64,
    pub alpha_beta: DVector<f64>,
    pub alpha_star: DVector<f64>,
}

fn beta_on(model: &LinearModel, s: &IndexSet) -> DVector<f64> {
    subvector(model.beta(), s.as_slice())
}

fn check_sets(model: &LinearModel, s: &IndexSet, t: &IndexSet) -> Result<()> {
    s.check_bound(model.d())?;
    t.check_bound(model.d())
}

pub fn delta1(model: &LinearModel, s: &IndexSet, t: &IndexSet) -> Result<f64> {
    check_sets(model, s, t)?;
    let s_only = s.difference(t);
    if s_only.is_empty() {
        return Ok(0.0);
    }
    let cond = conditional_covariance(model.sigma(), &s_only, t)?;
    Ok((cond.quad_form(&beta_on(model, &s_only)) / model.noise_var()).max(0.0))
}

pub fn delta2(model: &LinearModel, s: &IndexSet, t: &IndexSet, theta: &ThetaSpec) -> Result<Delta2> {
    check_sets(model, s, t)?;
    theta.validate()?;
    let (s_only, t_only, w) = (s.difference(t), t.difference(s), s.intersection(t));
    if t_only.is_empty() {
        return Ok(Delta2 { value: 0.0, alpha_beta: DVector::zeros(0), alpha_star: DVector::zeros(0) });
    }
    let m = conditional_covariance(model.sigma(), &t_only, &w)?;
    let factor = Ldl::factor(m.matrix()).ok_or(Error::SingularConditioning)?;
    let cross = conditional_cross(model.sigma(), &t_only, &s_only, &w)?;
    let alpha_beta = factor.solve(&(cross * beta_on(model, &s_only)));
    let sol = population_project(&alpha_beta, &m, theta)?;
    Ok(Delta2 { value: sol.value / model.noise_var(), alpha_beta, alpha_star: sol.minimizer })
}

pub fn delta2_tilde(model: &LinearModel, s: &IndexSet, t: &IndexSet, theta: &ThetaSpec) -> Result<f64> {
    check_sets(model, s, t)?;
    theta.validate()?;
    if t.is_empty() {
        return Ok(0.0);
    }
    let m = model.sigma().principal(t);
    let factor = Ldl::factor(m.matrix()).ok_or(Error::SingularConditioning)?;
    let alpha_tilde = factor.solve(&(model.sigma().block(t, s) * beta_on(model, s)));
    Ok(population_project(&alpha_tilde, &m, theta)?.value / model.noise_var())
}

pub fn signal_report(model: &LinearModel, s: &IndexSet, t: &IndexSet, theta: &ThetaSpec) -> Result<SignalReport> {
    let d2 = delta2(model, s, t, theta)?;
    Ok(SignalReport {
        pair: (s.clone(), t.clone()),
        delta1: delta1(model, s, t)?,
        delta2: d2.value,
        delta2_tilde: delta2_tilde(model, s, t, theta)?,
        alpha_beta: d2.alpha_beta,
        alpha_star: d2.alpha_star,
    })
}

/// Alternatives over which global quantities are minimized.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CandidateFamily {
    /// All supports of the true size.
    ExactS,
    /// All supports of size at most `sbar` that miss part of the truth.
    UpToSbar(usize),
    /// Supports of the true size inside one layer.
    LayerRestricted { v1: IndexSet, v2: IndexSet },
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Alternatives to `truth`, lexicographic within each size, sizes ascending.
/// Sets with `truth ⊆ T` are skipped because they lose no true variable.
pub fn enumerate_alternatives(d: usize, truth: &IndexSet, family: &CandidateFamily) -> Result<Vec<IndexSet>> {
    let s = truth.len();
    let sizes: Vec<usize> = match family {
        CandidateFamily::ExactS | CandidateFamily::LayerRestricted { .. } => vec![s],
        CandidateFamily::UpToSbar(sbar) => (0..=*sbar).collect(),
    };
    let count: u128 = sizes.iter().map(|&k| binomial(d, k)).sum();
    if count > MAX_SIGNAL_CANDIDATES {
        return Err(Error::TooManyCandidates { count, limit: MAX_SIGNAL_CANDIDATES });
    }
    let in_layer = |t: &IndexSet| match family {
        CandidateFamily::LayerRestricted { v1, v2 } => t.is_subset(v1) || t.is_subset(v2),
        _ => true,
    };
    Ok(sizes
        .into_iter()
        .flat_map(|k| (0..d).combinations(k).map(IndexSet::new))
        .filter(|t| !truth.is_subset(t) && in_layer(t))
        .collect())
}

fn argmin_over<F>(alternatives: Vec<IndexSet>, mut value: F) -> Result<(f64, IndexSet)>
where
    F: FnMut(&IndexSet) -> Result<f64>,
{
    let mut best: Option<(f64, IndexSet)> = None;
    for t in alternatives {
        let v = value(&t)?;
        let replace = match &best {
            None => true,
            Some((bv, bt)) => v < *bv || (v == *bv && t < *bt),
        };
        if replace {
            best = Some((v, t));
        }
    }
    best.ok_or_else(|| Error::InvalidArgument("candidate family has no alternative".into()))
}

/// `min_T (Δ₁ ∨ Δ₂) / |S*\T|` with its minimizing `T`; ties go to the smallest `T`.
pub fn global_signal(model: &LinearModel, theta: &ThetaSpec, family: &CandidateFamily) -> Result<(f64, IndexSet)> {
    let truth = model.support();
    let alternatives = enumerate_alternatives(model.d(), truth, family)?;
    argmin_over(alternatives, |t| {
        let d1 = delta1(model, truth, t)?;
        let d2 = delta2(model, truth, t, theta)?.value;
        Ok(d1.max(d2) / truth.difference(t).len() as f64)
    })
}

/// `min_T Δ₁ / |S*\T|`.
pub fn global_signal_bss(model: &LinearModel, family: &CandidateFamily) -> Result<f64> {
    let truth = model.support();
    let alternatives = enumerate_alternatives(model.d(), truth, family)?;
    argmin_over(alternatives, |t| Ok(delta1(model, truth, t)? / truth.difference(t).len() as f64)).map(|(v, _)| v)
}

/// Worst-case proportionality constant of the per-pair signal.
#[derive(Debug, Clone, PartialEq)]
pub struct ProportionalReport {
    /// `max_T (Δ₁∨Δ₂) / (|S*\T| · global_signal)`, at least 1.
    pub ratio: f64,
    pub worst: IndexSet,
    pub global_signal: f64,
}

pub fn proportional_property_ratio(model: &LinearModel, theta: &ThetaSpec, family: &CandidateFamily) -> Result<ProportionalReport> {
    let truth = model.support();
    let alternatives = enumerate_alternatives(model.d(), truth, family)?;
    let mut per_unit = Vec::with_capacity(alternatives.len());
    for t in &alternatives {
        let d1 = delta1(model, truth, t)?;
        let d2 = delta2(model, truth, t, theta)?.value;
        per_unit.push(d1.max(d2) / truth.difference(t).len() as f64);
    }
    let global = per_unit.iter().copied().fold(f64::INFINITY, f64::min);
    if !global.is_finite() || global <= 0.0 {
        return Err(Error::InvalidArgument("global signal is zero or undefined".into()));
    }
    let (pos, &worst) = per_unit
        .iter()
        .enumerate()
        .fold((0, &f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    Ok(ProportionalReport { ratio: worst / global, worst: alternatives[pos].clone(), global_signal: global })
}

/// `min_T λ_min(Σ_{S*\T|T})` over supports `T ≠ S*` of size `s`.
pub fn omega_param(model: &LinearModel, s: usize) -> Result<f64> {
    let truth = model.support();
    let count = binomial(model.d(), s);
    if count > MAX_SIGNAL_CANDIDATES {
        return Err(Error::TooManyCandidates { count, limit: MAX_SIGNAL_CANDIDATES });
    }
    let mut best = f64::INFINITY;
    for t in (0..model.d()).combinations(s).map(IndexSet::new) {
        if truth.is_subset(&t) {
            continue;
        }
        let cond = conditional_covariance(model.sigma(), &truth.difference(&t), &t)?;
        best = best.min(min_eigenvalue(&cond));
    }
    Ok(best)
}

/// `max_{j∉S} |Σ̃_{jS} Σ̃_{SS}⁻¹ sgn(β_S)|` on the correlation matrix.
pub fn irrepresentability_gamma(model: &LinearModel) -> Result<f64> {
    let corr = model.sigma().correlation()?;
    let s = model.support();
    if s.is_empty() {
        return Ok(0.0);
    }
    let rest = IndexSet::range(0, model.d()).difference(s);
    let signs = DVector::from_fn(s.len(), |i, _| model.beta()[s.as_slice()[i]].signum());
    let factor = Ldl::factor(corr.principal(s).matrix()).ok_or(Error::SingularConditioning)?;
    let v = factor.solve(&signs);
    let scores = corr.block(&rest, s) * v;
    Ok(scores.amax())
}

/// `max_{j≠k} |Σ̃_{jk}|`.
pub fn mutual_incoherence_mu(model: &LinearModel) -> Result<f64> {
    let corr = model.sigma().correlation()?;
    let d = corr.dim();
    Ok((0..d)
        .flat_map(|i| ((i + 1)..d).map(move |j| (i, j)))
        .map(|(i, j)| corr.get(i, j).abs())
        .fold(0.0, f64::max))
}

/// `(β − α)ᵀ Σ (β − α) / (2σ²)`.
pub fn kl_linear_models(beta: &DVector<f64>, alpha: &DVector<f64>, sigma: &SymMatrix, noise_var: f64) -> Result<f64> {
    if beta.len() != sigma.dim() || alpha.len() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: sigma.dim(), got: beta.len().max(alpha.len()) });
    }
    if !(noise_var > 0.0) {
        return Err(Error::InvalidArgument("noise variance must be positive".into()));
    }
    Ok(sigma.quad_form(&(beta - alpha)) / (2.0 * noise_var))
}

/// Additive parts of `2·KL = (β − α)ᵀΣ(β − α)/σ²` for models supported on
/// `S = supp β` and `T = supp α`.
///
/// `delta1 + delta2_tilde` equals `2·KL`; `delta2 + delta3` splits
/// `delta2_tilde` into the `T\S` part and the remainder on `W = S∩T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KlDecomposition {
    pub delta1: f64,
    pub delta2_tilde: f64,
    pub delta2: f64,
    pub delta3: f64,
}

impl KlDecomposition {
    pub fn two_term_sum(&self) -> f64 {
        self.delta1 + self.delta2_tilde
    }

    pub fn three_term_sum(&self) -> f64 {
        self.delta1 + self.delta2 + self.delta3
    }
}

pub fn kl_decomposition(beta: &DVector<f64>, alpha: &DVector<f64>, sigma: &SymMatrix, noise_var: f64) -> Result<KlDecomposition> {
    let d = sigma.dim();
    if beta.len() != d || alpha.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: beta.len().max(alpha.len()) });
    }
    let s: IndexSet = (0..d).filter(|&j| beta[j] != 0.0).collect();
    let t: IndexSet = (0..d).filter(|&j| alpha[j] != 0.0).collect();
    let (s_only, t_only, w) = (s.difference(&t), t.difference(&s), s.intersection(&t));

    let beta_s_only = subvector(beta, s_only.as_slice());
    let delta1 = if s_only.is_empty() { 0.0 } else { conditional_covariance(sigma, &s_only, &t)?.quad_form(&beta_s_only) };

    let delta2_tilde = if t.is_empty() {
        0.0
    } else {
        let tt = sigma.principal(&t);
        let f = Ldl::factor(tt.matrix()).ok_or(Error::SingularConditioning)?;
        let alpha_tilde = f.solve(&(sigma.block(&t, &s) * subvector(beta, s.as_slice())));
        tt.quad_form(&(alpha_tilde - subvector(alpha, t.as_slice())))
    };

    let alpha_t_only = subvector(alpha, t_only.as_slice());
    let delta2 = if t_only.is_empty() {
        0.0
    } else {
        let m = conditional_covariance(sigma, &t_only, &w)?;
        let f = Ldl::factor(m.matrix()).ok_or(Error::SingularConditioning)?;
        let alpha_beta = f.solve(&(conditional_cross(sigma, &t_only, &s_only, &w)? * &beta_s_only));
        m.quad_form(&(alpha_beta - &alpha_t_only))
    };

    let delta3 = if w.is_empty() {
        0.0
    } else {
        let ww = sigma.principal(&w);
        let f = Ldl::factor(ww.matrix()).ok_or(Error::SingularConditioning)?;
        let pull = sigma.block(&w, &s_only) * &beta_s_only - sigma.block(&w, &t_only) * &alpha_t_only;
        let v = subvector(beta, w.as_slice()) - subvector(alpha, w.as_slice()) + f.solve(&pull);
        ww.quad_form(&v)
    };

    Ok(KlDecomposition {
        delta1: delta1 / noise_var,
        delta2_tilde: delta2_tilde / noise_var,
        delta2: delta2 / noise_var,
        delta3: delta3 / noise_var,
    })
}
