//! Named model constructions: the two-layer motivating example, the
//! equi-correlation design, generalized path cancellation, the collider pair
//! with vanishing KL divergence, and the independent design.

use nalgebra::DVector;

use super::{attach_target, sem_covariance, Dag, LinearModel, SemSpec};
use crate::covkit::{IndexSet, SymMatrix};
use crate::error::{Error, Result};

/// Roots `0..s` with unit noise; every node in `s..d` has all roots as
/// parents with weight `beta_max`; `β = beta_min` on the roots and `σ² = 1`.
pub fn make_motivating_example(d: usize, s: usize, beta_min: f64, beta_max: f64) -> Result<(SemSpec, LinearModel)> {
    if s == 0 || d < 2 * s {
        return Err(Error::InvalidArgument(format!("need 1 <= s and d >= 2s, got d = {d}, s = {s}")));
    }
    let edges: Vec<(usize, usize, f64)> = (s..d).flat_map(|k| (0..s).map(move |j| (j, k, beta_max))).collect();
    let spec = SemSpec::from_edges(d, &edges, vec![1.0; d])?;
    let model = attach_target(&spec, &IndexSet::range(0, s), &vec![beta_min; s], 1.0)?;
    Ok((spec, model))
}

/// `Σ_ω = ω I + (1 − ω) 1 1ᵀ`.
pub fn make_equicorrelation(d: usize, omega: f64) -> Result<SymMatrix> {
    if !(omega > 0.0 && omega <= 1.0) {
        return Err(Error::InvalidArgument(format!("omega must lie in (0, 1], got {omega}")));
    }
    Ok(SymMatrix::from_fn(d, |i, j| if i == j { 1.0 } else { 1.0 - omega }))
}

/// LDL pivots of `Σ_ω` from `A₁ = 0`, `A_{k+1} = A_k + ((1−ω) − A_k)² / (1 − A_k)`, `D_k = 1 − A_k`.
pub fn ldl_min_diag_recurrence(omega: f64, d: usize) -> Vec<f64> {
    let rho = 1.0 - omega;
    let mut a = 0.0_f64;
    let mut out = Vec::with_capacity(d);
    for _ in 0..d {
        out.push(1.0 - a);
        a += (rho - a) * (rho - a) / (1.0 - a);
    }
    out
}

/// Generalized path cancellation instance with its displayed alternative.
#[derive(Debug, Clone)]
pub struct GpcExample {
    pub spec: SemSpec,
    pub model: LinearModel,
    pub alt_support: IndexSet,
    /// Feasible coefficients on `alt_support` that nearly reproduce `X_{S*}ᵀβ`.
    pub alt_alpha: DVector<f64>,
}

/// Node `s` has parents `0..s` with weight `b` and noise `σ_min²`; `a_choice`
/// (size `s/2 − 1`, indices `> s`) holds isolated roots. The support is
/// `{0..s/2} ∪ {s} ∪ A` with `β_k = −β_min` on the first half,
/// `β_s = 100β_min + β_min/b` and `β_A = β_min`; the alternative swaps in the
/// second half of the roots. All noise variances equal `σ_min²`, `σ² = 1`.
pub fn make_gpc_example(s: usize, b: f64, beta_min: f64, sigma_min: f64, a_choice: &IndexSet) -> Result<GpcExample> {
    if s < 2 || s % 2 != 0 {
        return Err(Error::InvalidArgument(format!("s must be even and positive, got {s}")));
    }
    if b == 0.0 || !(beta_min > 0.0) || !(sigma_min > 0.0) {
        return Err(Error::InvalidArgument("b, beta_min and sigma_min must be nonzero".into()));
    }
    if a_choice.len() != s / 2 - 1 || a_choice.iter().any(|a| a <= s) {
        return Err(Error::InvalidArgument("a_choice must hold s/2 - 1 indices above s".into()));
    }
    let d = a_choice.max().map_or(s + 1, |m| m + 1);
    let collider = s;
    let edges: Vec<(usize, usize, f64)> = (0..s).map(|j| (j, collider, b)).collect();
    let spec = SemSpec::from_edges(d, &edges, vec![sigma_min * sigma_min; d])?.with_noise_floor(sigma_min * sigma_min)?;

    let half = s / 2;
    let support = IndexSet::range(0, half).union(&IndexSet::from([collider])).union(a_choice);
    let beta_values: Vec<f64> = support
        .iter()
        .map(|j| match j {
            j if j < half => -beta_min,
            j if j == collider => 100.0 * beta_min + beta_min / b,
            _ => beta_min,
        })
        .collect();
    let model = attach_target(&spec, &support, &beta_values, 1.0)?;

    let alt_support = IndexSet::range(half, s).union(&IndexSet::from([collider])).union(a_choice);
    let mut alt_alpha = DVector::zeros(d);
    for j in alt_support.iter() {
        alt_alpha[j] = if j == collider { 100.0 * beta_min } else { beta_min };
    }
    Ok(GpcExample { spec, model, alt_support, alt_alpha })
}

/// Two models on a shared covariance whose supports differ in two parents
/// `S`, `T` of the first collider `W`.
///
/// Edges `S → W` and `T → W` get weight `−1/δ`, every other edge `1/2`, all
/// noise variances are 1. Model one has `β_S = 1`, `β_W = 1 + δ`; model two
/// has `α_T = −1`, `α_W = 1`, so that `X_Sβ_S − X_Tα_T + δ X_W` cancels the
/// `S` and `T` paths and the KL divergence is `O(δ²)`.
pub fn make_indistinguishable_pair(dag: &Dag, delta: f64) -> Result<(LinearModel, LinearModel)> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument("delta must be positive".into()));
    }
    let w = (0..dag.d()).find(|&k| dag.parents(k).len() >= 2).ok_or(Error::NoCollider)?;
    let parents = dag.parents(w);
    let (s, t) = (parents.as_slice()[0], parents.as_slice()[1]);
    let edges: Vec<(usize, usize, f64)> = dag
        .edges()
        .iter()
        .map(|&(j, k)| (j, k, if k == w && (j == s || j == t) { -1.0 / delta } else { 0.5 }))
        .collect();
    let spec = SemSpec::from_edges(dag.d(), &edges, vec![1.0; dag.d()])?;
    let first = attach_target(&spec, &IndexSet::from([s, w]), &[1.0, 1.0 + delta], 1.0)?;
    let second = attach_target(&spec, &IndexSet::from([t, w]), &[-1.0, 1.0], 1.0)?;
    Ok((first, second))
}

/// Empty graph with unit noise on `0..s` and `σ_max²` elsewhere; `β = β_min` on `0..s`.
pub fn make_independent_design(d: usize, s: usize, sigma_max: f64, beta_min: f64) -> Result<(SemSpec, LinearModel)> {
    if s == 0 || s > d || !(sigma_max > 0.0) {
        return Err(Error::InvalidArgument("need 1 <= s <= d and sigma_max > 0".into()));
    }
    let noise: Vec<f64> = (0..d).map(|j| if j < s { 1.0 } else { sigma_max * sigma_max }).collect();
    let spec = SemSpec::from_edges(d, &[], noise)?;
    let model = attach_target(&spec, &IndexSet::range(0, s), &vec![beta_min; s], 1.0)?;
    debug_assert_eq!(model.sigma(), &sem_covariance(&spec));
    Ok((spec, model))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn motivating_blocks() {
        let (_, m) = make_motivating_example(10, 3, 0.1, 5.0).unwrap();
        let sigma = m.sigma();
        for i in 0..10 {
            for j in 0..10 {
                let expected = match (i < 3, j < 3) {
                    (true, true) => f64::from(u8::from(i == j)),
                    (true, false) | (false, true) => 5.0,
                    (false, false) => f64::from(u8::from(i == j)) + 75.0,
                };
                assert!((sigma.get(i, j) - expected).abs() < 1e-12, "({i},{j})");
            }
        }
    }

    #[test]
    fn motivating_single_pair_is_chain() {
        let (spec, m) = make_motivating_example(2, 1, 0.1, 3.0).unwrap();
        assert_eq!(spec.dag().edges(), &[(0, 1)]);
        assert_eq!(spec.coeff(0, 1), Some(3.0));
        assert_eq!(m.support(), &IndexSet::from([0]));
    }

    #[test]
    fn equicorrelation_entries() {
        let sigma = make_equicorrelation(4, 0.3).unwrap();
        assert_eq!(sigma.get(2, 2), 1.0);
        assert!((sigma.get(0, 3) - 0.7).abs() < 1e-15);
        assert_eq!(make_equicorrelation(3, 1.0).unwrap(), SymMatrix::identity(3));
        assert!(make_equicorrelation(3, 0.0).is_err());
    }

    #[test]
    fn recurrence_first_steps() {
        let d = ldl_min_diag_recurrence(0.5, 3);
        assert_eq!(d[0], 1.0);
        assert!((d[1] - 0.75).abs() < 1e-15);
        assert!(d.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn gpc_alternative_cancels() {
        let ex = make_gpc_example(4, 2.0, 0.1, 0.5, &IndexSet::from([5])).unwrap();
        assert_eq!(ex.model.support(), &IndexSet::from([0, 1, 4, 5]));
        assert_eq!(ex.alt_support, IndexSet::from([2, 3, 4, 5]));
        let diff = ex.model.beta() - &ex.alt_alpha;
        let var = ex.model.sigma().quad_form(&diff);
        assert!((var - 0.01 * 0.25 / 4.0).abs() < 1e-12);
    }

    #[test]
    fn collider_required() {
        let chain = Dag::new(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(make_indistinguishable_pair(&chain, 0.1).unwrap_err(), Error::NoCollider);
    }

    #[test]
    fn pair_supports_differ_in_two_coordinates() {
        let dag = Dag::new(4, [(0, 2), (1, 2), (2, 3)]).unwrap();
        let (p, q) = make_indistinguishable_pair(&dag, 0.01).unwrap();
        assert_eq!(p.support().symmetric_difference(q.support()), IndexSet::from([0, 1]));
        assert_eq!(p.sigma(), q.sigma());
    }
}
