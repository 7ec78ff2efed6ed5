//! Random SEM generators: Erdős–Rényi, Barabási–Albert and two-layer bipartite.

use std::collections::BTreeMap;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng as _;

use super::{Dag, SemSpec};
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, Rng};

const MAX_SPLIT_ATTEMPTS: usize = 100;

/// Edge-weight and noise ranges shared by all generators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenParams {
    /// Magnitudes are `Uniform(b_min, b_max)` with a Rademacher sign.
    pub weight_range: (f64, f64),
    /// Noise standard deviations are `Uniform(σ_lo, σ_hi)`, then squared.
    pub noise_range: (f64, f64),
    /// Draw weight signs; disabled for the all-positive scenario.
    pub signed_weights: bool,
}

impl Default for GenParams {
    fn default() -> Self {
        Self { weight_range: (0.1, 5.0), noise_range: (0.5, 2.0), signed_weights: true }
    }
}

impl GenParams {
    fn validate(&self) -> Result<()> {
        let (b_lo, b_hi) = self.weight_range;
        let (s_lo, s_hi) = self.noise_range;
        if !(0.0 < b_lo && b_lo <= b_hi) || !(0.0 < s_lo && s_lo <= s_hi) {
            return Err(Error::InvalidArgument("ranges must be positive and ordered".into()));
        }
        Ok(())
    }

    fn weight(&self, rng: &mut Rng) -> f64 {
        let magnitude = rng.random_range(self.weight_range.0..=self.weight_range.1);
        if self.signed_weights && rng.random_bool(0.5) {
            -magnitude
        } else {
            magnitude
        }
    }

    fn noise_vars(&self, d: usize, rng: &mut Rng) -> Vec<f64> {
        (0..d)
            .map(|_| {
                let sd = rng.random_range(self.noise_range.0..=self.noise_range.1);
                sd * sd
            })
            .collect()
    }

    /// Weights for the sorted edge list, then the noise variances.
    fn build(&self, dag: Dag, rng: &mut Rng) -> Result<SemSpec> {
        let coeffs: BTreeMap<_, _> = dag.edges().iter().map(|&e| (e, self.weight(rng))).collect();
        let noise = self.noise_vars(dag.d(), rng);
        SemSpec::new(dag, coeffs, noise)
    }
}

/// Uniform permutation of `0..d` as `perm[old] = new`.
pub fn random_permutation(d: usize, rng: &mut Rng) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..d).collect();
    perm.shuffle(rng);
    perm
}

/// Erdős–Rényi DAG with `k·d` expected edges under a random topological order.
pub fn gen_er(d: usize, avg_edges_per_node: usize, params: &GenParams, seed: u64) -> Result<SemSpec> {
    params.validate()?;
    let pairs = d * d.saturating_sub(1) / 2;
    let p = if pairs == 0 { 0.0 } else { (avg_edges_per_node as f64 * d as f64 / pairs as f64).min(1.0) };
    let mut rng = rng_from_seed(seed);
    let order = random_permutation(d, &mut rng);
    let mut edges = Vec::new();
    for a in 0..d {
        for b in (a + 1)..d {
            if rng.random_bool(p) {
                edges.push((order[a], order[b]));
            }
        }
    }
    params.build(Dag::new(d, edges)?, &mut rng)
}

/// Barabási–Albert graph grown from the single edge `0 → 1`; each new node
/// attaches to `min(attach, existing)` distinct earlier nodes with probability
/// proportional to degree. Edges point from older to newer nodes.
pub fn gen_sf(d: usize, attach: usize, params: &GenParams, seed: u64) -> Result<SemSpec> {
    params.validate()?;
    if attach == 0 {
        return Err(Error::InvalidArgument("attach must be at least 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut edges = Vec::new();
    // One entry per edge endpoint, so uniform draws are degree-proportional.
    let mut endpoints: Vec<usize> = Vec::new();
    if d >= 2 {
        edges.push((0, 1));
        endpoints.extend([0, 1]);
    }
    for v in 2..d {
        let m = attach.min(v);
        let mut targets: Vec<usize> = Vec::with_capacity(m);
        while targets.len() < m {
            let &u = endpoints.choose(&mut rng).expect("nonempty after seeding");
            if !targets.contains(&u) {
                targets.push(u);
            }
        }
        targets.sort_unstable();
        for u in targets {
            edges.push((u, v));
            endpoints.extend([u, v]);
        }
    }
    params.build(Dag::new(d, edges)?, &mut rng)
}

/// Two-layer DAG: every edge goes from `V1` to `V2`, each `V2` node has
/// between 1 and `min(s, |V1|)` parents, then nodes are randomly relabeled.
pub fn gen_bipartite(d: usize, s: usize, params: &GenParams, seed: u64) -> Result<SemSpec> {
    params.validate()?;
    if d < 2 || s == 0 || 2 * s > d {
        return Err(Error::InvalidArgument(format!("need d >= 2 and 1 <= s <= d/2, got d = {d}, s = {s}")));
    }
    let mut rng = rng_from_seed(seed);
    let mut split = None;
    for _ in 0..MAX_SPLIT_ATTEMPTS {
        let in_v1: Vec<bool> = (0..d).map(|_| rng.random_bool(0.5)).collect();
        let v1: Vec<usize> = (0..d).filter(|&i| in_v1[i]).collect();
        let v2: Vec<usize> = (0..d).filter(|&i| !in_v1[i]).collect();
        if !v1.is_empty() && !v2.is_empty() {
            split = Some((v1, v2));
            break;
        }
    }
    let (v1, v2) = split.ok_or(Error::DegenerateSplit { attempts: MAX_SPLIT_ATTEMPTS })?;
    let s_tilde = s.min(v1.len());
    let mut edges = Vec::new();
    for &k in &v2 {
        let count = rng.random_range(1..=s_tilde);
        for &j in v1.choose_multiple(&mut rng, count) {
            edges.push((j, k));
        }
    }
    let dag = Dag::new(d, edges)?;
    let spec = params.build(dag, &mut rng)?;
    let perm = random_permutation(d, &mut rng);
    Ok(spec.relabel(&perm))
}
