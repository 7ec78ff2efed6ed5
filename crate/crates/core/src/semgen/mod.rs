//! DAGs, linear SEMs and the Gaussian linear models they induce.
//!
//! A [`SemSpec`] generates `X_k = Σ_{j∈pa(k)} b_jk X_j + ε_k` with
//! `ε_k ~ N(0, σ_k²)`; attaching a target `Y = Xᵀβ + ε` gives a
//! [`LinearModel`], from which [`sample_dataset`] draws i.i.d. rows.

mod classes;
mod constructions;
mod generators;
mod text;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use crate::covkit::{cholesky_lower, IndexSet, SymMatrix};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

pub use classes::{bipartite_layers, check_condition_53, class_membership, ClassKind, Membership, ModelClass};
pub use constructions::{
    ldl_min_diag_recurrence, make_equicorrelation, make_gpc_example, make_indistinguishable_pair,
    make_independent_design, make_motivating_example, GpcExample,
};
pub use generators::{gen_bipartite, gen_er, gen_sf, random_permutation, GenParams};
pub use text::{parse_model_text, write_model_text};

/// Directed acyclic graph on nodes `0..d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    d: usize,
    /// Sorted `(from, to)` pairs.
    edges: Vec<(usize, usize)>,
    topological_order: Vec<usize>,
}

impl Dag {
    /// Rejects self-loops, out-of-range nodes and cycles; duplicate edges are merged.
    pub fn new(d: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut edges: Vec<(usize, usize)> = edges.into_iter().collect();
        edges.sort_unstable();
        edges.dedup();
        for &(j, k) in &edges {
            if j >= d || k >= d || j == k {
                return Err(Error::InvalidArgument(format!("invalid edge {j} -> {k} for d = {d}")));
            }
        }
        let topological_order = kahn_order(d, &edges)
            .ok_or_else(|| Error::InvalidArgument("graph has a cycle".into()))?;
        Ok(Self { d, edges, topological_order })
    }

    pub fn empty(d: usize) -> Self {
        Self { d, edges: Vec::new(), topological_order: (0..d).collect() }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn topological_order(&self) -> &[usize] {
        &self.topological_order
    }

    pub fn has_edge(&self, j: usize, k: usize) -> bool {
        self.edges.binary_search(&(j, k)).is_ok()
    }

    pub fn parents(&self, k: usize) -> IndexSet {
        self.edges.iter().filter(|e| e.1 == k).map(|e| e.0).collect()
    }

    pub fn children(&self, j: usize) -> IndexSet {
        self.edges.iter().filter(|e| e.0 == j).map(|e| e.1).collect()
    }

    /// Every edge points forward in `topological_order`.
    pub fn is_acyclic(&self) -> bool {
        let mut pos = vec![0; self.d];
        for (p, &v) in self.topological_order.iter().enumerate() {
            pos[v] = p;
        }
        self.edges.iter().all(|&(j, k)| pos[j] < pos[k])
    }

    /// Image under `perm[old] = new`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        Self::new(self.d, self.edges.iter().map(|&(j, k)| (perm[j], perm[k]))).expect("relabeling preserves acyclicity")
    }
}

/// Kahn's algorithm, smallest ready node first.
fn kahn_order(d: usize, edges: &[(usize, usize)]) -> Option<Vec<usize>> {
    let mut indeg = vec![0usize; d];
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); d];
    for &(j, k) in edges {
        indeg[k] += 1;
        out[j].push(k);
    }
    let mut ready: std::collections::BTreeSet<usize> = (0..d).filter(|&v| indeg[v] == 0).collect();
    let mut order = Vec::with_capacity(d);
    while let Some(v) = ready.pop_first() {
        order.push(v);
        for &k in &out[v] {
            indeg[k] -= 1;
            if indeg[k] == 0 {
                ready.insert(k);
            }
        }
    }
    (order.len() == d).then_some(order)
}

/// Linear SEM: a DAG with nonzero edge weights and positive noise variances.
#[derive(Debug, Clone, PartialEq)]
pub struct SemSpec {
    dag: Dag,
    coeffs: BTreeMap<(usize, usize), f64>,
    noise_vars: Vec<f64>,
    noise_floor: Option<f64>,
}

impl SemSpec {
    /// `coeffs` must cover exactly the DAG's edges with nonzero finite weights.
    pub fn new(dag: Dag, coeffs: BTreeMap<(usize, usize), f64>, noise_vars: Vec<f64>) -> Result<Self> {
        if noise_vars.len() != dag.d() {
            return Err(Error::DimensionMismatch { expected: dag.d(), got: noise_vars.len() });
        }
        if noise_vars.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidArgument("noise variances must be positive".into()));
        }
        if coeffs.len() != dag.edges().len() || dag.edges().iter().any(|e| !coeffs.contains_key(e)) {
            return Err(Error::InvalidArgument("coefficients must match the edge set".into()));
        }
        if coeffs.values().any(|&b| b == 0.0 || !b.is_finite()) {
            return Err(Error::InvalidArgument("edge weights must be nonzero".into()));
        }
        Ok(Self { dag, coeffs, noise_vars, noise_floor: None })
    }

    /// Convenience constructor from `(from, to, weight)` triples.
    pub fn from_edges(d: usize, edges: &[(usize, usize, f64)], noise_vars: Vec<f64>) -> Result<Self> {
        let dag = Dag::new(d, edges.iter().map(|e| (e.0, e.1)))?;
        let coeffs = edges.iter().map(|e| ((e.0, e.1), e.2)).collect();
        Self::new(dag, coeffs, noise_vars)
    }

    /// Declares a σ_min² floor; fails if some noise variance is below it.
    pub fn with_noise_floor(mut self, floor: f64) -> Result<Self> {
        if self.noise_vars.iter().any(|&v| v < floor) {
            return Err(Error::InvalidArgument(format!("noise variance below floor {floor}")));
        }
        self.noise_floor = Some(floor);
        Ok(self)
    }

    pub fn d(&self) -> usize {
        self.dag.d()
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn coeffs(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize, k: usize) -> Option<f64> {
        self.coeffs.get(&(j, k)).copied()
    }

    pub fn noise_vars(&self) -> &[f64] {
        &self.noise_vars
    }

    pub fn noise_floor(&self) -> Option<f64> {
        self.noise_floor
    }

    /// Image under `perm[old] = new`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        let dag = self.dag.relabel(perm);
        let coeffs = self.coeffs.iter().map(|(&(j, k), &b)| ((perm[j], perm[k]), b)).collect();
        let mut noise_vars = vec![0.0; self.d()];
        for (old, &v) in self.noise_vars.iter().enumerate() {
            noise_vars[perm[old]] = v;
        }
        Self { dag, coeffs, noise_vars, noise_floor: self.noise_floor }
    }
}

/// `Σ = (I − Bᵀ)⁻¹ D (I − B)⁻¹`.
pub fn sem_covariance(spec: &SemSpec) -> SymMatrix {
    let d = spec.d();
    // Row k of `a` expresses X_k in the noise basis: X = A ε.
    let mut a = DMatrix::<f64>::zeros(d, d);
    for &k in spec.dag().topological_order() {
        a[(k, k)] = 1.0;
        for j in spec.dag().parents(k).iter() {
            let b = spec.coeffs[&(j, k)];
            for c in 0..d {
                a[(k, c)] += b * a[(j, c)];
            }
        }
    }
    let scaled = DMatrix::from_fn(d, d, |i, c| a[(i, c)] * spec.noise_vars()[c]);
    SymMatrix::new(scaled * a.transpose()).expect("square")
}

/// The triple `(β, Σ, σ²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    beta: DVector<f64>,
    sigma: SymMatrix,
    noise_var: f64,
    support: IndexSet,
}

impl LinearModel {
    /// `noise_var` may be zero for noiseless checks.
    pub fn new(beta: DVector<f64>, sigma: SymMatrix, noise_var: f64) -> Result<Self> {
        if beta.len() != sigma.dim() {
            return Err(Error::DimensionMismatch { expected: sigma.dim(), got: beta.len() });
        }
        if !(noise_var >= 0.0 && noise_var.is_finite()) {
            return Err(Error::InvalidArgument("noise variance must be nonnegative".into()));
        }
        let support = (0..beta.len()).filter(|&j| beta[j] != 0.0).collect();
        Ok(Self { beta, sigma, noise_var, support })
    }

    pub fn d(&self) -> usize {
        self.beta.len()
    }

    pub fn beta(&self) -> &DVector<f64> {
        &self.beta
    }

    pub fn sigma(&self) -> &SymMatrix {
        &self.sigma
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    pub fn support(&self) -> &IndexSet {
        &self.support
    }

    pub fn with_noise_var(&self, noise_var: f64) -> Result<Self> {
        Self::new(self.beta.clone(), self.sigma.clone(), noise_var)
    }
}

/// Model with `Σ = sem_covariance(spec)` and `β` zero off `support`.
pub fn attach_target(spec: &SemSpec, support: &IndexSet, beta_values: &[f64], noise_var: f64) -> Result<LinearModel> {
    support.check_bound(spec.d())?;
    if beta_values.len() != support.len() {
        return Err(Error::DimensionMismatch { expected: support.len(), got: beta_values.len() });
    }
    if beta_values.contains(&0.0) {
        return Err(Error::InvalidArgument("support coefficients must be nonzero".into()));
    }
    let mut beta = DVector::zeros(spec.d());
    for (j, &b) in support.iter().zip(beta_values) {
        beta[j] = b;
    }
    LinearModel::new(beta, sem_covariance(spec), noise_var)
}

/// `n × d` design with responses.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub seed: u64,
    pub model_id: String,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::DimensionMismatch { expected: x.nrows(), got: y.len() });
        }
        Ok(Self { x, y, seed: 0, model_id: String::new() })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn d(&self) -> usize {
        self.x.ncols()
    }

    /// Columns moved so that old column `j` becomes column `perm[j]`.
    pub fn permute_columns(&self, perm: &[usize]) -> Self {
        let mut x = self.x.clone();
        for (old, &new) in perm.iter().enumerate() {
            x.set_column(new, &self.x.column(old));
        }
        Self { x, y: self.y.clone(), seed: self.seed, model_id: self.model_id.clone() }
    }
}

/// Rows `X = Z Lᵀ` with `L Lᵀ = Σ`, then `y = Xβ + ε`.
pub fn sample_dataset(model: &LinearModel, n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let d = model.d();
    let l = cholesky_lower(model.sigma())?;
    let mut rng = rng_from_seed(seed);
    let mut z = DMatrix::<f64>::zeros(n, d);
    for i in 0..n {
        for j in 0..d {
            z[(i, j)] = StandardNormal.sample(&mut rng);
        }
    }
    let x = z * l.transpose();
    let mut y = &x * model.beta();
    if model.noise_var() > 0.0 {
        let sd = model.noise_var().sqrt();
        for yi in y.iter_mut() {
            let e: f64 = StandardNormal.sample(&mut rng);
            *yi += sd * e;
        }
    }
    Ok(Dataset { x, y, seed, model_id: format!("seed-{seed:016x}") })
}
