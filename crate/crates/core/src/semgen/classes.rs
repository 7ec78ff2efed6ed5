//! Bipartite model classes and the out-degree condition on second-layer supports.

use super::{sem_covariance, LinearModel, SemSpec};
use crate::covkit::IndexSet;
use crate::error::{Error, Result};

/// Relative tolerance for the covariance consistency check.
const COVARIANCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassKind {
    /// Bipartite graph, `|V1| ≤ s`, support inside one layer.
    MB,
    /// Bipartite graph with noise floor and beta-min only.
    MBbar,
    /// As `MB` without the `|V1|` bound.
    MBprime,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelClass {
    pub kind: ClassKind,
    pub beta_min: f64,
    pub sigma_min_sq: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Membership {
    pub member: bool,
    /// Roots (`V1`) and nodes with parents (`V2`), when the graph is bipartite.
    pub layers: Option<(IndexSet, IndexSet)>,
    pub violations: Vec<String>,
}

/// `(V1, V2)` with `V1` the parentless nodes, or `None` if some edge leaves a node that has parents.
pub fn bipartite_layers(spec: &SemSpec) -> Option<(IndexSet, IndexSet)> {
    let dag = spec.dag();
    let has_parent: Vec<bool> = (0..dag.d()).map(|k| dag.edges().iter().any(|e| e.1 == k)).collect();
    if dag.edges().iter().any(|&(j, _)| has_parent[j]) {
        return None;
    }
    let v1 = (0..dag.d()).filter(|&k| !has_parent[k]).collect();
    let v2 = (0..dag.d()).filter(|&k| has_parent[k]).collect();
    Some((v1, v2))
}

pub fn class_membership(model: &LinearModel, spec: &SemSpec, class: &ModelClass) -> Result<Membership> {
    let sigma = sem_covariance(spec);
    if sigma.dim() != model.d() {
        return Err(Error::DimensionMismatch { expected: sigma.dim(), got: model.d() });
    }
    let scale = sigma.max_abs().max(1.0);
    let max_diff = (sigma.matrix() - model.sigma().matrix()).abs().max();
    if max_diff > COVARIANCE_TOL * scale {
        return Err(Error::CovarianceMismatch { max_diff });
    }

    let support = model.support();
    let s = support.len();
    let mut violations = Vec::new();
    let layers = bipartite_layers(spec);
    match &layers {
        None => violations.push("graph is not bipartite".to_string()),
        Some((_, v2)) => {
            for k in v2.iter() {
                let indeg = spec.dag().parents(k).len();
                if indeg > s {
                    violations.push(format!("node {k} has {indeg} parents, more than s = {s}"));
                }
            }
        }
    }
    if let Some(j) = spec.noise_vars().iter().position(|&v| v < class.sigma_min_sq) {
        violations.push(format!("noise variance of node {j} below the floor"));
    }
    if let Some(j) = support.iter().find(|&j| model.beta()[j].abs() < class.beta_min) {
        violations.push(format!("|beta_{j}| below beta_min"));
    }
    if matches!(class.kind, ClassKind::MB | ClassKind::MBprime) {
        if let Some((v1, v2)) = &layers {
            if !(support.is_subset(v1) || support.is_subset(v2)) {
                violations.push("support spans both layers".to_string());
            }
            if class.kind == ClassKind::MB && v1.len() > s {
                violations.push(format!("|V1| = {} exceeds s = {s}", v1.len()));
            }
        }
    }
    Ok(Membership { member: violations.is_empty(), layers, violations })
}

/// Every parent of `support ∩ V2` has at most `c` children inside it.
pub fn check_condition_53(spec: &SemSpec, support: &IndexSet, c: usize) -> Result<bool> {
    let (_, v2) = bipartite_layers(spec).ok_or(Error::NotBipartite)?;
    let s2 = support.intersection(&v2);
    let parents = s2.iter().fold(IndexSet::empty(), |acc, k| acc.union(&spec.dag().parents(k)));
    let ok = parents.iter().all(|j| spec.dag().children(j).intersection(&s2).len() <= c);
    Ok(ok)
}
