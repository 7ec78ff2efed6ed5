//! Seeded Monte-Carlo recovery experiments.
//!
//! Each `(n, rep)` task derives its replication seed from the base seed, a
//! hash of the cell description and the replication index; graph and data
//! seeds are domain-separated from it. Tasks are pure, so the merged output is
//! independent of scheduling and thread count.

use std::time::Instant;

use klbss::estimators::recovery_success;
use klbss::rng::{domain, mix, replication_seed, rng_from_seed, stable_hash};
use klbss::semgen::{
    attach_target, gen_bipartite, gen_er, gen_sf, make_gpc_example, make_independent_design, make_motivating_example,
    random_permutation, sample_dataset, GenParams,
};
use klbss::{Dataset, EstimatorConfig, IndexSet, LinearModel, SemSpec, ThetaSpec};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, GraphKind, MethodSpec};
use crate::RunError;

/// One row of the recovery CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryRecord {
    pub graph_type: String,
    pub k: usize,
    pub d: usize,
    pub s: usize,
    pub n: usize,
    pub method: String,
    pub rep: usize,
    pub recovered: bool,
    pub seed: u64,
    pub wall_ms: f64,
    /// Empty unless the fit failed.
    pub error: String,
}

/// A fully specified replication: model, its generating SEM and a dataset.
#[derive(Debug, Clone)]
pub struct Replication {
    pub spec: SemSpec,
    pub model: LinearModel,
    pub data: Dataset,
    pub seed: u64,
}

fn cell_hash(cfg: &ExperimentConfig, n: Option<usize>) -> u64 {
    let mut key = format!("{}|k={}|d={}|s={}", cfg.graph_kind.name(), cfg.k, cfg.d, cfg.s);
    if let Some(n) = n {
        key.push_str(&format!("|n={n}"));
    }
    stable_hash(&key)
}

/// Replication seed recorded in the `seed` column.
pub fn rep_seed(cfg: &ExperimentConfig, n: usize, rep: usize) -> u64 {
    replication_seed(cfg.base_seed, cell_hash(cfg, Some(n)), rep as u64)
}

pub fn graph_seed(cfg: &ExperimentConfig, seed: u64) -> u64 {
    if cfg.fixed_graph {
        mix(replication_seed(cfg.base_seed, cell_hash(cfg, None), 0), domain::GRAPH)
    } else {
        mix(seed, domain::GRAPH)
    }
}

fn gen_params(cfg: &ExperimentConfig) -> GenParams {
    GenParams { weight_range: (cfg.b_min, cfg.b_max), noise_range: cfg.sigma_range, signed_weights: cfg.signed_weights }
}

/// The SEM and target model for a graph seed; `β = β_min` on `0..s`.
pub fn build_model(cfg: &ExperimentConfig, graph_seed: u64) -> klbss::Result<(SemSpec, LinearModel)> {
    let params = gen_params(cfg);
    let (d, s) = (cfg.d, cfg.s);
    let support = IndexSet::range(0, s);
    let beta = vec![cfg.beta_min; s];
    match cfg.graph_kind {
        GraphKind::Er => {
            let spec = gen_er(d, cfg.k, &params, graph_seed)?;
            let model = attach_target(&spec, &support, &beta, 1.0)?;
            Ok((spec, model))
        }
        GraphKind::Sf => {
            // Growth order makes low labels hubs; relabel so the support lands on random nodes.
            let spec = gen_sf(d, cfg.k, &params, graph_seed)?;
            let perm = random_permutation(d, &mut rng_from_seed(mix(graph_seed, domain::ORDER)));
            let spec = spec.relabel(&perm);
            let model = attach_target(&spec, &support, &beta, 1.0)?;
            Ok((spec, model))
        }
        GraphKind::Bipartite => {
            let spec = gen_bipartite(d, s, &params, graph_seed)?;
            let model = attach_target(&spec, &support, &beta, 1.0)?;
            Ok((spec, model))
        }
        GraphKind::Independent => make_independent_design(d, s, cfg.sigma_max, cfg.beta_min),
        GraphKind::MotivatingExample => make_motivating_example(d, s, cfg.beta_min, cfg.b_max),
        GraphKind::GpcExample => {
            let a_choice = IndexSet::range(s + 1, s + s / 2);
            let ex = make_gpc_example(s, cfg.b_max, cfg.beta_min, cfg.sigma_range.0, &a_choice)?;
            Ok((ex.spec, ex.model))
        }
    }
}

/// Regenerates the replication behind a recorded `(n, seed)` pair bit-exactly.
pub fn replicate(cfg: &ExperimentConfig, n: usize, seed: u64) -> klbss::Result<Replication> {
    let (spec, model) = build_model(cfg, graph_seed(cfg, seed))?;
    let data = sample_dataset(&model, n, mix(seed, domain::DATA))?;
    Ok(Replication { spec, model, data, seed })
}

fn estimator_config(cfg: &ExperimentConfig, spec: &MethodSpec, seed: u64) -> EstimatorConfig {
    let beta_min = spec.beta_min.unwrap_or(cfg.beta_min);
    let theta = if spec.uses_sbar() {
        ThetaSpec::at_most(cfg.d, cfg.sbar, beta_min)
    } else {
        ThetaSpec::exact(cfg.d, cfg.s, beta_min)
    };
    EstimatorConfig { method: spec.method, theta, tau: cfg.tau_value(), seed, lasso_nlambda: cfg.lasso_nlambda }
}

fn run_task(cfg: &ExperimentConfig, n: usize, rep: usize) -> Result<Vec<RecoveryRecord>, RunError> {
    let seed = rep_seed(cfg, n, rep);
    let record = |method: &MethodSpec, recovered: bool, wall_ms: f64, error: String| RecoveryRecord {
        graph_type: cfg.graph_kind.name().to_string(),
        k: cfg.k,
        d: cfg.d,
        s: cfg.s,
        n,
        method: method.label(),
        rep,
        recovered,
        seed,
        wall_ms,
        error,
    };
    let strict_fail = |method: &MethodSpec, source: klbss::Error| RunError::Estimator { n, rep, method: method.label(), source };

    let replication = match replicate(cfg, n, seed) {
        Ok(r) => r,
        Err(e) if cfg.strict => return Err(strict_fail(&cfg.methods[0], e)),
        Err(e) => return Ok(cfg.methods.iter().map(|m| record(m, false, 0.0, format!("model: {e}"))).collect()),
    };
    let truth = replication.model.support();
    let mut rows = Vec::with_capacity(cfg.methods.len());
    for method in &cfg.methods {
        let est = estimator_config(cfg, method, seed);
        let start = cfg.timing.then(Instant::now);
        let outcome = est.run(&replication.data);
        let wall_ms = start.map_or(0.0, |t| t.elapsed().as_secs_f64() * 1e3);
        rows.push(match outcome {
            Ok(estimate) => record(method, recovery_success(&estimate, truth), wall_ms, String::new()),
            Err(e) if cfg.strict => return Err(strict_fail(method, e)),
            Err(e) => record(method, false, wall_ms, e.to_string()),
        });
    }
    Ok(rows)
}

/// Recovery rows sorted by `(n, method position, rep)`.
pub fn run_recovery(cfg: &ExperimentConfig) -> Result<Vec<RecoveryRecord>, RunError> {
    cfg.validate()?;
    let tasks: Vec<(usize, usize)> =
        cfg.n_grid.iter().flat_map(|&n| (0..cfg.reps).map(move |rep| (n, rep))).collect();
    let work = || tasks.par_iter().map(|&(n, rep)| run_task(cfg, n, rep)).collect::<Result<Vec<_>, _>>();
    let per_task = match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| RunError::Io(std::io::Error::other(e)))?
            .install(work)?,
        None => work()?,
    };
    let mut rows: Vec<(usize, RecoveryRecord)> = per_task
        .into_iter()
        .flat_map(|task_rows| task_rows.into_iter().enumerate())
        .collect();
    rows.sort_by(|(ma, a), (mb, b)| (a.n, ma, a.rep).cmp(&(b.n, mb, b.rep)));
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}

/// BSS, correctly specified Full klBSS, and Full klBSS at each grid value.
pub fn misspec_methods(cfg: &ExperimentConfig) -> Vec<MethodSpec> {
    use klbss::Method;
    let mut methods = vec![MethodSpec::new(Method::Bss), MethodSpec::new(Method::FullKlBss)];
    methods.extend(cfg.beta_min_grid.iter().map(|&b| MethodSpec::with_beta_min(Method::FullKlBss, b)));
    methods
}

pub fn run_misspec(cfg: &ExperimentConfig) -> Result<Vec<RecoveryRecord>, RunError> {
    if cfg.beta_min_grid.is_empty() {
        return Err(crate::config::ConfigError {
            line: 0,
            field: "beta_min_grid".into(),
            msg: "grid must be nonempty".into(),
        }
        .into());
    }
    let cfg = ExperimentConfig { methods: misspec_methods(cfg), ..cfg.clone() };
    run_recovery(&cfg)
}

pub fn run_independent(cfg: &ExperimentConfig) -> Result<Vec<RecoveryRecord>, RunError> {
    let cfg = ExperimentConfig { graph_kind: GraphKind::Independent, ..cfg.clone() };
    run_recovery(&cfg)
}

/// Recovery frequency per `(n, method)` in row order.
pub fn frequencies(rows: &[RecoveryRecord]) -> Vec<(usize, String, f64)> {
    let mut out: Vec<(usize, String, usize, usize)> = Vec::new();
    for r in rows {
        match out.iter_mut().find(|(n, m, _, _)| *n == r.n && *m == r.method) {
            Some(entry) => {
                entry.2 += r.recovered as usize;
                entry.3 += 1;
            }
            None => out.push((r.n, r.method.clone(), r.recovered as usize, 1)),
        }
    }
    out.into_iter().map(|(n, m, hits, total)| (n, m, hits as f64 / total as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use klbss::Method;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            d: 6,
            s: 2,
            n_grid: vec![100, 200],
            reps: 3,
            methods: vec![MethodSpec::new(Method::Bss), MethodSpec::new(Method::FullKlBss)],
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn row_order_and_count() {
        let rows = run_recovery(&small()).unwrap();
        assert_eq!(rows.len(), 2 * 3 * 2);
        let keys: Vec<(usize, String, usize)> = rows.iter().map(|r| (r.n, r.method.clone(), r.rep)).collect();
        assert_eq!(keys[0], (100, "bss".into(), 0));
        assert_eq!(keys[3], (100, "full_klbss".into(), 0));
        assert_eq!(keys[6], (200, "bss".into(), 0));
    }

    #[test]
    fn methods_share_the_replication_seed() {
        let rows = run_recovery(&small()).unwrap();
        for r in &rows {
            assert_eq!(r.seed, rep_seed(&small(), r.n, r.rep));
        }
    }

    #[test]
    fn seed_regenerates_dataset() {
        let cfg = small();
        let a = replicate(&cfg, 150, 77).unwrap();
        let b = replicate(&cfg, 150, 77).unwrap();
        assert_eq!(a.data.x, b.data.x);
        assert_eq!(a.data.y, b.data.y);
        assert_eq!(a.model.support(), &IndexSet::range(0, 2));
    }

    #[test]
    fn fixed_graph_shares_model_across_reps() {
        let cfg = ExperimentConfig { fixed_graph: true, ..small() };
        let a = replicate(&cfg, 100, rep_seed(&cfg, 100, 0)).unwrap();
        let b = replicate(&cfg, 200, rep_seed(&cfg, 200, 1)).unwrap();
        assert_eq!(a.spec, b.spec);
        let cfg = small();
        let a = replicate(&cfg, 100, rep_seed(&cfg, 100, 0)).unwrap();
        let b = replicate(&cfg, 100, rep_seed(&cfg, 100, 1)).unwrap();
        assert_ne!(a.spec, b.spec);
    }

    #[test]
    fn frequency_table() {
        let rows = run_recovery(&small()).unwrap();
        let f = frequencies(&rows);
        assert_eq!(f.len(), 4);
        assert!(f.iter().all(|(_, _, p)| (0.0..=1.0).contains(p)));
    }

    #[test]
    fn misspec_method_list() {
        let cfg = ExperimentConfig { beta_min_grid: vec![0.0, 0.05], ..small() };
        let labels: Vec<String> = misspec_methods(&cfg).iter().map(MethodSpec::label).collect();
        assert_eq!(labels, ["bss", "full_klbss", "full_klbss@0", "full_klbss@0.05"]);
    }

    #[test]
    fn every_graph_kind_builds() {
        for kind in [
            GraphKind::Er,
            GraphKind::Sf,
            GraphKind::Bipartite,
            GraphKind::Independent,
            GraphKind::MotivatingExample,
            GraphKind::GpcExample,
        ] {
            let d = if kind == GraphKind::GpcExample { 6 } else { 8 };
            let cfg = ExperimentConfig { graph_kind: kind, d, s: 4, ..ExperimentConfig::default() };
            cfg.validate().unwrap();
            let (spec, model) = build_model(&cfg, 3).unwrap();
            assert_eq!(spec.d(), model.d());
        }
    }
}
