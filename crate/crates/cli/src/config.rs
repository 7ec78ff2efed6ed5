//! Flat `key = value` experiment configuration.
//!
//! Unknown keys, malformed values and inconsistent combinations are reported
//! as [`ConfigError`] with the offending line and field. Missing keys keep the
//! value of the base configuration passed to [`parse_config_str`].

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use klbss::Method;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("config error at line {line}, field `{field}`: {msg}")]
pub struct ConfigError {
    /// 0 when the problem is not tied to a single line.
    pub line: usize,
    pub field: String,
    pub msg: String,
}

impl ConfigError {
    fn new(line: usize, field: &str, msg: impl Into<String>) -> Self {
        Self { line, field: field.to_string(), msg: msg.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    Er,
    Sf,
    Bipartite,
    Independent,
    MotivatingExample,
    GpcExample,
}

impl GraphKind {
    pub fn name(&self) -> &'static str {
        match self {
            GraphKind::Er => "er",
            GraphKind::Sf => "sf",
            GraphKind::Bipartite => "bipartite",
            GraphKind::Independent => "independent",
            GraphKind::MotivatingExample => "motivating",
            GraphKind::GpcExample => "gpc",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "er" => GraphKind::Er,
            "sf" => GraphKind::Sf,
            "bipartite" => GraphKind::Bipartite,
            "independent" => GraphKind::Independent,
            "motivating" => GraphKind::MotivatingExample,
            "gpc" => GraphKind::GpcExample,
            _ => return None,
        })
    }
}

/// A method with an optional beta-min override, written `name` or `name@value`.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSpec {
    pub method: Method,
    pub beta_min: Option<f64>,
}

impl MethodSpec {
    pub fn new(method: Method) -> Self {
        Self { method, beta_min: None }
    }

    pub fn with_beta_min(method: Method, beta_min: f64) -> Self {
        Self { method, beta_min: Some(beta_min) }
    }

    pub fn label(&self) -> String {
        match self.beta_min {
            None => self.method.name().to_string(),
            Some(b) => format!("{}@{b}", self.method.name()),
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text.split_once('@') {
            None => Method::parse(text).map(Self::new),
            Some((name, value)) => {
                let b: f64 = value.parse().ok()?;
                (b >= 0.0 && b.is_finite()).then_some(())?;
                Method::parse(name).map(|m| Self::with_beta_min(m, b))
            }
        }
    }

    pub fn uses_sbar(&self) -> bool {
        matches!(self.method, Method::Bssu | Method::KlBssUnknown(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub graph_kind: GraphKind,
    /// Expected edges per node for ER; attachment count for SF.
    pub k: usize,
    pub d: usize,
    pub s: usize,
    pub n_grid: Vec<usize>,
    pub reps: usize,
    pub methods: Vec<MethodSpec>,
    pub beta_min: f64,
    pub b_max: f64,
    pub b_min: f64,
    /// Noise standard deviation range `(σ_min, σ_max)`.
    pub sigma_range: (f64, f64),
    pub signed_weights: bool,
    pub base_seed: u64,
    pub output_path: Option<PathBuf>,
    /// Draw one graph per cell instead of one per replication.
    pub fixed_graph: bool,
    /// Noise scale of the non-support block in the independent design.
    pub sigma_max: f64,
    pub beta_min_grid: Vec<f64>,
    /// Penalty for unknown-sparsity methods; `None` uses `β_min² σ_min² / 8`.
    pub tau: Option<f64>,
    pub sbar: usize,
    pub lasso_nlambda: usize,
    pub threads: Option<usize>,
    /// Estimator failures abort the run instead of being recorded.
    pub strict: bool,
    /// Record wall-clock time per fit; off keeps output byte-reproducible.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            graph_kind: GraphKind::Bipartite,
            k: 2,
            d: 8,
            s: 3,
            n_grid: vec![500, 900, 1300, 1700, 2100, 2500, 2900, 3200],
            reps: 200,
            methods: vec![
                MethodSpec::new(Method::Bss),
                MethodSpec::new(Method::SimpleKlBss),
                MethodSpec::new(Method::FullKlBss),
                MethodSpec::new(Method::LassoPath),
            ],
            beta_min: 0.1,
            b_max: 5.0,
            b_min: 0.1,
            sigma_range: (0.5, 2.0),
            signed_weights: true,
            base_seed: 20_240_601,
            output_path: None,
            fixed_graph: false,
            sigma_max: 2.0,
            beta_min_grid: vec![0.01, 0.03, 0.05, 0.07, 0.09, 0.11, 0.13, 0.15, 0.17, 0.19],
            tau: None,
            sbar: 4,
            lasso_nlambda: 500,
            threads: None,
            strict: false,
            timing: false,
        }
    }
}

impl ExperimentConfig {
    /// Misspecified beta-min study: SF-2, `d = 7`, `s = 3`.
    pub fn misspec_defaults() -> Self {
        Self {
            graph_kind: GraphKind::Sf,
            k: 2,
            d: 7,
            s: 3,
            methods: vec![MethodSpec::new(Method::Bss), MethodSpec::new(Method::FullKlBss)],
            ..Self::default()
        }
    }

    /// Independent design with unit support block and `σ_max = 2`.
    pub fn independent_defaults() -> Self {
        Self {
            graph_kind: GraphKind::Independent,
            methods: vec![
                MethodSpec::new(Method::Bss),
                MethodSpec::new(Method::FullKlBss),
                MethodSpec::new(Method::LassoPath),
            ],
            ..Self::default()
        }
    }

    pub fn sigma_min_sq(&self) -> f64 {
        self.sigma_range.0 * self.sigma_range.0
    }

    /// Plug-in penalty `¼ · (β_min² σ_min² / 2σ²) · σ²` with `σ² = 1`.
    pub fn tau_value(&self) -> f64 {
        self.tau.unwrap_or(self.beta_min * self.beta_min * self.sigma_min_sq() / 8.0)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |field: &str, msg: &str| Err(ConfigError::new(0, field, msg));
        // The path-cancellation design has d = 3s/2 by construction.
        if self.s == 0 || (2 * self.s > self.d && self.graph_kind != GraphKind::GpcExample) {
            return fail("s", "need 1 <= s <= d/2");
        }
        if self.reps == 0 {
            return fail("reps", "need at least one replication");
        }
        if self.n_grid.is_empty() || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return fail("n_grid", "must be nonempty and strictly increasing");
        }
        if self.n_grid[0] <= self.sbar.max(self.s) + 1 {
            return fail("n_grid", "every n must exceed the sparsity plus one");
        }
        if self.methods.is_empty() {
            return fail("methods", "need at least one method");
        }
        if !(self.beta_min > 0.0) || !(self.b_min > 0.0 && self.b_min <= self.b_max) {
            return fail("beta_min", "need beta_min > 0 and 0 < b_min <= b_max");
        }
        if !(self.sigma_range.0 > 0.0 && self.sigma_range.0 <= self.sigma_range.1) {
            return fail("sigma_lo", "need 0 < sigma_lo <= sigma_hi");
        }
        if self.graph_kind == GraphKind::Independent && !(self.sigma_max >= 1.0) {
            return fail("sigma_max", "need sigma_max >= 1");
        }
        if self.graph_kind == GraphKind::GpcExample && (self.s % 2 != 0 || 2 * self.d != 3 * self.s) {
            return fail("s", "the path-cancellation design needs even s and d = 3s/2");
        }
        if self.graph_kind == GraphKind::Sf && self.k == 0 {
            return fail("k", "scale-free graphs need k >= 1");
        }
        if self.beta_min_grid.iter().any(|&b| !(b >= 0.0 && b.is_finite())) {
            return fail("beta_min_grid", "values must be nonnegative");
        }
        if self.tau.is_some_and(|t| !(t >= 0.0 && t.is_finite())) {
            return fail("tau", "must be nonnegative");
        }
        if self.sbar > self.d {
            return fail("sbar", "must not exceed d");
        }
        if self.lasso_nlambda == 0 {
            return fail("lasso_nlambda", "must be positive");
        }
        if self.threads == Some(0) {
            return fail("threads", "must be positive");
        }
        Ok(())
    }

    /// Canonical `key = value` text; parsing it yields `self` again.
    pub fn to_canonical_string(&self) -> String {
        let list = |v: &[String]| v.join(",");
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("graph", self.graph_kind.name().to_string());
        kv("k", self.k.to_string());
        kv("d", self.d.to_string());
        kv("s", self.s.to_string());
        kv("n_grid", list(&self.n_grid.iter().map(|n| n.to_string()).collect::<Vec<_>>()));
        kv("reps", self.reps.to_string());
        kv("methods", list(&self.methods.iter().map(MethodSpec::label).collect::<Vec<_>>()));
        kv("beta_min", self.beta_min.to_string());
        kv("b_max", self.b_max.to_string());
        kv("b_min", self.b_min.to_string());
        kv("sigma_lo", self.sigma_range.0.to_string());
        kv("sigma_hi", self.sigma_range.1.to_string());
        kv("signed_weights", self.signed_weights.to_string());
        kv("seed", self.base_seed.to_string());
        if let Some(p) = &self.output_path {
            kv("output", p.display().to_string());
        }
        kv("fixed_graph", self.fixed_graph.to_string());
        kv("sigma_max", self.sigma_max.to_string());
        kv("beta_min_grid", list(&self.beta_min_grid.iter().map(|b| b.to_string()).collect::<Vec<_>>()));
        if let Some(t) = self.tau {
            kv("tau", t.to_string());
        }
        kv("sbar", self.sbar.to_string());
        kv("lasso_nlambda", self.lasso_nlambda.to_string());
        if let Some(t) = self.threads {
            kv("threads", t.to_string());
        }
        kv("strict", self.strict.to_string());
        kv("timing", self.timing.to_string());
        out
    }
}

fn parse_value<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::new(line, key, format!("cannot parse `{value}`")))
}

fn parse_list<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<Vec<T>, ConfigError> {
    value
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| parse_value(line, key, v))
        .collect()
}

/// Parses `text` on top of `base` and validates the result.
pub fn parse_config_str(text: &str, base: ExperimentConfig) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = base;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| ConfigError::new(line, content, "expected `key = value`"))?;
        match key {
            "graph" => {
                cfg.graph_kind =
                    GraphKind::parse(value).ok_or_else(|| ConfigError::new(line, key, format!("unknown graph `{value}`")))?
            }
            "k" => cfg.k = parse_value(line, key, value)?,
            "d" => cfg.d = parse_value(line, key, value)?,
            "s" => cfg.s = parse_value(line, key, value)?,
            "n_grid" => cfg.n_grid = parse_list(line, key, value)?,
            "reps" => cfg.reps = parse_value(line, key, value)?,
            "methods" => {
                cfg.methods = value
                    .split(',')
                    .map(str::trim)
                    .filter(|v| !v.is_empty())
                    .map(|v| MethodSpec::parse(v).ok_or_else(|| ConfigError::new(line, key, format!("unknown method `{v}`"))))
                    .collect::<Result<_, _>>()?
            }
            "beta_min" => cfg.beta_min = parse_value(line, key, value)?,
            "b_max" | "beta_max" => cfg.b_max = parse_value(line, key, value)?,
            "b_min" => cfg.b_min = parse_value(line, key, value)?,
            "sigma_lo" => cfg.sigma_range.0 = parse_value(line, key, value)?,
            "sigma_hi" => cfg.sigma_range.1 = parse_value(line, key, value)?,
            "signed_weights" => cfg.signed_weights = parse_value(line, key, value)?,
            "seed" => cfg.base_seed = parse_value(line, key, value)?,
            "output" => cfg.output_path = Some(PathBuf::from(value)),
            "fixed_graph" => cfg.fixed_graph = parse_value(line, key, value)?,
            "sigma_max" => cfg.sigma_max = parse_value(line, key, value)?,
            "beta_min_grid" => cfg.beta_min_grid = parse_list(line, key, value)?,
            "tau" => cfg.tau = Some(parse_value(line, key, value)?),
            "sbar" => cfg.sbar = parse_value(line, key, value)?,
            "lasso_nlambda" => cfg.lasso_nlambda = parse_value(line, key, value)?,
            "threads" => cfg.threads = Some(parse_value(line, key, value)?),
            "strict" => cfg.strict = parse_value(line, key, value)?,
            "timing" => cfg.timing = parse_value(line, key, value)?,
            _ => return Err(ConfigError::new(line, key, "unknown key")),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Reads and parses a config file on top of the default configuration.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    parse_config_with(path, ExperimentConfig::default())
}

pub fn parse_config_with(path: &Path, base: ExperimentConfig) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new(0, "path", format!("{}: {e}", path.display())))?;
    parse_config_str(&text, base)
}
