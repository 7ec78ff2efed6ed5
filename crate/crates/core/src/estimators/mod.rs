//! Finite-sample support estimators.
//!
//! All estimators reduce the dataset to its sufficient statistics first (see
//! [`SampleStats`]); scores are exact functions of `XᵀX`, `XᵀY` and `YᵀY`.
//!
//! Tie-breaking is fixed: a pairwise comparison keeps its first argument on
//! an exact score tie, argmin/argmax pick the lexicographically smallest set,
//! and Full klBSS vote ties go to the smaller residual first.

mod known;
mod lasso;
mod stats;
mod unknown;

use itertools::Itertools;

use crate::covkit::IndexSet;
use crate::error::{Error, Result};
use crate::semgen::Dataset;
use crate::signals::binomial;
use crate::theta::ThetaSpec;

pub use known::{bss, compare, full_klbss, simple_klbss, vanilla_klbss, vanilla_score, CompareOutcome};
pub use lasso::{lasso_fit_path, lasso_path, LassoPath, LASSO_TOL};
pub use stats::{Partialled, SampleStats};
pub use unknown::{bssu, compare_unknown, klbss_unknown, TournamentMode, UnknownOutcome};

/// Enumeration limit for single-pass searches.
pub const MAX_BSS_CANDIDATES: u128 = 1_000_000;
/// Enumeration limit for all-pairs tournaments.
pub const MAX_FULL_CANDIDATES: u128 = 2_000;

/// Residual and violation parts of a candidate score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScorePair {
    pub residual_term: f64,
    pub violation_term: f64,
    pub total: f64,
}

impl ScorePair {
    pub fn new(residual_term: f64, violation_term: f64) -> Self {
        Self { residual_term, violation_term, total: residual_term + violation_term }
    }
}

/// Size-`s` subsets of `0..d` in lexicographic order.
pub fn candidates_exact(d: usize, s: usize, limit: u128) -> Result<Vec<IndexSet>> {
    let count = binomial(d, s);
    if count > limit {
        return Err(Error::TooManyCandidates { count, limit });
    }
    Ok((0..d).combinations(s).map(IndexSet::new).collect())
}

/// Subsets of size `0..=sbar`, sizes ascending, lexicographic within a size.
pub fn candidates_up_to(d: usize, sbar: usize, limit: u128) -> Result<Vec<IndexSet>> {
    let count: u128 = (0..=sbar).map(|k| binomial(d, k)).sum();
    if count > limit {
        return Err(Error::TooManyCandidates { count, limit });
    }
    Ok((0..=sbar).flat_map(|k| (0..d).combinations(k).map(IndexSet::new)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Bss,
    SimpleKlBss,
    FullKlBss,
    VanillaKlBss,
    Bssu,
    KlBssUnknown(TournamentMode),
    LassoPath,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Bss => "bss",
            Method::SimpleKlBss => "simple_klbss",
            Method::FullKlBss => "full_klbss",
            Method::VanillaKlBss => "vanilla_klbss",
            Method::Bssu => "bssu",
            Method::KlBssUnknown(TournamentMode::Simple) => "klbss_unknown_simple",
            Method::KlBssUnknown(TournamentMode::Full) => "klbss_unknown_full",
            Method::LassoPath => "lasso",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "bss" => Method::Bss,
            "simple_klbss" => Method::SimpleKlBss,
            "full_klbss" => Method::FullKlBss,
            "vanilla_klbss" => Method::VanillaKlBss,
            "bssu" => Method::Bssu,
            "klbss_unknown_simple" => Method::KlBssUnknown(TournamentMode::Simple),
            "klbss_unknown_full" => Method::KlBssUnknown(TournamentMode::Full),
            "lasso" => Method::LassoPath,
            _ => return None,
        })
    }

    pub fn all() -> [Method; 8] {
        [
            Method::Bss,
            Method::SimpleKlBss,
            Method::FullKlBss,
            Method::VanillaKlBss,
            Method::Bssu,
            Method::KlBssUnknown(TournamentMode::Simple),
            Method::KlBssUnknown(TournamentMode::Full),
            Method::LassoPath,
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    pub method: Method,
    /// Sparsity (exact `s` or bound `s̄`) and the beta-min floor.
    pub theta: ThetaSpec,
    /// Per-unit cardinality penalty for unknown-sparsity methods.
    pub tau: f64,
    /// Simple-klBSS ordering seed.
    pub seed: u64,
    pub lasso_nlambda: usize,
}

impl EstimatorConfig {
    pub fn new(method: Method, theta: ThetaSpec) -> Self {
        Self { method, theta, tau: 0.0, seed: 0, lasso_nlambda: 500 }
    }

    pub fn validate(&self) -> Result<()> {
        self.theta.validate()?;
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidArgument(format!("tau must be nonnegative, got {}", self.tau)));
        }
        Ok(())
    }

    pub fn run(&self, data: &Dataset) -> Result<Estimate> {
        self.validate()?;
        let stats = SampleStats::new(data);
        let s = self.theta.sparsity_level();
        let theta = &self.theta;
        Ok(match self.method {
            Method::Bss => Estimate::Set(known::bss_stats(&stats, s)?),
            Method::SimpleKlBss => Estimate::Set(known::simple_klbss_stats(&stats, s, theta, self.seed)?),
            Method::FullKlBss => Estimate::Set(known::full_klbss_stats(&stats, s, theta)?),
            Method::VanillaKlBss => Estimate::Set(known::vanilla_klbss_stats(&stats, s, theta)?),
            Method::Bssu => Estimate::Set(unknown::bssu_stats(&stats, s, self.tau)?),
            Method::KlBssUnknown(mode) => {
                Estimate::Set(unknown::klbss_unknown_stats(&stats, s, theta, self.tau, mode, self.seed)?)
            }
            Method::LassoPath => Estimate::Path(lasso_path(data, self.lasso_nlambda)?),
        })
    }
}

/// A single support or a whole regularization path.
#[derive(Debug, Clone, PartialEq)]
pub enum Estimate {
    Set(IndexSet),
    Path(Vec<IndexSet>),
}

/// Exact recovery; a path succeeds if any of its supports equals the truth.
pub fn recovery_success(estimated: &Estimate, truth: &IndexSet) -> bool {
    match estimated {
        Estimate::Set(s) => s == truth,
        Estimate::Path(path) => path.iter().any(|s| s == truth),
    }
}
