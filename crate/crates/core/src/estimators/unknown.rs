//! Unknown-sparsity estimators: penalized Compare, the klBSS tournaments over
//! all supports of size at most `s̄`, and penalized BSS.

use rand::seq::SliceRandom;

use super::known::{pair_scores, tournament, vote_counts, vote_winner};
use super::stats::SampleStats;
use super::{candidates_up_to, ScorePair, MAX_BSS_CANDIDATES, MAX_FULL_CANDIDATES};
use crate::covkit::IndexSet;
use crate::error::{Error, Result};
use crate::rng::{domain, mix, rng_from_seed};
use crate::semgen::Dataset;
use crate::theta::ThetaSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TournamentMode {
    Simple,
    Full,
}

/// Outcome of a penalized comparison; scores include the `τ|D|` penalty.
#[derive(Debug, Clone, PartialEq)]
pub struct UnknownOutcome {
    pub winner: IndexSet,
    pub scores: (ScorePair, ScorePair),
}

fn check_unknown(stats: &SampleStats, sbar: usize, tau: f64) -> Result<()> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::InvalidArgument(format!("tau must be finite and nonnegative, got {tau}")));
    }
    if sbar > stats.d() || stats.n <= sbar {
        return Err(Error::InvalidArgument(format!("need sbar <= d and n > sbar, got sbar = {sbar}")));
    }
    Ok(())
}

fn penalized(stats: &SampleStats, s: &IndexSet, t: &IndexSet, beta_min: f64, tau: f64) -> Result<(ScorePair, ScorePair)> {
    let (a, b) = pair_scores(stats, s, t, beta_min)?;
    let pen = |sp: ScorePair, k: usize| ScorePair::new(sp.residual_term, sp.violation_term + tau * k as f64);
    Ok((pen(a, s.len()), pen(b, t.len())))
}

/// Penalized comparison of supports of possibly different sizes; ties go to `s_cand`.
pub fn compare_unknown(data: &Dataset, s_cand: &IndexSet, t_cand: &IndexSet, theta: &ThetaSpec, tau: f64) -> Result<UnknownOutcome> {
    theta.validate()?;
    let stats = SampleStats::new(data);
    check_unknown(&stats, s_cand.len().max(t_cand.len()), tau)?;
    if s_cand == t_cand {
        return Err(Error::InvalidArgument("compare needs distinct candidates".into()));
    }
    s_cand.check_bound(stats.d())?;
    t_cand.check_bound(stats.d())?;
    let scores = penalized(&stats, s_cand, t_cand, theta.beta_min, tau)?;
    let winner = if scores.0.total <= scores.1.total { s_cand.clone() } else { t_cand.clone() };
    Ok(UnknownOutcome { winner, scores })
}

/// klBSS over all supports of size `0..=sbar`.
///
/// Full-mode vote ties go to the smaller penalized residual
/// `‖Π_S^⊥Y‖²/(n−|S|) + τ|S|`, then the smaller set.
pub fn klbss_unknown(data: &Dataset, sbar: usize, theta: &ThetaSpec, tau: f64, mode: TournamentMode, seed: u64) -> Result<IndexSet> {
    klbss_unknown_stats(&SampleStats::new(data), sbar, theta, tau, mode, seed)
}

pub(crate) fn klbss_unknown_stats(
    stats: &SampleStats,
    sbar: usize,
    theta: &ThetaSpec,
    tau: f64,
    mode: TournamentMode,
    seed: u64,
) -> Result<IndexSet> {
    theta.validate()?;
    check_unknown(stats, sbar, tau)?;
    let score = |a: &IndexSet, b: &IndexSet| penalized(stats, a, b, theta.beta_min, tau);
    match mode {
        TournamentMode::Simple => {
            let mut cands = candidates_up_to(stats.d(), sbar, MAX_BSS_CANDIDATES)?;
            cands.shuffle(&mut rng_from_seed(mix(seed, domain::ORDER)));
            tournament(cands, score)
        }
        TournamentMode::Full => {
            let cands = candidates_up_to(stats.d(), sbar, MAX_FULL_CANDIDATES)?;
            let votes = vote_counts(&cands, score)?;
            vote_winner(cands, &votes, |c| bssu_score(stats, c, tau))
        }
    }
}

fn bssu_score(stats: &SampleStats, cand: &IndexSet, tau: f64) -> Result<f64> {
    Ok(stats.rss(cand)? / (stats.n - cand.len()) as f64 + tau * cand.len() as f64)
}

/// Argmin of `‖Π_S^⊥Y‖²/(n−|S|) + τ|S|` over `|S| ≤ sbar`; ties go to the smallest set.
pub fn bssu(data: &Dataset, sbar: usize, tau: f64) -> Result<IndexSet> {
    bssu_stats(&SampleStats::new(data), sbar, tau)
}

pub(crate) fn bssu_stats(stats: &SampleStats, sbar: usize, tau: f64) -> Result<IndexSet> {
    check_unknown(stats, sbar, tau)?;
    let mut best: Option<(f64, IndexSet)> = None;
    for cand in candidates_up_to(stats.d(), sbar, MAX_BSS_CANDIDATES)? {
        let v = bssu_score(stats, &cand, tau)?;
        let replace = match &best {
            None => true,
            Some((bv, bs)) => v < *bv || (v == *bv && cand < *bs),
        };
        if replace {
            best = Some((v, cand));
        }
    }
    Ok(best.expect("empty set is always a candidate").1)
}
