//! Known-sparsity estimators: BSS, Compare, Simple/Full/Vanilla klBSS.

use rand::seq::SliceRandom;

use super::stats::SampleStats;
use super::{candidates_exact, ScorePair, MAX_BSS_CANDIDATES, MAX_FULL_CANDIDATES};
use crate::covkit::{submatrix, IndexSet};
use crate::error::{Error, Result};
use crate::rng::{domain, mix, rng_from_seed};
use crate::semgen::Dataset;
use crate::theta::{project_box, ThetaSpec};

/// Outcome of one pairwise comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareOutcome {
    pub winner: IndexSet,
    /// Scores of the first and second argument.
    pub scores: (ScorePair, ScorePair),
}

/// `‖Π^⊥_{R∪W} Y‖²/(n − |R∪W|) + min_{γ∈Θ_R} (γ̂−γ)ᵀ (X̃_RᵀX̃_R/(n − |W|)) (γ̂−γ)`.
pub(crate) fn side_score(stats: &SampleStats, r: &IndexSet, w: &IndexSet, beta_min: f64) -> Result<ScorePair> {
    let full = r.union(w);
    if full.len() >= stats.n {
        return Err(Error::RankDeficient);
    }
    let residual_term = stats.rss(&full)? / (stats.n - full.len()) as f64;
    let violation_term = if r.is_empty() || beta_min == 0.0 {
        0.0
    } else {
        let part = stats.partial(r, w)?;
        let m = part.gram / (stats.n - w.len()) as f64;
        project_box(&part.gamma_hat, &m, beta_min)?.value
    };
    Ok(ScorePair::new(residual_term, violation_term))
}

/// Scores of `s` and `t` against each other.
pub(crate) fn pair_scores(stats: &SampleStats, s: &IndexSet, t: &IndexSet, beta_min: f64) -> Result<(ScorePair, ScorePair)> {
    let w = s.intersection(t);
    let left = side_score(stats, &s.difference(t), &w, beta_min)?;
    let right = side_score(stats, &t.difference(s), &w, beta_min)?;
    Ok((left, right))
}

fn check_known(stats: &SampleStats, s: usize) -> Result<()> {
    if s == 0 || s > stats.d() {
        return Err(Error::InvalidArgument(format!("sparsity {s} must lie in 1..={}", stats.d())));
    }
    if stats.n <= s {
        return Err(Error::InvalidArgument(format!("need n > s, got n = {}, s = {s}", stats.n)));
    }
    Ok(())
}

/// Residual argmin over all size-`s` supports; ties go to the smallest set.
pub fn bss(data: &Dataset, s: usize) -> Result<IndexSet> {
    bss_stats(&SampleStats::new(data), s)
}

pub(crate) fn bss_stats(stats: &SampleStats, s: usize) -> Result<IndexSet> {
    check_known(stats, s)?;
    let mut best: Option<(f64, IndexSet)> = None;
    for cand in candidates_exact(stats.d(), s, MAX_BSS_CANDIDATES)? {
        let rss = stats.rss(&cand)?;
        if best.as_ref().is_none_or(|(b, _)| rss < *b) {
            best = Some((rss, cand));
        }
    }
    Ok(best.expect("at least one candidate").1)
}

/// Pairwise comparison; an exact score tie goes to `s_cand`.
pub fn compare(data: &Dataset, s_cand: &IndexSet, t_cand: &IndexSet, theta: &ThetaSpec) -> Result<CompareOutcome> {
    theta.validate()?;
    let stats = SampleStats::new(data);
    if s_cand.len() != t_cand.len() || s_cand == t_cand {
        return Err(Error::InvalidArgument("compare needs distinct candidates of equal size".into()));
    }
    s_cand.check_bound(stats.d())?;
    t_cand.check_bound(stats.d())?;
    check_known(&stats, s_cand.len())?;
    let scores = pair_scores(&stats, s_cand, t_cand, theta.beta_min)?;
    let winner = if scores.0.total <= scores.1.total { s_cand.clone() } else { t_cand.clone() };
    Ok(CompareOutcome { winner, scores })
}

/// Sequential tournament over a seeded shuffle of all size-`s` supports.
pub fn simple_klbss(data: &Dataset, s: usize, theta: &ThetaSpec, seed: u64) -> Result<IndexSet> {
    simple_klbss_stats(&SampleStats::new(data), s, theta, seed)
}

pub(crate) fn simple_klbss_stats(stats: &SampleStats, s: usize, theta: &ThetaSpec, seed: u64) -> Result<IndexSet> {
    theta.validate()?;
    check_known(stats, s)?;
    let mut cands = candidates_exact(stats.d(), s, MAX_BSS_CANDIDATES)?;
    cands.shuffle(&mut rng_from_seed(mix(seed, domain::ORDER)));
    tournament(cands, |a, b| pair_scores(stats, a, b, theta.beta_min))
}

/// Keeps the incumbent unless the challenger scores strictly lower.
pub(crate) fn tournament<F>(cands: Vec<IndexSet>, mut scores: F) -> Result<IndexSet>
where
    F: FnMut(&IndexSet, &IndexSet) -> Result<(ScorePair, ScorePair)>,
{
    let mut iter = cands.into_iter();
    let mut current = iter.next().ok_or_else(|| Error::InvalidArgument("no candidates".into()))?;
    for challenger in iter {
        let (inc, ch) = scores(&current, &challenger)?;
        if ch.total < inc.total {
            current = challenger;
        }
    }
    Ok(current)
}

/// Vote count over all ordered pairs; each candidate's score in `Compare(S,T)`
/// depends only on the unordered pair, so each pair is scored once and an
/// exact tie awards a vote to both sides.
pub(crate) fn vote_counts<F>(cands: &[IndexSet], mut scores: F) -> Result<Vec<usize>>
where
    F: FnMut(&IndexSet, &IndexSet) -> Result<(ScorePair, ScorePair)>,
{
    let mut votes = vec![0usize; cands.len()];
    for i in 0..cands.len() {
        for j in (i + 1)..cands.len() {
            let (a, b) = scores(&cands[i], &cands[j])?;
            if a.total <= b.total {
                votes[i] += 1;
            }
            if b.total <= a.total {
                votes[j] += 1;
            }
        }
    }
    Ok(votes)
}

/// Argmax of votes; ties by smaller `key`, then by the smaller set.
pub(crate) fn vote_winner(cands: Vec<IndexSet>, votes: &[usize], key: impl Fn(&IndexSet) -> Result<f64>) -> Result<IndexSet> {
    let top = *votes.iter().max().ok_or_else(|| Error::InvalidArgument("no candidates".into()))?;
    let mut best: Option<(f64, IndexSet)> = None;
    for (cand, &v) in cands.into_iter().zip(votes) {
        if v != top {
            continue;
        }
        let k = key(&cand)?;
        let replace = match &best {
            None => true,
            Some((bk, bs)) => k < *bk || (k == *bk && cand < *bs),
        };
        if replace {
            best = Some((k, cand));
        }
    }
    Ok(best.expect("top vote holder exists").1)
}

/// All-pairs tournament over size-`s` supports.
pub fn full_klbss(data: &Dataset, s: usize, theta: &ThetaSpec) -> Result<IndexSet> {
    full_klbss_stats(&SampleStats::new(data), s, theta)
}

pub(crate) fn full_klbss_stats(stats: &SampleStats, s: usize, theta: &ThetaSpec) -> Result<IndexSet> {
    theta.validate()?;
    check_known(stats, s)?;
    let cands = candidates_exact(stats.d(), s, MAX_FULL_CANDIDATES)?;
    let votes = vote_counts(&cands, |a, b| pair_scores(stats, a, b, theta.beta_min))?;
    vote_winner(cands, &votes, |c| stats.rss(c))
}

/// Score `‖Π_S^⊥Y‖²/(n−s) + min_{γ∈Θ_S} (γ̂−γ)ᵀ(X_SᵀX_S/n)(γ̂−γ)`.
pub fn vanilla_score(data: &Dataset, cand: &IndexSet, theta: &ThetaSpec) -> Result<ScorePair> {
    vanilla_score_stats(&SampleStats::new(data), cand, theta.beta_min)
}

pub(crate) fn vanilla_score_stats(stats: &SampleStats, cand: &IndexSet, beta_min: f64) -> Result<ScorePair> {
    let residual_term = stats.rss(cand)? / (stats.n - cand.len()) as f64;
    let violation_term = if beta_min == 0.0 {
        0.0
    } else {
        let part = stats.partial(cand, &IndexSet::empty())?;
        let m = submatrix(&stats.xtx, cand.as_slice(), cand.as_slice()) / stats.n as f64;
        project_box(&part.gamma_hat, &m, beta_min)?.value
    };
    Ok(ScorePair::new(residual_term, violation_term))
}

/// Argmin of the vanilla score; ties go to the smallest set.
pub fn vanilla_klbss(data: &Dataset, s: usize, theta: &ThetaSpec) -> Result<IndexSet> {
    vanilla_klbss_stats(&SampleStats::new(data), s, theta)
}

pub(crate) fn vanilla_klbss_stats(stats: &SampleStats, s: usize, theta: &ThetaSpec) -> Result<IndexSet> {
    theta.validate()?;
    check_known(stats, s)?;
    let mut best: Option<(f64, IndexSet)> = None;
    for cand in candidates_exact(stats.d(), s, MAX_BSS_CANDIDATES)? {
        let score = vanilla_score_stats(stats, &cand, theta.beta_min)?.total;
        if best.as_ref().is_none_or(|(b, _)| score < *b) {
            best = Some((score, cand));
        }
    }
    Ok(best.expect("at least one candidate").1)
}
