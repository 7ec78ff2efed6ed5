//! The beta-min coefficient space and the projection QP behind the klBSS
//! violation term.
//!
//! [`project_qp`] minimizes `(γ̂ − γ)ᵀ M (γ̂ − γ)` over `|γ_j| ≥ β_min`. The
//! feasible set is a union of `2^r` orthants shifted by `β_min`; on the orthant
//! with signs `σ` the substitution `γ = σ∘(β_min·1 + z)` leaves a convex QP in
//! `z ≥ 0`, solved exactly by a Lawson–Hanson active-set iteration.

use nalgebra::{DMatrix, DVector};

use crate::covkit::SymMatrix;
use crate::error::{Error, Result};

/// KKT tolerance of the active-set solver, relative to the gradient scale.
pub const KKT_TOL: f64 = 1e-10;

/// Relative gap below which two sign patterns count as tied.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sparsity {
    Exact(usize),
    AtMost(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaSpec {
    pub d: usize,
    pub sparsity: Sparsity,
    pub beta_min: f64,
}

impl ThetaSpec {
    pub fn exact(d: usize, s: usize, beta_min: f64) -> Self {
        Self { d, sparsity: Sparsity::Exact(s), beta_min }
    }

    pub fn at_most(d: usize, sbar: usize, beta_min: f64) -> Self {
        Self { d, sparsity: Sparsity::AtMost(sbar), beta_min }
    }

    /// Floor-only space for standalone projections.
    pub fn floor(beta_min: f64) -> Self {
        Self { d: 0, sparsity: Sparsity::AtMost(usize::MAX), beta_min }
    }

    pub fn sparsity_level(&self) -> usize {
        match self.sparsity {
            Sparsity::Exact(s) | Sparsity::AtMost(s) => s,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta_min >= 0.0 && self.beta_min.is_finite()) {
            return Err(Error::InvalidArgument(format!("beta_min must be finite and nonnegative, got {}", self.beta_min)));
        }
        Ok(())
    }

    pub fn is_feasible(&self, gamma: &DVector<f64>) -> bool {
        gamma.iter().all(|g| g.abs() >= self.beta_min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub minimizer: DVector<f64>,
    pub value: f64,
    /// `+1` or `−1` per coordinate.
    pub active_pattern: Vec<i8>,
}

pub fn project_qp(gamma_hat: &DVector<f64>, m: &SymMatrix, theta: &ThetaSpec) -> Result<QpSolution> {
    project_box(gamma_hat, m.matrix(), theta.beta_min)
}

/// Same contract as [`project_qp`], applied to population quantities.
pub fn population_project(alpha_target: &DVector<f64>, m: &SymMatrix, theta: &ThetaSpec) -> Result<QpSolution> {
    project_box(alpha_target, m.matrix(), theta.beta_min)
}

/// Global minimizer of `(γ̂ − γ)ᵀ M (γ̂ − γ)` subject to `|γ_j| ≥ beta_min`.
///
/// Patterns are visited in lexicographic order with `+` before `−`; a later
/// pattern replaces the incumbent only if it is better beyond a relative
/// `1e-12` margin.
pub fn project_box(gamma_hat: &DVector<f64>, m: &DMatrix<f64>, beta_min: f64) -> Result<QpSolution> {
    let r = gamma_hat.len();
    if m.nrows() != r || m.ncols() != r {
        return Err(Error::DimensionMismatch { expected: r, got: m.nrows() });
    }
    if !(beta_min >= 0.0 && beta_min.is_finite()) {
        return Err(Error::InvalidArgument(format!("beta_min must be finite and nonnegative, got {beta_min}")));
    }
    if gamma_hat.iter().all(|g| g.abs() >= beta_min) {
        let active_pattern = gamma_hat.iter().map(|&g| if g < 0.0 { -1 } else { 1 }).collect();
        return Ok(QpSolution { minimizer: gamma_hat.clone(), value: 0.0, active_pattern });
    }
    if r > 24 {
        return Err(Error::InvalidArgument(format!("{r} coordinates give too many sign patterns")));
    }

    let mut best: Option<(f64, DVector<f64>, Vec<i8>)> = None;
    let mut signs = vec![1.0_f64; r];
    let mut h = DMatrix::<f64>::zeros(r, r);
    let mut c = DVector::<f64>::zeros(r);
    for pattern in 0u32..(1u32 << r) {
        for (j, sj) in signs.iter_mut().enumerate() {
            *sj = if pattern >> (r - 1 - j) & 1 == 0 { 1.0 } else { -1.0 };
        }
        // In z-coordinates the objective is (c − z)ᵀ H (c − z) with H = D M D, c = Dγ̂ − β_min.
        for i in 0..r {
            c[i] = signs[i] * gamma_hat[i] - beta_min;
            for j in 0..r {
                h[(i, j)] = signs[i] * signs[j] * m[(i, j)];
            }
        }
        let g = &h * &c;
        let z = nnls_gram(&h, &g);
        let resid = &c - &z;
        let value = resid.dot(&(&h * &resid)).max(0.0);
        let better = match &best {
            None => true,
            Some((incumbent, _, _)) => value < incumbent - TIE_TOL * incumbent.abs().max(f64::MIN_POSITIVE),
        };
        if better {
            let minimizer = DVector::from_fn(r, |j, _| signs[j] * (beta_min + z[j]));
            let pattern_signs = signs.iter().map(|&s| if s > 0.0 { 1 } else { -1 }).collect();
            best = Some((value, minimizer, pattern_signs));
        }
    }
    let (value, minimizer, active_pattern) = best.expect("at least one pattern");
    Ok(QpSolution { minimizer, value, active_pattern })
}

/// Lawson–Hanson iteration for `min ½ zᵀHz − gᵀz` over `z ≥ 0`, `H` PSD.
///
/// Equivalent to nonnegative least squares with normal equations `H`, `g`;
/// subproblems on the passive set use a semidefinite pseudo-solve.
pub(crate) fn nnls_gram(h: &DMatrix<f64>, g: &DVector<f64>) -> DVector<f64> {
    let r = g.len();
    let tol = KKT_TOL * (1.0 + g.amax());
    let mut z = DVector::<f64>::zeros(r);
    let mut passive = vec![false; r];
    let mut blocked = vec![false; r];
    let max_outer = 3 * r + 10;
    for _ in 0..max_outer {
        let w = g - h * &z;
        let candidate = (0..r)
            .filter(|&j| !passive[j] && !blocked[j] && w[j] > tol)
            .max_by(|&a, &b| w[a].total_cmp(&w[b]));
        let Some(j) = candidate else { break };
        passive[j] = true;
        let mut inner = 0;
        loop {
            inner += 1;
            let s = passive_solve(h, g, &passive);
            let all_positive = (0..r).filter(|&i| passive[i]).all(|i| s[i] > 0.0);
            if all_positive || inner > 3 * r + 10 {
                z = s;
                break;
            }
            // Step toward s until the first passive coordinate hits zero.
            let mut step = 1.0_f64;
            for i in (0..r).filter(|&i| passive[i] && s[i] <= 0.0) {
                let denom = z[i] - s[i];
                if denom > 0.0 {
                    step = step.min(z[i] / denom);
                } else {
                    step = 0.0;
                }
            }
            for i in 0..r {
                z[i] += step * (s[i] - z[i]);
            }
            let mut removed_new = false;
            for i in 0..r {
                if passive[i] && z[i] <= tol.min(1e-14) {
                    passive[i] = false;
                    z[i] = 0.0;
                    removed_new |= i == j;
                }
            }
            // A coordinate that cannot stay positive on entry would cycle; retire it.
            if removed_new && step == 0.0 {
                blocked[j] = true;
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
        blocked.iter_mut().enumerate().for_each(|(i, b)| *b &= !passive[i]);
    }
    z
}

/// Solves `H_PP x_P = g_P` with `x` zero off `P`.
fn passive_solve(h: &DMatrix<f64>, g: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let idx: Vec<usize> = (0..passive.len()).filter(|&i| passive[i]).collect();
    let hp = DMatrix::from_fn(idx.len(), idx.len(), |a, b| h[(idx[a], idx[b])]);
    let gp = DVector::from_fn(idx.len(), |a, _| g[idx[a]]);
    let xp = psd_solve(&hp, &gp);
    let mut x = DVector::zeros(passive.len());
    for (a, &i) in idx.iter().enumerate() {
        x[i] = xp[a];
    }
    x
}

/// LDLᵀ solve that drops directions whose pivot falls below `1e-12 · max diag`.
fn psd_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = b.len();
    let floor = crate::covkit::PIVOT_TOL * (0..n).fold(0.0_f64, |m, i| m.max(a[(i, i)].abs()));
    let mut l = DMatrix::<f64>::identity(n, n);
    let mut d = vec![0.0; n];
    for j in 0..n {
        let mut dj = a[(j, j)];
        for k in 0..j {
            dj -= l[(j, k)] * l[(j, k)] * d[k];
        }
        if dj <= floor {
            continue;
        }
        d[j] = dj;
        for i in (j + 1)..n {
            let mut v = a[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)] * d[k];
            }
            l[(i, j)] = v / dj;
        }
    }
    let mut x = b.clone();
    for i in 0..n {
        for k in 0..i {
            x[i] -= l[(i, k)] * x[k];
        }
    }
    for i in 0..n {
        x[i] = if d[i] > 0.0 { x[i] / d[i] } else { 0.0 };
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            x[i] -= l[(k, i)] * x[k];
        }
    }
    x
}

/// `sqrt(C · (ln(d−s) + ln(1/δ)) · σ² / ((n−s) σ_min²))`.
pub fn tune_beta_min(d: usize, s: usize, n: usize, delta: f64, sigma_min_sq: f64, sigma_sq: f64, constant: f64) -> Result<f64> {
    if n <= s || d <= s {
        return Err(Error::InvalidArgument("need n > s and d > s".into()));
    }
    if !(delta > 0.0 && delta < 1.0) || !(sigma_min_sq > 0.0) || constant < 0.0 {
        return Err(Error::InvalidArgument("need 0 < delta < 1, sigma_min_sq > 0, constant >= 0".into()));
    }
    let log_term = ((d - s) as f64).ln() + (1.0 / delta).ln();
    Ok((constant * log_term * sigma_sq / ((n - s) as f64 * sigma_min_sq)).sqrt())
}
