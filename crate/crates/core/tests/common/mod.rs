//! Independent reference implementations used as oracles. Nothing here calls
//! the factorization or projection code under test.
#![allow(dead_code)]

use klbss::{DMatrix, DVector, IndexSet, SymMatrix};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `AᵀA + ridge·I` for a Gaussian `A`.
pub fn random_pd(d: usize, ridge: f64, rng: &mut ChaCha8Rng) -> SymMatrix {
    let a = DMatrix::from_fn(d + 2, d, |_, _| rng.random_range(-1.0..1.0));
    SymMatrix::new(a.tr_mul(&a) + DMatrix::identity(d, d) * ridge).unwrap()
}

pub fn dense_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.clone().try_inverse().expect("invertible")
}

pub fn sub(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// `Σ_SS − Σ_ST Σ_TT⁻¹ Σ_TS` through an explicit inverse.
pub fn schur_by_inverse(sigma: &DMatrix<f64>, s: &[usize], t: &[usize]) -> DMatrix<f64> {
    if t.is_empty() {
        return sub(sigma, s, s);
    }
    sub(sigma, s, s) - sub(sigma, s, t) * dense_inverse(&sub(sigma, t, t)) * sub(sigma, t, s)
}

/// Conditional covariance as the inverse of the `S` block of the inverse of `Σ_{S∪T}`.
pub fn schur_by_precision(sigma: &DMatrix<f64>, s: &[usize], t: &[usize]) -> DMatrix<f64> {
    let all: Vec<usize> = s.iter().chain(t).copied().collect();
    let prec = dense_inverse(&sub(sigma, &all, &all));
    let k = s.len();
    dense_inverse(&prec.view((0, 0), (k, k)).into_owned())
}

/// Columns of `x` selected by `cols`.
pub fn columns(x: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(x.nrows(), cols.len(), |i, j| x[(i, cols[j])])
}

/// Residual of `y` on `x` via SVD least squares.
pub fn residual_svd(x: &DMatrix<f64>, y: &DVector<f64>) -> DVector<f64> {
    if x.ncols() == 0 {
        return y.clone();
    }
    let coef = x.clone().svd(true, true).solve(y, 1e-12).unwrap();
    y - x * coef
}

/// Residual of every column of `m` on `x`.
pub fn residual_matrix_svd(x: &DMatrix<f64>, m: &DMatrix<f64>) -> DMatrix<f64> {
    if x.ncols() == 0 {
        return m.clone();
    }
    let coef = x.clone().svd(true, true).solve(m, 1e-12).unwrap();
    m - x * coef
}

/// Minimum of `(g − γ)ᵀ M (g − γ)` over `|γ_j| ≥ b` on a grid of step `h`
/// covering `[−3b−|g|, 3b+|g|]` per axis, with `±b` added, for `r ≤ 2`.
pub fn grid_qp(g: &DVector<f64>, m: &DMatrix<f64>, b: f64, h: f64) -> f64 {
    let axis = |gj: f64| -> Vec<f64> {
        let hi = 3.0 * b + gj.abs();
        let steps = (2.0 * hi / h).ceil() as usize;
        let mut pts: Vec<f64> = (0..=steps).map(|k| -hi + k as f64 * h).filter(|v| v.abs() >= b).collect();
        pts.extend([b, -b]);
        pts
    };
    match g.len() {
        0 => 0.0,
        1 => axis(g[0]).into_iter().map(|a| m[(0, 0)] * (g[0] - a).powi(2)).fold(f64::INFINITY, f64::min),
        2 => {
            let (a0, a1) = (axis(g[0]), axis(g[1]));
            let (m00, m01, m11) = (m[(0, 0)], m[(0, 1)], m[(1, 1)]);
            let mut best = f64::INFINITY;
            for &x in &a0 {
                let u = g[0] - x;
                for &y in &a1 {
                    let v = g[1] - y;
                    best = best.min(m00 * u * u + 2.0 * m01 * u * v + m11 * v * v);
                }
            }
            best
        }
        _ => panic!("grid oracle supports r <= 2"),
    }
}

/// `min (g−γ)ᵀM(g−γ)` over `|γ_j| ≥ b` by projected coordinate descent from
/// every sign orthant, each polished until no coordinate moves.
pub fn orthant_descent_qp(g: &DVector<f64>, m: &DMatrix<f64>, b: f64) -> f64 {
    let r = g.len();
    if r == 0 {
        return 0.0;
    }
    let f = |v: &DVector<f64>| {
        let diff = g - v;
        (diff.transpose() * m * &diff)[(0, 0)]
    };
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << r) {
        let sign = |j: usize| if mask >> j & 1 == 1 { -1.0 } else { 1.0 };
        let mut v = DVector::from_fn(r, |j, _| (sign(j) * g[j]).max(b) * sign(j));
        for _ in 0..20_000 {
            let mut moved = 0.0_f64;
            for j in 0..r {
                // Unconstrained minimizer in coordinate j, then clamp into the orthant.
                let mut rest = 0.0;
                for k in 0..r {
                    if k != j {
                        rest += m[(j, k)] * (g[k] - v[k]);
                    }
                }
                let target = g[j] + rest / m[(j, j)];
                let new = (sign(j) * target).max(b) * sign(j);
                moved = moved.max((new - v[j]).abs());
                v[j] = new;
            }
            if moved < 1e-15 {
                break;
            }
        }
        best = best.min(f(&v));
    }
    best
}

pub fn set(v: &[usize]) -> IndexSet {
    IndexSet::new(v.iter().copied())
}
