//! Lasso regularization path by cyclic coordinate descent.
//!
//! Objective `(1/2n)‖y − X̃b‖² + λ‖b‖₁` on columns scaled to unit second
//! moment (no intercept). The λ grid is log-spaced from
//! `λ_max = ‖X̃ᵀy‖_∞/n` down to `1e-3 · λ_max`, with warm starts.

use super::stats::SampleStats;
use crate::covkit::IndexSet;
use crate::error::{Error, Result};
use crate::semgen::Dataset;

/// Coordinate updates stop once no coefficient moves by this much.
pub const LASSO_TOL: f64 = 1e-7;
const LAMBDA_RATIO: f64 = 1e-3;
const MAX_SWEEPS: usize = 100_000;

/// Lasso fit along the path.
#[derive(Debug, Clone, PartialEq)]
pub struct LassoPath {
    pub lambdas: Vec<f64>,
    /// Coefficients on the standardized scale, one vector per λ.
    pub coefs: Vec<Vec<f64>>,
}

impl LassoPath {
    pub fn supports(&self) -> Vec<IndexSet> {
        self.coefs.iter().map(|b| (0..b.len()).filter(|&j| b[j] != 0.0).collect()).collect()
    }
}

fn soft_threshold(z: f64, lambda: f64) -> f64 {
    if z > lambda {
        z - lambda
    } else if z < -lambda {
        z + lambda
    } else {
        0.0
    }
}

pub fn lasso_fit_path(data: &Dataset, nlambda: usize) -> Result<LassoPath> {
    if data.n() < 2 || nlambda == 0 {
        return Err(Error::InvalidArgument("lasso needs n >= 2 and nlambda >= 1".into()));
    }
    let stats = SampleStats::new(data);
    let (n, d) = (stats.n as f64, stats.d());
    let scale: Vec<f64> = (0..d).map(|j| (stats.xtx[(j, j)] / n).sqrt()).collect();
    if scale.contains(&0.0) {
        return Err(Error::InvalidArgument("design has an all-zero column".into()));
    }
    let q = |i: usize, j: usize| stats.xtx[(i, j)] / (n * scale[i] * scale[j]);
    let c: Vec<f64> = (0..d).map(|j| stats.xty[j] / (n * scale[j])).collect();
    let lambda_max = c.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let lambdas: Vec<f64> = if nlambda == 1 {
        vec![lambda_max]
    } else {
        (0..nlambda)
            .map(|k| lambda_max * LAMBDA_RATIO.powf(k as f64 / (nlambda - 1) as f64))
            .collect()
    };

    let mut b = vec![0.0; d];
    // Gradient part `c_j − Σ_k q_jk b_k`, maintained incrementally.
    let mut resid_corr = c.clone();
    let mut coefs = Vec::with_capacity(nlambda);
    for &lambda in &lambdas {
        for _ in 0..MAX_SWEEPS {
            let mut max_change = 0.0_f64;
            for j in 0..d {
                let old = b[j];
                let qjj = q(j, j);
                let new = soft_threshold(resid_corr[j] + qjj * old, lambda) / qjj;
                if new != old {
                    let delta = new - old;
                    for (k, rc) in resid_corr.iter_mut().enumerate() {
                        *rc -= q(k, j) * delta;
                    }
                    b[j] = new;
                    max_change = max_change.max(delta.abs());
                }
            }
            if max_change < LASSO_TOL {
                break;
            }
        }
        coefs.push(b.clone());
    }
    Ok(LassoPath { lambdas, coefs })
}

/// Support at every λ on the path.
pub fn lasso_path(data: &Dataset, nlambda: usize) -> Result<Vec<IndexSet>> {
    Ok(lasso_fit_path(data, nlambda)?.supports())
}
