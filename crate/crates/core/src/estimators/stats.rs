//! Sufficient statistics `(XᵀX, XᵀY, YᵀY)` of a dataset.
//!
//! Every score used by the estimators is a function of these, so a dataset
//! is reduced once per estimator call and candidate evaluations cost
//! `O(s³)` instead of `O(n s²)`.

use nalgebra::{DMatrix, DVector};

use crate::covkit::{submatrix, subvector, IndexSet, Ldl};
use crate::error::{Error, Result};
use crate::semgen::Dataset;

#[derive(Debug, Clone)]
pub struct SampleStats {
    pub n: usize,
    pub xtx: DMatrix<f64>,
    pub xty: DVector<f64>,
    pub yty: f64,
}

/// Regression of `Y` on `X_R` after both are residualized on `X_W`.
#[derive(Debug, Clone)]
pub struct Partialled {
    /// `X̃_Rᵀ X̃_R`.
    pub gram: DMatrix<f64>,
    /// OLS coefficients `γ̂`.
    pub gamma_hat: DVector<f64>,
}

impl SampleStats {
    pub fn new(data: &Dataset) -> Self {
        Self { n: data.n(), xtx: data.x.tr_mul(&data.x), xty: data.x.tr_mul(&data.y), yty: data.y.norm_squared() }
    }

    pub fn d(&self) -> usize {
        self.xtx.nrows()
    }

    /// `‖Π_S^⊥ Y‖²`, clamped at zero.
    pub fn rss(&self, s: &IndexSet) -> Result<f64> {
        if s.is_empty() {
            return Ok(self.yty);
        }
        if s.len() >= self.n {
            return Err(Error::RankDeficient);
        }
        let gram = submatrix(&self.xtx, s.as_slice(), s.as_slice());
        let rhs = subvector(&self.xty, s.as_slice());
        let f = Ldl::factor(&gram).ok_or(Error::RankDeficient)?;
        Ok((self.yty - rhs.dot(&f.solve(&rhs))).max(0.0))
    }

    /// Gram matrix and OLS fit of `X_R` on `Y` with `X_W` partialled out.
    pub fn partial(&self, r: &IndexSet, w: &IndexSet) -> Result<Partialled> {
        let rr = submatrix(&self.xtx, r.as_slice(), r.as_slice());
        let ry = subvector(&self.xty, r.as_slice());
        let (gram, rhs) = if w.is_empty() {
            (rr, ry)
        } else {
            let fw = Ldl::factor(&submatrix(&self.xtx, w.as_slice(), w.as_slice())).ok_or(Error::RankDeficient)?;
            let wr = submatrix(&self.xtx, w.as_slice(), r.as_slice());
            let wy = subvector(&self.xty, w.as_slice());
            let gram = rr - wr.tr_mul(&fw.solve_matrix(&wr));
            let rhs = ry - wr.tr_mul(&fw.solve(&wy));
            (gram, rhs)
        };
        let gram = (&gram + gram.transpose()) * 0.5;
        let gamma_hat = if r.is_empty() {
            DVector::zeros(0)
        } else {
            Ldl::factor(&gram).ok_or(Error::RankDeficient)?.solve(&rhs)
        };
        Ok(Partialled { gram, gamma_hat })
    }
}
