//! Dense small-matrix linear algebra.
//!
//! Everything here works on matrices of dimension at most a few dozen, so
//! storage is dense and factorizations are pivot-free LDLᵀ with an explicit
//! singularity threshold of [`PIVOT_TOL`] times the largest diagonal entry.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative pivot threshold below which a factorization is declared singular.
pub const PIVOT_TOL: f64 = 1e-12;

/// Strictly increasing list of 0-based variable indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct IndexSet {
    members: Vec<usize>,
}

impl IndexSet {
    /// Sorts and deduplicates.
    pub fn new(members: impl IntoIterator<Item = usize>) -> Self {
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        Self { members }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// `{lo, lo+1, …, hi-1}`.
    pub fn range(lo: usize, hi: usize) -> Self {
        Self { members: (lo..hi).collect() }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.members
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }

    pub fn max(&self) -> Option<usize> {
        self.members.last().copied()
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::new(self.iter().chain(other.iter()))
    }

    pub fn intersection(&self, other: &Self) -> Self {
        Self { members: self.iter().filter(|&i| other.contains(i)).collect() }
    }

    pub fn difference(&self, other: &Self) -> Self {
        Self { members: self.iter().filter(|&i| !other.contains(i)).collect() }
    }

    pub fn symmetric_difference(&self, other: &Self) -> Self {
        self.difference(other).union(&other.difference(self))
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.iter().all(|i| other.contains(i))
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.iter().all(|i| !other.contains(i))
    }

    /// Positions of `self`'s members inside `within`; every member must be present.
    pub fn positions_in(&self, within: &Self) -> Vec<usize> {
        self.iter()
            .map(|i| within.members.binary_search(&i).expect("member of superset"))
            .collect()
    }

    pub fn check_bound(&self, d: usize) -> Result<()> {
        match self.max() {
            Some(m) if m >= d => Err(Error::InvalidArgument(format!("index {m} out of range for d = {d}"))),
            _ => Ok(()),
        }
    }

    /// Image under a relabeling `perm[old] = new`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        Self::new(self.iter().map(|i| perm[i]))
    }
}

impl fmt::Display for IndexSet {
    /// `i|j|k`, empty string for the empty set.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (pos, i) in self.members.iter().enumerate() {
            if pos > 0 {
                f.write_str("|")?;
            }
            write!(f, "{i}")?;
        }
        Ok(())
    }
}

impl FromIterator<usize> for IndexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Self::new(iter)
    }
}

impl<const N: usize> From<[usize; N]> for IndexSet {
    fn from(members: [usize; N]) -> Self {
        Self::new(members)
    }
}

/// Dense symmetric matrix; symmetry is enforced on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    entries: DMatrix<f64>,
}

impl SymMatrix {
    /// Averages `m` with its transpose. Fails on non-square input.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
        }
        let sym = (&m + m.transpose()) * 0.5;
        Ok(Self { entries: sym })
    }

    pub fn identity(d: usize) -> Self {
        Self { entries: DMatrix::identity(d, d) }
    }

    pub fn from_fn(d: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let m = DMatrix::from_fn(d, d, |i, j| if i <= j { f(i, j) } else { f(j, i) });
        Self { entries: m }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    /// Principal submatrix on `s`.
    pub fn principal(&self, s: &IndexSet) -> SymMatrix {
        Self { entries: self.block(s, s) }
    }

    /// Rectangular block with rows `rows` and columns `cols`.
    pub fn block(&self, rows: &IndexSet, cols: &IndexSet) -> DMatrix<f64> {
        submatrix(&self.entries, rows.as_slice(), cols.as_slice())
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `D^{-1/2} Σ D^{-1/2}` with `D = diag(Σ)`.
    pub fn correlation(&self) -> Result<SymMatrix> {
        let d = self.dim();
        let scale: Vec<f64> = (0..d).map(|i| self.get(i, i)).collect();
        if scale.iter().any(|&v| v <= 0.0) {
            return Err(Error::InvalidArgument("zero-variance coordinate".into()));
        }
        let inv: Vec<f64> = scale.iter().map(|v| 1.0 / v.sqrt()).collect();
        Ok(Self::from_fn(d, |i, j| if i == j { 1.0 } else { self.get(i, j) * inv[i] * inv[j] }))
    }

    /// Quadratic form `vᵀ Σ v`.
    pub fn quad_form(&self, v: &DVector<f64>) -> f64 {
        v.dot(&(&self.entries * v))
    }
}

pub(crate) fn submatrix(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

pub(crate) fn subvector(v: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    DVector::from_fn(idx.len(), |i, _| v[idx[i]])
}

/// Pivot-free LDLᵀ factor of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct Ldl {
    /// Unit lower-triangular factor.
    pub l: DMatrix<f64>,
    pub d: Vec<f64>,
}

/// Raw LDLᵀ recursion; reports the first pivot failing `accept`.
fn ldl_raw(a: &DMatrix<f64>, accept: impl Fn(f64) -> bool) -> std::result::Result<Ldl, (usize, f64)> {
    let n = a.nrows();
    // Column `i` of `lt` is row `i` of `L`, so both inner products run over contiguous memory.
    let mut lt = DMatrix::<f64>::identity(n, n);
    let mut d = vec![0.0; n];
    let mut w = vec![0.0; n];
    for j in 0..n {
        let row_j = &lt.as_slice()[j * n..j * n + j];
        let mut dj = a[(j, j)];
        for k in 0..j {
            w[k] = row_j[k] * d[k];
            dj -= row_j[k] * w[k];
        }
        if !accept(dj) {
            return Err((j, dj));
        }
        d[j] = dj;
        for i in (j + 1)..n {
            let row_i = &lt.as_slice()[i * n..i * n + j];
            let mut v = a[(i, j)];
            for k in 0..j {
                v -= row_i[k] * w[k];
            }
            lt[(j, i)] = v / dj;
        }
    }
    Ok(Ldl { l: lt.transpose(), d })
}

fn max_diag(a: &DMatrix<f64>) -> f64 {
    (0..a.nrows()).fold(0.0_f64, |m, i| m.max(a[(i, i)].abs()))
}

impl Ldl {
    /// Factor with the singularity threshold `PIVOT_TOL · max diag`.
    pub fn factor(a: &DMatrix<f64>) -> Option<Ldl> {
        let floor = PIVOT_TOL * max_diag(a);
        ldl_raw(a, |p| p > floor && p.is_finite()).ok()
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let mut x = b.clone();
        self.solve_in_place(x.as_mut_slice());
        x
    }

    /// Solves `A X = B` column by column.
    pub fn solve_matrix(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let mut x = b.clone();
        for mut col in x.column_iter_mut() {
            self.solve_in_place(col.as_mut_slice());
        }
        x
    }

    #[allow(clippy::needless_range_loop)]
    fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let mut v = x[i];
            for k in 0..i {
                v -= self.l[(i, k)] * x[k];
            }
            x[i] = v;
        }
        for i in 0..n {
            x[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            let mut v = x[i];
            for k in (i + 1)..n {
                v -= self.l[(k, i)] * x[k];
            }
            x[i] = v;
        }
    }
}

/// `L · diag(D) · Lᵀ = Σ` with `L` unit lower-triangular.
pub fn ldl_decompose(sigma: &SymMatrix) -> Result<(DMatrix<f64>, Vec<f64>)> {
    ldl_raw(sigma.matrix(), |p| p > 0.0)
        .map(|f| (f.l, f.d))
        .map_err(|(index, pivot)| Error::NotPositiveDefinite { index, pivot })
}

/// Lower Cholesky factor `L` with `L Lᵀ = Σ`.
pub fn cholesky_lower(sigma: &SymMatrix) -> Result<DMatrix<f64>> {
    let (mut l, d) = ldl_decompose(sigma)?;
    for (j, dj) in d.iter().enumerate() {
        let s = dj.sqrt();
        for i in j..l.nrows() {
            l[(i, j)] *= s;
        }
    }
    Ok(l)
}

/// `Σ_ss − Σ_st Σ_tt⁻¹ Σ_ts`.
pub fn conditional_covariance(sigma: &SymMatrix, s: &IndexSet, t: &IndexSet) -> Result<SymMatrix> {
    let ss = sigma.block(s, s);
    if t.is_empty() {
        return Ok(SymMatrix { entries: ss });
    }
    let st = sigma.block(s, t);
    let tt = Ldl::factor(&sigma.block(t, t)).ok_or(Error::SingularConditioning)?;
    let correction = &st * tt.solve_matrix(&st.transpose());
    SymMatrix::new(ss - correction)
}

/// `Σ_ab − Σ_at Σ_tt⁻¹ Σ_tb`, the conditional cross-covariance.
pub fn conditional_cross(sigma: &SymMatrix, a: &IndexSet, b: &IndexSet, t: &IndexSet) -> Result<DMatrix<f64>> {
    let ab = sigma.block(a, b);
    if t.is_empty() {
        return Ok(ab);
    }
    let tt = Ldl::factor(&sigma.block(t, t)).ok_or(Error::SingularConditioning)?;
    let tb = sigma.block(t, b);
    Ok(ab - sigma.block(a, t) * tt.solve_matrix(&tb))
}

/// Smallest eigenvalue of a symmetric matrix; `+∞` for the empty matrix.
pub fn min_eigenvalue(sigma: &SymMatrix) -> f64 {
    if sigma.dim() == 0 {
        return f64::INFINITY;
    }
    sigma.matrix().clone().symmetric_eigenvalues().min()
}

/// Largest eigenvalue of a symmetric matrix; `−∞` for the empty matrix.
pub fn max_eigenvalue(sigma: &SymMatrix) -> f64 {
    if sigma.dim() == 0 {
        return f64::NEG_INFINITY;
    }
    sigma.matrix().clone().symmetric_eigenvalues().max()
}

/// Least-squares coefficients of `response` on the columns of `design`.
pub fn ols_fit(design: &DMatrix<f64>, response: &DVector<f64>) -> Result<DVector<f64>> {
    if design.nrows() != response.len() {
        return Err(Error::DimensionMismatch { expected: design.nrows(), got: response.len() });
    }
    if design.ncols() > design.nrows() {
        return Err(Error::RankDeficient);
    }
    let gram = design.tr_mul(design);
    let f = Ldl::factor(&gram).ok_or(Error::RankDeficient)?;
    Ok(f.solve(&design.tr_mul(response)))
}

/// `‖Π^⊥ response‖²` for the column span of `design_cols`.
pub fn residual_sq_norm(design_cols: &DMatrix<f64>, response: &DVector<f64>) -> Result<f64> {
    if design_cols.ncols() == 0 {
        return Ok(response.norm_squared());
    }
    let gamma = ols_fit(design_cols, response)?;
    Ok((response - design_cols * gamma).norm_squared())
}
