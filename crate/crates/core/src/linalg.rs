//! Dense/sparse matrices and the spectral quantities used by the rate and
//! metric machinery: extreme eigenvalues, smallest singular values,
//! pseudo-inverses and KKT block inverses.
//!
//! Sparse matrices are stored as canonical triplets and only exploited in
//! matrix-vector products. Every spectral computation densifies first.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Default relative threshold below which an eigenvalue counts as zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-10;

const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    Dense(DMatrix<f64>),
    /// Sorted row-major, no duplicates.
    Sparse(Vec<(usize, usize, f64)>),
}

/// A real matrix, dense or sparse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct Matrix {
    rows: usize,
    cols: usize,
    storage: Storage,
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    triplets: Vec<(usize, usize, f64)>,
}

impl TryFrom<MatrixJson> for Matrix {
    type Error = Error;

    fn try_from(m: MatrixJson) -> Result<Self> {
        Matrix::from_triplets(m.rows, m.cols, m.triplets)
    }
}

impl From<Matrix> for MatrixJson {
    fn from(m: Matrix) -> Self {
        MatrixJson {
            rows: m.rows,
            cols: m.cols,
            triplets: m.triplets(),
        }
    }
}

impl From<DMatrix<f64>> for Matrix {
    fn from(m: DMatrix<f64>) -> Self {
        Matrix {
            rows: m.nrows(),
            cols: m.ncols(),
            storage: Storage::Dense(m),
        }
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DMatrix::zeros(rows, cols).into()
    }

    pub fn identity(n: usize) -> Self {
        DMatrix::identity(n, n).into()
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        DMatrix::from_diagonal(&DVector::from_column_slice(diag)).into()
    }

    /// Builds a dense matrix from row-major data.
    pub fn from_row_slice(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        check_dim("matrix data", rows * cols, data.len())?;
        let m = Matrix::from(DMatrix::from_row_slice(rows, cols, data));
        m.check_finite()?;
        Ok(m)
    }

    pub fn from_dense(m: DMatrix<f64>) -> Result<Self> {
        let m = Matrix::from(m);
        m.check_finite()?;
        Ok(m)
    }

    /// Builds a sparse matrix. Duplicate entries are summed.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        for &(i, j, v) in &triplets {
            if i >= rows || j >= cols {
                return Err(Error::Malformed(format!(
                    "triplet ({i}, {j}) outside {rows}x{cols} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::Malformed(format!("non-finite entry at ({i}, {j})")));
            }
        }
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut canon: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for (i, j, v) in triplets {
            match canon.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => canon.push((i, j, v)),
            }
        }
        Ok(Matrix {
            rows,
            cols,
            storage: Storage::Sparse(canon),
        })
    }

    fn check_finite(&self) -> Result<()> {
        if let Storage::Dense(m) = &self.storage {
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::Malformed("non-finite matrix entry".into()));
            }
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    /// Nonzero entries as `(row, col, value)`, row-major.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        match &self.storage {
            Storage::Sparse(t) => t.clone(),
            Storage::Dense(m) => {
                let mut out = Vec::new();
                for i in 0..m.nrows() {
                    for j in 0..m.ncols() {
                        let v = m[(i, j)];
                        if v != 0.0 {
                            out.push((i, j, v));
                        }
                    }
                }
                out
            }
        }
    }

    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Sparse(t) => t.iter().filter(|t| t.2 != 0.0).count(),
            Storage::Dense(m) => m.iter().filter(|v| **v != 0.0).count(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match &self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Sparse(t) => {
                let mut m = DMatrix::zeros(self.rows, self.cols);
                for &(i, j, v) in t {
                    m[(i, j)] += v;
                }
                m
            }
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match &self.storage {
            Storage::Dense(m) => m[(i, j)],
            Storage::Sparse(t) => t
                .binary_search_by_key(&(i, j), |&(r, c, _)| (r, c))
                .map(|k| t[k].2)
                .unwrap_or(0.0),
        }
    }

    /// `self * x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "mul_vec dimension");
        match &self.storage {
            Storage::Dense(m) => (0..self.rows)
                .map(|i| m.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
                .collect(),
            Storage::Sparse(t) => {
                let mut y = vec![0.0; self.rows];
                for &(i, j, v) in t {
                    y[i] += v * x[j];
                }
                y
            }
        }
    }

    /// `selfᵀ * y`.
    pub fn tr_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows, "tr_mul_vec dimension");
        match &self.storage {
            Storage::Dense(m) => (0..self.cols)
                .map(|j| m.column(j).iter().zip(y).map(|(a, b)| a * b).sum())
                .collect(),
            Storage::Sparse(t) => {
                let mut x = vec![0.0; self.cols];
                for &(i, j, v) in t {
                    x[j] += v * y[i];
                }
                x
            }
        }
    }

    pub fn transpose(&self) -> Matrix {
        match &self.storage {
            Storage::Dense(m) => m.transpose().into(),
            Storage::Sparse(t) => {
                Matrix::from_triplets(self.cols, self.rows, t.iter().map(|&(i, j, v)| (j, i, v)).collect())
                    .expect("transpose of a valid matrix")
            }
        }
    }

    /// `diag(d) * self`, keeping the storage kind.
    pub fn scale_rows(&self, d: &[f64]) -> Matrix {
        assert_eq!(d.len(), self.rows);
        match &self.storage {
            Storage::Dense(m) => {
                let mut m = m.clone();
                for (i, di) in d.iter().enumerate() {
                    m.row_mut(i).scale_mut(*di);
                }
                m.into()
            }
            Storage::Sparse(t) => Matrix {
                rows: self.rows,
                cols: self.cols,
                storage: Storage::Sparse(t.iter().map(|&(i, j, v)| (i, j, v * d[i])).collect()),
            },
        }
    }

    /// Returns the diagonal when the matrix is square and diagonal.
    pub fn as_diagonal(&self) -> Option<Vec<f64>> {
        if self.rows != self.cols {
            return None;
        }
        let mut d = vec![0.0; self.rows];
        for (i, j, v) in self.triplets() {
            if i != j {
                return None;
            }
            d[i] = v;
        }
        Some(d)
    }

    /// Frobenius-relative test for `self == selfᵀ`.
    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        self.rows == self.cols && asymmetry(&self.to_dense()) <= rel_tol
    }
}

fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let scale = m.amax().max(f64::MIN_POSITIVE);
    (m - m.transpose()).amax() / scale
}

/// Positive diagonal scaling `E`; the induced metric is `K = EᵀE`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DiagonalMetric {
    diag: Vec<f64>,
}

impl TryFrom<Vec<f64>> for DiagonalMetric {
    type Error = Error;

    fn try_from(diag: Vec<f64>) -> Result<Self> {
        DiagonalMetric::new(diag)
    }
}

impl From<DiagonalMetric> for Vec<f64> {
    fn from(m: DiagonalMetric) -> Self {
        m.diag
    }
}

impl DiagonalMetric {
    pub fn new(diag: Vec<f64>) -> Result<Self> {
        if let Some(bad) = diag.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "metric diagonal entries must be positive and finite, got {bad}"
            )));
        }
        Ok(DiagonalMetric { diag })
    }

    pub fn identity(n: usize) -> Self {
        DiagonalMetric { diag: vec![1.0; n] }
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn is_identity(&self) -> bool {
        self.diag.iter().all(|&d| d == 1.0)
    }

    pub fn scaled(&self, t: f64) -> Result<Self> {
        DiagonalMetric::new(self.diag.iter().map(|d| d * t).collect())
    }

    /// `E S Eᵀ` for square `S`.
    pub fn congruence(&self, s: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.diag.len();
        assert_eq!(s.nrows(), n);
        DMatrix::from_fn(n, n, |i, j| self.diag[i] * s[(i, j)] * self.diag[j])
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        v.iter().zip(&self.diag).map(|(a, e)| a * e).collect()
    }
}

/// Extreme eigenvalues of a symmetric positive semidefinite matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    pub lambda_max: f64,
    pub lambda_min: f64,
    /// Smallest eigenvalue classified as nonzero; `None` for the zero matrix.
    pub lambda_min_pos: Option<f64>,
    /// Absolute threshold used to classify eigenvalues as zero.
    pub tol_used: f64,
}

/// Sorted eigenvalues of a symmetric matrix.
pub fn symmetric_eigenvalues(s: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = s.nrows();
    if s.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "square matrix",
            expected: n,
            got: s.ncols(),
        });
    }
    let asym = asymmetry(s);
    if asym > SYMMETRY_TOL {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let sym = (s + s.transpose()) * 0.5;
    let max_iter = 1000 * n.max(10);
    match nalgebra::SymmetricEigen::try_new(sym.clone(), f64::EPSILON, max_iter) {
        Some(eig) => {
            let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            Ok(ev)
        }
        None => Err(Error::EigenNoConvergence {
            lambda_max_estimate: power_estimate(&sym),
        }),
    }
}

fn power_estimate(s: &DMatrix<f64>) -> f64 {
    let n = s.nrows();
    let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut lam = 0.0;
    for _ in 0..200 {
        let w = s * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        lam = v.dot(&w);
        v = w / norm;
    }
    lam
}

pub(crate) fn spectral_summary_dense(s: &DMatrix<f64>, zero_tol: f64) -> Result<SpectralSummary> {
    if !(zero_tol >= 0.0) {
        return Err(Error::InvalidParameter(format!("zero_tol must be >= 0, got {zero_tol}")));
    }
    let ev = symmetric_eigenvalues(s)?;
    let lambda_max = ev.last().copied().unwrap_or(0.0).max(0.0);
    let tol_used = zero_tol * lambda_max;
    let lambda_min_pos = ev.iter().copied().find(|&l| l > tol_used && l > 0.0);
    let raw_min = ev.first().copied().unwrap_or(0.0);
    let lambda_min = if raw_min <= tol_used { 0.0 } else { raw_min };
    Ok(SpectralSummary {
        lambda_max,
        lambda_min,
        lambda_min_pos,
        tol_used,
    })
}

/// Extreme eigenvalues of the symmetric psd matrix `s`; eigenvalues below
/// `zero_tol * lambda_max` count as zero.
pub fn spectral_summary(s: &Matrix, zero_tol: f64) -> Result<SpectralSummary> {
    spectral_summary_dense(&s.to_dense(), zero_tol)
}

fn numerical_rank(m: &DMatrix<f64>) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().singular_values();
    let smax = sv.max();
    let tol = smax * f64::EPSILON * (m.nrows().max(m.ncols()) as f64) * 10.0;
    sv.iter().filter(|&&s| s > tol).count()
}

/// Top-left `n x n` block of `[Q Lᵀ; L 0]⁻¹`.
pub fn kkt_p11(q: &Matrix, l: &Matrix) -> Result<Matrix> {
    let n = q.rows();
    check_dim("kkt_p11 Q columns", n, q.cols())?;
    let p = l.rows();
    if p > 0 {
        check_dim("kkt_p11 L columns", n, l.cols())?;
    }
    let kkt = kkt_matrix(&q.to_dense(), &l.to_dense(), 0.0);
    let size = n + p;
    let rank = numerical_rank(&kkt);
    if rank < size {
        return Err(Error::SingularKkt { rank, size });
    }
    let inv = kkt
        .lu()
        .try_inverse()
        .ok_or(Error::SingularKkt { rank, size })?;
    Ok(inv.view((0, 0), (n, n)).into_owned().into())
}

/// `[H Lᵀ; L -reg·I]` with `H` n×n and `L` p×n.
pub(crate) fn kkt_matrix(h: &DMatrix<f64>, l: &DMatrix<f64>, reg: f64) -> DMatrix<f64> {
    let n = h.nrows();
    let p = if l.ncols() == n { l.nrows() } else { 0 };
    let mut k = DMatrix::zeros(n + p, n + p);
    k.view_mut((0, 0), (n, n)).copy_from(h);
    if p > 0 {
        k.view_mut((n, 0), (p, n)).copy_from(l);
        k.view_mut((0, n), (n, p)).copy_from(&l.transpose());
        for i in 0..p {
            k[(n + i, n + i)] = -reg;
        }
    }
    k
}

/// Precomputed Moore-Penrose pseudo-inverse of a symmetric psd matrix.
#[derive(Debug, Clone)]
pub struct PseudoInverse {
    vectors: DMatrix<f64>,
    inv_values: Vec<f64>,
}

impl PseudoInverse {
    pub fn new(q: &Matrix, zero_tol: f64) -> Result<Self> {
        let dense = q.to_dense();
        let asym = asymmetry(&dense);
        if asym > SYMMETRY_TOL {
            return Err(Error::NotSymmetric { asymmetry: asym });
        }
        let sym = (&dense + dense.transpose()) * 0.5;
        let eig = nalgebra::SymmetricEigen::new(sym);
        let lmax = eig.eigenvalues.iter().fold(0.0_f64, |a, &b| a.max(b));
        let cutoff = zero_tol * lmax;
        let inv_values = eig
            .eigenvalues
            .iter()
            .map(|&l| if l > cutoff && l > 0.0 { 1.0 / l } else { 0.0 })
            .collect();
        Ok(PseudoInverse {
            vectors: eig.eigenvectors,
            inv_values,
        })
    }

    pub fn dim(&self) -> usize {
        self.inv_values.len()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let v = DVector::from_column_slice(v);
        let mut coeffs = self.vectors.tr_mul(&v);
        for (c, s) in coeffs.iter_mut().zip(&self.inv_values) {
            *c *= s;
        }
        (&self.vectors * coeffs).iter().copied().collect()
    }
}

/// `Q† v` for symmetric psd `Q`.
pub fn apply_pseudo_inverse(q: &Matrix, v: &[f64], zero_tol: f64) -> Result<Vec<f64>> {
    check_dim("apply_pseudo_inverse", q.rows(), v.len())?;
    Ok(PseudoInverse::new(q, zero_tol)?.apply(v))
}

/// Smallest singular value of a full-row-rank `A` (m ≤ n), i.e. the largest
/// `θ` with `‖Aᵀμ‖ ≥ θ‖μ‖` for all `μ`.
pub fn smallest_singular_value(a: &Matrix) -> Result<f64> {
    let (m, n) = (a.rows(), a.cols());
    if m == 0 {
        return Err(Error::InvalidParameter("matrix has no rows".into()));
    }
    if m > n {
        return Err(Error::RankDeficient { rank: n, expected: m });
    }
    let sv = a.to_dense().singular_values();
    let smax = sv.max();
    let cutoff = DEFAULT_ZERO_TOL * smax;
    let rank = sv.iter().filter(|&&s| s > cutoff).count();
    if rank < m || smax == 0.0 {
        return Err(Error::RankDeficient { rank, expected: m });
    }
    Ok(sv.min())
}

/// Largest eigenvalue modulus of a general square matrix.
pub fn spectral_radius(a: &Matrix) -> Result<f64> {
    check_dim("spectral_radius", a.rows(), a.cols())?;
    let ev = a.to_dense().complex_eigenvalues();
    Ok(ev.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// A reusable linear solver for a fixed square system.
#[derive(Debug, Clone)]
pub(crate) enum DenseSolver {
    Cholesky(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl DenseSolver {
    /// Cholesky for symmetric positive definite systems.
    pub fn spd(m: DMatrix<f64>, what: &'static str) -> Result<Self> {
        nalgebra::Cholesky::new(m)
            .map(DenseSolver::Cholesky)
            .ok_or(Error::NotPositiveDefinite(what))
    }

    /// LU for nonsingular indefinite systems such as KKT matrices.
    pub fn kkt(m: DMatrix<f64>) -> Result<Self> {
        let size = m.nrows();
        let rank = numerical_rank(&m);
        if rank < size {
            return Err(Error::SingularKkt { rank, size });
        }
        Ok(DenseSolver::Lu(m.lu()))
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let b = DVector::from_column_slice(rhs);
        let x = match self {
            DenseSolver::Cholesky(c) => c.solve(&b),
            DenseSolver::Lu(lu) => lu.solve(&b).expect("LU checked nonsingular at construction"),
        };
        x.iter().copied().collect()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
