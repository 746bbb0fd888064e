//! Weighted Lasso `minimize ½‖Ax − b‖² + ‖Wx‖₁` split as
//! `f(x) = ½‖Ax − b‖²`, `g(y) = ‖Wy‖₁`, `x − y = 0`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::rng::SplitMix64;
use crate::admm::EqConstrainedProblem;
use crate::error::{Error, Result};
use crate::linalg::{DiagonalMetric, Matrix};
use crate::metric::{self, SelectMode};
use crate::prox::ProxFn;
use crate::rates::{dual_regularity, DualRegularity, Regularity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LassoSpec {
    pub n: usize,
    pub m: usize,
    pub nnz_per_row: usize,
    pub seed: u64,
}

impl Default for LassoSpec {
    fn default() -> Self {
        LassoSpec {
            n: 200,
            m: 300,
            nnz_per_row: 10,
            seed: 0,
        }
    }
}

impl LassoSpec {
    /// The small instance used in tests: 75 × 50.
    pub fn desk(seed: u64) -> Self {
        LassoSpec {
            n: 50,
            m: 75,
            nnz_per_row: 10,
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LassoInstance {
    pub spec: LassoSpec,
    /// The `m × n` data matrix.
    pub data: Matrix,
    pub rhs: Vec<f64>,
    pub weights: Vec<f64>,
    pub problem: EqConstrainedProblem,
    /// `(λmin, λmax)` of `AᵀA`; `None` when `A` has dependent columns.
    pub regularity: Option<Regularity>,
}

/// Draw order: for each row, `nnz_per_row` distinct columns then their
/// normal values; then `b`; then the weights.
pub fn gen_lasso(spec: &LassoSpec) -> Result<LassoInstance> {
    let LassoSpec { n, m, nnz_per_row, seed } = *spec;
    if n == 0 || m == 0 || nnz_per_row > n {
        return Err(Error::InvalidParameter(format!(
            "lasso needs n > 0, m > 0, nnz_per_row <= n; got n={n}, m={m}, nnz_per_row={nnz_per_row}"
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let mut triplets = Vec::with_capacity(m * nnz_per_row);
    for i in 0..m {
        for j in rng.sample_distinct(n, nnz_per_row) {
            triplets.push((i, j, rng.normal()));
        }
    }
    let data = Matrix::from_triplets(m, n, triplets)?;
    let rhs: Vec<f64> = (0..m).map(|_| rng.normal()).collect();
    let weights: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();

    let ad = data.to_dense();
    let ata = ad.transpose() * &ad;
    let ata = (&ata + ata.transpose()) * 0.5;
    let atb = data.tr_mul_vec(&rhs);
    let f = ProxFn::quadratic(&Matrix::from(ata), atb.iter().map(|v| -v).collect())?;
    let regularity = f.regularity().and_then(|(s, b)| {
        // treat numerically singular Gram matrices as uncertifiable
        if s > 1e-10 * b {
            Regularity::new(s, b).ok()
        } else {
            None
        }
    });
    let g = ProxFn::weighted_l1(weights.clone())?;
    let problem = EqConstrainedProblem::new(
        f,
        g,
        Matrix::identity(n),
        Matrix::from_diagonal(&vec![-1.0; n]),
        vec![0.0; n],
    )?;
    Ok(LassoInstance {
        spec: *spec,
        data,
        rhs,
        weights,
        problem,
        regularity,
    })
}

impl LassoInstance {
    /// `AᵀA`.
    pub fn gram(&self) -> Matrix {
        let ProxFn::Quadratic(q) = self.problem.f() else { unreachable!() };
        Matrix::from(q.hessian().clone())
    }

    /// Dual regularity for the constraint scaled by `metric`, taking
    /// `H = L = AᵀA`.
    pub fn dual_regularity(&self, metric: Option<&DiagonalMetric>) -> Result<DualRegularity> {
        let reg = self.regularity.ok_or(Error::RankDeficient {
            rank: 0,
            expected: self.spec.n,
        })?;
        let gram = self.gram();
        match metric {
            None => dual_regularity(&reg, self.problem.a(), None, None, None),
            Some(e) => dual_regularity(&reg, self.problem.a(), Some(e), Some(&gram), Some(&gram)),
        }
    }

    /// Equilibrates `(AᵀA)⁻¹`.
    pub fn select_metric(&self) -> Result<DiagonalMetric> {
        let gram = self.gram().to_dense();
        let n = gram.nrows();
        let inv = nalgebra::Cholesky::new(gram)
            .ok_or(Error::NotPositiveDefinite("lasso Gram matrix"))?
            .solve(&DMatrix::identity(n, n));
        let inv = (&inv + inv.transpose()) * 0.5;
        metric::select_diagonal_metric(&inv, SelectMode::Exact, metric::DEFAULT_SWEEPS)
    }
}
