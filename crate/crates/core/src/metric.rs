//! Diagonal metric selection for the dual problem.
//!
//! The dual condition number under a scaling `E` is
//! `λmax(E A H⁻¹ Aᵀ E) / λmin(E A L⁻¹ Aᵀ E)`. When the dual is not strongly
//! convex the pseudo condition number `λmax / λmin>0` of `E A Q† Aᵀ E` (or of
//! `E A P₁₁ Aᵀ E` with equality constraints) is used instead. `E` is found by
//! iterated symmetric diagonal equilibration.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, DiagonalMetric, Matrix, SpectralSummary};
use crate::rates::metric_spectrum;

/// Relative threshold below which eigenvalues count as zero.
pub const PSEUDO_ZERO_TOL: f64 = 1e-9;

/// Default number of equilibration sweeps.
pub const DEFAULT_SWEEPS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricMode {
    Exact,
    HeuristicPinv,
    HeuristicP11,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricObjective {
    pub numerator: f64,
    pub denominator: f64,
    pub value: f64,
    pub mode: MetricMode,
}

impl MetricObjective {
    fn new(numerator: f64, denominator: f64, mode: MetricMode) -> Result<Self> {
        if !(denominator > 0.0) {
            return Err(Error::ZeroSpectrum);
        }
        Ok(MetricObjective {
            numerator,
            denominator,
            value: numerator / denominator,
            mode,
        })
    }
}

/// Whether the smallest eigenvalue must be strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectMode {
    Exact,
    Heuristic,
}

/// `λmax(E A H⁻¹ Aᵀ E) / λmin(E A L⁻¹ Aᵀ E)`.
pub fn dual_condition_number(e: &DiagonalMetric, a: &Matrix, h: &Matrix, l: &Matrix) -> Result<MetricObjective> {
    check_dim("metric dimension", a.rows(), e.dim())?;
    linalg::smallest_singular_value(a)?;
    let hi = metric_spectrum(e, a, h)?;
    let lo = metric_spectrum(e, a, l)?;
    MetricObjective::new(hi.lambda_max, lo.lambda_min, MetricMode::Exact)
}

/// `λmax / λmin>0` of `E A Q† Aᵀ E`, with `Q†` given as a linear map.
pub fn pseudo_condition_number<F>(e: &DiagonalMetric, a: &Matrix, qdag: F, zero_tol: f64) -> Result<MetricObjective>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    check_dim("metric dimension", a.rows(), e.dim())?;
    let s = sandwich(a, qdag);
    let summary = linalg::spectral_summary_dense(&e.congruence(&s), zero_tol)?;
    pseudo_objective(&summary, MetricMode::HeuristicPinv)
}

/// `A M Aᵀ` for a symmetric linear map `M`, symmetrized.
fn sandwich<F>(a: &Matrix, m: F) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let at = a.transpose();
    let p = a.rows();
    let mut s = DMatrix::zeros(p, p);
    let mut unit = vec![0.0; p];
    for j in 0..p {
        unit[j] = 1.0;
        let col = a.mul_vec(&m(&at.mul_vec(&unit)));
        unit[j] = 0.0;
        for i in 0..p {
            s[(i, j)] = col[i];
        }
    }
    (&s + s.transpose()) * 0.5
}

fn pseudo_objective(s: &SpectralSummary, mode: MetricMode) -> Result<MetricObjective> {
    let min_pos = s.lambda_min_pos.ok_or(Error::ZeroSpectrum)?;
    MetricObjective::new(s.lambda_max, min_pos, mode)
}

fn objective_of(s: &DMatrix<f64>, e: &DiagonalMetric, mode: SelectMode) -> Result<f64> {
    let sum = linalg::spectral_summary_dense(&e.congruence(s), PSEUDO_ZERO_TOL)?;
    match mode {
        SelectMode::Exact => {
            if sum.lambda_min <= 0.0 {
                return Err(Error::RankDeficient {
                    rank: 0,
                    expected: s.nrows(),
                });
            }
            Ok(sum.lambda_max / sum.lambda_min)
        }
        SelectMode::Heuristic => Ok(sum.lambda_max / sum.lambda_min_pos.ok_or(Error::ZeroSpectrum)?),
    }
}

/// Iterated equilibration `Eᵢᵢ ← Eᵢᵢ / √‖(E S E)ᵢ‖∞` over `sweeps` passes.
/// Returns `E = I` if the result does not improve the condition number.
pub fn select_diagonal_metric(s: &DMatrix<f64>, mode: SelectMode, sweeps: usize) -> Result<DiagonalMetric> {
    let p = s.nrows();
    check_dim("metric matrix", p, s.ncols())?;
    if sweeps == 0 {
        return Err(Error::InvalidParameter("at least one equilibration sweep is required".into()));
    }
    for i in 0..p {
        if mode == SelectMode::Exact && (0..p).all(|j| s[(i, j)] == 0.0) {
            return Err(Error::RankDeficient { rank: 0, expected: p });
        }
    }
    let mut d = vec![1.0; p];
    for _ in 0..sweeps {
        for i in 0..p {
            let row = (0..p)
                .map(|j| (d[i] * s[(i, j)] * d[j]).abs())
                .fold(0.0, f64::max);
            if row > 0.0 && row.is_finite() {
                d[i] /= row.sqrt();
            }
        }
    }
    let identity = DiagonalMetric::identity(p);
    let candidate = DiagonalMetric::new(d)?;
    let base = objective_of(s, &identity, mode)?;
    match objective_of(s, &candidate, mode) {
        Ok(v) if v <= base => Ok(candidate),
        _ => Ok(identity),
    }
}

/// `1 / √(numerator · denominator)`.
pub fn gamma_from_metric(obj: &MetricObjective) -> f64 {
    1.0 / (obj.numerator * obj.denominator).sqrt()
}

/// Metric recommendation for `f = ½xᵀQx + ι{Lc x = b}` coupled through `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineCaseMetric {
    /// Objective of `E A P₁₁ Aᵀ E` at the selected `E`.
    pub objective: MetricObjective,
    /// Objective at `E = I`.
    pub unscaled: MetricObjective,
    pub metric: DiagonalMetric,
    pub gamma: f64,
}

/// Selects `E` for the pseudo condition number of `A P₁₁ Aᵀ`, where `P₁₁` is
/// the top-left block of `[Q Lcᵀ; Lc 0]⁻¹`.
pub fn heuristic_affine_case(q: &Matrix, lc: &Matrix, a: &Matrix) -> Result<AffineCaseMetric> {
    let lc = if lc.rows() == 0 { Matrix::zeros(0, q.rows()) } else { lc.clone() };
    let p11 = linalg::kkt_p11(q, &lc)?;
    check_dim("heuristic metric A columns", p11.rows(), a.cols())?;
    let p11d = p11.to_dense();
    let s = sandwich(a, |v| {
        (&p11d * nalgebra::DVector::from_column_slice(v)).iter().copied().collect()
    });
    let metric = select_diagonal_metric(&s, SelectMode::Heuristic, DEFAULT_SWEEPS)?;
    let unscaled = pseudo_objective(
        &linalg::spectral_summary_dense(&s, PSEUDO_ZERO_TOL)?,
        MetricMode::HeuristicP11,
    )?;
    let objective = pseudo_objective(
        &linalg::spectral_summary_dense(&metric.congruence(&s), PSEUDO_ZERO_TOL)?,
        MetricMode::HeuristicP11,
    )?;
    Ok(AffineCaseMetric {
        objective,
        unscaled,
        gamma: gamma_from_metric(&objective),
        metric,
    })
}

/// Serializable summary of a metric choice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub mode: MetricMode,
    #[serde(rename = "E")]
    pub e: Vec<f64>,
    pub lambda_max: f64,
    pub lambda_min: f64,
    pub condition_number: f64,
    pub gamma: f64,
}

impl MetricReport {
    pub fn new(metric: &DiagonalMetric, obj: &MetricObjective) -> Self {
        MetricReport {
            mode: obj.mode,
            e: metric.diag().to_vec(),
            lambda_max: obj.numerator,
            lambda_min: obj.denominator,
            condition_number: obj.value,
            gamma: gamma_from_metric(obj),
        }
    }
}
