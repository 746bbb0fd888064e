//! Closed-form proximal operators.
//!
//! `prox_{γf}(z) = argmin_x { γ f(x) + ½‖x − z‖² }`. Every member of the
//! catalog has an exact minimizer: quadratics need one linear solve
//! (factorized once per γ), everything else is coordinate-wise or a
//! precomputed projection.

use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, DenseSolver, Matrix};

/// Feasibility tolerance used when evaluating indicator functions.
const INDICATOR_TOL: f64 = 1e-9;

/// Anything that can evaluate `prox_{γh}`.
pub trait ProxOperator {
    fn dim(&self) -> usize;
    fn prox(&self, gamma: f64, z: &[f64]) -> Result<Vec<f64>>;

    fn reflect(&self, gamma: f64, z: &[f64]) -> Result<Vec<f64>> {
        let p = self.prox(gamma, z)?;
        Ok(p.iter().zip(z).map(|(p, z)| 2.0 * p - z).collect())
    }
}

/// A step size and the point at which the prox is evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxQuery {
    gamma: f64,
    point: Vec<f64>,
}

impl ProxQuery {
    pub fn new(gamma: f64, point: Vec<f64>) -> Result<Self> {
        check_gamma(gamma)?;
        Ok(ProxQuery { gamma, point })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }
}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("step size must be positive and finite, got {gamma}")))
    }
}

/// Single-entry factorization cache keyed by the exact bits of γ.
#[derive(Debug, Default)]
pub(crate) struct GammaCache(Mutex<Option<(u64, Arc<DenseSolver>)>>);

impl Clone for GammaCache {
    fn clone(&self) -> Self {
        GammaCache::default()
    }
}

impl GammaCache {
    pub(crate) fn get_or_build(
        &self,
        gamma: f64,
        build: impl FnOnce() -> Result<DenseSolver>,
    ) -> Result<Arc<DenseSolver>> {
        let key = gamma.to_bits();
        let mut slot = self.0.lock().expect("factorization cache poisoned");
        if let Some((k, solver)) = slot.as_ref() {
            if *k == key {
                return Ok(Arc::clone(solver));
            }
        }
        let solver = Arc::new(build()?);
        *slot = Some((key, Arc::clone(&solver)));
        Ok(solver)
    }
}

/// `½ xᵀQx + qᵀx` with `Q` symmetric psd.
#[derive(Debug, Clone)]
pub struct QuadraticFn {
    hessian: DMatrix<f64>,
    linear: Vec<f64>,
    sigma: f64,
    beta: f64,
    cache: GammaCache,
}

impl QuadraticFn {
    fn new(hessian: &Matrix, linear: Vec<f64>) -> Result<Self> {
        let n = hessian.rows();
        check_dim("quadratic Hessian", n, hessian.cols())?;
        check_dim("quadratic linear term", n, linear.len())?;
        let dense = hessian.to_dense();
        let (sigma, beta) = match hessian.as_diagonal() {
            Some(d) => (
                d.iter().copied().fold(f64::INFINITY, f64::min),
                d.iter().copied().fold(0.0, f64::max),
            ),
            None => {
                let ev = linalg::symmetric_eigenvalues(&dense)?;
                (ev[0], ev[n - 1])
            }
        };
        if n > 0 && sigma < -1e-10 * beta.abs().max(1.0) {
            return Err(Error::NotPositiveDefinite("quadratic Hessian must be positive semidefinite"));
        }
        let sigma = if n == 0 { 0.0 } else { sigma.max(0.0) };
        Ok(QuadraticFn {
            hessian: dense,
            linear,
            sigma,
            beta,
            cache: GammaCache::default(),
        })
    }

    pub fn hessian(&self) -> &DMatrix<f64> {
        &self.hessian
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    fn prox(&self, gamma: f64, z: &[f64]) -> Result<Vec<f64>> {
        let n = self.linear.len();
        let solver = self.cache.get_or_build(gamma, || {
            let m = &self.hessian * gamma + DMatrix::identity(n, n);
            DenseSolver::spd(m, "γQ + I")
        })?;
        let rhs: Vec<f64> = z.iter().zip(&self.linear).map(|(z, q)| z - gamma * q).collect();
        Ok(solver.solve(&rhs))
    }
}

/// `½ xᵀQx + qᵀx + ι{Lx = b}` with `[Q Lᵀ; L 0]` nonsingular.
#[derive(Debug, Clone)]
pub struct AffineQuadraticFn {
    quad: QuadraticFn,
    constraint: DMatrix<f64>,
    rhs: Vec<f64>,
}

impl AffineQuadraticFn {
    pub fn quadratic(&self) -> &QuadraticFn {
        &self.quad
    }

    pub fn constraint(&self) -> &DMatrix<f64> {
        &self.constraint
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    fn prox(&self, gamma: f64, z: &[f64]) -> Result<Vec<f64>> {
        let n = self.quad.linear.len();
        let solver = self.quad.cache.get_or_build(gamma, || {
            let h = &self.quad.hessian * gamma + DMatrix::identity(n, n);
            DenseSolver::kkt(linalg::kkt_matrix(&h, &self.constraint, 0.0))
        })?;
        let mut rhs: Vec<f64> = z
            .iter()
            .zip(&self.quad.linear)
            .map(|(z, q)| z - gamma * q)
            .collect();
        rhs.extend_from_slice(&self.rhs);
        let mut sol = solver.solve(&rhs);
        sol.truncate(n);
        Ok(sol)
    }
}

/// `ι{Lx = b}`, projected onto through a precomputed pseudo-inverse.
#[derive(Debug, Clone)]
pub struct AffineSet {
    constraint: DMatrix<f64>,
    rhs: Vec<f64>,
    pinv: DMatrix<f64>,
    residual: f64,
}

impl AffineSet {
    fn new(l: &Matrix, b: Vec<f64>) -> Result<Self> {
        check_dim("affine set rhs", l.rows(), b.len())?;
        let dense = l.to_dense();
        let pinv = if dense.is_empty() {
            DMatrix::zeros(l.cols(), l.rows())
        } else {
            dense
                .clone()
                .pseudo_inverse(1e-12 * dense.amax().max(1.0))
                .map_err(|e| Error::Malformed(e.to_string()))?
        };
        let bv = DVector::from_column_slice(&b);
        let residual = (&dense * (&pinv * &bv) - &bv).norm() / (1.0 + bv.norm());
        Ok(AffineSet {
            constraint: dense,
            rhs: b,
            pinv,
            residual,
        })
    }

    fn project(&self, z: &[f64]) -> Result<Vec<f64>> {
        if self.residual > INDICATOR_TOL {
            return Err(Error::InfeasibleAffine {
                residual: self.residual,
            });
        }
        let zv = DVector::from_column_slice(z);
        let r = &self.constraint * &zv - DVector::from_column_slice(&self.rhs);
        Ok((zv - &self.pinv * r).iter().copied().collect())
    }
}

/// The catalog of functions with closed-form proximal operators.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "ProxFnRepr", into = "ProxFnRepr")]
pub enum ProxFn {
    Quadratic(QuadraticFn),
    /// Quadratic restricted to an affine subspace.
    AffineQuadratic(AffineQuadraticFn),
    Zero { dim: usize },
    /// `ι{x = 0}`.
    IndicatorZero { dim: usize },
    IndicatorAffine(AffineSet),
    Box { lo: Vec<f64>, hi: Vec<f64> },
    WeightedL1 { weights: Vec<f64> },
    /// `Σᵢ s·max(0, xᵢ − uᵢ, lᵢ − xᵢ)`.
    PwlPenalty { lower: Vec<f64>, upper: Vec<f64>, slope: f64 },
    /// Sum of functions acting on consecutive index blocks.
    Separable(Vec<ProxFn>),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ProxFnRepr {
    Quadratic {
        #[serde(rename = "Q")]
        hessian: Matrix,
        q: Vec<f64>,
    },
    AffineQuadratic {
        #[serde(rename = "Q")]
        hessian: Matrix,
        q: Vec<f64>,
        #[serde(rename = "L")]
        constraint: Matrix,
        b: Vec<f64>,
    },
    Zero {
        dim: usize,
    },
    IndicatorZero {
        dim: usize,
    },
    IndicatorAffine {
        #[serde(rename = "L")]
        constraint: Matrix,
        b: Vec<f64>,
    },
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    WeightedL1 {
        w: Vec<f64>,
    },
    PwlPenalty {
        l: Vec<f64>,
        u: Vec<f64>,
        s: f64,
    },
    Separable {
        parts: Vec<ProxFn>,
    },
}

impl TryFrom<ProxFnRepr> for ProxFn {
    type Error = Error;

    fn try_from(r: ProxFnRepr) -> Result<Self> {
        match r {
            ProxFnRepr::Quadratic { hessian, q } => ProxFn::quadratic(&hessian, q),
            ProxFnRepr::AffineQuadratic {
                hessian,
                q,
                constraint,
                b,
            } => ProxFn::affine_quadratic(&hessian, q, &constraint, b),
            ProxFnRepr::Zero { dim } => Ok(ProxFn::Zero { dim }),
            ProxFnRepr::IndicatorZero { dim } => Ok(ProxFn::IndicatorZero { dim }),
            ProxFnRepr::IndicatorAffine { constraint, b } => ProxFn::indicator_affine(&constraint, b),
            ProxFnRepr::Box { lo, hi } => ProxFn::boxed(lo, hi),
            ProxFnRepr::WeightedL1 { w } => ProxFn::weighted_l1(w),
            ProxFnRepr::PwlPenalty { l, u, s } => ProxFn::pwl_penalty(l, u, s),
            ProxFnRepr::Separable { parts } => Ok(ProxFn::Separable(parts)),
        }
    }
}

impl From<ProxFn> for ProxFnRepr {
    fn from(f: ProxFn) -> Self {
        match f {
            ProxFn::Quadratic(q) => ProxFnRepr::Quadratic {
                hessian: q.hessian.into(),
                q: q.linear,
            },
            ProxFn::AffineQuadratic(a) => ProxFnRepr::AffineQuadratic {
                hessian: a.quad.hessian.into(),
                q: a.quad.linear,
                constraint: a.constraint.into(),
                b: a.rhs,
            },
            ProxFn::Zero { dim } => ProxFnRepr::Zero { dim },
            ProxFn::IndicatorZero { dim } => ProxFnRepr::IndicatorZero { dim },
            ProxFn::IndicatorAffine(s) => ProxFnRepr::IndicatorAffine {
                constraint: s.constraint.into(),
                b: s.rhs,
            },
            ProxFn::Box { lo, hi } => ProxFnRepr::Box { lo, hi },
            ProxFn::WeightedL1 { weights } => ProxFnRepr::WeightedL1 { w: weights },
            ProxFn::PwlPenalty { lower, upper, slope } => ProxFnRepr::PwlPenalty {
                l: lower,
                u: upper,
                s: slope,
            },
            ProxFn::Separable(parts) => ProxFnRepr::Separable { parts },
        }
    }
}

impl ProxFn {
    pub fn quadratic(hessian: &Matrix, linear: Vec<f64>) -> Result<Self> {
        Ok(ProxFn::Quadratic(QuadraticFn::new(hessian, linear)?))
    }

    pub fn affine_quadratic(
        hessian: &Matrix,
        linear: Vec<f64>,
        constraint: &Matrix,
        rhs: Vec<f64>,
    ) -> Result<Self> {
        let quad = QuadraticFn::new(hessian, linear)?;
        check_dim("affine quadratic constraint columns", quad.linear.len(), constraint.cols())?;
        check_dim("affine quadratic rhs", constraint.rows(), rhs.len())?;
        let c = constraint.to_dense();
        DenseSolver::kkt(linalg::kkt_matrix(&quad.hessian, &c, 0.0))?;
        Ok(ProxFn::AffineQuadratic(AffineQuadraticFn {
            quad,
            constraint: c,
            rhs,
        }))
    }

    pub fn indicator_affine(constraint: &Matrix, rhs: Vec<f64>) -> Result<Self> {
        Ok(ProxFn::IndicatorAffine(AffineSet::new(constraint, rhs)?))
    }

    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        check_dim("box bounds", lo.len(), hi.len())?;
        if lo.iter().zip(&hi).any(|(l, h)| !(l <= h) || l.is_nan()) {
            return Err(Error::InvalidParameter("box requires lo <= hi".into()));
        }
        Ok(ProxFn::Box { lo, hi })
    }

    pub fn weighted_l1(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParameter("l1 weights must be finite and >= 0".into()));
        }
        Ok(ProxFn::WeightedL1 { weights })
    }

    pub fn pwl_penalty(lower: Vec<f64>, upper: Vec<f64>, slope: f64) -> Result<Self> {
        check_dim("penalty bounds", lower.len(), upper.len())?;
        if lower.iter().zip(&upper).any(|(l, u)| !(l <= u)) {
            return Err(Error::InvalidParameter("penalty requires l <= u".into()));
        }
        if !(slope >= 0.0) || !slope.is_finite() {
            return Err(Error::InvalidParameter("penalty slope must be finite and >= 0".into()));
        }
        Ok(ProxFn::PwlPenalty { lower, upper, slope })
    }

    pub fn dim(&self) -> usize {
        match self {
            ProxFn::Quadratic(q) => q.linear.len(),
            ProxFn::AffineQuadratic(a) => a.quad.linear.len(),
            ProxFn::Zero { dim } | ProxFn::IndicatorZero { dim } => *dim,
            ProxFn::IndicatorAffine(s) => s.constraint.ncols(),
            ProxFn::Box { lo, .. } => lo.len(),
            ProxFn::WeightedL1 { weights } => weights.len(),
            ProxFn::PwlPenalty { lower, .. } => lower.len(),
            ProxFn::Separable(parts) => parts.iter().map(ProxFn::dim).sum(),
        }
    }

    /// Strong convexity and smoothness constants `(σ, β)`, known for
    /// quadratics only.
    pub fn regularity(&self) -> Option<(f64, f64)> {
        match self {
            ProxFn::Quadratic(q) => Some((q.sigma, q.beta)),
            _ => None,
        }
    }

    /// Function value; indicators evaluate to `+∞` outside their set.
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            ProxFn::Quadratic(q) => quad_value(q, x),
            ProxFn::AffineQuadratic(a) => {
                let r = &a.constraint * DVector::from_column_slice(x)
                    - DVector::from_column_slice(&a.rhs);
                if r.amax() > INDICATOR_TOL {
                    f64::INFINITY
                } else {
                    quad_value(&a.quad, x)
                }
            }
            ProxFn::Zero { .. } => 0.0,
            ProxFn::IndicatorZero { .. } => {
                if x.iter().all(|v| v.abs() <= INDICATOR_TOL) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            ProxFn::IndicatorAffine(s) => {
                let r = &s.constraint * DVector::from_column_slice(x) - DVector::from_column_slice(&s.rhs);
                if r.amax() > INDICATOR_TOL {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            ProxFn::Box { lo, hi } => {
                let inside = x
                    .iter()
                    .zip(lo.iter().zip(hi))
                    .all(|(v, (l, h))| *v >= l - INDICATOR_TOL && *v <= h + INDICATOR_TOL);
                if inside {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            ProxFn::WeightedL1 { weights } => weights.iter().zip(x).map(|(w, v)| w * v.abs()).sum(),
            ProxFn::PwlPenalty { lower, upper, slope } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(v, (l, u))| slope * (v - u).max(l - v).max(0.0))
                .sum(),
            ProxFn::Separable(parts) => {
                let mut off = 0;
                let mut total = 0.0;
                for p in parts {
                    let d = p.dim();
                    total += p.value(&x[off..off + d]);
                    off += d;
                }
                total
            }
        }
    }

    /// `prox_{γf}(z)`.
    pub fn prox(&self, gamma: f64, z: &[f64]) -> Result<Vec<f64>> {
        check_gamma(gamma)?;
        check_dim("prox point", self.dim(), z.len())?;
        Ok(match self {
            ProxFn::Quadratic(q) => q.prox(gamma, z)?,
            ProxFn::AffineQuadratic(a) => a.prox(gamma, z)?,
            ProxFn::Zero { .. } => z.to_vec(),
            ProxFn::IndicatorZero { dim } => vec![0.0; *dim],
            ProxFn::IndicatorAffine(s) => s.project(z)?,
            ProxFn::Separable(parts) => {
                let mut out = Vec::with_capacity(z.len());
                let mut off = 0;
                for p in parts {
                    let d = p.dim();
                    out.extend(p.prox(gamma, &z[off..off + d])?);
                    off += d;
                }
                out
            }
            _ => {
                let gammas = vec![gamma; z.len()];
                self.prox_coordinatewise(&gammas, z)?
            }
        })
    }

    /// Whether `prox_coordinatewise` is available.
    pub fn is_separable(&self) -> bool {
        match self {
            ProxFn::Quadratic(q) => is_diagonal(&q.hessian),
            ProxFn::AffineQuadratic(_) | ProxFn::IndicatorAffine(_) => false,
            ProxFn::Separable(parts) => parts.iter().all(ProxFn::is_separable),
            _ => true,
        }
    }

    /// Prox with a separate step size per coordinate,
    /// `argmin_x Σᵢ fᵢ(xᵢ) + (xᵢ − zᵢ)² / (2γᵢ)`, for coordinate-separable
    /// functions.
    pub fn prox_coordinatewise(&self, gammas: &[f64], z: &[f64]) -> Result<Vec<f64>> {
        check_dim("prox point", self.dim(), z.len())?;
        check_dim("per-coordinate step sizes", z.len(), gammas.len())?;
        for &g in gammas {
            check_gamma(g)?;
        }
        let out = match self {
            ProxFn::Quadratic(q) => {
                if !is_diagonal(&q.hessian) {
                    return Err(Error::Capability {
                        subproblem: "coordinate-wise prox",
                        reason: "quadratic with non-diagonal Hessian".into(),
                    });
                }
                (0..z.len())
                    .map(|i| (z[i] - gammas[i] * q.linear[i]) / (1.0 + gammas[i] * q.hessian[(i, i)]))
                    .collect()
            }
            ProxFn::AffineQuadratic(_) | ProxFn::IndicatorAffine(_) => {
                return Err(Error::Capability {
                    subproblem: "coordinate-wise prox",
                    reason: "affine constraints couple coordinates".into(),
                })
            }
            ProxFn::Zero { .. } => z.to_vec(),
            ProxFn::IndicatorZero { dim } => vec![0.0; *dim],
            ProxFn::Box { lo, hi } => z
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(v, (l, h))| v.max(*l).min(*h))
                .collect(),
            ProxFn::WeightedL1 { weights } => z
                .iter()
                .zip(weights.iter().zip(gammas))
                .map(|(v, (w, g))| soft_threshold(*v, g * w))
                .collect(),
            ProxFn::PwlPenalty { lower, upper, slope } => z
                .iter()
                .zip(lower.iter().zip(upper).zip(gammas))
                .map(|(v, ((l, u), g))| pwl_prox(*v, *l, *u, g * slope))
                .collect(),
            ProxFn::Separable(parts) => {
                let mut out = Vec::with_capacity(z.len());
                let mut off = 0;
                for p in parts {
                    let d = p.dim();
                    out.extend(p.prox_coordinatewise(&gammas[off..off + d], &z[off..off + d])?);
                    off += d;
                }
                out
            }
        };
        Ok(out)
    }

    /// `R_{γf}(z) = 2 prox_{γf}(z) − z`.
    pub fn reflected_prox(&self, gamma: f64, z: &[f64]) -> Result<Vec<f64>> {
        ProxOperator::reflect(self, gamma, z)
    }

    /// `prox_{γf*}(z)` through the Moreau decomposition
    /// `z − γ prox_{f/γ}(z/γ)`.
    pub fn prox_conjugate(&self, gamma: f64, z: &[f64]) -> Result<Vec<f64>> {
        check_gamma(gamma)?;
        let scaled: Vec<f64> = z.iter().map(|v| v / gamma).collect();
        let p = self.prox(1.0 / gamma, &scaled)?;
        Ok(z.iter().zip(&p).map(|(z, p)| z - gamma * p).collect())
    }
}

fn quad_value(q: &QuadraticFn, x: &[f64]) -> f64 {
    let xv = DVector::from_column_slice(x);
    0.5 * xv.dot(&(&q.hessian * &xv)) + linalg::dot(&q.linear, x)
}

fn is_diagonal(m: &DMatrix<f64>) -> bool {
    (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| i == j || m[(i, j)] == 0.0))
}

pub(crate) fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Prox of `x ↦ s·max(0, x − u, l − x)` with `t = γs`.
pub(crate) fn pwl_prox(z: f64, l: f64, u: f64, t: f64) -> f64 {
    if z > u + t {
        z - t
    } else if z > u {
        u
    } else if z < l - t {
        z + t
    } else if z < l {
        l
    } else {
        z
    }
}

impl ProxOperator for ProxFn {
    fn dim(&self) -> usize {
        ProxFn::dim(self)
    }

    fn prox(&self, gamma: f64, z: &[f64]) -> Result<Vec<f64>> {
        ProxFn::prox(self, gamma, z)
    }
}

/// `prox_{γf}` at the query.
pub fn prox(f: &ProxFn, q: &ProxQuery) -> Result<Vec<f64>> {
    f.prox(q.gamma, &q.point)
}

/// `R_{γf}` at the query.
pub fn reflected_prox(f: &ProxFn, q: &ProxQuery) -> Result<Vec<f64>> {
    f.reflected_prox(q.gamma, &q.point)
}

/// `prox_{γf*}` at the query.
pub fn prox_conjugate(f: &ProxFn, q: &ProxQuery) -> Result<Vec<f64>> {
    f.prox_conjugate(q.gamma, &q.point)
}

/// The conjugate `f*` viewed as a prox-capable function.
#[derive(Debug, Clone, Copy)]
pub struct Conjugate<'a>(pub &'a ProxFn);

impl ProxOperator for Conjugate<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn prox(&self, gamma: f64, z: &[f64]) -> Result<Vec<f64>> {
        self.0.prox_conjugate(gamma, z)
    }
}

/// The smooth dual term `d₁(μ) = f*(−Aᵀμ) + ⟨c, μ⟩` for a strictly convex
/// quadratic `f`, i.e. `½ μᵀ(AQ⁻¹Aᵀ)μ + ⟨AQ⁻¹q + c, μ⟩` up to a constant.
#[derive(Debug, Clone)]
pub struct DualQuadratic {
    hessian: DMatrix<f64>,
    shift: Vec<f64>,
    cache: GammaCache,
}

impl DualQuadratic {
    pub fn new(f: &ProxFn, a: &Matrix, c: &[f64]) -> Result<Self> {
        let quad = match f {
            ProxFn::Quadratic(q) => q,
            _ => {
                return Err(Error::Capability {
                    subproblem: "dual prox",
                    reason: "the smooth dual term needs a quadratic primal function".into(),
                })
            }
        };
        let n = quad.linear.len();
        check_dim("dual prox A columns", n, a.cols())?;
        check_dim("dual prox c", a.rows(), c.len())?;
        let chol = nalgebra::Cholesky::new(quad.hessian.clone())
            .ok_or(Error::NotPositiveDefinite("dual prox requires a strongly convex quadratic"))?;
        let ad = a.to_dense();
        let q_inv_at = chol.solve(&ad.transpose());
        let hessian = &ad * &q_inv_at;
        let hessian = (&hessian + hessian.transpose()) * 0.5;
        let q_inv_q = chol.solve(&DVector::from_column_slice(&quad.linear));
        let shift = (&ad * q_inv_q)
            .iter()
            .zip(c)
            .map(|(a, c)| a + c)
            .collect();
        Ok(DualQuadratic {
            hessian,
            shift,
            cache: GammaCache::default(),
        })
    }

    /// `AQ⁻¹Aᵀ`.
    pub fn hessian(&self) -> &DMatrix<f64> {
        &self.hessian
    }
}

impl ProxOperator for DualQuadratic {
    fn dim(&self) -> usize {
        self.shift.len()
    }

    fn prox(&self, gamma: f64, z: &[f64]) -> Result<Vec<f64>> {
        check_gamma(gamma)?;
        check_dim("dual prox point", self.shift.len(), z.len())?;
        let p = self.shift.len();
        let solver = self.cache.get_or_build(gamma, || {
            DenseSolver::spd(&self.hessian * gamma + DMatrix::identity(p, p), "γAQ⁻¹Aᵀ + I")
        })?;
        let rhs: Vec<f64> = z.iter().zip(&self.shift).map(|(z, s)| z - gamma * s).collect();
        Ok(solver.solve(&rhs))
    }
}

/// Exact `prox_{γd₁}` for `d₁(μ) = f*(−Aᵀμ) + ⟨c, μ⟩`: solves
/// `(γAQ⁻¹Aᵀ + I)μ = z − γ(AQ⁻¹q + c)`.
pub fn dual_prox_d1(f: &ProxFn, a: &Matrix, c: &[f64], q: &ProxQuery) -> Result<Vec<f64>> {
    DualQuadratic::new(f, a, c)?.prox(q.gamma, &q.point)
}
