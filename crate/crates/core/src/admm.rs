//! Relaxed ADMM with scaled dual variables for
//! `minimize f(x) + g(y) subject to Ax + By = c`.
//!
//! One iteration:
//!
//! ```text
//! x⁺  = argmin f(x) + γ/2 ‖Ax + By − c + u‖²
//! x_A = 2α Ax⁺ − (1 − 2α)(By − c)
//! y⁺  = argmin g(y) + γ/2 ‖x_A + By − c + u‖²
//! u⁺  = u + x_A + By⁺ − c
//! ```
//!
//! `α = ½` is plain ADMM. The iterate `z = γ(u − By)` follows relaxed
//! Douglas-Rachford on the dual, so rates are measured on `z`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, dist, norm, DenseSolver, DiagonalMetric, Matrix};
use crate::prox::{check_gamma, Conjugate, DualQuadratic, GammaCache, ProxFn};
use crate::splitting::{dr_step, DrConfig, SolveTrace};

/// `minimize f(x) + g(y) subject to Ax + By = c`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "ProblemRepr", into = "ProblemRepr")]
pub struct EqConstrainedProblem {
    f: ProxFn,
    g: ProxFn,
    a: Matrix,
    b: Matrix,
    c: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ProblemRepr {
    f: ProxFn,
    g: ProxFn,
    #[serde(rename = "A")]
    a: Matrix,
    #[serde(rename = "B")]
    b: Matrix,
    c: Vec<f64>,
}

impl TryFrom<ProblemRepr> for EqConstrainedProblem {
    type Error = Error;

    fn try_from(r: ProblemRepr) -> Result<Self> {
        EqConstrainedProblem::new(r.f, r.g, r.a, r.b, r.c)
    }
}

impl From<EqConstrainedProblem> for ProblemRepr {
    fn from(p: EqConstrainedProblem) -> Self {
        ProblemRepr {
            f: p.f,
            g: p.g,
            a: p.a,
            b: p.b,
            c: p.c,
        }
    }
}

impl EqConstrainedProblem {
    pub fn new(f: ProxFn, g: ProxFn, a: Matrix, b: Matrix, c: Vec<f64>) -> Result<Self> {
        check_dim("constraint A columns", f.dim(), a.cols())?;
        check_dim("constraint B columns", g.dim(), b.cols())?;
        check_dim("constraint B rows", a.rows(), b.rows())?;
        check_dim("constraint right-hand side", a.rows(), c.len())?;
        Ok(EqConstrainedProblem { f, g, a, b, c })
    }

    pub fn f(&self) -> &ProxFn {
        &self.f
    }

    pub fn g(&self) -> &ProxFn {
        &self.g
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn n(&self) -> usize {
        self.a.cols()
    }

    pub fn m(&self) -> usize {
        self.b.cols()
    }

    pub fn p(&self) -> usize {
        self.a.rows()
    }

    /// The same problem with the constraint scaled to `E(Ax + By) = Ec`.
    pub fn precondition(&self, e: &DiagonalMetric) -> Result<Self> {
        check_dim("preconditioner", self.p(), e.dim())?;
        EqConstrainedProblem::new(
            self.f.clone(),
            self.g.clone(),
            self.a.scale_rows(e.diag()),
            self.b.scale_rows(e.diag()),
            e.apply(&self.c),
        )
    }

    /// `Ax + By − c`.
    pub fn constraint_residual(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let ax = self.a.mul_vec(x);
        let by = self.b.mul_vec(y);
        (0..self.p()).map(|i| ax[i] + by[i] - self.c[i]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmmState {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Scaled dual variable.
    pub u: Vec<f64>,
    /// `γ(u − By)`.
    pub z_equiv: Vec<f64>,
}

impl AdmmState {
    /// `x = 0`, `y = 0`, `u = 0`.
    pub fn zeros(p: &EqConstrainedProblem) -> Self {
        AdmmState {
            x: vec![0.0; p.n()],
            y: vec![0.0; p.m()],
            u: vec![0.0; p.p()],
            z_equiv: vec![0.0; p.p()],
        }
    }
}

/// `argmin_w h(w) + γ/2 ‖Mw + v‖²` for one side of the splitting.
#[derive(Debug)]
struct Subproblem<'a> {
    label: &'static str,
    h: &'a ProxFn,
    m: &'a Matrix,
    kind: SubKind,
    cache: GammaCache,
}

#[derive(Debug)]
enum SubKind {
    /// Normal equations `(Q + γMᵀM) w = −q − γMᵀv`.
    Quadratic { mtm: DMatrix<f64> },
    /// The same with equality constraints, solved through a KKT system.
    AffineQuadratic { mtm: DMatrix<f64> },
    /// `M = diag(d)`: a (per-coordinate) prox at `−v/d`.
    Prox { d: Vec<f64>, uniform: bool },
}

impl<'a> Subproblem<'a> {
    fn new(label: &'static str, h: &'a ProxFn, m: &'a Matrix) -> Result<Self> {
        let capability = |reason: &str| Error::Capability {
            subproblem: label,
            reason: reason.to_string(),
        };
        let kind = match h {
            ProxFn::Quadratic(_) | ProxFn::AffineQuadratic(_) => {
                let md = m.to_dense();
                let mtm = md.transpose() * &md;
                if matches!(h, ProxFn::Quadratic(_)) {
                    SubKind::Quadratic { mtm }
                } else {
                    SubKind::AffineQuadratic { mtm }
                }
            }
            _ => {
                let d = m
                    .as_diagonal()
                    .ok_or_else(|| capability("a non-quadratic function needs a diagonal constraint matrix"))?;
                if d.iter().any(|v| *v == 0.0) {
                    return Err(capability("constraint matrix has a zero diagonal entry"));
                }
                let uniform = d.iter().all(|v| v.abs() == d[0].abs());
                if !uniform && !h.is_separable() {
                    return Err(capability("a non-uniform diagonal constraint needs a separable function"));
                }
                SubKind::Prox { d, uniform }
            }
        };
        Ok(Subproblem {
            label,
            h,
            m,
            kind,
            cache: GammaCache::default(),
        })
    }

    fn solve(&self, gamma: f64, v: &[f64]) -> Result<Vec<f64>> {
        match &self.kind {
            SubKind::Quadratic { mtm } => {
                let ProxFn::Quadratic(q) = self.h else { unreachable!() };
                let solver = self.cache.get_or_build(gamma, || {
                    DenseSolver::spd(q.hessian() + mtm * gamma, "Q + γMᵀM").map_err(|_| self.singular())
                })?;
                Ok(solver.solve(&self.rhs(q.linear(), gamma, v)))
            }
            SubKind::AffineQuadratic { mtm } => {
                let ProxFn::AffineQuadratic(a) = self.h else { unreachable!() };
                let q = a.quadratic();
                let solver = self.cache.get_or_build(gamma, || {
                    let h = q.hessian() + mtm * gamma;
                    DenseSolver::kkt(linalg::kkt_matrix(&h, a.constraint(), 0.0)).map_err(|_| self.singular())
                })?;
                let mut rhs = self.rhs(q.linear(), gamma, v);
                let n = rhs.len();
                rhs.extend_from_slice(a.rhs());
                let mut w = solver.solve(&rhs);
                w.truncate(n);
                Ok(w)
            }
            SubKind::Prox { d, uniform } => {
                let point: Vec<f64> = v.iter().zip(d).map(|(v, d)| -v / d).collect();
                if *uniform {
                    self.h.prox(1.0 / (gamma * d[0] * d[0]), &point)
                } else {
                    let gammas: Vec<f64> = d.iter().map(|d| 1.0 / (gamma * d * d)).collect();
                    self.h.prox_coordinatewise(&gammas, &point)
                }
            }
        }
    }

    /// `−q − γMᵀv`.
    fn rhs(&self, q: &[f64], gamma: f64, v: &[f64]) -> Vec<f64> {
        let mtv = self.m.tr_mul_vec(v);
        q.iter().zip(&mtv).map(|(q, w)| -q - gamma * w).collect()
    }

    fn singular(&self) -> Error {
        Error::Capability {
            subproblem: self.label,
            reason: "the subproblem has no unique solution".into(),
        }
    }
}

/// ADMM bound to one problem, caching subproblem factorizations per γ.
#[derive(Debug)]
pub struct AdmmSolver<'a> {
    problem: &'a EqConstrainedProblem,
    x_sub: Subproblem<'a>,
    y_sub: Subproblem<'a>,
}

/// Outcome of an ADMM run.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmSolution {
    pub state: AdmmState,
    /// Fixed-point trace of `z_equiv`.
    pub trace: SolveTrace,
    /// `‖Ax + By − c‖` after each iteration.
    pub primal_residuals: Vec<f64>,
}

impl<'a> AdmmSolver<'a> {
    pub fn new(problem: &'a EqConstrainedProblem) -> Result<Self> {
        Ok(AdmmSolver {
            problem,
            x_sub: Subproblem::new("x-update", &problem.f, &problem.a)?,
            y_sub: Subproblem::new("y-update", &problem.g, &problem.b)?,
        })
    }

    pub fn problem(&self) -> &EqConstrainedProblem {
        self.problem
    }

    /// The ADMM state matching the dual Douglas-Rachford iterate `z0`:
    /// `y = argmin g(y) + γ/2 ‖By + z0/γ‖²`, `u = z0/γ + By`.
    pub fn state_from_dual(&self, gamma: f64, z0: &[f64]) -> Result<AdmmState> {
        check_gamma(gamma)?;
        let p = self.problem;
        check_dim("dual iterate", p.p(), z0.len())?;
        let v: Vec<f64> = z0.iter().map(|z| z / gamma).collect();
        let y = self.y_sub.solve(gamma, &v)?;
        let by = p.b.mul_vec(&y);
        let u: Vec<f64> = v.iter().zip(&by).map(|(v, b)| v + b).collect();
        Ok(AdmmState {
            x: vec![0.0; p.n()],
            y,
            u,
            z_equiv: z0.to_vec(),
        })
    }

    pub fn step(&self, gamma: f64, alpha: f64, s: &AdmmState) -> Result<AdmmState> {
        check_gamma(gamma)?;
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("relaxation must be positive, got {alpha}")));
        }
        let p = self.problem;
        check_dim("ADMM x", p.n(), s.x.len())?;
        check_dim("ADMM y", p.m(), s.y.len())?;
        check_dim("ADMM u", p.p(), s.u.len())?;

        // By − c
        let byc: Vec<f64> = p.b.mul_vec(&s.y).iter().zip(&p.c).map(|(b, c)| b - c).collect();
        let vx: Vec<f64> = byc.iter().zip(&s.u).map(|(b, u)| b + u).collect();
        let x = self.x_sub.solve(gamma, &vx)?;
        let ax = p.a.mul_vec(&x);
        let xa: Vec<f64> = ax
            .iter()
            .zip(&byc)
            .map(|(a, b)| 2.0 * alpha * a - (1.0 - 2.0 * alpha) * b)
            .collect();
        let vy: Vec<f64> = (0..p.p()).map(|i| xa[i] - p.c[i] + s.u[i]).collect();
        let y = self.y_sub.solve(gamma, &vy)?;
        let by = p.b.mul_vec(&y);
        let u: Vec<f64> = (0..p.p()).map(|i| s.u[i] + xa[i] + by[i] - p.c[i]).collect();
        let z_equiv = u.iter().zip(&by).map(|(u, b)| gamma * (u - b)).collect();
        Ok(AdmmState { x, y, u, z_equiv })
    }

    /// Iterates from `init` until both `‖Ax + By − c‖ ≤ tol · max(1, ‖Ax‖,
    /// ‖By‖, ‖c‖)` and `‖z⁺ − z‖ ≤ tol · max(1, ‖z‖)` hold, or `max_iters`.
    pub fn solve(
        &self,
        gamma: f64,
        alpha: f64,
        tol: f64,
        max_iters: usize,
        init: AdmmState,
        reference: Option<&[f64]>,
    ) -> Result<AdmmSolution> {
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
        }
        let p = self.problem;
        if let Some(r) = reference {
            check_dim("ADMM reference", p.p(), r.len())?;
        }
        let keep = SolveTrace::keeps_history(p.p(), max_iters);
        let mut trace = SolveTrace::new(p.p(), max_iters);
        let mut primal_residuals = Vec::new();
        let mut state = init;
        if keep {
            trace.z_history.push(state.z_equiv.clone());
        }
        if let Some(r) = reference {
            trace.distances.push(dist(&state.z_equiv, r));
        }
        for _ in 0..max_iters {
            let next = self.step(gamma, alpha, &state)?;
            trace.record(&state.z_equiv, &next.z_equiv, reference);
            let dz = *trace.residuals.last().unwrap();
            let z_scale = norm(&state.z_equiv).max(1.0);
            let ax = p.a.mul_vec(&next.x);
            let by = p.b.mul_vec(&next.y);
            let r: Vec<f64> = (0..p.p()).map(|i| ax[i] + by[i] - p.c[i]).collect();
            let rp = norm(&r);
            let r_scale = norm(&ax).max(norm(&by)).max(norm(&p.c)).max(1.0);
            primal_residuals.push(rp);
            state = next;
            if keep {
                trace.z_history.push(state.z_equiv.clone());
            }
            if !dz.is_finite() || !rp.is_finite() {
                break;
            }
            if dz <= tol * z_scale && rp <= tol * r_scale {
                trace.converged = true;
                break;
            }
        }
        Ok(AdmmSolution {
            state,
            trace,
            primal_residuals,
        })
    }
}

/// One ADMM iteration.
pub fn admm_step(p: &EqConstrainedProblem, gamma: f64, alpha: f64, state: &AdmmState) -> Result<AdmmState> {
    AdmmSolver::new(p)?.step(gamma, alpha, state)
}

/// ADMM from `y = 0`, `u = 0`.
pub fn admm_solve(
    p: &EqConstrainedProblem,
    gamma: f64,
    alpha: f64,
    tol: f64,
    max_iters: usize,
) -> Result<AdmmSolution> {
    AdmmSolver::new(p)?.solve(gamma, alpha, tol, max_iters, AdmmState::zeros(p), None)
}

/// Runs ADMM and Douglas-Rachford on the dual pair
/// `d₁(μ) = f*(−Aᵀμ) + ⟨c, μ⟩`, `d₂ = g*(−Bᵀμ)` (resolving `d₂` first) from
/// matched starts, and returns `max_k ‖z_DR^k − γ(u^k − By^k)‖`.
///
/// Needs a strongly convex quadratic `f` and `B = −I`.
pub fn verify_dual_equivalence(
    p: &EqConstrainedProblem,
    gamma: f64,
    alpha: f64,
    iters: usize,
    z0: &[f64],
) -> Result<f64> {
    let minus_identity = p.b.rows() == p.b.cols()
        && p.b.as_diagonal().is_some_and(|d| d.iter().all(|v| *v == -1.0));
    if !minus_identity {
        return Err(Error::Capability {
            subproblem: "dual equivalence",
            reason: "the conjugate of g(−Bᵀ·) has a closed-form prox only for B = −I".into(),
        });
    }
    let d1 = DualQuadratic::new(&p.f, &p.a, &p.c)?;
    let d2 = Conjugate(&p.g);
    let cfg = DrConfig::new(gamma, alpha, iters, f64::MIN_POSITIVE)?;
    let solver = AdmmSolver::new(p)?;

    let mut z = z0.to_vec();
    let mut state = solver.state_from_dual(gamma, z0)?;
    let mut worst = dist(&z, &gamma_u_minus_by(p, gamma, &state));
    for _ in 0..iters {
        z = dr_step(&d2, &d1, &cfg, &z)?.z_next;
        state = solver.step(gamma, alpha, &state)?;
        worst = worst.max(dist(&z, &gamma_u_minus_by(p, gamma, &state)));
    }
    Ok(worst)
}

fn gamma_u_minus_by(p: &EqConstrainedProblem, gamma: f64, s: &AdmmState) -> Vec<f64> {
    let by = p.b.mul_vec(&s.y);
    s.u.iter().zip(&by).map(|(u, b)| gamma * (u - b)).collect()
}

/// `AQ⁻¹Aᵀ`, the Hessian of the smooth dual term.
pub fn dual_hessian(p: &EqConstrainedProblem) -> Result<DMatrix<f64>> {
    Ok(DualQuadratic::new(&p.f, &p.a, &p.c)?.hessian().clone())
}
