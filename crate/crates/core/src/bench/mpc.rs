//! Linearized aircraft model predictive control, condensed into
//! `minimize ½zᵀQz + qᵀz + ι{Lz = b} + g(Cz)`.
//!
//! `z = (x₁, …, x_N, u₀, …, u_{N−1})`. The outputs `y = (x₂, x₄)` carry soft
//! bands enforced by piecewise-linear penalties and the inputs a hard box.

use serde::{Deserialize, Serialize};

use crate::admm::{AdmmSolver, AdmmState, EqConstrainedProblem};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::metric::{heuristic_affine_case, AffineCaseMetric};
use crate::prox::ProxFn;

pub const NX: usize = 4;
pub const NU: usize = 2;
pub const NY: usize = 2;

/// State transition matrix, row-major.
pub const DYNAMICS: [[f64; NX]; NX] = [
    [0.999, -3.008, -0.113, -1.608],
    [-0.000, 0.986, 0.048, 0.000],
    [0.000, 2.083, 1.009, -0.000],
    [0.000, 0.053, 0.050, 1.000],
];

/// Input matrix, row-major.
pub const INPUT: [[f64; NU]; NX] = [
    [-0.080, -0.635],
    [-0.029, -0.014],
    [-0.868, -0.092],
    [-0.022, -0.002],
];

/// State indices measured as outputs.
pub const OUTPUTS: [usize; NY] = [1, 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpcSpec {
    pub horizon: usize,
    pub input_bound: f64,
    pub soft_penalty: f64,
    pub state_cost: [f64; NX],
    pub input_cost: f64,
    pub y1_band: (f64, f64),
    pub y2_band: (f64, f64),
}

impl Default for MpcSpec {
    fn default() -> Self {
        MpcSpec {
            horizon: 10,
            input_bound: 25.0,
            soft_penalty: 1e6,
            state_cost: [0.0, 100.0, 0.0, 100.0],
            input_cost: 0.01,
            y1_band: (-0.5, 0.5),
            y2_band: (-100.0, 100.0),
        }
    }
}

pub fn dynamics_matrix() -> Matrix {
    Matrix::from_row_slice(NX, NX, DYNAMICS.as_flattened()).expect("constant shape")
}

pub fn input_matrix() -> Matrix {
    Matrix::from_row_slice(NX, NU, INPUT.as_flattened()).expect("constant shape")
}

/// A generated MPC problem with the pieces needed for metric selection.
#[derive(Debug, Clone)]
pub struct MpcInstance {
    pub problem: EqConstrainedProblem,
    /// Block-diagonal cost Hessian.
    pub cost: Matrix,
    /// Stacked dynamics constraint `L`.
    pub dynamics: Matrix,
    /// Output/input selection `C`.
    pub selection: Matrix,
}

/// Builds the condensed problem for initial state `x0` and state references
/// `state_ref[k]` for `x_{k+1}`, `k = 0..N`.
pub fn gen_mpc(spec: &MpcSpec, x0: &[f64; NX], state_ref: &[[f64; NX]]) -> Result<MpcInstance> {
    let n = spec.horizon;
    if n == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    if state_ref.len() != n {
        return Err(Error::DimensionMismatch {
            context: "MPC reference trajectory",
            expected: n,
            got: state_ref.len(),
        });
    }
    let nz = n * (NX + NU);
    let xi = |k: usize, i: usize| k * NX + i;
    let ui = |k: usize, j: usize| n * NX + k * NU + j;

    let mut cost = Vec::new();
    let mut lin = vec![0.0; nz];
    for k in 0..n {
        for i in 0..NX {
            let w = spec.state_cost[i];
            if w != 0.0 {
                cost.push((xi(k, i), xi(k, i), w));
                lin[xi(k, i)] = -w * state_ref[k][i];
            }
        }
        for j in 0..NU {
            cost.push((ui(k, j), ui(k, j), spec.input_cost));
        }
    }
    let cost = Matrix::from_triplets(nz, nz, cost)?;

    // x_{k+1} − Φ x_k − Γ u_k = 0, with Φ x₀ moved to the right-hand side
    let mut dyn_t = Vec::new();
    let mut rhs = vec![0.0; n * NX];
    for k in 0..n {
        for r in 0..NX {
            let row = k * NX + r;
            dyn_t.push((row, xi(k, r), 1.0));
            for j in 0..NU {
                dyn_t.push((row, ui(k, j), -INPUT[r][j]));
            }
            for c in 0..NX {
                if k == 0 {
                    rhs[row] += DYNAMICS[r][c] * x0[c];
                } else {
                    dyn_t.push((row, xi(k - 1, c), -DYNAMICS[r][c]));
                }
            }
        }
    }
    let dynamics = Matrix::from_triplets(n * NX, nz, dyn_t)?;

    let mut sel = Vec::new();
    for k in 0..n {
        for (o, &s) in OUTPUTS.iter().enumerate() {
            sel.push((k * NY + o, xi(k, s), 1.0));
        }
    }
    for k in 0..n {
        for j in 0..NU {
            sel.push((n * NY + k * NU + j, ui(k, j), 1.0));
        }
    }
    let p = n * (NY + NU);
    let selection = Matrix::from_triplets(p, nz, sel)?;

    let f = ProxFn::affine_quadratic(&cost, lin, &dynamics, rhs)?;
    let (mut lo, mut hi) = (Vec::new(), Vec::new());
    for _ in 0..n {
        lo.extend([spec.y1_band.0, spec.y2_band.0]);
        hi.extend([spec.y1_band.1, spec.y2_band.1]);
    }
    let g = ProxFn::Separable(vec![
        ProxFn::pwl_penalty(lo, hi, spec.soft_penalty)?,
        ProxFn::boxed(vec![-spec.input_bound; n * NU], vec![spec.input_bound; n * NU])?,
    ]);
    let problem = EqConstrainedProblem::new(
        f,
        g,
        selection.clone(),
        Matrix::from_diagonal(&vec![-1.0; p]),
        vec![0.0; p],
    )?;
    Ok(MpcInstance {
        problem,
        cost,
        dynamics,
        selection,
    })
}

impl MpcInstance {
    /// Metric from the pseudo condition number of `C P₁₁ Cᵀ`.
    pub fn heuristic_metric(&self) -> Result<AffineCaseMetric> {
        heuristic_affine_case(&self.cost, &self.dynamics, &self.selection)
    }

    /// First input `u₀` of a solution vector.
    pub fn first_input(&self, z: &[f64]) -> [f64; NU] {
        let off = z.len() - z.len() / (NX + NU) * NU;
        [z[off], z[off + 1]]
    }
}

/// Pitch reference for the closed-loop maneuver: 10 on samples
/// `[steps/12, steps/2)`, 0 elsewhere.
pub fn pitch_schedule(t: usize, steps: usize) -> f64 {
    if t >= steps / 12 && t < steps / 2 {
        10.0
    } else {
        0.0
    }
}

/// Iteration counts of a simulated closed loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedLoopReport {
    pub iterations: Vec<usize>,
    pub converged: Vec<bool>,
    pub mean_iterations: f64,
    pub median_iterations: f64,
    /// Final pitch `x₄`.
    pub final_pitch: f64,
}

/// Runs `steps` samples, solving each MPC problem with ADMM from a cold
/// start and applying `u₀`. With `auto_metric` the constraint is scaled by
/// the heuristic metric, which does not depend on the sample. The step size is the recommended
/// one times `gamma_scale`.
pub fn closed_loop(
    spec: &MpcSpec,
    steps: usize,
    auto_metric: bool,
    gamma_scale: f64,
    alpha: f64,
    tol: f64,
    max_iters: usize,
) -> Result<ClosedLoopReport> {
    let h = single_sample(spec)?.heuristic_metric()?;
    let gamma = if auto_metric {
        h.gamma
    } else {
        crate::metric::gamma_from_metric(&h.unscaled)
    };
    let mut x = [0.0; NX];
    let mut iterations = Vec::with_capacity(steps);
    let mut converged = Vec::with_capacity(steps);
    for t in 0..steps {
        let refs: Vec<[f64; NX]> = (1..=spec.horizon)
            .map(|k| [0.0, 0.0, 0.0, pitch_schedule(t + k, steps)])
            .collect();
        let inst = gen_mpc(spec, &x, &refs)?;
        let problem = if auto_metric {
            inst.problem.precondition(&h.metric)?
        } else {
            inst.problem.clone()
        };
        let solver = AdmmSolver::new(&problem)?;
        let sol = solver.solve(gamma * gamma_scale, alpha, tol, max_iters, AdmmState::zeros(&problem), None)?;
        iterations.push(sol.trace.iterations);
        converged.push(sol.trace.converged);
        let u = inst.first_input(&sol.state.x);
        let mut next = [0.0; NX];
        for r in 0..NX {
            next[r] = (0..NX).map(|c| DYNAMICS[r][c] * x[c]).sum::<f64>()
                + (0..NU).map(|j| INPUT[r][j] * u[j]).sum::<f64>();
        }
        x = next;
    }
    let mean_iterations = iterations.iter().sum::<usize>() as f64 / steps.max(1) as f64;
    Ok(ClosedLoopReport {
        median_iterations: median(&iterations),
        mean_iterations,
        iterations,
        converged,
        final_pitch: x[3],
    })
}

fn median(v: &[usize]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let mut s = v.to_vec();
    s.sort_unstable();
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2] as f64
    } else {
        (s[n / 2 - 1] + s[n / 2]) as f64 / 2.0
    }
}

/// The single-sample test instance: start at rest, pitch reference 10.
pub fn single_sample(spec: &MpcSpec) -> Result<MpcInstance> {
    let refs = vec![[0.0, 0.0, 0.0, 10.0]; spec.horizon];
    gen_mpc(spec, &[0.0; NX], &refs)
}
