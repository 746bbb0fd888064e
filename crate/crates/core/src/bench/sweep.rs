//! Step-size sweeps comparing actual ADMM iteration counts with certified
//! worst-case counts.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::admm::{AdmmSolver, AdmmState, EqConstrainedProblem};
use crate::error::{Error, Result};
use crate::linalg::DiagonalMetric;
use crate::rates::{contraction_factor, iteration_bound, rate_bound, DualRegularity};
use crate::splitting::CSV_HEADER;

/// `points` values spaced evenly in log scale over
/// `[lo_mult · center, hi_mult · center]`.
pub fn log_grid(center: f64, lo_mult: f64, hi_mult: f64, points: usize) -> Result<Vec<f64>> {
    if !(center > 0.0 && lo_mult > 0.0 && hi_mult >= lo_mult && points >= 1) {
        return Err(Error::InvalidParameter(format!(
            "log grid needs positive center and multipliers with lo <= hi and at least one point; \
             got center={center}, lo={lo_mult}, hi={hi_mult}, points={points}"
        )));
    }
    if points == 1 {
        return Ok(vec![center * (lo_mult * hi_mult).sqrt()]);
    }
    let (a, b) = (lo_mult.ln(), hi_mult.ln());
    Ok((0..points)
        .map(|i| center * (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub gamma: f64,
    pub iterations_actual: usize,
    /// `None` without a certificate or when the bound is not below one.
    pub iterations_bound: Option<u64>,
    pub converged: bool,
    /// Set when the solve failed at this point.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub gamma_grid: Vec<f64>,
    pub points: Vec<SweepPoint>,
    /// Scaling applied to the constraint; `None` for the identity.
    pub metric_used: Option<DiagonalMetric>,
    pub alpha: f64,
    /// Reference step size the grid is expressed against.
    pub gamma_ref: f64,
}

/// Solves `problem` (scaled by `metric` when given) from `y = 0`, `u = 0`
/// for each step size. `dual` is the dual regularity of the scaled problem;
/// when present each point also gets `iteration_bound(|1−α| + αδ̂, tol)`.
/// Points run in parallel; results keep grid order.
#[allow(clippy::too_many_arguments)]
pub fn run_sweep(
    problem: &EqConstrainedProblem,
    dual: Option<&DualRegularity>,
    metric: Option<&DiagonalMetric>,
    alpha: f64,
    gamma_grid: &[f64],
    gamma_ref: f64,
    tol: f64,
    max_iters: usize,
) -> Result<SweepResult> {
    if gamma_grid.is_empty() {
        return Err(Error::InvalidParameter("empty step-size grid".into()));
    }
    let scaled = match metric {
        Some(e) => problem.precondition(e)?,
        None => problem.clone(),
    };
    let points = gamma_grid
        .par_iter()
        .map(|&gamma| {
            let bound = dual.and_then(|d| {
                let delta = contraction_factor(&d.as_regularity(), gamma).ok()?;
                iteration_bound(rate_bound(delta, alpha), tol).ok()
            });
            let solved = AdmmSolver::new(&scaled)
                .and_then(|s| s.solve(gamma, alpha, tol, max_iters, AdmmState::zeros(&scaled), None));
            match solved {
                Ok(sol) => SweepPoint {
                    gamma,
                    iterations_actual: sol.trace.iterations,
                    iterations_bound: bound,
                    converged: sol.trace.converged,
                    error: None,
                },
                Err(e) => SweepPoint {
                    gamma,
                    iterations_actual: 0,
                    iterations_bound: bound,
                    converged: false,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(SweepResult {
        gamma_grid: gamma_grid.to_vec(),
        points,
        metric_used: metric.cloned(),
        alpha,
        gamma_ref,
    })
}

impl SweepResult {
    /// Index of the point with the fewest iterations among converged ones.
    pub fn argmin_iterations(&self) -> Option<usize> {
        self.points
            .iter()
            .enumerate()
            .filter(|(_, p)| p.converged)
            .min_by_key(|(_, p)| p.iterations_actual)
            .map(|(i, _)| i)
    }

    /// CSV with columns
    /// `metric,alpha,gamma,gamma_ratio,iterations_actual,iterations_bound,converged`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{CSV_HEADER}").unwrap();
        self.write_rows(&mut out, true);
        out
    }

    /// Appends rows, optionally preceded by the column line.
    pub fn write_rows(&self, out: &mut String, header: bool) {
        if header {
            writeln!(out, "metric,alpha,gamma,gamma_ratio,iterations_actual,iterations_bound,converged").unwrap();
        }
        let metric = if self.metric_used.is_some() { "auto" } else { "identity" };
        for p in &self.points {
            let bound = p.iterations_bound.map(|b| b.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{metric},{},{:.10e},{:.10e},{},{},{}",
                self.alpha,
                p.gamma,
                p.gamma / self.gamma_ref,
                p.iterations_actual,
                bound,
                p.converged
            )
            .unwrap();
        }
    }
}
