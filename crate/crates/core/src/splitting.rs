//! Relaxed Douglas-Rachford splitting,
//! `z⁺ = ((1−α)Id + α R_{γg} R_{γf}) z`, with per-iteration tracing.
//! `α = 1` is Peaceman-Rachford.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dist, norm};
use crate::prox::{check_gamma, ProxOperator};

/// First line of every CSV file the crate writes.
pub const CSV_HEADER: &str = "# proxsplit-csv v1";

/// Full iterate histories are kept only below this many stored scalars.
const HISTORY_LIMIT: usize = 10_000_000;

/// Which operator is resolved first inside one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    /// `x = prox_{γf}(z)`, `y = prox_{γg}(2x − z)`.
    #[default]
    FFirst,
    /// Same with the roles of `f` and `g` exchanged.
    GFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrConfig {
    pub gamma: f64,
    pub alpha: f64,
    pub max_iters: usize,
    pub tol: f64,
    pub order: Order,
}

impl DrConfig {
    pub fn new(gamma: f64, alpha: f64, max_iters: usize, tol: f64) -> Result<Self> {
        let cfg = DrConfig {
            gamma,
            alpha,
            max_iters,
            tol,
            order: Order::FFirst,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_order(mut self, order: Order) -> Self {
        self.order = order;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_gamma(self.gamma)?;
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("relaxation must be positive, got {}", self.alpha)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

/// One Douglas-Rachford step: `x = prox(z)`, `y = prox(2x − z)`,
/// `z⁺ = z + 2α(y − x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DrStep {
    pub z_next: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Per-iteration record of a fixed-point iteration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    /// `z⁰, z¹, …`; empty when the run was too large to store.
    pub z_history: Vec<Vec<f64>>,
    /// `‖z^{k+1} − z^k‖` for each iteration.
    pub residuals: Vec<f64>,
    /// `‖z^k − z̄‖` for `k = 0..=iterations`, when a reference was given.
    pub distances: Vec<f64>,
    /// `‖z^{k+1} − z̄‖ / ‖z^k − z̄‖`; `None` without a reference or when the
    /// previous distance is zero.
    pub contraction_ratios: Vec<Option<f64>>,
    pub iterations: usize,
    pub converged: bool,
}

impl SolveTrace {
    pub(crate) fn new(n: usize, max_iters: usize) -> Self {
        let mut t = SolveTrace::default();
        if n.saturating_mul(max_iters.saturating_add(1)) <= HISTORY_LIMIT {
            t.z_history.reserve(max_iters.min(1024) + 1);
        } else {
            t.z_history = Vec::new();
        }
        t
    }

    pub(crate) fn keeps_history(n: usize, max_iters: usize) -> bool {
        n.saturating_mul(max_iters.saturating_add(1)) <= HISTORY_LIMIT
    }

    pub(crate) fn record(&mut self, z_prev: &[f64], z_next: &[f64], reference: Option<&[f64]>) {
        self.residuals.push(dist(z_next, z_prev));
        if let Some(r) = reference {
            let d_next = dist(z_next, r);
            let d_prev = *self.distances.last().expect("initial distance recorded");
            self.distances.push(d_next);
            self.contraction_ratios
                .push(if d_prev > 0.0 { Some(d_next / d_prev) } else { None });
        } else {
            self.contraction_ratios.push(None);
        }
        self.iterations += 1;
    }

    /// CSV with columns `iter,residual,contraction_ratio`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{CSV_HEADER}").unwrap();
        writeln!(out, "iter,residual,contraction_ratio").unwrap();
        for (k, (r, c)) in self.residuals.iter().zip(&self.contraction_ratios).enumerate() {
            match c {
                Some(c) => writeln!(out, "{},{:e},{:e}", k + 1, r, c).unwrap(),
                None => writeln!(out, "{},{:e},", k + 1, r).unwrap(),
            }
        }
        out
    }

    /// Contraction ratios that are defined.
    pub fn measured_ratios(&self) -> impl Iterator<Item = f64> + '_ {
        self.contraction_ratios.iter().flatten().copied()
    }
}

/// Result of a Douglas-Rachford solve.
#[derive(Debug, Clone, PartialEq)]
pub struct DrSolution {
    /// `prox` of the first-resolved function at the final `z`.
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub trace: SolveTrace,
}

pub fn dr_step<F, G>(f: &F, g: &G, cfg: &DrConfig, z: &[f64]) -> Result<DrStep>
where
    F: ProxOperator + ?Sized,
    G: ProxOperator + ?Sized,
{
    cfg.validate()?;
    check_dim("dr_step f", f.dim(), z.len())?;
    check_dim("dr_step g", g.dim(), z.len())?;
    Ok(match cfg.order {
        Order::FFirst => step_inner(f, g, cfg, z)?,
        Order::GFirst => step_inner(g, f, cfg, z)?,
    })
}

fn step_inner<F, G>(first: &F, second: &G, cfg: &DrConfig, z: &[f64]) -> Result<DrStep>
where
    F: ProxOperator + ?Sized,
    G: ProxOperator + ?Sized,
{
    let x = first.prox(cfg.gamma, z)?;
    let reflected: Vec<f64> = x.iter().zip(z).map(|(x, z)| 2.0 * x - z).collect();
    let y = second.prox(cfg.gamma, &reflected)?;
    let z_next = z
        .iter()
        .zip(x.iter().zip(&y))
        .map(|(z, (x, y))| z + 2.0 * cfg.alpha * (y - x))
        .collect();
    Ok(DrStep { z_next, x, y })
}

/// Iterates until `‖z^{k+1} − z^k‖ ≤ tol · max(1, ‖z^k‖)` or `max_iters`.
/// Running out of iterations is reported through `trace.converged`.
pub fn dr_solve<F, G>(
    f: &F,
    g: &G,
    cfg: &DrConfig,
    z0: &[f64],
    reference: Option<&[f64]>,
) -> Result<DrSolution>
where
    F: ProxOperator + ?Sized,
    G: ProxOperator + ?Sized,
{
    cfg.validate()?;
    let n = z0.len();
    if let Some(r) = reference {
        check_dim("dr_solve reference", n, r.len())?;
    }
    let keep = SolveTrace::keeps_history(n, cfg.max_iters);
    let mut trace = SolveTrace::new(n, cfg.max_iters);
    if keep {
        trace.z_history.push(z0.to_vec());
    }
    if let Some(r) = reference {
        trace.distances.push(dist(z0, r));
    }
    let mut z = z0.to_vec();
    for _ in 0..cfg.max_iters {
        let step = dr_step(f, g, cfg, &z)?;
        trace.record(&z, &step.z_next, reference);
        let res = *trace.residuals.last().unwrap();
        let scale = norm(&z).max(1.0);
        z = step.z_next;
        if keep {
            trace.z_history.push(z.clone());
        }
        if !res.is_finite() || z.iter().any(|v| !v.is_finite()) {
            break;
        }
        if res <= cfg.tol * scale {
            trace.converged = true;
            break;
        }
    }
    let x = match cfg.order {
        Order::FFirst => f.prox(cfg.gamma, &z)?,
        Order::GFirst => g.prox(cfg.gamma, &z)?,
    };
    Ok(DrSolution { x, z, trace })
}
