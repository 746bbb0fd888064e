//! Two-dimensional instances on which the Douglas-Rachford rate bound is
//! attained exactly.
//!
//! `f(x) = ½(βx₁² + σx₂²)` paired with `g₁ = 0` (`R = Id`) or
//! `g₂ = ι{0}` (`R = −Id`). Every coordinate evolves as
//! `zᵢ⁺ = (1 − α ± α(1 − γλᵢ)/(1 + γλᵢ)) zᵢ`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::admm::{AdmmSolver, EqConstrainedProblem};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::prox::{check_gamma, ProxFn};
use crate::rates::{contraction_factor, rate_bound, DualRegularity, Regularity};
use crate::splitting::{dr_solve, DrConfig, CSV_HEADER};

/// Which reflection the second function contributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Reflection `Id`.
    G1,
    /// Reflection `−Id`.
    G2,
}

impl Variant {
    pub fn label(self) -> &'static str {
        match self {
            Variant::G1 => "g1",
            Variant::G2 => "g2",
        }
    }

    fn sign(self) -> f64 {
        match self {
            Variant::G1 => 1.0,
            Variant::G2 => -1.0,
        }
    }
}

/// The curvature direction a start vector excites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coordinate {
    Beta,
    Sigma,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Setting {
    /// Douglas-Rachford on `f + g`.
    Primal,
    /// ADMM on `min f(x) + g(y) s.t. diag(θ, ζ)x − y = 0`, whose dual has
    /// `σ̂ = θ²/β` along the first axis and `β̂ = ζ²/σ` along the second.
    Dual { theta: f64, zeta: f64 },
}

/// A tightness instance. In the dual setting `reg` is the primal
/// regularity and `variant` describes `d₂ = g*`: `G1` means `g = ι{0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorstCaseInstance {
    pub reg: Regularity,
    pub variant: Variant,
    pub setting: Setting,
    pub coordinate: Coordinate,
}

/// Everything needed to run an instance. The fixed point and solution are 0.
#[derive(Debug, Clone)]
pub struct BuiltInstance {
    pub f: ProxFn,
    pub g: ProxFn,
    /// Present in the dual setting.
    pub problem: Option<EqConstrainedProblem>,
    pub z0: Vec<f64>,
}

impl WorstCaseInstance {
    pub fn new(reg: Regularity, variant: Variant, setting: Setting, coordinate: Coordinate) -> Result<Self> {
        if let Setting::Dual { theta, zeta } = setting {
            if !(theta > 0.0 && zeta.is_finite()) {
                return Err(Error::InvalidParameter(format!("need θ > 0, got {theta}")));
            }
            // σ̂ ≤ β̂ keeps the axis labelling of the dual consistent
            DualRegularity::new(theta * theta / reg.beta(), zeta * zeta / reg.sigma())?;
        }
        Ok(WorstCaseInstance {
            reg,
            variant,
            setting,
            coordinate,
        })
    }

    /// Regularity governing the iteration: primal `(σ, β)` or dual `(σ̂, β̂)`.
    pub fn iteration_regularity(&self) -> Regularity {
        match self.setting {
            Setting::Primal => self.reg,
            Setting::Dual { theta, zeta } => {
                DualRegularity::new(theta * theta / self.reg.beta(), zeta * zeta / self.reg.sigma())
                    .expect("checked at construction")
                    .as_regularity()
            }
        }
    }

    /// Unit start vector on the chosen curvature axis.
    pub fn z0(&self) -> Vec<f64> {
        let beta_axis = match self.setting {
            Setting::Primal => 0,
            Setting::Dual { .. } => 1,
        };
        let idx = match self.coordinate {
            Coordinate::Beta => beta_axis,
            Coordinate::Sigma => 1 - beta_axis,
        };
        let mut z = vec![0.0; 2];
        z[idx] = 1.0;
        z
    }

    pub fn build(&self) -> Result<BuiltInstance> {
        let f = ProxFn::quadratic(&Matrix::from_diagonal(&[self.reg.beta(), self.reg.sigma()]), vec![0.0; 2])?;
        let z0 = self.z0();
        match self.setting {
            Setting::Primal => {
                let g = match self.variant {
                    Variant::G1 => ProxFn::Zero { dim: 2 },
                    Variant::G2 => ProxFn::IndicatorZero { dim: 2 },
                };
                Ok(BuiltInstance {
                    f,
                    g,
                    problem: None,
                    z0,
                })
            }
            Setting::Dual { theta, zeta } => {
                let g = match self.variant {
                    Variant::G1 => ProxFn::IndicatorZero { dim: 2 },
                    Variant::G2 => ProxFn::Zero { dim: 2 },
                };
                let problem = EqConstrainedProblem::new(
                    f.clone(),
                    g.clone(),
                    Matrix::from_diagonal(&[theta, zeta]),
                    Matrix::from_diagonal(&[-1.0, -1.0]),
                    vec![0.0; 2],
                )?;
                Ok(BuiltInstance {
                    f,
                    g,
                    problem: Some(problem),
                    z0,
                })
            }
        }
    }

    /// Per-iteration factor on this instance's start vector.
    pub fn exact_rate(&self, gamma: f64, alpha: f64) -> Result<f64> {
        exact_rate(&self.iteration_regularity(), self.variant, gamma, alpha, self.coordinate)
    }

    /// Measured `‖z^{k+1}‖ / ‖z^k‖` over `iters` iterations.
    pub fn measured_ratios(&self, gamma: f64, alpha: f64, iters: usize) -> Result<Vec<f64>> {
        let built = self.build()?;
        let zero = [0.0; 2];
        let trace = match &built.problem {
            None => {
                let cfg = DrConfig::new(gamma, alpha, iters, f64::MIN_POSITIVE)?;
                dr_solve(&built.f, &built.g, &cfg, &built.z0, Some(&zero))?.trace
            }
            Some(p) => {
                let solver = AdmmSolver::new(p)?;
                let init = solver.state_from_dual(gamma, &built.z0)?;
                solver
                    .solve(gamma, alpha, f64::MIN_POSITIVE, iters, init, Some(&zero))?
                    .trace
            }
        };
        Ok(trace
            .distances
            .windows(2)
            .take_while(|w| w[0] > MEASURABLE)
            .map(|w| w[1] / w[0])
            .collect())
    }
}

/// Distances below this are too close to underflow for exact ratios.
const MEASURABLE: f64 = 1e-250;

/// `|1 − α ± α(1 − γλ)/(1 + γλ)|`, `+` for `G1`, `−` for `G2`, with
/// `λ = β` or `σ`.
pub fn exact_rate(reg: &Regularity, variant: Variant, gamma: f64, alpha: f64, coordinate: Coordinate) -> Result<f64> {
    check_gamma(gamma)?;
    let lambda = match coordinate {
        Coordinate::Beta => reg.beta(),
        Coordinate::Sigma => reg.sigma(),
    };
    let psi = (1.0 - gamma * lambda) / (1.0 + gamma * lambda);
    Ok((1.0 - alpha + variant.sign() * alpha * psi).abs())
}

/// The variant and start axis whose exact rate equals `|1 − α| + αδ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdversarialCase {
    pub variant: Variant,
    pub coordinate: Coordinate,
}

pub fn adversarial_case(alpha: f64, gamma: f64, reg: &Regularity) -> Result<AdversarialCase> {
    check_gamma(gamma)?;
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("relaxation must be nonzero, got {alpha}")));
    }
    let small_step = gamma <= reg.gamma_star();
    let under = alpha <= 1.0;
    let (variant, coordinate) = match (under, small_step) {
        (true, true) => (Variant::G1, Coordinate::Sigma),
        (false, false) => (Variant::G1, Coordinate::Beta),
        (true, false) => (Variant::G2, Coordinate::Beta),
        (false, true) => (Variant::G2, Coordinate::Sigma),
    };
    Ok(AdversarialCase { variant, coordinate })
}

/// How `α` is chosen at a grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AlphaChoice {
    Fixed(f64),
    /// A multiple of the upper end `2/(1 + δ)` of the feasible interval.
    OfMax(f64),
}

impl AlphaChoice {
    pub fn resolve(self, delta: f64) -> f64 {
        match self {
            AlphaChoice::Fixed(a) => a,
            AlphaChoice::OfMax(t) => t * 2.0 / (1.0 + delta),
        }
    }
}

/// The standard witness grid: `γ/γ* ∈ {0.2, 1, 5}`,
/// `α ∈ {0.5, 1, 0.99 · 2/(1+δ)}`.
pub const GAMMA_RATIOS: [f64; 3] = [0.2, 1.0, 5.0];
pub const ALPHAS: [AlphaChoice; 3] = [AlphaChoice::Fixed(0.5), AlphaChoice::Fixed(1.0), AlphaChoice::OfMax(0.99)];
pub const KAPPAS: [f64; 4] = [1.0, 4.0, 25.0, 100.0];

/// One row of a verification report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationRow {
    pub beta: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub variant: Variant,
    pub bound: f64,
    pub exact_rate: f64,
    /// First measured contraction ratio.
    pub measured_rate: f64,
    /// `max_k |ratio_k − exact_rate|`.
    pub max_abs_diff: f64,
}

/// Runs the adversarial instance for every `(γ/γ*, α)` pair. `reg` is the
/// regularity the iteration sees; in the dual setting it is realized with a
/// unit primal and `θ = √σ̂`, `ζ = √β̂`.
pub fn verify_grid(
    reg: &Regularity,
    dual: bool,
    gamma_ratios: &[f64],
    alphas: &[AlphaChoice],
    iters: usize,
) -> Result<Vec<VerificationRow>> {
    let points: Vec<(f64, AlphaChoice)> = gamma_ratios
        .iter()
        .flat_map(|&g| alphas.iter().map(move |&a| (g, a)))
        .collect();
    points
        .par_iter()
        .map(|&(ratio, choice)| verify_point(reg, dual, ratio * reg.gamma_star(), choice, iters))
        .collect()
}

fn verify_point(reg: &Regularity, dual: bool, gamma: f64, choice: AlphaChoice, iters: usize) -> Result<VerificationRow> {
    let delta = contraction_factor(reg, gamma)?;
    let alpha = choice.resolve(delta);
    let case = adversarial_case(alpha, gamma, reg)?;
    let (inst_reg, setting) = if dual {
        (
            Regularity::new(1.0, 1.0)?,
            Setting::Dual {
                theta: reg.sigma().sqrt(),
                zeta: reg.beta().sqrt(),
            },
        )
    } else {
        (*reg, Setting::Primal)
    };
    let inst = WorstCaseInstance::new(inst_reg, case.variant, setting, case.coordinate)?;
    let exact = inst.exact_rate(gamma, alpha)?;
    let ratios = inst.measured_ratios(gamma, alpha, iters)?;
    let max_abs_diff = ratios.iter().map(|r| (r - exact).abs()).fold(0.0, f64::max);
    Ok(VerificationRow {
        beta: reg.beta(),
        sigma: reg.sigma(),
        gamma,
        alpha,
        variant: case.variant,
        bound: rate_bound(delta, alpha),
        exact_rate: exact,
        measured_rate: ratios.first().copied().unwrap_or(0.0),
        max_abs_diff,
    })
}

/// Report CSV with columns
/// `beta,sigma,gamma,alpha,variant,bound,exact_rate,measured_rate,max_abs_diff`.
pub fn report_csv(rows: &[VerificationRow]) -> String {
    let mut out = String::new();
    writeln!(out, "{CSV_HEADER}").unwrap();
    writeln!(out, "beta,sigma,gamma,alpha,variant,bound,exact_rate,measured_rate,max_abs_diff").unwrap();
    for r in rows {
        writeln!(
            out,
            "{},{},{:.17e},{:.17e},{},{:.17e},{:.17e},{:.17e},{:e}",
            r.beta,
            r.sigma,
            r.gamma,
            r.alpha,
            r.variant.label(),
            r.bound,
            r.exact_rate,
            r.measured_rate,
            r.max_abs_diff
        )
        .unwrap();
    }
    out
}
