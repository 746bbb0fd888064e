//! Closed-form linear convergence rates for relaxed Douglas-Rachford
//! splitting and ADMM.
//!
//! For `f` σ-strongly convex and β-smooth, `R_{γf}` is δ-contractive with
//! `δ = max((γβ−1)/(γβ+1), (1−γσ)/(1+γσ))`, and the relaxed iteration
//! contracts with factor `|1−α| + αδ` for every `α ∈ (0, 2/(1+δ))`.
//! ADMM inherits the same results on the dual with `(σ̂, β̂)` in place of
//! `(σ, β)`.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, DiagonalMetric, Matrix, DEFAULT_ZERO_TOL};
use crate::prox::check_gamma;

/// Strong convexity modulus σ and smoothness constant β, `0 < σ ≤ β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regularity {
    sigma: f64,
    beta: f64,
}

impl Regularity {
    pub fn new(sigma: f64, beta: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite() && beta.is_finite() && beta >= sigma) {
            return Err(Error::InvalidParameter(format!(
                "regularity needs 0 < sigma <= beta, got sigma={sigma}, beta={beta}"
            )));
        }
        Ok(Regularity { sigma, beta })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn kappa(&self) -> f64 {
        self.beta / self.sigma
    }

    /// The step size at which both branches of δ coincide, `1/√(βσ)`.
    pub fn gamma_star(&self) -> f64 {
        1.0 / (self.beta * self.sigma).sqrt()
    }
}

/// Regularity of the smooth dual term `d₁`: `σ̂ = θ²/β`, `β̂ = ‖A‖²/σ`
/// (or their metric counterparts).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualRegularity {
    pub sigma_hat: f64,
    pub beta_hat: f64,
    pub kappa_hat: f64,
}

impl DualRegularity {
    pub fn new(sigma_hat: f64, beta_hat: f64) -> Result<Self> {
        let reg = Regularity::new(sigma_hat, beta_hat)?;
        Ok(DualRegularity {
            sigma_hat,
            beta_hat,
            kappa_hat: reg.kappa(),
        })
    }

    pub fn as_regularity(&self) -> Regularity {
        Regularity {
            sigma: self.sigma_hat,
            beta: self.beta_hat,
        }
    }
}

/// `ψ(x) = (1 − x)/(1 + x)`.
fn psi(x: f64) -> f64 {
    (1.0 - x) / (1.0 + x)
}

/// Contraction factor δ of `R_{γf}`.
pub fn contraction_factor(reg: &Regularity, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let low = psi(gamma * reg.sigma);
    let high = -psi(gamma * reg.beta);
    // both branches are evaluated so the kink returns their common value
    Ok(low.max(high))
}

/// `|1 − α| + αδ`. Values ≥ 1 mean no guarantee.
pub fn rate_bound(delta: f64, alpha: f64) -> f64 {
    (1.0 - alpha).abs() + alpha * delta
}

/// The open interval `(0, 2/(1+δ))` of relaxations with a rate below one.
pub fn feasible_alpha_interval(delta: f64) -> (f64, f64) {
    (0.0, 2.0 / (1.0 + delta))
}

/// `(γ*, α*, rate*) = (1/√(βσ), 1, (√κ−1)/(√κ+1))`.
pub fn optimal_parameters(reg: &Regularity) -> (f64, f64, f64) {
    let sk = reg.kappa().sqrt();
    (reg.gamma_star(), 1.0, (sk - 1.0) / (sk + 1.0))
}

/// Number of iterations after which `rate^k ≤ tol`.
pub fn iteration_bound(rate: f64, tol: f64) -> Result<u64> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidParameter(format!("tolerance must lie in (0, 1), got {tol}")));
    }
    if rate.is_nan() || rate < 0.0 {
        return Err(Error::InvalidParameter(format!("rate must be >= 0, got {rate}")));
    }
    if rate >= 1.0 {
        return Err(Error::Unbounded { rate });
    }
    if rate == 0.0 {
        return Ok(1);
    }
    Ok((tol.ln() / rate.ln()).ceil().max(1.0) as u64)
}

/// Everything the rate theory says about one `(σ, β)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateCertificate {
    pub delta: f64,
    pub alpha_max: f64,
    pub gamma_star: f64,
    pub alpha_star: f64,
    pub rate_star: f64,
    pub kappa: f64,
}

impl RateCertificate {
    /// Certificate at step size `gamma`.
    pub fn new(reg: &Regularity, gamma: f64) -> Result<Self> {
        let delta = contraction_factor(reg, gamma)?;
        let (gamma_star, alpha_star, rate_star) = optimal_parameters(reg);
        Ok(RateCertificate {
            delta,
            alpha_max: feasible_alpha_interval(delta).1,
            gamma_star,
            alpha_star,
            rate_star,
            kappa: reg.kappa(),
        })
    }

    /// Certificate at the optimal step size.
    pub fn optimal(reg: &Regularity) -> Self {
        Self::new(reg, reg.gamma_star()).expect("gamma_star is positive")
    }

    pub fn rate(&self, alpha: f64) -> f64 {
        rate_bound(self.delta, alpha)
    }
}

/// `(σ̂, β̂)` for the dual of `min f(x) + g(y) s.t. Ax + By = c`.
///
/// Without a metric: `β̂ = ‖A‖²/σ`, `σ̂ = θ²/β` with θ the smallest singular
/// value of `A`. With a metric `E`: `β̂ = λmax(E A H⁻¹ Aᵀ E)` and
/// `σ̂ = λmin(E A L⁻¹ Aᵀ E)`, where `f` is 1-strongly convex in the `H` norm
/// and 1-smooth in the `L` norm. `H` and `L` default to `σI` and `βI`.
pub fn dual_regularity(
    reg: &Regularity,
    a: &Matrix,
    metric: Option<&DiagonalMetric>,
    h: Option<&Matrix>,
    l: Option<&Matrix>,
) -> Result<DualRegularity> {
    let theta = linalg::smallest_singular_value(a)?;
    if metric.is_none() && h.is_none() && l.is_none() {
        let norm_a = a.to_dense().singular_values().max();
        return DualRegularity::new(theta * theta / reg.beta, norm_a * norm_a / reg.sigma);
    }
    let p = a.rows();
    let e = match metric {
        Some(e) => {
            check_dim("metric dimension", p, e.dim())?;
            e.clone()
        }
        None => DiagonalMetric::identity(p),
    };
    let n = a.cols();
    let h = h.cloned().unwrap_or_else(|| Matrix::from_diagonal(&vec![reg.sigma; n]));
    let l = l.cloned().unwrap_or_else(|| Matrix::from_diagonal(&vec![reg.beta; n]));
    let beta_hat = metric_spectrum(&e, a, &h)?.lambda_max;
    let sigma_hat = metric_spectrum(&e, a, &l)?.lambda_min;
    if sigma_hat <= 0.0 {
        return Err(Error::RankDeficient { rank: 0, expected: p });
    }
    DualRegularity::new(sigma_hat, beta_hat)
}

/// Spectrum of `E A M⁻¹ Aᵀ E` for positive definite `M`.
pub(crate) fn metric_spectrum(e: &DiagonalMetric, a: &Matrix, m: &Matrix) -> Result<linalg::SpectralSummary> {
    check_dim("metric matrix", a.cols(), m.rows())?;
    let chol = nalgebra::Cholesky::new(m.to_dense())
        .ok_or(Error::NotPositiveDefinite("metric matrices H and L must be positive definite"))?;
    let ad = a.to_dense();
    let s = &ad * chol.solve(&ad.transpose());
    let s = (&s + s.transpose()) * 0.5;
    linalg::spectral_summary_dense(&e.congruence(&s), DEFAULT_ZERO_TOL)
}

/// Optimal linear rate bounds from different analyses, all in terms of
/// the dual regularity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompetingRates {
    pub kappa_hat: f64,
    /// `√(1 − σ̂/(2β̂))`, relaxation ½.
    pub lions_mercier: f64,
    /// `√(1 − σ̂/β̂)`, relaxation 1.
    pub davis_yin: f64,
    /// `√(1/(1 + 1/√κ̂))`.
    pub deng_yin: f64,
    /// Quadratic-program ADMM bound; coincides with the tight bound.
    pub ghadimi_qp: f64,
    /// `(√κ̂ − 1)/(√κ̂ + 1)`, attained by the worst-case instances.
    pub tight: f64,
}

pub fn competing_rates(dual: &DualRegularity) -> CompetingRates {
    let ratio = dual.sigma_hat / dual.beta_hat;
    let sk = dual.kappa_hat.sqrt();
    let tight = (sk - 1.0) / (sk + 1.0);
    CompetingRates {
        kappa_hat: dual.kappa_hat,
        lions_mercier: (1.0 - ratio / 2.0).sqrt(),
        davis_yin: (1.0 - ratio).sqrt(),
        deng_yin: (1.0 / (1.0 + 1.0 / sk)).sqrt(),
        ghadimi_qp: tight,
        tight,
    }
}
