//! Browser bindings for rate curves, worst-case trajectories and competing
//! rate bounds. The computations live in [`model`] so they run natively too.

use wasm_bindgen::prelude::*;

pub mod model {
    use proxsplit::rates::{competing_rates, contraction_factor, rate_bound, DualRegularity, Regularity};
    use proxsplit::splitting::{dr_step, DrConfig};
    use proxsplit::worstcase::{adversarial_case, Setting, WorstCaseInstance};

    pub type Result<T> = std::result::Result<T, String>;

    fn err(e: proxsplit::Error) -> String {
        e.to_string()
    }

    /// Logarithmic grid from `lo` to `hi` with `points` entries.
    pub fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
        if !(lo > 0.0 && hi > lo && points >= 2) {
            return Err(format!("need 0 < lo < hi and points ≥ 2, got {lo}, {hi}, {points}"));
        }
        let (a, b) = (lo.ln(), hi.ln());
        Ok((0..points)
            .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
            .collect())
    }

    /// Rows `(γ, |1 − α| + αδ(γ), exact worst-case rate)` over `γ ∈ [lo, hi]`.
    pub fn rate_curve(sigma: f64, beta: f64, alpha: f64, lo: f64, hi: f64, points: usize) -> Result<Vec<[f64; 3]>> {
        let reg = Regularity::new(sigma, beta).map_err(err)?;
        log_grid(lo, hi, points)?
            .into_iter()
            .map(|gamma| {
                let delta = contraction_factor(&reg, gamma).map_err(err)?;
                let case = adversarial_case(alpha, gamma, &reg).map_err(err)?;
                let inst = WorstCaseInstance::new(reg, case.variant, Setting::Primal, case.coordinate).map_err(err)?;
                Ok([gamma, rate_bound(delta, alpha), inst.exact_rate(gamma, alpha).map_err(err)?])
            })
            .collect()
    }

    /// Iterates `z⁰, …, z^iters` of relaxed Douglas-Rachford on the instance
    /// attaining the bound at `(γ, α)`, with the bound `(|1 − α| + αδ)^k ‖z⁰‖`.
    pub struct Trajectory {
        pub points: Vec<[f64; 2]>,
        pub envelope: Vec<f64>,
        pub rate: f64,
    }

    pub fn worst_case_trajectory(sigma: f64, beta: f64, gamma: f64, alpha: f64, iters: usize) -> Result<Trajectory> {
        let reg = Regularity::new(sigma, beta).map_err(err)?;
        let case = adversarial_case(alpha, gamma, &reg).map_err(err)?;
        let built = WorstCaseInstance::new(reg, case.variant, Setting::Primal, case.coordinate)
            .and_then(|i| i.build())
            .map_err(err)?;
        let cfg = DrConfig::new(gamma, alpha, iters, f64::MIN_POSITIVE).map_err(err)?;
        let rate = rate_bound(contraction_factor(&reg, gamma).map_err(err)?, alpha);
        // excite both axes so the path is visible in the plane
        let mut z = vec![built.z0[0] + 0.3, built.z0[1] + 0.3];
        let z0_norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut points = vec![[z[0], z[1]]];
        for _ in 0..iters {
            z = dr_step(&built.f, &built.g, &cfg, &z).map_err(err)?.z_next;
            points.push([z[0], z[1]]);
        }
        let envelope = (0..=iters).map(|k| z0_norm * rate.powi(k as i32)).collect();
        Ok(Trajectory { points, envelope, rate })
    }

    /// Rows `(κ̂, Lions-Mercier, Davis-Yin, Deng-Yin, Ghadimi QP, tight)`.
    pub fn competing_curves(kappa_lo: f64, kappa_hi: f64, points: usize) -> Result<Vec<[f64; 6]>> {
        if kappa_lo < 1.0 {
            return Err(format!("need κ̂ ≥ 1, got {kappa_lo}"));
        }
        log_grid(kappa_lo, kappa_hi, points)?
            .into_iter()
            .map(|kappa| {
                let c = competing_rates(&DualRegularity::new(1.0, kappa).map_err(err)?);
                Ok([kappa, c.lions_mercier, c.davis_yin, c.deng_yin, c.ghadimi_qp, c.tight])
            })
            .collect()
    }
}

fn js(e: String) -> JsError {
    JsError::new(&e)
}

/// Flat rows of three: `γ`, bound, exact worst-case rate.
#[wasm_bindgen(js_name = rateCurve)]
pub fn rate_curve(sigma: f64, beta: f64, alpha: f64, lo: f64, hi: f64, points: usize) -> Result<Vec<f64>, JsError> {
    Ok(model::rate_curve(sigma, beta, alpha, lo, hi, points).map_err(js)?.concat())
}

/// Flat rows of three: `z₁`, `z₂`, bound on `‖z^k‖`. The last entry is the rate.
#[wasm_bindgen(js_name = worstCaseTrajectory)]
pub fn worst_case_trajectory(sigma: f64, beta: f64, gamma: f64, alpha: f64, iters: usize) -> Result<Vec<f64>, JsError> {
    let t = model::worst_case_trajectory(sigma, beta, gamma, alpha, iters).map_err(js)?;
    let mut out: Vec<f64> = t
        .points
        .iter()
        .zip(&t.envelope)
        .flat_map(|(p, e)| [p[0], p[1], *e])
        .collect();
    out.push(t.rate);
    Ok(out)
}

/// Flat rows of six: `κ̂` and five rate bounds.
#[wasm_bindgen(js_name = competingCurves)]
pub fn competing_curves(kappa_lo: f64, kappa_hi: f64, points: usize) -> Result<Vec<f64>, JsError> {
    Ok(model::competing_curves(kappa_lo, kappa_hi, points).map_err(js)?.concat())
}

/// `1/√(βσ)`.
#[wasm_bindgen(js_name = gammaStar)]
pub fn gamma_star(sigma: f64, beta: f64) -> Result<f64, JsError> {
    proxsplit::rates::Regularity::new(sigma, beta)
        .map(|r| r.gamma_star())
        .map_err(|e| js(e.to_string()))
}
