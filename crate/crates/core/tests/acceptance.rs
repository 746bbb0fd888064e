//! One test per acceptance criterion; each writes a PASS/FAIL line to stderr.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Instant, SystemTime};

use proptest::test_runner::TestRunner;
use proxsplit::admm::{verify_dual_equivalence, AdmmSolver, AdmmState, EqConstrainedProblem};
use proxsplit::bench::lasso::{gen_lasso, LassoSpec};
use proxsplit::bench::mpc::{dynamics_matrix, single_sample, MpcSpec};
use proxsplit::bench::rng::SplitMix64;
use proxsplit::bench::sweep::{log_grid, run_sweep};
use proxsplit::linalg::{spectral_radius, Matrix};
use proxsplit::metric::gamma_from_metric;
use proxsplit::prox::ProxFn;
use proxsplit::rates::{competing_rates, contraction_factor, feasible_alpha_interval, DualRegularity, Regularity};
use proxsplit::splitting::{dr_solve, dr_step, DrConfig};
use proxsplit::worstcase::{
    adversarial_case, verify_grid, Coordinate, Setting, Variant, WorstCaseInstance, ALPHAS, GAMMA_RATIOS, KAPPAS,
};

mod common;

/// Writes past the test harness capture so every line lands in the log.
fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "criterion {id:>2} {verdict} {name}: {detail}");
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

#[test]
fn c01_tightness_grid() {
    let t = Instant::now();
    let mut worst_ratio: f64 = 0.0;
    let mut worst_bound: f64 = 0.0;
    let mut points = 0;
    for k in KAPPAS {
        let reg = Regularity::new(1.0, k).unwrap();
        for row in verify_grid(&reg, false, &GAMMA_RATIOS, &ALPHAS, 60).unwrap() {
            worst_ratio = worst_ratio.max(row.max_abs_diff);
            worst_bound = worst_bound.max((row.exact_rate - row.bound).abs());
            points += 1;
        }
    }
    let secs = t.elapsed().as_secs_f64();
    let pass = points == 36 && worst_ratio <= 1e-10 && worst_bound <= 1e-12 && secs < 10.0;
    report(
        1,
        "tightness",
        pass,
        &format!("{points} points, max |ratio - exact| {worst_ratio:.2e}, max |exact - bound| {worst_bound:.2e}, {secs:.2}s"),
    );
}

#[test]
fn c02_optimal_rate() {
    let reg = Regularity::new(1.0, 4.0).unwrap();
    let inst = WorstCaseInstance::new(reg, Variant::G1, Setting::Primal, Coordinate::Sigma).unwrap();
    let ratios = inst.measured_ratios(0.5, 1.0, 30).unwrap();
    let dev = ratios.iter().map(|r| (r - 1.0 / 3.0).abs()).fold(0.0, f64::max);

    let mut one_step: f64 = 0.0;
    let flat = Regularity::new(2.0, 2.0).unwrap();
    for variant in [Variant::G1, Variant::G2] {
        for coord in [Coordinate::Beta, Coordinate::Sigma] {
            let b = WorstCaseInstance::new(flat, variant, Setting::Primal, coord).unwrap().build().unwrap();
            let cfg = DrConfig::new(flat.gamma_star(), 1.0, 1, 1.0).unwrap();
            let z1 = dr_step(&b.f, &b.g, &cfg, &b.z0).unwrap().z_next;
            one_step = one_step.max(common::norm(&z1));
        }
    }
    let pass = ratios.len() == 30 && dev <= 1e-10 && one_step <= f64::EPSILON;
    report(
        2,
        "optimal rate",
        pass,
        &format!("max |ratio - 1/3| {dev:.2e} over {} steps; beta = sigma residual after one step {one_step:.2e}", ratios.len()),
    );
}

#[test]
fn c03_divergence() {
    let cases = [(4.0, 0.2), (25.0, 1.0), (100.0, 5.0)];
    let mut ok = true;
    let mut growth = Vec::new();
    for (k, ratio) in cases {
        let reg = Regularity::new(1.0, k).unwrap();
        let gamma = ratio * reg.gamma_star();
        let alpha = 1.01 * feasible_alpha_interval(contraction_factor(&reg, gamma).unwrap()).1;
        let case = adversarial_case(alpha, gamma, &reg).unwrap();
        let b = WorstCaseInstance::new(reg, case.variant, Setting::Primal, case.coordinate)
            .unwrap()
            .build()
            .unwrap();
        let cfg = DrConfig::new(gamma, alpha, 100, 1e-12).unwrap();
        let sol = dr_solve(&b.f, &b.g, &cfg, &b.z0, Some(&[0.0, 0.0])).unwrap();
        let d = &sol.trace.distances;
        ok &= d.len() == 101 && d.windows(2).all(|w| w[1] >= w[0]) && !sol.trace.converged;
        growth.push(format!("{:.3}", d[d.len() - 1] / d[0]));
    }
    report(
        3,
        "divergence",
        ok,
        &format!("distance growth over 100 iterations {}", growth.join(", ")),
    );
}

fn random_qp(rng: &mut SplitMix64) -> (EqConstrainedProblem, Vec<f64>) {
    let n = 2 + rng.below(19);
    let p = 1 + rng.below(n);
    let r: Vec<f64> = (0..n * n).map(|_| rng.normal()).collect();
    let r = nalgebra::DMatrix::from_row_slice(n, n, &r);
    let q = r.transpose() * &r + nalgebra::DMatrix::identity(n, n) * 0.5;
    let q = (&q + q.transpose()) * 0.5;
    let lin: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
    let a: Vec<f64> = (0..p * n).map(|_| rng.normal()).collect();
    let c: Vec<f64> = (0..p).map(|_| rng.normal()).collect();
    let w: Vec<f64> = (0..p).map(|_| rng.uniform()).collect();
    let z0: Vec<f64> = (0..p).map(|_| 3.0 * rng.normal()).collect();
    let prob = EqConstrainedProblem::new(
        ProxFn::quadratic(&Matrix::from(q), lin).unwrap(),
        ProxFn::weighted_l1(w).unwrap(),
        Matrix::from_row_slice(p, n, &a).unwrap(),
        Matrix::from_diagonal(&vec![-1.0; p]),
        c,
    )
    .unwrap();
    (prob, z0)
}

#[test]
fn c04_dual_equivalence() {
    let mut rng = SplitMix64::new(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let (p, z0) = random_qp(&mut rng);
        for alpha in [0.5, 0.99, 1.0] {
            for gamma in [0.1, 1.0, 10.0] {
                worst = worst.max(verify_dual_equivalence(&p, gamma, alpha, 50, &z0).unwrap());
            }
        }
    }
    report(
        4,
        "DR/ADMM dual equivalence",
        worst <= 1e-8,
        &format!("max deviation {worst:.2e} over 10 problems x 9 (alpha, gamma) pairs"),
    );
}

#[test]
fn c05_dual_rate() {
    let inst = WorstCaseInstance::new(
        Regularity::new(1.0, 4.0).unwrap(),
        Variant::G1,
        Setting::Dual { theta: 1.0, zeta: 3.0 },
        Coordinate::Sigma,
    )
    .unwrap();
    let dual = inst.iteration_regularity();
    let gamma = 1.0 / (dual.beta() * dual.sigma()).sqrt();
    let ratios = inst.measured_ratios(gamma, 1.0, 50).unwrap();
    let dev = ratios.iter().map(|r| (r - 5.0 / 7.0).abs()).fold(0.0, f64::max);
    let pass = (dual.kappa() - 36.0).abs() < 1e-12 && ratios.len() == 50 && dev <= 1e-8;
    report(
        5,
        "dual rate",
        pass,
        &format!("kappa_hat {}, gamma {gamma:.6}, max |ratio - 5/7| {dev:.2e}", dual.kappa()),
    );
}

#[test]
fn c06_prox_correctness() {
    use common::catalog::{check_sample, check_scalar, sample, scalar_member, GAMMAS};

    let mut runner = TestRunner::new(common::config(10_000, 6));
    let catalog = runner.run(&sample(), |(m, gamma, z1, z2)| check_sample(&m, gamma, &z1, &z2));
    let mut runner = TestRunner::new(common::config(10_000, 7));
    let scalar = runner.run(&(scalar_member(), 0..3usize, -10.0..10.0f64), |(m, gi, z)| {
        check_scalar(&m, GAMMAS[gi], z)
    });
    let detail = format!(
        "catalog Moreau/nonexpansive 10^4 samples: {}; scalar golden-section 10^4 samples: {}",
        catalog.as_ref().map(|_| "ok".to_string()).unwrap_or_else(|e| format!("{e:?}")),
        scalar.as_ref().map(|_| "ok".to_string()).unwrap_or_else(|e| e.to_string()),
    );
    report(6, "prox correctness", catalog.is_ok() && scalar.is_ok(), &detail);
}

#[test]
fn c07_rate_dominance() {
    let mut min_gap = f64::INFINITY;
    for k in log_grid(1.0, 1.0, 1e6, 50).unwrap() {
        let r = competing_rates(&DualRegularity::new(1.0, k).unwrap());
        for other in [r.lions_mercier, r.davis_yin, r.deng_yin] {
            min_gap = min_gap.min(other - r.tight);
        }
    }
    report(
        7,
        "rate dominance",
        min_gap >= -1e-12,
        &format!("min (competitor - tight) over 50 points {min_gap:.2e}"),
    );
}

#[test]
fn c08_lasso() {
    let t = Instant::now();
    let inst = gen_lasso(&LassoSpec::desk(0)).unwrap();
    let e = inst.select_metric().unwrap();
    let mut runs = Vec::new();
    for metric in [None, Some(&e)] {
        let dual = inst.dual_regularity(metric).unwrap();
        let center = dual.as_regularity().gamma_star();
        let grid = log_grid(center, 0.01, 100.0, 41).unwrap();
        runs.push(run_sweep(&inst.problem, Some(&dual), metric, 1.0, &grid, center, 1e-5, 100_000).unwrap());
    }
    let secs = t.elapsed().as_secs_f64();
    let sound = runs.iter().all(|r| {
        r.points
            .iter()
            .all(|p| p.converged && p.iterations_bound.is_none_or(|b| p.iterations_actual as u64 <= b))
    });
    // indices 10, 20, 30 are γ/γ* = 0.1, 1, 10
    let at = |r: usize, i: usize| runs[r].points[i].iterations_actual;
    let better = [10, 20, 30].iter().all(|&i| at(1, i) <= at(0, i));
    let argmins: Vec<usize> = runs.iter().map(|r| r.argmin_iterations().unwrap()).collect();
    let near = argmins.iter().all(|&i| i.abs_diff(20) <= 1);
    let pass = sound && better && near && secs < 60.0;
    report(
        8,
        "lasso desk",
        pass,
        &format!(
            "(a) bounds hold: {sound}; (b) identity {}/{}/{} vs equilibrated {}/{}/{} at 0.1/1/10: {better}; \
             (c) argmin indices {argmins:?} (gamma* at 20): {near}; {secs:.1}s",
            at(0, 10),
            at(0, 20),
            at(0, 30),
            at(1, 10),
            at(1, 20),
            at(1, 30)
        ),
    );
}

#[test]
fn c09_mpc() {
    let inst = single_sample(&MpcSpec::default()).unwrap();
    let h = inst.heuristic_metric().unwrap();
    let scaled = inst.problem.precondition(&h.metric).unwrap();
    let alpha = 0.5;
    let auto = AdmmSolver::new(&scaled)
        .unwrap()
        .solve(h.gamma, alpha, 1e-5, 100_000, AdmmState::zeros(&scaled), None)
        .unwrap();
    let plain = AdmmSolver::new(&inst.problem)
        .unwrap()
        .solve(gamma_from_metric(&h.unscaled), alpha, 1e-5, 100_000, AdmmState::zeros(&inst.problem), None)
        .unwrap();
    let rho = spectral_radius(&dynamics_matrix()).unwrap();
    let converged = auto.trace.converged && plain.trace.converged;
    let improved = auto.trace.iterations < plain.trace.iterations;
    let radius_ok = (rho - 1.313).abs() <= 5e-4;
    report(
        9,
        "mpc desk",
        converged && improved && radius_ok,
        &format!(
            "converged: {converged}; preconditioned {} vs plain {} iterations at gamma*: {improved}; \
             spectral radius {rho:.7} vs 1.313 (tol 5e-4): {radius_ok}",
            auto.trace.iterations, plain.trace.iterations
        ),
    );
}

const SUITES: [&str; 10] = [
    "proxsplit",
    "linalg_props",
    "prox_oracle",
    "rates_props",
    "splitting_props",
    "admm_props",
    "metric_props",
    "worstcase_props",
    "bench_props",
    "cli",
];

fn modified(p: &Path) -> SystemTime {
    p.metadata().and_then(|m| m.modified()).unwrap_or(SystemTime::UNIX_EPOCH)
}

/// Number of tests a libtest executable lists; `None` for other programs.
fn listed_tests(p: &Path) -> Option<usize> {
    let out = Command::new(p).args(["--list", "--format", "terse"]).output().ok()?;
    if !out.status.success() {
        return None;
    }
    Some(String::from_utf8_lossy(&out.stdout).lines().filter(|l| l.ends_with(": test")).count())
}

/// The newest non-empty test executable for each suite next to this one.
fn sibling_suites() -> Vec<PathBuf> {
    let me = std::env::current_exe().unwrap();
    let mut best: Vec<(String, SystemTime, PathBuf)> = Vec::new();
    for entry in std::fs::read_dir(me.parent().unwrap()).unwrap().flatten() {
        let path = entry.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else { continue };
        let Some((stem, hash)) = name.rsplit_once('-') else { continue };
        if !SUITES.contains(&stem) || hash.len() != 16 || !hash.chars().all(|c| c.is_ascii_hexdigit()) {
            continue;
        }
        if !listed_tests(&path).is_some_and(|n| n > 0) {
            continue;
        }
        let t = modified(&path);
        match best.iter_mut().find(|(s, _, _)| s == stem) {
            Some(slot) if slot.1 < t => *slot = (stem.to_string(), t, path),
            Some(_) => {}
            None => best.push((stem.to_string(), t, path)),
        }
    }
    best.into_iter().map(|(_, _, p)| p).collect()
}

#[test]
fn c10_invariant_suites() {
    let t = Instant::now();
    let suites = sibling_suites();
    let mut failed = Vec::new();
    let mut seen = Vec::new();
    for s in &suites {
        let name = s.file_name().unwrap().to_string_lossy().into_owned();
        let status = Command::new(s).arg("--quiet").output().unwrap().status;
        if !status.success() {
            failed.push(name.clone());
        }
        seen.push(name.rsplit_once('-').unwrap().0.to_string());
    }
    let missing: Vec<&str> = SUITES.iter().copied().filter(|s| !seen.iter().any(|n| n == s)).collect();
    let secs = t.elapsed().as_secs_f64();
    let pass = failed.is_empty() && missing.is_empty() && secs < 300.0;
    report(
        10,
        "invariant suites",
        pass,
        &format!("{} suite binaries, failed {failed:?}, missing {missing:?}, {secs:.1}s", suites.len()),
    );
}
