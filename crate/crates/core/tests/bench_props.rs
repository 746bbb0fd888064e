use proxsplit::admm::{AdmmSolver, AdmmState};
use proxsplit::bench::lasso::{gen_lasso, LassoSpec};
use proxsplit::bench::mpc::{single_sample, MpcSpec};
use proxsplit::bench::sweep::{log_grid, run_sweep};
use proxsplit::metric::gamma_from_metric;
use proxsplit::rates::{contraction_factor, iteration_bound, rate_bound, Regularity};
use proxsplit::worstcase::{Coordinate, Setting, Variant, WorstCaseInstance};

fn lasso_csv(seed: u64, auto: bool, alpha: f64) -> String {
    let inst = gen_lasso(&LassoSpec::desk(seed)).unwrap();
    let metric = auto.then(|| inst.select_metric().unwrap());
    let dual = inst.dual_regularity(metric.as_ref()).unwrap();
    let center = dual.as_regularity().gamma_star();
    let grid = log_grid(center, 0.01, 100.0, 9).unwrap();
    run_sweep(&inst.problem, Some(&dual), metric.as_ref(), alpha, &grid, center, 1e-5, 100_000)
        .unwrap()
        .to_csv()
}

#[test]
fn identical_inputs_give_identical_output() {
    let a = gen_lasso(&LassoSpec::desk(3)).unwrap();
    let b = gen_lasso(&LassoSpec::desk(3)).unwrap();
    assert_eq!(a.data, b.data);
    assert_eq!(a.rhs, b.rhs);
    assert_eq!(lasso_csv(3, true, 1.0), lasso_csv(3, true, 1.0));
    assert_ne!(gen_lasso(&LassoSpec::desk(4)).unwrap().rhs, a.rhs);
}

#[test]
fn certified_bounds_hold_on_lasso_sweeps() {
    for seed in 0..3 {
        let inst = gen_lasso(&LassoSpec::desk(seed)).unwrap();
        for auto in [false, true] {
            let metric = auto.then(|| inst.select_metric().unwrap());
            let dual = inst.dual_regularity(metric.as_ref()).unwrap();
            let center = dual.as_regularity().gamma_star();
            let grid = log_grid(center, 0.01, 100.0, 9).unwrap();
            for alpha in [0.5, 1.0] {
                let res = run_sweep(&inst.problem, Some(&dual), metric.as_ref(), alpha, &grid, center, 1e-5, 100_000)
                    .unwrap();
                for p in &res.points {
                    assert!(p.error.is_none());
                    if let Some(b) = p.iterations_bound {
                        assert!(p.converged);
                        assert!(p.iterations_actual as u64 <= b + 1, "seed {seed} auto {auto} α {alpha}: {p:?}");
                    }
                }
            }
        }
    }
}

/// With the fixed-point residual rule, a run contracting exactly by `r` per
/// step stops `⌈ln(1 − r)/ln r⌉` iterations before `rᵏ ≤ tol`.
#[test]
fn dual_worst_case_sweep_matches_its_bound() {
    let inst = WorstCaseInstance::new(
        Regularity::new(1.0, 4.0).unwrap(),
        Variant::G1,
        Setting::Dual { theta: 1.0, zeta: 3.0 },
        Coordinate::Sigma,
    )
    .unwrap();
    let reg = inst.iteration_regularity();
    let gamma = reg.gamma_star();
    let rate = rate_bound(contraction_factor(&reg, gamma).unwrap(), 1.0);
    let tol = 1e-8;
    let bound = iteration_bound(rate, tol).unwrap();
    let b = inst.build().unwrap();
    let p = b.problem.unwrap();
    let solver = AdmmSolver::new(&p).unwrap();
    let start = solver.state_from_dual(gamma, &b.z0).unwrap();
    let sol = solver.solve(gamma, 1.0, tol, 10_000, start, None).unwrap();
    assert!(sol.trace.converged);
    let early = ((1.0 - rate).ln() / rate.ln()).ceil() as u64;
    let actual = sol.trace.iterations as u64;
    assert!(actual <= bound && bound - actual <= early + 1, "actual {actual}, bound {bound}");
}

#[test]
fn preconditioning_helps_the_mpc_sample() {
    let inst = single_sample(&MpcSpec::default()).unwrap();
    let h = inst.heuristic_metric().unwrap();
    let scaled = inst.problem.precondition(&h.metric).unwrap();
    let auto = AdmmSolver::new(&scaled)
        .unwrap()
        .solve(h.gamma, 0.5, 1e-5, 100_000, AdmmState::zeros(&scaled), None)
        .unwrap();
    let plain = AdmmSolver::new(&inst.problem)
        .unwrap()
        .solve(gamma_from_metric(&h.unscaled), 0.5, 1e-5, 100_000, AdmmState::zeros(&inst.problem), None)
        .unwrap();
    assert!(auto.trace.converged);
    assert!(auto.trace.iterations < plain.trace.iterations);
}
