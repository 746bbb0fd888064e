mod common;

use common::catalog::{check_sample, check_scalar, sample, scalar_member, GAMMAS};
use common::{config, dist, mat, spd};
use proptest::prelude::*;
use proxsplit::prox::ProxFn;

proptest! {
    #![proptest_config(config(10_000, 21))]

    #[test]
    fn moreau_identity_and_nonexpansiveness((m, gamma, z1, z2) in sample()) {
        check_sample(&m, gamma, &z1, &z2)?;
    }
}

proptest! {
    #![proptest_config(config(2_000, 22))]

    #[test]
    fn scalar_prox_matches_golden_section(m in scalar_member(), gi in 0..3usize, z in -10.0..10.0f64) {
        check_scalar(&m, GAMMAS[gi], z)?;
    }

    #[test]
    fn reflected_prox_of_quadratic_contracts(q in spd(3, 0.2), gi in 0..3usize, x in common::catalog::vec_in(3, -5.0, 5.0), y in common::catalog::vec_in(3, -5.0, 5.0)) {
        let gamma = GAMMAS[gi];
        let eig = q.clone().symmetric_eigen().eigenvalues;
        let (sigma, beta) = (eig.min(), eig.max());
        let delta = ((gamma * beta - 1.0) / (gamma * beta + 1.0)).max((1.0 - gamma * sigma) / (1.0 + gamma * sigma));
        let f = ProxFn::quadratic(&mat(&q), vec![0.5, -1.0, 2.0]).unwrap();
        let rx = f.reflected_prox(gamma, &x).unwrap();
        let ry = f.reflected_prox(gamma, &y).unwrap();
        prop_assert!(dist(&rx, &ry) <= delta * dist(&x, &y) + 1e-12);
    }

    #[test]
    fn cocoercive_part_is_nonexpansive(q in spd(3, 0.2), gi in 0..3usize, x in common::catalog::vec_in(3, -5.0, 5.0), y in common::catalog::vec_in(3, -5.0, 5.0)) {
        let gamma = GAMMAS[gi];
        let eig = q.clone().symmetric_eigen().eigenvalues;
        let (sigma, beta) = (eig.min(), eig.max());
        prop_assume!(beta - sigma > 1e-6 * beta);
        let (lo, hi) = (1.0 / (1.0 + gamma * beta), 1.0 / (1.0 + gamma * sigma));
        let f = ProxFn::quadratic(&mat(&q), vec![0.0; 3]).unwrap();
        let c = |v: &[f64]| -> Vec<f64> {
            let p = f.prox(gamma, v).unwrap();
            p.iter().zip(v).map(|(p, v)| (p - lo * v) * 2.0 / (hi - lo) - v).collect()
        };
        prop_assert!(dist(&c(&x), &c(&y)) <= dist(&x, &y) * (1.0 + 1e-9));
    }
}

#[test]
fn worst_case_quadratic_attains_reflection_factor() {
    let (beta, sigma) = (4.0, 1.0);
    let f = ProxFn::quadratic(&proxsplit::linalg::Matrix::from_diagonal(&[beta, sigma]), vec![0.0; 2]).unwrap();
    for gamma in [0.1, 0.5, 3.0] {
        let delta = ((gamma * beta - 1.0) / (gamma * beta + 1.0)).max((1.0 - gamma * sigma) / (1.0 + gamma * sigma));
        let axis = if gamma * beta - 1.0 > 1.0 - gamma * sigma { [1.0, 0.0] } else { [0.0, 1.0] };
        let r = f.reflected_prox(gamma, &axis).unwrap();
        assert!((common::norm(&r) - delta).abs() < 1e-15);
    }
}
