mod common;

use common::{config, dense, low_rank_psd, mat, spd};
use nalgebra::DMatrix;
use proptest::prelude::*;
use proxsplit::linalg::{
    kkt_p11, smallest_singular_value, spectral_summary, DiagonalMetric, Matrix, PseudoInverse,
};

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, b| a.max(b.abs()))
}

proptest! {
    #![proptest_config(config(128, 11))]

    #[test]
    fn identity_congruence_keeps_spectrum(s in spd(6, 0.0)) {
        let e = DiagonalMetric::identity(6);
        let a = spectral_summary(&mat(&s), 1e-10).unwrap();
        let b = spectral_summary(&mat(&e.congruence(&s)), 1e-10).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn smallest_singular_value_squared_is_gram_minimum(a in dense(4, 7)) {
        let sv = smallest_singular_value(&mat(&a)).unwrap();
        let gram = &a * a.transpose();
        let s = spectral_summary(&mat(&((&gram + gram.transpose()) * 0.5)), 1e-10).unwrap();
        prop_assert!((sv * sv - s.lambda_min).abs() <= 1e-8 * s.lambda_min.max(1e-300));
    }

    #[test]
    fn kkt_block_identities(q in low_rank_psd(6, 4), l in dense(2, 6)) {
        let q = q + DMatrix::identity(6, 6) * 0.1;
        let p11 = kkt_p11(&mat(&q), &mat(&l)).unwrap().to_dense();
        prop_assert!(max_abs(&(&l * &p11)) <= 1e-8);
        // Q P11 + Lᵀ P21 = I: the residual I − Q P11 must lie in range(Lᵀ)
        let r = DMatrix::identity(6, 6) - &q * &p11;
        let lt = l.transpose();
        let p21 = (&l * &lt).cholesky().unwrap().solve(&(&l * &r));
        prop_assert!(max_abs(&(&lt * p21 - &r)) <= 1e-8);
    }

    #[test]
    fn pseudo_inverse_is_linear_and_reflexive(q in low_rank_psd(5, 3), x in prop::collection::vec(-1.0..1.0f64, 5), y in prop::collection::vec(-1.0..1.0f64, 5), t in -3.0..3.0f64) {
        let pinv = PseudoInverse::new(&mat(&q), 1e-10).unwrap();
        let combo: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + t * b).collect();
        let lhs = pinv.apply(&combo);
        let (px, py) = (pinv.apply(&x), pinv.apply(&y));
        let scale = 1.0 + common::norm(&lhs);
        for i in 0..5 {
            prop_assert!((lhs[i] - px[i] - t * py[i]).abs() <= 1e-8 * scale);
        }
        let qd = Matrix::from(q.clone());
        let mut cols = DMatrix::zeros(5, 5);
        for j in 0..5 {
            let mut e = vec![0.0; 5];
            e[j] = 1.0;
            cols.set_column(j, &nalgebra::DVector::from_vec(pinv.apply(&e)));
        }
        let qq = qd.to_dense();
        prop_assert!(max_abs(&(&cols * &qq * &cols - &cols)) <= 1e-8 * (1.0 + max_abs(&cols)));
    }
}
