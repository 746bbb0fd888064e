#![allow(dead_code)]

pub mod catalog;

use nalgebra::DMatrix;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};
use proxsplit::linalg::Matrix;

pub fn config(cases: u32, seed: u64) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(seed),
        failure_persistence: None,
        ..Config::default()
    }
}

/// Dense `rows × cols` matrix with entries in `[-1, 1]`.
pub fn dense(rows: usize, cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.0..1.0f64, rows * cols).prop_map(move |v| DMatrix::from_row_slice(rows, cols, &v))
}

/// `RᵀR + shift·I`, symmetrized.
pub fn spd(n: usize, shift: f64) -> impl Strategy<Value = DMatrix<f64>> {
    dense(n, n).prop_map(move |r| {
        let m = r.transpose() * &r + DMatrix::identity(n, n) * shift;
        (&m + m.transpose()) * 0.5
    })
}

/// Psd matrix of rank at most `rank`.
pub fn low_rank_psd(n: usize, rank: usize) -> impl Strategy<Value = DMatrix<f64>> {
    dense(rank, n).prop_map(|r| {
        let m = r.transpose() * &r;
        (&m + m.transpose()) * 0.5
    })
}

pub fn mat(m: &DMatrix<f64>) -> Matrix {
    Matrix::from(m.clone())
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
