use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use proxsplit::prox::ProxFn;

use super::{dist, mat, norm, spd};

pub const GAMMAS: [f64; 3] = [0.01, 1.0, 100.0];

/// A catalog member together with an independently derived prox of its
/// conjugate.
#[derive(Debug, Clone)]
pub enum Member {
    Zero(usize),
    IndicatorZero(usize),
    Box(Vec<f64>, Vec<f64>),
    WeightedL1(Vec<f64>),
    Pwl(Vec<f64>, Vec<f64>, f64),
    Quadratic(DMatrix<f64>, Vec<f64>),
    Affine(DMatrix<f64>, Vec<f64>),
    AffineQuadratic(DMatrix<f64>, Vec<f64>, DMatrix<f64>, Vec<f64>),
    Separable(Vec<Member>),
}

impl Member {
    pub fn dim(&self) -> usize {
        match self {
            Member::Zero(n) | Member::IndicatorZero(n) => *n,
            Member::Box(lo, _) => lo.len(),
            Member::WeightedL1(w) => w.len(),
            Member::Pwl(l, _, _) => l.len(),
            Member::Quadratic(_, q) | Member::AffineQuadratic(_, q, _, _) => q.len(),
            Member::Affine(l, _) => l.ncols(),
            Member::Separable(parts) => parts.iter().map(Member::dim).sum(),
        }
    }

    pub fn build(&self) -> ProxFn {
        match self {
            Member::Zero(n) => ProxFn::Zero { dim: *n },
            Member::IndicatorZero(n) => ProxFn::IndicatorZero { dim: *n },
            Member::Box(lo, hi) => ProxFn::boxed(lo.clone(), hi.clone()).unwrap(),
            Member::WeightedL1(w) => ProxFn::weighted_l1(w.clone()).unwrap(),
            Member::Pwl(l, u, s) => ProxFn::pwl_penalty(l.clone(), u.clone(), *s).unwrap(),
            Member::Quadratic(q, lin) => ProxFn::quadratic(&mat(q), lin.clone()).unwrap(),
            Member::Affine(l, b) => ProxFn::indicator_affine(&mat(l), b.clone()).unwrap(),
            Member::AffineQuadratic(q, lin, l, b) => {
                ProxFn::affine_quadratic(&mat(q), lin.clone(), &mat(l), b.clone()).unwrap()
            }
            Member::Separable(parts) => ProxFn::Separable(parts.iter().map(Member::build).collect()),
        }
    }

    /// `prox_{t f*}(v)` from the closed form of `f*`.
    pub fn conj_prox(&self, t: f64, v: &[f64]) -> Vec<f64> {
        match self {
            Member::Zero(n) => vec![0.0; *n],
            Member::IndicatorZero(_) => v.to_vec(),
            // f* = Σ max(lo y, hi y)
            Member::Box(lo, hi) => (0..v.len())
                .map(|i| {
                    if v[i] > t * hi[i] {
                        v[i] - t * hi[i]
                    } else if v[i] < t * lo[i] {
                        v[i] - t * lo[i]
                    } else {
                        0.0
                    }
                })
                .collect(),
            // f* = ι{|y| ≤ w}
            Member::WeightedL1(w) => v.iter().zip(w).map(|(x, w)| x.clamp(-w, *w)).collect(),
            // f* = u y on [0, s], l y on [−s, 0]
            Member::Pwl(l, u, s) => (0..v.len())
                .map(|i| {
                    if v[i] > t * u[i] {
                        (v[i] - t * u[i]).min(*s)
                    } else if v[i] < t * l[i] {
                        (v[i] - t * l[i]).max(-s)
                    } else {
                        0.0
                    }
                })
                .collect(),
            // f* = ½(y − q)ᵀQ⁻¹(y − q): (tI + Q) y = Qv + tq
            Member::Quadratic(q, lin) => {
                let n = lin.len();
                let lhs = q + DMatrix::identity(n, n) * t;
                let rhs = q * DVector::from_column_slice(v) + DVector::from_column_slice(lin) * t;
                lhs.lu().solve(&rhs).unwrap().iter().copied().collect()
            }
            // f* = ⟨x₀, y⟩ + ι{y ∈ range Lᵀ}, x₀ the least-norm solution
            Member::Affine(l, b) => {
                let llt = (l * l.transpose()).cholesky().unwrap();
                let vv = DVector::from_column_slice(v);
                let proj = l.transpose() * llt.solve(&(l * &vv));
                let x0 = l.transpose() * llt.solve(&DVector::from_column_slice(b));
                (proj - x0 * t).iter().copied().collect()
            }
            // y = v − t x*, x* minimizing f(x) + (t/2)‖x − v/t‖² over a
            // null-space parametrization x = x₀ + N w
            Member::AffineQuadratic(q, lin, l, b) => {
                let n = lin.len();
                let llt = (l * l.transpose()).cholesky().unwrap();
                let x0 = l.transpose() * llt.solve(&DVector::from_column_slice(b));
                let eig = (l.transpose() * l).symmetric_eigen();
                let cols: Vec<_> = (0..n)
                    .filter(|&j| eig.eigenvalues[j] < 1e-10)
                    .map(|j| eig.eigenvectors.column(j).into_owned())
                    .collect();
                let nb = DMatrix::from_columns(&cols);
                let vv = DVector::from_column_slice(v);
                let h = nb.transpose() * (q + DMatrix::identity(n, n) * t) * &nb;
                let g = nb.transpose() * (q * &x0 + DVector::from_column_slice(lin) + &x0 * t - &vv);
                let w = h.cholesky().unwrap().solve(&(-g));
                let x = x0 + nb * w;
                (vv - x * t).iter().copied().collect()
            }
            Member::Separable(parts) => {
                let mut out = Vec::with_capacity(v.len());
                let mut off = 0;
                for p in parts {
                    let d = p.dim();
                    out.extend(p.conj_prox(t, &v[off..off + d]));
                    off += d;
                }
                out
            }
        }
    }
}

pub fn vec_in(n: usize, lo: f64, hi: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(lo..hi, n)
}

fn interval(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (vec_in(n, -3.0, 3.0), vec_in(n, 0.0, 4.0))
        .prop_map(|(lo, w)| (lo.clone(), lo.iter().zip(&w).map(|(a, b)| a + b).collect()))
}

pub fn scalar_member() -> impl Strategy<Value = Member> {
    prop_oneof![
        Just(Member::Zero(1)),
        Just(Member::IndicatorZero(1)),
        interval(1).prop_map(|(lo, hi)| Member::Box(lo, hi)),
        vec_in(1, 0.0, 3.0).prop_map(Member::WeightedL1),
        (interval(1), 0.0..10.0f64).prop_map(|((l, u), s)| Member::Pwl(l, u, s)),
        (0.0..5.0f64, -3.0..3.0f64).prop_map(|(q, lin)| Member::Quadratic(DMatrix::from_element(1, 1, q), vec![lin])),
    ]
}

fn block_member(n: usize) -> impl Strategy<Value = Member> {
    prop_oneof![
        Just(Member::Zero(n)),
        Just(Member::IndicatorZero(n)),
        interval(n).prop_map(|(lo, hi)| Member::Box(lo, hi)),
        vec_in(n, 0.0, 3.0).prop_map(Member::WeightedL1),
        (interval(n), 0.0..10.0f64).prop_map(|((l, u), s)| Member::Pwl(l, u, s)),
        (spd(n, 0.1), vec_in(n, -3.0, 3.0)).prop_map(|(q, lin)| Member::Quadratic(q, lin)),
        (super::dense(2, n), vec_in(2, -2.0, 2.0)).prop_map(|(l, b)| Member::Affine(l, b)),
        (spd(n, 0.1), vec_in(n, -3.0, 3.0), super::dense(2, n), vec_in(2, -2.0, 2.0))
            .prop_map(|(q, lin, l, b)| Member::AffineQuadratic(q, lin, l, b)),
    ]
}

pub fn member() -> impl Strategy<Value = Member> {
    prop_oneof![
        4 => block_member(4),
        1 => (block_member(4), scalar_member(), block_member(3))
            .prop_map(|(a, b, c)| Member::Separable(vec![a, b, c])),
    ]
}

pub fn sample() -> impl Strategy<Value = (Member, f64, Vec<f64>, Vec<f64>)> {
    (member(), 0..3usize).prop_flat_map(|(m, gi)| {
        let n = m.dim();
        (Just(m), Just(GAMMAS[gi]), vec_in(n, -10.0, 10.0), vec_in(n, -10.0, 10.0))
    })
}

/// `φ(a) − φ(b)` for `φ(x) = γf(x) + ½(x − z)²`, written so that nearby
/// arguments cancel exactly.
fn objective_gap(m: &Member, gamma: f64, z: f64, a: f64, b: f64) -> f64 {
    let quad = 0.5 * (a - b) * (a + b - 2.0 * z);
    let f = match m {
        Member::Zero(_) | Member::IndicatorZero(_) | Member::Box(..) => 0.0,
        Member::WeightedL1(w) => w[0] * (a.abs() - b.abs()),
        Member::Pwl(l, u, s) => {
            let (l, u) = (l[0], u[0]);
            let gap = if a > u && b > u {
                a - b
            } else if a < l && b < l {
                b - a
            } else if (l..=u).contains(&a) && (l..=u).contains(&b) {
                0.0
            } else {
                let pen = |x: f64| (x - u).max(l - x).max(0.0);
                pen(a) - pen(b)
            };
            s * gap
        }
        Member::Quadratic(q, lin) => 0.5 * q[(0, 0)] * (a - b) * (a + b) + lin[0] * (a - b),
        _ => unreachable!("scalar members only"),
    };
    gamma * f + quad
}

pub fn golden_section(m: &Member, gamma: f64, z: f64) -> f64 {
    let (mut lo, mut hi) = match m {
        Member::IndicatorZero(_) => return 0.0,
        Member::Box(l, h) => (l[0], h[0]),
        Member::WeightedL1(w) => (z - gamma * w[0] - 1.0, z + gamma * w[0] + 1.0),
        Member::Pwl(_, _, s) => (z - gamma * s - 1.0, z + gamma * s + 1.0),
        Member::Quadratic(_, lin) => {
            let r = z.abs() + gamma * lin[0].abs() + 1.0;
            (-r, r)
        }
        _ => (z - 1.0, z + 1.0),
    };
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - phi * (hi - lo);
    let mut b = lo + phi * (hi - lo);
    for _ in 0..400 {
        if hi - lo <= 1e-14 * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if objective_gap(m, gamma, z, a, b) <= 0.0 {
            hi = b;
            b = a;
            a = hi - phi * (hi - lo);
        } else {
            lo = a;
            a = b;
            b = lo + phi * (hi - lo);
        }
    }
    0.5 * (lo + hi)
}


/// Nonexpansiveness, the Moreau identity against the independent conjugate
/// prox, and agreement of the library conjugate prox.
pub fn check_sample(m: &Member, gamma: f64, z1: &[f64], z2: &[f64]) -> Result<(), TestCaseError> {
    let f = m.build();
    let p1 = f.prox(gamma, z1).unwrap();
    let p2 = f.prox(gamma, z2).unwrap();
    prop_assert!(dist(&p1, &p2) <= dist(z1, z2) * (1.0 + 1e-12) + 1e-12);

    let scaled: Vec<f64> = z1.iter().map(|v| v / gamma).collect();
    let c = m.conj_prox(1.0 / gamma, &scaled);
    let residual = (0..z1.len())
        .map(|i| (p1[i] + gamma * c[i] - z1[i]).abs())
        .fold(0.0, f64::max);
    prop_assert!(residual <= 1e-10, "Moreau residual {residual:e} for {m:?}");

    let lib = f.prox_conjugate(gamma, z1).unwrap();
    let indep = m.conj_prox(gamma, z1);
    // both routes lose accuracy in proportion to the size of the result
    let scale = 1.0 + norm(z1) + norm(&indep);
    prop_assert!(dist(&lib, &indep) <= 1e-10 * scale, "{:e} vs scale {scale:e}", dist(&lib, &indep));
    Ok(())
}

pub fn check_scalar(m: &Member, gamma: f64, z: f64) -> Result<(), TestCaseError> {
    let got = m.build().prox(gamma, &[z]).unwrap()[0];
    let want = golden_section(m, gamma, z);
    prop_assert!((got - want).abs() <= 1e-8, "{m:?} γ={gamma} z={z}: {got} vs {want}");
    Ok(())
}
