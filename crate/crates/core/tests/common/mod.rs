//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use ncpoly::eval::{evaluate, QTuple, Tuple};
use ncpoly::matrix::{q, QMat, Q};
use ncpoly::random::{random_rational_symmetric, Rng64};
use ncpoly::FreePoly;

/// Coefficients `c_0, …, c_m` of the matrix polynomial `t ↦ p(A + tE, X + tH)`
/// obtained by exact Vandermonde interpolation at `t = 0, …, m`.
pub fn t_coefficients(p: &FreePoly, t: &QTuple, use_e: bool, m: usize) -> Vec<QMat> {
    let vals: Vec<QMat> = (0..=m)
        .map(|s| {
            let s = q(s as i64);
            let shift = |base: &[QMat], dir: &Option<Vec<QMat>>| -> Vec<QMat> {
                match dir {
                    Some(d) => base.iter().zip(d).map(|(b, dd)| b.add(&dd.scale(&s))).collect(),
                    None => base.to_vec(),
                }
            };
            let a = if use_e { shift(&t.a, &t.e) } else { t.a.clone() };
            let x = shift(&t.x, &t.h);
            evaluate(p, &Tuple { n: t.n, a, x, e: None, h: None, v: None }).unwrap()
        })
        .collect();
    let vand = QMat::from_fn(m + 1, m + 1, |i, j| {
        let mut acc = q(1);
        for _ in 0..j {
            acc *= q(i as i64);
        }
        acc
    });
    let inv = vand.inverse_exact().unwrap();
    (0..=m)
        .map(|k| {
            let mut acc = QMat::zeros(vals[0].rows(), vals[0].cols());
            for (i, v) in vals.iter().enumerate() {
                acc.add_assign(&v.scale(inv.get(k, i)));
            }
            acc
        })
        .collect()
}

pub fn degree_bound(p: &FreePoly) -> usize {
    p.degree().max(0) as usize
}

/// `p_x(A, X)[H]` by interpolation.
pub fn px_oracle(p: &FreePoly, t: &QTuple) -> QMat {
    t_coefficients(p, t, false, degree_bound(p).max(1))[1].clone()
}

/// `p_xx(A, X)[H]` by interpolation.
pub fn pxx_oracle(p: &FreePoly, t: &QTuple) -> QMat {
    t_coefficients(p, t, false, degree_bound(p).max(2))[2].scale(&q(2))
}

/// `p′(A, X)[E, H]` by interpolation.
pub fn pfull_oracle(p: &FreePoly, t: &QTuple) -> QMat {
    t_coefficients(p, t, true, degree_bound(p).max(1))[1].clone()
}

/// Random rational point with directions `E`, `H`.
pub fn rational_point(r: &mut Rng64, n: usize, ga: usize, gx: usize) -> QTuple {
    let mut f = |k: usize| (0..k).map(|_| random_rational_symmetric(r, n, 4, 3)).collect::<Vec<_>>();
    let a = f(ga);
    let x = f(gx);
    let e = f(ga);
    let h = f(gx);
    Tuple { n, a, x, e: Some(e), h: Some(h), v: None }
}

pub fn qm(rows: &[&[i64]]) -> QMat {
    QMat::from_rows(rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect()).unwrap()
}

pub fn qscalar(x: &Q) -> QMat {
    QMat::from_vec(1, 1, vec![x.clone()])
}
