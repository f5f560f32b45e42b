//! Dense real linear algebra: symmetric eigenproblems, inertia, SVD,
//! rank, pseudoinverse and range tests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Mat;

/// Default relative tolerance for rank and inertia decisions.
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct SymEig {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, matching `values`.
    pub vectors: Mat,
}

/// Cyclic Jacobi eigendecomposition of the symmetric part of `m`.
pub fn sym_eig(m: &Mat) -> Result<SymEig> {
    if !m.is_square() {
        return Err(Error::Shape(format!("sym_eig needs a square matrix, got {:?}", m.shape())));
    }
    let n = m.rows();
    let mut a: Vec<f64> = m.symmetrize().data().to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if scale > 0.0 {
        for _sweep in 0..100 {
            let mut off = 0.0;
            for p in 0..n {
                for q in p + 1..n {
                    off += a[p * n + q] * a[p * n + q];
                }
            }
            if off.sqrt() <= 1e-15 * scale {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[p * n + q];
                    if apq.abs() <= f64::MIN_POSITIVE {
                        continue;
                    }
                    let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = Mat::from_fn(n, n, |r, c| v[r * n + order[c]]);
    Ok(SymEig { values, vectors })
}

pub fn eigenvalues(m: &Mat) -> Result<Vec<f64>> {
    Ok(sym_eig(m)?.values)
}

pub fn min_eigenvalue(m: &Mat) -> Result<f64> {
    Ok(sym_eig(m)?.values.first().copied().unwrap_or(0.0))
}

/// Counts of positive, negative and (numerically) zero eigenvalues.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Inertia {
    pub mu_plus: usize,
    pub mu_minus: usize,
    pub mu_zero: usize,
    pub tol: f64,
}

impl Inertia {
    pub fn from_values(values: &[f64], tol: f64) -> Inertia {
        let mu_plus = values.iter().filter(|&&x| x > tol).count();
        let mu_minus = values.iter().filter(|&&x| x < -tol).count();
        Inertia { mu_plus, mu_minus, mu_zero: values.len() - mu_plus - mu_minus, tol }
    }

    pub fn dim(&self) -> usize {
        self.mu_plus + self.mu_minus + self.mu_zero
    }
}

/// Inertia with an absolute threshold.
pub fn inertia(m: &Mat, tol: f64) -> Result<Inertia> {
    let vals = eigenvalues(m)?;
    Ok(Inertia::from_values(&vals, tol))
}

/// Inertia with threshold `rel_tol · max|λ|`.
pub fn inertia_rel(m: &Mat, rel_tol: f64) -> Result<Inertia> {
    let vals = eigenvalues(m)?;
    let big = vals.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    Ok(Inertia::from_values(&vals, (rel_tol * big).max(f64::MIN_POSITIVE)))
}

#[derive(Clone, Debug)]
pub struct Svd {
    /// `rows × k` with orthonormal columns where the singular value is nonzero.
    pub u: Mat,
    /// Descending, length `k = cols`.
    pub s: Vec<f64>,
    /// `cols × cols` orthogonal.
    pub v: Mat,
}

/// One-sided Jacobi SVD. Short-wide inputs are padded with zero rows so
/// that `v` is always a full orthogonal basis of the domain.
pub fn svd(m: &Mat) -> Svd {
    let (rows, cols) = m.shape();
    let r = rows.max(cols);
    let mut u = vec![0.0; r * cols];
    for i in 0..rows {
        for j in 0..cols {
            u[i * cols + j] = *m.get(i, j);
        }
    }
    let mut v = vec![0.0; cols * cols];
    for i in 0..cols {
        v[i * cols + i] = 1.0;
    }
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..r {
                    let up = u[i * cols + p];
                    let uq = u[i * cols + q];
                    alpha += up * up;
                    beta += uq * uq;
                    gamma += up * uq;
                }
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..r {
                    let up = u[i * cols + p];
                    let uq = u[i * cols + q];
                    u[i * cols + p] = c * up - s * uq;
                    u[i * cols + q] = s * up + c * uq;
                }
                for i in 0..cols {
                    let vp = v[i * cols + p];
                    let vq = v[i * cols + q];
                    v[i * cols + p] = c * vp - s * vq;
                    v[i * cols + q] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..cols)
        .map(|j| (0..r).map(|i| u[i * cols + j] * u[i * cols + j]).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    let s: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let umat = Mat::from_fn(rows, cols, |i, k| {
        let j = order[k];
        if norms[j] > 0.0 {
            u[i * cols + j] / norms[j]
        } else {
            0.0
        }
    });
    let vmat = Mat::from_fn(cols, cols, |i, k| v[i * cols + order[k]]);
    Svd { u: umat, s, v: vmat }
}

fn abs_threshold(s: &[f64], rel_tol: f64) -> f64 {
    rel_tol * s.first().copied().unwrap_or(0.0)
}

/// Numerical rank: singular values above `rel_tol · σ_max`.
pub fn rank(m: &Mat, rel_tol: f64) -> usize {
    if m.rows() == 0 || m.cols() == 0 {
        return 0;
    }
    let d = svd(m);
    let thr = abs_threshold(&d.s, rel_tol);
    d.s.iter().filter(|&&x| x > thr && x > 0.0).count()
}

fn rank_abs(m: &Mat, thr: f64) -> usize {
    if m.rows() == 0 || m.cols() == 0 {
        return 0;
    }
    svd(m).s.iter().filter(|&&x| x > thr && x > 0.0).count()
}

/// Moore–Penrose pseudoinverse.
pub fn pinv(m: &Mat) -> Mat {
    pinv_tol(m, DEFAULT_TOL)
}

pub fn pinv_tol(m: &Mat, rel_tol: f64) -> Mat {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return Mat::zeros(cols, rows);
    }
    let d = svd(m);
    let thr = abs_threshold(&d.s, rel_tol);
    let mut out = Mat::zeros(cols, rows);
    for (k, &sk) in d.s.iter().enumerate() {
        if sk <= thr || sk == 0.0 {
            continue;
        }
        let inv = 1.0 / sk;
        for i in 0..cols {
            let vik = *d.v.get(i, k) * inv;
            if vik == 0.0 {
                continue;
            }
            for j in 0..rows {
                let x = out.get(i, j) + vik * d.u.get(j, k);
                out.set(i, j, x);
            }
        }
    }
    out
}

/// Orthogonal projector onto the column space of `m`.
pub fn projection_onto_range(m: &Mat) -> Mat {
    projection_onto_range_tol(m, DEFAULT_TOL)
}

pub fn projection_onto_range_tol(m: &Mat, rel_tol: f64) -> Mat {
    let rows = m.rows();
    if m.cols() == 0 {
        return Mat::zeros(rows, rows);
    }
    let d = svd(m);
    let thr = abs_threshold(&d.s, rel_tol);
    let keep: Vec<usize> = (0..d.s.len()).filter(|&k| d.s[k] > thr && d.s[k] > 0.0).collect();
    let ur = Mat::from_fn(rows, keep.len(), |i, k| *d.u.get(i, keep[k]));
    ur.mul(&ur.transpose())
}

/// `range U ⊆ range W`, decided by `rank [W U] = rank W` with a common
/// singular-value threshold `rel_tol · σ_max([W U])`.
pub fn range_included(u: &Mat, w: &Mat, rel_tol: f64) -> Result<bool> {
    if u.rows() != w.rows() {
        return Err(Error::Shape(format!(
            "range_included: row counts {} and {} differ",
            u.rows(),
            w.rows()
        )));
    }
    if u.cols() == 0 || u.is_zero() {
        return Ok(true);
    }
    let both = Mat::hstack(&[w, u]);
    let d = svd(&both);
    let thr = abs_threshold(&d.s, rel_tol);
    let r_both = d.s.iter().filter(|&&x| x > thr && x > 0.0).count();
    let r_w = rank_abs(w, thr);
    Ok(r_both == r_w)
}

/// Orthonormal basis (as columns) of the nullspace of `m`.
pub fn nullspace(m: &Mat, rel_tol: f64) -> Mat {
    let cols = m.cols();
    if m.rows() == 0 || m.is_zero() {
        return Mat::identity(cols);
    }
    let d = svd(m);
    let thr = abs_threshold(&d.s, rel_tol);
    let keep: Vec<usize> = (0..cols).filter(|&k| !(d.s[k] > thr && d.s[k] > 0.0)).collect();
    Mat::from_fn(cols, keep.len(), |i, k| *d.v.get(i, keep[k]))
}

/// Orthonormal basis of the column space.
pub fn range_basis(m: &Mat, rel_tol: f64) -> Mat {
    let d = svd(m);
    let thr = abs_threshold(&d.s, rel_tol);
    let keep: Vec<usize> = (0..d.s.len()).filter(|&k| d.s[k] > thr && d.s[k] > 0.0).collect();
    Mat::from_fn(m.rows(), keep.len(), |i, k| *d.u.get(i, keep[k]))
}

/// Solve `m x = b` in the least-squares, minimum-norm sense.
pub fn lstsq(m: &Mat, b: &[f64]) -> Vec<f64> {
    pinv(m).mul_vec(b)
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Whether every column pair is orthonormal to `tol`.
pub fn is_orthogonal(u: &Mat, tol: f64) -> bool {
    u.is_square() && u.transpose().mul(u).sub(&Mat::identity(u.rows())).max_abs() <= tol
}

