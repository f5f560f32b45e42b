//! Dense matrices over `f64` and exact rationals.

use std::fmt;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar.
pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parse `3`, `-2/5` or `0.125` into an exact rational.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Input(format!("bad number `{s}`"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Input(format!("zero denominator in `{s}`")));
        }
        return Ok(Q::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(p) => (&s[..p], s[p + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| bad())? };
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = Q::from_integer(num);
    if scale >= 0 {
        r *= Q::from_integer(num::pow(ten, scale as usize));
    } else {
        r /= Q::from_integer(num::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -r } else { r })
}

pub fn q_to_f64(x: &Q) -> f64 {
    ToPrimitive::to_f64(x).unwrap_or(f64::NAN)
}

/// Best rational approximation of a double, exact for dyadic values.
pub fn q_from_f64(x: f64) -> Q {
    Q::from_float(x).unwrap_or_else(<Q as Zero>::zero)
}

/// Scalar field used by [`Matrix`]. Reference arithmetic avoids cloning
/// big rationals in inner loops.
pub trait Scalar: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add_ref(&self, o: &Self) -> Self;
    fn sub_ref(&self, o: &Self) -> Self;
    fn mul_ref(&self, o: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    fn from_q(x: &Q) -> Self;
    fn to_f64(&self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> f64 {
        0.0
    }
    fn one() -> f64 {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add_ref(&self, o: &f64) -> f64 {
        self + o
    }
    fn sub_ref(&self, o: &f64) -> f64 {
        self - o
    }
    fn mul_ref(&self, o: &f64) -> f64 {
        self * o
    }
    fn neg_ref(&self) -> f64 {
        -self
    }
    fn from_q(x: &Q) -> f64 {
        q_to_f64(x)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for Q {
    fn zero() -> Q {
        <Q as Zero>::zero()
    }
    fn one() -> Q {
        <Q as One>::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add_ref(&self, o: &Q) -> Q {
        self + o
    }
    fn sub_ref(&self, o: &Q) -> Q {
        self - o
    }
    fn mul_ref(&self, o: &Q) -> Q {
        self * o
    }
    fn neg_ref(&self) -> Q {
        -self
    }
    fn from_q(x: &Q) -> Q {
        x.clone()
    }
    fn to_f64(&self) -> f64 {
        q_to_f64(self)
    }
}

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type Mat = Matrix<f64>;
pub type QMat = Matrix<Q>;

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length does not match shape");
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Ok(Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn column(v: &[T]) -> Self {
        Matrix { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    pub fn diag(d: &[T]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n, n);
        for (i, x) in d.iter().enumerate() {
            m.data[i * n + i] = x.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn to_f64(&self) -> Mat {
        self.map(|x| x.to_f64())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn is_symmetric_exact(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.shape(), o.shape(), "add: shape mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a.add_ref(b)).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!(self.shape(), o.shape(), "sub: shape mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a.sub_ref(b)).collect(),
        }
    }

    pub fn add_assign(&mut self, o: &Self) {
        assert_eq!(self.shape(), o.shape(), "add_assign: shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&o.data) {
            if !b.is_zero() {
                *a = a.add_ref(b);
            }
        }
    }

    pub fn scale(&self, s: &T) -> Self {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a.mul_ref(s)).collect() }
    }

    pub fn neg(&self) -> Self {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a.neg_ref()).collect() }
    }

    /// Matrix product; zero entries of the left factor are skipped, which
    /// keeps sparse exact products cheap.
    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "mul: inner dimensions differ");
        let mut out = Self::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                let orow = &o.data[k * o.cols..(k + 1) * o.cols];
                let out_row = &mut out.data[i * o.cols..(i + 1) * o.cols];
                for (dst, b) in out_row.iter_mut().zip(orow) {
                    if !b.is_zero() {
                        *dst = dst.add_ref(&a.mul_ref(b));
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "mul_vec: dimension mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = T::zero();
                for (a, b) in self.row(i).iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc.add_ref(&a.mul_ref(b));
                    }
                }
                acc
            })
            .collect()
    }

    /// Kronecker product `self ⊗ o`.
    pub fn kron(&self, o: &Self) -> Self {
        let (r, c) = (self.rows * o.rows, self.cols * o.cols);
        let mut out = Self::zeros(r, c);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..o.rows {
                    for l in 0..o.cols {
                        let b = o.get(k, l);
                        if !b.is_zero() {
                            out.set(i * o.rows + k, j * o.cols + l, a.mul_ref(b));
                        }
                    }
                }
            }
        }
        out
    }

    /// Add `s * block` into the block with top-left corner `(r0, c0)`.
    pub fn add_block_scaled(&mut self, r0: usize, c0: usize, s: &T, block: &Self) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                let b = block.get(i, j);
                if !b.is_zero() {
                    let dst = self.get_mut(r0 + i, c0 + j);
                    *dst = dst.add_ref(&s.mul_ref(b));
                }
            }
        }
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Self) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self.set(r0 + i, c0 + j, block.get(i, j).clone());
            }
        }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self.get(r0 + i, c0 + j).clone())
    }

    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]).clone())
    }

    pub fn hstack(parts: &[&Self]) -> Self {
        let rows = parts.first().map_or(0, |p| p.rows);
        assert!(parts.iter().all(|p| p.rows == rows), "hstack: row counts differ");
        let cols = parts.iter().map(|p| p.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let mut c0 = 0;
        for p in parts {
            out.set_block(0, c0, p);
            c0 += p.cols;
        }
        out
    }

    pub fn vstack(parts: &[&Self]) -> Self {
        let cols = parts.first().map_or(0, |p| p.cols);
        assert!(parts.iter().all(|p| p.cols == cols), "vstack: column counts differ");
        let rows = parts.iter().map(|p| p.rows).sum();
        let mut out = Self::zeros(rows, cols);
        let mut r0 = 0;
        for p in parts {
            out.set_block(r0, 0, p);
            r0 += p.rows;
        }
        out
    }

    pub fn block_diag(parts: &[&Self]) -> Self {
        let rows = parts.iter().map(|p| p.rows).sum();
        let cols = parts.iter().map(|p| p.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for p in parts {
            out.set_block(r0, c0, p);
            r0 += p.rows;
            c0 += p.cols;
        }
        out
    }

    pub fn trace(&self) -> T {
        let mut acc = T::zero();
        for i in 0..self.rows.min(self.cols) {
            acc = acc.add_ref(self.get(i, i));
        }
        acc
    }
}

impl Mat {
    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn symmetrize(&self) -> Mat {
        let t = self.transpose();
        self.add(&t).scale(&0.5)
    }

    pub fn symmetry_residual(&self) -> f64 {
        self.sub(&self.transpose()).max_abs()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }
}

impl<T: Scalar> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl QMat {
    /// Exact reduced row echelon form; returns the pivot columns.
    pub fn rref(&self) -> (QMat, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !Scalar::is_zero(m.get(i, c))) else {
                continue;
            };
            if p != r {
                for j in 0..m.cols {
                    m.data.swap(p * m.cols + j, r * m.cols + j);
                }
            }
            let inv = m.get(r, c).recip();
            for j in 0..m.cols {
                let v = m.get(r, j) * &inv;
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let f = m.get(i, c).clone();
                if Scalar::is_zero(&f) {
                    continue;
                }
                for j in 0..m.cols {
                    let v = m.get(i, j) - &f * m.get(r, j);
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank_exact(&self) -> usize {
        self.rref().1.len()
    }

    /// Exact nullspace basis, one column per free variable.
    pub fn nullspace_exact(&self) -> QMat {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = QMat::zeros(self.cols, free.len());
        for (k, &fc) in free.iter().enumerate() {
            out.set(fc, k, q(1));
            for (row, &pc) in pivots.iter().enumerate() {
                out.set(pc, k, -r.get(row, fc).clone());
            }
        }
        out
    }

    /// Exact inverse, or `None` when singular.
    pub fn inverse_exact(&self) -> Option<QMat> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let aug = QMat::hstack(&[self, &QMat::identity(n)]);
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        Some(r.block(0, n, n, n))
    }
}

/// Exact `P M Pᵀ = L D Lᵀ` with symmetric (diagonal) pivoting.
#[derive(Clone, Debug)]
pub struct Ldlt {
    /// Row permutation: row `i` of the factored matrix is row `perm[i]` of `M`.
    pub perm: Vec<usize>,
    pub l: QMat,
    pub d: Vec<Q>,
}

impl Ldlt {
    /// Factor a symmetric rational matrix. Fails when a zero pivot meets a
    /// nonzero off-diagonal column, which happens exactly when `M` is
    /// indefinite in a way no diagonal pivot can absorb. Such matrices are
    /// never positive semidefinite, so callers use the failure as a
    /// certificate of non-definiteness.
    pub fn factor(m: &QMat) -> std::result::Result<Ldlt, String> {
        if !m.is_symmetric_exact() {
            return Err("matrix is not symmetric".into());
        }
        let n = m.rows();
        let mut a = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut l = QMat::identity(n);
        let mut d = Vec::with_capacity(n);
        for k in 0..n {
            // choose the largest |diagonal| among the remaining rows
            let mut best = k;
            for i in k..n {
                if a.get(i, i).abs() > a.get(best, best).abs() {
                    best = i;
                }
            }
            if best != k {
                swap_sym(&mut a, k, best);
                perm.swap(k, best);
                for j in 0..k {
                    let t = l.get(k, j).clone();
                    l.set(k, j, l.get(best, j).clone());
                    l.set(best, j, t);
                }
            }
            let pivot = a.get(k, k).clone();
            if Scalar::is_zero(&pivot) {
                if (k + 1..n).any(|i| !Scalar::is_zero(a.get(i, k))) {
                    return Err(format!("zero pivot with nonzero column at step {k}"));
                }
                d.push(pivot);
                continue;
            }
            for i in k + 1..n {
                let lik = a.get(i, k) / &pivot;
                l.set(i, k, lik.clone());
            }
            for i in k + 1..n {
                for j in k + 1..=i {
                    let v = a.get(i, j) - l.get(i, k) * a.get(k, j);
                    a.set(i, j, v.clone());
                    a.set(j, i, v);
                }
            }
            for i in k + 1..n {
                a.set(i, k, q(0));
                a.set(k, i, q(0));
            }
            d.push(pivot);
        }
        Ok(Ldlt { perm, l, d })
    }

    /// Rebuild `M` from the factors.
    pub fn reconstruct(&self) -> QMat {
        let n = self.d.len();
        let ld = QMat::from_fn(n, n, |i, j| self.l.get(i, j) * &self.d[j]);
        let pm = ld.mul(&self.l.transpose());
        let mut out = QMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out.set(self.perm[i], self.perm[j], pm.get(i, j).clone());
            }
        }
        out
    }

    pub fn is_psd(&self) -> bool {
        self.d.iter().all(|x| !x.is_negative())
    }
}

fn swap_sym(a: &mut QMat, i: usize, j: usize) {
    let n = a.rows();
    for c in 0..n {
        let t = a.get(i, c).clone();
        a.set(i, c, a.get(j, c).clone());
        a.set(j, c, t);
    }
    for r in 0..n {
        let t = a.get(r, i).clone();
        a.set(r, i, a.get(r, j).clone());
        a.set(r, j, t);
    }
}
