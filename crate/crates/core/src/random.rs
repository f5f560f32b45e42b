//! Seeded random inputs: symmetric matrices, tuples and polynomials.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::eval::{MatrixTuple, QTuple, Tuple};
use crate::matrix::{q, q_frac, Mat, QMat};
use crate::poly::FreePoly;
use crate::word::{Generator, Word};

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(r: &mut Rng64) -> f64 {
    r.sample(StandardNormal)
}

pub fn random_vector(r: &mut Rng64, n: usize) -> Vec<f64> {
    (0..n).map(|_| normal(r)).collect()
}

pub fn random_matrix(r: &mut Rng64, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, |_, _| normal(r))
}

/// Symmetric matrix with Gaussian entries scaled by `1/√n`.
pub fn random_symmetric(r: &mut Rng64, n: usize) -> Mat {
    let g = random_matrix(r, n, n);
    let s = 1.0 / (2.0 * n as f64).sqrt();
    Mat::from_fn(n, n, |i, j| (g.get(i, j) + g.get(j, i)) * s)
}

/// Symmetric matrix with entries `k/den`, `|k| ≤ max_num`.
pub fn random_rational_symmetric(r: &mut Rng64, n: usize, max_num: i64, den: i64) -> QMat {
    let mut m = QMat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let x = q_frac(r.random_range(-max_num..=max_num), den);
            m.set(i, j, x.clone());
            m.set(j, i, x);
        }
    }
    m
}

/// Orthogonal matrix from Gram–Schmidt on a Gaussian matrix.
pub fn random_orthogonal(r: &mut Rng64, n: usize) -> Mat {
    loop {
        let g = random_matrix(r, n, n);
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut ok = true;
        for j in 0..n {
            let mut c = g.col(j);
            for _ in 0..2 {
                for b in &cols {
                    let d: f64 = c.iter().zip(b).map(|(x, y)| x * y).sum();
                    for (x, y) in c.iter_mut().zip(b) {
                        *x -= d * y;
                    }
                }
            }
            let nrm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nrm < 1e-8 {
                ok = false;
                break;
            }
            cols.push(c.into_iter().map(|x| x / nrm).collect());
        }
        if ok {
            return Mat::from_fn(n, n, |i, j| cols[j][i]);
        }
    }
}

pub fn random_tuple(r: &mut Rng64, n: usize, ga: usize, gx: usize) -> MatrixTuple {
    let a = (0..ga).map(|_| random_symmetric(r, n)).collect();
    let x = (0..gx).map(|_| random_symmetric(r, n)).collect();
    Tuple::new(n, a, x).expect("random tuple is well formed")
}

pub fn random_directions(r: &mut Rng64, n: usize, g: usize) -> Vec<Mat> {
    (0..g).map(|_| random_symmetric(r, n)).collect()
}

pub fn random_qtuple(r: &mut Rng64, n: usize, ga: usize, gx: usize) -> QTuple {
    let a = (0..ga).map(|_| random_rational_symmetric(r, n, 4, 3)).collect();
    let x = (0..gx).map(|_| random_rational_symmetric(r, n, 4, 3)).collect();
    Tuple::new(n, a, x).expect("random tuple is well formed")
}

/// Random word with `deg_x` x-letters and a-runs of length at most `max_run`.
pub fn random_word(r: &mut Rng64, ga: usize, gx: usize, deg_x: usize, max_run: usize) -> Word {
    let mut letters = Vec::new();
    for slot in 0..=deg_x {
        if ga > 0 && max_run > 0 {
            let run = r.random_range(0..=max_run);
            for _ in 0..run {
                letters.push(Generator::a(r.random_range(1..=ga)));
            }
        }
        if slot < deg_x {
            letters.push(Generator::x(r.random_range(1..=gx)));
        }
    }
    Word::new(letters)
}

/// Random scalar polynomial with `terms` monomials of x-degree up to `max_deg`
/// (one of them of degree exactly `max_deg`) and small integer coefficients.
pub fn random_poly(r: &mut Rng64, ga: usize, gx: usize, max_deg: usize, max_run: usize, terms: usize) -> FreePoly {
    let mut ts = Vec::new();
    for i in 0..terms {
        let d = if i == 0 { max_deg } else { r.random_range(0..=max_deg) };
        let w = random_word(r, ga, gx, d, max_run);
        let mut c = 0;
        while c == 0 {
            c = r.random_range(-3..=3);
        }
        ts.push((w, QMat::from_vec(1, 1, vec![q(c)])));
    }
    FreePoly::from_terms(1, 1, ts).expect("scalar shapes")
}

/// `p + pᵀ` for a random `p`, retried until the x-degree is `max_deg`.
pub fn random_symmetric_poly(r: &mut Rng64, ga: usize, gx: usize, max_deg: usize, max_run: usize, terms: usize) -> FreePoly {
    loop {
        let p = random_poly(r, ga, gx, max_deg, max_run, terms);
        let s = p.add(&p.transpose()).expect("same shape");
        if s.deg_x() == max_deg as i64 {
            return s;
        }
    }
}

/// Random rational `rows × cols` matrix with small integer entries.
pub fn random_int_matrix(r: &mut Rng64, rows: usize, cols: usize, max_abs: i64) -> QMat {
    QMat::from_fn(rows, cols, |_, _| q(r.random_range(-max_abs..=max_abs)))
}
