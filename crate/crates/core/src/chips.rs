//! Chip sets: the tails `v` of factorizations `w = u x_j v` of the terms of a
//! polynomial, and the row polynomials over them that vanish on point sets.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::eval::{evaluate_word, tuple_direct_sum, MatrixTuple, QTuple, Tuple};
use crate::linalg::{nullspace, DEFAULT_TOL};
use crate::matrix::{Mat, Matrix, QMat, Scalar};
use crate::poly::FreePoly;
use crate::word::{Kind, Word};

/// Per-variable chip sets `ℛ𝒞_p^j` for `j = 1..g`, in canonical word order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChipSet {
    pub per_variable: BTreeMap<usize, BTreeSet<Word>>,
    pub union: BTreeSet<Word>,
    /// `β_j = |ℛ𝒞_p^j|` for `j = 1..g` (index `j − 1`).
    pub beta: Vec<usize>,
}

impl ChipSet {
    fn from_map(per_variable: BTreeMap<usize, BTreeSet<Word>>, g: usize) -> ChipSet {
        let union = per_variable.values().flatten().cloned().collect();
        let beta = (1..=g).map(|j| per_variable.get(&j).map_or(0, |s| s.len())).collect();
        ChipSet { per_variable, union, beta }
    }

    pub fn get(&self, j: usize) -> impl Iterator<Item = &Word> {
        self.per_variable.get(&j).into_iter().flatten()
    }

    pub fn is_empty(&self) -> bool {
        self.union.is_empty()
    }
}

/// Right chips: for every `x_j` occurrence, the word to its right.
pub fn right_chip_sets(p: &FreePoly) -> ChipSet {
    let mut map: BTreeMap<usize, BTreeSet<Word>> = BTreeMap::new();
    for w in p.terms().keys() {
        for pos in w.positions(Kind::X) {
            let j = w.letters()[pos].idx();
            map.entry(j).or_default().insert(w.slice(pos + 1, w.len()));
        }
    }
    ChipSet::from_map(map, p.max_index(Kind::X))
}

/// Left chips: for every `x_j` occurrence, the word to its left.
pub fn left_chip_sets(p: &FreePoly) -> ChipSet {
    let mut map: BTreeMap<usize, BTreeSet<Word>> = BTreeMap::new();
    for w in p.terms().keys() {
        for pos in w.positions(Kind::X) {
            let j = w.letters()[pos].idx();
            map.entry(j).or_default().insert(w.slice(0, pos));
        }
    }
    ChipSet::from_map(map, p.max_index(Kind::X))
}

/// Secondary right chips: tails to the right of an `x_ℓ` that has at least
/// one more x to its left, keyed by `ℓ`.
pub fn secondary_right_chips(p: &FreePoly) -> BTreeMap<usize, BTreeSet<Word>> {
    let mut map: BTreeMap<usize, BTreeSet<Word>> = BTreeMap::new();
    for w in p.terms().keys() {
        for &pos in w.positions(Kind::X).iter().skip(1) {
            let j = w.letters()[pos].idx();
            map.entry(j).or_default().insert(w.slice(pos + 1, w.len()));
        }
    }
    map
}

/// Secondary left chips: heads to the left of an `x_ℓ` that has at least one
/// more x to its right, keyed by `ℓ`.
pub fn secondary_left_chips(p: &FreePoly) -> BTreeMap<usize, BTreeSet<Word>> {
    let mut map: BTreeMap<usize, BTreeSet<Word>> = BTreeMap::new();
    for w in p.terms().keys() {
        let xs = w.positions(Kind::X);
        for &pos in xs.iter().take(xs.len().saturating_sub(1)) {
            let j = w.letters()[pos].idx();
            map.entry(j).or_default().insert(w.slice(0, pos));
        }
    }
    map
}

/// Chip words in the column order used by [`chip_annihilator`].
pub fn chip_columns(p: &FreePoly) -> Vec<Word> {
    right_chip_sets(p).union.into_iter().collect()
}

/// Coefficient map of `q ↦ q(A, X)v` on `𝒞_p^{1×κ}`: column `(f, α)` holds
/// `f(A, X) v_α`, rows are stacked over the points.
pub fn chip_evaluation_matrix<T: Scalar>(p: &FreePoly, points: &[Tuple<T>]) -> Result<Matrix<T>> {
    let chips = chip_columns(p);
    let kappa = p.kappa();
    let rows: usize = points.iter().map(|t| t.n).sum();
    let mut m = Matrix::<T>::zeros(rows, chips.len() * kappa);
    let mut r0 = 0;
    for t in points {
        let v = t.v.as_ref().ok_or_else(|| Error::Input("every point needs a vector v".into()))?;
        if v.len() != kappa * t.n {
            return Err(Error::Shape(format!("v has length {}, expected κn = {}", v.len(), kappa * t.n)));
        }
        for (ci, f) in chips.iter().enumerate() {
            let fm = evaluate_word(f, t)?;
            for al in 0..kappa {
                let y = fm.mul_vec(&v[al * t.n..(al + 1) * t.n]);
                for (i, yi) in y.into_iter().enumerate() {
                    m.set(r0 + i, ci * kappa + al, yi);
                }
            }
        }
        r0 += t.n;
    }
    Ok(m)
}

/// Basis (as columns over `(chip word, α)`) of the row polynomials in the
/// chip space that vanish at every point: `q(Aᵢ, Xᵢ)vᵢ = 0`.
pub fn chip_annihilator(p: &FreePoly, points: &[MatrixTuple]) -> Result<Mat> {
    let m = chip_evaluation_matrix(p, points)?;
    if points.is_empty() {
        return Ok(Mat::identity(m.cols()));
    }
    Ok(nullspace(&m, DEFAULT_TOL))
}

/// Exact annihilator at rational points.
pub fn chip_annihilator_exact(p: &FreePoly, points: &[QTuple]) -> Result<QMat> {
    let m = chip_evaluation_matrix(p, points)?;
    if points.is_empty() {
        return Ok(QMat::identity(m.cols()));
    }
    Ok(m.nullspace_exact())
}

/// Direct sum of a nonempty list of points, vectors included.
pub fn dominating_direct_sum<T: Scalar>(points: &[Tuple<T>]) -> Result<Tuple<T>> {
    let (first, rest) = points.split_first().ok_or_else(|| Error::Input("no points given".into()))?;
    let mut acc = first.clone();
    for t in rest {
        acc = tuple_direct_sum(&acc, t)?;
    }
    Ok(acc)
}
