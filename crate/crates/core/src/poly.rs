use std::collections::BTreeMap;
use std::fmt;

use num::Signed;

use crate::error::{Error, Result};
use crate::matrix::{q, QMat, Scalar, Q};
use crate::word::{Generator, Kind, Word};

/// Highest letter count of each class over all terms; `-1` for the zero
/// polynomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Degrees {
    pub a: i64,
    pub x: i64,
    pub h: i64,
    pub e: i64,
}

/// A `κ × κ′` matrix-coefficient polynomial in symmetric noncommuting
/// variables, `p = Σ_w C_w w` with exact rational `C_w`.
#[derive(Clone, PartialEq)]
pub struct FreePoly {
    kappa: usize,
    kappa_p: usize,
    terms: BTreeMap<Word, QMat>,
    degrees: Degrees,
}

fn compute_degrees(terms: &BTreeMap<Word, QMat>) -> Degrees {
    let mut d = Degrees { a: -1, x: -1, h: -1, e: -1 };
    for w in terms.keys() {
        d.a = d.a.max(w.count(Kind::A) as i64);
        d.x = d.x.max(w.count(Kind::X) as i64);
        d.h = d.h.max(w.count(Kind::H) as i64);
        d.e = d.e.max(w.count(Kind::E) as i64);
    }
    d
}

impl FreePoly {
    pub fn zero(kappa: usize, kappa_p: usize) -> FreePoly {
        FreePoly {
            kappa,
            kappa_p,
            terms: BTreeMap::new(),
            degrees: Degrees { a: -1, x: -1, h: -1, e: -1 },
        }
    }

    /// Collect terms, summing repeated words and dropping zero coefficients.
    pub fn from_terms(
        kappa: usize,
        kappa_p: usize,
        terms: impl IntoIterator<Item = (Word, QMat)>,
    ) -> Result<FreePoly> {
        let mut map: BTreeMap<Word, QMat> = BTreeMap::new();
        for (w, c) in terms {
            if c.shape() != (kappa, kappa_p) {
                return Err(Error::Shape(format!(
                    "coefficient of `{w}` is {:?}, expected {:?}",
                    c.shape(),
                    (kappa, kappa_p)
                )));
            }
            match map.get_mut(&w) {
                Some(acc) => acc.add_assign(&c),
                None => {
                    map.insert(w, c);
                }
            }
        }
        map.retain(|_, c| !c.is_zero());
        let degrees = compute_degrees(&map);
        Ok(FreePoly { kappa, kappa_p, terms: map, degrees })
    }

    fn from_map(kappa: usize, kappa_p: usize, mut map: BTreeMap<Word, QMat>) -> FreePoly {
        map.retain(|_, c| !c.is_zero());
        let degrees = compute_degrees(&map);
        FreePoly { kappa, kappa_p, terms: map, degrees }
    }

    /// Scalar (1×1) monomial `c · w`.
    pub fn scalar_term(c: Q, w: Word) -> FreePoly {
        FreePoly::from_map(1, 1, BTreeMap::from([(w, QMat::from_vec(1, 1, vec![c]))]))
    }

    pub fn monomial(w: Word, c: QMat) -> FreePoly {
        let (k, kp) = c.shape();
        FreePoly::from_map(k, kp, BTreeMap::from([(w, c)]))
    }

    /// `I_κ ⊗ w`.
    pub fn identity_word(kappa: usize, w: Word) -> FreePoly {
        FreePoly::monomial(w, QMat::identity(kappa))
    }

    pub fn constant(c: QMat) -> FreePoly {
        FreePoly::monomial(Word::empty(), c)
    }

    pub fn scalar(c: Q) -> FreePoly {
        FreePoly::scalar_term(c, Word::empty())
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn kappa_p(&self) -> usize {
        self.kappa_p
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.kappa, self.kappa_p)
    }

    pub fn is_scalar(&self) -> bool {
        self.shape() == (1, 1)
    }

    pub fn terms(&self) -> &BTreeMap<Word, QMat> {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, w: &Word) -> Option<&QMat> {
        self.terms.get(w)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degrees(&self) -> Degrees {
        self.degrees
    }

    pub fn deg_x(&self) -> i64 {
        self.degrees.x
    }

    pub fn deg_a(&self) -> i64 {
        self.degrees.a
    }

    pub fn deg_h(&self) -> i64 {
        self.degrees.h
    }

    /// Total degree (longest word); `-1` for zero.
    pub fn degree(&self) -> i64 {
        self.terms.keys().map(|w| w.len() as i64).max().unwrap_or(-1)
    }

    /// Largest index used for each class, as `(g̃, g)` for `(a, x)`.
    pub fn arity(&self) -> (usize, usize) {
        let ga = self.terms.keys().map(|w| w.max_index(Kind::A)).max().unwrap_or(0);
        let gx = self.terms.keys().map(|w| w.max_index(Kind::X)).max().unwrap_or(0);
        (ga, gx)
    }

    pub fn max_index(&self, kind: Kind) -> usize {
        self.terms.keys().map(|w| w.max_index(kind)).max().unwrap_or(0)
    }

    pub fn max_a_run(&self) -> usize {
        self.terms.keys().map(|w| w.max_a_run()).max().unwrap_or(0)
    }

    pub fn uses(&self, kind: Kind) -> bool {
        self.terms.keys().any(|w| w.count(kind) > 0)
    }

    fn check_same_shape(&self, o: &FreePoly, op: &str) -> Result<()> {
        if self.shape() != o.shape() {
            return Err(Error::Shape(format!("{op}: {:?} vs {:?}", self.shape(), o.shape())));
        }
        Ok(())
    }

    pub fn add(&self, o: &FreePoly) -> Result<FreePoly> {
        self.check_same_shape(o, "add")?;
        let mut map = self.terms.clone();
        for (w, c) in &o.terms {
            match map.get_mut(w) {
                Some(acc) => acc.add_assign(c),
                None => {
                    map.insert(w.clone(), c.clone());
                }
            }
        }
        Ok(FreePoly::from_map(self.kappa, self.kappa_p, map))
    }

    pub fn sub(&self, o: &FreePoly) -> Result<FreePoly> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> FreePoly {
        self.scale(&q(-1))
    }

    pub fn scale(&self, s: &Q) -> FreePoly {
        let map = self.terms.iter().map(|(w, c)| (w.clone(), c.scale(s))).collect();
        FreePoly::from_map(self.kappa, self.kappa_p, map)
    }

    /// Left multiplication of every coefficient by a constant matrix.
    pub fn left_mul_const(&self, m: &QMat) -> Result<FreePoly> {
        if m.cols() != self.kappa {
            return Err(Error::Shape("left_mul_const".into()));
        }
        let map = self.terms.iter().map(|(w, c)| (w.clone(), m.mul(c))).collect();
        Ok(FreePoly::from_map(m.rows(), self.kappa_p, map))
    }

    pub fn right_mul_const(&self, m: &QMat) -> Result<FreePoly> {
        if m.rows() != self.kappa_p {
            return Err(Error::Shape("right_mul_const".into()));
        }
        let map = self.terms.iter().map(|(w, c)| (w.clone(), c.mul(m))).collect();
        Ok(FreePoly::from_map(self.kappa, m.cols(), map))
    }

    /// Noncommutative product with matrix-product coefficients.
    pub fn mul(&self, o: &FreePoly) -> Result<FreePoly> {
        if self.kappa_p != o.kappa {
            return Err(Error::Shape(format!(
                "mul: {:?} times {:?}",
                self.shape(),
                o.shape()
            )));
        }
        let mut map: BTreeMap<Word, QMat> = BTreeMap::new();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &o.terms {
                let c = c1.mul(c2);
                if c.is_zero() {
                    continue;
                }
                let w = w1.concat(w2);
                match map.get_mut(&w) {
                    Some(acc) => acc.add_assign(&c),
                    None => {
                        map.insert(w, c);
                    }
                }
            }
        }
        Ok(FreePoly::from_map(self.kappa, o.kappa_p, map))
    }

    /// Coefficient transpose combined with word reversal.
    pub fn transpose(&self) -> FreePoly {
        let map = self.terms.iter().map(|(w, c)| (w.involution(), c.transpose())).collect();
        FreePoly::from_map(self.kappa_p, self.kappa, map)
    }

    pub fn is_symmetric(&self) -> bool {
        self.kappa == self.kappa_p && self.transpose() == *self
    }

    /// Terms with exactly `j` letters of class `kind`.
    pub fn part_of_degree(&self, kind: Kind, j: usize) -> FreePoly {
        self.filter(|w| w.count(kind) == j)
    }

    /// Terms with exactly `j` letters `x`.
    pub fn homogeneous_part(&self, j: usize) -> FreePoly {
        self.part_of_degree(Kind::X, j)
    }

    pub fn filter(&self, keep: impl Fn(&Word) -> bool) -> FreePoly {
        let map = self.terms.iter().filter(|(w, _)| keep(w)).map(|(w, c)| (w.clone(), c.clone())).collect();
        FreePoly::from_map(self.kappa, self.kappa_p, map)
    }

    /// `p(a, 0)`: drop every term containing an `x`.
    pub fn at_x_zero(&self) -> FreePoly {
        self.filter(|w| w.count(Kind::X) == 0)
    }

    /// Apply a word map to every term (coefficients are summed on collisions).
    pub fn map_words(&self, f: impl Fn(&Word) -> Word) -> FreePoly {
        let mut map: BTreeMap<Word, QMat> = BTreeMap::new();
        for (w, c) in &self.terms {
            let nw = f(w);
            match map.get_mut(&nw) {
                Some(acc) => acc.add_assign(c),
                None => {
                    map.insert(nw, c.clone());
                }
            }
        }
        FreePoly::from_map(self.kappa, self.kappa_p, map)
    }

    /// `p₁ ⊕ p₂` with block-diagonal coefficients.
    pub fn direct_sum(&self, o: &FreePoly) -> FreePoly {
        let (k1, k1p) = self.shape();
        let (k2, k2p) = o.shape();
        let mut map: BTreeMap<Word, QMat> = BTreeMap::new();
        for (w, c) in &self.terms {
            let mut m = QMat::zeros(k1 + k2, k1p + k2p);
            m.set_block(0, 0, c);
            map.insert(w.clone(), m);
        }
        for (w, c) in &o.terms {
            let entry = map.entry(w.clone()).or_insert_with(|| QMat::zeros(k1 + k2, k1p + k2p));
            entry.set_block(k1, k1p, c);
        }
        FreePoly::from_map(k1 + k2, k1p + k2p, map)
    }

    /// `C ⊗ p` for a scalar polynomial `p` (each coefficient `c_w` becomes `c_w C`).
    pub fn tensor_const(&self, c: &QMat) -> Result<FreePoly> {
        if !self.is_scalar() {
            return Err(Error::Shape("tensor_const needs a scalar polynomial".into()));
        }
        let map = self.terms.iter().map(|(w, s)| (w.clone(), c.scale(s.get(0, 0)))).collect();
        Ok(FreePoly::from_map(c.rows(), c.cols(), map))
    }

    /// Scalar entry `(α, β)` of every coefficient.
    pub fn entry(&self, alpha: usize, beta: usize) -> FreePoly {
        let map = self
            .terms
            .iter()
            .map(|(w, c)| (w.clone(), QMat::from_vec(1, 1, vec![c.get(alpha, beta).clone()])))
            .collect();
        FreePoly::from_map(1, 1, map)
    }

    /// Substitute `x_i ↦ h_i` at the given letter positions of `w`.
    pub fn substitute_positions(w: &Word, positions: &[usize], kind: Kind) -> Word {
        let mut out = w.clone();
        for &p in positions {
            let g = w.letters()[p];
            out = out.replaced(p, g.with_kind(kind));
        }
        out
    }

    /// Text rendering in the input grammar; matrix coefficients are printed
    /// as nested lists.
    pub fn to_text(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut s = String::new();
        for (i, (w, c)) in self.terms.iter().enumerate() {
            if self.is_scalar() {
                let v = c.get(0, 0);
                let neg = v.is_negative();
                let mag = v.abs();
                if i == 0 {
                    if neg {
                        s.push_str("- ");
                    }
                } else {
                    s.push_str(if neg { " - " } else { " + " });
                }
                let one = mag == q(1);
                if w.is_empty() {
                    s.push_str(&mag.to_string());
                } else if one {
                    s.push_str(&w.to_string());
                } else {
                    s.push_str(&format!("{mag} {w}"));
                }
            } else {
                if i > 0 {
                    s.push_str(" + ");
                }
                s.push_str(&format!("{} {}", qmat_text(c), w));
            }
        }
        s
    }
}

pub fn qmat_text(m: &QMat) -> String {
    let rows: Vec<String> = (0..m.rows())
        .map(|i| {
            let r: Vec<String> = m.row(i).iter().map(|x| x.to_string()).collect();
            format!("[{}]", r.join(", "))
        })
        .collect();
    format!("[{}]", rows.join(", "))
}

impl fmt::Display for FreePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

impl fmt::Debug for FreePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FreePoly<{}x{}>({})", self.kappa, self.kappa_p, self.to_text())
    }
}

/// Scalar polynomial from `(coefficient, word)` pairs given as integers and
/// word strings; handy for tests and examples.
pub fn scalar_poly(terms: &[(i64, &str)]) -> FreePoly {
    FreePoly::from_terms(
        1,
        1,
        terms.iter().map(|(c, w)| {
            (Word::parse(w).expect("valid word"), QMat::from_vec(1, 1, vec![q(*c)]))
        }),
    )
    .expect("scalar shapes agree")
}

/// A single generator as a scalar polynomial.
pub fn var(g: Generator) -> FreePoly {
    FreePoly::scalar_term(q(1), Word::single(g))
}

impl FreePoly {
    /// Scalar value when `p` is a scalar constant.
    pub fn constant_value(&self) -> Option<Q> {
        if !self.is_scalar() {
            return None;
        }
        match self.terms.len() {
            0 => Some(<Q as Scalar>::zero()),
            1 => self.terms.get(&Word::empty()).map(|c| c.get(0, 0).clone()),
            _ => None,
        }
    }
}
