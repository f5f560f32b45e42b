//! Evaluation of free polynomials at tuples of symmetric matrices.
//!
//! A `κ × κ′` polynomial evaluates to `Σ_w C_w ⊗ w(A, X)`, a `κn × κ′n`
//! matrix whose `(α, β)` block is `Σ_w (C_w)_{αβ} w(A, X)`. Vectors in
//! `ℝ^{κn}` use the matching layout `v = col(v₁, …, v_κ)`.

use serde_json::Value;

use crate::error::{Error, Result};
use crate::linalg::is_orthogonal;
use crate::matrix::{Mat, Matrix, QMat, Scalar};
use crate::parse::q_from_json;
use crate::poly::FreePoly;
use crate::word::{a_words, Generator, Kind, Word};

/// A point `(A, X)`, optionally with direction tuples `E`, `H` and a
/// vector `v`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tuple<T: Scalar> {
    pub n: usize,
    pub a: Vec<Matrix<T>>,
    pub x: Vec<Matrix<T>>,
    pub e: Option<Vec<Matrix<T>>>,
    pub h: Option<Vec<Matrix<T>>>,
    pub v: Option<Vec<T>>,
}

pub type MatrixTuple = Tuple<f64>;
pub type QTuple = Tuple<crate::matrix::Q>;

fn check_family<T: Scalar>(n: usize, ms: &[Matrix<T>], name: &str) -> Result<()> {
    for (i, m) in ms.iter().enumerate() {
        if m.shape() != (n, n) {
            return Err(Error::Shape(format!("{name}{} is {:?}, expected {n}x{n}", i + 1, m.shape())));
        }
        let mut asym = 0.0f64;
        for r in 0..n {
            for c in 0..r {
                asym = asym.max((m.get(r, c).to_f64() - m.get(c, r).to_f64()).abs());
            }
        }
        if asym > 1e-10 {
            return Err(Error::Input(format!("{name}{} is not symmetric (residual {asym:e})", i + 1)));
        }
    }
    Ok(())
}

impl<T: Scalar> Tuple<T> {
    /// Build a point, checking sizes and symmetry.
    pub fn new(n: usize, a: Vec<Matrix<T>>, x: Vec<Matrix<T>>) -> Result<Tuple<T>> {
        check_family(n, &a, "A")?;
        check_family(n, &x, "X")?;
        Ok(Tuple { n, a, x, e: None, h: None, v: None })
    }

    pub fn with_h(mut self, h: Vec<Matrix<T>>) -> Result<Tuple<T>> {
        check_family(self.n, &h, "H")?;
        if h.len() != self.x.len() {
            return Err(Error::Shape(format!("{} H directions for {} x variables", h.len(), self.x.len())));
        }
        self.h = Some(h);
        Ok(self)
    }

    pub fn with_e(mut self, e: Vec<Matrix<T>>) -> Result<Tuple<T>> {
        check_family(self.n, &e, "E")?;
        if e.len() != self.a.len() {
            return Err(Error::Shape(format!("{} E directions for {} a variables", e.len(), self.a.len())));
        }
        self.e = Some(e);
        Ok(self)
    }

    pub fn with_v(mut self, v: Vec<T>) -> Result<Tuple<T>> {
        if v.is_empty() || v.len() % self.n != 0 {
            return Err(Error::Shape(format!("vector length {} is not a multiple of n = {}", v.len(), self.n)));
        }
        if v.iter().all(|x| x.is_zero()) {
            return Err(Error::Input("v must be nonzero".into()));
        }
        self.v = Some(v);
        Ok(self)
    }

    pub fn ga(&self) -> usize {
        self.a.len()
    }

    pub fn gx(&self) -> usize {
        self.x.len()
    }

    /// The same point with `X = 0` (directions and vector dropped).
    pub fn at_x_zero(&self) -> Tuple<T> {
        Tuple {
            n: self.n,
            a: self.a.clone(),
            x: vec![Matrix::zeros(self.n, self.n); self.x.len()],
            e: None,
            h: None,
            v: None,
        }
    }

    /// Matrix assigned to a generator.
    pub fn letter(&self, g: Generator) -> Result<&Matrix<T>> {
        let i = g.idx() - 1;
        let fam = match g.kind {
            Kind::A => Some(&self.a),
            Kind::X => Some(&self.x),
            Kind::H => self.h.as_ref(),
            Kind::E => self.e.as_ref(),
        };
        let fam = fam.ok_or(match g.kind {
            Kind::H => Error::MissingDirection("H"),
            _ => Error::MissingDirection("E"),
        })?;
        fam.get(i)
            .ok_or_else(|| Error::Shape(format!("tuple has no matrix for {g} ({} given)", fam.len())))
    }

    pub fn to_f64(&self) -> MatrixTuple {
        let conv = |v: &Vec<Matrix<T>>| v.iter().map(|m| m.to_f64()).collect::<Vec<_>>();
        Tuple {
            n: self.n,
            a: conv(&self.a),
            x: conv(&self.x),
            e: self.e.as_ref().map(conv),
            h: self.h.as_ref().map(conv),
            v: self.v.as_ref().map(|v| v.iter().map(|x| x.to_f64()).collect()),
        }
    }
}

/// Product of the letters of `w`, left to right; `letter(pos, g)` supplies
/// the matrix for the letter at each position.
pub fn evaluate_word_with<'m, T: Scalar + 'm>(
    w: &Word,
    n: usize,
    letter: &impl Fn(usize, Generator) -> Result<&'m Matrix<T>>,
) -> Result<Matrix<T>> {
    let mut it = w.letters().iter().enumerate();
    let Some((p0, g0)) = it.next() else {
        return Ok(Matrix::identity(n));
    };
    let mut acc = letter(p0, *g0)?.clone();
    for (p, g) in it {
        acc = acc.mul(letter(p, *g)?);
    }
    Ok(acc)
}

/// `Σ_w C_w ⊗ w` with a position-aware letter assignment.
pub fn evaluate_with<'m, T: Scalar + 'm>(
    p: &FreePoly,
    n: usize,
    letter: &impl Fn(usize, Generator) -> Result<&'m Matrix<T>>,
) -> Result<Matrix<T>> {
    let (k, kp) = p.shape();
    let mut out = Matrix::zeros(k * n, kp * n);
    for (w, c) in p.terms() {
        let wm = evaluate_word_with(w, n, letter)?;
        for al in 0..k {
            for be in 0..kp {
                let cq = c.get(al, be);
                if !Scalar::is_zero(cq) {
                    out.add_block_scaled(al * n, be * n, &T::from_q(cq), &wm);
                }
            }
        }
    }
    Ok(out)
}

/// Evaluate `p` at a tuple. The empty word evaluates to `Iₙ`.
pub fn evaluate<T: Scalar>(p: &FreePoly, t: &Tuple<T>) -> Result<Matrix<T>> {
    evaluate_with(p, t.n, &|_, g| t.letter(g))
}

pub fn evaluate_word<T: Scalar>(w: &Word, t: &Tuple<T>) -> Result<Matrix<T>> {
    evaluate_word_with(w, t.n, &|_, g| t.letter(g))
}

/// Simultaneous conjugation `(UᵀAU, UᵀXU)`, with `v ↦ (I_κ ⊗ Uᵀ)v`.
pub fn unitary_conjugate(t: &MatrixTuple, u: &Mat) -> Result<MatrixTuple> {
    if u.shape() != (t.n, t.n) {
        return Err(Error::Shape(format!("U is {:?}, expected {}x{}", u.shape(), t.n, t.n)));
    }
    if !is_orthogonal(u, 1e-10) {
        return Err(Error::Input("U is not orthogonal".into()));
    }
    let ut = u.transpose();
    let conj = |ms: &Vec<Mat>| ms.iter().map(|m| ut.mul(m).mul(u)).collect::<Vec<_>>();
    let v = t.v.as_ref().map(|v| {
        let n = t.n;
        let mut out = Vec::with_capacity(v.len());
        for blk in v.chunks(n) {
            out.extend(ut.mul_vec(blk));
        }
        out
    });
    Ok(Tuple { n: t.n, a: conj(&t.a), x: conj(&t.x), e: t.e.as_ref().map(conj), h: t.h.as_ref().map(conj), v })
}

/// Block-diagonal sum of two tuples. Vectors are interleaved per κ block,
/// so `p(t₁ ⊕ t₂)(v₁ ⊕ v₂)` is the direct sum of the two evaluations.
pub fn tuple_direct_sum<T: Scalar>(t1: &Tuple<T>, t2: &Tuple<T>) -> Result<Tuple<T>> {
    if t1.ga() != t2.ga() || t1.gx() != t2.gx() {
        return Err(Error::Shape("direct sum of tuples with different variable counts".into()));
    }
    let bd = |x: &[Matrix<T>], y: &[Matrix<T>]| -> Vec<Matrix<T>> {
        x.iter().zip(y).map(|(m1, m2)| Matrix::block_diag(&[m1, m2])).collect()
    };
    let opt = |x: &Option<Vec<Matrix<T>>>, y: &Option<Vec<Matrix<T>>>| match (x, y) {
        (Some(x), Some(y)) => Some(bd(x, y)),
        _ => None,
    };
    let v = match (&t1.v, &t2.v) {
        (None, None) => None,
        (v1, v2) => {
            let (n1, n2) = (t1.n, t2.n);
            let k1 = v1.as_ref().map(|v| v.len() / n1);
            let k2 = v2.as_ref().map(|v| v.len() / n2);
            let kappa = match (k1, k2) {
                (Some(a), Some(b)) if a != b => {
                    return Err(Error::Shape(format!("vector block counts differ: {a} vs {b}")))
                }
                (Some(a), _) | (_, Some(a)) => a,
                (None, None) => unreachable!(),
            };
            let mut out = Vec::with_capacity(kappa * (n1 + n2));
            for k in 0..kappa {
                match v1 {
                    Some(v) => out.extend_from_slice(&v[k * n1..(k + 1) * n1]),
                    None => out.extend(std::iter::repeat_n(T::zero(), n1)),
                }
                match v2 {
                    Some(v) => out.extend_from_slice(&v[k * n2..(k + 1) * n2]),
                    None => out.extend(std::iter::repeat_n(T::zero(), n2)),
                }
            }
            Some(out)
        }
    };
    Ok(Tuple {
        n: t1.n + t2.n,
        a: bd(&t1.a, &t2.a),
        x: bd(&t1.x, &t2.x),
        e: opt(&t1.e, &t2.e),
        h: opt(&t1.h, &t2.h),
        v,
    })
}

/// `(I_m ⊗ Â, I_m ⊗ X̂)` with `v = col(v̂, 0, …, 0)` in each κ block.
pub fn replicate<T: Scalar>(t: &Tuple<T>, m: usize) -> Result<Tuple<T>> {
    if m == 0 {
        return Err(Error::Input("replication count must be positive".into()));
    }
    let mut blank = t.clone();
    blank.v = None;
    let mut acc = t.clone();
    for _ in 1..m {
        acc = tuple_direct_sum(&acc, &blank)?;
    }
    Ok(acc)
}

/// The faithful point on the space spanned by a-words of length at most
/// `d̃`: `S_j w = a_j w` (zero on the top level) and `T_j = S_j + S_jᵀ`.
/// The returned vector is the basis vector of the empty word.
pub fn faithful_point(ga: usize, dtilde: usize) -> QTuple {
    let basis = a_words(ga, dtilde);
    let index: std::collections::HashMap<Word, usize> =
        basis.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
    let nn = basis.len();
    let mut ts = Vec::with_capacity(ga);
    for j in 1..=ga {
        let mut t = QMat::zeros(nn, nn);
        for (c, w) in basis.iter().enumerate() {
            if w.len() < dtilde {
                let r = index[&w.prepend(Generator::a(j))];
                t.set(r, c, crate::matrix::q(1));
                t.set(c, r, crate::matrix::q(1));
            }
        }
        ts.push(t);
    }
    let mut v = vec![crate::matrix::q(0); nn];
    v[0] = crate::matrix::q(1);
    Tuple { n: nn, a: ts, x: Vec::new(), e: None, h: None, v: Some(v) }
}

fn matrices_from_json(v: &Value, n: usize, field: &str) -> Result<Vec<QMat>> {
    let Value::Array(items) = v else {
        return Err(Error::Input(format!("field `{field}`: expected an array")));
    };
    // A bare matrix (array of numeric rows) is accepted for a single variable.
    let is_single = items.first().is_some_and(|r| matches!(r, Value::Array(row) if row.first().is_none_or(|x| !x.is_array())));
    let mats: Vec<&Value> = if is_single { vec![v] } else { items.iter().collect() };
    let mut out = Vec::with_capacity(mats.len());
    for (i, m) in mats.iter().enumerate() {
        let Value::Array(rows) = m else {
            return Err(Error::Input(format!("field `{field}[{i}]`: expected a matrix")));
        };
        let mut parsed = Vec::with_capacity(rows.len());
        for (r, row) in rows.iter().enumerate() {
            let Value::Array(xs) = row else {
                return Err(Error::Input(format!("field `{field}[{i}][{r}]`: expected a row")));
            };
            parsed.push(
                xs.iter()
                    .map(q_from_json)
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| Error::Input(format!("field `{field}[{i}][{r}]`: {e}")))?,
            );
        }
        let m = QMat::from_rows(parsed).map_err(|e| Error::Input(format!("field `{field}[{i}]`: {e}")))?;
        if m.shape() != (n, n) {
            return Err(Error::Input(format!("field `{field}[{i}]`: shape {:?}, expected {n}x{n}", m.shape())));
        }
        if !m.is_symmetric_exact() {
            return Err(Error::Input(format!("field `{field}[{i}]`: matrix is not symmetric")));
        }
        out.push(m);
    }
    Ok(out)
}

/// Read `{"n": …, "A": [..], "X": [..], "H": [..], "E": [..], "v": [..]}`
/// with exact rational entries.
pub fn tuple_from_json(text: &str) -> Result<QTuple> {
    let root: Value = serde_json::from_str(text).map_err(|e| Error::Input(format!("tuple JSON: {e}")))?;
    let n = root
        .get("n")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Input("field `n`: missing or not a positive integer".into()))? as usize;
    if n == 0 {
        return Err(Error::Input("field `n`: must be positive".into()));
    }
    let fam = |key: &str| -> Result<Option<Vec<QMat>>> {
        match root.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => matrices_from_json(v, n, key).map(Some),
        }
    };
    let a = fam("A")?.unwrap_or_default();
    let x = fam("X")?.unwrap_or_default();
    let mut t = QTuple::new(n, a, x)?;
    if let Some(h) = fam("H")? {
        t = t.with_h(h)?;
    }
    if let Some(e) = fam("E")? {
        t = t.with_e(e)?;
    }
    if let Some(v) = root.get("v") {
        let Value::Array(xs) = v else {
            return Err(Error::Input("field `v`: expected an array".into()));
        };
        let v = xs.iter().map(q_from_json).collect::<Result<Vec<_>>>().map_err(|e| Error::Input(format!("field `v`: {e}")))?;
        t = t.with_v(v).map_err(|e| Error::Input(format!("field `v`: {e}")))?;
    }
    Ok(t)
}

/// JSON form of a numeric tuple.
pub fn tuple_to_json(t: &MatrixTuple) -> Value {
    let fam = |ms: &Vec<Mat>| Value::Array(ms.iter().map(|m| serde_json::json!(m.to_rows())).collect());
    let mut obj = serde_json::Map::new();
    obj.insert("n".into(), t.n.into());
    obj.insert("A".into(), fam(&t.a));
    obj.insert("X".into(), fam(&t.x));
    if let Some(h) = &t.h {
        obj.insert("H".into(), fam(h));
    }
    if let Some(e) = &t.e {
        obj.insert("E".into(), fam(e));
    }
    if let Some(v) = &t.v {
        obj.insert("v".into(), serde_json::json!(v));
    }
    Value::Object(obj)
}
