//! Sparse matrices of polynomials, middle-matrix representations of the
//! Hessian, the gradient row `Φ`, and the modified and relaxed Hessians.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::border::Border;
use crate::calculus::{derivative_x, hessian_x};
use crate::error::{Error, Result};
use crate::eval::{evaluate, MatrixTuple, Tuple};
use crate::matrix::{Mat, Matrix, QMat, Scalar, Q};
use crate::parse::poly_to_json_value;
use crate::poly::FreePoly;
use crate::word::{Kind, Word};

/// Sparse block matrix whose entries are polynomials of a common shape.
#[derive(Clone, PartialEq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    entry_shape: (usize, usize),
    entries: BTreeMap<(usize, usize), FreePoly>,
}

impl std::fmt::Debug for PolyMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "PolyMatrix {}x{} (entries {:?})", self.rows, self.cols, self.entry_shape)?;
        for ((r, c), p) in &self.entries {
            writeln!(f, "  ({r},{c}) {p}")?;
        }
        Ok(())
    }
}

impl PolyMatrix {
    pub fn zeros(rows: usize, cols: usize, entry_shape: (usize, usize)) -> PolyMatrix {
        PolyMatrix { rows, cols, entry_shape, entries: BTreeMap::new() }
    }

    /// Identity with `I_κ` on the diagonal.
    pub fn identity(n: usize, kappa: usize) -> PolyMatrix {
        let mut m = PolyMatrix::zeros(n, n, (kappa, kappa));
        for i in 0..n {
            m.entries.insert((i, i), FreePoly::constant(QMat::identity(kappa)));
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry_shape(&self) -> (usize, usize) {
        self.entry_shape
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize), &FreePoly)> {
        self.entries.iter()
    }

    pub fn get(&self, r: usize, c: usize) -> Option<&FreePoly> {
        self.entries.get(&(r, c))
    }

    /// Entry `(r, c)`, zero if absent.
    pub fn entry(&self, r: usize, c: usize) -> FreePoly {
        self.get(r, c).cloned().unwrap_or_else(|| FreePoly::zero(self.entry_shape.0, self.entry_shape.1))
    }

    pub fn set(&mut self, r: usize, c: usize, p: FreePoly) -> Result<()> {
        self.check_entry(r, c, &p)?;
        if p.is_zero() {
            self.entries.remove(&(r, c));
        } else {
            self.entries.insert((r, c), p);
        }
        Ok(())
    }

    fn check_entry(&self, r: usize, c: usize, p: &FreePoly) -> Result<()> {
        if r >= self.rows || c >= self.cols {
            return Err(Error::Shape(format!("entry ({r},{c}) outside {}x{}", self.rows, self.cols)));
        }
        if p.shape() != self.entry_shape {
            return Err(Error::Shape(format!("entry shape {:?}, expected {:?}", p.shape(), self.entry_shape)));
        }
        Ok(())
    }

    pub fn add_to(&mut self, r: usize, c: usize, p: &FreePoly) -> Result<()> {
        self.check_entry(r, c, p)?;
        let sum = match self.entries.get(&(r, c)) {
            Some(old) => old.add(p)?,
            None => p.clone(),
        };
        if sum.is_zero() {
            self.entries.remove(&(r, c));
        } else {
            self.entries.insert((r, c), sum);
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    fn same_shape(&self, o: &PolyMatrix) -> Result<()> {
        if (self.rows, self.cols, self.entry_shape) != (o.rows, o.cols, o.entry_shape) {
            return Err(Error::Shape("polynomial matrices of different shapes".into()));
        }
        Ok(())
    }

    pub fn add(&self, o: &PolyMatrix) -> Result<PolyMatrix> {
        self.same_shape(o)?;
        let mut out = self.clone();
        for ((r, c), p) in &o.entries {
            out.add_to(*r, *c, p)?;
        }
        Ok(out)
    }

    pub fn sub(&self, o: &PolyMatrix) -> Result<PolyMatrix> {
        self.add(&o.scale(&crate::matrix::q(-1)))
    }

    pub fn scale(&self, s: &Q) -> PolyMatrix {
        let mut out = PolyMatrix::zeros(self.rows, self.cols, self.entry_shape);
        for (k, p) in &self.entries {
            let sp = p.scale(s);
            if !sp.is_zero() {
                out.entries.insert(*k, sp);
            }
        }
        out
    }

    /// Product with noncommutative entry multiplication.
    pub fn mul(&self, o: &PolyMatrix) -> Result<PolyMatrix> {
        if self.cols != o.rows || self.entry_shape.1 != o.entry_shape.0 {
            return Err(Error::Shape(format!(
                "product of {}x{} ({:?}) and {}x{} ({:?})",
                self.rows, self.cols, self.entry_shape, o.rows, o.cols, o.entry_shape
            )));
        }
        let mut by_row: Vec<Vec<(usize, &FreePoly)>> = vec![Vec::new(); o.rows];
        for ((r, c), p) in &o.entries {
            by_row[*r].push((*c, p));
        }
        let shape = (self.entry_shape.0, o.entry_shape.1);
        let mut acc: BTreeMap<(usize, usize), FreePoly> = BTreeMap::new();
        for ((r, t), p) in &self.entries {
            for (c, q) in &by_row[*t] {
                let prod = p.mul(q)?;
                match acc.get_mut(&(*r, *c)) {
                    Some(old) => *old = old.add(&prod)?,
                    None => {
                        acc.insert((*r, *c), prod);
                    }
                }
            }
        }
        acc.retain(|_, p| !p.is_zero());
        Ok(PolyMatrix { rows: self.rows, cols: o.cols, entry_shape: shape, entries: acc })
    }

    /// Block transpose combined with the involution on each entry.
    pub fn transpose(&self) -> PolyMatrix {
        let entries = self.entries.iter().map(|((r, c), p)| ((*c, *r), p.transpose())).collect();
        PolyMatrix { rows: self.cols, cols: self.rows, entry_shape: (self.entry_shape.1, self.entry_shape.0), entries }
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && self.transpose() == *self
    }

    pub fn at_x_zero(&self) -> PolyMatrix {
        self.map_entries(|p| p.at_x_zero())
    }

    pub fn map_entries(&self, f: impl Fn(&FreePoly) -> FreePoly) -> PolyMatrix {
        let mut out = PolyMatrix::zeros(self.rows, self.cols, self.entry_shape);
        for (k, p) in &self.entries {
            let np = f(p);
            if !np.is_zero() {
                out.entries.insert(*k, np);
            }
        }
        out
    }

    /// Replace scalar entries `p` by `I_κ ⊗ p`.
    pub fn tensor_identity(&self, kappa: usize) -> Result<PolyMatrix> {
        if self.entry_shape != (1, 1) {
            return Err(Error::Shape("tensor_identity needs scalar entries".into()));
        }
        let id = QMat::identity(kappa);
        let mut out = PolyMatrix::zeros(self.rows, self.cols, (kappa, kappa));
        for (k, p) in &self.entries {
            out.entries.insert(*k, p.tensor_const(&id)?);
        }
        Ok(out)
    }

    pub fn select(&self, rows: &[usize], cols: &[usize]) -> PolyMatrix {
        let rpos: BTreeMap<usize, usize> = rows.iter().enumerate().map(|(i, r)| (*r, i)).collect();
        let cpos: BTreeMap<usize, usize> = cols.iter().enumerate().map(|(i, c)| (*c, i)).collect();
        let mut out = PolyMatrix::zeros(rows.len(), cols.len(), self.entry_shape);
        for ((r, c), p) in &self.entries {
            if let (Some(i), Some(j)) = (rpos.get(r), cpos.get(c)) {
                out.entries.insert((*i, *j), p.clone());
            }
        }
        out
    }

    /// Entrywise `x = 0` check.
    pub fn is_x_free(&self) -> bool {
        self.entries.values().all(|p| !p.uses(Kind::X))
    }

    /// Numeric or exact evaluation. Block `(r, c)` is the `κn × κ′n`
    /// evaluation of entry `(r, c)`.
    pub fn evaluate<T: Scalar>(&self, t: &Tuple<T>) -> Result<Matrix<T>> {
        let (k, kp) = self.entry_shape;
        let (bn, bm) = (k * t.n, kp * t.n);
        let mut out = Matrix::zeros(self.rows * bn, self.cols * bm);
        for ((r, c), p) in &self.entries {
            let m = evaluate(p, t)?;
            out.set_block(r * bn, c * bm, &m);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = self
            .entries
            .iter()
            .map(|((r, c), p)| json!({"row": r, "col": c, "terms": poly_to_json_value(p)["terms"].clone()}))
            .collect();
        json!({
            "rows": self.rows,
            "cols": self.cols,
            "entry_shape": [self.entry_shape.0, self.entry_shape.1],
            "entries": entries,
        })
    }

    /// Plain-text grid, one row per line.
    pub fn to_text(&self) -> String {
        let cells: Vec<Vec<String>> = (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c).map_or("0".into(), |p| p.to_text())).collect())
            .collect();
        let widths: Vec<usize> =
            (0..self.cols).map(|c| cells.iter().map(|row| row[c].chars().count()).max().unwrap_or(1)).collect();
        let mut s = String::new();
        for row in &cells {
            s.push('[');
            for (c, cell) in row.iter().enumerate() {
                if c > 0 {
                    s.push_str(" | ");
                }
                s.push_str(&format!("{cell:>w$}", w = widths[c]));
            }
            s.push_str("]\n");
        }
        s
    }
}

/// A middle matrix together with its border.
#[derive(Clone, Debug)]
pub struct MiddleMatrixRep {
    pub border: Border,
    pub matrix: PolyMatrix,
    pub kappa: usize,
}

impl MiddleMatrixRep {
    /// `Σ_{r,c} (I_κ ⊗ B_r)ᵀ M_rc (I_κ ⊗ B_c)`.
    pub fn reconstruct(&self) -> Result<FreePoly> {
        let b = self.border.monomials(self.kappa);
        let mut acc = FreePoly::zero(self.kappa, self.kappa);
        for ((r, c), m) in self.matrix.entries() {
            acc = acc.add(&b[*r].transpose().mul(m)?.mul(&b[*c])?)?;
        }
        Ok(acc)
    }

    /// Block `(i, j)` by x-degree.
    pub fn block(&self, i: usize, j: usize) -> PolyMatrix {
        let rows: Vec<usize> = self.border.block_range(i).collect();
        let cols: Vec<usize> = self.border.block_range(j).collect();
        self.matrix.select(&rows, &cols)
    }

    pub fn at_x_zero(&self) -> MiddleMatrixRep {
        MiddleMatrixRep { border: self.border.clone(), matrix: self.matrix.at_x_zero(), kappa: self.kappa }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "kappa": self.kappa,
            "flavor": self.border.flavor,
            "border": self.border.to_strings(),
            "matrix": self.matrix.to_json(),
        })
    }
}

fn two_h_split(w: &Word) -> Option<(usize, Word, Word, usize, Word)> {
    let hs = w.positions(Kind::H);
    if hs.len() != 2 {
        return None;
    }
    let (p1, p2) = (hs[0], hs[1]);
    let l = w.letters();
    Some((l[p1].idx(), w.slice(0, p1), w.slice(p1 + 1, p2), l[p2].idx(), w.slice(p2 + 1, w.len())))
}

/// Middle matrix of `p_xx` on the given border: a Hessian term
/// `C u h_i m h_j v` contributes `C m` at row `h_i uᵀ`, column `h_j v`.
pub fn middle_matrix_hessian(p: &FreePoly, border: &Border) -> Result<MiddleMatrixRep> {
    if p.kappa() != p.kappa_p() {
        return Err(Error::Shape("middle matrices need a square polynomial".into()));
    }
    let kappa = p.kappa();
    let hess = hessian_x(p)?;
    let mut m = PolyMatrix::zeros(border.len(), border.len(), (kappa, kappa));
    for (w, c) in hess.terms() {
        let (i, u, mid, j, v) = two_h_split(w).expect("Hessian terms carry two h letters");
        let ut = u.involution();
        let r = border
            .position_of(i, &ut)
            .ok_or_else(|| Error::UncoveredChip(format!("h{i} {ut}")))?;
        let col = border
            .position_of(j, &v)
            .ok_or_else(|| Error::UncoveredChip(format!("h{j} {v}")))?;
        m.add_to(r, col, &FreePoly::monomial(mid, c.clone()))?;
    }
    Ok(MiddleMatrixRep { border: border.clone(), matrix: m, kappa })
}

/// Gradient row `Φ`: a derivative term `C u h_j v` contributes `C u` at
/// column `h_j v`, so that `p_x = Φ · (I_κ ⊗ B)`.
pub fn phi_row(p: &FreePoly, border: &Border) -> Result<PolyMatrix> {
    let dx = derivative_x(p)?;
    let mut phi = PolyMatrix::zeros(1, border.len(), p.shape());
    for (w, c) in dx.terms() {
        let hs = w.positions(Kind::H);
        let pos = hs[0];
        let j = w.letters()[pos].idx();
        let u = w.slice(0, pos);
        let v = w.slice(pos + 1, w.len());
        let col = border.position_of(j, &v).ok_or_else(|| Error::UncoveredChip(format!("h{j} {v}")))?;
        phi.add_to(0, col, &FreePoly::monomial(u, c.clone()))?;
    }
    Ok(phi)
}

/// `ℨ_λ = ℨ + λ ΦᵀΦ` as a polynomial matrix.
pub fn modified_middle_matrix(p: &FreePoly, border: &Border, lambda: &Q) -> Result<PolyMatrix> {
    let z = middle_matrix_hessian(p, border)?.matrix;
    let phi = phi_row(p, border)?;
    z.add(&phi.transpose().mul(&phi)?.scale(lambda))
}

/// Numeric `ℨ_λ(A, X)` and `ℨ_{λ,δ}(A, X) = ℨ_λ(A, X) + δI`.
#[derive(Clone, Debug)]
pub struct RelaxedMatrices {
    pub z: Mat,
    pub phi: Mat,
    pub z_lambda: Mat,
    pub z_lambda_delta: Mat,
}

/// Evaluate the Hessian middle matrix and `Φ` on `border` (normally an
/// extended flavor) and form the modified and relaxed matrices.
pub fn modified_and_relaxed(p: &FreePoly, border: &Border, lambda: f64, delta: f64, t: &MatrixTuple) -> Result<RelaxedMatrices> {
    let z = middle_matrix_hessian(p, border)?.matrix.evaluate(t)?;
    let phi = phi_row(p, border)?.evaluate(t)?;
    Ok(relax_numeric(&z, &phi, lambda, delta))
}

pub fn relax_numeric(z: &Mat, phi: &Mat, lambda: f64, delta: f64) -> RelaxedMatrices {
    let ptp = phi.transpose().mul(phi);
    let z_lambda = z.add(&ptp.scale(&lambda));
    let z_lambda_delta = z_lambda.add(&Mat::identity(z.rows()).scale(&delta));
    RelaxedMatrices { z: z.clone(), phi: phi.clone(), z_lambda, z_lambda_delta }
}

/// One homogeneous degree: `p^j = Σ_c φ_c(a) f_c(a, x)` with x-led tails `f_c`.
#[derive(Clone, Debug)]
pub struct PhiDegree {
    pub tails: Vec<Word>,
    pub coeffs: Vec<FreePoly>,
}

/// `φ_p^j` and `𝚏_j` for every x-degree `j` present in `p`.
#[derive(Clone, Debug)]
pub struct PhiDecomposition {
    pub kappa: usize,
    pub kappa_p: usize,
    pub degrees: BTreeMap<usize, PhiDegree>,
}

pub fn phi_decomposition(p: &FreePoly) -> PhiDecomposition {
    let mut acc: BTreeMap<usize, BTreeMap<Word, Vec<(Word, QMat)>>> = BTreeMap::new();
    for (w, c) in p.terms() {
        let j = w.count(Kind::X);
        let split = w.positions(Kind::X).first().copied().unwrap_or(w.len());
        let (u, f) = (w.slice(0, split), w.slice(split, w.len()));
        acc.entry(j).or_default().entry(f).or_default().push((u, c.clone()));
    }
    let degrees = acc
        .into_iter()
        .map(|(j, cols)| {
            let (tails, coeffs) = cols
                .into_iter()
                .map(|(f, terms)| (f, FreePoly::from_terms(p.kappa(), p.kappa_p(), terms).expect("shapes agree")))
                .unzip();
            (j, PhiDegree { tails, coeffs })
        })
        .collect();
    PhiDecomposition { kappa: p.kappa(), kappa_p: p.kappa_p(), degrees }
}

impl PhiDecomposition {
    /// `Σ_j φ^j 𝚏_j`, which equals the source polynomial.
    pub fn reconstruct(&self) -> Result<FreePoly> {
        let mut acc = FreePoly::zero(self.kappa, self.kappa_p);
        for deg in self.degrees.values() {
            for (f, c) in deg.tails.iter().zip(&deg.coeffs) {
                acc = acc.add(&c.mul(&FreePoly::identity_word(self.kappa_p, f.clone()))?)?;
            }
        }
        Ok(acc)
    }

    /// Numeric block row `φ^j(A)` of size `κn × (columns · κ′n)`; zero
    /// columns when degree `j` is absent.
    pub fn evaluate_phi(&self, j: usize, t: &MatrixTuple) -> Result<Mat> {
        let n = t.n;
        let Some(deg) = self.degrees.get(&j) else {
            return Ok(Mat::zeros(self.kappa * n, 0));
        };
        let blocks = deg.coeffs.iter().map(|c| evaluate(c, t)).collect::<Result<Vec<_>>>()?;
        let refs: Vec<&Mat> = blocks.iter().collect();
        Ok(Mat::hstack(&refs))
    }
}
