//! The matrices `K`, `L = K⁻¹` and `Y = K^{1/2}` over a border, the
//! polynomial congruence of the Hessian middle matrix, and the Schur
//! complement congruence.
//!
//! Every row `h_s f` of x-degree at least one factors uniquely as
//! `f = b x_k g` with `b` an a-word; its *peel* is the entry `h_k g`.
//! `N = K − I` has the single entry `−x_s b` at `(h_s f, h_k g)` in each such
//! row, so `N^m` is supported on `(r, peel^m(r))`.

use serde::Serialize;

use crate::border::{Border, BorderEntry, BorderParams};
use crate::error::{Error, Result};
use crate::eval::{MatrixTuple, QTuple};
use crate::linalg::{pinv, projection_onto_range};
use crate::matrix::{q, Mat, QMat, Scalar, Q};
use crate::middle::{middle_matrix_hessian, MiddleMatrixRep, PolyMatrix};
use crate::poly::FreePoly;
use crate::word::{Generator, Kind, Word};

/// `binom(α, m)` as an exact rational.
pub fn binom(alpha: &Q, m: usize) -> Q {
    let mut acc = q(1);
    for i in 0..m {
        acc = acc * (alpha - q(i as i64)) / q(i as i64 + 1);
    }
    acc
}

/// `(peel(r), x_s b)` for an entry `h_s b x_k g`, or `None` in degree zero.
pub fn peel(e: &BorderEntry) -> Option<(BorderEntry, Word)> {
    let first_x = e.f.positions(Kind::X).first().copied()?;
    let b = e.f.slice(0, first_x);
    let k = e.f.letters()[first_x].idx();
    let g = e.f.slice(first_x + 1, e.f.len());
    Some((BorderEntry::new(k, g), b.prepend(Generator::x(e.k))))
}

/// `Σ_m c_m N^m` on a peel-closed border, using the support formula
/// `N^m[r, peel^m r] = (−1)^m x_s b₀ x_{k₁} b₁ ⋯`. Entries are scalar.
pub fn power_series_on_border(border: &Border, coeff: impl Fn(usize) -> Q) -> Result<PolyMatrix> {
    let mut out = PolyMatrix::zeros(border.len(), border.len(), (1, 1));
    for (r, e) in border.entries().iter().enumerate() {
        let mut cur = e.clone();
        let mut word = Word::empty();
        let mut m = 0usize;
        loop {
            let c = coeff(m);
            if !Scalar::is_zero(&c) {
                let col = border.position(&cur).ok_or_else(|| Error::UncoveredChip(format!("peel of {e} reaches {cur}")))?;
                let sign = if m % 2 == 0 { q(1) } else { q(-1) };
                out.add_to(r, col, &FreePoly::scalar_term(c * sign, word.clone()))?;
            }
            match peel(&cur) {
                Some((next, w)) => {
                    word = word.concat(&w);
                    cur = next;
                    m += 1;
                }
                None => break,
            }
        }
    }
    Ok(out)
}

/// `N = K − I` on a peel-closed border.
pub fn n_matrix(border: &Border) -> Result<PolyMatrix> {
    power_series_on_border(border, |m| if m == 1 { q(1) } else { q(0) })
}

/// `K = I + N`: identity plus the blocks `−K_j = −(x ⊗ b) ⊗ I_{𝔱_j}`.
pub fn k_on_border(border: &Border) -> Result<PolyMatrix> {
    power_series_on_border(border, |m| if m <= 1 { q(1) } else { q(0) })
}

/// `L` with `L[r, peel^m r]` equal to the positive word `x_s b₀ x_{k₁} ⋯`.
pub fn l_on_border(border: &Border) -> Result<PolyMatrix> {
    power_series_on_border(border, |m| if m % 2 == 0 { q(1) } else { q(-1) })
}

/// `K^α = Σ_m binom(α, m) N^m`.
pub fn k_power_on_border(border: &Border, alpha: &Q) -> Result<PolyMatrix> {
    power_series_on_border(border, |m| binom(alpha, m))
}

/// The three matrices over the full border for `(d, d̃, g, g̃)`.
#[derive(Clone, Debug)]
pub struct Kly {
    pub border: Border,
    pub k: PolyMatrix,
    pub l: PolyMatrix,
    pub y: PolyMatrix,
}

/// `K`, `L` and `Y = I + Σ_{m=1}^{d−2} binom(1/2, m) N^m` over the full
/// border. `N` is built once and its powers are formed by sparse products,
/// so `Y` does not reuse the closed support formula.
pub fn kly(params: BorderParams) -> Result<Kly> {
    if params.d < 2 {
        return Err(Error::Input("K, L and Y need d ≥ 2".into()));
    }
    let border = Border::full(params)?;
    let n = n_matrix(&border)?;
    let id = PolyMatrix::identity(border.len(), 1);
    let k = id.add(&n)?;
    let l = l_on_border(&border)?;
    let half = q(1) / q(2);
    let mut y = id.clone();
    let mut np = id;
    for m in 1..=params.d.saturating_sub(2) {
        np = np.mul(&n)?;
        y = y.add(&np.scale(&binom(&half, m)))?;
    }
    Ok(Kly { border, k, l, y })
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub border_len: usize,
    pub block_sizes: Vec<usize>,
    pub lk_is_identity: bool,
    pub y_squared_is_k: bool,
    pub y_matches_support_formula: bool,
}

/// Exact `L·K = I` and `Y² = K`.
pub fn kly_identities(params: BorderParams) -> Result<IdentityReport> {
    let m = kly(params)?;
    let id = PolyMatrix::identity(m.border.len(), 1);
    let lk = m.l.mul(&m.k)?;
    let yy = m.y.mul(&m.y)?;
    let y_formula = k_power_on_border(&m.border, &(q(1) / q(2)))?;
    Ok(IdentityReport {
        border_len: m.border.len(),
        block_sizes: m.border.block_sizes(),
        lk_is_identity: lk == id,
        y_squared_is_k: yy == m.k,
        y_matches_support_formula: y_formula == m.y,
    })
}

/// The pieces of the polynomial congruence on a border.
#[derive(Clone, Debug)]
pub struct Congruence {
    pub middle: MiddleMatrixRep,
    pub z0: PolyMatrix,
    /// `Y = K^{1/2}` (tensored with `I_κ`).
    pub y: PolyMatrix,
    /// `Y′ = K^{−1/2}` (tensored with `I_κ`).
    pub y_inv: PolyMatrix,
}

/// Middle matrix of `p` on its reduced border, with the border restrictions
/// of `K^{±1/2}`.
pub fn congruence(p: &FreePoly) -> Result<Congruence> {
    if !p.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let border = Border::reduced(p);
    let middle = middle_matrix_hessian(p, &border)?;
    let kappa = p.kappa();
    let y = k_power_on_border(&border, &(q(1) / q(2)))?.tensor_identity(kappa)?;
    let y_inv = k_power_on_border(&border, &(q(-1) / q(2)))?.tensor_identity(kappa)?;
    let z0 = middle.matrix.at_x_zero();
    Ok(Congruence { middle, z0, y, y_inv })
}

#[derive(Clone, Debug, Serialize)]
pub struct SymbolicCongruence {
    /// `ℨ(a, x) = Y′ᵀ ℨ(a, 0) Y′` with `Y′ = K^{−1/2}`.
    pub inverse_root_form: bool,
    /// `Yᵀ ℨ(a, x) Y = ℨ(a, 0)` with `Y = K^{1/2}`.
    pub root_form: bool,
    /// `ℨ(a, x) = ℨ(a, 0) L(a, x)`.
    pub z_equals_z0_l: bool,
}

/// Check the congruence as an identity of polynomial matrices.
pub fn congruence_symbolic(p: &FreePoly) -> Result<SymbolicCongruence> {
    let c = congruence(p)?;
    let z = &c.middle.matrix;
    let lhs = c.y_inv.transpose().mul(&c.z0)?.mul(&c.y_inv)?;
    let rhs = c.y.transpose().mul(z)?.mul(&c.y)?;
    let l = l_on_border(&c.middle.border)?.tensor_identity(p.kappa())?;
    Ok(SymbolicCongruence {
        inverse_root_form: lhs == *z,
        root_form: rhs == c.z0,
        z_equals_z0_l: c.z0.mul(&l)? == *z,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CongruenceResidual {
    pub border_len: usize,
    /// `‖ℨ(A,X) − Y′ᵀ ℨ(A,0) Y′‖_F`.
    pub inverse_root_residual: f64,
    /// `‖Yᵀ ℨ(A,X) Y − ℨ(A,0)‖_F`.
    pub root_residual: f64,
}

/// Numeric congruence residuals at `t`.
pub fn congruence_check(p: &FreePoly, t: &MatrixTuple) -> Result<CongruenceResidual> {
    let c = congruence(p)?;
    let z = c.middle.matrix.evaluate(t)?;
    let z0 = c.z0.evaluate(t)?;
    let y = c.y.evaluate(t)?;
    let yi = c.y_inv.evaluate(t)?;
    Ok(CongruenceResidual {
        border_len: c.middle.border.len(),
        inverse_root_residual: z.sub(&yi.transpose().mul(&z0).mul(&yi)).frobenius(),
        root_residual: y.transpose().mul(&z).mul(&y).sub(&z0).frobenius(),
    })
}

/// Exact congruence at a rational point: both forms hold with zero residual.
pub fn congruence_check_exact(p: &FreePoly, t: &QTuple) -> Result<(bool, bool)> {
    let c = congruence(p)?;
    let z: QMat = c.middle.matrix.evaluate(t)?;
    let z0: QMat = c.z0.evaluate(t)?;
    let y: QMat = c.y.evaluate(t)?;
    let yi: QMat = c.y_inv.evaluate(t)?;
    let inv_form = yi.transpose().mul(&z0).mul(&yi) == z;
    let root_form = y.transpose().mul(&z).mul(&y) == z0;
    Ok((inv_form, root_form))
}

/// For homogeneous `p` on the full border: `Z_{i,j} = Z_{i,j+1} K_j` when
/// `i + j < d − 2`, and `Z_{i,j}` is x-free when `i + j = d − 2`.
pub fn recursion_check(p: &FreePoly) -> Result<bool> {
    let params = BorderParams::of(p);
    if params.d < 2 {
        return Ok(true);
    }
    let border = Border::full(params)?;
    let mid = middle_matrix_hessian(p, &border)?;
    let n = n_matrix(&border)?.tensor_identity(p.kappa())?;
    let dd = params.d - 2;
    for i in 0..=dd {
        for j in 0..=dd - i {
            let zij = mid.block(i, j);
            if i + j == dd {
                if !zij.is_x_free() {
                    return Ok(false);
                }
                continue;
            }
            let rows: Vec<usize> = border.block_range(j + 1).collect();
            let cols: Vec<usize> = border.block_range(j).collect();
            let kj = n.select(&rows, &cols).scale(&q(-1));
            if mid.block(i, j + 1).mul(&kj)? != zij {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Result of the Schur complement congruence.
#[derive(Clone, Debug)]
pub struct SchurResult {
    pub s: Mat,
    pub lhs: Mat,
    pub rhs: Mat,
    pub residual: f64,
}

/// `[[M + λUΠUᵀ, λUWᵀ], [λWUᵀ, λWWᵀ]] = Sᵀ diag(M, λWWᵀ) S` with
/// `S = [[I, 0], [G, I]]`, `G = (WWᵀ)† W Uᵀ` and `Π` the projection onto the
/// range of `WᵀW`. Shapes: `M` is `m×m`, `U` is `m×r`, `W` is `q×r`.
pub fn schur_congruence(m: &Mat, u: &Mat, w: &Mat, lambda: f64) -> Result<SchurResult> {
    let (mm, r) = u.shape();
    let qq = w.rows();
    if m.shape() != (mm, mm) || w.cols() != r {
        return Err(Error::Shape(format!("M {:?}, U {:?}, W {:?}", m.shape(), u.shape(), w.shape())));
    }
    let wwt = w.mul(&w.transpose());
    let g = pinv(&wwt).mul(w).mul(&u.transpose());
    let mut s = Mat::identity(mm + qq);
    s.set_block(mm, 0, &g);
    let pi = projection_onto_range(&w.transpose().mul(w));
    let uwt = u.mul(&w.transpose()).scale(&lambda);
    let mut lhs = Mat::zeros(mm + qq, mm + qq);
    lhs.set_block(0, 0, &m.add(&u.mul(&pi).mul(&u.transpose()).scale(&lambda)));
    lhs.set_block(0, mm, &uwt);
    lhs.set_block(mm, 0, &uwt.transpose());
    lhs.set_block(mm, mm, &wwt.scale(&lambda));
    let d = Mat::block_diag(&[m, &wwt.scale(&lambda)]);
    let rhs = s.transpose().mul(&d).mul(&s);
    let residual = lhs.sub(&rhs).frobenius() / (1.0 + lhs.frobenius());
    Ok(SchurResult { s, lhs, rhs, residual })
}
