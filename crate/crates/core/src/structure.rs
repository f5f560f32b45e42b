//! Structural checks: majorization of the highest-degree terms, the
//! degree-two collapse, weighted sum-of-squares certificates, and the
//! signature bound on `μ₊(ℨ(A, 0))`.

use serde::Serialize;
use serde_json::{json, Value};

use crate::border::Border;
use crate::error::{Error, Result};
use crate::eval::MatrixTuple;
use crate::linalg::{inertia, inertia_rel, rank, range_included, sym_eig, Inertia, DEFAULT_TOL};
use crate::matrix::{q, Mat, QMat, Ldlt, Scalar, Q};
use crate::middle::{middle_matrix_hessian, phi_decomposition, PolyMatrix};
use crate::parse::{poly_to_json_value, qmat_to_json};
use crate::poly::FreePoly;
use crate::probe::{chip_vectors, form_matrix, form_tol, span_dim};
use crate::word::{Kind, Word};

#[derive(Clone, Debug, Serialize)]
pub struct MajorizeReport {
    pub holds: bool,
    pub rank_lower: usize,
    pub rank_top: usize,
    pub rank_joint: usize,
}

/// `range φ_p^j(A) ⊆ range φ_p^d(A)` for all `1 ≤ j < d`.
pub fn majorize_at(p: &FreePoly, t: &MatrixTuple, tol: f64) -> Result<MajorizeReport> {
    let d = p.deg_x().max(0) as usize;
    let dec = phi_decomposition(p);
    let top = dec.evaluate_phi(d, t)?;
    let lower: Vec<Mat> = (1..d).map(|j| dec.evaluate_phi(j, t)).collect::<Result<_>>()?;
    let refs: Vec<&Mat> = lower.iter().collect();
    let u = if refs.is_empty() { Mat::zeros(top.rows(), 0) } else { Mat::hstack(&refs) };
    let holds = range_included(&u, &top, tol)?;
    let joint = Mat::hstack(&[&top, &u]);
    Ok(MajorizeReport { holds, rank_lower: rank(&u, tol), rank_top: rank(&top, tol), rank_joint: rank(&joint, tol) })
}

#[derive(Clone, Debug, Serialize)]
pub struct CollapseReport {
    pub d: usize,
    pub corner_x_free: bool,
    pub corner_nonzero: bool,
    /// `ℨ_{0,d−2}` rendered as text.
    pub corner: String,
    /// `μ₊` and rank data of `[[ℨ₀₀, ℨ_{0,d−2}], [ℨ_{d−2,0}, 0]]` at a sample.
    pub witness: Option<CollapseWitness>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CollapseWitness {
    pub mu_plus: usize,
    pub corner_rank: usize,
}

/// The corner block `ℨ_{0,d−2}` of the Hessian middle matrix depends only on
/// `a` and is nonzero; for `d > 2` the witness block at a sample has
/// `μ₊ ≥ rank ℨ_{0,d−2}(A)`, which rules out `ℨ(A, X) ⪯ 0`.
pub fn degree_two_collapse_check(p: &FreePoly, sample: Option<&MatrixTuple>) -> Result<CollapseReport> {
    if !p.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let d = p.deg_x().max(0) as usize;
    if d < 2 {
        return Err(Error::Input("the collapse check needs x-degree at least 2".into()));
    }
    let mid = middle_matrix_hessian(p, &Border::reduced(p))?;
    let corner = mid.block(0, d - 2);
    let witness = match (sample, d > 2) {
        (Some(t), true) => {
            let t0 = t.at_x_zero();
            let z00 = mid.block(0, 0).at_x_zero().evaluate(&t0)?;
            let z0c = corner.evaluate(&t0)?;
            let (r0, rc) = (z00.rows(), z0c.cols());
            let mut w = Mat::zeros(r0 + rc, r0 + rc);
            w.set_block(0, 0, &z00);
            w.set_block(0, r0, &z0c);
            w.set_block(r0, 0, &z0c.transpose());
            let ine = inertia_rel(&w, DEFAULT_TOL)?;
            Some(CollapseWitness { mu_plus: ine.mu_plus, corner_rank: rank(&z0c, DEFAULT_TOL) })
        }
        _ => None,
    };
    Ok(CollapseReport {
        d,
        corner_x_free: corner.is_x_free(),
        corner_nonzero: !corner.is_zero(),
        corner: corner.to_text(),
        witness,
    })
}

/// `p = ℓ − Σ_{i,j} s_iᵀ R_ij s_j` with `ℓ` affine-linear in `x`.
#[derive(Clone, Debug)]
pub struct SosCertificate {
    pub ell: FreePoly,
    pub r: PolyMatrix,
    pub s: Vec<FreePoly>,
    /// Reconstruction verified in exact arithmetic.
    pub exact: bool,
}

impl SosCertificate {
    pub fn reconstruct(&self) -> Result<FreePoly> {
        let mut acc = self.ell.clone();
        for ((i, j), rij) in self.r.entries() {
            let term = self.s[*i].transpose().mul(rij)?.mul(&self.s[*j])?;
            acc = acc.sub(&term)?;
        }
        Ok(acc)
    }

    /// Whether `R` has no `a` letters.
    pub fn r_is_constant(&self) -> bool {
        self.r.entries().all(|(_, p)| !p.uses(Kind::A))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "ell": poly_to_json_value(&self.ell),
            "R": self.r.to_json(),
            "S": self.s.iter().map(poly_to_json_value).collect::<Vec<_>>(),
            "exact": self.exact,
        })
    }
}

fn affine_part(p: &FreePoly) -> FreePoly {
    p.filter(|w| w.count(Kind::X) <= 1)
}

/// Certificate for a symmetric `p` of x-degree at most two:
/// `R = −½ ℨ₀₀(a, 0)` and `S_e = I_κ ⊗ x_k f` for the degree-zero border
/// entries `h_k f`.
pub fn sos_extract(p: &FreePoly) -> Result<SosCertificate> {
    if !p.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    if p.deg_x() > 2 {
        return Err(Error::DegreeTooHigh { found: p.deg_x(), max: 2 });
    }
    let kappa = p.kappa();
    let ell = affine_part(p);
    let border = Border::chip_border(p, (p.deg_x() == 2).then_some(0), crate::border::Flavor::Reduced);
    let mid = middle_matrix_hessian(p, &border)?;
    let r = mid.matrix.scale(&(q(-1) / q(2)));
    let s: Vec<FreePoly> = border
        .entries()
        .iter()
        .map(|e| FreePoly::identity_word(kappa, e.f.prepend(crate::word::Generator::x(e.k))))
        .collect();
    let mut cert = SosCertificate { ell, r, s, exact: false };
    cert.exact = cert.reconstruct()? == *p;
    Ok(cert)
}

/// Outcome of the quasiconvex certification.
#[derive(Clone, Debug)]
pub struct QuasiconvexResult {
    pub certificate: Option<SosCertificate>,
    /// `(d_j, s_j)` with `f = ℓ + Σ d_j s_jᵀ s_j`, `d_j > 0`.
    pub squares: Vec<(Q, FreePoly)>,
    /// Rows of `E` with `½ℨ = EᵀE` (eigenvalues clipped at zero).
    pub numeric_factor: Option<Mat>,
    pub refusal: Option<String>,
}

impl QuasiconvexResult {
    fn refuse(msg: impl Into<String>) -> QuasiconvexResult {
        QuasiconvexResult { certificate: None, squares: Vec::new(), numeric_factor: None, refusal: Some(msg.into()) }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "certified": self.certificate.is_some(),
            "refusal": self.refusal,
            "squares": self.squares.iter().map(|(d, s)| json!({"weight": d.to_string(), "row": poly_to_json_value(s)})).collect::<Vec<_>>(),
            "certificate": self.certificate.as_ref().map(|c| c.to_json()),
        })
    }
}

/// Constant middle matrix as a rational matrix in the entry-major layout.
fn constant_matrix(m: &PolyMatrix) -> Option<QMat> {
    let (k, _) = m.entry_shape();
    let mut out = QMat::zeros(m.rows() * k, m.cols() * k);
    for ((r, c), p) in m.entries() {
        if p.terms().keys().any(|w| !w.is_empty()) {
            return None;
        }
        let cm = p.coeff(&Word::empty())?;
        out.set_block(r * k, c * k, cm);
    }
    Some(out)
}

/// Certify `f = ℓ + Σ_j s_jᵀ s_j` for an x-only symmetric `f` with
/// `f(0) = 0`, or refuse naming the failed condition.
pub fn quasiconvex_certify(f: &FreePoly) -> Result<QuasiconvexResult> {
    if f.uses(Kind::A) {
        return Err(Error::Input("f must not contain a variables".into()));
    }
    if !f.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    if f.coeff(&Word::empty()).is_some() {
        return Err(Error::Input("f(0) must be zero".into()));
    }
    if f.deg_x() > 2 {
        return Ok(QuasiconvexResult::refuse(format!("degree {} exceeds 2", f.deg_x())));
    }
    let kappa = f.kappa();
    let ell = affine_part(f);
    if f.deg_x() < 2 {
        let cert = SosCertificate { ell, r: PolyMatrix::zeros(0, 0, (1, 1)), s: Vec::new(), exact: true };
        return Ok(QuasiconvexResult { certificate: Some(cert), squares: Vec::new(), numeric_factor: None, refusal: None });
    }
    let border = Border::reduced(f);
    let mid = middle_matrix_hessian(f, &border)?;
    let half = mid.matrix.scale(&(q(1) / q(2)));
    let Some(rq) = constant_matrix(&half) else {
        return Ok(QuasiconvexResult::refuse("middle matrix is not constant"));
    };
    let ldl = match Ldlt::factor(&rq) {
        Ok(l) if l.is_psd() => l,
        _ => return Ok(QuasiconvexResult::refuse("middle matrix is not positive semidefinite")),
    };
    // numeric factor with clipping of tiny negative eigenvalues
    let rf = rq.to_f64();
    let e = sym_eig(&rf)?;
    if e.values.first().is_some_and(|&l| l < -1e-10) {
        return Ok(QuasiconvexResult::refuse("middle matrix is not positive semidefinite"));
    }
    let rows: Vec<usize> = (0..e.values.len()).filter(|&i| e.values[i] > 1e-12).collect();
    let numeric = Mat::from_fn(rows.len(), rf.cols(), |r, c| e.values[rows[r]].sqrt() * e.vectors.get(c, rows[r]));
    // rows of Lᵀ Π applied to V = (I_κ ⊗ x_k) stacked, layout (entry, α)
    let dim = rq.rows();
    let mut squares = Vec::new();
    for j in 0..dim {
        if Scalar::is_zero(&ldl.d[j]) {
            continue;
        }
        let mut terms: Vec<(Word, QMat)> = Vec::new();
        for i in 0..dim {
            let lij = ldl.l.get(i, j);
            if Scalar::is_zero(lij) {
                continue;
            }
            let idx = ldl.perm[i];
            let (e_idx, alpha) = (idx / kappa, idx % kappa);
            let entry = border.entry(e_idx);
            let mut c = QMat::zeros(1, kappa);
            c.set(0, alpha, lij.clone());
            terms.push((entry.f.prepend(crate::word::Generator::x(entry.k)), c));
        }
        squares.push((ldl.d[j].clone(), FreePoly::from_terms(1, kappa, terms)?));
    }
    let mut r = PolyMatrix::zeros(squares.len(), squares.len(), (1, 1));
    for (i, (d, _)) in squares.iter().enumerate() {
        r.set(i, i, FreePoly::scalar(-d.clone()))?;
    }
    let mut cert = SosCertificate { ell, r, s: squares.iter().map(|(_, s)| s.clone()).collect(), exact: false };
    cert.exact = cert.reconstruct()? == *f;
    Ok(QuasiconvexResult { certificate: Some(cert), squares, numeric_factor: Some(numeric), refusal: None })
}

#[derive(Clone, Debug, Serialize)]
pub struct SignatureBoundReport {
    pub kappa: usize,
    pub beta: Vec<usize>,
    /// `1 + Σ_i κβ_i(κβ_i − 1)/2`.
    pub gamma_formula: usize,
    /// Whether `{w(A, X)v_α : w ∈ ℛ𝒞_p^i}` is independent for every `i`.
    pub chips_independent: bool,
    /// `nβκ − dim ℛ^{𝒞_p}(𝕊_n(ℝ^g))v`.
    pub codim_numeric: usize,
    pub mu_plus_z0: usize,
    /// `e₊` of the relaxed form on `𝕊_n(ℝ^g)` at the given `(λ, δ)`.
    pub e_plus_relaxed: usize,
    pub lambda: f64,
    pub delta: f64,
    pub holds_gamma: bool,
    pub holds_numeric: bool,
}

/// Compare `μ₊(ℨ(A, 0))` with `γ` and with `e₊(p″_{λ,δ}) + codim`.
pub fn signature_bound_check(p: &FreePoly, t: &MatrixTuple, lambda: f64, delta: f64) -> Result<SignatureBoundReport> {
    if !p.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let kappa = p.kappa();
    let chips = crate::chips::right_chip_sets(p);
    let beta = chips.beta.clone();
    let gamma_formula = 1 + beta.iter().map(|b| kappa * b * (kappa * b).saturating_sub(1) / 2).sum::<usize>();
    let vecs = chip_vectors(p, t)?;
    let n = t.n;
    let mut chips_independent = true;
    let mut codim = 0;
    for vs in &vecs {
        if vs.is_empty() {
            continue;
        }
        let um = Mat::from_fn(n, vs.len(), |r, c| vs[c][r]);
        if rank(&um, DEFAULT_TOL) < vs.len() {
            chips_independent = false;
        }
        codim += vs.len() * n - span_dim(vs, n);
    }
    let mid = middle_matrix_hessian(p, &Border::reduced(p))?;
    let z0 = mid.matrix.at_x_zero().evaluate(&t.at_x_zero())?;
    let mu_plus_z0 = inertia(&z0, form_tol(&z0))?.mu_plus;
    let fm = form_matrix(p, t, &Border::reduced_extended(p), lambda, delta)?;
    let e_plus: Inertia = fm.signature(None)?;
    Ok(SignatureBoundReport {
        kappa,
        beta,
        gamma_formula,
        chips_independent,
        codim_numeric: codim,
        mu_plus_z0,
        e_plus_relaxed: e_plus.mu_plus,
        lambda,
        delta,
        holds_gamma: mu_plus_z0 <= gamma_formula,
        holds_numeric: mu_plus_z0 <= e_plus.mu_plus + codim,
    })
}

/// Rational matrix as JSON rows.
pub fn qmat_json(m: &QMat) -> Value {
    qmat_to_json(m)
}
