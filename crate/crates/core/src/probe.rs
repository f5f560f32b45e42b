//! Numeric probes of positivity sets: boundary points, full-rank tests,
//! clamped tangent planes, quadratic-form matrices over `𝕊_n(ℝ^g)`,
//! signature scans, span dimensions of `u wᵀ + w uᵀ` families, and convexity sampling.

use rand::Rng;
use serde::Serialize;

use crate::border::Border;
use crate::calculus::{derivative_full, derivative_x, hessian_bilinear};
use crate::error::{Error, Result};
use crate::eval::{evaluate, MatrixTuple, Tuple};
use crate::linalg::{inertia, nullspace, norm, pinv_tol, rank, sym_eig, Inertia, DEFAULT_TOL};
use crate::matrix::Mat;
use crate::poly::FreePoly;
use crate::random::{normal, rng};
use crate::word::Kind;

/// Index pairs `(i, j)`, `i ≤ j`, of the basis `Σ_ij` of `𝕊_n`.
pub fn sym_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            out.push((i, j));
        }
    }
    out
}

/// `Σ_ii = e_i e_iᵀ`, `Σ_ij = (e_i e_jᵀ + e_j e_iᵀ)/√2`.
pub fn sigma(n: usize, i: usize, j: usize) -> Mat {
    let mut m = Mat::zeros(n, n);
    if i == j {
        m.set(i, i, 1.0);
    } else {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        m.set(i, j, s);
        m.set(j, i, s);
    }
    m
}

/// Coordinates of a symmetric matrix in the `Σ` basis.
pub fn sym_coords(m: &Mat) -> Vec<f64> {
    let n = m.rows();
    let s = std::f64::consts::SQRT_2;
    sym_pairs(n)
        .into_iter()
        .map(|(i, j)| if i == j { *m.get(i, i) } else { s * 0.5 * (m.get(i, j) + m.get(j, i)) })
        .collect()
}

pub fn sym_from_coords(n: usize, c: &[f64]) -> Mat {
    let mut m = Mat::zeros(n, n);
    for (k, (i, j)) in sym_pairs(n).into_iter().enumerate() {
        m.add_assign(&sigma(n, i, j).scale(&c[k]));
    }
    m
}

/// Basis of `𝕊_n(ℝ^g)`: element `(var, i, j)` is `Σ_ij` in slot `var`.
#[derive(Clone, Debug)]
pub struct SigmaBasis {
    pub n: usize,
    pub g: usize,
    pub labels: Vec<(usize, usize, usize)>,
}

impl SigmaBasis {
    pub fn new(n: usize, g: usize) -> SigmaBasis {
        let pairs = sym_pairs(n);
        let labels = (0..g).flat_map(|v| pairs.iter().map(move |&(i, j)| (v, i, j))).collect();
        SigmaBasis { n, g, labels }
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    /// The g-tuple for basis element `k`.
    pub fn element(&self, k: usize) -> Vec<Mat> {
        let (v, i, j) = self.labels[k];
        (0..self.g).map(|s| if s == v { sigma(self.n, i, j) } else { Mat::zeros(self.n, self.n) }).collect()
    }

    /// Tuple from coordinates.
    pub fn tuple_from_coords(&self, c: &[f64]) -> Vec<Mat> {
        let per = self.n * (self.n + 1) / 2;
        (0..self.g).map(|v| sym_from_coords(self.n, &c[v * per..(v + 1) * per])).collect()
    }

    pub fn coords_of(&self, hs: &[Mat]) -> Vec<f64> {
        hs.iter().flat_map(sym_coords).collect()
    }
}

/// A point with `p(A, X) ⪰ 0` and a kernel vector `v`.
#[derive(Clone, Debug)]
pub struct BoundaryPoint {
    pub tuple: MatrixTuple,
    pub t: f64,
    pub min_eig: f64,
    pub kernel_dim: usize,
    /// Orthonormal kernel basis (columns).
    pub kernel: Mat,
}

impl BoundaryPoint {
    pub fn v(&self) -> &[f64] {
        self.tuple.v.as_deref().expect("boundary points carry v")
    }
}

/// Tolerance under which an eigenvalue of `M` counts as zero.
pub fn kernel_tol(m: &Mat) -> f64 {
    1e-8 * m.max_abs().max(1.0)
}

/// Analyse `p(A, X)` at a point: smallest eigenvalue, kernel basis and
/// the eigenvector of the smallest eigenvalue as `v`.
pub fn boundary_data(p: &FreePoly, t: &MatrixTuple, scale: f64) -> Result<BoundaryPoint> {
    let m = evaluate(p, t)?.symmetrize();
    let e = sym_eig(&m)?;
    let tol = kernel_tol(&m);
    let kidx: Vec<usize> = (0..e.values.len()).filter(|&i| e.values[i].abs() <= tol).collect();
    let kernel = Mat::from_fn(m.rows(), kidx.len(), |r, c| *e.vectors.get(r, kidx[c]));
    let mut tuple = t.clone();
    tuple.v = Some(e.vectors.col(0));
    Ok(BoundaryPoint { tuple, t: scale, min_eig: e.values[0], kernel_dim: kidx.len(), kernel })
}

#[derive(Clone, Debug)]
pub enum BoundaryOutcome {
    Found(BoundaryPoint),
    NoCrossing { t_max: f64, min_eig_at_t_max: f64 },
}

#[derive(Clone, Copy, Debug)]
pub struct BoundaryOptions {
    pub t_max: f64,
    pub tol: f64,
    pub grid: usize,
}

impl Default for BoundaryOptions {
    fn default() -> Self {
        BoundaryOptions { t_max: 1.0, tol: 1e-10, grid: 64 }
    }
}

fn min_eig_along(p: &FreePoly, a: &[Mat], x: &[Mat], t: f64) -> Result<f64> {
    let n = a.first().or(x.first()).map_or(1, |m| m.rows());
    let xs: Vec<Mat> = x.iter().map(|m| m.scale(&t)).collect();
    let tup = Tuple { n, a: a.to_vec(), x: xs, e: None, h: None, v: None };
    let m = evaluate(p, &tup)?.symmetrize();
    Ok(sym_eig(&m)?.values[0])
}

/// Locate the first `t ∈ (0, t_max]` with `λ_min(p(A, tX)) = 0` by a grid
/// scan followed by bisection.
pub fn find_boundary(p: &FreePoly, a: &[Mat], x_dir: &[Mat], opts: BoundaryOptions) -> Result<BoundaryOutcome> {
    let n = a.first().or(x_dir.first()).map_or(1, |m| m.rows());
    let f = |t: f64| min_eig_along(p, a, x_dir, t);
    let f0 = f(0.0)?;
    if f0 <= opts.tol {
        return Err(Error::Input(format!("p(A, 0) is not positive definite (λ_min = {f0:e})")));
    }
    let mut lo = 0.0;
    let mut hi = None;
    for i in 1..=opts.grid {
        let t = opts.t_max * i as f64 / opts.grid as f64;
        if f(t)? <= 0.0 {
            hi = Some(t);
            break;
        }
        lo = t;
    }
    let Some(mut hi) = hi else {
        return Ok(BoundaryOutcome::NoCrossing { t_max: opts.t_max, min_eig_at_t_max: f(opts.t_max)? });
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm > 0.0 {
            lo = mid;
            if fm <= opts.tol {
                break;
            }
        } else {
            hi = mid;
        }
    }
    let t = lo;
    let tup = Tuple { n, a: a.to_vec(), x: x_dir.iter().map(|m| m.scale(&t)).collect(), e: None, h: None, v: None };
    Ok(BoundaryOutcome::Found(boundary_data(p, &tup, t)?))
}

#[derive(Clone, Debug, Serialize)]
pub struct FullRankReport {
    pub count_condition: bool,
    pub rank: Option<usize>,
    pub target: usize,
    pub full_rank: bool,
}

/// Jacobian of `(E, H) ↦ p′(A, X)[E, H]` from the `Σ` basis of
/// `𝕊_n(ℝ^{g̃+g})` into `Σ` coordinates of `𝕊_{nκ}`.
pub fn full_derivative_jacobian(p: &FreePoly, t: &MatrixTuple) -> Result<Mat> {
    let dp = derivative_full(p)?;
    let (ga, gx) = (t.ga(), t.gx());
    let basis = SigmaBasis::new(t.n, ga + gx);
    let nk = t.n * p.kappa();
    let out_dim = nk * (nk + 1) / 2;
    let mut jac = Mat::zeros(out_dim, basis.dim());
    for k in 0..basis.dim() {
        let el = basis.element(k);
        let mut tup = t.clone();
        tup.e = Some(el[..ga].to_vec());
        tup.h = Some(el[ga..].to_vec());
        let m = evaluate(&dp, &tup)?;
        for (r, c) in sym_coords(&m).into_iter().enumerate() {
            jac.set(r, k, c);
        }
    }
    Ok(jac)
}

/// Whether `p′(A, X)` maps onto `𝕊_{nκ}`.
pub fn full_rank_check(p: &FreePoly, t: &MatrixTuple) -> Result<FullRankReport> {
    if !p.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let n = t.n;
    let nk = n * p.kappa();
    let target = nk * (nk + 1) / 2;
    let gg = t.ga() + t.gx();
    let count_condition = gg * (n * n + n) >= nk * nk + nk;
    if !count_condition {
        return Ok(FullRankReport { count_condition, rank: None, target, full_rank: false });
    }
    let jac = full_derivative_jacobian(p, t)?;
    let r = rank(&jac, DEFAULT_TOL);
    Ok(FullRankReport { count_condition, rank: Some(r), target, full_rank: r == target })
}

fn with_h(t: &MatrixTuple, h: Vec<Mat>) -> MatrixTuple {
    let mut out = t.clone();
    out.h = Some(h);
    out
}

/// Matrix of `H ↦ p_x(A, X)[0, H]v` over the `Σ` basis of `𝕊_n(ℝ^g)`.
pub fn gradient_map(p: &FreePoly, t: &MatrixTuple) -> Result<Mat> {
    let v = t.v.as_ref().ok_or_else(|| Error::Input("a vector v is required".into()))?;
    let dx = derivative_x(p)?;
    let basis = SigmaBasis::new(t.n, t.gx());
    let mut m = Mat::zeros(v.len(), basis.dim());
    for k in 0..basis.dim() {
        let y = evaluate(&dx, &with_h(t, basis.element(k)))?.mul_vec(v);
        for (r, x) in y.into_iter().enumerate() {
            m.set(r, k, x);
        }
    }
    Ok(m)
}

/// Orthonormal basis (columns, `Σ` coordinates) of the clamped tangent
/// plane `𝒯(A, X, v) = {H : p_x(A, X)[0, H]v = 0}`.
pub fn clamped_tangent(p: &FreePoly, t: &MatrixTuple) -> Result<Mat> {
    let g = gradient_map(p, t)?;
    Ok(nullspace(&g, DEFAULT_TOL))
}

/// Columns (in `Σ` coordinates) spanning `𝒩^⊥ = {y vᵀ + v yᵀ}` per
/// variable, parametrized by `y`: `H = (y vᵀ + v yᵀ)/|v|² − (vᵀy) v vᵀ/|v|⁴`,
/// so that `H v = y`. Requires `κ = 1`.
pub fn v_lift(t: &MatrixTuple) -> Result<Mat> {
    let v = t.v.as_ref().ok_or_else(|| Error::Input("a vector v is required".into()))?;
    let n = t.n;
    if v.len() != n {
        return Err(Error::Shape("the lift needs a scalar polynomial (κ = 1)".into()));
    }
    let g = t.gx();
    let basis = SigmaBasis::new(n, g);
    let vv = v.iter().map(|x| x * x).sum::<f64>();
    let per = n * (n + 1) / 2;
    let mut out = Mat::zeros(basis.dim(), g * n);
    for var in 0..g {
        for i in 0..n {
            let h = Mat::from_fn(n, n, |r, c| {
                let y = |k: usize| if k == i { 1.0 } else { 0.0 };
                (y(r) * v[c] + v[r] * y(c)) / vv - v[i] * v[r] * v[c] / (vv * vv)
            });
            for (k, x) in sym_coords(&h).into_iter().enumerate() {
                out.set(var * per + k, var * n + i, x);
            }
        }
    }
    Ok(out)
}

/// The quadratic form `H ↦ ⟨q[H]v, v⟩` of the relaxed Hessian and its parts,
/// in the `Σ` basis of `𝕊_n(ℝ^g)`.
#[derive(Clone, Debug)]
pub struct FormMatrix {
    pub basis: SigmaBasis,
    pub lambda: f64,
    pub delta: f64,
    /// Hessian part `⟨p_xx[H, K]v, v⟩`.
    pub hessian: Mat,
    /// Gram matrix of `p_x[H]v`.
    pub gradient: Mat,
    /// Gram matrix of the stacked border evaluations `(I_κ ⊗ B(A, X)[H])v`.
    pub border: Mat,
    /// `hessian + λ gradient + δ border`.
    pub g: Mat,
    /// Columns `(I_κ ⊗ B(A, X)[Σ_k])v`.
    pub psi: Mat,
}

/// Stacked border evaluation `(I_κ ⊗ B(A, X)[H])v` for each `Σ` element.
pub fn border_map(border: &Border, kappa: usize, t: &MatrixTuple) -> Result<Mat> {
    let v = t.v.as_ref().ok_or_else(|| Error::Input("a vector v is required".into()))?;
    let n = t.n;
    let basis = SigmaBasis::new(n, t.gx());
    let monos = border.monomials(kappa);
    let mut psi = Mat::zeros(border.len() * kappa * n, basis.dim());
    for k in 0..basis.dim() {
        let tk = with_h(t, basis.element(k));
        for (e, mono) in monos.iter().enumerate() {
            let y = evaluate(mono, &tk)?.mul_vec(v);
            for (r, x) in y.into_iter().enumerate() {
                psi.set(e * kappa * n + r, k, x);
            }
        }
    }
    Ok(psi)
}

/// Assemble the form matrix of `p″_{λ,δ}` at `(A, X, v)` on `border`
/// (normally the reduced extended border).
pub fn form_matrix(p: &FreePoly, t: &MatrixTuple, border: &Border, lambda: f64, delta: f64) -> Result<FormMatrix> {
    let v = t.v.as_ref().ok_or_else(|| Error::Input("a vector v is required".into()))?;
    let basis = SigmaBasis::new(t.n, t.gx());
    let dim = basis.dim();
    let elems: Vec<Vec<Mat>> = (0..dim).map(|k| basis.element(k)).collect();
    let mut hessian = Mat::zeros(dim, dim);
    for i in 0..dim {
        let ti = with_h(t, elems[i].clone());
        for j in i..dim {
            let b = hessian_bilinear(p, &ti, &elems[j])?;
            let val: f64 = b.mul_vec(v).iter().zip(v).map(|(a, b)| a * b).sum();
            hessian.set(i, j, val);
            hessian.set(j, i, val);
        }
    }
    let gm = gradient_map(p, t)?;
    let gradient = gm.transpose().mul(&gm);
    let psi = border_map(border, p.kappa(), t)?;
    let bgram = psi.transpose().mul(&psi);
    let g = hessian.add(&gradient.scale(&lambda)).add(&bgram.scale(&delta));
    Ok(FormMatrix { basis, lambda, delta, hessian, gradient, border: bgram, g, psi })
}

impl FormMatrix {
    /// Same parts with new `(λ, δ)`.
    pub fn with_params(&self, lambda: f64, delta: f64) -> FormMatrix {
        let mut out = self.clone();
        out.lambda = lambda;
        out.delta = delta;
        out.g = self.hessian.add(&self.gradient.scale(&lambda)).add(&self.border.scale(&delta));
        out
    }

    /// `Lᵀ G L` for a coordinate map `L` (columns in `Σ` coordinates).
    pub fn restrict(&self, l: &Mat) -> Mat {
        l.transpose().mul(&self.g).mul(l)
    }

    /// `e_±` of the form, optionally on the column span of `sub` (which
    /// must have orthonormal columns).
    pub fn signature(&self, sub: Option<&Mat>) -> Result<Inertia> {
        let m = match sub {
            Some(s) => self.restrict(s),
            None => self.g.clone(),
        };
        inertia(&m, form_tol(&m))
    }
}

/// Absolute eigenvalue threshold for form signatures.
pub fn form_tol(m: &Mat) -> f64 {
    1e-9 * (1.0 + m.max_abs())
}

/// Dual assembly `Ψᵀ ℨ_{λ,δ}(A, X) Ψ` of the same form matrix.
pub fn form_matrix_dual(fm: &FormMatrix, z_lambda_delta: &Mat) -> Mat {
    fm.psi.transpose().mul(z_lambda_delta).mul(&fm.psi)
}

/// Orthonormal basis of `𝒯 ∩ 𝒩^⊥` in `Σ` coordinates.
pub fn tangent_normal_intersection(p: &FreePoly, t: &MatrixTuple) -> Result<Mat> {
    let tb = clamped_tangent(p, t)?;
    let lift = v_lift(t)?;
    let nb = crate::linalg::range_basis(&lift, DEFAULT_TOL);
    // x = T a = N b  ⇔  [T, −N] (a; b) = 0
    let stacked = Mat::hstack(&[&tb, &nb.neg()]);
    let ns = nullspace(&stacked, DEFAULT_TOL);
    let coeffs = ns.block(0, 0, tb.cols(), ns.cols());
    let vecs = tb.mul(&coeffs);
    Ok(crate::linalg::range_basis(&vecs, DEFAULT_TOL))
}

#[derive(Clone, Debug, Serialize)]
pub struct SecondFundamentalForm {
    pub tangent_dim: usize,
    pub kernel_dim: usize,
    pub inertia: Inertia,
    pub warning: Option<String>,
}

/// Inertia of `H ↦ ⟨p_xx(A, X)[0, H]v, v⟩` on the clamped tangent plane.
pub fn second_fundamental_form(p: &FreePoly, bp: &BoundaryPoint) -> Result<SecondFundamentalForm> {
    let t = &bp.tuple;
    let tb = clamped_tangent(p, t)?;
    let border = Border::reduced_extended(p);
    let fm = form_matrix(p, t, &border, 0.0, 0.0)?;
    let m = tb.transpose().mul(&fm.hessian).mul(&tb);
    let warning = (bp.kernel_dim > 1).then(|| format!("kernel dimension {} exceeds one", bp.kernel_dim));
    Ok(SecondFundamentalForm { tangent_dim: tb.cols(), kernel_dim: bp.kernel_dim, inertia: inertia(&m, form_tol(&m))?, warning })
}

/// One `(λ, δ)` regime value.
#[derive(Clone, Debug, Serialize)]
pub struct RegimePoint {
    pub delta: f64,
    pub lambda: f64,
    /// Magnitude `|λ|` below which stability is not counted.
    pub lambda_floor: f64,
    pub mu_plus: usize,
    pub stable: bool,
}

/// The default δ grid `−10⁻¹, …, −10⁻⁶`.
pub fn default_delta_grid() -> Vec<f64> {
    (1..=6).map(|k| -(10f64.powi(-k))).collect()
}

/// Smallest nonzero singular value of `f` (relative threshold `1e-10`).
fn smallest_positive_singular_value(f: &Mat) -> f64 {
    let s = crate::linalg::svd(f).s;
    let top = s.first().copied().unwrap_or(0.0);
    s.into_iter().filter(|&x| x > 1e-10 * top.max(1e-300)).fold(f64::INFINITY, f64::min)
}

/// For each `δ`, double `λ` downward from `−1` until `μ₊(E + λF + δG)` is
/// unchanged for three consecutive values past the floor
/// `|λ| ≥ (1 + ‖E‖ + |δ|‖G‖)² / (σ⁺_min(F) · max(|δ|, 10⁻³))`. Below the
/// floor the off-diagonal coupling between `ker F` and its complement can
/// still move eigenvalues across zero.
pub fn regime_scan(e: &Mat, f: &Mat, g: &Mat, deltas: &[f64], tol: f64) -> Result<Vec<RegimePoint>> {
    let sigma = smallest_positive_singular_value(f);
    let ne = e.frobenius();
    let ng = g.frobenius();
    let mut out = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let base = e.add(&g.scale(&delta));
        let lambda_floor = if sigma.is_finite() {
            (1.0 + ne + delta.abs() * ng).powi(2) / (sigma * delta.abs().max(1e-3))
        } else {
            0.0
        };
        let mut lambda = -1.0f64;
        let mut history: Vec<usize> = Vec::new();
        let mut stable = false;
        for _ in 0..64 {
            let m = base.add(&f.scale(&lambda));
            let mu = inertia(&m, tol)?.mu_plus;
            if lambda.abs() >= lambda_floor {
                history.push(mu);
                let h = history.len();
                if h >= 3 && history[h - 1] == history[h - 2] && history[h - 2] == history[h - 3] {
                    stable = true;
                    break;
                }
            }
            lambda *= 2.0;
        }
        out.push(RegimePoint { delta, lambda, lambda_floor, mu_plus: *history.last().unwrap_or(&0), stable });
    }
    Ok(out)
}

/// The regime value reported for a scan: the entry with the smallest `|δ|`.
pub fn regime_value(points: &[RegimePoint]) -> Option<&RegimePoint> {
    points.iter().min_by(|a, b| a.delta.abs().total_cmp(&b.delta.abs()))
}

#[derive(Clone, Debug, Serialize)]
pub struct ChsyReport {
    pub k: usize,
    pub n: usize,
    pub dim: usize,
    pub formula: usize,
    pub matches: bool,
}

/// `dim span{col(Hu₁, …, Hu_k) : H ∈ 𝕊_n}` by rank over the `Σ` basis.
pub fn span_dim(us: &[Vec<f64>], n: usize) -> usize {
    let pairs = sym_pairs(n);
    let k = us.len();
    let mut m = Mat::zeros(k * n, pairs.len());
    for (c, (i, j)) in pairs.into_iter().enumerate() {
        let s = sigma(n, i, j);
        for (b, u) in us.iter().enumerate() {
            for (r, x) in s.mul_vec(u).into_iter().enumerate() {
                m.set(b * n + r, c, x);
            }
        }
    }
    rank(&m, DEFAULT_TOL)
}

/// Dimension of the span of `u_i wᵀ + w u_iᵀ` over all `i` and `w ∈ ℝⁿ`, for
/// independent `u₁, …, u_k ∈ ℝⁿ`, compared with
/// `kn − k(k−1)/2`.
pub fn chsy_dim(us: &[Vec<f64>]) -> Result<ChsyReport> {
    let k = us.len();
    let n = us.first().map_or(0, |u| u.len());
    if us.iter().any(|u| u.len() != n) {
        return Err(Error::Shape("vectors of different lengths".into()));
    }
    let um = Mat::from_fn(n, k, |r, c| us[c][r]);
    if rank(&um, DEFAULT_TOL) != k {
        return Err(Error::Dependent(format!("{k} vectors in ℝ^{n} are not linearly independent")));
    }
    let dim = span_dim(us, n);
    let formula = k * n - k * (k.saturating_sub(1)) / 2;
    Ok(ChsyReport { k, n, dim, formula, matches: dim == formula })
}

/// Reduce the kernel of `p(A, X)` to `span{v}` by a small move of `(A, X)`
/// that adds `ε′ Σ k_j k_jᵀ` along the other kernel vectors. Newton steps
/// use the pseudoinverse of the full-derivative Jacobian, with continuation
/// in `ε′`.
pub fn kernel_dim_one_perturb(p: &FreePoly, bp: &BoundaryPoint, eps: f64) -> Result<BoundaryPoint> {
    if bp.kernel_dim <= 1 {
        return Ok(bp.clone());
    }
    let t0 = &bp.tuple;
    let v = bp.v().to_vec();
    let vn = norm(&v);
    let v: Vec<f64> = v.iter().map(|x| x / vn).collect();
    // kernel directions orthogonal to v
    let mut others: Vec<Vec<f64>> = Vec::new();
    for c in 0..bp.kernel.cols() {
        let mut k = bp.kernel.col(c);
        for b in std::iter::once(&v).chain(others.iter()) {
            let d: f64 = k.iter().zip(b).map(|(x, y)| x * y).sum();
            for (x, y) in k.iter_mut().zip(b) {
                *x -= d * y;
            }
        }
        let nk = norm(&k);
        if nk > 1e-6 {
            others.push(k.into_iter().map(|x| x / nk).collect());
        }
    }
    let p0 = evaluate(p, t0)?.symmetrize();
    let dim = p0.rows();
    let mut bump = Mat::zeros(dim, dim);
    for k in &others {
        bump.add_assign(&Mat::from_fn(dim, dim, |i, j| k[i] * k[j]));
    }
    let (ga, gx) = (t0.ga(), t0.gx());
    let basis = SigmaBasis::new(t0.n, ga + gx);
    let apply = |z: &[f64]| -> MatrixTuple {
        let d = basis.tuple_from_coords(z);
        let mut t = t0.clone();
        for (m, dm) in t.a.iter_mut().zip(&d[..ga]) {
            *m = m.add(dm);
        }
        for (m, dm) in t.x.iter_mut().zip(&d[ga..]) {
            *m = m.add(dm);
        }
        t
    };
    let mut eps_prime = eps / 4.0;
    for _attempt in 0..8 {
        let mut z = vec![0.0; basis.dim()];
        let mut ok = true;
        let steps = 8;
        'cont: for s in 1..=steps {
            let target = p0.add(&bump.scale(&(eps_prime * s as f64 / steps as f64)));
            for _ in 0..30 {
                let t = apply(&z);
                let resid = evaluate(p, &t)?.symmetrize().sub(&target);
                let rc = sym_coords(&resid);
                if norm(&rc) < 1e-13 * (1.0 + p0.max_abs()) {
                    continue 'cont;
                }
                let jac = full_derivative_jacobian(p, &t)?;
                let step = pinv_tol(&jac, 1e-10).mul_vec(&rc);
                for (zi, si) in z.iter_mut().zip(step) {
                    *zi -= si;
                }
            }
            let t = apply(&z);
            let resid = evaluate(p, &t)?.symmetrize().sub(&target);
            if norm(&sym_coords(&resid)) > 1e-9 {
                ok = false;
                break;
            }
        }
        if ok && norm(&z) < eps {
            let mut t = apply(&z);
            t.v = Some(v.clone());
            let out = boundary_data(p, &t, bp.t)?;
            let mut out = out;
            out.tuple.v = Some(v);
            return Ok(out);
        }
        eps_prime *= 0.25;
    }
    Err(Error::Continuation(format!("no kernel-reducing move of size below {eps:e} found")))
}

/// A ball in `𝕊_n(ℝ^g)`.
#[derive(Clone, Debug)]
pub struct Region {
    pub center: Vec<Mat>,
    pub radius: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub t: f64,
    pub x: Vec<Vec<Vec<f64>>>,
    pub y: Vec<Vec<Vec<f64>>>,
    pub min_eig: f64,
    pub rayleigh: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvexityReport {
    pub seed: u64,
    pub trials: usize,
    pub segments_checked: usize,
    pub interior_samples: usize,
    pub violations: Vec<Witness>,
    pub tol: f64,
    pub note: Option<String>,
}

fn lambda_min_at(p: &FreePoly, a: &[Mat], x: &[Mat]) -> Result<(f64, Vec<f64>, Mat)> {
    let n = a.first().or(x.first()).map_or(1, |m| m.rows());
    let t = Tuple { n, a: a.to_vec(), x: x.to_vec(), e: None, h: None, v: None };
    let m = evaluate(p, &t)?.symmetrize();
    let e = sym_eig(&m)?;
    Ok((e.values[0], e.vectors.col(0), m))
}

fn combine(x: &[Mat], y: &[Mat], s: f64) -> Vec<Mat> {
    x.iter().zip(y).map(|(a, b)| a.scale(&(1.0 - s)).add(&b.scale(&s))).collect()
}

/// Sample pairs in `𝔓_p^A ∩ region` and test `t ∈ {¼, ½, ¾}` along each
/// segment. Samples are pushed toward the boundary along random directions,
/// where non-convexity shows first.
pub fn convexity_sample(p: &FreePoly, a: &[Mat], region: &Region, trials: usize, seed: u64, tol: f64) -> Result<ConvexityReport> {
    let g = region.center.len();
    let n = region.center.first().map_or(1, |m| m.rows());
    let basis = SigmaBasis::new(n, g);
    let dim = basis.dim();
    let mut r = rng(seed);
    let inside = |x: &[Mat]| -> Result<bool> { Ok(lambda_min_at(p, a, x)?.0 > tol) };
    let dist = |x: &[Mat]| -> f64 {
        x.iter().zip(&region.center).map(|(m, c)| m.sub(c).frobenius().powi(2)).sum::<f64>().sqrt()
    };
    let draw = |r: &mut crate::random::Rng64| -> Result<Option<Vec<Mat>>> {
        for _ in 0..64 {
            let dir: Vec<f64> = (0..dim).map(|_| normal(r)).collect();
            let nd = norm(&dir);
            let rad = region.radius * r.random::<f64>().powf(1.0 / dim as f64);
            let off = basis.tuple_from_coords(&dir.iter().map(|x| x * rad / nd).collect::<Vec<_>>());
            let x: Vec<Mat> = region.center.iter().zip(&off).map(|(c, o)| c.add(o)).collect();
            if !inside(&x)? {
                continue;
            }
            // push along a random direction to just inside the boundary
            let d: Vec<f64> = (0..dim).map(|_| normal(r)).collect();
            let ndd = norm(&d);
            let dm = basis.tuple_from_coords(&d.iter().map(|v| v / ndd).collect::<Vec<_>>());
            let along = |s: f64| -> Vec<Mat> { x.iter().zip(&dm).map(|(m, dd)| m.add(&dd.scale(&s))).collect() };
            let smax = 2.0 * region.radius;
            let mut lo = 0.0;
            let mut hi = None;
            for i in 1..=32 {
                let s = smax * i as f64 / 32.0;
                if !inside(&along(s))? {
                    hi = Some(s);
                    break;
                }
                lo = s;
            }
            if let Some(mut hi) = hi {
                for _ in 0..50 {
                    let mid = 0.5 * (lo + hi);
                    if inside(&along(mid))? {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let pushed = along(0.999 * lo);
                if dist(&pushed) <= region.radius && inside(&pushed)? {
                    return Ok(Some(pushed));
                }
            }
            return Ok(Some(x));
        }
        Ok(None)
    };
    let mut violations = Vec::new();
    let mut interior = 0;
    let mut segments = 0;
    for _ in 0..trials {
        let Some(x) = draw(&mut r)? else { continue };
        interior += 1;
        let Some(y) = draw(&mut r)? else { continue };
        interior += 1;
        segments += 1;
        for s in [0.25, 0.5, 0.75] {
            let z = combine(&x, &y, s);
            let (lmin, w, m) = lambda_min_at(p, a, &z)?;
            if lmin < -tol {
                // independent confirmation through the Rayleigh quotient
                let rq: f64 = m.mul_vec(&w).iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / norm(&w).powi(2);
                if rq < -tol {
                    violations.push(Witness {
                        t: s,
                        x: x.iter().map(|m| m.to_rows()).collect(),
                        y: y.iter().map(|m| m.to_rows()).collect(),
                        min_eig: lmin,
                        rayleigh: rq,
                    });
                    break;
                }
            }
        }
    }
    let note = (interior == 0).then(|| "no interior samples".to_string());
    Ok(ConvexityReport { seed, trials, segments_checked: segments, interior_samples: interior, violations, tol, note })
}

/// Per-variable evaluated chips `{w(A, X)v_α : w ∈ ℛ𝒞_p^i, α}`.
pub fn chip_vectors(p: &FreePoly, t: &MatrixTuple) -> Result<Vec<Vec<Vec<f64>>>> {
    let v = t.v.as_ref().ok_or_else(|| Error::Input("a vector v is required".into()))?;
    let chips = crate::chips::right_chip_sets(p);
    let n = t.n;
    let mut out = Vec::new();
    for i in 1..=p.max_index(Kind::X) {
        let mut vecs = Vec::new();
        for w in chips.get(i) {
            let wm = crate::eval::evaluate_word(w, t)?;
            for al in 0..p.kappa() {
                vecs.push(wm.mul_vec(&v[al * n..(al + 1) * n]));
            }
        }
        out.push(vecs);
    }
    Ok(out)
}
