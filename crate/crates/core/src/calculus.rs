//! Directional derivatives from the expansion `p(a, x + th) = Σ_j p_j t^j`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::eval::{evaluate_with, MatrixTuple};
use crate::matrix::{q, Mat, QMat};
use crate::poly::FreePoly;
use crate::word::{Kind, Word};

/// The coefficients `p_j(a, x)[0, h]` of `t^j` in `p(a, x + th)`.
#[derive(Clone, Debug)]
pub struct DerivativeBundle {
    pub source: FreePoly,
    pub orders: BTreeMap<usize, FreePoly>,
}

impl DerivativeBundle {
    pub fn order(&self, j: usize) -> FreePoly {
        self.orders
            .get(&j)
            .cloned()
            .unwrap_or_else(|| FreePoly::zero(self.source.kappa(), self.source.kappa_p()))
    }
}

fn require_no_directions(p: &FreePoly) -> Result<()> {
    if p.uses(Kind::H) || p.uses(Kind::E) {
        return Err(Error::Input("polynomial already contains direction letters".into()));
    }
    Ok(())
}

/// Visit every subset of `items`, in increasing bitmask order.
fn for_each_subset(items: &[usize], mut f: impl FnMut(&[usize])) {
    let m = items.len();
    let mut buf = Vec::with_capacity(m);
    for mask in 0u64..(1u64 << m) {
        buf.clear();
        for (i, &it) in items.iter().enumerate() {
            if mask >> i & 1 == 1 {
                buf.push(it);
            }
        }
        f(&buf);
    }
}

/// Expand `p(a, x + th)` by substituting `x → h` on every subset of
/// x-positions of every term.
pub fn derivative_bundle(p: &FreePoly) -> Result<DerivativeBundle> {
    require_no_directions(p)?;
    let mut parts: BTreeMap<usize, Vec<(Word, QMat)>> = BTreeMap::new();
    for (w, c) in p.terms() {
        let xs = w.positions(Kind::X);
        if xs.len() > 40 {
            return Err(Error::Input(format!("term `{w}` has too many x letters to expand")));
        }
        for_each_subset(&xs, |sub| {
            let nw = FreePoly::substitute_positions(w, sub, Kind::H);
            parts.entry(sub.len()).or_default().push((nw, c.clone()));
        });
    }
    let mut orders = BTreeMap::new();
    for (j, terms) in parts {
        let pj = FreePoly::from_terms(p.kappa(), p.kappa_p(), terms)?;
        if !pj.is_zero() {
            orders.insert(j, pj);
        }
    }
    Ok(DerivativeBundle { source: p.clone(), orders })
}

fn single_substitutions(p: &FreePoly, kinds: &[Kind]) -> Result<FreePoly> {
    require_no_directions(p)?;
    let mut terms = Vec::new();
    for (w, c) in p.terms() {
        for (pos, g) in w.letters().iter().enumerate() {
            let target = match g.kind {
                Kind::X if kinds.contains(&Kind::X) => Kind::H,
                Kind::A if kinds.contains(&Kind::A) => Kind::E,
                _ => continue,
            };
            terms.push((w.replaced(pos, g.with_kind(target)), c.clone()));
        }
    }
    FreePoly::from_terms(p.kappa(), p.kappa_p(), terms)
}

/// `p_x(a, x)[0, h]`: one x-position at a time replaced by its h.
pub fn derivative_x(p: &FreePoly) -> Result<FreePoly> {
    single_substitutions(p, &[Kind::X])
}

/// `p_xx(a, x)[0, h] = 2 p₂(a, x)[0, h]`.
pub fn hessian_x(p: &FreePoly) -> Result<FreePoly> {
    require_no_directions(p)?;
    let mut terms = Vec::new();
    let two = q(2);
    for (w, c) in p.terms() {
        let xs = w.positions(Kind::X);
        for i in 0..xs.len() {
            for j in i + 1..xs.len() {
                terms.push((FreePoly::substitute_positions(w, &[xs[i], xs[j]], Kind::H), c.scale(&two)));
            }
        }
    }
    FreePoly::from_terms(p.kappa(), p.kappa_p(), terms)
}

/// Full directional derivative `p′(a, x)[e, h]`.
pub fn derivative_full(p: &FreePoly) -> Result<FreePoly> {
    single_substitutions(p, &[Kind::A, Kind::X])
}

/// The symmetric bilinear Hessian `B(H, K)` at `(A, X)`, with `H` taken from
/// the tuple. `B(H, H)` equals `p_xx(A, X)[0, H]`.
pub fn hessian_bilinear(p: &FreePoly, t: &MatrixTuple, k: &[Mat]) -> Result<Mat> {
    let h: &[Mat] = t.h.as_deref().ok_or(Error::MissingDirection("H"))?;
    if k.len() != h.len() {
        return Err(Error::Shape(format!("{} K directions for {} H directions", k.len(), h.len())));
    }
    let (kap, kapp) = p.shape();
    let mut out = Mat::zeros(kap * t.n, kapp * t.n);
    for (w, c) in p.terms() {
        let xs = w.positions(Kind::X);
        let single = FreePoly::monomial(w.clone(), c.clone());
        for i in 0..xs.len() {
            for j in i + 1..xs.len() {
                let (pi, pj) = (xs[i], xs[j]);
                for (first, second) in [(h, k), (k, h)] {
                    let m = evaluate_with(&single, t.n, &|pos, g| {
                        if pos == pi {
                            Ok(&first[g.idx() - 1])
                        } else if pos == pj {
                            Ok(&second[g.idx() - 1])
                        } else {
                            t.letter(g)
                        }
                    })?;
                    out.add_assign(&m);
                }
            }
        }
    }
    Ok(out)
}
