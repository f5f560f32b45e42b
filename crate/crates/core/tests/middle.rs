mod common;

use common::*;
use ncpoly::border::{Border, BorderEntry, Flavor};
use ncpoly::calculus::{derivative_x, hessian_x};
use ncpoly::eval::evaluate;
use ncpoly::matrix::{q, QMat};
use ncpoly::middle::{middle_matrix_hessian, modified_middle_matrix, phi_decomposition, phi_row, PolyMatrix};
use ncpoly::parse::parse_poly;
use ncpoly::random::{random_poly, random_symmetric_poly, rng};
use ncpoly::{Error, FreePoly, Word};

fn pm(rows: &[&[&str]]) -> PolyMatrix {
    let mut m = PolyMatrix::zeros(rows.len(), rows[0].len(), (1, 1));
    for (i, row) in rows.iter().enumerate() {
        for (j, s) in row.iter().enumerate() {
            if *s != "0" {
                m.set(i, j, parse_poly(s).unwrap()).unwrap();
            }
        }
    }
    m
}

fn border_of(words: &[&str]) -> Vec<String> {
    words.iter().map(|s| s.to_string()).collect()
}

#[test]
fn golden_reduced_middle_matrix_two_variables() {
    let p = parse_poly("x2 x2 a1 x1 + x1 a1 x2 x2 + a1 a1").unwrap();
    let b = Border::reduced(&p);
    assert_eq!(b.to_strings(), border_of(&["h1", "h2", "h2 x2", "h2 a1 x1"]));
    let z = middle_matrix_hessian(&p, &b).unwrap();
    let expected = pm(&[
        &["0", "a1 x2", "a1", "0"],
        &["x2 a1", "0", "0", "1"],
        &["a1", "0", "0", "0"],
        &["0", "1", "0", "0"],
    ])
    .scale(&q(2));
    assert_eq!(z.matrix, expected);
}

#[test]
fn golden_hessian_middle_matrix_with_distinct_coefficients() {
    for (c, d) in [(2i64, 3i64), (2, 2)] {
        let p = parse_poly(&format!("{c} a1 x1 a2 x2 x2 + {d} x2 x2 a2 x1 a1")).unwrap();
        let b = Border::reduced(&p);
        assert_eq!(b.to_strings(), border_of(&["h2", "h1 a1", "h2 x2", "h2 a2 x1 a1"]));
        let z = middle_matrix_hessian(&p, &b).unwrap().matrix;
        let (c2, d2) = (2 * c, 2 * d);
        let expected = pm(&[
            &["0", &format!("{d2} x2 a2"), "0", &format!("{d2}")],
            &[&format!("{c2} a2 x2"), "0", &format!("{c2} a2"), "0"],
            &["0", &format!("{d2} a2"), "0", "0"],
            &[&format!("{c2}"), "0", "0", "0"],
        ]);
        assert_eq!(z, expected);
        assert_eq!(z.is_symmetric(), c == d);
        assert_eq!(p.is_symmetric(), c == d);
    }
}

#[test]
fn golden_phi_row() {
    let p = parse_poly("2 a1 x1 a2 x2 x2 + 3 x2 x2 a2 x1 a1").unwrap();
    let b = Border::reduced_extended(&p);
    assert_eq!(
        b.to_strings(),
        border_of(&["h2", "h1 a1", "h2 x2", "h2 a2 x1 a1", "h1 a2 x2 x2", "h2 x2 a2 x1 a1"])
    );
    let phi = phi_row(&p, &b).unwrap();
    let expected = pm(&[&["2 a1 x1 a2 x2", "3 x2 x2 a2", "2 a1 x1 a2", "3 x2", "2 a1", "3"]]);
    assert_eq!(phi, expected);
}

/// `(I ⊗ V[H])ᵀ Z (I ⊗ V[H])` evaluated through the border monomials.
fn sandwich(z: &PolyMatrix, b: &Border, kappa: usize, t: &ncpoly::eval::QTuple) -> QMat {
    let monos = b.monomials(kappa);
    let vs: Vec<QMat> = monos.iter().map(|m| evaluate(m, t).unwrap()).collect();
    let refs: Vec<&QMat> = vs.iter().collect();
    let v = QMat::vstack(&refs);
    let zm: QMat = z.evaluate(t).unwrap();
    v.transpose().mul(&zm).mul(&v)
}

#[test]
fn middle_matrix_reproduces_hessian_on_every_flavor() {
    let mut r = rng(201);
    for trial in 0..12 {
        let p = if trial % 2 == 0 { random_symmetric_poly(&mut r, 1, 2, 4, 1, 3) } else { random_poly(&mut r, 1, 2, 3, 1, 3) };
        let t = rational_point(&mut r, 2, 1, 2);
        let oracle = pxx_oracle(&p, &t);
        for flavor in [Flavor::Full, Flavor::Reduced] {
            let b = Border::build(flavor, &p).unwrap();
            let z = middle_matrix_hessian(&p, &b).unwrap();
            assert_eq!(sandwich(&z.matrix, &b, 1, &t), oracle, "{flavor:?} for {p}");
            assert_eq!(z.reconstruct().unwrap(), hessian_x(&p).unwrap());
        }
    }
}

#[test]
fn phi_reproduces_first_derivative() {
    let mut r = rng(202);
    for _ in 0..12 {
        let p = random_symmetric_poly(&mut r, 2, 2, 4, 1, 3);
        let t = rational_point(&mut r, 2, 2, 2);
        let b = Border::reduced_extended(&p);
        let phi: QMat = phi_row(&p, &b).unwrap().evaluate(&t).unwrap();
        let vs: Vec<QMat> = b.monomials(1).iter().map(|m| evaluate(m, &t).unwrap()).collect();
        let refs: Vec<&QMat> = vs.iter().collect();
        assert_eq!(phi.mul(&QMat::vstack(&refs)), px_oracle(&p, &t), "{p}");
        assert_eq!(evaluate(&derivative_x(&p).unwrap(), &t).unwrap(), px_oracle(&p, &t));
    }
}

#[test]
fn modified_middle_matrix_adds_phi_gram() {
    let p = parse_poly("a1 x1 x1 a1 + x1 a1 x1 + x1").unwrap();
    let b = Border::reduced_extended(&p);
    let lam = q(3);
    let zl = modified_middle_matrix(&p, &b, &lam).unwrap();
    let z = middle_matrix_hessian(&p, &b).unwrap().matrix;
    let phi = phi_row(&p, &b).unwrap();
    assert_eq!(zl.sub(&z).unwrap(), phi.transpose().mul(&phi).unwrap().scale(&lam));
    assert!(zl.is_symmetric());
}

#[test]
fn matrix_coefficients_follow_kronecker_layout() {
    let c = qm(&[&[1, 2], &[2, 5]]);
    let p = FreePoly::monomial(Word::parse("x1 a1 x1").unwrap(), c.clone());
    let b = Border::reduced(&p);
    let z = middle_matrix_hessian(&p, &b).unwrap();
    assert_eq!(z.matrix.entry_shape(), (2, 2));
    let mut r = rng(203);
    let t = rational_point(&mut r, 2, 1, 1);
    assert_eq!(sandwich(&z.matrix, &b, 2, &t), pxx_oracle(&p, &t));
}

#[test]
fn uncovered_border_is_reported() {
    let p = parse_poly("x1 a1 x1 x1 + x1 x1 a1 x1").unwrap();
    let b = Border::custom([BorderEntry::new(1, Word::empty())]);
    match middle_matrix_hessian(&p, &b) {
        Err(Error::UncoveredChip(_)) => {}
        other => panic!("expected an uncovered chip, got {other:?}"),
    }
}

#[test]
fn phi_decomposition_reconstructs() {
    let mut r = rng(204);
    for _ in 0..20 {
        let p = random_poly(&mut r, 2, 2, 4, 2, 5);
        let dec = phi_decomposition(&p);
        assert_eq!(dec.reconstruct().unwrap(), p);
        for deg in dec.degrees.values() {
            for f in &deg.tails {
                assert!(f.is_empty() || f.letters()[0].kind == ncpoly::Kind::X);
            }
        }
    }
}

#[test]
fn full_border_sizes_follow_block_formula() {
    use ncpoly::border::BorderParams;
    let params = BorderParams { d: 4, dtilde: 1, g: 2, ga: 1 };
    let b = Border::full(params).unwrap();
    // k_b = 2, block j has (k_b g)^{j+1} entries
    assert_eq!(b.block_sizes(), vec![4, 16, 64]);
    assert_eq!(params.block_size(2), 64);
    let huge = BorderParams { d: 12, dtilde: 3, g: 3, ga: 3 };
    assert!(matches!(Border::full(huge), Err(Error::SizeGuard(_, _))));
}
