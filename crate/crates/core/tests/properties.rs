mod common;

use common::*;
use proptest::prelude::*;

use ncpoly::border::{Border, BorderParams};
use ncpoly::calculus::{derivative_bundle, derivative_x, hessian_x};
use ncpoly::chips::{chip_annihilator, right_chip_sets, secondary_right_chips};
use ncpoly::eval::{evaluate, Tuple};
use ncpoly::linalg::*;
use ncpoly::matrix::{q, QMat};
use ncpoly::middle::middle_matrix_hessian;
use ncpoly::probe::{border_map, form_matrix, gradient_map, regime_scan, regime_value, default_delta_grid};
use ncpoly::random::*;
use ncpoly::structure::{quasiconvex_certify, sos_extract};
use ncpoly::{Kind, Mat, Word};

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(cfg(48))]

    #[test]
    fn involution_reverses_products(seed in any::<u64>()) {
        let mut r = rng(seed);
        let u = random_word(&mut r, 2, 2, 2, 2);
        let v = random_word(&mut r, 2, 2, 1, 2);
        prop_assert_eq!(u.concat(&v).involution(), v.involution().concat(&u.involution()));
        let p = random_poly(&mut r, 2, 2, 3, 2, 3);
        let s = random_poly(&mut r, 2, 2, 2, 2, 3);
        prop_assert_eq!(p.mul(&s).unwrap().transpose(), s.transpose().mul(&p.transpose()).unwrap());
    }

    #[test]
    fn evaluation_respects_the_involution(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_poly(&mut r, 2, 2, 3, 2, 4);
        let t = random_qtuple(&mut r, 2, 2, 2);
        let m: QMat = evaluate(&p, &t).unwrap();
        prop_assert_eq!(evaluate(&p.transpose(), &t).unwrap(), m.transpose());
        let s = random_symmetric_poly(&mut r, 2, 2, 3, 2, 3);
        let ms: QMat = evaluate(&s, &t).unwrap();
        prop_assert!(ms.is_symmetric_exact());
        let tf = random_tuple(&mut r, 3, 2, 2);
        prop_assert!(evaluate(&s, &tf).unwrap().symmetry_residual() <= 1e-12 * (1.0 + evaluate(&s, &tf).unwrap().max_abs()));
    }

    #[test]
    fn homogeneous_parts_partition_the_polynomial(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_poly(&mut r, 2, 2, 4, 2, 5);
        let mut acc = ncpoly::FreePoly::zero(1, 1);
        for j in 0..=4 {
            let pj = p.homogeneous_part(j);
            prop_assert_eq!(pj.homogeneous_part(j), pj.clone());
            for k in 0..=4 {
                if k != j {
                    prop_assert!(pj.homogeneous_part(k).is_zero());
                }
            }
            acc = acc.add(&pj).unwrap();
        }
        prop_assert_eq!(acc, p);
    }

    #[test]
    fn taylor_expansion_is_exact(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_poly(&mut r, 1, 2, 4, 2, 4);
        let t = rational_point(&mut r, 2, 1, 2);
        let b = derivative_bundle(&p).unwrap();
        let s = q(2);
        let x: Vec<QMat> = t.x.iter().zip(t.h.as_ref().unwrap()).map(|(x, h)| x.add(&h.scale(&s))).collect();
        let shifted = Tuple { n: 2, a: t.a.clone(), x, e: None, h: None, v: None };
        let mut sum = QMat::zeros(2, 2);
        let mut pow = q(1);
        for j in 0..=4 {
            sum.add_assign(&evaluate(&b.order(j), &t).unwrap().scale(&pow));
            pow *= s.clone();
        }
        prop_assert_eq!(evaluate(&p, &shifted).unwrap(), sum);
        for (j, pj) in &b.orders {
            prop_assert_eq!(pj.deg_h(), *j as i64);
            prop_assert!(pj.terms().keys().all(|w| w.count(Kind::H) == *j));
        }
        prop_assert_eq!(hessian_x(&p).unwrap(), b.order(2).scale(&q(2)));
    }

    #[test]
    fn derivative_tails_are_chips(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_poly(&mut r, 2, 2, 4, 2, 4);
        let chips = right_chip_sets(&p);
        for w in derivative_x(&p).unwrap().terms().keys() {
            let pos = w.positions(Kind::H)[0];
            let j = w.letters()[pos].idx();
            prop_assert!(chips.per_variable[&j].contains(&w.slice(pos + 1, w.len())));
        }
        // every x-containing term is u x_j v with v a chip of x_j (first x)
        for w in p.terms().keys() {
            if let Some(&pos) = w.positions(Kind::X).first() {
                let j = w.letters()[pos].idx();
                prop_assert!(chips.per_variable[&j].contains(&w.slice(pos + 1, w.len())));
            }
        }
    }

    #[test]
    fn annihilator_shrinks_as_points_are_added(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_symmetric_poly(&mut r, 1, 2, 3, 1, 3);
        let mut pts = Vec::new();
        let mut last = usize::MAX;
        for _ in 0..4 {
            let mut t = random_tuple(&mut r, 2, 1, 2);
            t.v = Some(random_vector(&mut r, 2));
            pts.push(t);
            let d = chip_annihilator(&p, &pts).unwrap().cols();
            prop_assert!(d <= last);
            last = d;
        }
    }

    #[test]
    fn middle_matrices_reconstruct_exactly(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_symmetric_poly(&mut r, 2, 2, 4, 2, 3);
        let z = middle_matrix_hessian(&p, &Border::reduced(&p)).unwrap();
        prop_assert_eq!(z.reconstruct().unwrap(), hessian_x(&p).unwrap());
        prop_assert!(z.matrix.is_symmetric());
    }

    #[test]
    fn inertia_agrees_across_border_flavors(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_symmetric_poly(&mut r, 1, 2, 3, 1, 3);
        let t = random_tuple(&mut r, 2, 1, 2);
        let full = middle_matrix_hessian(&p, &Border::full(BorderParams::of(&p)).unwrap()).unwrap().matrix.evaluate(&t).unwrap();
        let red = middle_matrix_hessian(&p, &Border::reduced(&p)).unwrap().matrix.evaluate(&t).unwrap();
        let (a, b) = (inertia_rel(&full, 1e-9).unwrap(), inertia_rel(&red, 1e-9).unwrap());
        prop_assert_eq!((a.mu_plus, a.mu_minus), (b.mu_plus, b.mu_minus));
    }

    #[test]
    fn full_border_zero_columns_match_secondary_chips(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_symmetric_poly(&mut r, 1, 2, 3, 1, 3);
        let b = Border::full(BorderParams::of(&p)).unwrap();
        let z = middle_matrix_hessian(&p, &b).unwrap().matrix;
        let sec = secondary_right_chips(&p);
        for (c, e) in b.entries().iter().enumerate() {
            let nonzero = (0..b.len()).any(|row| z.get(row, c).is_some());
            let in_sec = sec.get(&e.k).is_some_and(|s| s.contains(&e.f));
            prop_assert_eq!(nonzero, in_sec, "entry {}", e);
        }
    }

    #[test]
    fn sos_round_trip_and_constant_r(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_symmetric_poly(&mut r, 2, 2, 2, 2, 4);
        let c = sos_extract(&p).unwrap();
        prop_assert!(c.exact);
        prop_assert_eq!(c.reconstruct().unwrap(), p.clone());
        // without a-letters between two x's, R does not depend on a
        let no_inner = p.part_of_degree(Kind::X, 2).terms().keys().all(|w| {
            let xs = w.positions(Kind::X);
            xs.len() < 2 || xs[1] == xs[0] + 1
        });
        if no_inner {
            prop_assert!(c.r_is_constant());
        }
    }
}

proptest! {
    #![proptest_config(cfg(32))]

    #[test]
    fn quasiconvex_squares_are_psd(seed in any::<u64>()) {
        let mut r = rng(seed);
        // f = x-linear part + Σ_j c_j (row_j)ᵀ(row_j) with rows in x₁, x₂
        let m = random_int_matrix(&mut r, 2, 2, 3);
        let gram = m.transpose().mul(&m);
        let mut terms: Vec<(i64, String)> = Vec::new();
        for i in 0..2 {
            for j in 0..2 {
                let c: i64 = gram.get(i, j).to_integer().to_string().parse().unwrap();
                if c != 0 {
                    terms.push((c, format!("x{} x{}", i + 1, j + 1)));
                }
            }
        }
        terms.push((1, "x1".into()));
        let refs: Vec<(i64, &str)> = terms.iter().map(|(c, w)| (*c, w.as_str())).collect();
        let f = ncpoly::poly::scalar_poly(&refs);
        let res = quasiconvex_certify(&f).unwrap();
        let cert = res.certificate.clone();
        prop_assert!(cert.is_some(), "{:?}", res.refusal);
        let cert = cert.unwrap();
        prop_assert!(cert.exact);
        let quad = f.sub(&cert.ell).unwrap();
        for _ in 0..5 {
            let t = random_tuple(&mut r, 3, 0, 2);
            prop_assert!(min_eigenvalue(&evaluate(&quad, &t).unwrap()).unwrap() >= -1e-9);
        }
    }

    #[test]
    fn inertia_is_invariant_under_congruence(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = 5;
        let m = random_symmetric(&mut r, n);
        let mut s = random_matrix(&mut r, n, n).scale(&0.3);
        for i in 0..n {
            s.set(i, i, s.get(i, i) + 1.5);
        }
        let sv = svd(&s);
        prop_assume!(sv.s[0] / sv.s[n - 1] < 1e3);
        let a = inertia_rel(&m, 1e-9).unwrap();
        let b = inertia_rel(&s.transpose().mul(&m).mul(&s), 1e-9).unwrap();
        prop_assert_eq!((a.mu_plus, a.mu_minus, a.mu_zero), (b.mu_plus, b.mu_minus, b.mu_zero));
    }

    #[test]
    fn eigen_and_pseudoinverse_contracts(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = random_symmetric(&mut r, 6);
        let e = sym_eig(&m).unwrap();
        let lam = Mat::diag(&e.values);
        prop_assert!(m.mul(&e.vectors).sub(&e.vectors.mul(&lam)).frobenius() <= 1e-9 * (1.0 + m.frobenius()));
        prop_assert!(is_orthogonal(&e.vectors, 1e-10));
        let a = random_matrix(&mut r, 5, 3).mul(&random_matrix(&mut r, 3, 4));
        let p = pinv(&a);
        prop_assert!(a.mul(&p).mul(&a).sub(&a).max_abs() < 1e-9);
        prop_assert!(p.mul(&a).mul(&p).sub(&p).max_abs() < 1e-9);
        prop_assert!(a.mul(&p).symmetry_residual() < 1e-9);
        prop_assert!(p.mul(&a).symmetry_residual() < 1e-9);
        let pr = projection_onto_range(&a);
        prop_assert!(pr.mul(&pr).sub(&pr).max_abs() < 1e-9 && pr.symmetry_residual() < 1e-9);
    }

    #[test]
    fn range_inclusion_both_ways_iff_equal_spans(seed in any::<u64>()) {
        let mut r = rng(seed);
        let w = random_matrix(&mut r, 5, 3);
        let u = w.mul(&random_matrix(&mut r, 3, 3));
        prop_assert!(range_included(&u, &w, 1e-8).unwrap() && range_included(&w, &u, 1e-8).unwrap());
        let v = random_matrix(&mut r, 5, 1);
        let wv = Mat::hstack(&[&w, &v]);
        prop_assert!(range_included(&w, &wv, 1e-8).unwrap());
        prop_assert!(!range_included(&wv, &w, 1e-8).unwrap());
    }

    #[test]
    fn relaxed_scan_reproduces_compression(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = 6;
        let e = random_symmetric(&mut r, n);
        let b = random_matrix(&mut r, n, 2);
        let f = b.mul(&b.transpose());
        let pts = regime_scan(&e, &f, &Mat::identity(n), &default_delta_grid(), 1e-9).unwrap();
        let kf = nullspace(&f, 1e-10);
        let comp = kf.transpose().mul(&e).mul(&kf);
        let expected = inertia(&comp, 1e-9).unwrap().mu_plus;
        prop_assert_eq!(regime_value(&pts).unwrap().mu_plus, expected);
    }

    #[test]
    fn border_kernel_kills_both_forms(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = ncpoly::parse::parse_poly("x1 a1 x1 + 2 x1 x1 + x1").unwrap();
        let n = 6;
        let mut t = random_tuple(&mut r, n, 1, 1);
        t.v = Some(random_vector(&mut r, n));
        let border = Border::reduced_extended(&p);
        let psi = border_map(&border, 1, &t).unwrap();
        let ker = nullspace(&psi, 1e-10);
        prop_assert!(ker.cols() > 0);
        let fm = form_matrix(&p, &t, &border, 0.0, 0.0).unwrap();
        let g = gradient_map(&p, &t).unwrap();
        for c in 0..ker.cols() {
            let x = ker.col(c);
            prop_assert!(norm(&g.mul_vec(&x)) < 1e-9);
            prop_assert!(norm(&fm.hessian.mul_vec(&x)) < 1e-9);
        }
        prop_assert!(fm.hessian.symmetry_residual() < 1e-10);
        let _ = Word::empty();
    }
}
