//! Acceptance suite: ten end-to-end criteria, each reported as one PASS/FAIL
//! line with its elapsed time against its runtime budget.

use std::time::{Duration, Instant};

use ncpoly::border::{Border, BorderParams};
use ncpoly::eval::{evaluate, faithful_point, Tuple};
use ncpoly::kly::{congruence, congruence_check_exact, congruence_symbolic, kly_identities};
use ncpoly::linalg::{inertia, min_eigenvalue};
use ncpoly::middle::{middle_matrix_hessian, modified_and_relaxed, PolyMatrix};
use ncpoly::parse::parse_poly;
use ncpoly::probe::{
    boundary_data, chsy_dim, convexity_sample, default_delta_grid, form_matrix, form_matrix_dual, form_tol, regime_scan,
    regime_value, second_fundamental_form, tangent_normal_intersection, v_lift, Region, SigmaBasis,
};
use ncpoly::random::{random_poly, random_qtuple, random_symmetric_poly, random_tuple, random_vector, rng};
use ncpoly::structure::{majorize_at, sos_extract};
use ncpoly::{Error, FreePoly, Mat};

type Outcome = Result<String, String>;

struct Line {
    id: usize,
    name: &'static str,
    passed: bool,
    elapsed: Duration,
    budget: Duration,
    detail: String,
}

fn run(id: usize, name: &'static str, budget_secs: u64, f: impl FnOnce() -> Outcome) -> Line {
    let start = Instant::now();
    let out = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f))
        .unwrap_or_else(|_| Err("panicked".to_string()));
    let elapsed = start.elapsed();
    let budget = Duration::from_secs(budget_secs);
    let (mut passed, mut detail) = match out {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    if elapsed > budget {
        passed = false;
        detail = format!("{detail}; over the runtime budget");
    }
    let line = Line { id, name, passed, elapsed, budget, detail };
    println!(
        "{} criterion {:>2} {:<34} {:>9.3} s (budget {:>3} s)  {}",
        if line.passed { "PASS" } else { "FAIL" },
        line.id,
        line.name,
        line.elapsed.as_secs_f64(),
        line.budget.as_secs(),
        line.detail
    );
    line
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

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

fn strings(ws: &[&str]) -> Vec<String> {
    ws.iter().map(|s| s.to_string()).collect()
}

fn golden_middle_matrix() -> Outcome {
    let p = parse_poly("x2 x2 a1 x1 + x1 a1 x2 x2 + a1 a1").map_err(|e| e.to_string())?;
    let b = Border::reduced(&p);
    ensure(b.to_strings() == strings(&["h1", "h2", "h2 x2", "h2 a1 x1"]), || format!("border {:?}", b.to_strings()))?;
    let z = middle_matrix_hessian(&p, &b).map_err(|e| e.to_string())?.matrix;
    let expected = pm(&[
        &["0", "2 a1 x2", "2 a1", "0"],
        &["2 x2 a1", "0", "0", "2"],
        &["2 a1", "0", "0", "0"],
        &["0", "2", "0", "0"],
    ]);
    ensure(z == expected, || format!("middle matrix differs:\n{}", z.to_text()))?;
    Ok("4 × 4 middle matrix matches entry by entry".into())
}

fn hermitian_pattern() -> Outcome {
    for (c, d) in [(2i64, 3i64), (2, 2)] {
        let p = parse_poly(&format!("{c} a1 x1 a2 x2 x2 + {d} x2 x2 a2 x1 a1")).map_err(|e| e.to_string())?;
        let b = Border::reduced(&p);
        ensure(b.to_strings() == strings(&["h2", "h1 a1", "h2 x2", "h2 a2 x1 a1"]), || format!("border {:?}", b.to_strings()))?;
        let z = middle_matrix_hessian(&p, &b).map_err(|e| e.to_string())?.matrix;
        let (c2, d2) = (2 * c, 2 * d);
        let expected = pm(&[
            &["0", &format!("{d2} x2 a2"), "0", &format!("{d2}")],
            &[&format!("{c2} a2 x2"), "0", &format!("{c2} a2"), "0"],
            &["0", &format!("{d2} a2"), "0", "0"],
            &[&format!("{c2}"), "0", "0", "0"],
        ]);
        ensure(z == expected, || format!("(c, d) = ({c}, {d}) pattern differs"))?;
        ensure(z.is_symmetric() == (c == d), || format!("(c, d) = ({c}, {d}) symmetry is wrong"))?;
    }
    Ok("pattern matches; symmetric only for c = d".into())
}

fn kly_grid() -> Outcome {
    let (mut checked, mut skipped) = (0, Vec::new());
    for d in 2..=4 {
        for dtilde in 1..=2 {
            for g in 1..=2 {
                for ga in 1..=2 {
                    let params = BorderParams { d, dtilde, g, ga };
                    match kly_identities(params) {
                        Ok(rep) => {
                            ensure(rep.lk_is_identity && rep.y_squared_is_k, || format!("identities fail at {params:?}"))?;
                            checked += 1;
                        }
                        Err(Error::SizeGuard(n, _)) => skipped.push(format!("({d},{dtilde},{g},{ga}) border {n}")),
                        Err(e) => return Err(format!("{params:?}: {e}")),
                    }
                }
            }
        }
    }
    let skip = if skipped.is_empty() { String::new() } else { format!("; skipped by size guard: {}", skipped.join(", ")) };
    Ok(format!("L·K = I and Y² = K exactly on {checked} parameter sets{skip}"))
}

fn congruence_random() -> Outcome {
    let mut r = rng(11);
    let mut worst = 0.0f64;
    for i in 0..5 {
        let d = 2 + i % 3;
        let p = random_symmetric_poly(&mut r, 2, 2, d, 2, 3);
        let s = congruence_symbolic(&p).map_err(|e| e.to_string())?;
        ensure(s.inverse_root_form && s.root_form, || format!("symbolic congruence fails for {p}"))?;
        for _ in 0..10 {
            let t = random_qtuple(&mut r, 2, 2, 2);
            let (a, b) = congruence_check_exact(&p, &t).map_err(|e| e.to_string())?;
            ensure(a && b, || format!("exact congruence fails for {p}"))?;
        }
        let c = congruence(&p).map_err(|e| e.to_string())?;
        for k in 0..100 {
            let n = 2 + k % 3;
            let t = random_tuple(&mut r, n, 2, 2);
            let z = c.middle.matrix.evaluate(&t).map_err(|e| e.to_string())?;
            let z0 = c.z0.evaluate(&t).map_err(|e| e.to_string())?;
            let y = c.y.evaluate(&t).map_err(|e| e.to_string())?;
            let yi = c.y_inv.evaluate(&t).map_err(|e| e.to_string())?;
            let r1 = z.sub(&yi.transpose().mul(&z0).mul(&yi)).frobenius();
            let r2 = y.transpose().mul(&z).mul(&y).sub(&z0).frobenius();
            worst = worst.max(r1).max(r2);
        }
    }
    ensure(worst <= 1e-9, || format!("worst Frobenius residual {worst:.3e}"))?;
    Ok(format!("exact at 50 rational points; worst residual {worst:.2e} over 500 float points"))
}

fn chsy_grid() -> Outcome {
    let mut r = rng(5);
    let mut count = 0;
    for n in 1..=8 {
        for k in 1..=n.min(6) {
            for _ in 0..5 {
                let us: Vec<Vec<f64>> = (0..k).map(|_| random_vector(&mut r, n)).collect();
                let rep = chsy_dim(&us).map_err(|e| e.to_string())?;
                ensure(rep.matches, || format!("k = {k}, n = {n}: dim {} vs {}", rep.dim, rep.formula))?;
                count += 1;
            }
        }
    }
    Ok(format!("dim = kn − k(k−1)/2 on all {count} sets"))
}

fn two_variable_example() -> Outcome {
    let p = parse_poly("a1 x1 a2 x2 x2 + x2 x2 a2 x1 a1").map_err(|e| e.to_string())?;
    let border = Border::reduced_extended(&p);
    for n in 2..=4 {
        let i = Mat::identity(n);
        let mut v = vec![0.0; n];
        v[0] = 1.0;
        let t = Tuple::new(n, vec![i.clone(), i.clone()], vec![i.clone(), i.clone()])
            .and_then(|t| t.with_v(v.clone()))
            .map_err(|e| e.to_string())?;
        // (a) the restricted relaxed form
        for (lam, del) in [(-1.0, -0.1), (1.0, 0.5)] {
            let fm = form_matrix(&p, &t, &border, lam, del).map_err(|e| e.to_string())?;
            let got = fm.restrict(&v_lift(&t).map_err(|e| e.to_string())?);
            let blk = |s: f64| Mat::identity(n).scale(&(2.0 * s));
            let mut target = Mat::zeros(2 * n, 2 * n);
            target.set_block(0, 0, &blk(2.0 * lam + del));
            target.set_block(0, n, &blk(2.0 + 4.0 * lam));
            target.set_block(n, 0, &blk(2.0 + 4.0 * lam));
            target.set_block(n, n, &blk(2.0 + 8.0 * lam + 2.0 * del));
            let err = got.sub(&target).max_abs();
            ensure(err < 1e-10, || format!("n = {n}: restricted form off by {err:.2e}"))?;
            let rel = modified_and_relaxed(&p, &border, lam, del, &t).map_err(|e| e.to_string())?;
            let dual = form_matrix_dual(&fm, &rel.z_lambda_delta).sub(&fm.g).max_abs();
            ensure(dual < 1e-10, || format!("n = {n}: dual route differs by {dual:.2e}"))?;
        }
        // (b) signatures in the two regimes
        let fm = form_matrix(&p, &t, &border, -1.0, -0.1).map_err(|e| e.to_string())?;
        let neg = fm.signature(None).map_err(|e| e.to_string())?;
        ensure(neg.mu_plus == 0, || format!("n = {n}: e₊ = {} at (−1, −0.1)", neg.mu_plus))?;
        let pos = fm.with_params(1.0, 0.5).signature(None).map_err(|e| e.to_string())?;
        ensure(pos.mu_minus == n, || format!("n = {n}: e₋ = {} at (1, 0.5)", pos.mu_minus))?;
        // (c) tangent-normal slice H₂ = −½H₁
        let slice = tangent_normal_intersection(&p, &t).map_err(|e| e.to_string())?;
        ensure(slice.cols() == n, || format!("n = {n}: slice dimension {}", slice.cols()))?;
        let basis = SigmaBasis::new(n, 2);
        for c in 0..slice.cols() {
            let h = basis.tuple_from_coords(&slice.col(c));
            ensure(h[1].add(&h[0].scale(&0.5)).max_abs() < 1e-10, || format!("n = {n}: slice is not H₂ = −½H₁"))?;
        }
        // (d) negative definite second fundamental form
        let bp = boundary_data(&p, &t, 1.0).map_err(|e| e.to_string())?;
        let sff = second_fundamental_form(&p, &bp).map_err(|e| e.to_string())?;
        ensure(sff.inertia.mu_plus == 0 && sff.inertia.mu_minus == n, || format!("n = {n}: form inertia {:?}", sff.inertia))?;
    }
    Ok("(a) to (d) hold for n = 2, 3, 4".into())
}

fn majorization_and_scan() -> Outcome {
    let mut r = rng(3);
    let mut notes = Vec::new();
    for (k, d) in [(1usize, 2usize), (2, 2), (2, 3)] {
        let xk = vec!["x1"; k].join(" ");
        let xd = vec!["x1"; d].join(" ");
        let p = parse_poly(&format!("2 a1 + a1 {xk} + {xk} a1 + {xd}")).map_err(|e| e.to_string())?;
        let mid = middle_matrix_hessian(&p, &Border::reduced(&p)).map_err(|e| e.to_string())?;
        let be = Border::reduced_extended(&p);
        let mut mus = Vec::new();
        for _ in 0..20 {
            let t = random_tuple(&mut r, 4, 1, 1);
            let mj = majorize_at(&p, &t, 1e-9).map_err(|e| e.to_string())?;
            ensure(mj.holds, || format!("(k, d) = ({k}, {d}): majorization fails"))?;
            let z0 = mid.matrix.at_x_zero().evaluate(&t.at_x_zero()).map_err(|e| e.to_string())?;
            let mu0 = inertia(&z0, form_tol(&z0)).map_err(|e| e.to_string())?.mu_plus;
            let rel = modified_and_relaxed(&p, &be, 0.0, 0.0, &t).map_err(|e| e.to_string())?;
            let f = rel.phi.transpose().mul(&rel.phi);
            let tol = 1e-9 * (1.0 + rel.z.max_abs());
            let scan = regime_scan(&rel.z, &f, &Mat::identity(rel.z.rows()), &default_delta_grid(), tol)
                .map_err(|e| e.to_string())?;
            ensure(scan.iter().all(|s| s.stable), || format!("(k, d) = ({k}, {d}): scan did not stabilize"))?;
            let scanned = regime_value(&scan).ok_or("empty scan")?.mu_plus;
            ensure(scanned == mu0, || format!("(k, d) = ({k}, {d}): scanned μ₊ = {scanned}, μ₊(ℨ(A,0)) = {mu0}"))?;
            mus.push(mu0);
        }
        mus.dedup();
        notes.push(format!("({k},{d}): μ₊ {mus:?}"));
    }
    Ok(format!("majorizes at 20 points each; {}", notes.join(", ")))
}

fn sos_round_trip() -> Outcome {
    let mut r = rng(8);
    for _ in 0..100 {
        let ell = random_symmetric_poly(&mut r, 2, 2, 1, 2, 3);
        let mut p = ell;
        let m = r_choice(&mut r);
        for _ in 0..m {
            let s = random_poly(&mut r, 2, 2, 1, 1, 2);
            p = p.sub(&s.transpose().mul(&s).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        }
        let cert = sos_extract(&p).map_err(|e| format!("{p}: {e}"))?;
        ensure(cert.exact, || format!("{p}: inexact certificate"))?;
        ensure(cert.reconstruct().map_err(|e| e.to_string())? == p, || format!("{p}: reconstruction differs"))?;
    }
    for _ in 0..100 {
        let p = random_symmetric_poly(&mut r, 2, 2, 3, 1, 3);
        ensure(matches!(sos_extract(&p), Err(Error::DegreeTooHigh { .. })), || format!("{p}: cubic was not refused"))?;
    }
    Ok("100 exact reconstructions; 100 cubics refused".into())
}

fn r_choice(r: &mut ncpoly::random::Rng64) -> usize {
    use rand::Rng;
    r.random_range(1..=3)
}

fn faithfulness() -> Outcome {
    let mut r = rng(9);
    let mut count = 0;
    while count < 100 {
        let ga = 1 + count % 2;
        let dtilde = 1 + count % 3;
        let p = random_poly(&mut r, ga, 0, 0, dtilde, 1 + count % 4);
        if p.is_zero() {
            continue;
        }
        let t = faithful_point(ga, dtilde);
        let val = evaluate(&p, &t).map_err(|e| e.to_string())?;
        ensure(!val.is_zero(), || format!("{p} vanishes at the faithful point"))?;
        count += 1;
    }
    let zero = FreePoly::zero(1, 1);
    ensure(evaluate(&zero, &faithful_point(2, 3)).map_err(|e| e.to_string())?.is_zero(), || "zero polynomial".into())?;
    Ok("100 nonzero a-polynomials are nonzero at the point; zero maps to zero".into())
}

fn lambda_min(p: &FreePoly, a: &[Mat], x: &[Mat]) -> f64 {
    let t = Tuple::new(a[0].rows(), a.to_vec(), x.to_vec()).unwrap();
    min_eigenvalue(&evaluate(p, &t).unwrap()).unwrap()
}

fn to_mats(m: &[Vec<Vec<f64>>]) -> Vec<Mat> {
    m.iter().map(|rows| Mat::from_rows(rows.clone()).unwrap()).collect()
}

fn convexity() -> Outcome {
    let convex = parse_poly("a1 - x1 x1").map_err(|e| e.to_string())?;
    let reg = Region { center: vec![Mat::zeros(3, 3)], radius: 2.0 };
    let rep = convexity_sample(&convex, &[Mat::identity(3)], &reg, 1000, 7, 1e-9).map_err(|e| e.to_string())?;
    ensure(rep.violations.is_empty(), || format!("a − x²: {} violations", rep.violations.len()))?;
    ensure(rep.segments_checked > 0, || "a − x²: no segments checked".into())?;
    let cubic = parse_poly("a1 - x1 x1 x1").map_err(|e| e.to_string())?;
    let a = vec![Mat::diag(&[1.0, 10.0])];
    let reg = Region { center: vec![Mat::zeros(2, 2)], radius: 3.0 };
    let rep3 = convexity_sample(&cubic, &a, &reg, 1000, 7, 1e-9).map_err(|e| e.to_string())?;
    let mut verified = 0;
    for w in &rep3.violations {
        let (x, y) = (to_mats(&w.x), to_mats(&w.y));
        let mid: Vec<Mat> = x.iter().zip(&y).map(|(xi, yi)| xi.scale(&(1.0 - w.t)).add(&yi.scale(&w.t))).collect();
        if lambda_min(&cubic, &a, &x) >= 0.0 && lambda_min(&cubic, &a, &y) >= 0.0 && lambda_min(&cubic, &a, &mid) < -1e-9 {
            verified += 1;
        }
    }
    ensure(verified > 0, || "a − x³: no verified witness".into())?;
    Ok(format!(
        "a − x²: 0 violations in {} segments; a − x³: {verified} verified witnesses",
        rep.segments_checked
    ))
}

fn main() {
    let lines = vec![
        run(1, "golden middle matrix", 1, golden_middle_matrix),
        run(2, "hermitian iff c = d", 1, hermitian_pattern),
        run(3, "K, L, Y identities", 30, kly_grid),
        run(4, "congruence", 60, congruence_random),
        run(5, "span dimension", 60, chsy_grid),
        run(6, "two-variable example", 30, two_variable_example),
        run(7, "majorization and regime scan", 60, majorization_and_scan),
        run(8, "sum-of-squares round trip", 30, sos_round_trip),
        run(9, "faithful point", 10, faithfulness),
        run(10, "convexity sampling", 60, convexity),
    ];
    let failed: Vec<usize> = lines.iter().filter(|l| !l.passed).map(|l| l.id).collect();
    println!("acceptance: {} of {} criteria pass", lines.len() - failed.len(), lines.len());
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
