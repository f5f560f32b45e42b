//! `ncpoly`: command-line front end for the ncpoly library.
//!
//! Exit codes: 0 on success or certificate, 1 on a refusal or a violation
//! (the report carries the reason or witness), 2 on input errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use ncpoly::border::{Border, Flavor};
use ncpoly::calculus::{derivative_full, derivative_x, hessian_x};
use ncpoly::chips::{left_chip_sets, right_chip_sets, ChipSet};
use ncpoly::eval::{evaluate, tuple_from_json, QTuple};
use ncpoly::kly::{congruence_check, congruence_check_exact, congruence_symbolic};
use ncpoly::linalg::inertia;
use ncpoly::middle::{middle_matrix_hessian, modified_and_relaxed};
use ncpoly::parse::{parse_poly, poly_from_json, poly_to_json_value, qmat_to_json};
use ncpoly::poly::qmat_text;
use ncpoly::probe::{
    chsy_dim, convexity_sample, default_delta_grid, form_matrix, form_tol, regime_scan, regime_value, Region,
};
use ncpoly::random::{random_tuple, random_vector, rng};
use ncpoly::structure::{majorize_at, quasiconvex_certify, sos_extract};
use ncpoly::{Error, FreePoly, Kind, Mat};

#[derive(Parser, Debug)]
#[command(name = "ncpoly", version, about = "Convexity analysis for free noncommutative polynomials")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Verb {
    /// First derivatives in x and in (a, x)
    Deriv,
    /// Second derivative in x
    Hessian,
    /// Right and left chip sets
    Chips,
    /// Border vector and Hessian middle matrix
    Middle,
    /// Congruence between the middle matrix and its value at x = 0
    Congruence,
    /// Range majorization of the coefficient matrices at a point
    Majorize,
    /// Weighted sum-of-squares certificate for x-degree at most two
    Sos,
    /// Sum-of-squares certificate for a quasiconvex quadratic
    Quasiconvex,
    /// Relaxed-form signatures at a boundary point, or convexity sampling
    Probe,
    /// Dimension of the span of u_i w^T + w u_i^T
    Chsy,
    /// Summary of the applicable analyses
    Report,
}

#[derive(Args, Debug)]
struct Opts {
    /// Scalar polynomial in the text grammar; `@path` reads it from a file
    #[arg(long, global = true, allow_hyphen_values = true)]
    poly: Option<String>,
    /// Polynomial in JSON form, inline or as a file path
    #[arg(long = "poly-json", global = true)]
    poly_json: Option<String>,
    /// Matrix tuple in JSON form, inline or as a file path
    #[arg(long, global = true)]
    tuple: Option<String>,
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, global = true, env = "NCPOLY_SEED")]
    seed: Option<u64>,
    /// Border flavor: full, extended, reduced or reduced_extended
    #[arg(long, global = true, default_value = "reduced")]
    flavor: String,
    /// Comma-separated λ values
    #[arg(long = "lambda-grid", global = true, allow_hyphen_values = true)]
    lambda_grid: Option<String>,
    /// Comma-separated δ values
    #[arg(long = "delta-grid", global = true, allow_hyphen_values = true)]
    delta_grid: Option<String>,
    /// Write the JSON report to this path
    #[arg(long, global = true, value_name = "OUT")]
    json: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1000)]
    trials: usize,
    /// Matrix size
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Number of vectors
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Sampling radius around the center point
    #[arg(long, global = true, default_value_t = 2.0)]
    radius: f64,
}

impl Opts {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}

struct Report {
    text: String,
    json: Value,
    status: u8,
}

impl Report {
    fn ok(text: String, json: Value) -> Report {
        Report { text, json, status: 0 }
    }

    fn flagged(text: String, json: Value, violated: bool) -> Report {
        Report { text, json, status: u8::from(violated) }
    }
}

enum Failure {
    Input(String),
    Refusal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::Parse { .. } | Error::Input(_) | Error::Shape(_) | Error::MissingDirection(_) => {
                Failure::Input(e.to_string())
            }
            other => Failure::Refusal(other.to_string()),
        }
    }
}

type Outcome = Result<Report, Failure>;

fn input(msg: impl Into<String>) -> Failure {
    Failure::Input(msg.into())
}

fn read_inline_or_file(arg: &str, what: &str) -> Result<String, Failure> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        return Ok(arg.to_string());
    }
    std::fs::read_to_string(arg).map_err(|e| input(format!("{what}: cannot read `{arg}`: {e}")))
}

fn load_poly(o: &Opts) -> Result<FreePoly, Failure> {
    match (&o.poly, &o.poly_json) {
        (Some(_), Some(_)) => Err(input("give either --poly or --poly-json, not both")),
        (Some(text), None) => {
            let src = match text.strip_prefix('@') {
                Some(path) => std::fs::read_to_string(path).map_err(|e| input(format!("--poly: cannot read `{path}`: {e}")))?,
                None => text.clone(),
            };
            Ok(parse_poly(&src)?)
        }
        (None, Some(j)) => Ok(poly_from_json(&read_inline_or_file(j, "--poly-json")?)?),
        (None, None) => Err(input("missing --poly or --poly-json")),
    }
}

fn load_tuple(o: &Opts) -> Result<Option<QTuple>, Failure> {
    o.tuple.as_ref().map(|t| Ok(tuple_from_json(&read_inline_or_file(t, "--tuple")?)?)).transpose()
}

fn parse_grid(s: &Option<String>, flag: &str, default: Vec<f64>) -> Result<Vec<f64>, Failure> {
    let Some(s) = s else { return Ok(default) };
    let vals = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| input(format!("{flag}: `{x}`: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if vals.is_empty() || vals.iter().any(|v| !v.is_finite()) {
        return Err(input(format!("{flag}: expected finite comma-separated numbers")));
    }
    Ok(vals)
}

fn chips_json(c: &ChipSet) -> Value {
    let per: serde_json::Map<String, Value> = c
        .per_variable
        .iter()
        .map(|(k, ws)| (format!("x{k}"), json!(ws.iter().map(|w| w.to_string()).collect::<Vec<_>>())))
        .collect();
    json!({"per_variable": per, "beta": c.beta})
}

fn chips_text(label: &str, c: &ChipSet) -> String {
    let mut s = String::new();
    for (k, ws) in &c.per_variable {
        let words: Vec<String> = ws.iter().map(|w| if w.is_empty() { "1".to_string() } else { w.to_string() }).collect();
        s.push_str(&format!("{label} chips of x{k}: {{{}}}\n", words.join(", ")));
    }
    s
}

fn deriv(o: &Opts) -> Outcome {
    let p = load_poly(o)?;
    let dx = derivative_x(&p)?;
    let df = derivative_full(&p)?;
    let mut text = format!("p      = {p}\np_x    = {dx}\np'     = {df}\n");
    let mut j = json!({"poly": poly_to_json_value(&p), "derivative_x": dx.to_text(), "derivative_full": df.to_text()});
    if let Some(t) = load_tuple(o)? {
        let v = evaluate(&dx, &t)?;
        text.push_str(&format!("p_x(A, X)[H] = {}\n", qmat_text(&v)));
        j["derivative_x_value"] = qmat_to_json(&v);
        if t.e.is_some() {
            let v = evaluate(&df, &t)?;
            text.push_str(&format!("p'(A, X)[E, H] = {}\n", qmat_text(&v)));
            j["derivative_full_value"] = qmat_to_json(&v);
        }
    }
    Ok(Report::ok(text, j))
}

fn hessian(o: &Opts) -> Outcome {
    let p = load_poly(o)?;
    let h = hessian_x(&p)?;
    let mut text = format!("p      = {p}\np_xx   = {h}\n");
    let mut j = json!({"poly": poly_to_json_value(&p), "hessian_x": h.to_text()});
    if let Some(t) = load_tuple(o)? {
        let v = evaluate(&h, &t)?;
        text.push_str(&format!("p_xx(A, X)[H] = {}\n", qmat_text(&v)));
        j["hessian_x_value"] = qmat_to_json(&v);
    }
    Ok(Report::ok(text, j))
}

fn chips(o: &Opts) -> Outcome {
    let p = load_poly(o)?;
    let r = right_chip_sets(&p);
    let l = left_chip_sets(&p);
    let text = format!("{}{}beta = {:?}\n", chips_text("right", &r), chips_text("left", &l), r.beta);
    Ok(Report::ok(text, json!({"right": chips_json(&r), "left": chips_json(&l)})))
}

fn middle(o: &Opts) -> Outcome {
    let p = load_poly(o)?;
    let flavor: Flavor = o.flavor.parse()?;
    let border = Border::build(flavor, &p)?;
    let m = middle_matrix_hessian(&p, &border)?;
    let mut text = format!("border: {}\n{}", border.to_strings().join(", "), m.matrix.to_text());
    let mut j = m.to_json();
    if let Some(t) = load_tuple(o)? {
        let v = m.matrix.evaluate(&t)?;
        text.push_str(&format!("value at the tuple: {}\n", qmat_text(&v)));
        j["value"] = qmat_to_json(&v);
    }
    Ok(Report::ok(text, j))
}

fn congruence(o: &Opts) -> Outcome {
    let p = load_poly(o)?;
    let s = congruence_symbolic(&p)?;
    let mut ok = s.inverse_root_form && s.root_form && s.z_equals_z0_l;
    let mut text = format!(
        "Z(a,x) = Y'^T Z(a,0) Y'   {}\nY^T Z(a,x) Y = Z(a,0)     {}\nZ(a,x) = Z(a,0) L(a,x)    {}\n",
        s.inverse_root_form, s.root_form, s.z_equals_z0_l
    );
    let mut j = json!({"symbolic": s});
    if let Some(t) = load_tuple(o)? {
        let (a, b) = congruence_check_exact(&p, &t)?;
        let res = congruence_check(&p, &t.to_f64())?;
        let numeric_ok = res.inverse_root_residual <= o.tol && res.root_residual <= o.tol;
        ok &= a && b && numeric_ok;
        text.push_str(&format!(
            "exact at the tuple: {} / {}\nresiduals: {:.3e} / {:.3e}\n",
            a, b, res.inverse_root_residual, res.root_residual
        ));
        j["exact"] = json!({"inverse_root_form": a, "root_form": b});
        j["numeric"] = json!(res);
    }
    text.push_str(if ok { "PASS\n" } else { "FAIL\n" });
    j["holds"] = json!(ok);
    Ok(Report::flagged(text, j, !ok))
}

fn majorize(o: &Opts) -> Outcome {
    let p = load_poly(o)?;
    let t = match load_tuple(o)? {
        Some(t) => t.to_f64(),
        None => {
            let n = o.n.unwrap_or(4);
            random_tuple(&mut rng(o.seed()), n, p.max_index(Kind::A), p.max_index(Kind::X))
        }
    };
    let rep = majorize_at(&p, &t, o.tol)?;
    let text = format!(
        "ranks: lower {}, top {}, joint {}\nmajorizes: {}\n",
        rep.rank_lower, rep.rank_top, rep.rank_joint, rep.holds
    );
    Ok(Report::flagged(text, json!({"n": t.n, "report": rep}), !rep.holds))
}

fn sos(o: &Opts) -> Outcome {
    let p = load_poly(o)?;
    let cert = sos_extract(&p)?;
    let text = format!(
        "ell = {}\nR =\n{}S = [{}]\nsquares: {}\nexact: {}\n",
        cert.ell,
        cert.r.to_text(),
        cert.s.iter().map(|s| s.to_text()).collect::<Vec<_>>().join(", "),
        cert.s.len(),
        cert.exact
    );
    Ok(Report::flagged(text, cert.to_json(), !cert.exact))
}

fn quasiconvex(o: &Opts) -> Outcome {
    let f = load_poly(o)?;
    let res = quasiconvex_certify(&f)?;
    let text = match (&res.refusal, &res.certificate) {
        (Some(why), _) => format!("refused: {why}\n"),
        (None, Some(cert)) => {
            let mut s = format!("ell = {}\n", cert.ell);
            for (d, sq) in &res.squares {
                s.push_str(&format!("+ {d} · ({sq})^T ({sq})\n"));
            }
            s.push_str(&format!("exact: {}\n", cert.exact));
            s
        }
        (None, None) => "no certificate\n".to_string(),
    };
    let refused = res.refusal.is_some() || res.certificate.as_ref().is_some_and(|c| !c.exact);
    Ok(Report::flagged(text, res.to_json(), refused))
}

fn probe(o: &Opts) -> Outcome {
    let p = load_poly(o)?;
    let t = load_tuple(o)?.ok_or_else(|| input("probe needs --tuple"))?;
    let tf = t.to_f64();
    let deltas = parse_grid(&o.delta_grid, "--delta-grid", default_delta_grid())?;
    if tf.v.is_some() {
        // relaxed-form signatures at a boundary point
        let lambdas = parse_grid(&o.lambda_grid, "--lambda-grid", vec![-1.0, 1.0])?;
        let border = Border::reduced_extended(&p);
        let base = form_matrix(&p, &tf, &border, 0.0, 0.0)?;
        let mut text = format!("border: {}\n", border.to_strings().join(", "));
        let mut grid = Vec::new();
        for &lam in &lambdas {
            for &del in &deltas {
                let s = base.with_params(lam, del).signature(None)?;
                text.push_str(&format!("λ = {lam:>10}, δ = {del:>10}: e+ = {}, e- = {}\n", s.mu_plus, s.mu_minus));
                grid.push(json!({"lambda": lam, "delta": del, "inertia": s}));
            }
        }
        let mid = middle_matrix_hessian(&p, &Border::reduced(&p))?;
        let z0 = mid.matrix.at_x_zero().evaluate(&tf.at_x_zero())?;
        let mu0 = inertia(&z0, form_tol(&z0))?.mu_plus;
        let rel = modified_and_relaxed(&p, &border, 0.0, 0.0, &tf)?;
        let f = rel.phi.transpose().mul(&rel.phi);
        let tol = o.tol * (1.0 + rel.z.max_abs());
        let scan = regime_scan(&rel.z, &f, &Mat::identity(rel.z.rows()), &deltas, tol)?;
        let scanned = regime_value(&scan).map(|s| s.mu_plus);
        text.push_str(&format!("mu+ of Z(A,0) = {mu0}; scanned mu+ of the relaxed matrix = {scanned:?}\n"));
        let j = json!({"mode": "form", "grid": grid, "mu_plus_z0": mu0, "scan": scan});
        return Ok(Report::ok(text, j));
    }
    let g = p.max_index(Kind::X);
    let center = if tf.x.is_empty() { vec![Mat::zeros(tf.n, tf.n); g] } else { tf.x.clone() };
    let region = Region { center, radius: o.radius };
    let rep = convexity_sample(&p, &tf.a, &region, o.trials, o.seed(), o.tol)?;
    let mut text = format!(
        "trials {}, interior samples {}, segments {}, violations {}\n",
        rep.trials,
        rep.interior_samples,
        rep.segments_checked,
        rep.violations.len()
    );
    if let Some(note) = &rep.note {
        text.push_str(&format!("note: {note}\n"));
    }
    if let Some(w) = rep.violations.first() {
        text.push_str(&format!("witness: t = {:.6}, min eigenvalue {:.3e}\n", w.t, w.min_eig));
    }
    let violated = !rep.violations.is_empty();
    Ok(Report::flagged(text, json!({"mode": "sample", "report": rep}), violated))
}

fn chsy(o: &Opts) -> Outcome {
    let n = o.n.ok_or_else(|| input("chsy needs --n"))?;
    let k = o.k.ok_or_else(|| input("chsy needs --k"))?;
    if k == 0 || k > n {
        return Err(input("chsy needs 1 ≤ k ≤ n"));
    }
    let mut r = rng(o.seed());
    let us: Vec<Vec<f64>> = (0..k).map(|_| random_vector(&mut r, n)).collect();
    let rep = chsy_dim(&us)?;
    let text = format!(
        "dim = {} = {k}·{n} − {}, {}\n",
        rep.dim,
        k * (k - 1) / 2,
        if rep.matches { "PASS" } else { "FAIL" }
    );
    Ok(Report::flagged(text, json!(rep), !rep.matches))
}

fn report(o: &Opts) -> Outcome {
    let p = load_poly(o)?;
    let sym = p.is_symmetric();
    let r = right_chip_sets(&p);
    let border = Border::reduced(&p);
    let mut text = format!(
        "p = {p}\nshape {}×{}, x-degree {}, symmetric {sym}\nbeta = {:?}\nreduced border ({}): {}\n",
        p.kappa(),
        p.kappa_p(),
        p.deg_x(),
        r.beta,
        border.len(),
        border.to_strings().join(", ")
    );
    let mut j = json!({
        "poly": poly_to_json_value(&p),
        "deg_x": p.deg_x(),
        "deg_a": p.deg_a(),
        "symmetric": sym,
        "chips": chips_json(&r),
        "reduced_border": border.to_strings(),
    });
    match middle_matrix_hessian(&p, &border) {
        Ok(m) => {
            text.push_str(&m.matrix.to_text());
            j["middle"] = m.matrix.to_json();
        }
        Err(e) => text.push_str(&format!("middle matrix unavailable: {e}\n")),
    }
    if sym {
        if let Ok(s) = congruence_symbolic(&p) {
            text.push_str(&format!("congruence holds: {}\n", s.inverse_root_form && s.root_form));
            j["congruence"] = json!(s);
        }
        match sos_extract(&p) {
            Ok(c) => {
                text.push_str(&format!("sum-of-squares certificate: {} squares, exact {}\n", c.s.len(), c.exact));
                j["sos"] = c.to_json();
            }
            Err(e) => {
                text.push_str(&format!("sum-of-squares certificate: {e}\n"));
                j["sos"] = json!({"refusal": e.to_string()});
            }
        }
    }
    Ok(Report::ok(text, j))
}

/// Arguments to embed in the JSON report: everything except `--json OUT`,
/// with the resolved seed made explicit.
fn embedded_args(seed: u64) -> Vec<String> {
    let raw: Vec<String> = std::env::args().skip(1).collect();
    let mut out = Vec::new();
    let mut skip = false;
    let mut has_seed = false;
    for a in raw {
        if skip {
            skip = false;
            continue;
        }
        if a == "--json" {
            skip = true;
            continue;
        }
        if a.starts_with("--json=") {
            continue;
        }
        has_seed |= a == "--seed" || a.starts_with("--seed=");
        out.push(a);
    }
    if !has_seed {
        out.push("--seed".into());
        out.push(seed.to_string());
    }
    out
}

fn verb_name(v: Verb) -> &'static str {
    match v {
        Verb::Deriv => "deriv",
        Verb::Hessian => "hessian",
        Verb::Chips => "chips",
        Verb::Middle => "middle",
        Verb::Congruence => "congruence",
        Verb::Majorize => "majorize",
        Verb::Sos => "sos",
        Verb::Quasiconvex => "quasiconvex",
        Verb::Probe => "probe",
        Verb::Chsy => "chsy",
        Verb::Report => "report",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let o = &cli.opts;
    let outcome = match cli.verb {
        Verb::Deriv => deriv(o),
        Verb::Hessian => hessian(o),
        Verb::Chips => chips(o),
        Verb::Middle => middle(o),
        Verb::Congruence => congruence(o),
        Verb::Majorize => majorize(o),
        Verb::Sos => sos(o),
        Verb::Quasiconvex => quasiconvex(o),
        Verb::Probe => probe(o),
        Verb::Chsy => chsy(o),
        Verb::Report => report(o),
    };
    let (text, body, status) = match outcome {
        Ok(r) => (r.text, r.json, r.status),
        Err(Failure::Refusal(msg)) => (format!("refused: {msg}\n"), json!({"refusal": msg}), 1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    print!("{text}");
    if let Some(path) = &o.json {
        let doc = json!({
            "command": {"verb": verb_name(cli.verb), "args": embedded_args(o.seed())},
            "status": status,
            "result": body,
        });
        let out = serde_json::to_string_pretty(&doc).expect("report serializes") + "\n";
        if let Err(e) = std::fs::write(path, out) {
            eprintln!("error: cannot write `{}`: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    ExitCode::from(status)
}
