use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ncpoly"));
    c.env_remove("NCPOLY_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ncpoly-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn middle_prints_golden_matrix() {
    let o = run(&["middle", "--poly", "x2 x2 a1 x1 + x1 a1 x2 x2 + a1 a1", "--flavor", "reduced"]);
    assert_eq!(o.status.code(), Some(0));
    let expected = "border: h1, h2, h2 x2, h2 a1 x1\n\
                    [      0 | 2 a1 x2 | 2 a1 | 0]\n\
                    [2 x2 a1 |       0 |    0 | 2]\n\
                    [   2 a1 |       0 |    0 | 0]\n\
                    [      0 |       2 |    0 | 0]\n";
    assert_eq!(stdout(&o), expected);
}

#[test]
fn sos_of_negative_square_has_one_square() {
    let out = tmp("sos.json");
    let o = run(&["sos", "--poly", "- x1 x1", "--json", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["result"]["S"].as_array().unwrap().len(), 1);
    assert_eq!(doc["result"]["exact"], Value::Bool(true));
    assert!(stdout(&o).contains("squares: 1"));
}

#[test]
fn chsy_reports_dimension() {
    let o = run(&["chsy", "--n", "6", "--k", "4", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "dim = 18 = 4·6 − 6, PASS\n");
}

#[test]
fn exit_codes_separate_refusals_from_input_errors() {
    assert_eq!(run(&["sos", "--poly", "x1 x1 x1"]).status.code(), Some(1));
    assert_eq!(run(&["quasiconvex", "--poly", "x1 x2 + x2 x1"]).status.code(), Some(1));
    let bad = run(&["sos", "--poly", "x1 +* x1"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8(bad.stderr).unwrap().contains("line 1, column 5"));
    assert_eq!(run(&["middle", "--poly", "x1 x1", "--flavor", "bogus"]).status.code(), Some(2));
    assert_eq!(run(&["chsy", "--n", "3"]).status.code(), Some(2));
    assert_eq!(run(&["probe", "--poly", "a1 - x1 x1"]).status.code(), Some(2));
}

#[test]
fn probe_finds_a_witness_for_the_cubic() {
    let t = r#"{"n": 2, "A": [[[1, 0], [0, 10]]]}"#;
    let o = run(&["probe", "--poly", "a1 - x1 x1 x1", "--tuple", t, "--radius", "3", "--trials", "300", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("witness"));
    let t = r#"{"n": 2, "A": [[[1, 0], [0, 1]]]}"#;
    let o = run(&["probe", "--poly", "a1 - x1 x1", "--tuple", t, "--trials", "200", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn congruence_holds_exactly_at_a_rational_tuple() {
    let t = r#"{"n": 2, "A": [[[1, 2], [2, 0]]], "X": [[[1, "1/2"], ["1/2", 3]]]}"#;
    let o = run(&["congruence", "--poly", "x1 a1 x1 x1 + x1 x1 a1 x1", "--tuple", t]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("exact at the tuple: true / true"));
}

/// Re-run the command embedded in a report and compare the JSON bytes.
fn assert_rerun_identical(first: &PathBuf) {
    let text = std::fs::read_to_string(first).unwrap();
    let doc: Value = serde_json::from_str(&text).unwrap();
    let args: Vec<String> = doc["command"]["args"].as_array().unwrap().iter().map(|a| a.as_str().unwrap().to_string()).collect();
    let second = first.with_extension("rerun.json");
    let o = bin().args(&args).arg("--json").arg(&second).output().unwrap();
    assert!(o.status.code().is_some_and(|c| c < 2));
    assert_eq!(std::fs::read_to_string(&second).unwrap(), text);
}

#[test]
fn embedded_command_reruns_to_identical_json() {
    let out = tmp("probe.json");
    let t = r#"{"n": 2, "A": [[[1, 0], [0, 10]]]}"#;
    let o = bin()
        .env("NCPOLY_SEED", "11")
        .args(["probe", "--poly", "a1 - x1 x1 x1", "--tuple", t, "--radius", "3", "--trials", "100", "--json"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.code().is_some_and(|c| c < 2));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let args = doc["command"]["args"].as_array().unwrap();
    assert!(args.windows(2).any(|w| w[0] == "--seed" && w[1] == "11"));
    assert_rerun_identical(&out);

    let out = tmp("report.json");
    let o = run(&["report", "--poly", "a1 x1 + x1 a1 - x1 x1", "--json", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_rerun_identical(&out);
}

#[test]
fn remaining_verbs_run() {
    let o = run(&["deriv", "--poly", "x1 x1", "--tuple", r#"{"n": 1, "X": [[[2]]], "H": [[[1]]]}"#]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("p_x(A, X)[H] = [[4]]"));
    let o = run(&["hessian", "--poly", "x1 x1 x1", "--tuple", r#"{"n": 1, "X": [[[2]]], "H": [[[1]]]}"#]);
    assert!(stdout(&o).contains("p_xx(A, X)[H] = [[12]]"));
    let o = run(&["chips", "--poly", "x2 x2 a1 x1 + x1 a1 x2 x2"]);
    assert!(stdout(&o).contains("beta = [2, 4]"));
    let o = run(&["majorize", "--poly", "2 a1 + a1 x1 + x1 a1 + x1 x1", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("majorizes: true"));
    let o = run(&["quasiconvex", "--poly", "x1 x1 + x1 x2 + x2 x1 + 2 x2 x2 + x1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("exact: true"));
}
