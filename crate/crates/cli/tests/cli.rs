use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn qid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qid")).args(args).output().unwrap()
}

fn report(args: &[&str]) -> (Value, i32) {
    let out = qid(args);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stderr));
    });
    (v, out.status.code().unwrap())
}

fn docs(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../docs")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

#[test]
fn beta_standard_model_at_seven() {
    let (v, code) = report(&["beta", "--dimension", "7", "--matter", "sm"]);
    assert_eq!(code, 0);
    assert_eq!(v["outputs"]["coefficient_at_dimension"], "9");
    assert_eq!(v["outputs"]["asymptotically_free"], true);
}

#[test]
fn beta_without_higgs_vanishes_at_six() {
    let (v, _) = report(&["beta", "--dimension", "6", "--matter", "sm", "--no-higgs"]);
    assert_eq!(v["outputs"]["coefficient_at_dimension"], "0");
    assert_eq!(v["outputs"]["asymptotically_free"], false);
}

#[test]
fn beta_custom_counts() {
    let (v, _) = report(&["beta", "--dimension", "4", "--matter", "custom", "--n-dirac", "6"]);
    assert_eq!(v["outputs"]["coefficient_at_dimension"], "20");
    let out = qid(&["beta", "--dimension", "4", "--matter", "custom", "--n-dirac=-1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn beta_table_lists_each_dimension() {
    let out = qid(&["beta", "--dimension", "8", "--matter", "sm", "--format", "table", "--d-min", "5"]);
    let s = String::from_utf8(out.stdout).unwrap();
    assert_eq!(s.lines().filter(|l| l.contains("asymptotically free")).count(), 4);
    assert!(s.lines().any(|l| l.trim_start().starts_with('7') && !l.contains("not")));
}

#[test]
fn div_integral_rank_two() {
    let (v, code) = report(&["div-integral", "--rank", "2", "--denoms", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["outputs"]["tabulated"], true);
    let latex = v["outputs"]["latex"].as_str().unwrap();
    assert!(latex.contains("\\frac{1}{3}") && latex.contains("\\frac{1}{12}"), "{latex}");
}

#[test]
fn div_integral_out_of_range() {
    assert_eq!(qid(&["div-integral", "--rank", "5", "--denoms", "2"]).status.code(), Some(2));
}

#[test]
fn inner_moment_numeric() {
    let (v, code) = report(&["inner-moment", "--degree", "2", "--dim", "4", "--cutoff", "2", "--numeric"]);
    assert_eq!(code, 0);
    assert!(v["outputs"]["numeric"]["rel_error"].as_f64().unwrap() < 1e-9);
}

#[test]
fn power_count_self_energy() {
    let g = docs("self_energy.json");
    let (v, code) = report(&["power-count", "--graph", &g]);
    assert_eq!(code, 0);
    assert_eq!(v["outputs"]["superficial_degree"], 2);
    assert_eq!(v["outputs"]["brute_degree"], 2);
}

#[test]
fn power_count_rejects_bad_graph() {
    let dir = std::env::temp_dir().join(format!("qid-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join("g.json");
    std::fs::write(&p, r#"{"vertices":[{"id":0,"type":"gauge3"}],"internal_edges":[],"external_legs":[]}"#).unwrap();
    assert_eq!(qid(&["power-count", "--graph", p.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn rules_vertex_and_propagator() {
    let (v, _) = report(&["rules", "--vertex", "4"]);
    assert_eq!(v["outputs"]["legs"].as_array().unwrap().len(), 4);
    let (p, _) = report(&["rules", "--propagator", "gauge", "--xi", "0"]);
    assert!(p["outputs"]["latex"].as_str().unwrap().contains("k_{1}"));
    assert_eq!(qid(&["rules", "--propagator", "gauge", "--xi", "x"]).status.code(), Some(2));
}

#[test]
fn heat_kernel_covariant_closes() {
    let (v, code) = report(&["heat-kernel", "--covariant"]);
    assert_eq!(code, 0);
    assert_eq!(v["outputs"]["c_f"], "1/12");
    assert_eq!(v["outputs"]["c_e"], "1/2");
}

#[test]
fn brst_checks() {
    for f in ["A", "omega", "omega-star", "h", "psi"] {
        let (v, code) = report(&["brst-check", "--field", f]);
        assert_eq!(code, 0, "{f}");
        assert_eq!(v["verdicts"][0]["passed"], true);
    }
    let (_, code) = report(&["brst-check", "--exactness"]);
    assert_eq!(code, 0);
    assert_eq!(qid(&["brst-check", "--field", "phi"]).status.code(), Some(2));
}

#[test]
fn verify_single_suite() {
    let (v, code) = report(&["verify", "loop-table"]);
    assert_eq!(code, 0);
    assert_eq!(v["verdicts"].as_array().unwrap().len(), 1);
}

#[test]
fn verify_all_reports_ten_and_fails_on_rules() {
    let (v, code) = report(&["verify"]);
    let verdicts = v["verdicts"].as_array().unwrap();
    assert_eq!(verdicts.len(), 10);
    let failing: Vec<&str> = verdicts
        .iter()
        .filter(|x| x["passed"] == false)
        .map(|x| x["name"].as_str().unwrap())
        .collect();
    assert_eq!(failing, ["10 Feynman rules"]);
    assert_eq!(code, 1);
}

#[test]
fn reports_are_deterministic_and_written_to_report_dir() {
    let dir = std::env::temp_dir().join(format!("qid-reports-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_qid"))
            .args(["div-integral", "--rank", "3", "--denoms", "3"])
            .env("QID_REPORT_DIR", &dir)
            .output()
            .unwrap()
    };
    let a = run();
    let b = run();
    assert_eq!(a.stdout, b.stdout);
    let file = std::fs::read(dir.join("div-integral.json")).unwrap();
    assert_eq!(file, a.stdout);
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(qid(&["frobnicate"]).status.code(), Some(2));
}
