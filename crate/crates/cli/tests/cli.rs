use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn crext(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crext")).args(args).output().expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    crext(args).status.code().expect("exit code")
}

fn json(args: &[&str]) -> (i32, String, Value) {
    let out = crext(args);
    let text = String::from_utf8(out.stdout).unwrap();
    let value = serde_json::from_str(&text).unwrap_or_else(|e| panic!("{args:?}: {e}\n{text}"));
    (out.status.code().unwrap(), text, value)
}

#[test]
fn validate_exit_codes() {
    assert_eq!(code(&["validate", "catalog:heisenberg3"]), 0);
    assert_eq!(code(&["validate", &fixture("heisenberg3.json")]), 0);
    assert_eq!(code(&["validate", &fixture("heisenberg3_perturbed.json")]), 1);
    assert_eq!(code(&["validate", &fixture("heisenberg3_self_conjugate.json")]), 1);
    assert_eq!(code(&["validate", &fixture("malformed.json")]), 2);
    assert_eq!(code(&["validate", &fixture("lower_triangular.json")]), 2);
    assert_eq!(code(&["validate", &fixture("missing.json")]), 2);
    assert_eq!(code(&["validate", "catalog:nope"]), 2);
}

#[test]
fn validate_reports_class_and_witness() {
    let (_, _, v) = json(&["validate", "catalog:heisenberg3", "--json"]);
    assert_eq!(v["class"]["kind"], "nilpotent");
    assert_eq!(v["class"]["step"], 2);
    let (_, _, v) = json(&["validate", &fixture("heisenberg3_perturbed.json"), "--json"]);
    assert_eq!(v["witness"], serde_json::json!([1, 2, 3, 3]));
    let out = crext(&["validate", &fixture("heisenberg3_perturbed.json")]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("(a, b, c) = (1, 2, 3), component 3"));
}

#[test]
fn verify_exit_codes() {
    assert_eq!(code(&["verify", "catalog:heisenberg3"]), 0);
    assert_eq!(code(&["verify", "catalog:sl2", "--tol", "1e-6"]), 0);
    assert_eq!(code(&["verify", "catalog:sl2", "--tol", "1e-14"]), 1);
    assert_eq!(code(&["verify", &fixture("heisenberg3_perturbed.json")]), 1);
    assert_eq!(code(&["verify", "catalog:sl2", "--step", "1"]), 2);
    assert_eq!(code(&["verify", "catalog:sl2", "--grid", "hex:2"]), 2);
}

#[test]
fn verify_human_output_has_witness() {
    let out = crext(&["verify", "catalog:sl2"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("worst at t = ("), "{text}");
    assert!(text.contains("(a, b, g) = ("), "{text}");
}

#[test]
fn verify_report_schema() {
    let (c, _, v) = json(&["verify", "catalog:heisenberg3", "--json"]);
    assert_eq!(c, 0);
    let checks = v["checks"].as_array().unwrap();
    let names: Vec<&str> = checks.iter().map(|c| c["check"].as_str().unwrap()).collect();
    assert_eq!(names, ["maurer_cartan", "flatness", "bracket_form_agreement", "triangular_dependence"]);
    let mc = &checks[0];
    assert!(mc["max_residual"].as_f64().unwrap() <= 1e-8);
    assert_eq!(mc["witness"]["indices"].as_array().unwrap().len(), 3);
    assert_eq!(mc["grid"]["kind"], "lattice");
    assert_eq!(mc["fd"]["step"], 1e-4);
}

#[test]
fn embed_exit_codes() {
    assert_eq!(code(&["embed", "catalog:heisenberg3-cr"]), 0);
    assert_eq!(code(&["embed", &fixture("heisenberg3_cr.json")]), 0);
    assert_eq!(code(&["embed", &fixture("heisenberg3_self_conjugate.json")]), 1);
    assert_eq!(code(&["embed", "catalog:heisenberg3"]), 2);
    assert_eq!(code(&["embed", "catalog:abelian4-cr", "--target-l", "3"]), 1);
    let (c, _, v) = json(&["embed", "catalog:abelian4-cr", "--target-l", "1", "--json"]);
    assert_eq!(c, 0);
    assert_eq!(v["certificate"]["extension_type"], serde_json::json!([2, 1]));
}

#[test]
fn oracle_exit_codes() {
    assert_eq!(code(&["oracle", "catalog:filiform4"]), 0);
    assert_eq!(code(&["oracle", "catalog:sl2"]), 3);
    assert_eq!(code(&["oracle", "catalog:axb"]), 3);
    let (c, _, v) = json(&["oracle", "catalog:abelian3", "--json"]);
    assert_eq!(c, 0);
    let entries = v["omega"]["entries"].as_array().unwrap();
    for (g, row) in entries.iter().enumerate() {
        for (a, p) in row.as_array().unwrap().iter().enumerate() {
            let expected = if g == a {
                serde_json::json!([{ "monomial": {}, "coeff": ["1/1", "0/1"] }])
            } else {
                serde_json::json!([])
            };
            assert_eq!(p, &expected);
        }
    }
    let text = String::from_utf8(crext(&["oracle", "catalog:heisenberg3"]).stdout).unwrap();
    assert!(text.contains("flatness residual identically zero: yes"));
}

#[test]
fn json_output_round_trips_byte_identically() {
    let cases: [&[&str]; 7] = [
        &["validate", "catalog:su2", "--json"],
        &["verify", "catalog:sl2", "--json"],
        &["verify", "catalog:filiform5", "--json"],
        &["embed", "catalog:abelian4-cr", "--json"],
        &["oracle", "catalog:filiform5", "--json"],
        &["catalog", "list", "--json"],
        &["--show-config"],
    ];
    for args in cases {
        let (_, text, value) = json(args);
        let again = serde_json::to_string_pretty(&value).unwrap();
        assert_eq!(text.trim_end(), again, "{args:?}");
    }
}

#[test]
fn config_precedence() {
    let (_, _, v) = json(&["--show-config"]);
    assert_eq!(v["tol"], 1e-8);
    assert_eq!(v["step"], 1e-4);
    assert_eq!(v["richardson"], 1);
    assert_eq!(v["rmax"], 1.0);
    let cfg = fixture("strict.json");
    let (_, _, v) = json(&["--show-config", "--config", &cfg]);
    assert_eq!((v["tol"].as_f64(), v["step"].as_f64(), v["seed"].as_u64()), (Some(1e-14), Some(1e-3), Some(7)));
    let (_, _, v) = json(&["--show-config", "--config", &cfg, "--tol", "1e-6"]);
    assert_eq!((v["tol"].as_f64(), v["step"].as_f64()), (Some(1e-6), Some(1e-3)));
    assert_eq!(code(&["verify", "catalog:sl2", "--config", &cfg]), 1);
    assert_eq!(code(&["verify", "catalog:sl2", "--config", &fixture("malformed.json")]), 2);
}

#[test]
fn selftest_and_catalog() {
    assert_eq!(code(&["selftest"]), 0);
    let (c, _, v) = json(&["catalog", "list", "--json"]);
    assert_eq!(c, 0);
    assert_eq!(v["entries"].as_array().unwrap().len(), 10);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&["frobnicate"]), 2);
    assert_eq!(code(&[]), 2);
    assert_eq!(code(&["verify"]), 2);
}
