//! End-to-end checks of the `lie-realize` binary.

use std::io::Write;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_lie-realize");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn sl2r_file() -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "d1").unwrap();
    writeln!(f, "(x1)*d1 + (x2)*d2").unwrap();
    writeln!(f, "(x1^2)*d1 + (2*x1*x2)*d2 + (x2)*d3").unwrap();
    f
}

#[test]
fn verify_single_entry_succeeds() {
    let out = run(&["verify", "--algebra", "so3", "--realization", "1"]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).starts_with("ok:"));
}

#[test]
fn verify_all_entries_succeed() {
    let out = run(&["verify", "--all"]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn catalog_list_prints_all_indices() {
    let out = run(&["catalog", "list"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for needle in ["R(sl2R, 5)", "R(so3, 2)", "R(sl2R_plus_A1, 9)", "R(so3_plus_A1, 4)"] {
        assert!(text.contains(needle), "missing {needle} in:\n{text}");
    }
}

#[test]
fn bracket_of_first_two_sl2r_fields() {
    let f = sl2r_file();
    let out = run(&["bracket", "--fields", f.path().to_str().unwrap(), "--pair", "1", "2"]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    // [e1, e2] = e1 = d1
    assert_eq!(stdout(&out).trim(), "[e1, e2] = (1)*d1");
}

#[test]
fn identify_field_list_as_sl2r() {
    let f = sl2r_file();
    let out = run(&["identify", f.path().to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("sl2R"));
}

#[test]
fn killing_signature_of_sl2r() {
    let f = sl2r_file();
    let out = run(&["killing", f.path().to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("signature: (2, 1, 0)"));
}

#[test]
fn proofcheck_json_is_well_formed() {
    let out = run(&["proofcheck", "lie-ode", "--trials", "5", "--json", "--seed", "3"]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid JSON");
    assert_eq!(v["command"], "proofcheck");
    assert_eq!(v["status"], "ok");
    assert_eq!(v["seed"], 3);
    assert_eq!(v["payload"]["checks"][0]["check"], "lie-ode");
    assert_eq!(v["payload"]["checks"][0]["status"], "ok");
}

#[test]
fn identical_seeds_give_identical_reports() {
    let args = ["proofcheck", "rho4", "--trials", "10", "--json", "--seed", "11"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout, "same seed must reproduce byte-identical output");
}

#[test]
fn seed_env_var_is_honored() {
    let out = Command::new(BIN)
        .args(["proofcheck", "rho4", "--trials", "5", "--json"])
        .env("LIE_REALIZE_SEED", "99")
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["seed"], 99);
}

#[test]
fn unknown_check_is_a_usage_error() {
    let out = run(&["proofcheck", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unparseable_field_file_is_a_usage_error() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "x1 + )(").unwrap();
    let out = run(&["identify", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flow_of_translation_field_translates() {
    let f = sl2r_file();
    let out = run(&[
        "flow",
        "--fields",
        f.path().to_str().unwrap(),
        "--index",
        "1",
        "--point",
        "0.5,0.25,1.0",
        "--eps",
        "0.75",
        "--json",
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let end: Vec<f64> = v["payload"]["end"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert!((end[0] - 1.25).abs() < 1e-12);
    assert!((end[1] - 0.25).abs() < 1e-12);
    assert!((end[2] - 1.0).abs() < 1e-12);
}
