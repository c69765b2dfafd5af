use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn weyl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weyl"))
        .args(args)
        .env_remove("WEYL_THREADS")
        .output()
        .expect("binary runs")
}

fn table(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", "tables", name].iter().collect();
    p.to_str().unwrap().to_owned()
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("weyl-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn bicyclic_mul_prints_normal_form() {
    let out = weyl(&["bicyclic", "mul", "2", "3", "1", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), r#"{"m":2,"n":4}"#);
}

#[test]
fn certify_quarter_rotation() {
    let out = weyl(&["certify", "--coeffs", "0,1/4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["depth"], 1);
    assert_eq!(v["chain"].as_array().unwrap().len(), 2);
}

#[test]
fn right_zero_table_gives_constants() {
    let out = weyl(&["finsgp", "solve-f1", &table("rightzero3.txt")]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["constants_only"], true);
    assert_eq!(v["dimension"], 1);
}

#[test]
fn left_zero_table_is_unconstrained() {
    let v = json_of(&weyl(&["finsgp", "solve-f1", &table("leftzero3.txt")]));
    assert_eq!(v["dimension"], 3);
    let ok = weyl(&["finsgp", "check-idempotents", &table("leftzero3.txt")]);
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn cyclic_group_characters() {
    let v = json_of(&weyl(&["finsgp", "characters", &table("z4.txt")]));
    assert_eq!(v["count"], 4);
    assert_eq!(v["span_dimension"], 4);
}

#[test]
fn fk_reports_nesting() {
    let v = json_of(&weyl(&["finsgp", "fk", "--k", "2", &table("z2.txt")]));
    assert_eq!(v["family"]["nesting"], serde_json::json!([true, true]));
    let over = weyl(&["finsgp", "fk", "--k", "9", &table("z2.txt")]);
    assert_eq!(over.status.code(), Some(2));
}

#[test]
fn ring_certificate_replays() {
    let out = weyl(&["ring", "certify", "--moduli", "12", "--char", "5", "--poly", "0,1,0,2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["depth"], 3);
    assert_eq!(v["replay"]["pass"], true);
}

#[test]
fn verify_round_trip_through_files() {
    let cert = tmp("cert.json");
    let c = cert.to_str().unwrap();
    assert_eq!(weyl(&["certify", "--coeffs", "0,0,1/8", "--output", c]).status.code(), Some(0));
    let ok = weyl(&["verify", "--cert", c, "--coeffs", "0,0,1/8", "--shifts", "-10..10"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(json_of(&ok)["max_error"], 0.0);
    let bad = weyl(&["verify", "--cert", c, "--coeffs", "0,0,1/9"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn recover_accepts_rotations_only() {
    let ok = weyl(&["recover-f1", "--coeffs", "1/3,2/7", "--half-width", "10"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(json_of(&ok)["lambda"], serde_json::json!(["2", "7"]));
    let no = weyl(&["recover-f1", "--coeffs", "0,0,1/7", "--half-width", "10"]);
    assert_eq!(no.status.code(), Some(1));
}

#[test]
fn probe_rejects_identical_translates() {
    let out = weyl(&["probe-distal", "--coeffs", "0,0,1/8", "--pairs", "0:4"]);
    assert_eq!(out.status.code(), Some(2));
    let ok = weyl(&["probe-distal", "--coeffs", "0.1,0.3,0.77", "--pairs", "0:1,-2:3"]);
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn mixed_phase_modes_are_usage_errors() {
    let out = weyl(&["bicyclic", "eval-f1", "--mu", "1/3", "--nu", "0.5", "1", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(weyl(&["certify", "--coeffs", "1/3,0.5"]).status.code(), Some(2));
}

#[test]
fn verify_f2_battery_passes() {
    let out = weyl(&["bicyclic", "verify-f2", "--window", "10"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_of(&out)["cases"].as_array().unwrap().len(), 4);
}

#[test]
fn avg_csv_has_checkpoints() {
    let out = weyl(&["avg", "--coeffs", "0,0.6180339887498949", "--n", "1e4", "--checkpoints", "1e3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "N,re,im,abs");
    assert!(lines[1].starts_with("1000,"));
    assert!(lines[2].starts_with("10000,"));
}

#[test]
fn avg_output_is_thread_invariant() {
    let args = ["avg", "--coeffs", "0,0,0.7071067811865476", "--n", "3e5", "--checkpoints", "1e5"];
    let one = weyl(&[&args[..], &["--threads", "1"]].concat());
    let four = weyl(&[&args[..], &["--threads", "4"]].concat());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn equidist_flags_rational_rotation() {
    let v = json_of(&weyl(&["equidist", "--coeffs", "0,1/2", "--n", "1000", "--bins", "10"]));
    assert_eq!(v["degenerate"], true);
}

#[test]
fn selftest_is_deterministic() {
    let a = weyl(&["selftest"]);
    let b = weyl(&["selftest"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8_lossy(&a.stdout).trim_end().ends_with("overall: PASS"));
}

#[test]
fn usage_and_io_errors_exit_two() {
    assert_eq!(weyl(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(weyl(&["finsgp", "solve-f1", "/no/such/table"]).status.code(), Some(2));
    assert_eq!(weyl(&["bicyclic", "mul", "1", "2"]).status.code(), Some(2));
}
