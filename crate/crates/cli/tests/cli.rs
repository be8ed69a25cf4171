use std::process::{Command, Output};

use serde_json::Value;

fn starval(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_starval")).args(args).env_remove("STARVAL_SEED").output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn csv_rows(out: &Output) -> Vec<Vec<String>> {
    String::from_utf8(out.stdout.clone()).unwrap().lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn eval_ball_is_theta_of_radius() {
    let out = starval(&["eval", "--theta", "power:3", "--body", "ball:2", "--grid", "circle:64"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["results"][0]["value"], 8.0);
}

#[test]
fn eval_origin_is_zero() {
    let out = starval(&["eval", "--theta", "power:2", "--body", "origin"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["results"][0]["value"], 0.0);
}

#[test]
fn eval_ellipse_area_identity() {
    let out = starval(&["eval", "--theta", "power:2", "--body", "ellipsoid:2,1", "--grid", "circle:2048"]);
    let v = json(&out)["results"][0]["value"].as_f64().unwrap();
    assert!((v - 2.0).abs() <= 1e-6, "{v}");
}

#[test]
fn eval_several_bodies_as_csv() {
    let out = starval(&["eval", "--theta", "power:1", "--body", "ball:1", "--body", "ball:0.5", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "body,value\nball:1,1\nball:0.5,0.5\n");
}

#[test]
fn exit_codes() {
    assert_eq!(starval(&["eval", "--theta", "power:2", "--body", "ball:3", "--domain", "2"]).status.code(), Some(1));
    assert_eq!(starval(&["eval", "--theta", "cosine:1", "--body", "ball:1"]).status.code(), Some(2));
    assert_eq!(starval(&["eval", "--theta", "power:1", "--body", "cube:1"]).status.code(), Some(2));
    assert_eq!(starval(&["eval", "--body", "ball:1"]).status.code(), Some(2));
    assert_eq!(starval(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(starval(&["check", "identity", "--theta", "sine:1,1", "--pairs", "5", "--tol=-1"]).status.code(), Some(1));
}

#[test]
fn decompose_power_has_no_negative_part() {
    let out = starval(&["decompose", "--theta", "power:2", "--domain", "3", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&out);
    assert!(rows.len() > 100);
    assert!(rows.iter().all(|r| r[3] == "0"));
}

#[test]
fn decompose_sine_caps_positive_part() {
    let out = starval(&["decompose", "--theta", "sine:1,1", "--domain", "6.2832", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    for r in csv_rows(&out) {
        let l: f64 = r[0].parse().unwrap();
        let plus: f64 = r[2].parse().unwrap();
        let expected = if l <= std::f64::consts::FRAC_PI_2 { l.sin() } else { 1.0 };
        assert!((plus - expected).abs() <= 1e-9, "λ={l}: {plus}");
    }
}

#[test]
fn decompose_neg_power_swaps_parts() {
    let out = starval(&["decompose", "--theta", "neg-power:1", "--domain", "2", "--format", "csv"]);
    for r in csv_rows(&out) {
        assert_eq!(r[2], "0");
        assert_eq!(r[3], r[0]);
    }
}

#[test]
fn decompose_report_and_table_file() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("table.csv");
    let out = starval(&["decompose", "--theta", "sine:2,1", "--domain", "3", "--table", table.to_str().unwrap()]);
    let report = json(&out);
    assert_eq!(report["passed"], true);
    assert_eq!(report["report"]["Vplus_at_origin"], 0.0);
    assert_eq!(report["report"]["flags"]["invariance"], true);
    assert!(std::fs::read_to_string(table).unwrap().starts_with("lambda,theta,theta_plus,theta_minus\n"));
}

#[test]
fn check_identity_passes() {
    let out = starval(&["check", "identity", "--theta", "sine:1,1", "--pairs", "100"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["check"], "identity");
    assert_eq!(r["seed"], 0);
    assert_eq!(r["result"]["passed"], true);
    assert!(r["result"]["properties"][0]["value"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn check_oracle_within_ladder_bound() {
    let out = starval(&["check", "oracle", "--theta", "sine:1,1", "--nodes", "6", "--levels", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let rows = r["table"].as_array().unwrap();
    assert_eq!(rows.len(), 50);
    assert!(rows.iter().all(|row| row["disagreement"].as_f64().unwrap() <= row["bound"].as_f64().unwrap()));
}

#[test]
fn check_rims_decays() {
    let out = starval(&["check", "rims", "--theta", "sine:1,1", "--point-base"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = json(&out)["table"].as_array().unwrap().clone();
    let first = rows[0]["sup_abs_v"].as_f64().unwrap();
    let last = rows[rows.len() - 1]["sup_abs_v"].as_f64().unwrap();
    assert!(last < first);
}

#[test]
fn remaining_suites_pass() {
    for args in [
        &["check", "invariance", "--theta", "sine:1,1"][..],
        &["check", "bounded", "--theta", "power:2", "--lambda", "2", "--trials", "1000"],
        &["check", "continuity", "--theta", "sine:1,1"],
        &["check", "split"],
    ] {
        let out = starval(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(json(&out)["result"]["passed"], true);
    }
}

#[test]
fn reports_are_byte_identical_and_seeded() {
    let args = ["check", "bounded", "--theta", "sine:1,1", "--trials", "200", "--seed", "17"];
    let a = starval(&args);
    let b = starval(&args);
    assert_eq!(a.stdout, b.stdout);
    let c = starval(&["check", "bounded", "--theta", "sine:1,1", "--trials", "200", "--seed", "18"]);
    assert_ne!(a.stdout, c.stdout);
    let env = Command::new(env!("CARGO_BIN_EXE_starval"))
        .args(&args[..6])
        .env("STARVAL_SEED", "17")
        .output()
        .unwrap();
    assert_eq!(env.stdout, a.stdout);
}

#[test]
fn config_file_and_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    let out_path = dir.path().join("report.json");
    std::fs::write(&config, r#"{"command": "check identity", "args": {"theta": "power:2", "pairs": 10}, "seed": 6}"#).unwrap();
    let out = starval(&["--config", config.to_str().unwrap(), "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(report["seed"], 6);
    assert_eq!(report["params"]["pairs"], 10);
    let overridden = starval(&["--config", config.to_str().unwrap(), "--seed", "2"]);
    assert_eq!(json(&overridden)["seed"], 2);
    std::fs::write(&config, r#"{"command": "check identity", "unknown": 1}"#).unwrap();
    assert_eq!(starval(&["--config", config.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn grid_body_rims_split_tables() {
    let grid = starval(&["grid", "--grid", "latlong:2,4"]);
    let g = json(&grid);
    assert_eq!(g["nodes"].as_array().unwrap().len(), 8);
    let body = starval(&["body", "--body", "ball:1.5", "--grid", "circle:3"]);
    assert_eq!(json(&body)["values"], serde_json::json!([1.5, 1.5, 1.5]));
    let rims = starval(&["rims", "--theta", "sine:1,1", "--format", "csv"]);
    assert!(String::from_utf8(rims.stdout).unwrap().starts_with("omega,sup_abs_V,band_measure\n"));
    let split = starval(&["split", "--grid", "circle:8", "--format", "csv"]);
    let text = String::from_utf8(split.stdout).unwrap();
    assert_eq!(text.lines().count(), 9);
    assert!(text.starts_with("node,phi_0,phi_1\n"));
}
