use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn anholo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anholo")).args(args).output().expect("binary runs")
}

fn run_config(name: &str) -> (i32, Value, String) {
    let path = configs().join(name);
    let out = anholo(&["run", path.to_str().unwrap()]);
    let stdout = String::from_utf8(out.stdout).unwrap();
    let value = serde_json::from_str(&stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), value, String::from_utf8(out.stderr).unwrap())
}

fn task<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["tasks"].as_array().unwrap().iter().find(|t| t["task"] == name).unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

fn write_temp(text: &str) -> tempfile::NamedTempFile {
    let f = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(f.path(), text).unwrap();
    f
}

#[test]
fn flat_lagrangian_has_zero_curvature() {
    let (code, r, _) = run_config("flat_lagrangian.json");
    assert_eq!(code, 0);
    let block = &task(&r, "curvature")["results"][0];
    for key in ["R_i_hjk", "R_a_bjk", "P_i_jka", "P_c_bka", "S_i_jbc", "S_a_bcd"] {
        let mut stack = vec![&block[key]];
        while let Some(v) = stack.pop() {
            match v {
                Value::Array(a) => stack.extend(a),
                other => assert_eq!(num(other), 0.0, "{key}"),
            }
        }
    }
    assert_eq!(r["summary"]["status"], "pass");
}

#[test]
fn sphere_metric_spot_value() {
    let (code, r, _) = run_config("sphere_lagrangian.json");
    assert_eq!(code, 0);
    let block = &task(&r, "hessian")["results"][0];
    assert_eq!(block["probe"], 0);
    assert!((num(&block["at"]["x"][0]) - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    assert!((num(&block["g"][1][1]) - 0.5).abs() < 1e-12);
    let n = &task(&r, "nconnection")["results"][0]["N_ia"];
    assert!((num(&n[1][0]) + 0.5).abs() < 1e-12);
}

#[test]
fn malformed_expression_is_a_config_error() {
    let f = write_temp(r#"{"dims":[2,2],"source":{"kind":"lagrangian","expr":"y1^2 + *y2"},"tasks":["hessian"]}"#);
    let out = anholo(&["run", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("source.expr"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn unknown_task_and_missing_file_are_config_errors() {
    let f = write_temp(r#"{"dims":[1,1],"source":{"kind":"lagrangian","expr":"y1^2"},"tasks":["cohomology"]}"#);
    assert_eq!(anholo(&["run", f.path().to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(anholo(&["run", "/nonexistent/config.json"]).status.code(), Some(1));
    let f = write_temp(r#"{"dims":[1,1],"source":{"kind":"lagrangian","expr":"y1^2"},"tasks":["hessian"]}"#);
    assert_eq!(anholo(&["run", f.path().to_str().unwrap(), "--tol-scale", "-1"]).status.code(), Some(1));
}

#[test]
fn failed_checks_exit_two_and_later_tasks_still_run() {
    let (code, r, _) = run_config("anholonomic_metric.json");
    assert_eq!(code, 2);
    assert_eq!(task(&r, "distortion")["status"], "fail");
    assert_eq!(task(&r, "spin")["status"], "pass");
    // a task error is recorded the same way
    let f =
        write_temp(r#"{"dims":[2,2],"source":{"kind":"lagrangian","expr":"y1^2 + y2^2"},"tasks":["hessian","dirac"]}"#);
    let out = anholo(&["run", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(task(&r, "hessian")["status"], "error");
    assert_eq!(task(&r, "dirac")["status"], "error");
}

#[test]
fn reports_are_byte_identical_and_out_matches_stdout() {
    let path = configs().join("sphere_lagrangian.json");
    let p = path.to_str().unwrap();
    let a = anholo(&["run", p]).stdout;
    let b = anholo(&["run", p]).stdout;
    assert_eq!(a, b);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    assert_eq!(anholo(&["run", p, "--out", out.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(std::fs::read(&out).unwrap(), a);
    let pretty = anholo(&["run", p, "--pretty"]).stdout;
    let v1: Value = serde_json::from_slice(&a).unwrap();
    let v2: Value = serde_json::from_slice(&pretty).unwrap();
    assert_eq!(v1, v2);
    let seeded: Value = serde_json::from_slice(&anholo(&["run", p, "--seed", "5"]).stdout).unwrap();
    assert_eq!(seeded["seed"], 5);
}

#[test]
fn floats_use_twelve_digit_scientific_notation() {
    let path = configs().join("sphere_lagrangian.json");
    let text = String::from_utf8(anholo(&["run", path.to_str().unwrap()]).stdout).unwrap();
    assert!(text.contains("\"g\":[[1.000000000000e+00,0.000000000000e+00],[0.000000000000e+00,5.000000000000e-01]]"));
}

/// Every number under `tasks` sits inside a block naming its probe or location.
fn assert_located(v: &Value, located: bool, path: &str) {
    match v {
        Value::Number(_) => assert!(located, "orphan number at {path}"),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, x)| assert_located(x, located, &format!("{path}[{i}]"))),
        Value::Object(o) => {
            let here = located || o.contains_key("probe") || o.contains_key("location");
            for (k, x) in o {
                assert_located(x, here, &format!("{path}.{k}"));
            }
        }
        _ => {}
    }
}

#[test]
fn no_orphan_numbers() {
    for name in [
        "sphere_lagrangian.json",
        "anholonomic_metric.json",
        "flat_torus_dirac.json",
        "monopole.json",
        "disk_cover_run.json",
    ] {
        let (_, r, _) = run_config(name);
        for t in r["tasks"].as_array().unwrap() {
            assert_located(&t["results"], false, name);
            assert_located(&t["checks"], false, name);
        }
    }
}

#[test]
fn cech_and_chern_subcommands() {
    let circle = configs().join("circle_z2.json");
    let out = anholo(&["cech", circle.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(task(&r, "cohomology")["results"][0]["h"], serde_json::json!([1, 1, 0]));

    let mono = configs().join("monopole.json");
    let out = anholo(&["chern", mono.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    let c1 = &task(&r, "chern")["results"][0]["chern_forms"][0];
    assert!((num(&c1["integral"]) - 2.0).abs() < 1e-9);

    let dirac = configs().join("flat_torus_dirac.json");
    let out = anholo(&["dirac", dirac.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["tasks"].as_array().unwrap().len(), 2);
}

#[test]
fn selftest_passes_with_at_least_forty_checks() {
    let out = anholo(&["selftest"]);
    assert_eq!(out.status.code(), Some(0));
    let table = String::from_utf8(out.stdout).unwrap();
    let rows = table.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).count();
    assert!(rows >= 40);
    let json = anholo(&["selftest", "--json"]);
    let v: Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["passed"], v["total"]);
    assert_eq!(anholo(&["selftest", "--json"]).stdout, json.stdout);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(anholo(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(anholo(&["run"]).status.code(), Some(1));
    assert_eq!(anholo(&["--help"]).status.code(), Some(0));
}
