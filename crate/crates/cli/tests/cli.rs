//! End-to-end runs of the `liouville` binary: exit codes, output layout, determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn liouville(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_liouville"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = liouville(&["validate", "--spec", config("ellipsoid_n3.toml").to_str().unwrap()], dir.path());
    assert_eq!(code(&ok), 0);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("validate/condition_report.json")).unwrap()).unwrap();
    assert_eq!(report["condition"]["passes"], true);

    let sphere = liouville(&["validate", "--spec", config("sphere_n2.json").to_str().unwrap(), "--id", "s"], dir.path());
    assert_eq!(code(&sphere), 0);
    assert!(String::from_utf8_lossy(&sphere.stderr).contains("warning"));

    let inverse = liouville(&["validate", "--spec", config("inverse_n3.json").to_str().unwrap(), "--id", "inv"], dir.path());
    assert_eq!(code(&inverse), 1);
    assert!(dir.path().join("inv/condition_report.json").exists());

    let missing = liouville(&["validate", "--spec", "/nonexistent/spec.json"], dir.path());
    assert_eq!(code(&missing), 2);

    let corrupt = dir.path().join("corrupt.json");
    fs::write(&corrupt, "{\"a\": [3, 2, 1], \"profile\": ").unwrap();
    assert_eq!(code(&liouville(&["validate", "--spec", corrupt.to_str().unwrap()], dir.path())), 2);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&liouville(&["frobnicate"], dir.path())), 2);
    let spec = config("ellipsoid_n2.json");
    let wrong_u = liouville(&["trace", "--spec", spec.to_str().unwrap(), "--u", "0.1,0.2"], dir.path());
    assert_eq!(code(&wrong_u), 2);
    let wrong_i = liouville(&["conjugate", "--spec", spec.to_str().unwrap(), "--i", "3"], dir.path());
    assert_eq!(code(&wrong_i), 2);
}

#[test]
fn trace_writes_csv_and_ledger() {
    let dir = tempfile::tempdir().unwrap();
    let spec = config("ellipsoid_n3.toml");
    let o = liouville(&["trace", "--spec", spec.to_str().unwrap(), "--u", "0.4,1.1", "--horizon", "5", "--dt", "0.5"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("trace/trace.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,x1,x2,x3,xi1,xi2,xi3,f1,f2,f3,y1,y2");
    assert_eq!(lines.count(), 11);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("trace/report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert!(report["conservation"]["max_drift_f"].as_array().unwrap().iter().all(|v| v.as_f64().unwrap() < 1e-8));
    assert!(report["reverse_error"].as_f64().unwrap() < 1e-7);
    assert!(report["orbit_quadrature"]["degree0_residual"].as_f64().unwrap().abs() < 1e-6);
}

#[test]
fn conjugate_outputs_and_labels() {
    let dir = tempfile::tempdir().unwrap();
    let spec = config("ellipsoid_n2.json");
    let o = liouville(&["conjugate", "--spec", spec.to_str().unwrap(), "--grid", "64", "--id", "n2"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["config.json", "field_1.csv", "locus_1.obj", "samples_1.json", "report.json"] {
        assert!(dir.path().join("n2").join(f).exists(), "{f}");
    }
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("n2/report.json")).unwrap()).unwrap();
    assert_eq!(report["result"]["cusp_count"]["count"], 4);
    let obj = fs::read_to_string(dir.path().join("n2/locus_1.obj")).unwrap();
    assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 64);
    assert!(obj.lines().any(|l| l.starts_with("l ")));

    let sphere = config("sphere_n2.json");
    let o = liouville(&["conjugate", "--spec", sphere.to_str().unwrap(), "--grid", "16", "--id", "sphere"], dir.path());
    assert_eq!(code(&o), 0);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("sphere/report.json")).unwrap()).unwrap();
    assert!(report["result"]["sphere"]["locus_diameter"].as_f64().unwrap() < 1e-5);
}

#[test]
fn conjugate_n3_labels_d4_candidates() {
    let dir = tempfile::tempdir().unwrap();
    let spec = config("ellipsoid_n3.toml");
    let o = liouville(&["conjugate", "--spec", spec.to_str().unwrap(), "--grid", "12", "--i", "2", "--j", "2"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let samples = fs::read_to_string(dir.path().join("conjugate/samples_2.json")).unwrap();
    assert!(samples.contains("D4PlusCandidate"));
    assert!(!dir.path().join("conjugate/field_1.csv").exists());
}

#[test]
fn suite_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("suite_small.toml");
    for id in ["a", "b"] {
        let o = liouville(&["suite", "--config", cfg.to_str().unwrap(), "--seed", "5", "--id", id], dir.path());
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    }
    let a = fs::read(dir.path().join("a/report.json")).unwrap();
    let b = fs::read(dir.path().join("b/report.json")).unwrap();
    assert_eq!(a, b);

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "seed = \"zero\"\n").unwrap();
    assert_eq!(code(&liouville(&["suite", "--config", bad.to_str().unwrap()], dir.path())), 2);
}
