use serde_json::{json, Value};
use std::path::Path;
use std::process::Command;

fn small() -> Value {
    json!({
        "geometry": { "dimension": 2, "sides": [1, 1],
                      "faces": { "x0": "neumann", "x1": "neumann", "y0": "plate", "y1": "dirichlet" } },
        "params": { "c": 1, "b": 0.1, "k": 0.0, "rho": 1, "delta": 1, "beta": 0.1, "gamma": 1, "kappa": 1 },
        "basis": { "n_acoustic": 4, "n_plate": 3 },
        "time": { "T": 0.1, "dt": 0.01 },
        "initial": { "p0": [0.0, 1e-3] }
    })
}

fn run(dir: &Path, scenario: &Value, args: &[&str]) -> (i32, Value) {
    let path = dir.join("scenario.json");
    std::fs::write(&path, scenario.to_string()).unwrap();
    let out = dir.join("out");
    let status = Command::new(env!("CARGO_BIN_EXE_westplate"))
        .args(args)
        .arg("--scenario")
        .arg(&path)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    let manifest = std::fs::read_to_string(out.join("manifest.json")).unwrap();
    (status.code().unwrap(), serde_json::from_str(&manifest).unwrap())
}

#[test]
fn basis_info_lists_both_families() {
    let dir = tempfile::tempdir().unwrap();
    let (code, m) = run(dir.path(), &small(), &["basis-info"]);
    assert_eq!(code, 0);
    assert_eq!(m["status"], "ok");
    let csv = std::fs::read_to_string(dir.path().join("out/basis.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "index,lambda_or_mu,family");
    assert_eq!(lines.len(), 1 + 4 + 3);
    assert!(lines[5].starts_with("1,9.869604401089358,plate"));
}

#[test]
fn validation_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = small();
    s["params"]["k"] = json!(0.3);
    s["solver"] = json!({ "picard": { "M1": 2.0 } });
    let (code, m) = run(dir.path(), &s, &["simulate"]);
    assert_eq!(code, 2);
    assert_eq!(m["error"]["class"], "ConstraintError");
    assert_eq!(m["error"]["location"], "/solver/picard/M1");

    let mut s = small();
    s["extra"] = json!(1);
    let (code, m) = run(dir.path(), &s, &["simulate"]);
    assert_eq!(code, 2);
    assert_eq!(m["error"]["class"], "SchemaError");
}

#[test]
fn simulate_writes_the_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("dump");
    let (code, m) = run(dir.path(), &small(), &["simulate", "--mode", "paper", "--dump-system", dump.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(m["mode"], "paper-triangular");
    assert_eq!(m["outputs"], json!(["trajectory.csv", "energy.csv", "audit.json"]));
    let tr = std::fs::read_to_string(dir.path().join("out/trajectory.csv")).unwrap();
    assert_eq!(tr.lines().count(), 1 + 11 * 7);
    let dm: Value = serde_json::from_str(&std::fs::read_to_string(dump.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(dm["mode"], "paper-triangular");
    assert_eq!(dm["blocks"].as_array().unwrap().len(), 12);
    let wp = std::fs::read_to_string(dump.join("A_wp.csv")).unwrap();
    assert!(wp.lines().all(|l| l.split(',').all(|v| v == "0.0")));
}

#[test]
fn unmet_study_thresholds_exit_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = small();
    s["decay"] = json!({ "max_ratio": 1e-12 });
    let (code, m) = run(dir.path(), &s, &["decay"]);
    assert_eq!(code, 4);
    assert_eq!(m["thresholds_pass"], false);
    assert!(dir.path().join("out/decay.json").exists());
}

#[test]
fn study_preconditions_are_validation_errors() {
    let dir = tempfile::tempdir().unwrap();
    let (code, m) = run(dir.path(), &small(), &["mms"]);
    assert_eq!(code, 2);
    assert_eq!(m["error"]["location"], "/mms");
}
