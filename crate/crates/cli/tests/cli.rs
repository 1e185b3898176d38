use std::fs;
use std::process::{Command, Output};

fn csbp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_csbp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

#[test]
fn simulate_then_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let sim = csbp(&["simulate", "--out", out, "--paths", "2", "--steps", "4", "--seed", "9"]);
    assert!(sim.status.success(), "{}", text(&sim.stderr));
    let csv = fs::read_to_string(dir.path().join("trajectories.csv")).unwrap();
    assert!(csv.starts_with("path_id,step_index,time,value"));
    assert_eq!(csv.lines().count(), 1 + 2 * 5);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["n_paths"], 2);
    assert_eq!(manifest["seed"], 9);

    let fit_dir = dir.path().join("fit");
    let input = dir.path().join("trajectories.csv");
    let est = csbp(&[
        "estimate",
        "--input",
        input.to_str().unwrap(),
        "--out",
        fit_dir.to_str().unwrap(),
        "--grid",
        "1.4,1.5,1.6",
    ]);
    assert!(est.status.success(), "{}", text(&est.stderr));
    let estimates = fs::read_to_string(fit_dir.join("estimates.csv")).unwrap();
    assert!(estimates.starts_with("path_id,gamma,beta,alpha,loglik,converged"));
    assert_eq!(estimates.lines().count(), 3);
    let fits = fs::read_to_string(fit_dir.join("fits.csv")).unwrap();
    assert_eq!(fits.lines().count(), 1 + 2 * 3);
}

#[test]
fn simulation_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = csbp(&["simulate", "--out", d.path().to_str().unwrap(), "--paths", "3", "--steps", "3"]);
        assert!(o.status.success());
    }
    let read = |d: &tempfile::TempDir| fs::read(d.path().join("trajectories.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn scan_writes_curve() {
    let dir = tempfile::tempdir().unwrap();
    let o = csbp(&["scan-stability", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    assert!(text(&o.stdout).contains("refused"));
    let curve = fs::read_to_string(dir.path().join("a_curve.csv")).unwrap();
    assert!(curve.starts_with("beta,alpha,modulus,a,refused"));
}

#[test]
fn strict_scan_exits_with_instability_code() {
    let o = csbp(&["scan-stability", "--strict"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn unstable_simulation_exits_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let o = csbp(&["simulate", "--out", dir.path().to_str().unwrap(), "--alpha", "1.1", "--paths", "1", "--steps", "1"]);
    assert_eq!(o.status.code(), Some(3), "{}", text(&o.stderr));
}

#[test]
fn bad_configuration_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("plan.json");
    fs::write(&config, r#"{"delta": -1.0}"#).unwrap();
    let o = csbp(&["simulate", "--out", dir.path().to_str().unwrap(), "--config", config.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", text(&o.stderr));

    let o = csbp(&["simulate", "--out", dir.path().to_str().unwrap(), "--alpha", "2.5"]);
    assert_eq!(o.status.code(), Some(2));

    let o = csbp(&["simulate", "--out", dir.path().to_str().unwrap(), "--grid", "1.5,1.4"]);
    assert_eq!(o.status.code(), Some(2));

    let o = csbp(&["experiment", "no-such-study"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_output_directory_is_a_config_error() {
    let o = csbp(&["simulate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stderr).contains("--out"));
}
