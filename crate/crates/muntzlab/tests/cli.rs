use std::process::{Command, Output};

fn muntzlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_muntzlab"))
        .args(args)
        .env_remove("MUNTZLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(o: &Output) -> Vec<Vec<String>> {
    csv::Reader::from_reader(o.stdout.as_slice())
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect()
}

fn value(rows: &[Vec<String>], key: &str) -> String {
    rows.iter().find(|r| r[0] == key).unwrap_or_else(|| panic!("no {key}"))[1].clone()
}

#[test]
fn bump_info() {
    let o = muntzlab(&["kernel-info", "--kernel", "bump"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&o);
    assert_eq!(value(&rows, "is_good"), "true");
    let integral: f64 = value(&rows, "integral").parse().unwrap();
    let l2: f64 = value(&rows, "l2_sq").parse().unwrap();
    assert!((integral - 0.5).abs() < 1e-15);
    assert!((l2 - 13.0 / 35.0).abs() < 1e-15);
}

#[test]
fn chi_is_not_good() {
    let o = muntzlab(&["kernel-info", "--kernel", "chi", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["report"]["is_good"], false);
    assert!(v["nu_half_fprime"].is_null());
}

#[test]
fn overlapping_kernel_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("overlap.json");
    std::fs::write(
        &path,
        r#"{"name":"bad","pieces":[{"from":0,"to":1,"coeffs":[1]},{"from":0.5,"to":2,"coeffs":[0]}]}"#,
    )
    .unwrap();
    let o = muntzlab(&["kernel-info", "--kernel", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(muntzlab(&["nb-distance", "--N", "0"]).status.code(), Some(2));
    assert_eq!(muntzlab(&["scan-zeros", "--sigma", "0.4"]).status.code(), Some(2));
    assert_eq!(muntzlab(&["verify", "--sigma", "1.2"]).status.code(), Some(2));
    assert_eq!(muntzlab(&["muntz-eval", "--x", "-1"]).status.code(), Some(2));
    assert_eq!(muntzlab(&["verify", "--kernel", "hat"]).status.code(), Some(2));
}

#[test]
fn verify_default_passes() {
    let o = muntzlab(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 25);
    assert!(rows.iter().all(|r| r[4].parse::<f64>().unwrap() < 1e-4));
}

#[test]
fn verify_impossible_tolerance_exits_one() {
    let o = muntzlab(&["verify", "--tol", "1e-15"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL"));
}

#[test]
fn verify_chi_runs_proto_form() {
    let o = muntzlab(&["verify", "--kernel", "chi", "--sigma", "0.6", "--t", "0,3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("proto"));
}

#[test]
fn classic_distance_decreases() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nb.csv");
    let o = muntzlab(&["nb-distance", "--family", "classic", "--N", "8", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows: Vec<Vec<String>> = csv::Reader::from_path(&out)
        .unwrap()
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    let n: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(n, ["1", "2", "4", "8"]);
    let d: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
    assert!(d.iter().all(|&x| x >= 0.0));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("nb.json")).unwrap()).unwrap();
    assert_eq!(json["coefficients"].as_array().unwrap().len(), 4);
    assert_eq!(json["coefficients"][3].as_array().unwrap().len(), 8);
}

#[test]
fn planted_zero_is_found() {
    let o = muntzlab(&[
        "scan-zeros",
        "--kernel",
        "bump - 1.681792830507429*bump@2",
        "--sigma",
        "0.75",
        "--t-min",
        "-4",
        "--t-max",
        "4",
        "--step",
        "0.05",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let c = v["candidate_zeros"].as_array().unwrap();
    assert_eq!(c.len(), 1);
    assert!(c[0]["t"].as_f64().unwrap().abs() < 1e-3);
}

#[test]
fn muntz_eval_at_two() {
    let o = muntzlab(&["muntz-eval", "--kernel", "bump", "--x", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&o);
    assert_eq!(rows.len(), 1);
    let direct: f64 = rows[0][1].parse().unwrap();
    assert!((direct + 0.25).abs() < 1e-14);
    assert_eq!(rows[0][4], "ok");
}

#[test]
fn muntz_eval_chi_and_empty_grid() {
    let o = muntzlab(&["muntz-eval", "--kernel", "chi", "--x", "0.4"]);
    let rows = csv_rows(&o);
    assert!((rows[0][1].parse::<f64>().unwrap() + 0.5).abs() < 1e-14);
    assert_eq!(rows[0][2], "n/a");
    let o = muntzlab(&["muntz-eval", "--log-grid", "1,10,0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 1);
}

#[test]
fn autocorrelation_of_rho1() {
    let o = muntzlab(&["autocorr", "--of", "rho1", "--ratios", "1,1/2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&o);
    let a1: f64 = rows[0][3].parse().unwrap();
    // ∫₀¹ {1/t}² dt = ln 2π − γ − 1, plus ∫₁^∞ t⁻² dt = 1
    let want = (2.0 * std::f64::consts::PI).ln() - 0.577_215_664_901_532_9;
    assert!((a1 - want).abs() < 1e-6, "{a1} vs {want}");
}

#[test]
fn config_file_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"kernel":"flat-bump","threads":2,"output":{"format":"json"}}"#).unwrap();
    let o = muntzlab(&["kernel-info", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["kernel"]["name"], "flat-bump");
    std::fs::write(&cfg, r#"{"unknown":1}"#).unwrap();
    assert_eq!(muntzlab(&["kernel-info", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}
