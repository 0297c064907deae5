use std::path::Path;
use std::process::{Command, Output};

fn haarconc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_haarconc")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn read_json(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn bound_calc_unit_inputs() {
    let o = haarconc(&["bound-calc", "--A", "1", "--B", "1", "--a", "1", "--b", "1"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("C = 2.968"), "{text}");
    assert!(text.contains("variance_bound = 1.484"), "{text}");
}

#[test]
fn bound_calc_rejects_bad_inputs() {
    let o = haarconc(&["bound-calc", "--A", "1", "--B", "3", "--a", "1", "--b", "1"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn identity_suite_inline_flags() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = haarconc(&["identity-suite", "--n", "4", "--seed", "7", "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(dir.path());
    assert!(r["estimates"]["max_stein_residual"].as_f64().unwrap() <= 1e-9);
    assert!(r["estimates"]["max_variance_residual"].as_f64().unwrap() <= 1e-9);
    assert!(dir.path().join("identity_residuals.csv").exists());
}

#[test]
fn missing_config_is_a_usage_error() {
    let o = haarconc(&["matrix", "--config", "/nonexistent/cfg.json"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot read"));
}

#[test]
fn invalid_config_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"kind":"matrix","n":4,"seed":1,"spectrum_M":[1,2]}"#).unwrap();
    let o = haarconc(&["matrix", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("spectrum_M"));
}

#[test]
fn kind_must_match_command() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"kind":"identity-suite","n":3,"seed":1}"#).unwrap();
    let o = haarconc(&["matrix", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&haarconc(&[])), 1);
    assert_eq!(code(&haarconc(&["matrix", "--bogus"])), 1);
    // no seed anywhere
    assert_eq!(code(&haarconc(&["matrix", "--n", "4"])), 1);
}

#[test]
fn statistical_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"kind":"matrix","n":8,"seed":1,"replicates":600,"kappa":1e-4,"x_grid":[0.5],"t_grid":[]}"#,
    )
    .unwrap();
    let o = haarconc(&["matrix", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL n=8/variance/x=0.5"));
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"kind":"finite-group","n":6,"seed":1,"num_functions":1}"#).unwrap();
    let out = dir.path().join("out");
    let o = haarconc(&[
        "finite-group",
        "--config",
        cfg.to_str().unwrap(),
        "--n",
        "4",
        "--replicates",
        "500",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&out);
    assert_eq!(r["config_echo"]["n"], 4);
    assert_eq!(r["config_echo"]["k_max"], 160);
    assert_eq!(r["environment"]["replicates"], 500);
}

#[test]
fn mixing_curve_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = haarconc(&["mixing-curve", "--group", "symmetric", "--n", "4", "--seed", "0", "--out", out]);
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(dir.path().join("mixing_curve.csv")).unwrap();
    assert!(csv.starts_with("k,value,stderr\n0,"));
}
