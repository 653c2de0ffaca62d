use std::path::{Path, PathBuf};

use d2d_hcn::cli::run_cli;
use d2d_hcn::harness::SweepSpec;

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["d2d-hcn"];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_cli(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

#[test]
fn run_is_deterministic() {
    let args = ["run", "--cellular", "1", "--d2d", "1", "--scheme", "cg", "--seed", "7"];
    let (c1, o1, _) = cli(&args);
    let (c2, o2, _) = cli(&args);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(o1, o2);
    assert!(o1.contains("system sum rate"));
}

#[test]
fn run_writes_json_for_every_scheme() {
    let dir = tempfile::tempdir().unwrap();
    for scheme in ["cg", "fmc", "rc", "ccg", "fcc", "os"] {
        let out = dir.path().join(format!("{scheme}.json"));
        let (code, _, err) = cli(&["run", "--cellular", "2", "--d2d", "5", "--scheme", scheme, "--seed", "3", "--out", out.to_str().unwrap()]);
        assert_eq!(code, 0, "{err}");
        let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
        assert_eq!(doc["partition"]["assignment"].as_array().unwrap().len(), 5);
        assert!(doc["report"]["system_sum_rate"].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn cellular_users_sweep_shape() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("cellular_users.json");
    let (code, _, err) = cli(&["sweep", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--trials", "2", "--threads", "2"]);
    assert_eq!(code, 0, "{err}");
    let csv = std::fs::read_to_string(dir.path().join("cellular_users/results.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "param_value,scheme,mean_rate_bps,std_rate_bps,trials,mean_switches");
    assert_eq!(lines.len(), 1 + 15 * 5);
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("cellular_users/meta.json")).unwrap()).unwrap();
    assert_eq!(meta["spec"]["trials_per_point"], 2);
}

#[test]
fn traces_are_written_per_trial() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("convergence.json");
    let (code, _, err) = cli(&["sweep", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--trials", "3", "--traces"]);
    assert_eq!(code, 0, "{err}");
    let traces = std::fs::read_dir(dir.path().join("convergence/traces")).unwrap().count();
    assert_eq!(traces, 11 * 3);
}

#[test]
fn oracle_refuses_over_budget() {
    let (code, _, err) = cli(&["oracle", "--cellular", "2", "--d2d", "20"]);
    assert_eq!(code, 2);
    assert!(err.contains("3486784401"), "{err}");
    let (code, out, _) = cli(&["oracle", "--cellular", "2", "--d2d", "6", "--seed", "1"]);
    assert_eq!(code, 0);
    assert!(out.contains("evaluated 729 partitions"));
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cli(&["run", "--bogus"]).0, 1);
    assert_eq!(cli(&["frobnicate"]).0, 1);
    assert_eq!(cli(&["run", "--scheme", "xyz"]).0, 1);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let (code, _, err) = cli(&["sweep", "--config", bad.to_str().unwrap(), "--out", "x"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("config error"));
    std::fs::write(&bad, r#"{"num_cellular": 2, "typo_field": 1}"#).unwrap();
    assert_eq!(cli(&["run", "--config", bad.to_str().unwrap()]).0, 1);
    assert_eq!(cli(&["sweep", "--config", "/nonexistent.json", "--out", "x"]).0, 1);
    assert_eq!(cli(&["--help"]).0, 0);
}

#[test]
fn params_config_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("p.json");
    std::fs::write(&cfg, r#"{"num_cellular": 3, "num_d2d": 4, "blockage_beta": 0.05}"#).unwrap();
    let (code, out, _) = cli(&["run", "--config", cfg.to_str().unwrap(), "--d2d", "6", "--scheme", "fmc"]);
    assert_eq!(code, 0);
    assert!(out.contains("cellular users: 3, d2d pairs: 6"));
}

#[test]
fn shipped_configs_round_trip() {
    let mut n = 0;
    for entry in std::fs::read_dir(configs()).unwrap() {
        let text = std::fs::read_to_string(entry.unwrap().path()).unwrap();
        let spec = SweepSpec::from_json(&text).unwrap();
        spec.validate().unwrap();
        assert_eq!(SweepSpec::from_json(&spec.to_json().unwrap()).unwrap(), spec);
        n += 1;
    }
    assert!(n >= 10);
}

#[test]
fn validate_reports_all_passing() {
    let (code, out, err) = cli(&["validate", "--instances", "25", "--seed", "4"]);
    assert_eq!(code, 0, "{out}{err}");
    assert_eq!(out.lines().filter(|l| l.starts_with("PASS")).count(), 6);
}
