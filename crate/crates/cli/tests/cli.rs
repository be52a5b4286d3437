use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fusion(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fusion")).args(args).output().expect("spawn fusion")
}

fn ok(args: &[&str]) -> Output {
    let out = fusion(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn json(args: &[&str]) -> Value {
    serde_json::from_slice(&ok(args).stdout).expect("json output")
}

fn csv_column(bytes: &[u8], name: &str) -> Vec<f64> {
    let mut rdr = csv::Reader::from_reader(bytes);
    let idx = rdr.headers().unwrap().iter().position(|h| h == name).unwrap_or_else(|| panic!("{name}"));
    rdr.records().map(|r| r.unwrap()[idx].parse().unwrap()).collect()
}

fn max(xs: &[f64]) -> f64 {
    xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

fn min(xs: &[f64]) -> f64 {
    xs.iter().cloned().fold(f64::INFINITY, f64::min)
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn antidip_defaults_have_visibility_two() {
    let out = ok(&["antidip"]);
    let p = csv_column(&out.stdout, "p_coinc");
    assert_eq!(p.len(), 101);
    assert!((max(&p) / min(&p) - 2.0).abs() < 1e-6);
    let header = String::from_utf8_lossy(&out.stdout).lines().next().unwrap().to_string();
    assert_eq!(header, "delta_tau_ps,p_coinc,expected_counts");
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("# config: "));
}

#[test]
fn antidip_peak_counts_and_mismatch_column() {
    let out = ok(&["antidip", "--n-av", "401", "--p0", "0.61", "--delta-lambda", "0.06"]);
    let counts = csv_column(&out.stdout, "expected_counts");
    assert!((max(&counts) - 80.7).abs() < 0.01, "{}", max(&counts));
    let matched = csv_column(&out.stdout, "p_coinc");
    let mismatch = csv_column(&out.stdout, "p_coinc_mismatch");
    assert!(max(&mismatch) < max(&matched));
}

#[test]
fn identical_seed_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let counts = dir.path().join("c.csv");
    for args in [
        vec!["antidip", "--poisson", "--n-av", "401", "--seed", "3"],
        vec!["simulate", "--input", "phi+", "--trials", "2000", "--seed", "3"],
    ] {
        assert_eq!(ok(&args).stdout, ok(&args).stdout, "{args:?}");
    }
    ok(&["simulate", "--input", "werner:0.8", "--trials", "2000", "--out", path(&counts)]);
    let args = ["tomo-state", "--counts", path(&counts), "--n-mc", "100", "--seed", "9"];
    let a = ok(&args).stdout;
    assert_eq!(a, ok(&args).stdout);
    let other = ok(&["tomo-state", "--counts", path(&counts), "--n-mc", "100", "--seed", "10"]).stdout;
    assert_ne!(a, other);
}

#[test]
fn out_flag_writes_file_only() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("h.json");
    let out = ok(&["higher-order", "--out", path(&file)]);
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    for k in ["n_bar", "eta", "gamma", "p0_limit", "fidelity_bound"] {
        assert!(v["result"].get(k).is_some(), "{k}");
    }
    assert_eq!(v["config"]["command"], "higher-order");
}

#[test]
fn truncated_count_file_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let full = dir.path().join("full.csv");
    let cut = dir.path().join("cut.csv");
    ok(&["simulate", "--trials", "500", "--out", path(&full)]);
    let text = std::fs::read_to_string(&full).unwrap();
    std::fs::write(&cut, &text[..text.len() / 2]).unwrap();
    for cmd in ["tomo-state", "tomo-process"] {
        let out = fusion(&[cmd, "--counts", path(&cut)]);
        assert!(!out.status.success());
        assert!(out.stdout.is_empty());
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.starts_with("error: "), "{err}");
        assert!(err.contains("cut.csv"), "{err}");
    }
}

#[test]
fn missing_files_and_bad_flags_exit_nonzero() {
    assert!(!fusion(&["tomo-state", "--counts", "/nonexistent/x.csv"]).status.success());
    assert!(!fusion(&["antidip", "--points", "1"]).status.success());
    assert!(!fusion(&["fuse", "--chi", "0.5,0.5,0.5,0.5"]).status.success());
    assert!(!fusion(&["higher-order", "--format", "csv"]).status.success());
}

#[test]
fn ideal_process_counts_give_ideal_chi() {
    let dir = tempfile::tempdir().unwrap();
    let counts = dir.path().join("p.csv");
    ok(&["simulate", "--mode", "process", "--trials", "4000", "--out", path(&counts)]);
    let v = json(&["tomo-process", "--counts", path(&counts), "--n-mc", "100"]);
    let chi = &v["result"]["chi_diag"];
    assert_eq!(chi["00"], 1.0);
    for k in ["zz", "xy", "xx"] {
        assert_eq!(chi[k], 0.0);
    }
}

#[test]
fn measured_style_process_counts_give_measured_process_fidelity() {
    let dir = tempfile::tempdir().unwrap();
    let counts = dir.path().join("p.csv");
    ok(&[
        "simulate", "--mode", "process", "--chi", "0.7425,0.2155,0.0165,0.0255", "--trials", "100000", "--out",
        path(&counts),
    ]);
    let v = json(&["tomo-process", "--counts", path(&counts), "--n-mc", "100"]);
    let fp = &v["result"]["process_fidelity"];
    assert!((fp["value"].as_f64().unwrap() - 0.743).abs() < 0.005, "{fp}");
    assert!(fp["±"].as_f64().unwrap() < 0.003);
}

#[test]
fn config_file_is_overridden_by_flags_and_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"seed": 11, "higher-order": {"n_bar": 0.1, "eta": 0.5}}"#).unwrap();
    let v = json(&["--config", path(&cfg), "higher-order", "--eta", "0.2"]);
    assert_eq!(v["config"]["seed"], 11);
    assert_eq!(v["config"]["params"]["n_bar"], 0.1);
    assert_eq!(v["config"]["params"]["eta"], 0.2);
    assert_eq!(v["result"]["eta"], 0.2);
    let v = json(&["--config", path(&cfg), "--seed", "4", "higher-order"]);
    assert_eq!(v["config"]["seed"], 4);
    assert_eq!(v["result"]["eta"], 0.5);

    std::fs::write(&cfg, r#"{"n_bar": 0.05}"#).unwrap();
    let v = json(&["--config", path(&cfg), "higher-order"]);
    assert_eq!(v["result"]["n_bar"], 0.05);
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"higher-order": {"nbar": 0.1}}"#).unwrap();
    let out = fusion(&["--config", path(&cfg), "higher-order"]);
    assert!(!out.status.success());
}

#[test]
fn numbers_have_at_most_twelve_significant_digits() {
    let v = json(&["chi-compose", "--delta-tau", "1"]);
    let chi00 = v["result"]["chi_total"]["chi_diag"]["00"].as_f64().unwrap();
    let expected = 0.5 * (1.0 + (-1.0f64).exp());
    assert!((chi00 - expected).abs() < 1e-11);
    let digits: String = format!("{chi00}").chars().filter(|c| c.is_ascii_digit()).collect();
    assert!(digits.trim_start_matches('0').len() <= 12, "{chi00}");
}

#[test]
fn fuse_plus_plus_gives_phi_plus_half_the_time() {
    let v = json(&["fuse"]);
    let r = &v["result"];
    assert_eq!(r["success_prob"], 0.5);
    assert_eq!(r["fidelity_phi_plus"], 1.0);
    let v = json(&["fuse", "--f", "0"]);
    assert_eq!(v["result"]["fidelity_phi_plus"], 0.5);
    assert_eq!(v["result"]["concurrence"], 0.0);
}

#[test]
fn fit_recovers_generating_visibility() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    ok(&[
        "antidip", "--poisson", "--n-av", "401000", "--p0", "0.61", "--start", "-4", "--stop", "4", "--points", "31",
        "--out", path(&data),
    ]);
    let v = json(&["fit", "--data", path(&data)]);
    let p0 = v["result"]["p0"].as_f64().unwrap();
    assert!((p0 - 0.61).abs() < 0.02, "{p0}");
    assert!((v["result"]["N_av"].as_f64().unwrap() / 401000.0 - 1.0).abs() < 0.01);
}

#[test]
fn pipeline_without_multi_pair_emission_is_perfect() {
    let v = json(&[
        "pipeline", "--n-bar", "0", "--n-mc", "100", "--counts-per-setting", "2000", "--process-trials", "2000",
    ]);
    let row = &v["result"]["rows"][0];
    for k in ["F", "C", "P", "F_P", "C_E"] {
        assert_eq!(row["model"][k], 1.0, "{k}");
    }
    assert_eq!(v["result"]["measured"].as_array().unwrap().len(), 5);
}
