use std::collections::HashMap;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

use valign::config::{load_config, ConfigError, RawConfig};
use valign::output::{compare_results, embedded_hash, CompareError};
use valign::run::{manifest_path_for, run};

fn valign(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_valign"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

/// `(agent, row, col) -> (mean, std_error)` from a sweep CSV.
fn parse_sweep(csv: &str) -> HashMap<(String, String, String), (f64, f64)> {
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# manifest_sha256="));
    let header: Vec<_> = lines.next().unwrap().split(',').collect();
    assert_eq!(&header[2..], ["agent", "value", "mean", "std_error", "n_paths", "path_length"]);
    lines
        .map(|l| {
            let f: Vec<_> = l.split(',').collect();
            (
                (f[2].to_string(), f[0].to_string(), f[1].to_string()),
                (f[4].parse().unwrap(), f[5].parse().unwrap()),
            )
        })
        .collect()
}

#[test]
fn sweep_random_gain_matrices_are_transposed() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("fig3.csv");
    let o = valign(&[
        "--mode", "sweep-random", "--value-alpha", "gain", "--value-beta", "gain",
        "--grid-points", "6", "--paths", "2000", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&out);
    let m = parse_sweep(&csv);
    assert_eq!(m.len(), 2 * 36);
    for ((agent, pa, pb), (mean, se)) in &m {
        if agent == "alpha" {
            let (tm, tse) = m[&("beta".to_string(), pb.clone(), pa.clone())];
            assert!((mean - tm).abs() <= 4.0 * se.hypot(tse) + 1e-9, "({pa},{pb})");
        }
    }

    let manifest = std::fs::read(manifest_path_for(&out)).unwrap();
    assert_eq!(embedded_hash(&csv).unwrap(), sha256_hex(&manifest));
    let mj: Value = serde_json::from_slice(&manifest).unwrap();
    assert_eq!(mj["config"]["num_paths"], 2000);
    assert!(mj["version"].as_str().is_some());
}

#[test]
fn equilibria_gain_gain_report() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("eq.json");
    let o = valign(&[
        "--mode", "equilibria", "--space", "random", "--value-alpha", "gain",
        "--value-beta", "gain", "--exact", "--length", "4", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_str(&read(&out)).unwrap();
    let eq = r["equilibria"].as_array().unwrap();
    assert!(eq.iter().any(|e| e["alpha"] == "random:0.0" && e["beta"] == "random:0.0"));
    let pareto = r["pareto_optimal"].as_array().unwrap();
    assert!(!pareto.iter().any(|e| e["alpha"] == "random:0.0" && e["beta"] == "random:0.0"));
    assert!(pareto.iter().any(|e| e["alpha"] == "random:1.0" && e["beta"] == "random:1.0"));
    assert_eq!(r["alignment_table"].as_array().unwrap().len(), 121);
}

#[test]
fn nash_check_reports_mutual_defection() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("nash.json");
    let o = valign(&["--mode", "nash-check", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let r: Value = serde_json::from_str(&read(&out)).unwrap();
    assert_eq!(r["nash_equilibria"], serde_json::json!(["(D,D)"]));
    assert_eq!(r["nash_pareto_dominated_by"]["(D,D)"], serde_json::json!(["(C,C)"]));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("a.csv");
    let out = out.to_str().unwrap();
    assert_eq!(valign(&["--mode", "align", "--paths", "50", "--out", out]).status.code(), Some(0));
    assert_eq!(valign(&["--paths", "-1", "--out", out]).status.code(), Some(1));
    assert_eq!(valign(&["--mode", "bogus", "--out", out]).status.code(), Some(1));
    assert_eq!(valign(&["--exact", "--length", "11", "--out", out]).status.code(), Some(1));
    assert_eq!(valign(&["--no-such-flag"]).status.code(), Some(1));
    assert_eq!(valign(&["--config", "/nonexistent/cfg.toml"]).status.code(), Some(2));

    // A regular file where a directory is needed.
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let bad = blocker.join("out.csv");
    let o = valign(&["--paths", "10", "--out", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "path_length = 10\nnum_paths = 100\nmode = \"sweep-heterogeneous\"\n").unwrap();
    let flags = RawConfig { path_length: Some(3), ..Default::default() };
    let c = load_config(Some(&cfg), flags).unwrap();
    assert_eq!((c.path_length, c.num_paths), (3, 100));

    std::fs::write(&cfg, "num_paths = -1\n").unwrap();
    let e = load_config(Some(&cfg), RawConfig::default()).unwrap_err();
    assert!(matches!(e, ConfigError::Validation { .. }));
    assert_eq!(e.key(), Some("num_paths"));

    std::fs::write(&cfg, "path_lenght = 3\n").unwrap();
    let e = load_config(Some(&cfg), RawConfig::default()).unwrap_err();
    assert!(matches!(e, ConfigError::Parse { .. }));
    assert_eq!(e.key(), Some("path_lenght"));

    let out = dir.path().join("h.csv");
    std::fs::write(&cfg, "mode = \"sweep-heterogeneous\"\nnum_paths = 200\ngrid_points = 3\n").unwrap();
    let o = valign(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&out);
    assert!(csv.lines().nth(1).unwrap().starts_with("alpha_strategy,p_beta,"));
    assert_eq!(csv.lines().count(), 2 + 2 * 3 * 3);
}

#[test]
fn identical_manifests_give_identical_results() {
    let dir = TempDir::new().unwrap();
    let mut raw = RawConfig {
        mode: Some("sweep-random".into()),
        grid_points: Some(4),
        num_paths: Some(500),
        output_path: Some(dir.path().join("a.csv")),
        ..Default::default()
    };
    let a = run(&load_config(None, raw.clone()).unwrap()).unwrap();
    raw.output_path = Some(dir.path().join("b.csv"));
    let b = run(&load_config(None, raw.clone()).unwrap()).unwrap();
    assert_eq!(a.manifest_hash, b.manifest_hash);
    assert_eq!(compare_results(&read(&a.results_path), &read(&b.results_path)), Ok(true));

    raw.master_seed = Some(7);
    raw.output_path = Some(dir.path().join("c.csv"));
    let c = run(&load_config(None, raw).unwrap()).unwrap();
    assert!(matches!(
        compare_results(&read(&a.results_path), &read(&c.results_path)),
        Err(CompareError::ManifestMismatch(_, _))
    ));
    assert_eq!(compare_results("no header", "x"), Err(CompareError::MissingManifest));
}
