use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn ucform(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ucform")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn generated(dir: &TempDir, seed: u64, units: usize, horizon: usize) -> PathBuf {
    let path = dir.path().join(format!("inst-{seed}.json"));
    let out = ucform(&[
        "generate",
        "--seed",
        &seed.to_string(),
        "--units",
        &units.to_string(),
        "--horizon",
        &horizon.to_string(),
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_accepts_generated_instance() {
    let dir = TempDir::new().unwrap();
    let inst = generated(&dir, 1, 2, 6);
    let out = ucform(&["validate", arg(&inst)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "OK");
}

#[test]
fn invalid_instance_exits_2() {
    let dir = TempDir::new().unwrap();
    let inst = generated(&dir, 1, 2, 6);
    let text = std::fs::read_to_string(&inst).unwrap().replacen("\"horizon\": 6", "\"horizon\": 7", 1);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, text).unwrap();
    let out = ucform(&["validate", arg(&bad)]);
    assert_eq!(out.status.code(), Some(2));

    let missing = ucform(&["validate", arg(&dir.path().join("nope.json"))]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(ucform(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(ucform(&["build"]).status.code(), Some(1));
    let dir = TempDir::new().unwrap();
    let inst = generated(&dir, 1, 2, 6);
    assert_eq!(ucform(&["build", arg(&inst), "-f", "four_bin"]).status.code(), Some(1));
    assert_eq!(ucform(&["approx", arg(&inst), "--ktol", "-1"]).status.code(), Some(1));
    assert_eq!(ucform(&["--help"]).status.code(), Some(0));
}

#[test]
fn gap_prints_one_row_per_formulation() {
    let dir = TempDir::new().unwrap();
    let inst = generated(&dir, 4, 2, 6);
    let out = ucform(&["gap", arg(&inst), "--formulations", "one_bin,temp"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("instance,"));
    assert!(lines[1].contains("one_bin"));
    assert!(lines[2].contains("temp"));
}

#[test]
fn approx_reports_steps_per_unit() {
    let dir = TempDir::new().unwrap();
    let inst = generated(&dir, 2, 3, 12);
    let out = ucform(&["approx", arg(&inst), "--ktol", "0.1"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["ktol"], 0.1);
    let units = doc["units"].as_array().unwrap();
    assert_eq!(units.len(), 3);
    assert_eq!(units[0]["unit"], "g1");
    for u in units {
        let steps = u["steps"].as_array().unwrap();
        assert!(!steps.is_empty());
        assert_eq!(steps[0]["lo"], 1);
        for pair in steps.windows(2) {
            assert_eq!(pair[1]["lo"].as_u64().unwrap(), pair[0]["hi"].as_u64().unwrap() + 1);
            assert!(pair[1]["value"].as_f64().unwrap() > pair[0]["value"].as_f64().unwrap());
        }
    }
}

#[test]
fn oracle_agrees_on_small_instance() {
    let dir = TempDir::new().unwrap();
    let inst = generated(&dir, 5, 2, 6);
    let out = ucform(&["oracle", arg(&inst)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(doc.is_object());
}

#[test]
fn oracle_refuses_oversized_enumeration() {
    let dir = TempDir::new().unwrap();
    let inst = generated(&dir, 5, 2, 6);
    assert_eq!(ucform(&["oracle", arg(&inst), "--guard", "4"]).status.code(), Some(2));
}

#[test]
fn build_then_solve_mps_matches_direct_solve() {
    let dir = TempDir::new().unwrap();
    let inst = generated(&dir, 6, 2, 6);
    let mps = dir.path().join("model.mps");
    let out = ucform(&["build", arg(&inst), "-f", "three_bin", "--out", arg(&mps)]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&mps).unwrap();
    assert!(text.starts_with("NAME"));
    assert!(text.trim_end().ends_with("ENDATA"));

    let objective = |out: &Output| -> f64 {
        let text = stdout(out);
        let line = text.lines().find(|l| l.starts_with("objective:")).unwrap();
        line["objective:".len()..].trim().parse().unwrap()
    };
    let from_mps = ucform(&["solve", arg(&mps), "--gap", "0"]);
    assert_eq!(from_mps.status.code(), Some(0));
    let direct = ucform(&["solve", arg(&inst), "-f", "three_bin", "--gap", "0"]);
    assert_eq!(direct.status.code(), Some(0));
    assert!((objective(&from_mps) - objective(&direct)).abs() <= 1e-6 * objective(&direct).abs().max(1.0));

    let lp = ucform(&["solve", arg(&mps), "--lp"]);
    assert!(objective(&lp) <= objective(&direct) + 1e-6);
}

#[test]
fn build_lp_format_to_stdout() {
    let dir = TempDir::new().unwrap();
    let inst = generated(&dir, 6, 2, 4);
    let out = ucform(&["build", arg(&inst), "--format", "lp"]);
    assert!(out.status.success());
    assert!(stdout(&out).to_lowercase().contains("minimize"));
}

#[test]
fn solve_with_failing_backend_exits_3() {
    let dir = TempDir::new().unwrap();
    let inst = generated(&dir, 6, 2, 4);
    let out = ucform(&["solve", arg(&inst), "--backend", "false {input} {output}"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn generate_is_deterministic() {
    let a = ucform(&["generate", "--seed", "9", "--units", "4", "--horizon", "12", "--network"]);
    let b = ucform(&["generate", "--seed", "9", "--units", "4", "--horizon", "12", "--network"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let doc: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(doc["units"].as_array().unwrap().len(), 4);
}

#[test]
fn bench_writes_reports() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("bench.json");
    std::fs::write(
        &config,
        r#"{"instances": [{"seed": 3, "units": 2, "horizon": 6}], "formulations": ["one_bin", "temp"], "ktol": [0.0]}"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = ucform(&["bench", arg(&config), "--out", arg(&out_dir), "--threads", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["gaps.csv", "summary.csv", "report.json"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    let gaps = std::fs::read_to_string(out_dir.join("gaps.csv")).unwrap();
    assert_eq!(gaps.lines().count(), 3);
}
