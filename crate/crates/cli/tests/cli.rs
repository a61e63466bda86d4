use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use tempfile::TempDir;

const SMALL_GRID: &str = "n_trees = [20]\nmax_depth = [2]\nlearning_rate = [0.1]\nrow_subsample = [0.8]\ncol_subsample = [0.8]\n";

fn thermocast(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thermocast"))
        .args(args)
        .env("RUST_LOG", "off")
        .output()
        .expect("binary runs")
}

fn error_json(out: &Output) -> serde_json::Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr.lines().last().unwrap_or_default();
    serde_json::from_str(line).unwrap_or_else(|e| panic!("stderr {stderr:?} is not a JSON error line: {e}"))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// One short pipeline run shared by the tests that need trained models.
fn trained() -> &'static Path {
    static DIR: OnceLock<(TempDir, PathBuf)> = OnceLock::new();
    &DIR.get_or_init(|| {
        let tmp = TempDir::new().unwrap();
        let grid = tmp.path().join("grid.toml");
        std::fs::write(&grid, SMALL_GRID).unwrap();
        let out = tmp.path().join("run");
        let status = thermocast(&[
            "all",
            "--output-dir",
            s(&out),
            "--start",
            "2019-12-26 00:00:00",
            "--end",
            "2019-12-30 23:59:00",
            "--grid",
            s(&grid),
            "--forest-trees",
            "10",
            "--max-samples",
            "1000",
        ]);
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        (tmp, out)
    })
    .1
}

#[test]
fn synth_is_deterministic_per_seed() {
    let tmp = TempDir::new().unwrap();
    let run = |name: &str, seed: &str| {
        let dir = tmp.path().join(name);
        let out = thermocast(&[
            "synth",
            "--output-dir",
            s(&dir),
            "--seed",
            seed,
            "--start",
            "2019-12-01 00:00:00",
            "--end",
            "2019-12-03 00:00:00",
        ]);
        assert!(out.status.success());
        std::fs::read(dir.join("data.csv")).unwrap()
    };
    let a = run("a", "7");
    assert_eq!(a, run("b", "7"));
    assert_ne!(a, run("c", "8"));
}

#[test]
fn missing_spec_is_an_io_error() {
    let tmp = TempDir::new().unwrap();
    let out = thermocast(&["synth", "--output-dir", s(tmp.path()), "--spec", s(&tmp.path().join("nope.toml"))]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_json(&out)["error"], "io");
}

#[test]
fn empty_input_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let empty = tmp.path().join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    let out = thermocast(&["prepare", "--output-dir", s(tmp.path()), "--input", s(&empty)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(error_json(&out)["message"].as_str().unwrap().contains("timestamp"));

    std::fs::write(&empty, "timestamp,1-15-TMP1\n").unwrap();
    let out = thermocast(&["prepare", "--output-dir", s(tmp.path()), "--input", s(&empty)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_json(&out)["error"], "empty_frame");
}

#[test]
fn usage_errors_exit_two() {
    let out = thermocast(&["plan", "--mode", "sometimes"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_json(&out)["error"], "usage");
    assert!(thermocast(&["--help"]).status.success());
}

#[test]
fn forecast_covers_horizon_and_lists_lags() {
    let dir = trained();
    let csv = std::fs::read_to_string(dir.join("ambient_forecast.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 202);
    assert!(lines[1].starts_with("2019-12-30 14:40:00"));
    assert!(lines[201].starts_with("2019-12-30 18:00:00"));
    let diag = std::fs::read_to_string(dir.join("ar_diagnostics.txt")).unwrap();
    assert!(diag.lines().any(|l| l.contains(".lags: ")), "{diag}");
}

#[test]
fn one_point_grid_selects_its_config() {
    let train = std::fs::read_to_string(trained().join("train.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&train).unwrap();
    assert_eq!(v["grid_cells"], 1);
    assert_eq!(v["best"]["n_trees"], 20);
    assert_eq!(v["best"]["max_depth"], 2);
    assert_eq!(v["best"]["learning_rate"], 0.1);
    let grid = std::fs::read_to_string(trained().join("grid.csv")).unwrap();
    assert_eq!(grid.lines().count(), 2);
}

#[test]
fn experiments_write_one_lift_per_case() {
    let lifts = std::fs::read_to_string(trained().join("lifts.csv")).unwrap();
    let names: Vec<&str> = lifts.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(names, ["valve", "bathroom", "downstairs", "hybrid"]);
    for n in names {
        assert!(trained().join(format!("experiment_{n}.svg")).exists());
    }
}

fn event(dir: &Path, target: &str) -> PathBuf {
    let path = dir.join(format!("event_{target}.txt"));
    std::fs::write(
        &path,
        format!(
            "Event: Heating\nTarget Zone: Room 1-15\nTarget Timestamp: 2019-12-30 18:00:00\nTarget Temperature: {target}\nControls: 1-13-HTV1, 1-14-TMP1=26.5, 1-8-TMP1=22\n"
        ),
    )
    .unwrap();
    path
}

#[test]
fn past_target_is_an_error() {
    let tmp = TempDir::new().unwrap();
    let out = thermocast(&[
        "plan",
        "--models",
        s(trained()),
        "--output-dir",
        s(tmp.path()),
        "--now",
        "2019-12-30 18:30:00",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_json(&out)["error"], "invalid_argument");
}

#[test]
fn unreachable_target_fails_explicitly() {
    let tmp = TempDir::new().unwrap();
    let ev = event(tmp.path(), "80");
    let out = thermocast(&["plan", "--models", s(trained()), "--output-dir", s(tmp.path()), "--event", s(&ev)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_json(&out)["error"], "target_unreachable");
    let report = std::fs::read_to_string(tmp.path().join("plan.txt")).unwrap();
    assert!(report.starts_with("status: failed\nerror: target_unreachable\n"), "{report}");
}

#[test]
fn reachable_plan_writes_schedule() {
    let tmp = TempDir::new().unwrap();
    let ev = event(tmp.path(), "10");
    for mode in ["static", "iterative"] {
        let out = thermocast(&[
            "plan",
            "--models",
            s(trained()),
            "--output-dir",
            s(tmp.path()),
            "--event",
            s(&ev),
            "--mode",
            mode,
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let plan = std::fs::read_to_string(tmp.path().join("plan.txt")).unwrap();
        assert!(plan.contains(&format!("mode: {mode}\n")));
        assert!(plan.contains("switch_on_time: "));
        assert!(tmp.path().join("plan_trajectory.csv").exists());
    }
}
