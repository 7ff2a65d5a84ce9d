//! End-to-end checks of the command-line contract: exit codes, output files,
//! overrides, overwrite protection, and determinism.

use std::fs;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coni-oa"))
}

fn write_scenario(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

const EMPTY_MAP: &str = r#"{
    "map": {"bounds_min": [-6.0, -4.5, 0.0], "bounds_max": [6.0, 4.5, 3.0]},
    "ugv": {"start": [0.0, 0.0, 0.0], "program": {"type": "static"}},
    "task": {"type": "leader_follow", "offset": [1.0, 0.0, 0.5]},
    "duration": 4.0
}"#;

#[test]
fn run_empty_map_succeeds_with_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path(), "s.json", EMPTY_MAP);
    let out = dir.path().join("out");
    let status = bin()
        .args(["run", "--scenario"])
        .arg(&scenario)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["schema_version"], 1);
    assert_eq!(summary["success"], true);
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert!(trace.starts_with("time,ugv_x"));
    assert!(trace.lines().count() > 100);
}

#[test]
fn run_refuses_overwrite_without_force() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path(), "s.json", EMPTY_MAP);
    let out = dir.path().join("out");
    fs::create_dir_all(&out).unwrap();
    fs::write(out.join("summary.json"), "{}").unwrap();
    let output = bin()
        .args(["run", "--scenario"])
        .arg(&scenario)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("--force"));
    // With --force it proceeds.
    let status = bin()
        .args(["run", "--force", "--scenario"])
        .arg(&scenario)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
}

#[test]
fn malformed_scenario_exits_one_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = EMPTY_MAP.replace(
        "\"duration\": 4.0",
        r#""duration": 4.0,
           "obstacles": {"explicit": [{"kind": "sphere", "center": [3.0, 0.0, 1.0], "radius": -0.5}]}"#,
    );
    let scenario = write_scenario(dir.path(), "bad.json", &bad);
    let out = dir.path().join("out");
    let output = bin()
        .args(["run", "--scenario"])
        .arg(&scenario)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("obstacles.explicit[0]"), "stderr: {stderr}");
}

#[test]
fn collision_trial_exits_two() {
    // Goal buried inside a wall of spheres with a generous failure threshold:
    // the vehicle parks at the wall and the trial is scored as a failure.
    let dir = tempfile::tempdir().unwrap();
    let scenario_body = r#"{
        "map": {"bounds_min": [-6.0, -4.5, 0.0], "bounds_max": [6.0, 4.5, 3.0]},
        "ugv": {"start": [0.0, 0.0, 0.0], "program": {"type": "static"}},
        "task": {"type": "leader_follow", "offset": [3.0, 0.0, 1.0]},
        "uav_start": [0.0, 0.0, 1.0],
        "obstacles": {"explicit": [
            {"kind": "sphere", "center": [3.0, 0.0, 1.0], "radius": 0.45},
            {"kind": "sphere", "center": [3.0, 0.8, 1.0], "radius": 0.45},
            {"kind": "sphere", "center": [3.0, -0.8, 1.0], "radius": 0.45}
        ]},
        "success_clearance": 2.0,
        "duration": 6.0
    }"#;
    let scenario = write_scenario(dir.path(), "wall.json", scenario_body);
    let out = dir.path().join("out");
    let status = bin()
        .args(["run", "--scenario"])
        .arg(&scenario)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["success"], false);
}

#[test]
fn overrides_and_seed_flag_change_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path(), "s.json", EMPTY_MAP);
    let out = dir.path().join("out");
    let status = bin()
        .args(["run", "--seed", "9", "--override", "duration=1.0", "--scenario"])
        .arg(&scenario)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["scenario"]["duration"], 1.0);
    assert_eq!(summary["scenario"]["seed"], 9);
}

#[test]
fn validate_reports_ok_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_scenario(dir.path(), "good.json", EMPTY_MAP);
    let status = bin().args(["validate", "--scenario"]).arg(&good).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let bad = write_scenario(dir.path(), "bad.json", "{\"not\": \"a scenario\"}");
    let status = bin().args(["validate", "--scenario"]).arg(&bad).status().unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn batch_smoke_grid_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |out: &Path| {
        let status = bin()
            .args([
                "batch",
                "--trials",
                "1",
                "--seed",
                "3",
                "--single-thread",
                "--override",
                "duration=1.0",
            ])
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
        fs::read_to_string(out.join("batch.csv")).unwrap()
    };
    let a = run(&dir.path().join("a"));
    let b = run(&dir.path().join("b"));
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 7, "6 table rows + header: {a}");
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a/batch.json")).unwrap())
            .unwrap();
    assert_eq!(json["cells"].as_array().unwrap().len(), 12);
}

#[test]
fn bench_minimal_reports_timings() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench");
    let output = bin()
        .args(["bench", "--points", "400", "--horizon", "1", "--repeats", "3"])
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("bench.json")).unwrap()).unwrap();
    assert!(report["plan_mean_ms"].as_f64().unwrap() > 0.0);
    assert!(report["solve_mean_ms"].as_f64().unwrap() > 0.0);
}
