use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const PLANNERS: [&str; 5] = [
    "offline",
    "online-opt",
    "online-sca",
    "baseline1",
    "baseline2",
];

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_uavopt"))
}

fn desk() -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/desk.toml");
    fs::read_to_string(path).unwrap()
}

/// Desk scenario cut to two slots so each planner finishes quickly.
fn tiny_config(dir: &Path, edit: impl Fn(String) -> String) -> PathBuf {
    let text = edit(desk().replace("N_T = 3", "N_T = 2"));
    let path = dir.join("tiny.toml");
    fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn keys(path: &Path) -> Vec<String> {
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    v.as_object().unwrap().keys().cloned().collect()
}

#[test]
fn solve_writes_files_with_stable_summary_keys() {
    let tmp = TempDir::new().unwrap();
    let cfg = tiny_config(tmp.path(), |s| s);
    let mut first: Option<Vec<String>> = None;
    for planner in PLANNERS {
        let out = tmp.path().join(planner);
        let o = run(&[
            "solve",
            "--config",
            cfg.to_str().unwrap(),
            "--planner",
            planner,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(
            code(&o),
            0,
            "{planner}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        for f in ["trace.csv", "alloc.csv", "convergence.csv", "summary.json"] {
            assert!(out.join(f).exists(), "{planner} missing {f}");
        }
        let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
        assert_eq!(trace.lines().count(), 1 + 1 + 2);
        let k = keys(&out.join("summary.json"));
        match &first {
            None => first = Some(k),
            Some(f) => assert_eq!(f, &k, "{planner} summary keys differ"),
        }
        let a = run(&[
            "audit",
            "--config",
            cfg.to_str().unwrap(),
            "--dir",
            out.to_str().unwrap(),
        ]);
        assert_eq!(
            code(&a),
            0,
            "{planner} audit: {}",
            String::from_utf8_lossy(&a.stdout)
        );
    }
}

#[test]
fn usage_errors_exit_64() {
    let tmp = TempDir::new().unwrap();
    let cfg = tiny_config(tmp.path(), |s| s);
    let o = run(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--planner",
        "nonsense",
    ]);
    assert_eq!(code(&o), 64);
    assert_eq!(code(&run(&["frobnicate"])), 64);
    assert_eq!(code(&run(&["solve", "--planner", "offline"])), 64);
}

#[test]
fn infeasible_scenario_exits_2() {
    let tmp = TempDir::new().unwrap();
    let cfg = tiny_config(tmp.path(), |s| {
        s.replace("q_end_wh = 55.0", "q_end_wh = 221.9")
    });
    let out = tmp.path().join("o");
    let o = run(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--planner",
        "offline",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn oracle_writes_result_and_respects_cap() {
    let tmp = TempDir::new().unwrap();
    let cfg = tiny_config(tmp.path(), |s| {
        s.replace("N_T = 2", "N_T = 1")
            .replace("N_F = 2", "N_F = 1")
            .replace("K = 2", "K = 1")
    });
    let out = tmp.path().join("o");
    let o = run(&[
        "oracle",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("oracle.json")).unwrap()).unwrap();
    assert!(v["objective"].as_f64().unwrap().is_finite());
    let o = run(&[
        "oracle",
        "--config",
        cfg.to_str().unwrap(),
        "--cap",
        "10",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
}

#[test]
fn sweep_resumes_without_repeating_rows() {
    let tmp = TempDir::new().unwrap();
    let cfg = tiny_config(tmp.path(), |s| s);
    let out = tmp.path().join("sw");
    let args = |values: &str| {
        vec![
            "sweep".to_string(),
            "--config".into(),
            cfg.to_str().unwrap().into(),
            "--axis".into(),
            "p-max-dbm".into(),
            "--values".into(),
            values.into(),
            "--planners".into(),
            "baseline1,baseline2".into(),
            "--seeds".into(),
            "1".into(),
            "--out".into(),
            out.to_str().unwrap().into(),
        ]
    };
    assert_eq!(
        bin().args(args("40")).output().unwrap().status.code(),
        Some(0)
    );
    let rows = |p: &Path| {
        fs::read_to_string(p.join("sweep.csv"))
            .unwrap()
            .lines()
            .count()
            - 1
    };
    assert_eq!(rows(&out), 2);
    let before = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(
        bin().args(args("40,42")).output().unwrap().status.code(),
        Some(0)
    );
    assert_eq!(rows(&out), 4);
    let after = fs::read_to_string(out.join("sweep.csv")).unwrap();
    for line in before.lines().skip(1) {
        assert!(after.contains(line), "resumed sweep rewrote row {line}");
    }
}

#[test]
fn audit_flags_corrupted_battery() {
    let tmp = TempDir::new().unwrap();
    let cfg = tiny_config(tmp.path(), |s| s);
    let out = tmp.path().join("o");
    let o = run(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--planner",
        "baseline1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    let mut lines: Vec<String> = trace.lines().map(String::from).collect();
    let mut cells: Vec<String> = lines[2].split(',').map(String::from).collect();
    let q: f64 = cells[7].parse().unwrap();
    cells[7] = format!("{:.16e}", q + 5000.0);
    lines[2] = cells.join(",");
    fs::write(out.join("trace.csv"), lines.join("\n") + "\n").unwrap();
    let a = run(&[
        "audit",
        "--config",
        cfg.to_str().unwrap(),
        "--dir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&a), 2);
    let report = String::from_utf8_lossy(&a.stdout);
    assert!(
        report.contains("battery_range") && report.contains("battery_ledger"),
        "{report}"
    );
}
