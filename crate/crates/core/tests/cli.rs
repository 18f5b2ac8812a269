use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lowmach::io::config::parse_config;
use lowmach::io::report::SWEEP_COLUMNS;
use lowmach::io::snapshot::Snapshot;

const BIN: &str = env!("CARGO_BIN_EXE_lowmach");

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn lowmach(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

/// Regenerate with `LOWMACH_UPDATE_GOLDEN=1 cargo test --test cli`.
#[test]
fn normalized_config_matches_golden_file() {
    let input = fs::read_to_string(golden("config_input.json")).unwrap();
    let normalized = parse_config(&input).unwrap().to_normalized();
    let path = golden("config_normalized.json");
    if std::env::var_os("LOWMACH_UPDATE_GOLDEN").is_some() {
        fs::write(&path, &normalized).unwrap();
    }
    assert_eq!(normalized, fs::read_to_string(&path).unwrap());
    assert_eq!(parse_config(&normalized).unwrap().to_normalized(), normalized);
}

#[test]
fn sweep_writes_report_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let cfg = write_config(
        dir.path(),
        r#"{"params": {"grid": {"n": 16}}, "t_final": 0.1, "sweep": {"eps_list": [0.2, 0.1, 0.05]}}"#,
    );
    let res = lowmach(&["sweep-weak-strong", "--config", &cfg, "--out", out.to_str().unwrap(), "--quiet"]);
    let code = res.status.code().unwrap();

    let csv = fs::read_to_string(out.join("report.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "# lowmach sweep v1");
    assert_eq!(lines[1], SWEEP_COLUMNS.join(","));
    assert_eq!(lines.len(), 2 + 3);
    for line in &lines[2..] {
        assert_eq!(line.split(',').count(), SWEEP_COLUMNS.len());
    }

    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["version"], 1);
    assert_eq!(summary["report"]["mode"], "weak_strong");
    let passed = summary["passed"].as_bool().unwrap();
    assert_eq!(code, if passed { 0 } else { 3 }, "{}", String::from_utf8_lossy(&res.stderr));
    let fits = summary["report"]["fits"].as_array().unwrap();
    let sup = fits.iter().find(|f| f["metric"] == "sup_rel_energy").unwrap();
    assert!(sup["slope"].is_number() && sup["half_width"].is_number());
}

#[test]
fn simulated_snapshots_feed_diagnose() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"params": {"grid": {"n": 16}, "eps": 0.1, "nu": 0.1}, "t_final": 0.1,
            "output": {"snapshot_every": 0.05}}"#,
    );
    let run = |cmd: &str, sub: &str| {
        let out = dir.path().join(sub);
        let res = lowmach(&[cmd, "--config", &cfg, "--out", out.to_str().unwrap(), "--quiet"]);
        assert_eq!(res.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&res.stderr));
        out
    };
    let comp = run("simulate-compressible", "comp");
    let euler = run("simulate-euler", "euler");
    let ac = run("acoustics", "ac");
    assert!(comp.join("energy.csv").exists() && comp.join("summary.json").exists());

    let pick = |d: &Path, kind: &str| -> Vec<String> {
        (1..=2)
            .map(|k| d.join(format!("{kind}_{k:04}.snap")).to_str().unwrap().to_string())
            .collect()
    };
    let (c, t, a) = (pick(&comp, "compressible"), pick(&euler, "euler"), pick(&ac, "acoustic"));
    for path in c.iter().chain(&t).chain(&a) {
        Snapshot::from_bytes(&fs::read(path).unwrap()).unwrap();
    }
    let out = dir.path().join("diag");
    let mut args = vec!["diagnose", "--config", &cfg, "--out", out.to_str().unwrap(), "--quiet", "--compressible"];
    args.extend(c.iter().map(String::as_str));
    args.push("--target");
    args.extend(t.iter().map(String::as_str));
    args.push("--acoustic");
    args.extend(a.iter().map(String::as_str));
    let res = lowmach(&args);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = fs::read_to_string(out.join("diagnose.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(2).collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        let cells: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(cells.len(), 11);
        assert!(cells.iter().all(|v| v.is_finite()));
        assert!(cells[1] >= 0.0);
    }
}

#[test]
fn numerical_abort_exits_with_two_and_leaves_a_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"params": {"grid": {"n": 16}}, "solver": {"splitting": false, "fixed_dt": 0.5}, "t_final": 20.0}"#,
    );
    let out = dir.path().join("run");
    let res = lowmach(&["simulate-compressible", "--config", &cfg, "--out", out.to_str().unwrap(), "--quiet"]);
    assert_eq!(res.status.code(), Some(2));
    let snap = Snapshot::from_bytes(&fs::read(out.join("abort.snap")).unwrap()).unwrap();
    assert_eq!(snap.header.kind, "compressible");
}

#[test]
fn validation_and_usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), r#"{"params": {"gamma": 1.4}}"#);
    let res = lowmach(&["simulate-ns", "--config", &bad]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("gamma"));

    let syntax = write_config(dir.path(), "{\n  \"seed\": 1,\n  oops\n}");
    let res = lowmach(&["simulate-ns", "--config", &syntax]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("line 3"));

    assert_eq!(lowmach(&["simulate-ns"]).status.code(), Some(1));
    assert_eq!(lowmach(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(lowmach(&["simulate-ns", "--config", "/nonexistent/config.json"]).status.code(), Some(1));
}

#[test]
fn selftest_passes() {
    let res = lowmach(&["selftest", "--quiet"]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stdout));
}
