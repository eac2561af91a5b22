//! End-to-end runs of the `ftl` binary.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn ftl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ftl"))
        .args(args)
        .output()
        .unwrap()
}

fn run(sub: &str, cfg: &str, out: &Path, extra: &[&str]) -> Output {
    let cfg = config(cfg);
    let mut args = vec![
        sub,
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    ftl(&args)
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().into_string().unwrap(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

#[test]
fn study_of_the_riemann_benchmark_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("study", "riemann_p1.json", dir.path(), &[]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let written = files(dir.path());
    for name in ["report.json", "report.csv", "summary.txt"] {
        assert!(written.contains_key(name), "missing {name}");
    }
    let csv = String::from_utf8(written["report.csv"].clone()).unwrap();
    assert_eq!(csv.lines().count(), 1 + 4);
    assert!(csv.starts_with("n,l1_error,"));
    let report: serde_json::Value = serde_json::from_slice(&written["report.json"]).unwrap();
    assert_eq!(report["flags"]["pass"], serde_json::Value::Bool(true));
}

#[test]
fn missing_config_is_a_usage_error_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("study", "does_not_exist.json", dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("does_not_exist.json"), "{stderr}");
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(ftl(&[]).status.code(), Some(2));
    assert_eq!(ftl(&["simulate"]).status.code(), Some(2));
    assert_eq!(
        ftl(&["launch", "--config", "x.json"]).status.code(),
        Some(2)
    );
    let dir = tempfile::tempdir().unwrap();
    let bad_case = run("simulate", "riemann_p1.json", dir.path(), &["--case", "P2"]);
    assert_eq!(bad_case.status.code(), Some(2));
    let bad_t = run(
        "simulate",
        "riemann_p1.json",
        dir.path(),
        &["--t-final", "-1"],
    );
    assert_eq!(bad_t.status.code(), Some(2));
}

#[test]
fn malformed_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{ \"t_final\": ").unwrap();
    let out = ftl(&["study", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("broken.json"));
}

#[test]
fn simulate_writes_one_row_per_particle_and_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("simulate", "p4_cutoff.json", dir.path(), &["--n", "200"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,i,x"));
    let mut per_time: BTreeMap<String, usize> = BTreeMap::new();
    for line in lines {
        let t = line.split(',').next().unwrap().to_string();
        *per_time.entry(t).or_default() += 1;
    }
    assert_eq!(per_time.len(), 41);
    assert!(per_time.values().all(|&c| c == 201));
    let densities = std::fs::read_to_string(dir.path().join("density_particles.csv")).unwrap();
    assert_eq!(densities.lines().count(), 1 + 41 * 200);
}

#[test]
fn reference_writes_cell_averages() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        "reference",
        "sinusoid_p1.json",
        dir.path(),
        &["--t-final", "0.25"],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(dir.path().join("density_reference.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("t,i,x,rho"));
    assert_eq!(text.lines().count(), 1 + 41 * 4096);
}

#[test]
fn identical_invocations_give_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ra = run(
        "check",
        "repulsive_p3_pinned.json",
        a.path(),
        &["--threads", "1"],
    );
    let rb = run(
        "check",
        "repulsive_p3_pinned.json",
        b.path(),
        &["--threads", "4"],
    );
    assert_eq!(
        ra.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&ra.stderr)
    );
    assert_eq!(rb.status.code(), Some(0));
    let (fa, fb) = (files(a.path()), files(b.path()));
    assert!(fa.contains_key("oracles.json"));
    assert_eq!(fa, fb);

    let c = tempfile::tempdir().unwrap();
    let d = tempfile::tempdir().unwrap();
    run("simulate", "sinusoid_p2.json", c.path(), &["--n", "100"]);
    run("simulate", "sinusoid_p2.json", d.path(), &["--n", "100"]);
    assert_eq!(files(c.path()), files(d.path()));
}

#[test]
fn failed_checks_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = std::fs::read_to_string(config("riemann_p1.json")).unwrap();
    let mut value: serde_json::Value = serde_json::from_str(&cfg).unwrap();
    // a TV spread below 1 cannot be met
    value["tolerances"]["tv_spread"] = serde_json::json!(0.5);
    let path = dir.path().join("strict.json");
    std::fs::write(&path, value.to_string()).unwrap();
    let out_dir = dir.path().join("out");
    let out = ftl(&[
        "study",
        "--config",
        path.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let summary = std::fs::read_to_string(out_dir.join("summary.txt")).unwrap();
    assert!(summary.contains("FAIL TV spread"));
}
