use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn depasync(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_depasync"))
        .args(args)
        .env_remove("DEPASYNC_MODE")
        .env_remove("DEPASYNC_CONFIG")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = depasync(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Exit code plus the single stderr line.
fn err(args: &[&str]) -> (i32, String) {
    let out = depasync(args);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert_eq!(stderr.lines().count(), 1, "{stderr}");
    (out.status.code().unwrap(), stderr.trim_end().to_string())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_from_spec_matches_committed_network() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("net.json");
    ok(&["gen", "--workload", s(&fixture("small_layered.toml")), "--out", s(&out)]);
    let a: depasync::Network = depasync::Network::load(&out).unwrap();
    let b = depasync::Network::load(&fixture("small_net.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn gen_rate_knob_only_for_synthetic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("n.json");
    let (code, line) = err(&["gen", "--workload", "layered", "--rate", "0.5", "--out", s(&out)]);
    assert_eq!(code, 2);
    assert!(line.starts_with("error: kind=usage code=2 msg="), "{line}");
}

#[test]
fn compile_then_run_with_program_equals_direct_run() {
    let dir = tempfile::tempdir().unwrap();
    let net = fixture("small_net.json");
    let cfg = fixture("small_config.toml");
    let prog = dir.path().join("prog.json");
    let compiled = ok(&["compile", "--workload", s(&net), "--config", s(&cfg), "--out", s(&prog)]);
    assert!(compiled.contains("cores=4"), "{compiled}");
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    ok(&["run", "--workload", s(&net), "--config", s(&cfg), "--program", s(&prog), "--out", s(&a)]);
    ok(&["run", "--workload", s(&net), "--config", s(&cfg), "--out", s(&b)]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn run_is_deterministic_and_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let net = fixture("small_net.json");
    let (a, b, t) = (dir.path().join("a.json"), dir.path().join("b.json"), dir.path().join("t.csv"));
    for out in [&a, &b] {
        ok(&["run", "--workload", s(&net), "--mode", "depasync", "--grid", "2x2", "--out", s(out), "--trace", s(&t)]);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let report = depasync::metrics::import_report(&a).unwrap();
    assert_eq!(report.raster, depasync::reference_run(&depasync::Network::load(&net).unwrap()).unwrap());
    let trace = depasync::metrics::import_trace(&t).unwrap();
    assert!(!trace.is_empty());
}

#[test]
fn env_overrides_flags_defaults() {
    let out = Command::new(env!("CARGO_BIN_EXE_depasync"))
        .args(["run", "--workload", s(&fixture("small_net.json"))])
        .env("DEPASYNC_MODE", "se")
        .env("DEPASYNC_GRID", "2x2")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("mode=se "));
}

#[test]
fn verify_seeded_synthetic_workloads() {
    let stdout = ok(&["verify", "--workload", "synthetic", "--seeds", "0..20"]);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("ok ")).count(), 60);
}

#[test]
fn verify_network_file_with_config() {
    let stdout = ok(&["verify", "--workload", s(&fixture("small_net.json")), "--config", s(&fixture("small_config.toml"))]);
    assert_eq!(stdout.lines().count(), 3);
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(i).unwrap().to_string()).collect()
}

#[test]
fn sweep_window_speedup_non_decreasing() {
    let dir = tempfile::tempdir().unwrap();
    let results = dir.path().join("results.csv");
    let summary = dir.path().join("summary.csv");
    ok(&["sweep", "--experiment", s(&fixture("experiment.toml")), "--out", s(&results)]);
    let rows = std::fs::read_to_string(&results).unwrap();
    assert_eq!(rows.lines().count(), 1 + 4 * 2 * 3);
    ok(&["report", "--results", s(&results), "--out", s(&summary)]);
    let text = std::fs::read_to_string(&summary).unwrap();
    let modes = column(&text, "mode");
    let speedups = column(&text, "speedup");
    let da: Vec<f64> = modes
        .iter()
        .zip(&speedups)
        .filter(|(m, _)| *m == "depasync")
        .map(|(_, v)| v.parse().unwrap())
        .collect();
    assert_eq!(da.len(), 4);
    assert!(da.windows(2).all(|w| w[1] >= w[0]), "{da:?}");
    assert!(da[0] > 1.0);
}

#[test]
fn sweep_from_flags() {
    let dir = tempfile::tempdir().unwrap();
    let results = dir.path().join("r.csv");
    let stdout = ok(&[
        "sweep",
        "--workload",
        s(&fixture("small_layered.toml")),
        "--axis",
        "mapping=plain,hilbert",
        "--seeds",
        "1,2",
        "--modes",
        "sync,depasync",
        "--grid",
        "2x2",
        "--out",
        s(&results),
    ]);
    assert!(stdout.starts_with("rows=8 inexact=0"), "{stdout}");
}

#[test]
fn report_breaks_down_single_run() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    ok(&["run", "--workload", s(&fixture("small_net.json")), "--grid", "2x2", "--out", s(&report)]);
    let text = ok(&["report", "--results", s(&report)]);
    assert_eq!(text.lines().count(), 1 + 4);
    assert!(text.starts_with("core,busy,wait,rollback"));
}

#[test]
fn failures_exit_with_distinct_codes() {
    let net = fixture("small_net.json");
    let not_a_net = fixture("small_config.toml");
    let tiny = fixture("tiny_capacity.toml");
    let short = fixture("cycle_limit.toml");
    let cases: [(&[&str], i32, &str); 7] = [
        (&["run", "--nope"], 2, "usage"),
        (&["run", "--workload", "missing.json"], 3, "io"),
        (&["run", "--workload", s(&not_a_net)], 4, "workload"),
        (&["run", "--workload", s(&net), "--config", s(&tiny)], 5, "compile"),
        (&["run", "--workload", s(&net), "--m", "0"], 6, "config"),
        (&["run", "--workload", s(&net), "--config", s(&short)], 7, "simulation"),
        (&["sweep", "--workload", "layered", "--axis", "rate=0.1", "--out", "x.csv"], 6, "config"),
    ];
    for (args, code, kind) in cases {
        let (got, line) = err(args);
        assert_eq!(got, code, "{args:?}: {line}");
        assert!(line.starts_with(&format!("error: kind={kind} code={code} msg=")), "{line}");
    }
}
