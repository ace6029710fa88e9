use std::path::PathBuf;
use std::process::{Command, Output};

use nahodge::io::{DescentDump, KappaDump, Report, SpectrumDump};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nahodge")).args(args).output().expect("binary runs")
}

fn run_fixtures(args: &[&str], files: &[&str]) -> Output {
    let paths: Vec<String> = files.iter().map(|f| fixture(f).display().to_string()).collect();
    let mut all: Vec<&str> = args.to_vec();
    all.extend(paths.iter().map(|s| s.as_str()));
    run(&all)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn cubic_spectrum_reports_the_zero_tuple() {
    let out = run_fixtures(&["spectrum"], &["cubic.frame", "cubic_a.ev"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.starts_with("# truncation=24 epsilon=1/2 format=text seed=0 strict=false"));
    assert!(text.contains("0 | 24 | 2 1 0 1"), "{text}");
    assert!(text.contains("9*a*b^2 | 1 | 1 0 0 0"), "{text}");
}

#[test]
fn splitting_failure_names_the_residual_degree() {
    let out = run_fixtures(&["spectrum", "--field", "Q"], &["cubic.frame", "cubic_a.ev"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("degree 2"), "{err}");
}

#[test]
fn family_property_fails_on_the_cubic() {
    let out = run_fixtures(&["property", "heart", "--family", "t"], &["cubic.frame"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("verdict: FAIL"), "{text}");
}

#[test]
fn vacuous_property_passes() {
    let out = run_fixtures(&["property", "club"], &["p4.frame"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
}

#[test]
fn ledger_and_descent_run_cleanly() {
    let out = run_fixtures(&["ledger", "--target-nu", "1"], &["cubic_ledger.json"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("must be carried by a centre among: S"));
    let out = run_fixtures(&["--format", "json", "descent"], &["descent_gaussian.json"]);
    assert_eq!(out.status.code(), Some(0));
    let report: Report<DescentDump> = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report.body.m, 2);
    assert_eq!(report.body.det, "-1");
}

#[test]
fn input_errors_exit_with_two() {
    let out = run(&["spectrum", "/nonexistent/frame.json", "/nonexistent/ev.json"]);
    assert_eq!(out.status.code(), Some(2));
    let dir = std::env::temp_dir().join(format!("nahodge-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.frame");
    std::fs::write(&bad, "{ not json").unwrap();
    let out = run(&["kappa", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let ev = dir.join("bad.ev");
    std::fs::write(&ev, r#"{"curves":["a^(3"]}"#).unwrap();
    let out = run(&["spectrum", fixture("cubic.frame").to_str().unwrap(), ev.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn json_reports_deserialize() {
    let out = run_fixtures(&["--format", "json", "--seed", "7", "spectrum"], &["k3.frame", "k3.ev"]);
    assert_eq!(out.status.code(), Some(0));
    let report: Report<SpectrumDump> = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report.config.seed, 7);
    assert_eq!(report.body.rows.len(), 1);
    assert_eq!(report.body.rows[0].multiplicity, 24);
    let out = run_fixtures(&["--format", "json", "kappa"], &["cubic.frame"]);
    let report: Report<KappaDump> = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(report.body.hodge_compatible);
    assert!(report.body.entries.iter().any(|e| e.row == "1" && e.col == "H^2" && e.value == "18*Q"));
}

#[test]
fn output_is_deterministic() {
    let a = run_fixtures(&["--format", "json", "spectrum"], &["abelian.frame", "abelian.ev"]);
    let b = run_fixtures(&["--format", "json", "spectrum"], &["abelian.frame", "abelian.ev"]);
    assert_eq!(a.stdout, b.stdout);
}
