use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_colombeau"))
        .args(args)
        .current_dir(dir)
        .env_remove("COLOMBEAU_CONFIG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn verify_is_deterministic_and_renders() {
    let dir = tempfile::tempdir().unwrap();
    let a = run(&["verify", "--suite", "E-supp-*", "--out", "a.json"], dir.path());
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert!(stdout(&a).contains("3/3 checks passed"));
    let b = run(&["verify", "--suite", "E-supp-*", "--out", "b.json", "--jobs", "2"], dir.path());
    assert_eq!(b.status.code(), Some(0));
    let ja = std::fs::read(dir.path().join("a.json")).unwrap();
    assert_eq!(ja, std::fs::read(dir.path().join("b.json")).unwrap());
    let r = run(&["report", "render", "a.json"], dir.path());
    assert_eq!(r.status.code(), Some(0));
    assert!(stdout(&r).starts_with("check_id,log2_eps,log2_magnitude\n"));
}

#[test]
fn list_names_the_registry() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["list"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let ids: Vec<String> = stdout(&o).lines().map(|l| l.split_whitespace().next().unwrap_or("").to_string()).collect();
    assert!(ids.len() >= 24);
    assert!(ids.iter().any(|i| i == "T-delta-kernel"));
}

#[test]
fn valuation_prints_the_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["valuation", "eps^2"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let first = stdout(&o).lines().next().unwrap().to_string();
    let slope: f64 = first.rsplit(' ').next().unwrap().parse().unwrap();
    assert!((slope - 2.0).abs() <= 0.05, "{first}");
    let o = run(&["valuation", "exp(-1/eps)"], dir.path());
    assert!(stdout(&o).starts_with("BeyondOrder"), "{}", stdout(&o));
}

#[test]
fn configuration_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["--eps-kmax", "7", "valuation", "eps"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["verify", "--suite", "no-such-check", "--out", "x.json"], dir.path()).status.code(), Some(2));
    std::fs::write(dir.path().join("bad.json"), r#"{"corpus_version": "other"}"#).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_colombeau"))
        .args(["valuation", "eps"])
        .current_dir(dir.path())
        .env("COLOMBEAU_CONFIG", "bad.json")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&o.stderr).is_empty());
    assert_eq!(run(&["valuation", "eps +"], dir.path()).status.code(), Some(2));
}

#[test]
fn mollifier_moment_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["mollifier", "check", "--alpha-max", "6"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).lines().count() >= 7);
}
