use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn collapse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_collapse")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.conf");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stderr_line(out: &Output) -> String {
    let s = String::from_utf8(out.stderr.clone()).unwrap();
    assert_eq!(s.lines().count(), 1, "diagnostic must be one line: {s:?}");
    s.trim_end().to_string()
}

const BM: &str = "model.kind = bm\nmodel.c = 0\nmodel.sigma2 = 2\nlambda = 1\nalphas = 0.5, 1\nseed = 1\n";

#[test]
fn analyze_succeeds_and_quiet_prints_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_config(dir.path(), BM);
    let out_dir = dir.path().join("out");
    let out = collapse(&["analyze", "--config", &conf, "--out", out_dir.to_str().unwrap(), "--quiet"]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty() && out.stderr.is_empty());
    assert!(out_dir.join("lst.csv").exists());
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_config(dir.path(), &BM.replace("lambda = 1\n", ""));
    let out = collapse(&["analyze", "--config", &conf, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let line = stderr_line(&out);
    assert!(line.starts_with("error kind=validation: invalid lambda"), "{line}");

    let conf = write_config(dir.path(), &format!("{BM}what\n"));
    let out = collapse(&["analyze", "--config", &conf]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_line(&out).contains("line 7"));

    let out = collapse(&["analyze", "--config", "/nonexistent/run.conf"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_line(&out).starts_with("error kind=io"));

    let out = collapse(&["analyze"]);
    assert_eq!(out.status.code(), Some(2));
    stderr_line(&out);

    let out = collapse(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    stderr_line(&out);
}

#[test]
fn failed_checks_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_config(dir.path(), &format!("{BM}suite = continuity\ntolerance = 1e-300\n"));
    let out = collapse(&["validate", "--config", &conf, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_line(&out).starts_with("error kind=checks"));
    assert!(dir.path().join("validate.csv").exists());
}

#[test]
fn numeric_failures_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    // The root search overflows long before phi reaches lambda.
    let conf = write_config(dir.path(), &BM.replace("model.c = 0\nmodel.sigma2 = 2", "model.c = 1e300\nmodel.sigma2 = 1e-300"));
    let out = collapse(&["analyze", "--config", &conf, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr_line(&out).starts_with("error kind=numeric"));
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let text = "model.kind = cpp\nmodel.d = 1\nmodel.gamma = 1\nmodel.jumps = exp\nmodel.mu = 2\nlambda = 1\nn_samples = 5000\nreservoir = 20\n";
    let conf = write_config(dir.path(), text);
    let run = |seed: &str, sub: &str| {
        let out_dir = dir.path().join(sub);
        let out = collapse(&["simulate", "--config", &conf, "--seed", seed, "--out", out_dir.to_str().unwrap(), "--quiet"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        fs::read(out_dir.join("samples.csv")).unwrap()
    };
    let a = run("7", "a");
    let b = run("7", "b");
    let c = run("8", "c");
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn shipped_validate_configs_pass() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/validate");
    let tmp = tempfile::tempdir().unwrap();
    for name in ["bm-closed-form", "mm1-closed-form", "fixed-point", "continuity", "moments", "explicit", "coupling", "tail"] {
        let conf = format!("{dir}/{name}.conf");
        let out_dir = tmp.path().join(name);
        let out = collapse(&["validate", "--config", &conf, "--out", out_dir.to_str().unwrap(), "--quiet"]);
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        let report = fs::read_to_string(out_dir.join("validate.csv")).unwrap();
        assert!(!report.contains(",false"), "{name}:\n{report}");
    }
}
