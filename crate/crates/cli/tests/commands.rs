use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use collapse_cli::{dispatch, parse_config, run_analyze, run_simulate, run_validate, CliError, Command, RunConfig};
use collapse_core::analytic::level_crossing_p0;

const BM: &str = "model.kind = bm\nmodel.c = 0\nmodel.sigma2 = 2\nlambda = 1\nseed = 3\n";
const MM1: &str = "model.kind = cpp\nmodel.d = 1\nmodel.gamma = 1\nmodel.jumps = exp\nmodel.mu = 2\nlambda = 1\nseed = 3\n";

fn cfg(text: &str) -> RunConfig {
    parse_config(text).unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

/// `stat -> value` from a summary file.
fn summary_value(csv: &str, stat: &str) -> f64 {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').collect::<Vec<_>>())
        .find(|f| f[0] == stat)
        .unwrap_or_else(|| panic!("no {stat} in\n{csv}"))[1]
        .parse()
        .unwrap()
}

#[test]
fn analyze_canonical_brownian() {
    let dir = tempfile::tempdir().unwrap();
    run_analyze(&cfg(&format!("{BM}alphas = 0, 0.5, 1, 2\nmoments = 2\n")), Some(dir.path())).unwrap();
    let summary = read(dir.path(), "summary.csv");
    assert!((summary_value(&summary, "alpha_lambda") - 1.0).abs() < 1e-12);
    assert!((summary_value(&summary, "b") - 4.0 / PI).abs() < 1e-8);
    assert_eq!(summary_value(&summary, "atom"), 0.0);

    let lst = read(dir.path(), "lst.csv");
    let rows: Vec<Vec<&str>> = lst.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0], ["alpha", "f_alpha", "branch"]);
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[1][1].parse::<f64>().unwrap(), 1.0);
    assert_eq!([rows[2][2], rows[3][2], rows[4][2]], ["below", "at", "above"]);
    let f1: f64 = rows[3][1].parse().unwrap();
    assert!((f1 - 4.0 / (3.0 * PI)).abs() < 1e-7);

    let moments = read(dir.path(), "moments.csv");
    let m: Vec<f64> = moments.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(m.len(), 3);
    assert!((m[1] - 4.0 / PI).abs() < 1e-8 && (m[2] - 3.0).abs() < 1e-8);
}

#[test]
fn analyze_mm1_atom_matches_level_crossing() {
    let dir = tempfile::tempdir().unwrap();
    run_analyze(&cfg(&format!("{MM1}alphas = 1\n")), Some(dir.path())).unwrap();
    let summary = read(dir.path(), "summary.csv");
    let b = summary_value(&summary, "b");
    let p0 = level_crossing_p0(1.0, 1.0, b).unwrap();
    assert!((summary_value(&summary, "atom") - p0).abs() < 1e-15);
    assert!((p0 - b / 2.0).abs() < 1e-15);
}

#[test]
fn analyze_without_alphas_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    match run_analyze(&cfg(BM), Some(dir.path())) {
        Err(CliError::Validation { key, .. }) => assert_eq!(key, "alphas"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn simulate_brownian_mean() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{BM}n_samples = 250000\nreplications = 4\nthreads = 2\nalphas = 0.5\nreservoir = 100\n");
    run_simulate(&cfg(&text), Some(dir.path())).unwrap();
    let summary = read(dir.path(), "summary.csv");
    assert!(summary.starts_with("stat,value,stderr\n"));
    let row: Vec<&str> = summary.lines().find(|l| l.starts_with("mean,")).unwrap().split(',').collect();
    let (mean, se): (f64, f64) = (row[1].parse().unwrap(), row[2].parse().unwrap());
    assert!((mean - 4.0 / PI).abs() <= 3.0 * se, "{mean} +- {se}");
    assert_eq!(summary_value(&summary, "count"), 1e6);

    let samples = read(dir.path(), "samples.csv");
    let lines: Vec<&str> = samples.lines().collect();
    assert_eq!(lines[0], "replicate,n,zeta");
    assert_eq!(lines.len(), 1 + 4 * 100);
    assert!(lines[1..].iter().all(|l| l.split(',').nth(2).unwrap().parse::<f64>().unwrap() > 0.0));
}

#[test]
fn simulate_is_byte_deterministic_across_thread_counts() {
    let base = format!("{MM1}n_samples = 20000\nreplications = 4\nalphas = 1\nreservoir = 50\n");
    let mut outputs = Vec::new();
    for threads in [1, 3, 1] {
        let dir = tempfile::tempdir().unwrap();
        run_simulate(&cfg(&format!("{base}threads = {threads}\n")), Some(dir.path())).unwrap();
        outputs.push((read(dir.path(), "summary.csv"), read(dir.path(), "samples.csv")));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);

    let dir = tempfile::tempdir().unwrap();
    run_simulate(&cfg(&base.replace("seed = 3", "seed = 4")), Some(dir.path())).unwrap();
    assert_ne!(read(dir.path(), "summary.csv"), outputs[0].0);
}

#[test]
fn simulate_every_engine() {
    for engine in ["embedded", "loynes", "path"] {
        let dir = tempfile::tempdir().unwrap();
        let text = format!("{MM1}engine = {engine}\nn_samples = 200000\nalphas = 1\nthresholds = 1\n");
        run_simulate(&cfg(&text), Some(dir.path())).unwrap();
        let summary = read(dir.path(), "summary.csv");
        let row: Vec<f64> = summary
            .lines()
            .find(|l| l.starts_with("zero_fraction,"))
            .unwrap()
            .split(',')
            .skip(1)
            .map(|x| x.parse().unwrap())
            .collect();
        let p0 = 1.2567197431190821 / 2.0;
        assert!((row[0] - p0).abs() <= 4.0 * row[1], "{engine}: {row:?}");
        assert_eq!(summary.contains("time_mean_level"), engine == "path");
    }
}

#[test]
fn validate_writes_report_and_flags_failures() {
    let dir = tempfile::tempdir().unwrap();
    let v = run_validate(&cfg(&format!("{BM}suite = fixed-point\n")), Some(dir.path())).unwrap();
    assert_eq!(v.failed(), 0);
    let report = read(dir.path(), "validate.csv");
    assert!(report.starts_with("check,expected,observed,tol,pass\n"));
    assert_eq!(report.lines().count(), 1 + v.checks.len());
    assert!(report.lines().skip(1).all(|l| l.ends_with(",true")));

    // An impossible tolerance must fail and surface as exit status 1.
    let strict = cfg(&format!("{BM}suite = continuity\ntolerance = 1e-300\n"));
    let (report, status) = dispatch(Command::Validate, &strict, Some(dir.path()));
    assert!(report.is_some());
    let err = status.unwrap_err();
    assert_eq!(err.exit_code(), 1);
    assert!(read(dir.path(), "validate.csv").contains(",false"));
}

#[test]
fn validate_suites_on_matching_models() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        format!("{BM}suite = bm-closed-form\n"),
        format!("{MM1}suite = mm1-closed-form\n"),
        format!("{MM1}suite = continuity\ncollapse = beta\ncollapse.theta = 3\n"),
        format!("{MM1}suite = moments\n"),
        format!("{MM1}suite = monte-carlo\nn_samples = 200000\n"),
        format!("{MM1}suite = atom\nn_samples = 200000\n"),
        format!("{MM1}suite = routes\nn_samples = 20000\nreservoir = 20000\n"),
        format!("{MM1}suite = coupling\nn_samples = 500\nreplications = 10\n"),
        format!("{BM}suite = explicit\n"),
    ];
    for text in &cases {
        let v = run_validate(&cfg(text), Some(dir.path())).unwrap();
        assert!(!v.checks.is_empty());
        assert_eq!(v.failed(), 0, "{text}\n{:?}", v.checks);
    }
}

#[test]
fn validate_rejects_suites_for_the_wrong_model() {
    let dir = tempfile::tempdir().unwrap();
    match run_validate(&cfg(&format!("{MM1}suite = bm-closed-form\n")), Some(dir.path())) {
        Err(CliError::Validation { key, .. }) => assert_eq!(key, "suite"),
        other => panic!("{other:?}"),
    }
    match run_validate(&cfg(MM1), Some(dir.path())) {
        Err(CliError::Validation { key, .. }) => assert_eq!(key, "suite"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn tail_with_reduced_samples() {
    let dir = tempfile::tempdir().unwrap();
    let text = "model.kind = cpp\nmodel.d = 1\nmodel.gamma = 0.8\nmodel.jumps = pareto\nmodel.delta = 1.5\nmodel.xm = 0.3333333333333333\nlambda = 1\nn_samples = 1e5\nthresholds = 5, 10\nseed = 2\nsuite = tail\n";
    let v = run_validate(&cfg(text), Some(dir.path())).unwrap();
    assert_eq!(v.checks.len(), 2);
    for c in &v.checks {
        assert!((c.expected - 0.8 * 2.5 / 1.5).abs() < 1e-15);
        assert!(c.tol > 0.0);
    }
    collapse_cli::run_tail(&cfg(text), Some(dir.path())).unwrap();
    let tail = read(dir.path(), "tail.csv");
    assert!(tail.starts_with("threshold,exceedances,p_hat,p_jump,ratio,ratio_lo,ratio_hi,k\n"));
    assert_eq!(tail.lines().count(), 3);
}
