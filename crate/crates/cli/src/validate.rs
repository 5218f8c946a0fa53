//! `validate`: analytic and simulation cross-checks grouped into suites.

use std::path::Path;

use collapse_core::analytic::{bm_closed_form_lst_theta, level_crossing_p0, mm1_closed_form_lst_theta};
use collapse_core::sim::{
    coupling_check, explicit_solution, ks_critical_1pct, ks_statistic, lindley_step, stream_rng, ChainState,
    WlSampler,
};
use collapse_core::{CollapseLaw, JumpDist, LevyModel, PoolSpec, StationarySolution};
use rand::Rng;

use crate::commands::{merge_replicates, pool_spec, run_replications, tail_rows, Report};
use crate::config::{Engine, RunConfig, Suite};
use crate::error::{CliError, Result};
use crate::output::{ensure_dir, num, Table};

/// One row of `validate.csv`. A check passes when `|observed - expected| <= tol`
/// unless the suite documents a different rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub expected: f64,
    pub observed: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Check {
    fn abs(name: impl Into<String>, expected: f64, observed: f64, tol: f64) -> Self {
        Check {
            name: name.into(),
            expected,
            observed,
            tol,
            pass: (observed - expected).abs() <= tol,
        }
    }

    fn at_most(name: impl Into<String>, observed: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            expected: 0.0,
            observed,
            tol: bound,
            pass: observed <= bound,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Validation {
    pub report: Report,
    pub checks: Vec<Check>,
}

impl Validation {
    pub fn failed(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass).count()
    }
}

fn solve(cfg: &RunConfig) -> Result<StationarySolution> {
    Ok(StationarySolution::solve(&cfg.model, cfg.lambda, cfg.collapse)?)
}

fn below_root_grid(cfg: &RunConfig, al: f64) -> Vec<f64> {
    let mut g: Vec<f64> = (0..20).map(|i| 0.95 * al * i as f64 / 19.0).collect();
    g.extend(cfg.alphas.iter().copied().filter(|&a| a < 0.95 * al));
    g
}

fn bm_closed_form(cfg: &RunConfig, tol: f64) -> Result<Vec<Check>> {
    let LevyModel::BrownianDrift { c, sigma2 } = cfg.model else {
        return Err(CliError::validation("suite", "bm-closed-form needs model.kind = bm"));
    };
    let sol = solve(cfg)?;
    let root = Check::abs(
        "phi(alpha_lambda)",
        cfg.lambda,
        cfg.model.laplace_exponent(sol.alpha_lambda()),
        1e-12 * cfg.lambda,
    );
    let mut out = vec![root];
    for a in below_root_grid(cfg, sol.alpha_lambda()) {
        let exact = bm_closed_form_lst_theta(c, sigma2, cfg.lambda, sol.theta(), a)?;
        out.push(Check::abs(format!("f({a})"), exact, sol.lst(a)?, tol));
    }
    Ok(out)
}

fn mm1_closed_form(cfg: &RunConfig, tol: f64) -> Result<Vec<Check>> {
    let LevyModel::CppMinusDrift {
        d,
        gamma,
        jumps: JumpDist::Exponential { mu },
    } = cfg.model
    else {
        return Err(CliError::validation(
            "suite",
            "mm1-closed-form needs model.kind = cpp with exp jumps",
        ));
    };
    let sol = solve(cfg)?;
    let mut out = Vec::new();
    for a in below_root_grid(cfg, sol.alpha_lambda()) {
        let exact = mm1_closed_form_lst_theta(d, gamma, mu, cfg.lambda, sol.theta(), a)?;
        out.push(Check::abs(format!("f({a})"), exact, sol.lst(a)?, tol));
    }
    if sol.theta() == 1.0 {
        let p0 = level_crossing_p0(d, cfg.lambda, sol.b())?;
        out.push(Check::abs("atom", p0, sol.atom(), 1e-12));
    }
    Ok(out)
}

fn fixed_point(cfg: &RunConfig, tol: f64) -> Result<Vec<Check>> {
    let sol = solve(cfg)?;
    let al = sol.alpha_lambda();
    let mut out = Vec::new();
    for i in 0..=30 {
        let a = 3.0 * al * i as f64 / 30.0;
        // The residual is evaluated off the root, where the integral equation holds pointwise.
        if (a - al).abs() < 1e-3 * al {
            continue;
        }
        out.push(Check::at_most(format!("residual({a})"), sol.fixed_point_residual(a)?, tol));
    }
    Ok(out)
}

fn continuity(cfg: &RunConfig, tol: f64) -> Result<Vec<Check>> {
    let sol = solve(cfg)?;
    let al = sol.alpha_lambda();
    let mid = sol.middle_branch();
    let eps = 1e-6 * al;
    Ok(vec![
        Check::abs("f(alpha_lambda-)", mid, sol.lst(al - eps)?, tol),
        Check::abs("f(alpha_lambda)", mid, sol.lst(al)?, tol),
        Check::abs("f(alpha_lambda+)", mid, sol.lst(al + eps)?, tol),
    ])
}

fn moments(cfg: &RunConfig, tol: f64) -> Result<Vec<Check>> {
    if !cfg.model.cumulant(2).is_finite() {
        return Err(CliError::validation(
            "suite",
            "the moments suite differentiates the transform at zero and needs finite second moments",
        ));
    }
    let sol = solve(cfg)?;
    let f = |a: f64| sol.lst(a);
    let h = 1e-4 * sol.alpha_lambda().min(1.0);
    let d1 = |h: f64| Ok::<f64, collapse_core::Error>((f(h)? - f(-h)?) / (2.0 * h));
    let d2 = |h: f64| Ok::<f64, collapse_core::Error>((f(h)? - 2.0 + f(-h)?) / (h * h));
    let m1 = -(4.0 * d1(h)? - d1(2.0 * h)?) / 3.0;
    let m2 = (4.0 * d2(h)? - d2(2.0 * h)?) / 3.0;
    let m = sol.moments(2);
    Ok(vec![
        Check::abs("m1", m1, m[1], tol * m1.abs().max(1e-300)),
        Check::abs("m2", m2, m[2], tol * m2.abs().max(1e-300)),
    ])
}

fn mc_alphas(cfg: &RunConfig, al: f64) -> Vec<f64> {
    if cfg.alphas.is_empty() {
        [0.25, 0.5, 1.0, 2.0].iter().map(|k| k * al).collect()
    } else {
        cfg.alphas.clone()
    }
}

/// Estimate against exact value; passes within `z` standard errors. A zero
/// standard error demands exact agreement.
fn z_check(name: impl Into<String>, exact: f64, est: (f64, f64), z: f64) -> Check {
    Check::abs(name, exact, est.0, z * est.1)
}

fn monte_carlo(cfg: &RunConfig, z: f64) -> Result<Vec<Check>> {
    let sol = solve(cfg)?;
    let alphas = mc_alphas(cfg, sol.alpha_lambda());
    let spec = PoolSpec {
        alphas: alphas.clone(),
        ..pool_spec(cfg)
    };
    let pool = merge_replicates(&run_replications(cfg, cfg.engine, &spec, 0)?)?;
    let m = sol.moments(2);
    let mut out = vec![z_check("mean", m[1], pool.mean()?, z)];
    if m[2].is_finite() {
        out.push(z_check("second_moment", m[2], pool.second_moment()?, z));
    }
    for a in alphas {
        out.push(z_check(format!("lst({a})"), sol.lst(a)?, pool.lst(a)?, z));
    }
    Ok(out)
}

fn atom(cfg: &RunConfig, z: f64) -> Result<Vec<Check>> {
    let sol = solve(cfg)?;
    let p0 = sol.atom();
    let mut out = vec![Check::abs(
        "f(1e4 alpha_lambda)",
        p0,
        sol.lst(1e4 * sol.alpha_lambda())?,
        1e-3,
    )];
    let pool = merge_replicates(&run_replications(cfg, cfg.engine, &pool_spec(cfg), 0)?)?;
    let n = pool.count() as f64;
    let freq = pool.zero_count() as f64 / n;
    // Binomial standard error under the analytic atom.
    let se = (p0 * (1.0 - p0) / n).sqrt();
    out.push(Check::abs("zero_fraction", p0, freq, z * se));
    Ok(out)
}

fn routes(cfg: &RunConfig) -> Result<Vec<Check>> {
    WlSampler::for_model(&cfg.model, cfg.lambda).map_err(|e| CliError::validation("suite", e))?;
    let mut engines = vec![Engine::Embedded, Engine::Loynes];
    if cfg.model.sigma2() == 0.0 || cfg.step_h.is_some() {
        engines.push(Engine::Path);
    }
    let spec = pool_spec(cfg);
    let mut samples = Vec::new();
    for (k, &e) in engines.iter().enumerate() {
        let pool = merge_replicates(&run_replications(cfg, e, &spec, (k as u64) << 32)?)?;
        samples.push((e, pool.reservoir()));
    }
    let mut out = Vec::new();
    for i in 0..samples.len() {
        for j in i + 1..samples.len() {
            let (a, b) = (&samples[i].1, &samples[j].1);
            out.push(Check::at_most(
                format!("ks({}/{})", samples[i].0.name(), samples[j].0.name()),
                ks_statistic(a, b),
                ks_critical_1pct(a.len(), b.len()),
            ));
        }
    }
    Ok(out)
}

fn coupling(cfg: &RunConfig, tol: f64) -> Result<Vec<Check>> {
    let mut rng = stream_rng(cfg.seed, 0);
    let (mut worst, mut min_diff) = (0.0f64, f64::INFINITY);
    for run in 0..cfg.replications {
        let x0 = rng.random_range(0.0..5.0);
        let y0 = x0 + rng.random_range(0.0..10.0);
        let mut run_rng = stream_rng(cfg.seed, 1 + run);
        let r = coupling_check(
            &cfg.model,
            cfg.lambda,
            cfg.collapse,
            x0,
            y0,
            cfg.n_samples,
            cfg.step_h,
            &mut run_rng,
        )?;
        worst = worst.max(r.max_violation);
        min_diff = min_diff.min(r.min_difference);
    }
    Ok(vec![
        Check::at_most("max_contraction_violation", worst, tol),
        Check::at_most("max_order_violation", (-min_diff).max(0.0), tol),
    ])
}

fn euler(cfg: &RunConfig, tol: f64) -> Result<Vec<Check>> {
    if cfg.model.sigma2() == 0.0 || cfg.step_h.is_none() {
        return Err(CliError::validation(
            "step_h",
            "the euler suite needs a Brownian component and a step size",
        ));
    }
    WlSampler::for_model(&cfg.model, cfg.lambda).map_err(|e| CliError::validation("suite", e))?;
    let spec = pool_spec(cfg);
    let chain = merge_replicates(&run_replications(cfg, Engine::Embedded, &spec, 0)?)?;
    let path = merge_replicates(&run_replications(cfg, Engine::Path, &spec, 1 << 32)?)?;
    Ok(vec![Check::at_most(
        "ks(embedded/path)",
        ks_statistic(&chain.reservoir(), &path.reservoir()),
        tol,
    )])
}

/// Passes when the Wilson interval for the ratio meets `K [1 - tol, 1 + tol]`.
fn tail(cfg: &RunConfig, tol: f64) -> Result<Vec<Check>> {
    let (rows, k) = tail_rows(cfg)?;
    Ok(rows
        .iter()
        .map(|r| Check {
            name: format!("tail_ratio({})", r.threshold),
            expected: k,
            observed: r.ratio,
            tol: tol * k,
            pass: r.ratio_hi >= k * (1.0 - tol) && r.ratio_lo <= k * (1.0 + tol),
        })
        .collect())
}

fn explicit(cfg: &RunConfig, tol: f64) -> Result<Vec<Check>> {
    let mut rng = stream_rng(cfg.seed, 0);
    let mut worst = 0.0f64;
    for _ in 0..1_000 {
        let n = rng.random_range(0..=100);
        let v: Vec<f64> = (0..=n).map(|_| rng.random_range(0.0..3.0)).collect();
        let u: Vec<f64> = (0..n)
            .map(|_| if rng.random_bool(0.05) { 0.0 } else { rng.random() })
            .collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..3.0)).collect();
        let mut state = ChainState::new(v[0]);
        for i in 0..n {
            state = lindley_step(state, v[i + 1], u[i], y[i]);
        }
        worst = worst.max((explicit_solution(&v, &u, &y)? - state.zeta).abs());
    }
    Ok(vec![Check::at_most("max_explicit_vs_recursion", worst, tol)])
}

fn default_tol(suite: Suite) -> f64 {
    match suite {
        Suite::BmClosedForm | Suite::Mm1ClosedForm => 1e-8,
        Suite::FixedPoint => 1e-7,
        Suite::Continuity | Suite::Moments => 1e-5,
        Suite::MonteCarlo | Suite::Atom => 3.0,
        Suite::Coupling => 1e-9,
        Suite::Euler => 0.01,
        Suite::Tail => 0.3,
        Suite::Explicit => 1e-12,
        Suite::Routes | Suite::All => f64::NAN,
    }
}

/// Suites that apply to the configured model, in the order `all` runs them.
fn applicable(cfg: &RunConfig) -> Vec<Suite> {
    let exact = WlSampler::for_model(&cfg.model, cfg.lambda).is_ok();
    let mut s = Vec::new();
    if matches!(cfg.model, LevyModel::BrownianDrift { .. }) {
        s.push(Suite::BmClosedForm);
    }
    if matches!(
        cfg.model,
        LevyModel::CppMinusDrift {
            jumps: JumpDist::Exponential { .. },
            ..
        }
    ) {
        s.push(Suite::Mm1ClosedForm);
    }
    s.extend([Suite::FixedPoint, Suite::Continuity]);
    if cfg.model.cumulant(2).is_finite() {
        s.push(Suite::Moments);
    }
    if exact || cfg.engine == Engine::Path {
        s.extend([Suite::MonteCarlo, Suite::Atom]);
    }
    if exact {
        s.push(Suite::Routes);
    }
    if cfg.model.sigma2() == 0.0 || cfg.step_h.is_some() {
        s.push(Suite::Coupling);
    }
    if exact && cfg.model.sigma2() > 0.0 && cfg.step_h.is_some() {
        s.push(Suite::Euler);
    }
    let pareto = matches!(
        cfg.model,
        LevyModel::CppMinusDrift {
            jumps: JumpDist::Pareto { .. },
            ..
        }
    );
    if pareto && cfg.collapse == CollapseLaw::Uniform01 && !cfg.thresholds.is_empty() {
        s.push(Suite::Tail);
    }
    s.push(Suite::Explicit);
    s
}

pub fn run_suite(cfg: &RunConfig, suite: Suite) -> Result<Vec<Check>> {
    let tol = cfg.tolerance.unwrap_or(default_tol(suite));
    let checks = match suite {
        Suite::BmClosedForm => bm_closed_form(cfg, tol)?,
        Suite::Mm1ClosedForm => mm1_closed_form(cfg, tol)?,
        Suite::FixedPoint => fixed_point(cfg, tol)?,
        Suite::Continuity => continuity(cfg, tol)?,
        Suite::Moments => moments(cfg, tol)?,
        Suite::MonteCarlo => monte_carlo(cfg, tol)?,
        Suite::Atom => atom(cfg, tol)?,
        Suite::Routes => routes(cfg)?,
        Suite::Coupling => coupling(cfg, tol)?,
        Suite::Euler => euler(cfg, tol)?,
        Suite::Tail => tail(cfg, tol)?,
        Suite::Explicit => explicit(cfg, tol)?,
        Suite::All => {
            let mut all = Vec::new();
            for s in applicable(cfg) {
                // Overrides are per suite, so `all` keeps each suite's default.
                let scoped = RunConfig {
                    tolerance: None,
                    ..cfg.clone()
                };
                all.extend(run_suite(&scoped, s)?);
            }
            return Ok(all);
        }
    };
    Ok(checks
        .into_iter()
        .map(|c| Check {
            name: format!("{}:{}", suite.name(), c.name),
            ..c
        })
        .collect())
}

pub fn run_validate(cfg: &RunConfig, out: Option<&Path>) -> Result<Validation> {
    let suite = cfg
        .suite
        .ok_or_else(|| CliError::validation("suite", "validate needs a suite"))?;
    let checks = run_suite(cfg, suite)?;
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| ".".into());
    ensure_dir(&dir)?;
    let mut t = Table::new(&["check", "expected", "observed", "tol", "pass"]);
    for c in &checks {
        t.row([c.name.clone(), num(c.expected), num(c.observed), num(c.tol), c.pass.to_string()]);
    }
    let file = t.write(&dir, "validate.csv")?;
    let failed: Vec<&Check> = checks.iter().filter(|c| !c.pass).collect();
    let mut lines = vec![format!(
        "suite {}: {} of {} checks passed",
        suite.name(),
        checks.len() - failed.len(),
        checks.len()
    )];
    for c in failed {
        lines.push(format!(
            "FAIL {}: expected {}, observed {}, tol {}",
            c.name, c.expected, c.observed, c.tol
        ));
    }
    Ok(Validation {
        report: Report {
            files: vec![file],
            lines,
        },
        checks,
    })
}
