//! The `analyze`, `simulate` and `tail` commands, plus the replication runner
//! shared with `validate`.

use std::path::{Path, PathBuf};

use collapse_core::analytic::tail_constant;
use collapse_core::sim::{
    embedded_chain_run, loynes_truncated_sample, path_simulate, stream_rng, tail_experiment, PathConfig, StopRule,
    TailRow, TimeStats, WlSampler,
};
use collapse_core::{CollapseLaw, JumpDist, LevyModel, PoolSpec, SamplePool, StationarySolution};
use rayon::prelude::*;

use crate::config::{Engine, RunConfig};
use crate::error::{CliError, Result};
use crate::output::{ensure_dir, num, Table};

/// What a command wrote, and a few human-readable lines about it.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub lines: Vec<String>,
}

/// Output of one replication.
#[derive(Debug, Clone)]
pub struct Replicate {
    pub pool: SamplePool,
    /// Time averages, for the path engine only.
    pub time: Option<TimeStats>,
}

fn run_replicate(cfg: &RunConfig, engine: Engine, spec: &PoolSpec, stream: u64) -> Result<Replicate> {
    let mut rng = stream_rng(cfg.seed, stream);
    match engine {
        Engine::Embedded => {
            let sampler = WlSampler::for_model(&cfg.model, cfg.lambda)?;
            let pool = embedded_chain_run(
                &sampler,
                cfg.collapse,
                cfg.burn_in,
                cfg.n_samples,
                spec.clone(),
                stream,
                &mut rng,
            );
            Ok(Replicate { pool, time: None })
        }
        Engine::Loynes => {
            let sampler = WlSampler::for_model(&cfg.model, cfg.lambda)?;
            let mut pool = SamplePool::new(spec.clone(), stream);
            for _ in 0..cfg.n_samples {
                pool.push(loynes_truncated_sample(&sampler, cfg.collapse, cfg.eps_trunc, &mut rng));
            }
            Ok(Replicate { pool, time: None })
        }
        Engine::Path => {
            let path_cfg = PathConfig {
                stop: StopRule::Collapses(cfg.n_samples),
                n_burn: cfg.burn_in,
                step_h: cfg.step_h,
                z0: 0.0,
            };
            let run = path_simulate(&cfg.model, cfg.lambda, cfg.collapse, &path_cfg, spec.clone(), stream, &mut rng)?;
            Ok(Replicate {
                pool: run.pool,
                time: Some(run.time),
            })
        }
    }
}

/// Runs `cfg.replications` independent replications on `cfg.threads`
/// workers. Replication `r` draws from stream `stream_base + r`, so results
/// do not depend on the thread count.
pub fn run_replications(cfg: &RunConfig, engine: Engine, spec: &PoolSpec, stream_base: u64) -> Result<Vec<Replicate>> {
    if engine == Engine::Path && cfg.model.sigma2() > 0.0 && cfg.step_h.is_none() {
        return Err(CliError::validation(
            "step_h",
            "the path engine needs a time step when the input has a Brownian part",
        ));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::validation("threads", e))?;
    pool.install(|| {
        (0..cfg.replications)
            .into_par_iter()
            .map(|r| run_replicate(cfg, engine, spec, stream_base + r))
            .collect()
    })
}

/// Merges replications in order into one pool.
pub fn merge_replicates(reps: &[Replicate]) -> Result<SamplePool> {
    let (first, rest) = reps.split_first().ok_or(collapse_core::Error::EmptyPool)?;
    let mut total = first.pool.clone();
    for r in rest {
        total.merge(&r.pool)?;
    }
    Ok(total)
}

pub fn pool_spec(cfg: &RunConfig) -> PoolSpec {
    PoolSpec {
        alphas: cfg.alphas.clone(),
        thresholds: cfg.thresholds.clone(),
        reservoir_cap: cfg.reservoir,
        ..PoolSpec::default()
    }
}

fn out_dir(cfg: &RunConfig, out: Option<&Path>) -> Result<PathBuf> {
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    ensure_dir(&dir)?;
    Ok(dir)
}

pub fn run_analyze(cfg: &RunConfig, out: Option<&Path>) -> Result<Report> {
    if cfg.alphas.is_empty() {
        return Err(CliError::validation("alphas", "empty alpha grid"));
    }
    let sol = StationarySolution::solve(&cfg.model, cfg.lambda, cfg.collapse)?;
    let grid = sol.transform_grid(&cfg.alphas)?;
    let moments = sol.moments(cfg.moments);
    let dir = out_dir(cfg, out)?;

    let mut lst = Table::new(&["alpha", "f_alpha", "branch"]);
    for ((a, f), b) in grid.alphas.iter().zip(&grid.values).zip(&grid.branch_tags) {
        lst.row([num(*a), num(*f), b.to_string()]);
    }
    let mut mom = Table::new(&["n", "m_n"]);
    for (n, m) in moments.iter().enumerate() {
        mom.row([n.to_string(), num(*m)]);
    }
    let mut summary = Table::new(&["stat", "value"]);
    summary.row(["alpha_lambda".into(), num(sol.alpha_lambda())]);
    summary.row(["b".into(), num(sol.b())]);
    summary.row(["atom".into(), num(sol.atom())]);
    summary.row(["theta".into(), num(sol.theta())]);
    summary.row(["lambda".into(), num(sol.lambda())]);

    Ok(Report {
        files: vec![
            lst.write(&dir, "lst.csv")?,
            mom.write(&dir, "moments.csv")?,
            summary.write(&dir, "summary.csv")?,
        ],
        lines: vec![format!(
            "alpha_lambda = {}, b = {}, atom = {}",
            sol.alpha_lambda(),
            sol.b(),
            sol.atom()
        )],
    })
}

fn stat_row(t: &mut Table, name: String, est: (f64, f64)) {
    t.row([name, num(est.0), num(est.1)]);
}

pub fn run_simulate(cfg: &RunConfig, out: Option<&Path>) -> Result<Report> {
    let spec = pool_spec(cfg);
    let reps = run_replications(cfg, cfg.engine, &spec, 0)?;
    let total = merge_replicates(&reps)?;
    let dir = out_dir(cfg, out)?;

    let mut samples = Table::new(&["replicate", "n", "zeta"]);
    for (r, rep) in reps.iter().enumerate() {
        for (i, z) in rep.pool.reservoir_indexed() {
            samples.row([r.to_string(), i.to_string(), num(z)]);
        }
    }

    let n = total.count();
    let mut summary = Table::new(&["stat", "value", "stderr"]);
    summary.row(["count".to_string(), n.to_string(), String::new()]);
    stat_row(&mut summary, "mean".into(), total.mean()?);
    stat_row(&mut summary, "second_moment".into(), total.second_moment()?);
    stat_row(&mut summary, "zero_fraction".into(), total.zero_fraction()?);
    for &a in &cfg.alphas {
        stat_row(&mut summary, format!("lst({a})"), total.lst(a)?);
    }
    for (&t, &k) in cfg.thresholds.iter().zip(total.exceedances()) {
        let p = k as f64 / n as f64;
        stat_row(&mut summary, format!("exceed({t})"), (p, (p * (1.0 - p) / n as f64).sqrt()));
    }
    let times: Vec<&TimeStats> = reps.iter().filter_map(|r| r.time.as_ref()).collect();
    if !times.is_empty() {
        let elapsed: f64 = times.iter().map(|t| t.elapsed).sum();
        let level: f64 = times.iter().map(|t| t.level_integral).sum();
        let zero: f64 = times.iter().map(|t| t.time_at_zero).sum();
        summary.row(["time_mean_level".to_string(), num(level / elapsed), String::new()]);
        summary.row(["time_zero_fraction".to_string(), num(zero / elapsed), String::new()]);
    }

    let (mean, se) = total.mean()?;
    Ok(Report {
        files: vec![samples.write(&dir, "samples.csv")?, summary.write(&dir, "summary.csv")?],
        lines: vec![format!(
            "{} engine, {} samples over {} replications: mean {mean} +- {se}",
            cfg.engine.name(),
            n,
            cfg.replications
        )],
    })
}

/// Pareto parameters `(d, γ, δ, xm)` for the tail experiment.
fn pareto_parts(model: &LevyModel) -> Option<(f64, f64, f64, f64)> {
    match *model {
        LevyModel::CppMinusDrift {
            d,
            gamma,
            jumps: JumpDist::Pareto { delta, xm },
        } => Some((d, gamma, delta, xm)),
        _ => None,
    }
}

/// Tail rows together with the target constant.
pub fn tail_rows(cfg: &RunConfig) -> Result<(Vec<TailRow>, f64)> {
    let (d, gamma, delta, xm) = pareto_parts(&cfg.model)
        .ok_or_else(|| CliError::validation("model.jumps", "the tail experiment needs model.kind = cpp with pareto jumps"))?;
    if cfg.collapse != CollapseLaw::Uniform01 {
        return Err(CliError::validation("collapse", "the tail experiment uses uniform collapses"));
    }
    if cfg.thresholds.is_empty() {
        return Err(CliError::validation("thresholds", "no thresholds given"));
    }
    let k = tail_constant(gamma, cfg.lambda, delta).map_err(|e| CliError::validation("model.delta", e))?;
    let mut rng = stream_rng(cfg.seed, 0);
    let rows = tail_experiment(gamma, d, cfg.lambda, delta, xm, cfg.n_samples, &cfg.thresholds, 3.0, &mut rng)?;
    Ok((rows, k))
}

pub fn run_tail(cfg: &RunConfig, out: Option<&Path>) -> Result<Report> {
    let (rows, k) = tail_rows(cfg)?;
    let dir = out_dir(cfg, out)?;
    let mut t = Table::new(&[
        "threshold",
        "exceedances",
        "p_hat",
        "p_jump",
        "ratio",
        "ratio_lo",
        "ratio_hi",
        "k",
    ]);
    let mut lines = Vec::new();
    for r in &rows {
        t.row([
            num(r.threshold),
            r.exceedances.to_string(),
            num(r.p_hat),
            num(r.p_jump),
            num(r.ratio),
            num(r.ratio_lo),
            num(r.ratio_hi),
            num(k),
        ]);
        lines.push(format!(
            "t = {}: ratio {:.4} in [{:.4}, {:.4}], constant {k:.4}",
            r.threshold, r.ratio, r.ratio_lo, r.ratio_hi
        ));
    }
    Ok(Report {
        files: vec![t.write(&dir, "tail.csv")?],
        lines,
    })
}
