//! Acceptance suite. Runs every criterion, prints one line each, and exits
//! nonzero if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use collapse_core::analytic::{
    bm_closed_form_lst, find_alpha_lambda, mm1_closed_form_lst, small_alpha_expansion_check, tail_constant,
};
use collapse_core::sim::{
    coupling_check, embedded_chain_run, explicit_solution, ks_critical_1pct, ks_statistic, lindley_step,
    loynes_truncated_sample, path_simulate, stream_rng, tail_experiment, ChainState, PathConfig, PoolSpec,
    SamplePool, WlSampler, DEFAULT_EPS_TRUNC,
};
use collapse_core::{CollapseLaw, JumpDist, LevyModel, Result, StationarySolution};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

fn canonical_bm() -> LevyModel {
    LevyModel::brownian(0.0, 2.0)
}

fn canonical_mm1() -> LevyModel {
    LevyModel::cpp(1.0, 1.0, JumpDist::Exponential { mu: 2.0 })
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn canonical_bm_values() -> Result<Outcome> {
    let start = Instant::now();
    let model = canonical_bm();
    let al = find_alpha_lambda(&model, 1.0)?;
    let sol = StationarySolution::solve(&model, 1.0, CollapseLaw::Uniform01)?;
    let f1 = sol.lst(1.0)?;
    let m = sol.moments(2);
    let elapsed = start.elapsed();
    let pass = within(al, 1.0, 1e-12)
        && within(sol.b(), 4.0 / PI, 1e-8)
        && within(f1, 4.0 / (3.0 * PI), 1e-7)
        && within(m[1], 4.0 / PI, 1e-8)
        && within(m[2], 3.0, 1e-8)
        && elapsed < Duration::from_secs(1);
    Ok(Outcome::new(
        pass,
        format!(
            "alpha_lambda err {:.1e}, b err {:.1e}, f(1) err {:.1e}, m1 err {:.1e}, m2 err {:.1e}, {:?}",
            (al - 1.0).abs(),
            (sol.b() - 4.0 / PI).abs(),
            (f1 - 4.0 / (3.0 * PI)).abs(),
            (m[1] - 4.0 / PI).abs(),
            (m[2] - 3.0).abs(),
            elapsed
        ),
    ))
}

fn grid(al: f64) -> impl Iterator<Item = f64> {
    (0..50).map(move |i| 0.95 * al * i as f64 / 49.0)
}

fn dual_route() -> Result<Outcome> {
    let start = Instant::now();
    let mut rng = stream_rng(2024, 2);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let c = rng.random_range(-2.0..2.0);
        let sigma2 = rng.random_range(0.2..4.0);
        let lambda = rng.random_range(0.2..5.0);
        let model = LevyModel::brownian(c, sigma2);
        let sol = StationarySolution::solve(&model, lambda, CollapseLaw::Uniform01)?;
        for a in grid(sol.alpha_lambda()) {
            worst = worst.max((sol.lst(a)? - bm_closed_form_lst(c, sigma2, lambda, a)?).abs());
        }
    }
    for _ in 0..20 {
        let d = rng.random_range(0.5..3.0);
        let gamma = rng.random_range(0.1..3.0);
        let mu = rng.random_range(0.5..4.0);
        let lambda = rng.random_range(0.2..5.0);
        let model = LevyModel::cpp(d, gamma, JumpDist::Exponential { mu });
        let sol = StationarySolution::solve(&model, lambda, CollapseLaw::Uniform01)?;
        for a in grid(sol.alpha_lambda()) {
            worst = worst.max((sol.lst(a)? - mm1_closed_form_lst(d, gamma, mu, lambda, a)?).abs());
        }
    }
    let elapsed = start.elapsed();
    Ok(Outcome::new(
        worst <= 1e-8 && elapsed < Duration::from_secs(30),
        format!("max |quadrature - closed form| {worst:.2e} over 40 parameter sets, {elapsed:?}"),
    ))
}

fn mixture_model() -> LevyModel {
    LevyModel::Sum {
        parts: vec![
            LevyModel::brownian(-0.3, 1.0),
            LevyModel::cpp(0.5, 0.7, JumpDist::Exponential { mu: 1.5 }),
        ],
    }
}

fn fixed_point() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for model in [canonical_bm(), canonical_mm1(), mixture_model()] {
        let sol = StationarySolution::solve(&model, 1.0, CollapseLaw::Uniform01)?;
        let al = sol.alpha_lambda();
        for i in 0..=30 {
            let a = 3.0 * al * i as f64 / 30.0;
            if (a - al).abs() < 1e-3 * al {
                continue;
            }
            worst = worst.max(sol.fixed_point_residual(a)?);
        }
    }
    Ok(Outcome::new(
        worst <= 1e-7,
        format!("max residual {worst:.2e} on [0, 3 alpha_lambda] for BM, M/M/1 and BM+CPP"),
    ))
}

fn branch_continuity() -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut worst_avg = 0.0f64;
    for model in [canonical_bm(), canonical_mm1(), mixture_model()] {
        for law in [CollapseLaw::Uniform01, CollapseLaw::Beta1 { theta: 2.0 }] {
            let sol = StationarySolution::solve(&model, 1.0, law)?;
            let al = sol.alpha_lambda();
            let mid = sol.middle_branch();
            let eps = 1e-6 * al;
            worst = worst
                .max((sol.lst(al - eps)? - mid).abs())
                .max((sol.lst(al + eps)? - mid).abs());
            // The first-order terms cancel in the symmetric average.
            let wide = 1e-4 * al;
            let avg = 0.5 * (sol.lst(al - wide)? + sol.lst(al + wide)?);
            worst_avg = worst_avg.max((avg - mid).abs());
        }
    }
    Ok(Outcome::new(
        worst <= 1e-5 && worst_avg <= 1e-5,
        format!(
            "max |f(alpha_lambda +- 1e-6 alpha_lambda) - middle| {worst:.2e}, symmetric average at 1e-4: {worst_avg:.2e}"
        ),
    ))
}

fn lst_spec(al: f64) -> PoolSpec {
    PoolSpec {
        alphas: [0.25, 0.5, 1.0, 2.0].iter().map(|k| k * al).collect(),
        ..PoolSpec::default()
    }
}

fn monte_carlo_vs_analytic() -> Result<Outcome> {
    let start = Instant::now();
    let mut pass = true;
    let mut worst_z = 0.0f64;
    for (i, model) in [canonical_bm(), canonical_mm1()].into_iter().enumerate() {
        let sol = StationarySolution::solve(&model, 1.0, CollapseLaw::Uniform01)?;
        let spec = lst_spec(sol.alpha_lambda());
        let sampler = WlSampler::for_model(&model, 1.0)?;
        let mut rng = stream_rng(5, i as u64);
        let pool = embedded_chain_run(&sampler, CollapseLaw::Uniform01, 1_000, 1_000_000, spec.clone(), 0, &mut rng);
        let m = sol.moments(2);
        let mut checks = vec![(pool.mean()?, m[1]), (pool.second_moment()?, m[2])];
        for &a in &spec.alphas {
            checks.push((pool.lst(a)?, sol.lst(a)?));
        }
        for ((est, se), exact) in checks {
            let z = (est - exact).abs() / se;
            worst_z = worst_z.max(z);
            pass &= z <= 3.0;
        }
    }
    let elapsed = start.elapsed();
    Ok(Outcome::new(
        pass && elapsed < Duration::from_secs(20),
        format!("largest deviation {worst_z:.2} SE over 12 statistics, {elapsed:?}"),
    ))
}

fn atom_checks() -> Result<Outcome> {
    let mm1 = canonical_mm1();
    let sol = StationarySolution::solve(&mm1, 1.0, CollapseLaw::Uniform01)?;
    let p0 = sol.lambda() * sol.b() / 2.0;
    let sampler = WlSampler::for_model(&mm1, 1.0)?;
    let mut rng = stream_rng(6, 0);
    let pool = embedded_chain_run(&sampler, CollapseLaw::Uniform01, 1_000, 1_000_000, PoolSpec::default(), 0, &mut rng);
    let n = pool.count() as f64;
    let freq = pool.zero_count() as f64 / n;
    let binom_se = (p0 * (1.0 - p0) / n).sqrt();
    let z = (freq - p0).abs() / binom_se;

    let bm = canonical_bm();
    let sampler = WlSampler::for_model(&bm, 1.0)?;
    let bm_pool = embedded_chain_run(&sampler, CollapseLaw::Uniform01, 1_000, 100_000, PoolSpec::default(), 0, &mut rng);

    let mut worst_limit = 0.0f64;
    for theta in [1.0, 2.0, 5.0] {
        let law = if theta == 1.0 {
            CollapseLaw::Uniform01
        } else {
            CollapseLaw::Beta1 { theta }
        };
        let sol = StationarySolution::solve(&mm1, 1.0, law)?;
        let p0 = sol.lambda() * sol.b() / ((1.0 + theta) * 1.0);
        worst_limit = worst_limit.max((sol.lst(1e4 * sol.alpha_lambda())? - p0).abs());
    }
    Ok(Outcome::new(
        z <= 3.0 && bm_pool.zero_count() == 0 && worst_limit <= 1e-3,
        format!(
            "M/M/1 zero frequency {freq:.5} vs {p0:.5} ({z:.2} binomial SE), BM zeros {}, max |f(1e4 alpha_lambda) - p0| {worst_limit:.1e}",
            bm_pool.zero_count()
        ),
    ))
}

fn route_triangulation() -> Result<Outcome> {
    let start = Instant::now();
    let model = canonical_mm1();
    let law = CollapseLaw::Uniform01;
    let n = 100_000;
    let sampler = WlSampler::for_model(&model, 1.0)?;
    let chain = embedded_chain_run(&sampler, law, 1_000, n, PoolSpec::default(), 0, &mut stream_rng(7, 0));
    let mut rng = stream_rng(7, 1);
    let mut loynes = SamplePool::new(PoolSpec::default(), 1);
    for _ in 0..n {
        loynes.push(loynes_truncated_sample(&sampler, law, DEFAULT_EPS_TRUNC, &mut rng));
    }
    let path = path_simulate(&model, 1.0, law, &PathConfig::collapses(n), PoolSpec::default(), 2, &mut stream_rng(7, 2))?;
    let (a, b, c) = (chain.reservoir(), loynes.reservoir(), path.pool.reservoir());
    let ks = [ks_statistic(&a, &b), ks_statistic(&a, &c), ks_statistic(&b, &c)];
    let crit = ks_critical_1pct(n as usize, n as usize);
    let elapsed = start.elapsed();
    Ok(Outcome::new(
        ks.iter().all(|&d| d < crit) && elapsed < Duration::from_secs(60),
        format!(
            "KS chain/max {:.4}, chain/path {:.4}, max/path {:.4}, critical {crit:.4}, {elapsed:?}",
            ks[0], ks[1], ks[2]
        ),
    ))
}

fn random_exact_model(rng: &mut ChaCha8Rng) -> LevyModel {
    let d = rng.random_range(0.5..3.0);
    let gamma = rng.random_range(0.1..3.0);
    let jumps = match rng.random_range(0..4) {
        0 => JumpDist::Exponential {
            mu: rng.random_range(0.5..4.0),
        },
        1 => JumpDist::Erlang {
            shape: rng.random_range(1..5),
            rate: rng.random_range(0.5..4.0),
        },
        2 => JumpDist::Deterministic {
            size: rng.random_range(0.1..3.0),
        },
        _ => JumpDist::Pareto {
            delta: rng.random_range(1.2..3.0),
            xm: rng.random_range(0.1..1.0),
        },
    };
    LevyModel::cpp(d, gamma, jumps)
}

fn coupling() -> Result<Outcome> {
    let mut rng = stream_rng(8, 0);
    let mut worst = 0.0f64;
    let mut min_diff = f64::INFINITY;
    for run in 0..100 {
        let model = random_exact_model(&mut rng);
        let lambda = rng.random_range(0.2..3.0);
        let law = if rng.random_bool(0.5) {
            CollapseLaw::Uniform01
        } else {
            CollapseLaw::Beta1 {
                theta: rng.random_range(0.3..5.0),
            }
        };
        let x0 = rng.random_range(0.0..5.0);
        let y0 = x0 + rng.random_range(0.0..10.0);
        let mut run_rng = stream_rng(8, 1 + run);
        let report = coupling_check(&model, lambda, law, x0, y0, 1_000, None, &mut run_rng)?;
        worst = worst.max(report.max_violation);
        min_diff = min_diff.min(report.min_difference);
    }
    Ok(Outcome::new(
        worst <= 1e-9 && min_diff >= -1e-9,
        format!("max violation {worst:.2e}, min difference {min_diff:.2e} over 100 runs"),
    ))
}

fn euler_consistency() -> Result<Outcome> {
    let model = canonical_bm();
    let law = CollapseLaw::Uniform01;
    let n = 100_000;
    let sampler = WlSampler::for_model(&model, 1.0)?;
    let chain = embedded_chain_run(&sampler, law, 1_000, n, PoolSpec::default(), 0, &mut stream_rng(9, 0));
    let cfg = PathConfig::collapses(n).with_step(1e-4);
    let path = path_simulate(&model, 1.0, law, &cfg, PoolSpec::default(), 1, &mut stream_rng(9, 1))?;
    let ks = ks_statistic(&chain.reservoir(), &path.pool.reservoir());
    Ok(Outcome::new(ks < 0.01, format!("KS distance {ks:.4} at step 1e-4")))
}

fn heavy_tail() -> Result<Outcome> {
    let (gamma, d, lambda, delta, xm) = (0.8, 1.0, 1.0, 1.5, 1.0 / 3.0);
    let k = tail_constant(gamma, lambda, delta)?;
    let rows = tail_experiment(gamma, d, lambda, delta, xm, 10_000_000, &[5.0, 10.0, 20.0], 3.0, &mut stream_rng(10, 0))?;
    let at10 = rows.iter().find(|r| r.threshold == 10.0).expect("threshold 10 requested");
    let ratio_ok = (at10.ratio - k).abs() <= 0.3 * k;

    let model = LevyModel::cpp(d, gamma, JumpDist::Pareto { delta, xm });
    let check = small_alpha_expansion_check(&model, lambda, &[1e-3, 1e-4])?;
    let flat = (check.ratios[0] / check.ratios[1] - 1.0).abs();
    // First moment from the collapse expectation by quadrature, not the closed form.
    let sol = StationarySolution::solve(&model, lambda, CollapseLaw::Uniform01)?;
    let al = sol.alpha_lambda();
    let m1 = 2.0 * (model.cumulant(1) / lambda + sol.expected_lst_scaled(al)? / al);
    let mean_err = (check.mean - m1).abs();
    Ok(Outcome::new(
        ratio_ok && flat <= 0.1 && mean_err <= 1e-6,
        format!(
            "tail ratio at t=10 {:.4} (target {k:.4} +-30%), expansion ratios {:.4}/{:.4} differ {:.1}%, mean identity err {mean_err:.1e}",
            at10.ratio,
            check.ratios[0],
            check.ratios[1],
            100.0 * flat
        ),
    ))
}

fn explicit_equivalence() -> Result<Outcome> {
    let mut rng = stream_rng(11, 0);
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
        let z = explicit_solution(&v, &u, &y)?;
        worst = worst.max((z - state.zeta).abs());
    }
    Ok(Outcome::new(
        worst <= 1e-12,
        format!("max |explicit - recursion| {worst:.2e} over 1000 instances"),
    ))
}

type Criterion = (&'static str, fn() -> Result<Outcome>);

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("canonical Brownian values", canonical_bm_values),
        ("quadrature vs closed forms", dual_route),
        ("fixed-point residual", fixed_point),
        ("branch continuity at alpha_lambda", branch_continuity),
        ("embedded chain vs analytic", monte_carlo_vs_analytic),
        ("atom at zero", atom_checks),
        ("route triangulation", route_triangulation),
        ("coupling contraction", coupling),
        ("Euler path consistency", euler_consistency),
        ("heavy tail", heavy_tail),
        ("explicit solution equivalence", explicit_equivalence),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = check().unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        if !outcome.pass {
            failures += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {}",
            i + 1,
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
