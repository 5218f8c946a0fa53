//! Continuous-time simulation of the reflected input with collapses.
//!
//! Jump and collapse epochs come from competing exponential clocks. Between
//! events the level drains linearly (clamped at zero), which is exact when
//! there is no Brownian part; otherwise the Gaussian increments are taken on
//! an Euler grid of width `step_h` and reflected step by step.

use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

use crate::error::{Error, Result};
use crate::levy::{CollapseLaw, LevyModel, PathComponents};
use crate::sim::pool::{PoolSpec, SamplePool};
use crate::sim::stats::wilson_interval;

/// When a path simulation stops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    /// After this many recorded collapses (burn-in not counted).
    Collapses(u64),
    /// At this time.
    Horizon(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathConfig {
    pub stop: StopRule,
    /// Collapses discarded before recording starts.
    pub n_burn: u64,
    /// Euler step; required when the input has a Brownian part.
    pub step_h: Option<f64>,
    pub z0: f64,
}

impl PathConfig {
    pub fn collapses(n: u64) -> Self {
        PathConfig {
            stop: StopRule::Collapses(n),
            n_burn: 1_000,
            step_h: None,
            z0: 0.0,
        }
    }

    pub fn with_step(mut self, h: f64) -> Self {
        self.step_h = Some(h);
        self
    }
}

/// Time-average bookkeeping for the first tracked level, after burn-in.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TimeStats {
    pub elapsed: f64,
    pub level_integral: f64,
    pub time_at_zero: f64,
}

impl TimeStats {
    pub fn mean_level(&self) -> f64 {
        self.level_integral / self.elapsed
    }

    pub fn zero_fraction(&self) -> f64 {
        self.time_at_zero / self.elapsed
    }
}

/// Output of [`path_simulate`].
#[derive(Debug, Clone)]
pub struct PathRun {
    /// Levels just before each recorded collapse.
    pub pool: SamplePool,
    pub time: TimeStats,
    pub final_level: f64,
    pub final_time: f64,
}

/// Advances one or more levels with shared randomness.
#[derive(Debug, Clone)]
pub struct PathEngine {
    pc: PathComponents,
    lambda: f64,
    collapse: CollapseLaw,
    step_h: f64,
    sigma: f64,
}

impl PathEngine {
    pub fn new(model: &LevyModel, lambda: f64, collapse: CollapseLaw, step_h: Option<f64>) -> Result<Self> {
        model.validate()?;
        collapse.validate()?;
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Domain(format!("collapse rate must be positive, got {lambda}")));
        }
        let pc = model.path_components();
        let step_h = if pc.sigma2 > 0.0 {
            match step_h {
                Some(h) if h > 0.0 && h.is_finite() => h,
                Some(h) => return Err(Error::Config(format!("step_h must be positive, got {h}"))),
                None => return Err(Error::Config("step_h is required for inputs with a Brownian part".into())),
            }
        } else {
            0.0
        };
        let sigma = pc.sigma2.sqrt();
        Ok(PathEngine {
            pc,
            lambda,
            collapse,
            step_h,
            sigma,
        })
    }

    /// Whether paths are simulated without discretization error.
    pub fn is_exact(&self) -> bool {
        self.pc.sigma2 == 0.0
    }

    /// Evolves `levels` over `dt` with no jumps or collapses, adding the
    /// time statistics of `levels[0]` to `stats` when given.
    pub fn evolve<R: Rng + ?Sized>(&self, levels: &mut [f64], dt: f64, stats: Option<&mut TimeStats>, rng: &mut R) {
        if self.is_exact() {
            self.drain(levels, dt, stats);
        } else {
            self.euler(levels, dt, stats, rng);
        }
    }

    fn drain(&self, levels: &mut [f64], dt: f64, stats: Option<&mut TimeStats>) {
        let a = self.pc.drift;
        if let Some(s) = stats {
            let z = levels[0];
            s.elapsed += dt;
            if a >= 0.0 || z + a * dt >= 0.0 {
                s.level_integral += dt * (z + 0.5 * a * dt);
                if z == 0.0 && a == 0.0 {
                    s.time_at_zero += dt;
                }
            } else {
                let hit = z / -a;
                s.level_integral += 0.5 * z * hit;
                s.time_at_zero += dt - hit;
            }
        }
        for z in levels.iter_mut() {
            *z = (*z + a * dt).max(0.0);
        }
    }

    fn euler<R: Rng + ?Sized>(&self, levels: &mut [f64], dt: f64, mut stats: Option<&mut TimeStats>, rng: &mut R) {
        let mut left = dt;
        while left > 0.0 {
            let h = left.min(self.step_h);
            left -= h;
            let n: f64 = rng.sample(StandardNormal);
            let dx = self.pc.drift * h + self.sigma * h.sqrt() * n;
            if let Some(s) = stats.as_deref_mut() {
                let z = levels[0];
                let next = (z + dx).max(0.0);
                s.elapsed += h;
                s.level_integral += 0.5 * (z + next) * h;
                if next == 0.0 {
                    s.time_at_zero += h;
                }
            }
            for z in levels.iter_mut() {
                *z = (*z + dx).max(0.0);
            }
        }
    }

    /// Total event rate (collapses plus jumps).
    fn event_rate(&self) -> f64 {
        self.lambda + self.pc.jump_rate()
    }
}

/// Outcome of the next event.
enum Event {
    Collapse(f64),
    Jump(f64),
}

impl PathEngine {
    /// Waits for the next event, evolving `levels` until then, and returns it
    /// without applying it. `None` if `limit` comes first; the levels are then
    /// evolved up to `limit`.
    fn next_event<R: Rng + ?Sized>(
        &self,
        levels: &mut [f64],
        limit: f64,
        stats: Option<&mut TimeStats>,
        rng: &mut R,
    ) -> (f64, Option<Event>) {
        let rate = self.event_rate();
        let dt: f64 = Exp::new(rate).expect("positive rate").sample(rng);
        if dt >= limit {
            self.evolve(levels, limit, stats, rng);
            return (limit, None);
        }
        self.evolve(levels, dt, stats, rng);
        let ev = if rng.random::<f64>() * rate < self.lambda {
            Event::Collapse(self.collapse.sample(rng))
        } else {
            Event::Jump(self.pc.sample_jump(rng))
        };
        (dt, Some(ev))
    }
}

/// Simulates the collapsed process from `z0`, pooling the level just before
/// each collapse once `n_burn` collapses have passed.
pub fn path_simulate<R: Rng + ?Sized>(
    model: &LevyModel,
    lambda: f64,
    collapse: CollapseLaw,
    cfg: &PathConfig,
    spec: PoolSpec,
    pool_id: u64,
    rng: &mut R,
) -> Result<PathRun> {
    let engine = PathEngine::new(model, lambda, collapse, cfg.step_h)?;
    if !(cfg.z0 >= 0.0 && cfg.z0.is_finite()) {
        return Err(Error::Domain(format!("initial level must be nonnegative, got {}", cfg.z0)));
    }
    let mut pool = SamplePool::new(spec, pool_id);
    let mut time = TimeStats::default();
    let mut level = [cfg.z0];
    let mut t = 0.0;
    let mut seen = 0u64;
    loop {
        let limit = match cfg.stop {
            StopRule::Horizon(h) => h - t,
            StopRule::Collapses(n) if pool.count() >= n => break,
            StopRule::Collapses(_) => f64::INFINITY,
        };
        if limit <= 0.0 {
            break;
        }
        let stats = if seen >= cfg.n_burn { Some(&mut time) } else { None };
        let (dt, ev) = engine.next_event(&mut level, limit, stats, rng);
        t += dt;
        match ev {
            None => break,
            Some(Event::Jump(b)) => level[0] += b,
            Some(Event::Collapse(u)) => {
                if seen >= cfg.n_burn {
                    pool.push(level[0]);
                }
                seen += 1;
                level[0] *= u;
            }
        }
    }
    Ok(PathRun {
        pool,
        time,
        final_level: level[0],
        final_time: t,
    })
}

/// Extremes of the coupled difference over the collapse epochs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingReport {
    /// `max_n [(Z^y - Z^x) - (y0 - x0) Π_n]^+`.
    pub max_violation: f64,
    /// `min_n (Z^y - Z^x)`.
    pub min_difference: f64,
}

/// Runs two paths from `x0 <= y0` on the same randomness and checks
/// `0 <= Z^y - Z^x <= (y0 - x0) Π_n` just after each of `n_collapses` collapses.
#[allow(clippy::too_many_arguments)]
pub fn coupling_check<R: Rng + ?Sized>(
    model: &LevyModel,
    lambda: f64,
    collapse: CollapseLaw,
    x0: f64,
    y0: f64,
    n_collapses: u64,
    step_h: Option<f64>,
    rng: &mut R,
) -> Result<CouplingReport> {
    if !(0.0 <= x0 && x0 <= y0) {
        return Err(Error::Domain(format!("need 0 <= x0 <= y0, got x0={x0}, y0={y0}")));
    }
    let engine = PathEngine::new(model, lambda, collapse, step_h)?;
    let mut levels = [x0, y0];
    let mut pi = 1.0;
    let mut max_violation = 0.0f64;
    let mut min_difference = f64::INFINITY;
    let mut n = 0;
    while n < n_collapses {
        match engine.next_event(&mut levels, f64::INFINITY, None, rng).1 {
            Some(Event::Jump(b)) => {
                levels[0] += b;
                levels[1] += b;
            }
            Some(Event::Collapse(u)) => {
                levels[0] *= u;
                levels[1] *= u;
                pi *= u;
                n += 1;
                let diff = levels[1] - levels[0];
                max_violation = max_violation.max(diff - (y0 - x0) * pi);
                min_difference = min_difference.min(diff);
            }
            None => unreachable!("no time limit"),
        }
    }
    Ok(CouplingReport {
        max_violation,
        min_difference,
    })
}

/// One threshold of [`tail_experiment`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailRow {
    pub threshold: f64,
    pub exceedances: u64,
    /// `P(Z* > t)` estimate.
    pub p_hat: f64,
    /// Exact Pareto tail `(xm/t)^δ`.
    pub p_jump: f64,
    /// `p_hat / p_jump` with its Wilson interval.
    pub ratio: f64,
    pub ratio_lo: f64,
    pub ratio_hi: f64,
}

/// Estimates `P(Z* > t) / P(B > t)` for Pareto jumps with the exact engine,
/// using `n_samples` pre-collapse levels after a burn-in of 1000 collapses.
/// Intervals are Wilson intervals at `z` standard deviations.
#[allow(clippy::too_many_arguments)]
pub fn tail_experiment<R: Rng + ?Sized>(
    gamma: f64,
    d: f64,
    lambda: f64,
    delta: f64,
    xm: f64,
    n_samples: u64,
    thresholds: &[f64],
    z: f64,
    rng: &mut R,
) -> Result<Vec<TailRow>> {
    let jumps = crate::levy::JumpDist::Pareto { delta, xm };
    let model = LevyModel::cpp(d, gamma, jumps);
    crate::analytic::find_alpha_lambda(&model, lambda)?;
    let spec = PoolSpec {
        thresholds: thresholds.to_vec(),
        reservoir_cap: 0,
        ..PoolSpec::default()
    };
    let run = path_simulate(
        &model,
        lambda,
        CollapseLaw::Uniform01,
        &PathConfig::collapses(n_samples),
        spec,
        0,
        rng,
    )?;
    let n = run.pool.count();
    Ok(thresholds
        .iter()
        .zip(run.pool.exceedances())
        .map(|(&t, &k)| {
            let p_jump = jumps.tail(t);
            let (lo, hi) = wilson_interval(k, n, z);
            let p_hat = k as f64 / n as f64;
            TailRow {
                threshold: t,
                exceedances: k,
                p_hat,
                p_jump,
                ratio: p_hat / p_jump,
                ratio_lo: lo / p_jump,
                ratio_hi: hi / p_jump,
            }
        })
        .collect())
}
