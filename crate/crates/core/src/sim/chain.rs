//! Embedded chain of pre-collapse levels.

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::analytic::closed_form::{BmRoots, Mm1Roots};
use crate::error::{Error, Result};
use crate::levy::{CollapseLaw, JumpDist, LevyModel};
use crate::sim::pool::{PoolSpec, SamplePool};

/// Level `ζ_n` just before the `n`-th collapse and the running product
/// `Π_n` of the multipliers applied so far.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainState {
    pub zeta: f64,
    pub n: u64,
    pub pi_n: f64,
}

impl ChainState {
    pub fn new(zeta: f64) -> Self {
        ChainState { zeta, n: 0, pi_n: 1.0 }
    }
}

/// One step `ζ' = v + (ζu - y)^+`.
pub fn lindley_step(state: ChainState, v: f64, u: f64, y: f64) -> ChainState {
    ChainState {
        zeta: v + (state.zeta * u - y).max(0.0),
        n: state.n + 1,
        pi_n: state.pi_n * u,
    }
}

/// `z_n` from the explicit max representation
///
/// ```text
/// z_n = v_n + max_{0≤k≤n} Σ_{i=n-k+1}^{n} (Π_{j=i+1}^{n} u_j) (u_i v_{i-1} - y_i)
/// ```
///
/// where `v` holds `v_0..=v_n` and `u`, `y` hold the entries with indices
/// `1..=n`. Agrees with iterating [`lindley_step`] from `z_0 = v_0`.
pub fn explicit_solution(v: &[f64], u: &[f64], y: &[f64]) -> Result<f64> {
    let n = u.len();
    if v.len() != n + 1 || y.len() != n {
        return Err(Error::Domain(format!(
            "need len(v) = len(u) + 1 = len(y) + 1, got {}, {}, {}",
            v.len(),
            u.len(),
            y.len()
        )));
    }
    let mut best = 0.0f64;
    let mut partial = 0.0;
    let mut product = 1.0;
    // Walk i = n, n-1, ..., 1; u[i-1] is u_i.
    for i in (1..=n).rev() {
        partial += product * (u[i - 1] * v[i - 1] - y[i - 1]);
        product *= u[i - 1];
        best = best.max(partial);
    }
    Ok(v[n] + best)
}

/// Exact sampler of `(W_τ, L_τ)` at an independent `exp(λ)` time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WlSampler {
    /// `L ~ exp(y1)`, `W ~ exp(-y2)`.
    Brownian { y1: f64, w_rate: f64 },
    /// `L ~ exp(z1)`; `W = 0` with probability `η/μ`, else `exp(η)`, `η = -z2`.
    Mm1 { z1: f64, eta: f64, mu: f64 },
}

impl WlSampler {
    /// Sampler for reflected Brownian motion with drift `c` and variance
    /// `sigma2` over an `exp(lambda)` time.
    pub fn brownian(c: f64, sigma2: f64, lambda: f64) -> Result<Self> {
        let r = BmRoots::new(c, sigma2, lambda)?;
        Ok(WlSampler::Brownian { y1: r.y1, w_rate: -r.y2 })
    }

    /// Sampler for the M/M/1 workload (drain `d`, exponential(`mu`) jobs at
    /// rate `gamma`) over an `exp(lambda)` time.
    pub fn mm1(d: f64, gamma: f64, mu: f64, lambda: f64) -> Result<Self> {
        let r = Mm1Roots::new(d, gamma, mu, lambda)?;
        let eta = -r.z2;
        assert!(
            eta <= mu * (1.0 + 1e-12),
            "W_tau atom weight eta/mu = {} exceeds one",
            eta / mu
        );
        Ok(WlSampler::Mm1 { z1: r.z1, eta: eta.min(mu), mu })
    }

    /// Exact sampler for the model if one exists.
    pub fn for_model(model: &LevyModel, lambda: f64) -> Result<Self> {
        model.validate()?;
        match model {
            LevyModel::BrownianDrift { c, sigma2 } if *sigma2 > 0.0 => Self::brownian(*c, *sigma2, lambda),
            LevyModel::CppMinusDrift {
                d,
                gamma,
                jumps: JumpDist::Exponential { mu },
            } if *d > 0.0 && *gamma > 0.0 => Self::mm1(*d, *gamma, *mu, lambda),
            LevyModel::Sum { parts } if parts.len() == 1 => Self::for_model(&parts[0], lambda),
            other => Err(Error::NoExactSampler(format!(
                "only Brownian motion and exponential-jump compound Poisson inputs are supported, got {other:?}"
            ))),
        }
    }

    /// Draws `(w, l)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        match *self {
            WlSampler::Brownian { y1, w_rate } => {
                let l = Exp::new(y1).expect("positive root").sample(rng);
                let w = Exp::new(w_rate).expect("positive root").sample(rng);
                (w, l)
            }
            WlSampler::Mm1 { z1, eta, mu } => {
                let l = Exp::new(z1).expect("positive root").sample(rng);
                let w = if rng.random::<f64>() < eta / mu {
                    0.0
                } else {
                    Exp::new(eta).expect("positive root").sample(rng)
                };
                (w, l)
            }
        }
    }
}

/// `(W_τ, L_τ)` for reflected Brownian motion.
pub fn sample_wl_bm<R: Rng + ?Sized>(c: f64, sigma2: f64, lambda: f64, rng: &mut R) -> Result<(f64, f64)> {
    Ok(WlSampler::brownian(c, sigma2, lambda)?.sample(rng))
}

/// `(W_τ, L_τ)` for the M/M/1 workload.
pub fn sample_wl_mm1<R: Rng + ?Sized>(d: f64, gamma: f64, mu: f64, lambda: f64, rng: &mut R) -> Result<(f64, f64)> {
    Ok(WlSampler::mm1(d, gamma, mu, lambda)?.sample(rng))
}

/// Runs `ζ_n = V_n + (ζ_{n-1} U_n - Y_n)^+` from `ζ_0 = 0`, discarding the
/// first `n_burn` steps and pooling the next `n_samples` levels.
pub fn embedded_chain_run<R: Rng + ?Sized>(
    sampler: &WlSampler,
    collapse: CollapseLaw,
    n_burn: u64,
    n_samples: u64,
    spec: PoolSpec,
    pool_id: u64,
    rng: &mut R,
) -> SamplePool {
    let mut pool = SamplePool::new(spec, pool_id);
    let mut state = ChainState::new(0.0);
    for i in 0..n_burn + n_samples {
        let u = collapse.sample(rng);
        let (v, y) = sampler.sample(rng);
        state = lindley_step(state, v, u, y);
        if i >= n_burn {
            pool.push(state.zeta);
        }
    }
    pool
}

/// One stationary draw from `V_0 + max_{k≥0} Σ_{i<k} Π_{j<i} U_j (U_i V_{i+1} - Y_i)`,
/// stopping once the running product drops to `eps_trunc` or below.
pub fn loynes_truncated_sample<R: Rng + ?Sized>(
    sampler: &WlSampler,
    collapse: CollapseLaw,
    eps_trunc: f64,
    rng: &mut R,
) -> f64 {
    let (v0, _) = sampler.sample(rng);
    let mut product = 1.0;
    let mut partial = 0.0;
    let mut best = 0.0f64;
    while product > eps_trunc {
        let u = collapse.sample(rng);
        let (v_next, y) = sampler.sample(rng);
        partial += product * (u * v_next - y);
        product *= u;
        best = best.max(partial);
    }
    v0 + best
}
