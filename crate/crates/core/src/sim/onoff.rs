//! Monte Carlo of the on/off process.

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::error::{Error, Result};
use crate::levy::LevyModel;
use crate::sim::chain::WlSampler;
use crate::sim::pool::{PoolSpec, SamplePool};

/// Observes the on/off process at the epochs of an independent Poisson
/// process of rate `nu`, which by PASTA sample its time-stationary law.
///
/// On periods last `exp(λ)` and follow the reflected input; off periods last
/// `exp(η)` with the level decaying as `x e^{-rt}`. Within an on period the
/// next observation or switch comes after `exp(λ+ν)`, where the level is
/// `V + (x - Y)^+` with `(V, Y)` from the exact sampler at rate `λ+ν`.
#[allow(clippy::too_many_arguments)]
pub fn onoff_monte_carlo<R: Rng + ?Sized>(
    model: &LevyModel,
    lambda: f64,
    eta: f64,
    r: f64,
    nu: f64,
    n_obs: u64,
    spec: PoolSpec,
    rng: &mut R,
) -> Result<SamplePool> {
    if !(lambda > 0.0 && eta > 0.0 && r > 0.0 && nu > 0.0) {
        return Err(Error::Domain(format!(
            "on/off rates must be positive, got lambda={lambda}, eta={eta}, r={r}, nu={nu}"
        )));
    }
    let sampler = WlSampler::for_model(model, lambda + nu)?;
    let off_clock = Exp::new(eta + nu).expect("positive rate");
    let mut pool = SamplePool::new(spec, 0);
    let mut x = 0.0;
    let mut on = true;
    // Start from a level already close to stationarity.
    let burn = 1_000;
    let mut events = 0u64;
    while pool.count() < n_obs {
        let observed = if on {
            let (v, y) = sampler.sample(rng);
            x = v + (x - y).max(0.0);
            rng.random::<f64>() * (lambda + nu) < nu
        } else {
            let t: f64 = off_clock.sample(rng);
            x *= (-r * t).exp();
            rng.random::<f64>() * (eta + nu) < nu
        };
        events += 1;
        if observed {
            if events > burn {
                pool.push(x);
            }
        } else {
            on = !on;
        }
    }
    Ok(pool)
}
