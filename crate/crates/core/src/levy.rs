//! Spectrally positive Lévy inputs and proportional-collapse laws.
//!
//! Every model is described through the divided difference of its Laplace
//! exponent, `S(a, y) = (φ(a) - φ(y)) / (a - y)`. The exponent itself is
//! `φ(α) = α S(α, 0)` and the derivative is `S(α, α)`, so one stable routine
//! per jump law serves the root finder, the transform and the moments.

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma, Poisson, StandardNormal};

use crate::error::{Error, Result};
use crate::numerics::{gamma, integrate, one_minus_exp_over, QuadOptions};

/// Pareto transforms switch from the power series to quadrature above this
/// value of `α·xm`.
const PARETO_SERIES_MAX_Z: f64 = 1.5;
const PARETO_SERIES_TERMS: usize = 40;

/// Distribution of the jump sizes of a compound Poisson component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JumpDist {
    Exponential { mu: f64 },
    Erlang { shape: u32, rate: f64 },
    /// Pareto tail `P(B > x) = (xm / x)^delta` for `x >= xm`.
    Pareto { delta: f64, xm: f64 },
    Deterministic { size: f64 },
}

impl JumpDist {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        match *self {
            JumpDist::Exponential { mu } if ok(mu) => Ok(()),
            JumpDist::Erlang { shape, rate } if shape >= 1 && ok(rate) => Ok(()),
            JumpDist::Pareto { delta, xm } if ok(xm) && delta.is_finite() && delta > 1.0 => Ok(()),
            JumpDist::Pareto { delta, .. } if delta <= 1.0 => Err(Error::InvalidModel(format!(
                "Pareto tail index {delta} gives infinite mean; need delta > 1"
            ))),
            JumpDist::Deterministic { size } if ok(size) => Ok(()),
            other => Err(Error::InvalidModel(format!("invalid jump parameters {other:?}"))),
        }
    }

    pub fn mean(&self) -> f64 {
        self.raw_moment(1)
    }

    /// `E[B^n]`, `+inf` when the moment diverges.
    pub fn raw_moment(&self, n: u32) -> f64 {
        let nf = n as f64;
        match *self {
            JumpDist::Exponential { mu } => factorial(n) / mu.powi(n as i32),
            JumpDist::Erlang { shape, rate } => {
                (0..n).map(|j| (shape + j) as f64).product::<f64>() / rate.powi(n as i32)
            }
            JumpDist::Pareto { delta, xm } => {
                if nf >= delta {
                    f64::INFINITY
                } else {
                    delta * xm.powi(n as i32) / (delta - nf)
                }
            }
            JumpDist::Deterministic { size } => size.powi(n as i32),
        }
    }

    /// Tail probability `P(B > t)`.
    pub fn tail(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 1.0;
        }
        match *self {
            JumpDist::Exponential { mu } => (-mu * t).exp(),
            JumpDist::Erlang { shape, rate } => {
                let x = rate * t;
                let mut term = 1.0;
                let mut sum = 1.0;
                for k in 1..shape {
                    term *= x / k as f64;
                    sum += term;
                }
                (-x).exp() * sum
            }
            JumpDist::Pareto { delta, xm } => {
                if t <= xm {
                    1.0
                } else {
                    (xm / t).powf(delta)
                }
            }
            JumpDist::Deterministic { size } => {
                if t < size {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Laplace–Stieltjes transform `β(α) = E e^{-αB}`.
    ///
    /// Pareto jumps are integrated numerically after the substitution
    /// `x = xm / (1 - t)`.
    pub fn lst(&self, alpha: f64) -> f64 {
        if alpha == 0.0 {
            return 1.0;
        }
        match *self {
            JumpDist::Exponential { mu } => mu / (mu + alpha),
            JumpDist::Erlang { shape, rate } => (rate / (rate + alpha)).powi(shape as i32),
            JumpDist::Deterministic { size } => (-alpha * size).exp(),
            JumpDist::Pareto { delta, xm } => pareto_expectation(delta, xm, |x| (-alpha * x).exp()),
        }
    }

    /// `D(a, y) = (β(y) - β(a)) / (a - y)`, equal to `-β'(a)` when `a == y`.
    /// Always nonnegative.
    pub fn lst_divided_difference(&self, a: f64, y: f64) -> f64 {
        let (lo, hi) = if a <= y { (a, y) } else { (y, a) };
        match *self {
            JumpDist::Exponential { mu } => mu / ((mu + a) * (mu + y)),
            JumpDist::Erlang { shape, rate } => {
                let qa = rate / (rate + a);
                let qy = rate / (rate + y);
                let mut sum = 0.0;
                for j in 0..shape {
                    sum += qy.powi((shape - 1 - j) as i32) * qa.powi(j as i32);
                }
                rate / ((rate + a) * (rate + y)) * sum
            }
            JumpDist::Deterministic { size } => {
                size * (-size * lo).exp() * one_minus_exp_over(size * (hi - lo))
            }
            JumpDist::Pareto { delta, xm } => {
                let series_ok = hi * xm <= PARETO_SERIES_MAX_Z
                    && lo >= 0.0
                    && (delta - delta.round()).abs() > 1e-6;
                if series_ok {
                    self.mean() - pareto_psi_divided_difference(delta, xm, lo, hi)
                } else {
                    let gap = hi - lo;
                    pareto_expectation(delta, xm, |x| {
                        x * (-lo * x).exp() * one_minus_exp_over(gap * x)
                    })
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            JumpDist::Exponential { mu } => Exp::new(mu).expect("validated rate").sample(rng),
            JumpDist::Erlang { shape, rate } => Gamma::new(shape as f64, 1.0 / rate)
                .expect("validated Erlang")
                .sample(rng),
            JumpDist::Pareto { delta, xm } => {
                let u: f64 = 1.0 - rng.random::<f64>();
                xm * u.powf(-1.0 / delta)
            }
            JumpDist::Deterministic { size } => size,
        }
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `E h(B)` for Pareto(delta, xm) jumps via `x = xm / (1 - t)` on `(0, 1)`.
fn pareto_expectation<H: Fn(f64) -> f64>(delta: f64, xm: f64, h: H) -> f64 {
    let integrand = |t: f64| {
        let one_minus = 1.0 - t;
        if one_minus <= 0.0 {
            return 0.0;
        }
        let x = xm / one_minus;
        let v = delta * one_minus.powf(delta - 1.0) * h(x);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate(integrand, 0.0, 1.0, QuadOptions::new(1e-13, 1e-12), "Pareto jump transform")
        .map(|e| e.value)
        .unwrap_or(f64::NAN)
}

/// `(y^p - a^p) / (y - a)` for `0 <= a <= y`, without cancellation.
fn power_divided_difference(a: f64, y: f64, p: f64) -> f64 {
    if y == 0.0 {
        return if p > 1.0 { 0.0 } else { f64::INFINITY };
    }
    let q = a / y;
    let ratio = if q == 0.0 {
        1.0
    } else if q == 1.0 {
        p
    } else {
        let l = (q - 1.0).ln_1p();
        (p * l).exp_m1() / l.exp_m1()
    };
    y.powf(p - 1.0) * ratio
}

/// Divided difference of `ψ(α) = β(α) - 1 + EB·α` for Pareto jumps, from the
/// expansion `ψ(α) = -Γ(1-δ) (α xm)^δ + Σ_{n≥2} (-1)^n δ (α xm)^n / (n! (δ-n))`.
fn pareto_psi_divided_difference(delta: f64, xm: f64, a: f64, y: f64) -> f64 {
    let c = -gamma(1.0 - delta) * xm.powf(delta);
    let mut total = c * power_divided_difference(a, y, delta);
    // k_n = (-1)^n δ xm^n / (n! (δ - n)); Σ_j a^j y^{n-1-j} built incrementally.
    let mut xm_pow_over_fact = xm; // xm^n / n!
    let mut apow = vec![1.0; PARETO_SERIES_TERMS + 1];
    for j in 1..apow.len() {
        apow[j] = apow[j - 1] * a;
    }
    let mut dd = 1.0; // Σ_{j<n} a^j y^{n-1-j} at n = 1
    for n in 2..=PARETO_SERIES_TERMS {
        xm_pow_over_fact *= xm / n as f64;
        dd = dd * y + apow[n - 1];
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let term = sign * delta * xm_pow_over_fact / (delta - n as f64) * dd;
        total += term;
        if term.abs() < 1e-18 * total.abs().max(1e-300) {
            break;
        }
    }
    total
}

/// Law of the collapse multiplier `U`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CollapseLaw {
    Uniform01,
    /// Beta(theta, 1): density `θ u^{θ-1}` on `(0, 1)`.
    Beta1 { theta: f64 },
}

impl CollapseLaw {
    pub fn theta(&self) -> f64 {
        match *self {
            CollapseLaw::Uniform01 => 1.0,
            CollapseLaw::Beta1 { theta } => theta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.theta();
        if t.is_finite() && t > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidModel(format!("collapse parameter theta must be positive, got {t}")))
        }
    }

    /// `E U^n = θ / (θ + n)`.
    pub fn moment(&self, n: u32) -> f64 {
        let t = self.theta();
        t / (t + n as f64)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let v: f64 = rng.random();
        match *self {
            CollapseLaw::Uniform01 => v,
            CollapseLaw::Beta1 { theta } => v.powf(1.0 / theta),
        }
    }
}

/// A spectrally positive Lévy process from the parametric catalog.
#[derive(Debug, Clone, PartialEq)]
pub enum LevyModel {
    /// `X_t = c t + σ B_t`, so `φ(α) = -cα + σ²α²/2`.
    BrownianDrift { c: f64, sigma2: f64 },
    /// Compound Poisson input at rate `gamma` minus a linear drain at rate `d`:
    /// `φ(α) = dα - γ(1 - β(α))`.
    CppMinusDrift { d: f64, gamma: f64, jumps: JumpDist },
    /// Independent sum; the exponent is additive.
    Sum { parts: Vec<LevyModel> },
}

/// Flattened path description used by the simulators.
#[derive(Debug, Clone, PartialEq)]
pub struct PathComponents {
    /// Deterministic slope of `X` between jumps (`Σc - Σd`).
    pub drift: f64,
    pub sigma2: f64,
    /// `(rate, law)` of each compound Poisson part.
    pub jumps: Vec<(f64, JumpDist)>,
}

impl PathComponents {
    pub fn jump_rate(&self) -> f64 {
        self.jumps.iter().map(|(g, _)| g).sum()
    }

    /// Draws one jump, choosing the component in proportion to its rate.
    pub fn sample_jump<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.jumps.len() == 1 {
            return self.jumps[0].1.sample(rng);
        }
        let mut pick = rng.random::<f64>() * self.jump_rate();
        for (g, law) in &self.jumps {
            if pick < *g {
                return law.sample(rng);
            }
            pick -= g;
        }
        self.jumps.last().expect("nonempty").1.sample(rng)
    }
}

impl LevyModel {
    pub fn brownian(c: f64, sigma2: f64) -> Self {
        LevyModel::BrownianDrift { c, sigma2 }
    }

    pub fn cpp(d: f64, gamma: f64, jumps: JumpDist) -> Self {
        LevyModel::CppMinusDrift { d, gamma, jumps }
    }

    /// Checks parameter ranges. Subordinator inputs pass here and are
    /// rejected by the root finder, which is where they first matter.
    pub fn validate(&self) -> Result<()> {
        match self {
            LevyModel::BrownianDrift { c, sigma2 } => {
                if !c.is_finite() || !sigma2.is_finite() || *sigma2 < 0.0 {
                    return Err(Error::InvalidModel(format!(
                        "Brownian part needs finite c and sigma2 >= 0, got c={c}, sigma2={sigma2}"
                    )));
                }
                Ok(())
            }
            LevyModel::CppMinusDrift { d, gamma, jumps } => {
                if !d.is_finite() || *d < 0.0 || !gamma.is_finite() || *gamma < 0.0 {
                    return Err(Error::InvalidModel(format!(
                        "compound Poisson part needs d >= 0 and gamma >= 0, got d={d}, gamma={gamma}"
                    )));
                }
                jumps.validate()
            }
            LevyModel::Sum { parts } => {
                if parts.is_empty() {
                    return Err(Error::InvalidModel("sum model has no parts".into()));
                }
                for p in parts {
                    if matches!(p, LevyModel::Sum { .. }) {
                        return Err(Error::InvalidModel("nested sum models are not supported".into()));
                    }
                    p.validate()?;
                }
                Ok(())
            }
        }
    }

    fn parts(&self) -> &[LevyModel] {
        match self {
            LevyModel::Sum { parts } => parts,
            other => std::slice::from_ref(other),
        }
    }

    /// `S(a, y) = (φ(a) - φ(y)) / (a - y)`, with `S(a, a) = φ'(a)`.
    pub fn phi_slope(&self, a: f64, y: f64) -> f64 {
        self.parts()
            .iter()
            .map(|p| match p {
                LevyModel::BrownianDrift { c, sigma2 } => -c + 0.5 * sigma2 * (a + y),
                LevyModel::CppMinusDrift { d, gamma, jumps } => {
                    if *gamma == 0.0 {
                        *d
                    } else {
                        d - gamma * jumps.lst_divided_difference(a, y)
                    }
                }
                LevyModel::Sum { .. } => unreachable!("validated: no nested sums"),
            })
            .sum()
    }

    /// `φ(α) / α`, continuous at 0 where it equals `φ'(0)`.
    pub fn phi_over_alpha(&self, alpha: f64) -> f64 {
        self.phi_slope(alpha, 0.0)
    }

    /// Laplace exponent `φ(α) = log E e^{-αX_1}`.
    pub fn laplace_exponent(&self, alpha: f64) -> f64 {
        if alpha == 0.0 {
            return 0.0;
        }
        match self {
            LevyModel::Sum { parts } => parts.iter().map(|p| p.laplace_exponent(alpha)).sum(),
            _ => alpha * self.phi_over_alpha(alpha),
        }
    }

    pub fn laplace_exponent_deriv(&self, alpha: f64) -> f64 {
        self.phi_slope(alpha, alpha)
    }

    /// `c_n = (-1)^n φ^{(n)}(0)`; `+inf` when the jump moment diverges.
    pub fn cumulant(&self, n: u32) -> f64 {
        assert!(n >= 1, "cumulants are indexed from 1");
        self.parts()
            .iter()
            .map(|p| match p {
                LevyModel::BrownianDrift { c, sigma2 } => match n {
                    1 => *c,
                    2 => *sigma2,
                    _ => 0.0,
                },
                LevyModel::CppMinusDrift { d, gamma, jumps } => {
                    let jm = if *gamma == 0.0 { 0.0 } else { gamma * jumps.raw_moment(n) };
                    if n == 1 {
                        jm - d
                    } else {
                        jm
                    }
                }
                LevyModel::Sum { .. } => unreachable!("validated: no nested sums"),
            })
            .sum()
    }

    /// Total Gaussian variance rate.
    pub fn sigma2(&self) -> f64 {
        self.parts()
            .iter()
            .map(|p| match p {
                LevyModel::BrownianDrift { sigma2, .. } => *sigma2,
                _ => 0.0,
            })
            .sum()
    }

    /// `lim φ(α)/α` as `α → ∞`: the net drain rate when there is no Gaussian
    /// part, `+inf` otherwise.
    pub fn drift_at_infinity(&self) -> f64 {
        if self.sigma2() > 0.0 {
            return f64::INFINITY;
        }
        -self.path_components().drift
    }

    pub fn path_components(&self) -> PathComponents {
        let mut drift = 0.0;
        let mut sigma2 = 0.0;
        let mut jumps = Vec::new();
        for p in self.parts() {
            match p {
                LevyModel::BrownianDrift { c, sigma2: s } => {
                    drift += c;
                    sigma2 += s;
                }
                LevyModel::CppMinusDrift { d, gamma, jumps: law } => {
                    drift -= d;
                    if *gamma > 0.0 {
                        jumps.push((*gamma, *law));
                    }
                }
                LevyModel::Sum { .. } => unreachable!("validated: no nested sums"),
            }
        }
        PathComponents { drift, sigma2, jumps }
    }

    /// Samples `X_t`.
    pub fn sample_increment<R: Rng + ?Sized>(&self, t: f64, rng: &mut R) -> f64 {
        let pc = self.path_components();
        let mut x = pc.drift * t;
        if pc.sigma2 > 0.0 {
            let z: f64 = rng.sample(StandardNormal);
            x += (pc.sigma2 * t).sqrt() * z;
        }
        for (g, law) in &pc.jumps {
            let n = Poisson::new(g * t).expect("positive rate").sample(rng) as u64;
            for _ in 0..n {
                x += law.sample(rng);
            }
        }
        x
    }
}
