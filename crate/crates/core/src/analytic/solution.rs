//! Stationary law of the collapsed process for Beta(θ, 1) multipliers.
//!
//! With `S(y) = (φ(α_λ) - φ(y)) / (α_λ - y)` and `ρ(y) = (φ(y)/y) / S(y)`,
//! the inner exponent splits as
//!
//! ```text
//! θ φ(y) / (y (λ - φ(y))) = κ / (α_λ - y) + r(y),   κ = θ ρ(α_λ),
//! r(y) = θ (ρ(y) - ρ(α_λ)) / (α_λ - y)
//! ```
//!
//! where `r` is smooth. The pole integrates to a power, and after the change
//! of variables `x = α_λ + s (α - α_λ)` every branch of the transform becomes
//!
//! ```text
//! f(α) = b λ / S(α) · ∫_0^1 s^κ exp(E_α(s)) ds,   E_α(s) = ∫_{x(s)}^{α} r(t) dt.
//! ```
//!
//! The outer integral is a tanh-sinh rule; `E_α` is accumulated node by node
//! from `s = 1` downwards with short Gauss–Kronrod panels.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::levy::{CollapseLaw, LevyModel};
use crate::numerics::quadrature::{tanh_sinh_node, TANH_SINH_MAX_LEVEL, TANH_SINH_TMAX};
use crate::numerics::{integrate, safeguarded_newton, tanh_sinh, QuadOptions};

/// Relative accuracy requested from the outer transform integral.
const TRANSFORM_REL_TOL: f64 = 1e-12;
/// Points closer than this (relative) to `α_λ` use the limiting value of `r`.
const ROOT_WINDOW: f64 = 1e-7;
/// Absolute tolerance of the exponent integrals per unit of `θ`; `r` scales with `θ`.
const GAP_ABS_TOL: f64 = 1e-14;
const GAP_REL_TOL: f64 = 1e-12;
const EXPECTATION_TOL: f64 = 1e-11;

/// Largest argument tried when bracketing the root of `φ(α) = λ`.
const BRACKET_LIMIT: f64 = 1e16;

/// Unique positive root of `φ(α) = λ`.
///
/// Fails with [`Error::SubordinatorInput`] when `φ` stays below `λ` up to
/// `α = 1e16`.
pub fn find_alpha_lambda(model: &LevyModel, lambda: f64) -> Result<f64> {
    model.validate()?;
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::Domain(format!("collapse rate must be positive, got {lambda}")));
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while model.laplace_exponent(hi) <= lambda {
        lo = hi;
        hi *= 2.0;
        if hi > BRACKET_LIMIT {
            return Err(Error::SubordinatorInput);
        }
    }
    // φ is convex with φ(0) = 0, so φ - λ changes sign exactly once on (lo, hi].
    let root = safeguarded_newton(
        |a| (model.laplace_exponent(a) - lambda, model.laplace_exponent_deriv(a)),
        lo,
        hi,
        1e-13 * lambda,
    );
    Ok(root)
}

/// Which formula of the transform applies at a given argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Below,
    At,
    Above,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Below => "below",
            Branch::At => "at",
            Branch::Above => "above",
        })
    }
}

/// Transform values on a sorted grid, for tabulation.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformGrid {
    pub alphas: Vec<f64>,
    pub values: Vec<f64>,
    pub branch_tags: Vec<Branch>,
}

/// Solved stationary law: `α_λ`, the normalizer `b`, the atom at zero and an
/// evaluator for `f(α) = E e^{-αZ*}`.
///
/// All state is fixed at construction, so a solution can be shared between
/// threads.
#[derive(Debug, Clone)]
pub struct StationarySolution {
    model: LevyModel,
    lambda: f64,
    theta: f64,
    alpha_lambda: f64,
    /// `φ(α_λ)`, equal to `λ` up to root-finding error; used wherever the
    /// algebra relies on `φ(α_λ) = λ` so that `f(0) = 1` holds to rounding.
    phi_root: f64,
    rho_root: f64,
    r_root: f64,
    kappa: f64,
    b: f64,
    atom: f64,
}

impl StationarySolution {
    pub fn solve(model: &LevyModel, lambda: f64, collapse: CollapseLaw) -> Result<Self> {
        collapse.validate()?;
        let alpha_lambda = find_alpha_lambda(model, lambda)?;
        let theta = collapse.theta();
        let phi_root = model.laplace_exponent(alpha_lambda);
        let rho_root = model.phi_over_alpha(alpha_lambda) / model.laplace_exponent_deriv(alpha_lambda);
        let mut sol = StationarySolution {
            model: model.clone(),
            lambda,
            theta,
            alpha_lambda,
            phi_root,
            rho_root,
            r_root: 0.0,
            kappa: theta * rho_root,
            b: f64::NAN,
            atom: 0.0,
        };
        let h = 1e-5 * alpha_lambda;
        let drho = (sol.rho(alpha_lambda + h) - sol.rho(alpha_lambda - h)) / (2.0 * h);
        sol.r_root = -theta * drho;
        sol.b = 1.0 / (alpha_lambda * sol.weighted_integral(0.0, 0.0)?);
        if model.sigma2() == 0.0 {
            sol.atom = lambda * sol.b / ((1.0 + theta) * model.drift_at_infinity());
        }
        Ok(sol)
    }

    pub fn model(&self) -> &LevyModel {
        &self.model
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn alpha_lambda(&self) -> f64 {
        self.alpha_lambda
    }

    /// Normalizer `b = 1 / g(α_λ)`.
    pub fn b(&self) -> f64 {
        self.b
    }

    /// `P(Z* = 0)`: `λ b / ((1 + θ) d)` without a Gaussian part, else 0.
    pub fn atom(&self) -> f64 {
        self.atom
    }

    /// Exponent `θ λ / (α_λ φ'(α_λ))` of the zero of `g'` at `α_λ`.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn branch(&self, alpha: f64) -> Branch {
        let gap = alpha - self.alpha_lambda;
        if gap.abs() <= 1e-12 * self.alpha_lambda {
            Branch::At
        } else if gap < 0.0 {
            Branch::Below
        } else {
            Branch::Above
        }
    }

    fn gap_opts(&self) -> QuadOptions {
        QuadOptions::new(GAP_ABS_TOL * self.theta.max(1.0), GAP_REL_TOL)
    }

    fn rho(&self, y: f64) -> f64 {
        self.model.phi_over_alpha(y) / self.model.phi_slope(self.alpha_lambda, y)
    }

    fn r(&self, y: f64) -> f64 {
        let gap = self.alpha_lambda - y;
        if gap.abs() < ROOT_WINDOW * self.alpha_lambda {
            self.r_root
        } else {
            self.theta * (self.rho(y) - self.rho_root) / gap
        }
    }

    /// `∫_{s_lo}^1 s^κ exp(E_α(s)) ds`.
    fn weighted_integral(&self, alpha: f64, s_lo: f64) -> Result<f64> {
        let al = self.alpha_lambda;
        let span = alpha - al;
        if span == 0.0 {
            return Ok((1.0 - s_lo.powf(self.kappa + 1.0)) / (self.kappa + 1.0));
        }
        let rate = |sigma: f64| span * self.r(al + sigma * span);

        // Break [s_lo, 1] where x(s) is 1, 10, 100, ... multiples of α_λ away
        // from α_λ, so each piece sees r on a single scale.
        let mut cuts = vec![1.0];
        let ratio = al / span.abs();
        let mut s = ratio;
        while s < 1.0 {
            if s > s_lo {
                cuts.push(s);
            }
            s *= 10.0;
        }
        cuts.sort_by(|a, b| b.partial_cmp(a).expect("finite cut points"));
        cuts.dedup();
        cuts.push(s_lo);

        let mut total = 0.0;
        let mut e_hi = 0.0;
        for w in cuts.windows(2) {
            let (hi, lo) = (w[0], w[1]);
            if hi <= lo {
                continue;
            }
            total += self.piece(&rate, lo, hi, e_hi)?;
            if lo > s_lo {
                e_hi += integrate(&rate, lo, hi, self.gap_opts(), "transform exponent")?.value;
            }
        }
        Ok(total)
    }

    /// Tanh-sinh integral of `s^κ exp(E(s))` over `[lo, hi]` given `E(hi)`.
    fn piece<F: Fn(f64) -> f64>(&self, rate: &F, lo: f64, hi: f64, e_hi: f64) -> Result<f64> {
        let finest = 1i64 << TANH_SINH_MAX_LEVEL;
        let kmax = (TANH_SINH_TMAX as i64) * finest;
        // E at visited nodes, keyed by t in units of the finest step.
        let mut exps: HashMap<i64, (f64, f64)> = HashMap::new();
        let node = |k: i64| -> (f64, Option<f64>) {
            let t = k as f64 / finest as f64;
            match tanh_sinh_node(lo, hi, t) {
                Some((s, w)) => (s, Some(w)),
                None => (if t > 0.0 { hi } else { lo }, None),
            }
        };
        let kappa = self.kappa;
        let visit = |k: i64, stride: i64, exps: &mut HashMap<i64, (f64, f64)>| -> Result<f64> {
            let (s, w) = node(k);
            let Some(w) = w else {
                exps.insert(k, (s, if s == hi { e_hi } else { f64::NAN }));
                return Ok(0.0);
            };
            let (s_up, e_up) = if k + stride > kmax {
                (hi, e_hi)
            } else {
                exps[&(k + stride)]
            };
            let e = if s_up > s {
                e_up + integrate(rate, s, s_up, self.gap_opts(), "transform exponent")?.value
            } else {
                e_up
            };
            exps.insert(k, (s, e));
            let v = w * (kappa * s.ln() + e).exp();
            if !v.is_finite() {
                return Err(Error::QuadratureFailure {
                    context: "stationary transform",
                    estimate: f64::INFINITY,
                    tolerance: TRANSFORM_REL_TOL,
                });
            }
            Ok(v)
        };

        let mut sum = 0.0;
        let mut k = kmax;
        while k >= -kmax {
            sum += visit(k, finest, &mut exps)?;
            k -= finest;
        }
        let mut prev = sum;
        let mut h = 1.0;
        let mut stride = finest;
        for level in 1..=TANH_SINH_MAX_LEVEL {
            h *= 0.5;
            stride /= 2;
            let mut k = kmax - stride;
            while k >= -kmax {
                sum += visit(k, stride, &mut exps)?;
                k -= 2 * stride;
            }
            let current = sum * h;
            let diff = (current - prev).abs();
            if level >= 3 && diff <= TRANSFORM_REL_TOL * current.abs() {
                return Ok(current);
            }
            prev = current;
        }
        Err(Error::QuadratureFailure {
            context: "stationary transform",
            estimate: (sum * h - prev).abs(),
            tolerance: TRANSFORM_REL_TOL * prev.abs(),
        })
    }

    /// `f(α) = E e^{-αZ*}`. Arguments below zero are accepted as long as `φ`
    /// is finite there.
    pub fn lst(&self, alpha: f64) -> Result<f64> {
        if alpha == 0.0 {
            return Ok(1.0);
        }
        if self.branch(alpha) == Branch::At && alpha == self.alpha_lambda {
            return Ok(self.middle_branch());
        }
        let slope = self.model.phi_slope(self.alpha_lambda, alpha);
        Ok(self.b * self.phi_root / slope * self.weighted_integral(alpha, 0.0)?)
    }

    /// `b / (θ/α_λ + φ'(α_λ)/λ)`.
    pub fn middle_branch(&self) -> f64 {
        self.b / (self.theta / self.alpha_lambda + self.model.laplace_exponent_deriv(self.alpha_lambda) / self.phi_root)
    }

    /// `g(α) = ∫_0^α exp(-θ ∫_0^x φ(y)/(y(λ - φ(y))) dy) dx` on `[0, α_λ]`.
    pub fn g(&self, alpha: f64) -> Result<f64> {
        let al = self.alpha_lambda;
        if !(0.0..=al).contains(&alpha) {
            return Err(Error::Domain(format!("g is defined on [0, {al}], got {alpha}")));
        }
        if alpha == 0.0 {
            return Ok(0.0);
        }
        Ok(al * self.weighted_integral(0.0, 1.0 - alpha / al)?)
    }

    /// `g'(α) = (1 - α/α_λ)^κ exp(-∫_0^α r)`.
    pub fn g_prime(&self, alpha: f64) -> Result<f64> {
        let e = integrate(|y| self.r(y), 0.0, alpha, self.gap_opts(), "g derivative")?.value;
        Ok((1.0 - alpha / self.alpha_lambda).max(0.0).powf(self.kappa) * (-e).exp())
    }

    /// `E f(αU)` for `U ~ Beta(θ, 1)`, by quadrature over `u = α t`.
    pub fn expected_lst_scaled(&self, alpha: f64) -> Result<f64> {
        if alpha == 0.0 {
            return Ok(1.0);
        }
        let theta = self.theta;
        let mut failure = None;
        let est = tanh_sinh(
            |t| match self.lst(alpha * t) {
                Ok(v) => theta * t.powf(theta - 1.0) * v,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            },
            0.0,
            1.0,
            EXPECTATION_TOL,
            EXPECTATION_TOL,
            "collapse expectation",
        );
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(est?.value)
    }

    /// Closed form of `E f(α_λ U) = b α_λ / (θ + 1)`.
    pub fn expected_lst_at_root(&self) -> f64 {
        self.b * self.alpha_lambda / (self.theta + 1.0)
    }

    /// `|f(α)(1 - φ(α)/λ) - E f(αU) + (α/α_λ) E f(α_λ U)|` with both
    /// expectations computed by quadrature.
    pub fn fixed_point_residual(&self, alpha: f64) -> Result<f64> {
        if alpha == 0.0 {
            return Ok(0.0);
        }
        let f = self.lst(alpha)?;
        let lhs = f * (1.0 - self.model.laplace_exponent(alpha) / self.lambda);
        let at_root = self.expected_lst_scaled(self.alpha_lambda)?;
        let scaled = self.expected_lst_scaled(alpha)?;
        Ok((lhs - scaled + alpha / self.alpha_lambda * at_root).abs())
    }

    /// Moments `m_0..=m_n`; entries are `+inf` once a needed cumulant diverges.
    pub fn moments(&self, n: usize) -> Vec<f64> {
        let mut m = Vec::with_capacity(n + 1);
        m.push(1.0);
        if n == 0 {
            return m;
        }
        let cumulants: Vec<f64> = (1..=n as u32).map(|k| self.model.cumulant(k)).collect();
        let theta = self.theta;
        m.push(self.b + (theta + 1.0) * cumulants[0] / self.lambda);
        for order in 2..=n {
            let mut sum = 0.0;
            let mut binom = 1.0;
            for k in 0..order {
                if k > 0 {
                    binom *= (order - k + 1) as f64 / k as f64;
                }
                let c = cumulants[order - k - 1];
                if m[k].is_infinite() || c.is_infinite() {
                    sum = f64::INFINITY;
                    break;
                }
                sum += binom * m[k] * c;
            }
            let eu = theta / (theta + order as f64);
            m.push(sum / (self.lambda * (1.0 - eu)));
        }
        m
    }

    pub fn transform_grid(&self, alphas: &[f64]) -> Result<TransformGrid> {
        if alphas.is_empty() {
            return Err(Error::Domain("empty alpha grid".into()));
        }
        if alphas.windows(2).any(|w| w[1] <= w[0]) || alphas[0] < 0.0 {
            return Err(Error::Domain("alpha grid must be nonnegative and strictly increasing".into()));
        }
        let values = alphas.iter().map(|&a| self.lst(a)).collect::<Result<Vec<_>>>()?;
        Ok(TransformGrid {
            alphas: alphas.to_vec(),
            values,
            branch_tags: alphas.iter().map(|&a| self.branch(a)).collect(),
        })
    }
}

fn solve_theta(model: &LevyModel, lambda: f64, theta: f64) -> Result<StationarySolution> {
    let law = if theta == 1.0 {
        CollapseLaw::Uniform01
    } else {
        CollapseLaw::Beta1 { theta }
    };
    StationarySolution::solve(model, lambda, law)
}

pub fn g_function(model: &LevyModel, lambda: f64, theta: f64, alpha: f64) -> Result<f64> {
    solve_theta(model, lambda, theta)?.g(alpha)
}

pub fn normalizer_b(model: &LevyModel, lambda: f64, theta: f64) -> Result<f64> {
    Ok(solve_theta(model, lambda, theta)?.b())
}

pub fn stationary_lst(model: &LevyModel, lambda: f64, theta: f64, alpha: f64) -> Result<f64> {
    solve_theta(model, lambda, theta)?.lst(alpha)
}

pub fn atom_at_zero(model: &LevyModel, lambda: f64, theta: f64) -> Result<f64> {
    Ok(solve_theta(model, lambda, theta)?.atom())
}

pub fn moments(model: &LevyModel, lambda: f64, theta: f64, n: usize) -> Result<Vec<f64>> {
    Ok(solve_theta(model, lambda, theta)?.moments(n))
}

pub fn fixed_point_residual(model: &LevyModel, lambda: f64, theta: f64, alpha: f64) -> Result<f64> {
    solve_theta(model, lambda, theta)?.fixed_point_residual(alpha)
}
