//! Incomplete-beta closed forms for reflected Brownian motion and the M/M/1
//! workload, both with collapses.
//!
//! In both cases `1 - φ(α)/λ` has two real zeros `r1 > 0 > r2` and
//! `g'(α) = ((r1-α)/r1)^{θe1} ((α-r2)/(-r2))^{θe2}` with `e1 + e2 = 1`.
//! Substituting `t = (α - r2)/(r1 - r2)` turns `g` into an incomplete beta
//! integral, giving
//!
//! ```text
//! f(α) = B((r1-α)/(r1-r2); 1+θe1, 1+θe2) / B(r1/(r1-r2); 1+θe1, 1+θe2)
//!        / (g'(α) (1 - φ(α)/λ)).
//! ```

use crate::error::{Error, Result};
use crate::numerics::incomplete_beta;

/// Roots and exponents of the Brownian case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BmRoots {
    pub y1: f64,
    pub y2: f64,
    pub d1: f64,
    pub d2: f64,
}

impl BmRoots {
    /// `y_{1,2} = c/σ² ± sqrt(c²/σ⁴ + 2λ/σ²)`, `D1 = -y2/(y1-y2)`, `D2 = y1/(y1-y2)`.
    pub fn new(c: f64, sigma2: f64, lambda: f64) -> Result<Self> {
        if !(sigma2 > 0.0 && lambda > 0.0 && c.is_finite()) {
            return Err(Error::Domain(format!(
                "Brownian closed form needs sigma2 > 0 and lambda > 0, got sigma2={sigma2}, lambda={lambda}"
            )));
        }
        let shift = c / sigma2;
        let rad = (shift * shift + 2.0 * lambda / sigma2).sqrt();
        let y1 = shift + rad;
        // y1 * y2 = -2λ/σ², avoiding cancellation when c > 0.
        let y2 = if shift > 0.0 { -2.0 * lambda / (sigma2 * y1) } else { shift - rad };
        let gap = y1 - y2;
        Ok(BmRoots {
            y1,
            y2,
            d1: -y2 / gap,
            d2: y1 / gap,
        })
    }
}

/// Roots and exponents of the M/M/1 case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mm1Roots {
    pub z1: f64,
    pub z2: f64,
    pub f1: f64,
    pub f2: f64,
}

impl Mm1Roots {
    /// Roots of `α² + (μ - (λ+γ)/d) α - λμ/d = 0` and
    /// `F1 = (λ/d - z2)/(z1 - z2)`, `F2 = 1 - F1`.
    pub fn new(d: f64, gamma: f64, mu: f64, lambda: f64) -> Result<Self> {
        if !(d > 0.0 && gamma >= 0.0 && mu > 0.0 && lambda > 0.0) {
            return Err(Error::Domain(format!(
                "M/M/1 closed form needs d, mu, lambda > 0 and gamma >= 0, got d={d}, gamma={gamma}, mu={mu}, lambda={lambda}"
            )));
        }
        let p = mu - (lambda + gamma) / d;
        let q = -lambda * mu / d;
        let rad = (p * p - 4.0 * q).sqrt();
        // Stable pair: the larger-magnitude root first, the other from z1 z2 = q.
        let big = -0.5 * (p + p.signum() * rad);
        let (z1, z2) = if big > 0.0 { (big, q / big) } else { (q / big, big) };
        let gap = z1 - z2;
        let f1 = (lambda / d - z2) / gap;
        let f2 = (z1 - lambda / d) / gap;
        Ok(Mm1Roots { z1, z2, f1, f2 })
    }
}

fn two_root_lst(r1: f64, r2: f64, e1: f64, e2: f64, theta: f64, alpha: f64, one_minus_ratio: f64) -> Result<f64> {
    if !(0.0..r1).contains(&alpha) {
        return Err(Error::Domain(format!("closed form needs alpha in [0, {r1}), got {alpha}")));
    }
    if alpha == 0.0 {
        return Ok(1.0);
    }
    let a1 = 1.0 + theta * e1;
    let a2 = 1.0 + theta * e2;
    let gap = r1 - r2;
    let num = incomplete_beta((r1 - alpha) / gap, a1, a2)?;
    let den = incomplete_beta(r1 / gap, a1, a2)?;
    let g_prime = ((r1 - alpha) / r1).powf(theta * e1) * ((alpha - r2) / -r2).powf(theta * e2);
    Ok(num / den / (g_prime * one_minus_ratio))
}

/// Closed-form transform of reflected Brownian motion (drift `c`, variance
/// `sigma2`) with uniform collapses at rate `lambda`, for `0 <= α < y1`.
pub fn bm_closed_form_lst(c: f64, sigma2: f64, lambda: f64, alpha: f64) -> Result<f64> {
    bm_closed_form_lst_theta(c, sigma2, lambda, 1.0, alpha)
}

/// As [`bm_closed_form_lst`] with Beta(θ, 1) multipliers.
pub fn bm_closed_form_lst_theta(c: f64, sigma2: f64, lambda: f64, theta: f64, alpha: f64) -> Result<f64> {
    let r = BmRoots::new(c, sigma2, lambda)?;
    let ratio = (1.0 - alpha / r.y1) * (1.0 - alpha / r.y2);
    two_root_lst(r.y1, r.y2, r.d1, r.d2, theta, alpha, ratio)
}

/// Closed-form transform of the M/M/1 workload (drain `d`, exponential(`mu`)
/// jobs at rate `gamma`) with uniform collapses at rate `lambda`, for
/// `0 <= α < z1`.
pub fn mm1_closed_form_lst(d: f64, gamma: f64, mu: f64, lambda: f64, alpha: f64) -> Result<f64> {
    mm1_closed_form_lst_theta(d, gamma, mu, lambda, 1.0, alpha)
}

/// As [`mm1_closed_form_lst`] with Beta(θ, 1) multipliers.
pub fn mm1_closed_form_lst_theta(d: f64, gamma: f64, mu: f64, lambda: f64, theta: f64, alpha: f64) -> Result<f64> {
    let r = Mm1Roots::new(d, gamma, mu, lambda)?;
    // 1 - φ(α)/λ = (1 - α/z1)(1 - α/z2) / (1 + α/μ)
    let ratio = (1.0 - alpha / r.z1) * (1.0 - alpha / r.z2) / (1.0 + alpha / mu);
    two_root_lst(r.z1, r.z2, r.f1, r.f2, theta, alpha, ratio)
}

/// Level-crossing probability of an empty system, `p0 = λ b / (2d)`.
pub fn level_crossing_p0(d: f64, lambda: f64, b: f64) -> Result<f64> {
    if !(d > 0.0 && lambda > 0.0 && b > 0.0) {
        return Err(Error::Domain(format!(
            "level crossing needs positive inputs, got d={d}, lambda={lambda}, b={b}"
        )));
    }
    Ok(lambda * b / (2.0 * d))
}
