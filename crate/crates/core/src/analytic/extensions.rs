//! Transforms of the input over one inter-collapse period, the on/off
//! mixture, and heavy-tail diagnostics.

use crate::analytic::solution::{find_alpha_lambda, StationarySolution};
use crate::error::{Error, Result};
use crate::levy::{CollapseLaw, JumpDist, LevyModel};

/// `w(α) = E e^{-αW_τ} = (1 - α/α_λ) / (1 - φ(α)/λ)` with `τ ~ exp(λ)`,
/// continuous at `α_λ`.
pub fn w_tau_lst(model: &LevyModel, lambda: f64, alpha: f64) -> Result<f64> {
    let al = find_alpha_lambda(model, lambda)?;
    Ok(w_tau_lst_at(model, al, alpha))
}

fn w_tau_lst_at(model: &LevyModel, alpha_lambda: f64, alpha: f64) -> f64 {
    if alpha == 0.0 {
        return 1.0;
    }
    model.laplace_exponent(alpha_lambda) / (alpha_lambda * model.phi_slope(alpha_lambda, alpha))
}

/// `E e^{-αW^x_τ - βL^x_τ}` for the reflected input started at `x`.
pub fn wx_joint_lst(model: &LevyModel, lambda: f64, x: f64, alpha: f64, beta: f64) -> Result<f64> {
    if x < 0.0 || alpha < 0.0 || beta < 0.0 {
        return Err(Error::Domain(format!(
            "need x, alpha, beta >= 0, got x={x}, alpha={alpha}, beta={beta}"
        )));
    }
    let al = find_alpha_lambda(model, lambda)?;
    let phi_root = model.laplace_exponent(al);
    // w(α) / (1 - α/α_λ) = λ / ((α_λ - α) S(α)); the numerator
    // e^{-αx} - ((α+β)/(α_λ+β)) e^{-α_λ x} is divided by α_λ - α analytically.
    let gap = al - alpha;
    let diff_quotient = if (gap * x).abs() < 1.0 {
        let u = gap * x;
        let exprel = if u == 0.0 { 1.0 } else { u.exp_m1() / u };
        (-al * x).exp() * x * exprel
    } else {
        ((-alpha * x).exp() - (-al * x).exp()) / gap
    };
    let bracket = diff_quotient + (-al * x).exp() / (al + beta);
    Ok(phi_root * bracket / model.phi_slope(al, alpha))
}

/// Transform of the on/off process whose on periods (`exp(λ)`) follow the
/// reflected input and whose off periods (`exp(η)`) decay at rate `r x`.
///
/// Off periods act as collapses with `U = e^{-rT}`, `T ~ exp(η)`, which is
/// Beta(η/r, 1). The time-stationary law is the `(η/(λ+η), λ/(λ+η))`
/// mixture of `Z*` and `Z*U`.
pub fn onoff_mixture_lst(model: &LevyModel, lambda: f64, eta: f64, r: f64, alpha: f64) -> Result<f64> {
    if !(eta > 0.0 && r > 0.0) {
        return Err(Error::Domain(format!("on/off rates must be positive, got eta={eta}, r={r}")));
    }
    let theta = eta / r;
    let law = if theta == 1.0 {
        CollapseLaw::Uniform01
    } else {
        CollapseLaw::Beta1 { theta }
    };
    let sol = StationarySolution::solve(model, lambda, law)?;
    let on = eta / (lambda + eta);
    Ok(on * sol.lst(alpha)? + (1.0 - on) * sol.expected_lst_scaled(alpha)?)
}

/// Heavy-tail constant `(γ/λ)(δ+1)/δ` in `P(Z* > t) ~ K P(B > t)`.
pub fn tail_constant(gamma: f64, lambda: f64, delta: f64) -> Result<f64> {
    if !(delta > 1.0 && delta < 2.0) {
        return Err(Error::Domain(format!("tail index must lie in (1, 2), got {delta}")));
    }
    if !(gamma > 0.0 && lambda > 0.0) {
        return Err(Error::Domain(format!("rates must be positive, got gamma={gamma}, lambda={lambda}")));
    }
    Ok(gamma / lambda * (delta + 1.0) / delta)
}

/// Small-argument behaviour of the transform under Pareto jumps.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionCheck {
    /// `[f(α) - 1 + EZ*·α] / α^δ` for each requested `α`.
    pub ratios: Vec<f64>,
    /// Predicted limit `C (γ/λ)(δ+1)/δ` with `C = -Γ(1-δ) xm^δ`.
    pub limit: f64,
    /// `EZ* = b - 2(d - γ EB)/λ`.
    pub mean: f64,
}

/// Ratios `[f(α) - 1 + EZ*·α] / α^δ` for a compound Poisson input with
/// Pareto jumps and uniform collapses; they approach
/// `-Γ(1-δ) xm^δ (γ/λ)(δ+1)/δ` as `α → 0`.
pub fn small_alpha_expansion_check(model: &LevyModel, lambda: f64, alphas: &[f64]) -> Result<ExpansionCheck> {
    let LevyModel::CppMinusDrift {
        d,
        gamma,
        jumps: JumpDist::Pareto { delta, xm },
    } = *model
    else {
        return Err(Error::Domain("expansion check needs a Pareto compound Poisson model".into()));
    };
    let k = tail_constant(gamma, lambda, delta)?;
    let sol = StationarySolution::solve(model, lambda, CollapseLaw::Uniform01)?;
    let eb = delta * xm / (delta - 1.0);
    let mean = sol.b() - 2.0 * (d - gamma * eb) / lambda;
    let ratios = alphas
        .iter()
        .map(|&a| Ok((sol.lst(a)? - 1.0 + mean * a) / a.powf(delta)))
        .collect::<Result<Vec<_>>>()?;
    let c = -crate::numerics::gamma(1.0 - delta) * xm.powf(delta);
    Ok(ExpansionCheck {
        ratios,
        limit: c * k,
        mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bm() -> LevyModel {
        LevyModel::brownian(0.0, 2.0)
    }

    fn mm1() -> LevyModel {
        LevyModel::cpp(1.0, 1.0, JumpDist::Exponential { mu: 2.0 })
    }

    #[test]
    fn w_tau_examples() {
        assert_eq!(w_tau_lst(&bm(), 1.0, 0.0).unwrap(), 1.0);
        assert!((w_tau_lst(&bm(), 1.0, 0.5).unwrap() - 2.0 / 3.0).abs() < 1e-14);
        let expected = 3.0 * (1.0 - 1.0 / 2f64.sqrt());
        assert!((w_tau_lst(&mm1(), 1.0, 1.0).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn joint_transform_examples() {
        let w = w_tau_lst(&bm(), 1.0, 0.7).unwrap();
        assert!((wx_joint_lst(&bm(), 1.0, 0.0, 0.7, 0.0).unwrap() - w).abs() < 1e-14);
        let v = wx_joint_lst(&bm(), 1.0, 1.0, 0.5, 0.0).unwrap();
        let expected = 2.0 / 3.0 * ((-0.5f64).exp() - 0.5 * (-1f64).exp()) / 0.5;
        assert!((v - expected).abs() < 1e-14);
        let at_root = wx_joint_lst(&bm(), 1.0, 1.0, 1.0, 0.0).unwrap();
        assert!((at_root - (-1f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn tail_constant_examples() {
        assert!((tail_constant(0.8, 1.0, 1.5).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert!((tail_constant(1.0, 2.0, 1.25).unwrap() - 0.9).abs() < 1e-15);
        assert!((tail_constant(1.0, 1.0, 1.999).unwrap() - 2.999 / 1.999).abs() < 1e-15);
        assert!(tail_constant(1.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn onoff_at_zero_is_one() {
        assert!((onoff_mixture_lst(&bm(), 1.0, 1.0, 1.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
    }
}
