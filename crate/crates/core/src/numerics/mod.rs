//! Numerical building blocks shared by the analytic layer.

pub mod quadrature;
pub mod roots;
pub mod special;

pub use quadrature::{integrate, tanh_sinh, Estimate, QuadOptions};
pub use roots::safeguarded_newton;
pub use special::{beta, gamma, incomplete_beta, ln_gamma};

/// `(1 - e^{-u}) / u`, continuous at `u = 0`.
pub fn one_minus_exp_over(u: f64) -> f64 {
    if u.abs() < 1e-8 {
        1.0 - 0.5 * u
    } else {
        -(-u).exp_m1() / u
    }
}
