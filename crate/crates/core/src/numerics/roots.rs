//! Safeguarded Newton iteration for monotone brackets.

/// Finds a root of `f` inside `[lo, hi]` where `f(lo) < 0 < f(hi)`.
///
/// `f` returns `(value, derivative)`. Newton steps that leave the current
/// bracket, or that fail to halve it, fall back to bisection. Terminates when
/// the bracket is at machine resolution or `|f| <= f_tol`.
pub fn safeguarded_newton<F>(mut f: F, mut lo: f64, mut hi: f64, f_tol: f64) -> f64
where
    F: FnMut(f64) -> (f64, f64),
{
    let mut x = 0.5 * (lo + hi);
    let mut last_width = hi - lo;
    for _ in 0..500 {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let width = hi - lo;
        if width <= 2.0 * f64::EPSILON * x.abs() {
            return x;
        }
        let newton = x - fx / dfx;
        let accept = dfx.is_finite()
            && dfx != 0.0
            && newton > lo
            && newton < hi
            && (width < 0.5 * last_width || fx.abs() <= 1e3 * f_tol);
        last_width = width;
        let next = if accept { newton } else { 0.5 * (lo + hi) };
        if fx.abs() <= f_tol && (next - x).abs() <= 4.0 * f64::EPSILON * x.abs() {
            return next;
        }
        x = next;
    }
    x
}
