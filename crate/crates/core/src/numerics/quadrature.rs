//! One-dimensional quadrature: globally adaptive Gauss–Kronrod (21 points)
//! for smooth integrands and a level-doubling tanh-sinh rule for integrands
//! with algebraic endpoint singularities.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

// Kronrod abscissae and weights of the 21-point rule (QUADPACK qk21).
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Weights of the embedded 10-point Gauss rule (abscissae XGK[1], XGK[3], ...).
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Tolerances and work limits for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl QuadOptions {
    pub const fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            max_intervals: 2000,
        }
    }
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self::new(1e-10, 1e-12)
    }
}

/// Result of a quadrature: value, error estimate, number of integrand calls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    resabs: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Single 21-point Gauss–Kronrod panel with the QUADPACK error heuristic.
fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);
    let mut res_k = WGK[10] * f_center;
    let mut res_g = 0.0;
    let mut resabs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut resasc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Panel {
        a,
        b,
        value,
        error,
        resabs,
    }
}

/// Globally adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// Bisects the panel with the largest error estimate until the summed error
/// is below `max(abs_tol, rel_tol * |I|)` (or at roundoff level). Fails with
/// [`Error::QuadratureFailure`] when the interval budget is exhausted or
/// every remaining panel has shrunk to machine resolution.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    opts: QuadOptions,
    context: &'static str,
) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            evals: 0,
        });
    }
    if a > b {
        let est = integrate(f, b, a, opts, context)?;
        return Ok(Estimate {
            value: -est.value,
            ..est
        });
    }

    let first = gk21(&mut f, a, b);
    let mut evals = 21;
    let mut heap = BinaryHeap::new();
    let mut total = first.value;
    let mut total_err = first.error;
    let mut total_abs = first.resabs;
    // Error contributed by panels too narrow to split further.
    let mut frozen_err = 0.0;
    heap.push(first);

    loop {
        let tol = opts.abs_tol.max(opts.rel_tol * total.abs());
        if total_err <= tol || total_err <= 100.0 * f64::EPSILON * total_abs {
            return Ok(Estimate {
                value: total,
                error: total_err,
                evals,
            });
        }
        if heap.len() >= opts.max_intervals {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        let width = worst.b - worst.a;
        if width <= 8.0 * f64::EPSILON * worst.a.abs().max(worst.b.abs()).max(f64::MIN_POSITIVE)
            || mid <= worst.a
            || mid >= worst.b
        {
            frozen_err += worst.error;
            if heap.is_empty() {
                break;
            }
            continue;
        }
        let left = gk21(&mut f, worst.a, mid);
        let right = gk21(&mut f, mid, worst.b);
        evals += 42;
        if !(left.value.is_finite() && right.value.is_finite()) {
            return Err(Error::QuadratureFailure {
                context,
                estimate: f64::INFINITY,
                tolerance: tol,
            });
        }
        total += left.value + right.value - worst.value;
        total_abs += left.resabs + right.resabs - worst.resabs;
        heap.push(left);
        heap.push(right);
        total_err = frozen_err + heap.iter().map(|p| p.error).sum::<f64>();
    }

    let tol = opts.abs_tol.max(opts.rel_tol * total.abs());
    if total_err <= tol {
        Ok(Estimate {
            value: total,
            error: total_err,
            evals,
        })
    } else {
        Err(Error::QuadratureFailure {
            context,
            estimate: total_err,
            tolerance: tol,
        })
    }
}

/// Largest |t| used by the tanh-sinh rule; nodes there sit within ~1e-37 of
/// the endpoints (relative to the interval length).
pub(crate) const TANH_SINH_TMAX: f64 = 4.0;

/// Maximum number of level halvings for tanh-sinh.
pub(crate) const TANH_SINH_MAX_LEVEL: u32 = 11;

/// Abscissa and weight (without the step factor `h`) of the tanh-sinh node at
/// parameter `t` on `[a, b]`. `None` when the abscissa rounds onto an endpoint.
pub(crate) fn tanh_sinh_node(a: f64, b: f64, t: f64) -> Option<(f64, f64)> {
    let u = FRAC_PI_2 * t.sinh();
    let e2 = (-2.0 * u.abs()).exp();
    // Distance to the nearer endpoint as a fraction of (b - a).
    let frac = e2 / (1.0 + e2);
    let sech2 = 4.0 * e2 / ((1.0 + e2) * (1.0 + e2));
    let len = b - a;
    let x = if t < 0.0 {
        a + len * frac
    } else if t > 0.0 {
        b - len * frac
    } else {
        0.5 * (a + b)
    };
    if x <= a || x >= b {
        return None;
    }
    let w = FRAC_PI_2 * t.cosh() * sech2 * 0.5 * len;
    Some((x, w))
}

/// Tanh-sinh (double exponential) integration over a finite interval.
///
/// Refines by halving the step until two successive levels agree within
/// `max(abs_tol, rel_tol * |I|)`. Endpoint singularities of algebraic type
/// are handled without special treatment.
pub fn tanh_sinh<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    context: &'static str,
) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            evals: 0,
        });
    }
    if a > b {
        let est = tanh_sinh(f, b, a, abs_tol, rel_tol, context)?;
        return Ok(Estimate {
            value: -est.value,
            ..est
        });
    }

    let mut evals = 0usize;
    let mut sum = 0.0;
    let mut add = |t: f64, sum: &mut f64, evals: &mut usize| -> Result<()> {
        if let Some((x, w)) = tanh_sinh_node(a, b, t) {
            let y = f(x);
            *evals += 1;
            if !y.is_finite() {
                return Err(Error::QuadratureFailure {
                    context,
                    estimate: f64::INFINITY,
                    tolerance: abs_tol,
                });
            }
            *sum += w * y;
        }
        Ok(())
    };

    let kmax = TANH_SINH_TMAX as i64;
    for k in -kmax..=kmax {
        add(k as f64, &mut sum, &mut evals)?;
    }
    let mut prev = sum;
    let mut h = 1.0;
    for level in 1..=TANH_SINH_MAX_LEVEL {
        h *= 0.5;
        let kmax = (TANH_SINH_TMAX / h) as i64;
        let mut k = -kmax + if kmax % 2 == 0 { 1 } else { 0 };
        while k <= kmax {
            add(k as f64 * h, &mut sum, &mut evals)?;
            k += 2;
        }
        let current = sum * h;
        let diff = (current - prev).abs();
        let tol = abs_tol.max(rel_tol * current.abs());
        if level >= 3 && diff <= tol {
            return Ok(Estimate {
                value: current,
                error: diff,
                evals,
            });
        }
        prev = current;
    }
    Err(Error::QuadratureFailure {
        context,
        estimate: (sum * h - prev).abs(),
        tolerance: abs_tol.max(rel_tol * prev.abs()),
    })
}
