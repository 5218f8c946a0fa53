//! Shared fixtures for the criterion benchmarks.

use collapse_core::{JumpDist, LevyModel};

/// Reflected Brownian motion with `c = 0`, `σ² = 2`.
pub fn canonical_bm() -> LevyModel {
    LevyModel::brownian(0.0, 2.0)
}

/// M/M/1-type input: drain 1, exponential(2) jumps at rate 1.
pub fn canonical_mm1() -> LevyModel {
    LevyModel::cpp(1.0, 1.0, JumpDist::Exponential { mu: 2.0 })
}

/// Pareto(1.5, 1/3) jumps at rate 0.8 against a unit drain.
pub fn canonical_pareto() -> LevyModel {
    LevyModel::cpp(1.0, 0.8, JumpDist::Pareto { delta: 1.5, xm: 1.0 / 3.0 })
}
