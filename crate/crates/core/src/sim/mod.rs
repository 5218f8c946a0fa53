//! Simulation of the collapsed process by three routes: the embedded chain,
//! the truncated max representation, and continuous-time paths.

pub mod chain;
pub mod onoff;
pub mod path;
pub mod pool;
pub mod stats;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use chain::{
    embedded_chain_run, explicit_solution, lindley_step, loynes_truncated_sample, sample_wl_bm, sample_wl_mm1,
    ChainState, WlSampler,
};
pub use onoff::onoff_monte_carlo;
pub use path::{
    coupling_check, path_simulate, tail_experiment, CouplingReport, PathConfig, PathEngine, PathRun, StopRule,
    TailRow, TimeStats,
};
pub use pool::{empirical_lst, PoolSpec, SamplePool};
pub use stats::{ks_critical_1pct, ks_statistic, wilson_interval};

/// Default truncation level of the max-representation sampler.
pub const DEFAULT_EPS_TRUNC: f64 = 1e-12;

/// Independent generator for replication `stream` of a run seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
