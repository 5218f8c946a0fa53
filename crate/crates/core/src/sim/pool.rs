//! Streaming aggregate of simulated levels.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// What a [`SamplePool`] accumulates besides the basic moments.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolSpec {
    /// Arguments at which `E e^{-αZ}` is accumulated.
    pub alphas: Vec<f64>,
    /// Levels `t` for the exceedance counters `#{Z > t}`.
    pub thresholds: Vec<f64>,
    /// Capacity of the uniform subsample kept for empirical distribution work.
    pub reservoir_cap: usize,
    /// Consecutive samples per batch for batch-means standard errors.
    pub batch_size: u64,
}

impl Default for PoolSpec {
    fn default() -> Self {
        PoolSpec {
            alphas: Vec::new(),
            thresholds: Vec::new(),
            reservoir_cap: 100_000,
            batch_size: 1_000,
        }
    }
}

/// Batch-means standard errors are used once this many batches are complete.
const MIN_BATCHES: u64 = 30;

/// Index of the tracked statistics in the per-sample vector.
const STAT_Z: usize = 0;
const STAT_Z2: usize = 1;
const STAT_ZERO: usize = 2;
const STAT_LST0: usize = 3;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Moments, transform sums, exceedance counts and a bounded uniform
/// subsample of a stream of nonnegative levels.
///
/// Consecutive samples are grouped in batches, so standard errors stay
/// honest for autocorrelated streams such as the embedded chain. The
/// subsample keeps the entries with the smallest hash of
/// `(pool_id, index)`, which makes merging order-independent.
#[derive(Debug, Clone)]
pub struct SamplePool {
    spec: PoolSpec,
    pool_id: u64,
    count: u64,
    power_sums: [f64; 4],
    stat_sums: Vec<f64>,
    stat_sq_sums: Vec<f64>,
    zero_count: u64,
    exceed: Vec<u64>,
    batch_partial: Vec<f64>,
    batch_fill: u64,
    n_batches: u64,
    batch_mean_sums: Vec<f64>,
    batch_mean_sq_sums: Vec<f64>,
    /// `(key, index, bits)`; the largest key is evicted first.
    reservoir: BinaryHeap<(u64, u64, u64)>,
}

impl SamplePool {
    pub fn new(spec: PoolSpec, pool_id: u64) -> Self {
        let n_stats = STAT_LST0 + spec.alphas.len();
        SamplePool {
            pool_id,
            count: 0,
            power_sums: [0.0; 4],
            stat_sums: vec![0.0; n_stats],
            stat_sq_sums: vec![0.0; n_stats],
            zero_count: 0,
            exceed: vec![0; spec.thresholds.len()],
            batch_partial: vec![0.0; n_stats],
            batch_fill: 0,
            n_batches: 0,
            batch_mean_sums: vec![0.0; n_stats],
            batch_mean_sq_sums: vec![0.0; n_stats],
            reservoir: BinaryHeap::new(),
            spec,
        }
    }

    pub fn spec(&self) -> &PoolSpec {
        &self.spec
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn push(&mut self, z: f64) {
        let index = self.count;
        self.count += 1;
        let z2 = z * z;
        self.power_sums[0] += z;
        self.power_sums[1] += z2;
        self.power_sums[2] += z2 * z;
        self.power_sums[3] += z2 * z2;
        if z == 0.0 {
            self.zero_count += 1;
        }
        for (c, &t) in self.exceed.iter_mut().zip(&self.spec.thresholds) {
            if z > t {
                *c += 1;
            }
        }
        let zero = if z == 0.0 { 1.0 } else { 0.0 };
        self.record(STAT_Z, z);
        self.record(STAT_Z2, z2);
        self.record(STAT_ZERO, zero);
        for i in 0..self.spec.alphas.len() {
            let v = (-self.spec.alphas[i] * z).exp();
            self.record(STAT_LST0 + i, v);
        }
        self.batch_fill += 1;
        if self.batch_fill == self.spec.batch_size {
            let bs = self.spec.batch_size as f64;
            for i in 0..self.batch_partial.len() {
                let m = self.batch_partial[i] / bs;
                self.batch_mean_sums[i] += m;
                self.batch_mean_sq_sums[i] += m * m;
                self.batch_partial[i] = 0.0;
            }
            self.batch_fill = 0;
            self.n_batches += 1;
        }
        if self.spec.reservoir_cap > 0 {
            let key = splitmix64(splitmix64(self.pool_id) ^ index);
            self.offer((key, index, z.to_bits()));
        }
    }

    fn record(&mut self, stat: usize, v: f64) {
        self.stat_sums[stat] += v;
        self.stat_sq_sums[stat] += v * v;
        self.batch_partial[stat] += v;
    }

    fn offer(&mut self, entry: (u64, u64, u64)) {
        if self.reservoir.len() < self.spec.reservoir_cap {
            self.reservoir.push(entry);
        } else if let Some(&top) = self.reservoir.peek() {
            if entry < top {
                self.reservoir.pop();
                self.reservoir.push(entry);
            }
        }
    }

    /// Combines two pools built with the same spec. Sums and counters add;
    /// the subsample keeps the smallest keys of the union.
    pub fn merge(&mut self, other: &SamplePool) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::Config("cannot merge pools with different specs".into()));
        }
        self.count += other.count;
        for i in 0..4 {
            self.power_sums[i] += other.power_sums[i];
        }
        self.zero_count += other.zero_count;
        for (a, b) in self.exceed.iter_mut().zip(&other.exceed) {
            *a += b;
        }
        for i in 0..self.stat_sums.len() {
            self.stat_sums[i] += other.stat_sums[i];
            self.stat_sq_sums[i] += other.stat_sq_sums[i];
            self.batch_mean_sums[i] += other.batch_mean_sums[i];
            self.batch_mean_sq_sums[i] += other.batch_mean_sq_sums[i];
            // Unfinished batches stay in the totals but never form a batch.
            self.batch_partial[i] = 0.0;
        }
        self.n_batches += other.n_batches;
        self.batch_fill = 0;
        for &entry in other.reservoir.iter() {
            self.offer(entry);
        }
        Ok(())
    }

    fn mean_and_se(&self, stat: usize) -> Result<(f64, f64)> {
        if self.count == 0 {
            return Err(Error::EmptyPool);
        }
        let n = self.count as f64;
        let mean = self.stat_sums[stat] / n;
        let se = if self.n_batches >= MIN_BATCHES {
            let k = self.n_batches as f64;
            let bm = self.batch_mean_sums[stat] / k;
            let var = (self.batch_mean_sq_sums[stat] / k - bm * bm).max(0.0) * k / (k - 1.0);
            (var / k).sqrt()
        } else if self.count > 1 {
            let var = (self.stat_sq_sums[stat] / n - mean * mean).max(0.0) * n / (n - 1.0);
            (var / n).sqrt()
        } else {
            f64::INFINITY
        };
        Ok((mean, se))
    }

    /// Sample mean of `Z` with its standard error.
    pub fn mean(&self) -> Result<(f64, f64)> {
        self.mean_and_se(STAT_Z)
    }

    /// Sample second moment with its standard error.
    pub fn second_moment(&self) -> Result<(f64, f64)> {
        self.mean_and_se(STAT_Z2)
    }

    /// Raw sample moment `E Z^k` for `k` in `1..=4`.
    pub fn raw_moment(&self, k: usize) -> Result<f64> {
        if self.count == 0 {
            return Err(Error::EmptyPool);
        }
        if !(1..=4).contains(&k) {
            return Err(Error::Domain(format!("moments are tracked up to order 4, got {k}")));
        }
        Ok(self.power_sums[k - 1] / self.count as f64)
    }

    /// Fraction of exact zeros with its standard error.
    pub fn zero_fraction(&self) -> Result<(f64, f64)> {
        self.mean_and_se(STAT_ZERO)
    }

    pub fn zero_count(&self) -> u64 {
        self.zero_count
    }

    /// `#{Z > t}` for each configured threshold.
    pub fn exceedances(&self) -> &[u64] {
        &self.exceed
    }

    /// Sample mean and standard error of `e^{-αZ}` for a tracked `α`.
    pub fn lst(&self, alpha: f64) -> Result<(f64, f64)> {
        if self.count == 0 {
            return Err(Error::EmptyPool);
        }
        if alpha == 0.0 {
            return Ok((1.0, 0.0));
        }
        let idx = self
            .spec
            .alphas
            .iter()
            .position(|&a| a == alpha)
            .ok_or(Error::AlphaNotTracked(alpha))?;
        self.mean_and_se(STAT_LST0 + idx)
    }

    /// The uniform subsample, sorted ascending.
    pub fn reservoir(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.reservoir.iter().map(|&(_, _, b)| f64::from_bits(b)).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// The subsample as `(index in stream, level)`, in stream order. Indices
    /// restart at zero in every pool, so after a merge they can repeat.
    pub fn reservoir_indexed(&self) -> Vec<(u64, f64)> {
        let mut v: Vec<(u64, f64)> = self
            .reservoir
            .iter()
            .map(|&(_, i, b)| (i, f64::from_bits(b)))
            .collect();
        v.sort_by_key(|&(i, _)| i);
        v
    }
}

/// Sample means and standard errors of `e^{-αZ}` on `alphas`.
pub fn empirical_lst(pool: &SamplePool, alphas: &[f64]) -> Result<Vec<(f64, f64)>> {
    alphas.iter().map(|&a| pool.lst(a)).collect()
}
