//! Percentile bootstrap for estimated bound endpoints.
//!
//! Resampling is stratified by arm: each replicate redraws `n_0` control and
//! `n_1` treated rows with replacement from their own arm. Replicate `b`
//! uses RNG stream `b` of the configured seed, so adding replicates leaves
//! earlier ones unchanged and the thread count does not matter.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::BoundInterval;
use crate::error::{Error, Result};
use crate::estimand::EstimandId;
use crate::observed::{estimate_distribution, ObservedDistribution, RecordTable, NUM_CELLS};
use crate::simulation::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub level: f64,
    pub seed: u64,
}

impl BootstrapConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            replicates: 2000,
            level: 0.95,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidConfig("replicates must be at least 1".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "level must lie in (0, 1), got {}",
                self.level
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapResult {
    pub estimand: EstimandId,
    pub point: BoundInterval,
    /// Percentile interval for the lower endpoint.
    pub ci_lower: [f64; 2],
    /// Percentile interval for the upper endpoint.
    pub ci_upper: [f64; 2],
    pub replicates: usize,
    pub level: f64,
    pub seed: u64,
}

/// Sample quantile with linear interpolation between order statistics
/// (`h = (n - 1) p`). `sorted` must be ascending and nonempty.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Cells of each arm's rows, for fast resampling.
fn arm_cells(records: &RecordTable) -> [Vec<usize>; 2] {
    let mut out = [Vec::new(), Vec::new()];
    for r in records.rows() {
        out[r.x as usize].push(r.cell());
    }
    out
}

fn resample<R: Rng + ?Sized>(arms: &[Vec<usize>; 2], rng: &mut R) -> Result<ObservedDistribution> {
    let mut counts = [0u64; NUM_CELLS];
    for arm in arms {
        for _ in 0..arm.len() {
            counts[arm[rng.random_range(0..arm.len())]] += 1;
        }
    }
    ObservedDistribution::from_counts(&counts)
}

/// Endpoint bounds for one stratified resample.
pub fn bootstrap_replicate(records: &RecordTable, e: EstimandId, seed: u64, replicate: u64) -> Result<BoundInterval> {
    let arms = arm_cells(records);
    let mut rng = stream_rng(seed, replicate);
    crate::sharp_bounds(&resample(&arms, &mut rng)?, e)
}

pub fn bootstrap_bounds(records: &RecordTable, e: EstimandId, config: &BootstrapConfig) -> Result<BootstrapResult> {
    config.validate()?;
    let point = crate::sharp_bounds(&estimate_distribution(records)?, e)?;
    let arms = arm_cells(records);

    let draws: Vec<BoundInterval> = (0..config.replicates as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(config.seed, b);
            crate::sharp_bounds(&resample(&arms, &mut rng)?, e)
        })
        .collect::<Result<_>>()?;

    let mut lowers: Vec<f64> = draws.iter().map(|d| d.lower).collect();
    let mut uppers: Vec<f64> = draws.iter().map(|d| d.upper).collect();
    lowers.sort_by(f64::total_cmp);
    uppers.sort_by(f64::total_cmp);
    let tail = (1.0 - config.level) / 2.0;
    let interval = |v: &[f64]| [quantile(v, tail), quantile(v, 1.0 - tail)];

    Ok(BootstrapResult {
        estimand: e,
        point,
        ci_lower: interval(&lowers),
        ci_upper: interval(&uppers),
        replicates: config.replicates,
        level: config.level,
        seed: config.seed,
    })
}
