//! Vertex sweep and symmetric-Dirichlet studies of bound width and zero
//! exclusion.
//!
//! Every random work item `(alpha level, replicate)` draws from its own
//! ChaCha stream derived from the master seed, so results do not depend on
//! the number of worker threads.

use std::collections::BTreeMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedIndex;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{Beta, ContinuousCDF};

use crate::bounds::{self, BoundInterval};
use crate::canonical::{
    all_types, implied_observed, vertex_observed, CounterfactualDistribution, ResponseType, NUM_TYPES,
};
use crate::error::{Error, Result};
use crate::estimand::EstimandId;
use crate::lp;
use crate::observed::{Record, RecordTable};

/// Redraws allowed before a replicate is declared degenerate.
pub const MAX_REDRAWS: usize = 16;

/// Tolerance used when classifying widths and zero exclusion.
pub const CLASSIFY_TOL: f64 = 1e-9;

/// RNG for work item `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Symmetric Dirichlet sampler that is stable for very small `alpha`.
///
/// Uses `G = G' * U^(1/alpha)` with `G' ~ Gamma(alpha + 1)` and `U ~ U(0,1)`,
/// carried in log space and normalized against the largest coordinate, so at
/// least one coordinate is always exactly representable.
#[derive(Debug, Clone)]
pub struct SymmetricDirichlet {
    alpha: f64,
    dim: usize,
    boosted: Gamma<f64>,
}

impl SymmetricDirichlet {
    pub fn new(alpha: f64, dim: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidConfig(format!("alpha must be positive, got {alpha}")));
        }
        if dim < 2 {
            return Err(Error::InvalidConfig("dimension must be at least 2".into()));
        }
        let boosted = Gamma::new(alpha + 1.0, 1.0)
            .map_err(|e| Error::InvalidConfig(format!("gamma shape {}: {e}", alpha + 1.0)))?;
        Ok(Self { alpha, dim, boosted })
    }

    /// One draw; `None` when normalization fails.
    fn try_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Vec<f64>> {
        let inv_alpha = 1.0 / self.alpha;
        let mut logs: Vec<f64> = (0..self.dim)
            .map(|_| {
                let g: f64 = self.boosted.sample(rng);
                let u: f64 = rng.random::<f64>();
                g.ln() + u.ln() * inv_alpha
            })
            .collect();
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return None;
        }
        let mut sum = 0.0;
        for l in &mut logs {
            *l = (*l - max).exp();
            sum += *l;
        }
        if !(sum.is_finite() && sum >= 1.0) {
            return None;
        }
        for v in &mut logs {
            *v /= sum;
        }
        Some(logs)
    }

    /// A draw plus the number of redraws it needed.
    pub fn sample_counted<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(Vec<f64>, usize)> {
        for redraws in 0..=MAX_REDRAWS {
            if let Some(v) = self.try_sample(rng) {
                return Ok((v, redraws));
            }
        }
        Err(Error::DegenerateDraw { retries: MAX_REDRAWS })
    }
}

fn draw_counterfactual(alpha: f64, seed: u64, stream: u64) -> Result<(CounterfactualDistribution, usize)> {
    let sampler = SymmetricDirichlet::new(alpha, NUM_TYPES)?;
    let mut rng = stream_rng(seed, stream);
    let (q, redraws) = sampler.sample_counted(&mut rng)?;
    Ok((CounterfactualDistribution::new(q)?, redraws))
}

/// `n` draws from the symmetric Dirichlet over response types; draw `i` uses
/// stream `i`.
pub fn sample_counterfactuals(alpha: f64, n: usize, seed: u64) -> Result<Vec<CounterfactualDistribution>> {
    SymmetricDirichlet::new(alpha, NUM_TYPES)?;
    (0..n as u64)
        .into_par_iter()
        .map(|i| draw_counterfactual(alpha, seed, i).map(|(q, _)| q))
        .collect()
}

/// Simulates a two-arm trial: `arm_sizes[x]` units are assigned to arm `x`
/// and each draws a response type from `q` independently.
pub fn simulate_trial(q: &CounterfactualDistribution, arm_sizes: [usize; 2], seed: u64) -> Result<RecordTable> {
    let types = WeightedIndex::new(q.as_slice())
        .map_err(|e| Error::InvalidCounterfactual(format!("cannot sample types: {e}")))?;
    let mut rng = stream_rng(seed, 0);
    let mut rows = Vec::with_capacity(arm_sizes[0] + arm_sizes[1]);
    for x in 0..2u8 {
        for _ in 0..arm_sizes[x as usize] {
            let t = ResponseType::from_index(types.sample(&mut rng))?;
            let (m1, m2, y) = t.natural_world(x);
            rows.push(Record::new(x, m1, m2, y));
        }
    }
    RecordTable::new(rows)
}

/// How the vertex sweep evaluates bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMethod {
    /// Closed form where available, LP otherwise.
    Auto,
    ClosedForm,
    Lp,
}

/// Counts of `(lower, upper)` limit pairs over all vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexTable {
    pub estimand: EstimandId,
    pub counts: BTreeMap<(i8, i8), u64>,
}

impl VertexTable {
    pub fn count(&self, lower: i8, upper: i8) -> u64 {
        self.counts.get(&(lower, upper)).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Counts by interval width.
    pub fn width_counts(&self) -> BTreeMap<i8, u64> {
        let mut out = BTreeMap::new();
        for (&(l, u), &c) in &self.counts {
            *out.entry(u - l).or_insert(0) += c;
        }
        out
    }

    pub fn cells(&self) -> Vec<VertexCell> {
        let total = self.total() as f64;
        self.counts
            .iter()
            .map(|(&(lower, upper), &count)| VertexCell {
                estimand: self.estimand,
                lower,
                upper,
                count,
                proportion: count as f64 / total,
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        for c in self.cells() {
            wtr.serialize(c)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// One row of a [`VertexTable`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VertexCell {
    pub estimand: EstimandId,
    pub lower: i8,
    pub upper: i8,
    pub count: u64,
    pub proportion: f64,
}

fn to_unit(value: f64, what: &str) -> Result<i8> {
    let r = value.round();
    if (value - r).abs() > 1e-7 {
        return Err(Error::NumericalFailure(format!("{what} {value} at a vertex is not an integer")));
    }
    Ok(r as i8)
}

fn vertex_bounds(e: EstimandId, t: crate::canonical::ResponseType, method: SweepMethod) -> Result<BoundInterval> {
    let obs = vertex_observed(t);
    match method {
        SweepMethod::Auto => crate::sharp_bounds(&obs, e),
        SweepMethod::ClosedForm => bounds::closed_form_bounds(&obs, e),
        SweepMethod::Lp => lp::sharp_bounds_lp(&obs, e),
    }
}

/// Evaluates the bounds at the observed law of every vertex and tabulates
/// the integer `(lower, upper)` pairs.
pub fn vertex_sweep(e: EstimandId, method: SweepMethod) -> Result<VertexTable> {
    let pairs: Vec<(i8, i8)> = all_types()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|t| {
            let b = vertex_bounds(e, t, method)?;
            Ok((to_unit(b.lower, "lower limit")?, to_unit(b.upper, "upper limit")?))
        })
        .collect::<Result<_>>()?;
    let mut counts = BTreeMap::new();
    for p in pairs {
        *counts.entry(p).or_insert(0) += 1;
    }
    Ok(VertexTable { estimand: e, counts })
}

/// Runs the sweep with the closed form and with the LP; returns both tables
/// and the number of vertices where the limits disagree.
pub fn vertex_sweep_cross_check(e: EstimandId) -> Result<(VertexTable, VertexTable, usize)> {
    let mismatches = all_types()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|t| {
            let a = vertex_bounds(e, t, SweepMethod::ClosedForm)?;
            let b = vertex_bounds(e, t, SweepMethod::Lp)?;
            Ok(((a.lower - b.lower).abs() > 1e-7 || (a.upper - b.upper).abs() > 1e-7) as usize)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();
    Ok((
        vertex_sweep(e, SweepMethod::ClosedForm)?,
        vertex_sweep(e, SweepMethod::Lp)?,
        mismatches,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub alpha_levels: Vec<f64>,
    pub n_per_level: usize,
    pub seed: u64,
    pub estimands: Vec<EstimandId>,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.alpha_levels.is_empty() {
            return Err(Error::InvalidConfig("no alpha levels".into()));
        }
        if let Some(a) = self.alpha_levels.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
            return Err(Error::InvalidConfig(format!("alpha must be positive, got {a}")));
        }
        if self.n_per_level == 0 {
            return Err(Error::InvalidConfig("n_per_level must be at least 1".into()));
        }
        if self.estimands.is_empty() {
            return Err(Error::InvalidConfig("no estimands".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyRow {
    pub alpha: f64,
    pub replicate: usize,
    pub estimand: EstimandId,
    pub lower: f64,
    pub upper: f64,
    pub width: f64,
    pub excludes_zero: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub alpha: f64,
    pub estimand: EstimandId,
    pub prop_width_lt_1: f64,
    pub prop_excludes_zero: f64,
    /// Clopper-Pearson 95% limits for `prop_excludes_zero`.
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyOutput {
    pub rows: Vec<StudyRow>,
    pub summary: Vec<SummaryRow>,
    pub redraws: usize,
}

impl StudyOutput {
    pub fn write_rows_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        for r in &self.rows {
            wtr.serialize(r)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn write_summary_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        for r in &self.summary {
            wtr.serialize(r)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Exact two-sided Clopper-Pearson interval for `k` successes out of `n`.
pub fn clopper_pearson(k: usize, n: usize, level: f64) -> (f64, f64) {
    let tail = (1.0 - level) / 2.0;
    let (k_f, n_f) = (k as f64, n as f64);
    let low = if k == 0 {
        0.0
    } else {
        Beta::new(k_f, n_f - k_f + 1.0)
            .map(|b| b.inverse_cdf(tail))
            .unwrap_or(0.0)
    };
    let high = if k == n {
        1.0
    } else {
        Beta::new(k_f + 1.0, n_f - k_f)
            .map(|b| b.inverse_cdf(1.0 - tail))
            .unwrap_or(1.0)
    };
    (low, high)
}

/// Samples `q` per level and replicate, bounds every configured estimand at
/// the implied observed law, and summarizes per level.
pub fn dirichlet_study(config: &SimulationConfig) -> Result<StudyOutput> {
    config.validate()?;
    let items: Vec<(usize, usize)> = (0..config.alpha_levels.len())
        .flat_map(|l| (0..config.n_per_level).map(move |r| (l, r)))
        .collect();

    let per_item: Vec<(Vec<StudyRow>, usize)> = items
        .into_par_iter()
        .map(|(level, replicate)| {
            let alpha = config.alpha_levels[level];
            let stream = ((level as u64) << 32) | replicate as u64;
            let (q, redraws) = draw_counterfactual(alpha, config.seed, stream)?;
            let obs = implied_observed(&q);
            let rows = config
                .estimands
                .iter()
                .map(|&e| {
                    let b = crate::sharp_bounds(&obs, e)?;
                    Ok(StudyRow {
                        alpha,
                        replicate,
                        estimand: e,
                        lower: b.lower,
                        upper: b.upper,
                        width: b.width(),
                        excludes_zero: b.excludes_zero(CLASSIFY_TOL),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((rows, redraws))
        })
        .collect::<Result<_>>()?;

    let redraws = per_item.iter().map(|(_, r)| r).sum();
    let rows: Vec<StudyRow> = per_item.into_iter().flat_map(|(rows, _)| rows).collect();

    let n = config.n_per_level;
    let mut summary = Vec::new();
    for &alpha in &config.alpha_levels {
        for &e in &config.estimands {
            let (mut narrow, mut excl) = (0usize, 0usize);
            for r in rows.iter().filter(|r| r.alpha == alpha && r.estimand == e) {
                narrow += (r.width < 1.0 - CLASSIFY_TOL) as usize;
                excl += r.excludes_zero as usize;
            }
            let (ci_low, ci_high) = clopper_pearson(excl, n, 0.95);
            summary.push(SummaryRow {
                alpha,
                estimand: e,
                prop_width_lt_1: narrow as f64 / n as f64,
                prop_excludes_zero: excl as f64 / n as f64,
                ci_low,
                ci_high,
            });
        }
    }
    Ok(StudyOutput {
        rows,
        summary,
        redraws,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_are_normalized_and_deterministic() {
        for alpha in [1e-6, 1e-3, 1.0, 3.5] {
            let a = sample_counterfactuals(alpha, 3, 42).unwrap();
            let b = sample_counterfactuals(alpha, 3, 42).unwrap();
            assert_eq!(a, b);
            for q in &a {
                let s: f64 = q.as_slice().iter().sum();
                assert!((s - 1.0).abs() < 1e-9);
            }
            assert_ne!(a[0], a[1]);
        }
        assert_ne!(
            sample_counterfactuals(1.0, 1, 1).unwrap(),
            sample_counterfactuals(1.0, 1, 2).unwrap()
        );
    }

    #[test]
    fn more_draws_keep_earlier_ones() {
        let short = sample_counterfactuals(0.5, 2, 9).unwrap();
        let long = sample_counterfactuals(0.5, 5, 9).unwrap();
        assert_eq!(short[..], long[..2]);
    }

    #[test]
    fn simulated_trial_follows_the_implied_law() {
        let point = crate::canonical::vertex(ResponseType::new(0b10, 0b1010, 0b1010_1010).unwrap().index()).unwrap();
        let t = simulate_trial(&point, [3, 4], 1).unwrap();
        assert_eq!(t.arm_sizes(), [3, 4]);
        assert!(t.arm(0).all(|r| *r == Record::new(0, 0, 0, 0)));
        assert!(t.arm(1).all(|r| *r == Record::new(1, 1, 1, 1)));

        let q = sample_counterfactuals(1.0, 1, 5).unwrap().remove(0);
        let big = simulate_trial(&q, [20_000, 20_000], 2).unwrap();
        let est = crate::observed::estimate_distribution(&big).unwrap();
        let truth = implied_observed(&q);
        for (a, b) in est.cells().iter().zip(truth.cells()) {
            assert!((a - b).abs() < 0.02, "{a} vs {b}");
        }
        assert_eq!(big, simulate_trial(&q, [20_000, 20_000], 2).unwrap());
    }

    #[test]
    fn rejects_bad_alpha() {
        assert!(sample_counterfactuals(0.0, 1, 0).is_err());
        assert!(sample_counterfactuals(-1.0, 1, 0).is_err());
        assert!(SymmetricDirichlet::new(f64::NAN, 4).is_err());
        assert!(SymmetricDirichlet::new(1.0, 1).is_err());
    }

    #[test]
    fn sampler_moments_for_moderate_alpha() {
        // Dirichlet(a,...,a) in K dims: E q_i = 1/K, Var q_i = (K-1)/(K^2 (K a + 1)).
        let (k, a) = (4usize, 0.5);
        let s = SymmetricDirichlet::new(a, k).unwrap();
        let mut rng = stream_rng(7, 0);
        let n = 40_000;
        let (mut m, mut m2) = (0.0, 0.0);
        for _ in 0..n {
            let (v, _) = s.sample_counted(&mut rng).unwrap();
            m += v[0];
            m2 += v[0] * v[0];
        }
        let mean = m / n as f64;
        let var = m2 / n as f64 - mean * mean;
        let kf = k as f64;
        assert!((mean - 0.25).abs() < 0.005, "{mean}");
        assert!((var - (kf - 1.0) / (kf * kf * (kf * a + 1.0))).abs() < 0.003, "{var}");
    }

    #[test]
    fn tiny_alpha_is_near_vertex() {
        let qs = sample_counterfactuals(1e-6, 20, 3).unwrap();
        assert!(qs.iter().all(|q| q.max_mass() > 0.99));
    }

    #[test]
    fn clopper_pearson_reference_values() {
        // Reference values from the beta quantile definition.
        let (lo, hi) = clopper_pearson(3, 10, 0.95);
        assert!((lo - 0.06673951).abs() < 1e-6, "{lo}");
        assert!((hi - 0.65245285).abs() < 1e-6, "{hi}");
        assert_eq!(clopper_pearson(0, 10, 0.95).0, 0.0);
        assert_eq!(clopper_pearson(10, 10, 0.95).1, 1.0);
    }

    #[test]
    fn study_shape_and_config_errors() {
        let cfg = SimulationConfig {
            alpha_levels: vec![1e-3, 1.0],
            n_per_level: 3,
            seed: 11,
            estimands: vec![EstimandId::NDE_000, EstimandId::Jnie { x: 0 }],
        };
        let out = dirichlet_study(&cfg).unwrap();
        assert_eq!(out.rows.len(), 2 * 3 * 2);
        assert_eq!(out.summary.len(), 4);
        for r in &out.rows {
            assert!((r.width - (r.upper - r.lower)).abs() == 0.0);
        }
        let mut bad = cfg.clone();
        bad.n_per_level = 0;
        assert!(dirichlet_study(&bad).is_err());
        let mut bad = cfg;
        bad.alpha_levels = vec![0.1, -0.1];
        assert!(dirichlet_study(&bad).is_err());
    }
}
