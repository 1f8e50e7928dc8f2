//! Frozen baselines. The synthetic trial in data/ was produced by
//! `cargo run --example synthetic_trial -- data/synthetic_trial.csv`; its
//! bound values (in common/) were computed once with the exact LP, the Monte
//! Carlo statistics below once with their declared seeds, and all were then
//! frozen.

use medbounds::lp::{sharp_bounds_lp_exact, ExactObserved};
use medbounds::observed::{estimate_distribution, total_effect};
use medbounds::simulation::{dirichlet_study, sample_counterfactuals, SimulationConfig};
use medbounds::{sharp_bounds, EstimandId};

mod common;
use common::{ratio, synthetic, to_f64, COUNTS, FROZEN};

#[test]
fn synthetic_trial_file_is_unchanged() {
    let t = synthetic();
    assert_eq!(t.arm_sizes(), [299, 600]);
    assert_eq!(t.counts(), COUNTS);
}

#[test]
fn synthetic_trial_bounds_match_frozen_values() {
    let dist = estimate_distribution(&synthetic()).unwrap();
    assert!((total_effect(&dist) - to_f64("15981/59800")).abs() < 1e-12);
    for (name, lo, hi) in FROZEN {
        let e: EstimandId = name.parse().unwrap();
        let b = sharp_bounds(&dist, e).unwrap();
        assert!((b.lower - to_f64(lo)).abs() < 1e-12, "{name} lower {} vs {lo}", b.lower);
        assert!((b.upper - to_f64(hi)).abs() < 1e-12, "{name} upper {} vs {hi}", b.upper);
    }
}

#[test]
fn synthetic_trial_exact_lp_matches_frozen_rationals() {
    let exact = ExactObserved::from_counts(&COUNTS).unwrap();
    for (name, lo, hi) in FROZEN {
        let iv = sharp_bounds_lp_exact(&exact, name.parse().unwrap()).unwrap();
        assert_eq!(iv.lower, ratio(lo), "{name}");
        assert_eq!(iv.upper, ratio(hi), "{name}");
    }
}

#[test]
fn synthetic_trial_active_terms() {
    let dist = estimate_distribution(&synthetic()).unwrap();
    let active = |e| {
        let b = sharp_bounds(&dist, e).unwrap();
        (b.active_lower, b.active_upper)
    };
    assert_eq!(active(EstimandId::NDE_000), (Some(4), Some(3)));
    assert_eq!(active(EstimandId::JNIE_1), (Some(1), Some(1)));
    assert_eq!(active(EstimandId::NIE2_100), (Some(6), Some(6)));
}

/// Share of Dirichlet(1e-6) draws whose largest coordinate exceeds 0.99.
const NEAR_VERTEX_SHARE: f64 = 0.9375;

#[test]
fn tiny_alpha_near_vertex_share() {
    let qs = sample_counterfactuals(1e-6, 400, 2024).unwrap();
    let share = qs.iter().filter(|q| q.max_mass() > 0.99).count() as f64 / qs.len() as f64;
    assert_eq!(share, NEAR_VERTEX_SHARE);
}

/// `(alpha, estimand, prop_width_lt_1, prop_excludes_zero)` for n = 1000,
/// seed 20240611.
const STUDY: [(f64, &str, f64, f64); 8] = [
    (1e-6, "NDE-000", 0.264, 0.131),
    (1e-6, "JNIE-1", 0.264, 0.0),
    (1e-6, "MS2NIE1-11", 0.578, 0.0),
    (1e-6, "NIE2-100", 0.254, 0.0),
    (1e-3, "NDE-000", 0.0, 0.0),
    (1e-3, "JNIE-1", 0.0, 0.0),
    (1e-3, "MS2NIE1-11", 0.236, 0.0),
    (1e-3, "NIE2-100", 0.0, 0.0),
];

#[test]
fn study_summary_baseline() {
    let out = dirichlet_study(&SimulationConfig {
        alpha_levels: vec![1e-6, 1e-3],
        n_per_level: 1000,
        seed: 20240611,
        estimands: EstimandId::decomposition_terms().to_vec(),
    })
    .unwrap();
    assert_eq!(out.redraws, 0);
    for (s, (alpha, e, w, x)) in out.summary.iter().zip(STUDY) {
        assert_eq!(s.alpha, alpha);
        assert_eq!(s.estimand.to_string(), e);
        assert_eq!(s.prop_width_lt_1, w);
        assert_eq!(s.prop_excludes_zero, x);
    }
}
