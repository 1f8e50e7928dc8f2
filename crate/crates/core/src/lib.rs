//! Sharp nonparametric bounds for mediation effects in two-arm randomized
//! trials with two sequential binary mediators and unmeasured
//! mediator-outcome confounding.
//!
//! ```
//! use medbounds::observed::estimate_distribution;
//! use medbounds::{sharp_bounds, EstimandId, RecordTable};
//!
//! let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/synthetic_trial.csv");
//! let dist = estimate_distribution(&RecordTable::from_csv_path(path)?)?;
//! let nde = sharp_bounds(&dist, EstimandId::NDE_000)?;
//! assert!((nde.width() - 1.0).abs() < 1e-12);
//! let nie1 = sharp_bounds(&dist, "NIE1-110".parse()?)?;
//! assert!(nie1.lower < 0.0 && nie1.upper > 0.0);
//! # Ok::<(), medbounds::Error>(())
//! ```

pub mod bounds;
pub mod canonical;
pub mod cli;
pub mod error;
pub mod estimand;
pub mod inference;
pub mod lp;
pub mod observed;
pub mod report;
pub mod simplex;
pub mod simulation;

pub use bounds::{BoundInterval, Guarantee, Method};
pub use canonical::{CounterfactualDistribution, ResponseType};
pub use error::{Error, Result};
pub use estimand::EstimandId;
pub use observed::{ObservedDistribution, Record, RecordTable};

/// Closed-form bounds where available, the LP oracle otherwise.
pub fn sharp_bounds(dist: &ObservedDistribution, e: EstimandId) -> Result<BoundInterval> {
    if e == EstimandId::Te || bounds::has_closed_form(e) {
        bounds::closed_form_bounds(dist, e)
    } else {
        lp::sharp_bounds_lp(dist, e)
    }
}
