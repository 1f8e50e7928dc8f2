//! Closed-form sharp bounds and the subtraction/addition procedures.
//!
//! Each closed form is a `max` over a list of linear expressions in the
//! observed cells (lower limit) and a `min` over another list (upper limit).
//! The position of the attaining expression is reported as `active_lower` /
//! `active_upper` (0-based, smallest index on exact ties).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimand::EstimandId;
use crate::observed::{total_effect, ObservedDistribution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    Lp,
    Subtraction,
    Addition,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ClosedForm => "closed-form",
            Method::Lp => "lp",
            Method::Subtraction => "subtraction",
            Method::Addition => "addition",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Guarantee {
    Sharp,
    ValidOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInterval {
    pub lower: f64,
    pub upper: f64,
    pub method: Method,
    pub guarantee: Guarantee,
    pub active_lower: Option<usize>,
    pub active_upper: Option<usize>,
}

impl BoundInterval {
    /// Interval with no provenance beyond `method`; sharp for closed-form and LP.
    pub fn new(lower: f64, upper: f64, method: Method) -> Self {
        let guarantee = match method {
            Method::ClosedForm | Method::Lp => Guarantee::Sharp,
            Method::Subtraction | Method::Addition => Guarantee::ValidOnly,
        };
        Self {
            lower,
            upper,
            method,
            guarantee,
            active_lower: None,
            active_upper: None,
        }
    }

    fn closed(lower: (f64, usize), upper: (f64, usize)) -> Self {
        Self {
            active_lower: Some(lower.1),
            active_upper: Some(upper.1),
            ..Self::new(lower.0, upper.0, Method::ClosedForm)
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, value: f64, tol: f64) -> bool {
        value >= self.lower - tol && value <= self.upper + tol
    }

    /// True when the interval covers all of `[-1, 1]`.
    pub fn is_noninformative(&self) -> bool {
        self.lower <= -1.0 + 1e-12 && self.upper >= 1.0 - 1e-12
    }

    /// True when zero lies strictly outside the interval by more than `tol`.
    pub fn excludes_zero(&self, tol: f64) -> bool {
        self.lower > tol || self.upper < -tol
    }
}

/// `(max, argmax)` with the smallest index on ties.
fn max_active(values: &[f64]) -> (f64, usize) {
    let mut best = (values[0], 0);
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > best.0 {
            best = (v, i);
        }
    }
    best
}

/// `(min, argmin)` with the smallest index on ties.
fn min_active(values: &[f64]) -> (f64, usize) {
    let mut best = (values[0], 0);
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < best.0 {
            best = (v, i);
        }
    }
    best
}

/// Controlled direct effect with both mediators held at `(m1, m2)`.
pub fn cde_bounds(dist: &ObservedDistribution, m1: u8, m2: u8) -> BoundInterval {
    let p = |y, x| dist.p(y, m1, m2, x);
    let lower = -1.0 + p(0, 0) + p(1, 1);
    let upper = 1.0 - p(0, 1) - p(1, 0);
    BoundInterval::closed((lower, 0), (upper, 0))
}

/// The CDE limits written relative to the total effect: the lower limit is
/// `TE - B` and the width is `g`. Returns `(B, g)`.
///
/// `B` sums `p_{1 m' . 1} + p_{0 m' . 0}` over mediator levels `m'` other than
/// `(m1, m2)`; `g` is the total probability of those levels across both arms.
pub fn cde_te_form(dist: &ObservedDistribution, m1: u8, m2: u8) -> (f64, f64) {
    let mut b = 0.0;
    for other in 0..4u8 {
        let (a1, a2) = (other >> 1, other & 1);
        if (a1, a2) != (m1, m2) {
            b += dist.p(1, a1, a2, 1) + dist.p(0, a1, a2, 0);
        }
    }
    let g = (1.0 - dist.mediator_rate(m1, m2, 0)) + (1.0 - dist.mediator_rate(m1, m2, 1));
    (b, g)
}

pub fn nde000_bounds(dist: &ObservedDistribution) -> BoundInterval {
    let p = |y, m1, m2, x| dist.p(y, m1, m2, x);
    let lower = [
        p(1, 1, 1, 1) - p(1, 0, 0, 0) - p(1, 1, 0, 0) - p(1, 0, 1, 0) + p(0, 1, 1, 0) - 1.0,
        -2.0 + p(0, 0, 0, 0) + p(0, 1, 0, 0) + 2.0 * p(0, 0, 1, 0) + p(1, 0, 1, 0) + p(1, 0, 1, 1)
            + p(0, 1, 1, 0),
        -2.0 + p(0, 0, 0, 0) + 2.0 * p(0, 1, 0, 0) + p(1, 1, 0, 0) + p(1, 1, 0, 1) + p(0, 0, 1, 0)
            + p(0, 1, 1, 0),
        -2.0 + 2.0 * p(0, 0, 0, 0) + p(1, 0, 0, 0) + p(1, 0, 0, 1) + p(0, 1, 0, 0) + p(0, 0, 1, 0)
            + p(0, 1, 1, 0),
        -1.0 + p(0, 0, 0, 0) + p(0, 1, 0, 0) + p(0, 0, 1, 0) + p(0, 1, 1, 0),
    ];
    let upper = [
        1.0 + p(0, 0, 0, 0) - p(0, 1, 0, 1) - p(1, 1, 0, 0) + p(0, 0, 1, 0) + p(0, 1, 1, 0),
        1.0 + p(0, 0, 0, 0) + p(0, 1, 0, 0) - p(0, 0, 1, 1) - p(1, 0, 1, 0) + p(0, 1, 1, 0),
        1.0 + p(0, 0, 0, 0) - p(1, 1, 1, 0) + p(0, 1, 0, 0) + p(0, 0, 1, 0) - p(0, 1, 1, 1),
        p(0, 0, 0, 0) + p(0, 1, 0, 0) + p(0, 0, 1, 0) + p(0, 1, 1, 0),
        1.0 - p(0, 0, 0, 1) - p(1, 0, 0, 0) + p(0, 1, 0, 0) + p(0, 0, 1, 0) + p(0, 1, 1, 0),
    ];
    BoundInterval::closed(max_active(&lower), min_active(&upper))
}

pub fn jnie1_bounds(dist: &ObservedDistribution) -> BoundInterval {
    let p = |y, m1, m2, x| dist.p(y, m1, m2, x);
    let lower = [
        -1.0 + p(1, 1, 1, 0) + p(0, 1, 1, 0) - p(0, 0, 0, 1) - p(0, 1, 0, 1) - p(0, 0, 1, 1),
        -p(0, 0, 0, 1) - p(0, 1, 0, 1) - p(0, 0, 1, 1) - p(0, 1, 1, 1),
        -1.0 - p(0, 0, 0, 1) - p(0, 1, 0, 1) + p(0, 0, 1, 0) + p(1, 0, 1, 0) - p(0, 1, 1, 1),
        -1.0 - p(0, 0, 0, 1) + p(0, 1, 0, 0) + p(1, 1, 0, 0) - p(0, 0, 1, 1) - p(0, 1, 1, 1),
        -1.0 + p(0, 0, 0, 0) + p(1, 0, 0, 0) - p(0, 1, 0, 1) - p(0, 0, 1, 1) - p(0, 1, 1, 1),
    ];
    let upper = [
        2.0 - p(0, 0, 0, 0) - p(0, 0, 0, 1) - p(1, 0, 0, 0) - p(1, 0, 0, 1) - p(0, 1, 0, 1)
            - p(0, 0, 1, 1)
            - p(0, 1, 1, 1),
        1.0 - p(0, 0, 0, 1) - p(0, 1, 0, 1) - p(0, 0, 1, 1) - p(0, 1, 1, 1),
        2.0 - p(0, 0, 0, 1) - p(0, 1, 0, 0) - p(0, 1, 0, 1) - p(1, 1, 0, 0) - p(1, 1, 0, 1)
            - p(0, 0, 1, 1)
            - p(0, 1, 1, 1),
        2.0 - p(0, 0, 0, 1) - p(0, 1, 0, 1) - p(0, 0, 1, 0) - p(0, 0, 1, 1) - p(1, 0, 1, 0)
            - p(1, 0, 1, 1)
            - p(0, 1, 1, 1),
        1.0 - p(1, 1, 1, 0) - p(0, 1, 1, 0) + p(1, 0, 0, 1) + p(1, 1, 0, 1) + p(1, 0, 1, 1),
    ];
    BoundInterval::closed(max_active(&lower), min_active(&upper))
}

pub fn ms2nie1_11_bounds(dist: &ObservedDistribution) -> BoundInterval {
    let p = |y, m1, m2, x| dist.p(y, m1, m2, x);
    let lower = [
        -p(0, 0, 0, 0) - p(0, 0, 0, 1) - p(1, 0, 0, 0) - p(0, 0, 1, 0) - p(0, 0, 1, 1)
            - p(1, 0, 1, 0),
        -p(0, 0, 0, 1) - p(0, 1, 0, 1) - p(0, 0, 1, 1) - p(0, 1, 1, 1),
        -1.0 + p(0, 0, 0, 0) + p(1, 0, 0, 0) - p(0, 1, 0, 1) + p(0, 0, 1, 0) + p(1, 0, 1, 0)
            - p(0, 1, 1, 1),
    ];
    let upper = [
        1.0 - p(0, 0, 0, 0) - p(1, 0, 0, 0) - p(0, 0, 1, 0) - p(1, 0, 1, 0) + p(1, 1, 1, 1)
            + p(1, 1, 0, 1),
        1.0 - p(0, 0, 0, 1) - p(0, 1, 0, 1) - p(0, 0, 1, 1) - p(0, 1, 1, 1),
        p(0, 0, 0, 0) + p(1, 0, 0, 0) + p(1, 0, 0, 1) + p(0, 0, 1, 0) + p(1, 0, 1, 0)
            + p(1, 0, 1, 1),
    ];
    BoundInterval::closed(max_active(&lower), min_active(&upper))
}

pub fn nie2_100_bounds(dist: &ObservedDistribution) -> BoundInterval {
    let p = |y, m1, m2, x| dist.p(y, m1, m2, x);
    let lower = [
        -1.0 + p(0, 1, 1, 0) + p(1, 1, 1, 0) - p(0, 0, 0, 1) - p(1, 0, 0, 1) - p(0, 1, 0, 1)
            - p(0, 0, 1, 1)
            - p(1, 0, 1, 1),
        -1.0 + p(1, 1, 0, 1) + p(1, 1, 1, 1) - p(0, 0, 0, 0) - p(1, 0, 0, 0) - p(0, 0, 1, 0)
            - p(1, 0, 1, 0),
        -2.0 + p(1, 0, 0, 1) + p(0, 0, 1, 0) + p(0, 0, 1, 1) + p(1, 0, 1, 0) + p(1, 0, 1, 1),
        -2.0 + p(0, 0, 0, 0) + p(1, 0, 0, 0) + p(1, 0, 0, 1) + p(0, 0, 1, 0) + p(1, 0, 1, 0)
            + p(1, 0, 1, 1),
        -1.0 - p(0, 0, 0, 1) - p(1, 0, 0, 1) + p(0, 1, 0, 0) + p(1, 1, 0, 0) - p(0, 0, 1, 1)
            - p(1, 0, 1, 1)
            - p(0, 1, 1, 1),
        -2.0 + p(0, 0, 0, 0) + p(0, 0, 0, 1) + p(1, 0, 0, 0) + p(1, 0, 0, 1) + p(1, 0, 1, 1),
        -1.0,
    ];
    let upper = [
        2.0 - p(0, 0, 0, 0) - p(0, 0, 0, 1) - p(1, 0, 0, 0) - p(1, 0, 0, 1) - p(0, 0, 1, 1),
        2.0 - p(0, 0, 0, 0) - p(0, 0, 0, 1) - p(1, 0, 0, 0) - p(0, 0, 1, 0) - p(0, 0, 1, 1)
            - p(1, 0, 1, 0),
        2.0 - p(0, 0, 0, 1) - p(0, 0, 1, 0) - p(0, 0, 1, 1) - p(1, 0, 1, 0) - p(1, 0, 1, 1),
        2.0 - p(0, 1, 0, 0) - p(0, 1, 0, 1) - p(1, 1, 0, 0) - p(1, 1, 0, 1) - p(0, 1, 1, 1),
        1.0 + p(0, 0, 0, 0) + p(1, 0, 0, 0) - p(0, 1, 0, 1) + p(0, 0, 1, 0) + p(1, 0, 1, 0)
            - p(0, 1, 1, 1),
        1.0 - p(0, 1, 1, 0) - p(1, 1, 1, 0)
            + p(0, 0, 0, 1)
            + p(1, 0, 0, 1)
            + p(1, 1, 0, 1)
            + p(0, 0, 1, 1)
            + p(1, 0, 1, 1),
        1.0,
    ];
    BoundInterval::closed(max_active(&lower), min_active(&upper))
}

/// True when `e` has a hard-coded closed form.
pub fn has_closed_form(e: EstimandId) -> bool {
    matches!(
        e,
        EstimandId::Cde { .. }
            | EstimandId::Nde { x1: 0, x2: 0, x3: 0 }
            | EstimandId::Jnie { x: 1 }
            | EstimandId::Ms2Nie1 { x: 1, x2: 1 }
            | EstimandId::Nie2 { x: 1, x1: 0, x3: 0 }
    )
}

/// Closed-form bounds for `e`, or [`Error::NoClosedForm`].
///
/// The total effect is identified and returned as a degenerate interval.
pub fn closed_form_bounds(dist: &ObservedDistribution, e: EstimandId) -> Result<BoundInterval> {
    Ok(match e {
        EstimandId::Te => {
            let te = total_effect(dist);
            BoundInterval::closed((te, 0), (te, 0))
        }
        EstimandId::Cde { m1, m2 } if m1 <= 1 && m2 <= 1 => cde_bounds(dist, m1, m2),
        EstimandId::NDE_000 => nde000_bounds(dist),
        EstimandId::JNIE_1 => jnie1_bounds(dist),
        EstimandId::MS2NIE1_11 => ms2nie1_11_bounds(dist),
        EstimandId::NIE2_100 => nie2_100_bounds(dist),
        other => return Err(Error::NoClosedForm(other.to_string())),
    })
}

/// The quantity a decomposition adds up to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    /// Point-identified, e.g. the total effect.
    Identified(f64),
    /// Only bounded.
    Bounded(BoundInterval),
}

impl Target {
    fn limits(&self) -> (f64, f64) {
        match self {
            Target::Identified(v) => (*v, *v),
            Target::Bounded(b) => (b.lower, b.upper),
        }
    }
}

/// Bounds for the remaining term of `target = sum(parts) + remaining`.
///
/// Sharp only when the target is identified and exactly one other term is
/// subtracted; valid otherwise. Never clipped to `[-1, 1]`.
pub fn subtraction_procedure(target: Target, parts: &[BoundInterval]) -> BoundInterval {
    let (t_lo, t_hi) = target.limits();
    let lower = t_lo - parts.iter().map(|b| b.upper).sum::<f64>();
    let upper = t_hi - parts.iter().map(|b| b.lower).sum::<f64>();
    let mut out = BoundInterval::new(lower, upper, Method::Subtraction);
    if matches!(target, Target::Identified(_)) && parts.len() == 1 {
        out.guarantee = Guarantee::Sharp;
    }
    out
}

/// Valid bounds for a sum of terms from the bounds of each term.
pub fn addition_procedure(parts: &[BoundInterval]) -> Result<BoundInterval> {
    if parts.is_empty() {
        return Err(Error::InvalidConfig(
            "addition procedure needs at least one term".into(),
        ));
    }
    let lower = parts.iter().map(|b| b.lower).sum();
    let upper = parts.iter().map(|b| b.upper).sum();
    Ok(BoundInterval::new(lower, upper, Method::Addition))
}
