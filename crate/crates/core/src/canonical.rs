//! Canonical response-type space for `X -> M1 -> M2 -> Y` with an unrestricted
//! confounder of the mediators and the outcome.
//!
//! A response type fixes every counterfactual at once:
//!
//! * `r1` (2 bits): `M1(x)` at bit `x`
//! * `r2` (4 bits): `M2(x, m1)` at bit `2x + m1`
//! * `ry` (8 bits): `Y(x, m1, m2)` at bit `4x + 2m1 + m2`
//!
//! and is packed as `index = 4096 r1 + 256 r2 + ry`, giving 16,384 types.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observed::{cell_index, ObservedDistribution, NUM_CELLS};

pub const NUM_TYPES: usize = 4 * 16 * 256;

/// Tolerance on `sum(q) = 1`.
pub const SIMPLEX_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResponseType {
    r1: u8,
    r2: u8,
    ry: u8,
}

impl ResponseType {
    pub fn new(r1: u8, r2: u8, ry: u8) -> Result<Self> {
        if r1 > 3 || r2 > 15 {
            return Err(Error::IndexOutOfRange(
                4096 * r1 as usize + 256 * r2 as usize + ry as usize,
            ));
        }
        Ok(Self { r1, r2, ry })
    }

    pub fn from_index(index: usize) -> Result<Self> {
        if index >= NUM_TYPES {
            return Err(Error::IndexOutOfRange(index));
        }
        Ok(Self::decode(index))
    }

    #[inline]
    pub(crate) fn decode(index: usize) -> Self {
        Self {
            r1: (index >> 12) as u8 & 0x3,
            r2: (index >> 8) as u8 & 0xf,
            ry: index as u8,
        }
    }

    #[inline]
    pub fn index(&self) -> usize {
        ((self.r1 as usize) << 12) | ((self.r2 as usize) << 8) | self.ry as usize
    }

    pub fn r1(&self) -> u8 {
        self.r1
    }

    pub fn r2(&self) -> u8 {
        self.r2
    }

    pub fn ry(&self) -> u8 {
        self.ry
    }

    /// `M1(x)`.
    #[inline]
    pub fn m1(&self, x: u8) -> u8 {
        (self.r1 >> x) & 1
    }

    /// `M2(x, m1)`.
    #[inline]
    pub fn m2(&self, x: u8, m1: u8) -> u8 {
        (self.r2 >> (2 * x + m1)) & 1
    }

    /// `Y(x, m1, m2)`.
    #[inline]
    pub fn y(&self, x: u8, m1: u8, m2: u8) -> u8 {
        (self.ry >> (4 * x + 2 * m1 + m2)) & 1
    }

    /// Factual `(m1, m2, y)` when the arm is set to `x`.
    #[inline]
    pub fn natural_world(&self, x: u8) -> (u8, u8, u8) {
        let m1 = self.m1(x);
        let m2 = self.m2(x, m1);
        (m1, m2, self.y(x, m1, m2))
    }

    /// `Y(x, M1(x1), M2(x2, M1(x3)))`.
    #[inline]
    pub fn nested_potential_outcome(&self, x: u8, x1: u8, x2: u8, x3: u8) -> u8 {
        let direct_m1 = self.m1(x1);
        let m2 = self.m2(x2, self.m1(x3));
        self.y(x, direct_m1, m2)
    }

    /// `Y(x, m1, m2)` with both mediators held fixed.
    #[inline]
    pub fn controlled_outcome(&self, x: u8, m1: u8, m2: u8) -> u8 {
        self.y(x, m1, m2)
    }
}

/// Iterates all response types in index order.
pub fn all_types() -> impl ExactSizeIterator<Item = ResponseType> {
    (0..NUM_TYPES).map(ResponseType::decode)
}

/// Observed cell (row of the constraint matrix) that type `t` lands in, per arm.
pub fn natural_cells() -> &'static [[u8; 2]] {
    static TABLE: OnceLock<Vec<[u8; 2]>> = OnceLock::new();
    TABLE.get_or_init(|| {
        all_types()
            .map(|t| {
                let mut cells = [0u8; 2];
                for x in 0..2u8 {
                    let (m1, m2, y) = t.natural_world(x);
                    cells[x as usize] = cell_index(y, m1, m2, x) as u8;
                }
                cells
            })
            .collect()
    })
}

/// Probability mass over the 16,384 response types.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct CounterfactualDistribution {
    q: Vec<f64>,
}

impl CounterfactualDistribution {
    pub fn new(q: Vec<f64>) -> Result<Self> {
        if q.len() != NUM_TYPES {
            return Err(Error::InvalidCounterfactual(format!(
                "expected {NUM_TYPES} entries, found {}",
                q.len()
            )));
        }
        if let Some((i, v)) = q.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
            return Err(Error::InvalidCounterfactual(format!(
                "entry {i} is {v}"
            )));
        }
        let sum: f64 = q.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidCounterfactual(format!("mass sums to {sum}")));
        }
        Ok(Self { q })
    }

    pub fn uniform() -> Self {
        Self {
            q: vec![1.0 / NUM_TYPES as f64; NUM_TYPES],
        }
    }

    /// Convex combination `w a + (1 - w) b`.
    pub fn mix(a: &Self, b: &Self, w: f64) -> Result<Self> {
        let q = a
            .q
            .iter()
            .zip(&b.q)
            .map(|(x, y)| w * x + (1.0 - w) * y)
            .collect();
        Self::new(q)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.q
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.q
    }

    /// Largest single-type mass.
    pub fn max_mass(&self) -> f64 {
        self.q.iter().copied().fold(0.0, f64::max)
    }
}

impl TryFrom<Vec<f64>> for CounterfactualDistribution {
    type Error = Error;

    fn try_from(q: Vec<f64>) -> Result<Self> {
        Self::new(q)
    }
}

impl From<CounterfactualDistribution> for Vec<f64> {
    fn from(d: CounterfactualDistribution) -> Self {
        d.q
    }
}

/// Point mass on a single response type.
pub fn vertex(t_index: usize) -> Result<CounterfactualDistribution> {
    if t_index >= NUM_TYPES {
        return Err(Error::IndexOutOfRange(t_index));
    }
    let mut q = vec![0.0; NUM_TYPES];
    q[t_index] = 1.0;
    Ok(CounterfactualDistribution { q })
}

/// Observed law generated by `q` under randomization of `X`.
pub fn implied_observed(q: &CounterfactualDistribution) -> ObservedDistribution {
    let mut cells = [0.0; NUM_CELLS];
    for (mass, c) in q.q.iter().zip(natural_cells()) {
        cells[c[0] as usize] += mass;
        cells[c[1] as usize] += mass;
    }
    ObservedDistribution::from_cells_unchecked(cells)
}

/// Observed law at a vertex, computed without materializing the point mass.
pub fn vertex_observed(t: ResponseType) -> ObservedDistribution {
    let mut cells = [0.0; NUM_CELLS];
    let c = natural_cells()[t.index()];
    cells[c[0] as usize] = 1.0;
    cells[c[1] as usize] = 1.0;
    ObservedDistribution::from_cells_unchecked(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observed::validate;

    /// `M1 = x`, `M2 = m1`, `Y = m2`.
    pub(crate) fn identity_chain() -> ResponseType {
        ResponseType::new(0b10, 0b1010, 0b1010_1010).unwrap()
    }

    #[test]
    fn natural_world_examples() {
        let zero = ResponseType::new(0, 0, 0).unwrap();
        assert_eq!(zero.natural_world(0), (0, 0, 0));
        assert_eq!(identity_chain().natural_world(1), (1, 1, 1));
        assert_eq!(identity_chain().natural_world(0), (0, 0, 0));
    }

    #[test]
    fn nested_outcome_examples() {
        // Y = M2(1, M1(0)) = M1(0) = 0
        assert_eq!(identity_chain().nested_potential_outcome(1, 0, 1, 0), 0);
        assert_eq!(identity_chain().nested_potential_outcome(0, 1, 0, 1), 1);
        let always = ResponseType::new(2, 7, 255).unwrap();
        for a in 0..16u8 {
            assert_eq!(
                always.nested_potential_outcome(a >> 3, (a >> 2) & 1, (a >> 1) & 1, a & 1),
                1
            );
        }
    }

    #[test]
    fn controlled_outcome_examples() {
        let zero = ResponseType::new(3, 15, 0).unwrap();
        let y_is_m2 = ResponseType::new(0, 0, 0b1010_1010).unwrap();
        let single = ResponseType::new(0, 0, 1 << 7).unwrap();
        for a in 0..8u8 {
            assert_eq!(zero.controlled_outcome(a >> 2, (a >> 1) & 1, a & 1), 0);
            assert_eq!(y_is_m2.controlled_outcome(a >> 2, (a >> 1) & 1, 1), 1);
        }
        assert_eq!(single.controlled_outcome(1, 1, 1), 1);
        assert_eq!(single.controlled_outcome(0, 0, 0), 0);
    }

    #[test]
    fn index_is_a_bijection() {
        let mut seen = vec![false; NUM_TYPES];
        for r1 in 0..4 {
            for r2 in 0..16 {
                for ry in 0..=255u8 {
                    let t = ResponseType::new(r1, r2, ry).unwrap();
                    assert_eq!(t.index(), 4096 * r1 as usize + 256 * r2 as usize + ry as usize);
                    assert!(!seen[t.index()]);
                    seen[t.index()] = true;
                    assert_eq!(ResponseType::from_index(t.index()).unwrap(), t);
                }
            }
        }
        assert!(seen.iter().all(|s| *s));
    }

    #[test]
    fn consistency_holds_for_every_type() {
        for t in all_types() {
            for x in 0..2 {
                assert_eq!(t.natural_world(x).2, t.nested_potential_outcome(x, x, x, x));
            }
        }
    }

    #[test]
    fn vertex_examples() {
        let v = vertex(0).unwrap();
        assert_eq!(v.as_slice()[0], 1.0);
        assert_eq!(v.as_slice().iter().sum::<f64>(), 1.0);
        assert!(matches!(vertex(NUM_TYPES), Err(Error::IndexOutOfRange(16384))));
        assert!(ResponseType::from_index(NUM_TYPES).is_err());
    }

    #[test]
    fn implied_observed_of_uniform_is_uniform() {
        let p = implied_observed(&CounterfactualDistribution::uniform());
        for c in p.cells() {
            assert!((c - 0.125).abs() < 1e-15);
        }
    }

    #[test]
    fn implied_observed_of_zero_type() {
        let p = implied_observed(&vertex(0).unwrap());
        assert_eq!(p.p(0, 0, 0, 0), 1.0);
        assert_eq!(p.p(0, 0, 0, 1), 1.0);
        assert_eq!(p.cells().iter().sum::<f64>(), 2.0);
    }

    #[test]
    fn every_vertex_puts_one_cell_per_arm() {
        for t in all_types() {
            let p = vertex_observed(t);
            assert!(validate(p).is_ok());
            for arm in 0..2 {
                let arm_cells = &p.cells()[arm * 8..arm * 8 + 8];
                assert_eq!(arm_cells.iter().filter(|c| **c == 1.0).count(), 1);
            }
            assert_eq!(p, implied_observed(&vertex(t.index()).unwrap()));
        }
    }

    #[test]
    fn counterfactual_validation() {
        assert!(CounterfactualDistribution::new(vec![0.0; 10]).is_err());
        let mut q = vec![0.0; NUM_TYPES];
        q[0] = 0.5;
        assert!(CounterfactualDistribution::new(q.clone()).is_err());
        q[1] = 0.5;
        assert!(CounterfactualDistribution::new(q.clone()).is_ok());
        q[2] = f64::NAN;
        assert!(CounterfactualDistribution::new(q).is_err());
    }

    #[test]
    fn counterfactual_json_is_a_plain_array() {
        let v = vertex(3).unwrap();
        let s = serde_json::to_string(&v).unwrap();
        assert!(s.starts_with("[0.0,0.0,0.0,1.0,"));
        let back: CounterfactualDistribution = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
        assert!(serde_json::from_str::<CounterfactualDistribution>("[1.0]").is_err());
    }
}
