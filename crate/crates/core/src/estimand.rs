//! Catalog of mediation estimands on the risk-difference scale.
//!
//! Every estimand is a contrast `P(A = 1) - P(B = 1)` of two potential
//! outcomes, so on each response type its objective coefficient is in
//! `{-1, 0, 1}`.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::canonical::{all_types, CounterfactualDistribution, ResponseType, NUM_TYPES};
use crate::error::Error;

/// A mediation estimand. Index bits follow the subscript order of the names,
/// e.g. `Nde { x1, x2, x3 }` is `NDE-x1x2x3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimandId {
    /// `P(Y(1)=1) - P(Y(0)=1)`.
    Te,
    /// Both mediators held at `(m1, m2)`.
    Cde { m1: u8, m2: u8 },
    /// `Y(1, M1(x1), M2(x2, M1(x3))) - Y(0, M1(x1), M2(x2, M1(x3)))`.
    Nde { x1: u8, x2: u8, x3: u8 },
    /// `Y(x, M1(1), M2(1, M1(1))) - Y(x, M1(0), M2(0, M1(0)))`.
    Jnie { x: u8 },
    /// `Y(x, M1(1), M2(x2, M1(1))) - Y(x, M1(0), M2(x2, M1(0)))`.
    Ms2Nie1 { x: u8, x2: u8 },
    /// `Y(x, M1(x1), M2(1, M1(x3))) - Y(x, M1(x1), M2(0, M1(x3)))`.
    Nie2 { x: u8, x1: u8, x3: u8 },
    /// `Y(x, M1(1), M2(x2, M1(x3))) - Y(x, M1(0), M2(x2, M1(x3)))`.
    Nie1 { x: u8, x2: u8, x3: u8 },
    /// `Y(x, M1(x1), M2(x2, M1(1))) - Y(x, M1(x1), M2(x2, M1(0)))`.
    Nie12 { x: u8, x1: u8, x2: u8 },
}

/// One side of a contrast.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialOutcome {
    /// `Y(x, M1(x1), M2(x2, M1(x3)))`
    Nested { x: u8, x1: u8, x2: u8, x3: u8 },
    /// `Y(x, m1, m2)`
    Controlled { x: u8, m1: u8, m2: u8 },
}

impl PotentialOutcome {
    #[inline]
    pub fn evaluate(self, t: &ResponseType) -> u8 {
        match self {
            PotentialOutcome::Nested { x, x1, x2, x3 } => t.nested_potential_outcome(x, x1, x2, x3),
            PotentialOutcome::Controlled { x, m1, m2 } => t.controlled_outcome(x, m1, m2),
        }
    }
}

const fn nested(x: u8, x1: u8, x2: u8, x3: u8) -> PotentialOutcome {
    PotentialOutcome::Nested { x, x1, x2, x3 }
}

pub const NUM_ESTIMANDS: usize = 43;

impl EstimandId {
    pub const NDE_000: EstimandId = EstimandId::Nde { x1: 0, x2: 0, x3: 0 };
    pub const JNIE_1: EstimandId = EstimandId::Jnie { x: 1 };
    pub const MS2NIE1_11: EstimandId = EstimandId::Ms2Nie1 { x: 1, x2: 1 };
    pub const NIE2_100: EstimandId = EstimandId::Nie2 { x: 1, x1: 0, x3: 0 };
    pub const NIE1_110: EstimandId = EstimandId::Nie1 { x: 1, x2: 1, x3: 0 };
    pub const NIE12_111: EstimandId = EstimandId::Nie12 { x: 1, x1: 1, x2: 1 };

    /// The full catalog, in a fixed order.
    pub fn all() -> Vec<EstimandId> {
        let mut out = Vec::with_capacity(NUM_ESTIMANDS);
        out.push(EstimandId::Te);
        for i in 0..4u8 {
            out.push(EstimandId::Cde { m1: i >> 1, m2: i & 1 });
        }
        for i in 0..8u8 {
            out.push(EstimandId::Nde { x1: i >> 2, x2: (i >> 1) & 1, x3: i & 1 });
        }
        for x in 0..2u8 {
            out.push(EstimandId::Jnie { x });
        }
        for i in 0..4u8 {
            out.push(EstimandId::Ms2Nie1 { x: i >> 1, x2: i & 1 });
        }
        for i in 0..8u8 {
            out.push(EstimandId::Nie2 { x: i >> 2, x1: (i >> 1) & 1, x3: i & 1 });
        }
        for i in 0..8u8 {
            out.push(EstimandId::Nie1 { x: i >> 2, x2: (i >> 1) & 1, x3: i & 1 });
        }
        for i in 0..8u8 {
            out.push(EstimandId::Nie12 { x: i >> 2, x1: (i >> 1) & 1, x2: i & 1 });
        }
        out
    }

    /// The estimands that have hard-coded closed-form bounds.
    pub fn with_closed_form() -> Vec<EstimandId> {
        let mut out: Vec<_> = (0..4u8)
            .map(|i| EstimandId::Cde { m1: i >> 1, m2: i & 1 })
            .collect();
        out.extend([Self::NDE_000, Self::JNIE_1, Self::MS2NIE1_11, Self::NIE2_100]);
        out
    }

    /// The terms of the two- and three-way decompositions of the total effect.
    pub fn decomposition_terms() -> [EstimandId; 4] {
        [Self::NDE_000, Self::JNIE_1, Self::MS2NIE1_11, Self::NIE2_100]
    }

    /// Position in [`EstimandId::all`].
    pub fn dense_index(&self) -> usize {
        match *self {
            EstimandId::Te => 0,
            EstimandId::Cde { m1, m2 } => 1 + bits2(m1, m2),
            EstimandId::Nde { x1, x2, x3 } => 5 + bits3(x1, x2, x3),
            EstimandId::Jnie { x } => 13 + x as usize,
            EstimandId::Ms2Nie1 { x, x2 } => 15 + bits2(x, x2),
            EstimandId::Nie2 { x, x1, x3 } => 19 + bits3(x, x1, x3),
            EstimandId::Nie1 { x, x2, x3 } => 27 + bits3(x, x2, x3),
            EstimandId::Nie12 { x, x1, x2 } => 35 + bits3(x, x1, x2),
        }
    }

    fn bits(&self) -> Vec<u8> {
        match *self {
            EstimandId::Te => vec![],
            EstimandId::Cde { m1, m2 } => vec![m1, m2],
            EstimandId::Nde { x1, x2, x3 } => vec![x1, x2, x3],
            EstimandId::Jnie { x } => vec![x],
            EstimandId::Ms2Nie1 { x, x2 } => vec![x, x2],
            EstimandId::Nie2 { x, x1, x3 } => vec![x, x1, x3],
            EstimandId::Nie1 { x, x2, x3 } => vec![x, x2, x3],
            EstimandId::Nie12 { x, x1, x2 } => vec![x, x1, x2],
        }
    }

    pub fn is_valid(&self) -> bool {
        self.bits().iter().all(|b| *b <= 1)
    }

    /// `(first, second)` potential outcomes of the defining contrast.
    pub fn contrast(&self) -> (PotentialOutcome, PotentialOutcome) {
        match *self {
            EstimandId::Te => (nested(1, 1, 1, 1), nested(0, 0, 0, 0)),
            EstimandId::Cde { m1, m2 } => (
                PotentialOutcome::Controlled { x: 1, m1, m2 },
                PotentialOutcome::Controlled { x: 0, m1, m2 },
            ),
            EstimandId::Nde { x1, x2, x3 } => (nested(1, x1, x2, x3), nested(0, x1, x2, x3)),
            EstimandId::Jnie { x } => (nested(x, 1, 1, 1), nested(x, 0, 0, 0)),
            EstimandId::Ms2Nie1 { x, x2 } => (nested(x, 1, x2, 1), nested(x, 0, x2, 0)),
            EstimandId::Nie2 { x, x1, x3 } => (nested(x, x1, 1, x3), nested(x, x1, 0, x3)),
            EstimandId::Nie1 { x, x2, x3 } => (nested(x, 1, x2, x3), nested(x, 0, x2, x3)),
            EstimandId::Nie12 { x, x1, x2 } => (nested(x, x1, x2, 1), nested(x, x1, x2, 0)),
        }
    }

    /// Contribution of a single response type to the estimand.
    #[inline]
    pub fn coefficient(&self, t: &ResponseType) -> i8 {
        let (a, b) = self.contrast();
        a.evaluate(t) as i8 - b.evaluate(t) as i8
    }
}

fn bits2(a: u8, b: u8) -> usize {
    ((a as usize) << 1) | b as usize
}

fn bits3(a: u8, b: u8, c: u8) -> usize {
    ((a as usize) << 2) | ((b as usize) << 1) | c as usize
}

impl fmt::Display for EstimandId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self {
            EstimandId::Te => return f.pad("TE"),
            EstimandId::Cde { .. } => "CDE",
            EstimandId::Nde { .. } => "NDE",
            EstimandId::Jnie { .. } => "JNIE",
            EstimandId::Ms2Nie1 { .. } => "MS2NIE1",
            EstimandId::Nie2 { .. } => "NIE2",
            EstimandId::Nie1 { .. } => "NIE1",
            EstimandId::Nie12 { .. } => "NIE12",
        };
        let bits: String = self.bits().iter().map(|b| char::from(b'0' + b)).collect();
        f.pad(&format!("{tag}-{bits}"))
    }
}

impl FromStr for EstimandId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let unknown = || Error::UnknownEstimand(s.to_string());
        let upper = s.trim().to_ascii_uppercase();
        if upper == "TE" {
            return Ok(EstimandId::Te);
        }
        let (tag, digits) = upper.split_once('-').ok_or_else(unknown)?;
        let bits: Vec<u8> = digits
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(unknown()),
            })
            .collect::<Result<_, _>>()?;
        let id = match (tag, bits.as_slice()) {
            ("CDE", &[m1, m2]) => EstimandId::Cde { m1, m2 },
            ("NDE", &[x1, x2, x3]) => EstimandId::Nde { x1, x2, x3 },
            ("JNIE", &[x]) => EstimandId::Jnie { x },
            ("MS2NIE1", &[x, x2]) => EstimandId::Ms2Nie1 { x, x2 },
            ("NIE2", &[x, x1, x3]) => EstimandId::Nie2 { x, x1, x3 },
            ("NIE1", &[x, x2, x3]) => EstimandId::Nie1 { x, x2, x3 },
            ("NIE12", &[x, x1, x2]) => EstimandId::Nie12 { x, x1, x2 },
            _ => return Err(unknown()),
        };
        Ok(id)
    }
}

impl Serialize for EstimandId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for EstimandId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Objective coefficients over all response types, cached per estimand.
pub fn objective_vector(e: EstimandId) -> &'static [i8] {
    static CACHE: [OnceLock<Box<[i8]>>; NUM_ESTIMANDS] = [const { OnceLock::new() }; NUM_ESTIMANDS];
    CACHE[e.dense_index()].get_or_init(|| all_types().map(|t| e.coefficient(&t)).collect())
}

/// Value of the estimand under `q`.
pub fn true_value(e: EstimandId, q: &CounterfactualDistribution) -> f64 {
    debug_assert_eq!(q.as_slice().len(), NUM_TYPES);
    objective_vector(e)
        .iter()
        .zip(q.as_slice())
        .filter(|(c, _)| **c != 0)
        .map(|(c, mass)| *c as f64 * mass)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::{vertex, NUM_TYPES};

    fn identity_chain() -> ResponseType {
        ResponseType::new(0b10, 0b1010, 0b1010_1010).unwrap()
    }

    #[test]
    fn catalog_has_43_distinct_entries_in_dense_order() {
        let all = EstimandId::all();
        assert_eq!(all.len(), NUM_ESTIMANDS);
        for (i, e) in all.iter().enumerate() {
            assert_eq!(e.dense_index(), i, "{e}");
            assert!(e.is_valid());
        }
    }

    #[test]
    fn names_round_trip() {
        for e in EstimandId::all() {
            let name = e.to_string();
            assert_eq!(name.parse::<EstimandId>().unwrap(), e);
        }
        assert_eq!(EstimandId::NDE_000.to_string(), "NDE-000");
        assert_eq!(EstimandId::JNIE_1.to_string(), "JNIE-1");
        assert_eq!(EstimandId::MS2NIE1_11.to_string(), "MS2NIE1-11");
        assert_eq!(EstimandId::NIE2_100.to_string(), "NIE2-100");
        assert_eq!("cde-01".parse::<EstimandId>().unwrap(), EstimandId::Cde { m1: 0, m2: 1 });
        for bad in ["", "NDE", "NDE-00", "NDE-0000", "NDE-002", "FOO-1", "JNIE-"] {
            assert!(bad.parse::<EstimandId>().is_err(), "{bad}");
        }
    }

    #[test]
    fn objective_examples() {
        let always = ResponseType::new(1, 9, 255).unwrap();
        assert_eq!(EstimandId::Te.coefficient(&always), 0);
        assert_eq!(EstimandId::NDE_000.coefficient(&identity_chain()), 0);
        assert_eq!(EstimandId::JNIE_1.coefficient(&identity_chain()), 1);
    }

    #[test]
    fn objective_entries_are_unit_signed() {
        for e in EstimandId::all() {
            let v = objective_vector(e);
            assert_eq!(v.len(), NUM_TYPES);
            assert!(v.iter().all(|c| (-1..=1).contains(c)));
            assert!(std::ptr::eq(v, objective_vector(e)));
        }
    }

    #[test]
    fn true_value_at_identity_chain_vertex() {
        let q = vertex(identity_chain().index()).unwrap();
        assert_eq!(true_value(EstimandId::Te, &q), 1.0);
        assert_eq!(true_value(EstimandId::JNIE_1, &q), 1.0);
    }

    #[test]
    fn decomposition_identities_hold_per_type() {
        // Per-type identities imply the identities for every q.
        let te = objective_vector(EstimandId::Te);
        let nde = objective_vector(EstimandId::NDE_000);
        let jnie = objective_vector(EstimandId::JNIE_1);
        let ms2 = objective_vector(EstimandId::MS2NIE1_11);
        let nie2 = objective_vector(EstimandId::NIE2_100);
        let nie1 = objective_vector(EstimandId::NIE1_110);
        let nie12 = objective_vector(EstimandId::NIE12_111);
        for t in 0..NUM_TYPES {
            assert_eq!(nde[t] + jnie[t], te[t]);
            assert_eq!(nde[t] + ms2[t] + nie2[t], te[t]);
            assert_eq!(ms2[t], nie1[t] + nie12[t]);
        }
    }

    #[test]
    fn serde_uses_report_names() {
        let s = serde_json::to_string(&EstimandId::Nie12 { x: 1, x1: 0, x2: 1 }).unwrap();
        assert_eq!(s, "\"NIE12-101\"");
        let back: EstimandId = serde_json::from_str(&s).unwrap();
        assert_eq!(back, EstimandId::Nie12 { x: 1, x1: 0, x2: 1 });
    }
}
