//! Observed-data law `p(Y, M1, M2 | X)` of a two-arm trial.
//!
//! Cells are stored flat, at index `8x + 4y + 2m1 + m2`. The same index is
//! the constraint-row index used by the LP oracle.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-arm normalization tolerance for user-supplied probabilities.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Number of observable `(y, m1, m2, x)` cells.
pub const NUM_CELLS: usize = 16;

#[inline]
pub const fn cell_index(y: u8, m1: u8, m2: u8, x: u8) -> usize {
    ((x as usize) << 3) | ((y as usize) << 2) | ((m1 as usize) << 1) | (m2 as usize)
}

/// Inverse of [`cell_index`], returned as `(y, m1, m2, x)`.
#[inline]
pub const fn cell_bits(index: usize) -> (u8, u8, u8, u8) {
    (
        ((index >> 2) & 1) as u8,
        ((index >> 1) & 1) as u8,
        (index & 1) as u8,
        ((index >> 3) & 1) as u8,
    )
}

/// The sixteen estimable probabilities `p_{y m1 m2 . x}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservedDistribution {
    cells: [f64; NUM_CELLS],
}

impl ObservedDistribution {
    /// Builds and validates a distribution from a `p[y][m1][m2][x]` array.
    pub fn new(p: [[[[f64; 2]; 2]; 2]; 2]) -> Result<Self> {
        let mut cells = [0.0; NUM_CELLS];
        for (i, cell) in cells.iter_mut().enumerate() {
            let (y, m1, m2, x) = cell_bits(i);
            *cell = p[y as usize][m1 as usize][m2 as usize][x as usize];
        }
        Self::from_cells(cells)
    }

    /// Builds and validates a distribution from cells in `cell_index` order.
    pub fn from_cells(cells: [f64; NUM_CELLS]) -> Result<Self> {
        validate(Self { cells })
    }

    /// Skips validation. Only for values that are normalized by construction.
    pub(crate) fn from_cells_unchecked(cells: [f64; NUM_CELLS]) -> Self {
        Self { cells }
    }

    /// Plug-in estimate from per-cell counts (indexed by `cell_index`).
    pub fn from_counts(counts: &[u64; NUM_CELLS]) -> Result<Self> {
        let mut n = [0u64; 2];
        for (i, &c) in counts.iter().enumerate() {
            n[i >> 3] += c;
        }
        for (arm, &n_arm) in n.iter().enumerate() {
            if n_arm == 0 {
                return Err(Error::EmptyArm { arm: arm as u8 });
            }
        }
        let mut cells = [0.0; NUM_CELLS];
        for (i, cell) in cells.iter_mut().enumerate() {
            *cell = counts[i] as f64 / n[i >> 3] as f64;
        }
        Ok(Self { cells })
    }

    pub fn uniform() -> Self {
        Self {
            cells: [0.125; NUM_CELLS],
        }
    }

    #[inline]
    pub fn p(&self, y: u8, m1: u8, m2: u8, x: u8) -> f64 {
        self.cells[cell_index(y, m1, m2, x)]
    }

    #[inline]
    pub fn cells(&self) -> &[f64; NUM_CELLS] {
        &self.cells
    }

    /// `p(Y = 1 | X = x)`.
    pub fn outcome_rate(&self, x: u8) -> f64 {
        (0..4).map(|m| self.p(1, m >> 1, m & 1, x)).sum()
    }

    /// `p((M1, M2) = (m1, m2) | X = x)`.
    pub fn mediator_rate(&self, m1: u8, m2: u8, x: u8) -> f64 {
        self.p(0, m1, m2, x) + self.p(1, m1, m2, x)
    }

    pub fn read_json<R: Read>(reader: R) -> Result<Self> {
        let file: ProbabilityFile = serde_json::from_reader(reader)?;
        file.into_distribution()
    }

    pub fn from_json_path(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_json(std::io::BufReader::new(f))
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, &ProbabilityFile::from(self))?;
        Ok(())
    }
}

/// Checks cell ranges and per-arm normalization.
pub fn validate(dist: ObservedDistribution) -> Result<ObservedDistribution> {
    for (i, &value) in dist.cells.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            let (y, m1, m2, x) = cell_bits(i);
            return Err(Error::NegativeProbability {
                y,
                m1,
                m2,
                x,
                value,
            });
        }
    }
    for arm in 0..2u8 {
        let sum: f64 = dist.cells[(arm as usize) * 8..(arm as usize + 1) * 8]
            .iter()
            .sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::ArmNotNormalized { arm, sum });
        }
    }
    Ok(dist)
}

/// Identified total effect `p(Y=1|X=1) - p(Y=1|X=0)`.
pub fn total_effect(dist: &ObservedDistribution) -> f64 {
    dist.outcome_rate(1) - dist.outcome_rate(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Record {
    pub x: u8,
    pub m1: u8,
    pub m2: u8,
    pub y: u8,
}

impl Record {
    pub fn new(x: u8, m1: u8, m2: u8, y: u8) -> Self {
        Self { x, m1, m2, y }
    }

    #[inline]
    pub fn cell(&self) -> usize {
        cell_index(self.y, self.m1, self.m2, self.x)
    }
}

/// Subject-level trial data, one row per subject.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RecordTable {
    rows: Vec<Record>,
}

impl RecordTable {
    pub fn new(rows: Vec<Record>) -> Result<Self> {
        for (i, r) in rows.iter().enumerate() {
            if r.x > 1 || r.m1 > 1 || r.m2 > 1 || r.y > 1 {
                return Err(Error::MalformedInput(format!(
                    "row {}: values must be 0 or 1, got x={} m1={} m2={} y={}",
                    i + 1,
                    r.x,
                    r.m1,
                    r.m2,
                    r.y
                )));
            }
        }
        Ok(Self { rows })
    }

    /// Expands per-cell counts into rows, ordered by cell index.
    pub fn from_counts(counts: &[u64; NUM_CELLS]) -> Self {
        let rows = counts
            .iter()
            .enumerate()
            .flat_map(|(i, &c)| {
                let (y, m1, m2, x) = cell_bits(i);
                std::iter::repeat_n(Record::new(x, m1, m2, y), c as usize)
            })
            .collect();
        Self { rows }
    }

    pub fn rows(&self) -> &[Record] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn arm_sizes(&self) -> [usize; 2] {
        let mut n = [0; 2];
        for r in &self.rows {
            n[r.x as usize] += 1;
        }
        n
    }

    pub fn counts(&self) -> [u64; NUM_CELLS] {
        let mut counts = [0u64; NUM_CELLS];
        for r in &self.rows {
            counts[r.cell()] += 1;
        }
        counts
    }

    /// Rows of arm `x`, in table order.
    pub fn arm(&self, x: u8) -> impl Iterator<Item = &Record> {
        self.rows.iter().filter(move |r| r.x == x)
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        for col in ["x", "m1", "m2", "y"] {
            if !headers.iter().any(|h| h == col) {
                return Err(Error::MalformedInput(format!(
                    "record CSV is missing column `{col}`"
                )));
            }
        }
        let rows = rdr
            .deserialize::<Record>()
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::new(rows)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(f))
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        for r in &self.rows {
            wtr.serialize(r)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Maximum-likelihood cell proportions, no smoothing.
pub fn estimate_distribution(records: &RecordTable) -> Result<ObservedDistribution> {
    ObservedDistribution::from_counts(&records.counts())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbabilityEntry {
    pub x: u8,
    pub m1: u8,
    pub m2: u8,
    pub y: u8,
    pub p: f64,
}

/// On-disk probability JSON: `{"probs": [{"x":0,"m1":0,"m2":0,"y":0,"p":0.125}, ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbabilityFile {
    pub probs: Vec<ProbabilityEntry>,
}

impl ProbabilityFile {
    pub fn into_distribution(self) -> Result<ObservedDistribution> {
        if self.probs.len() != NUM_CELLS {
            return Err(Error::MalformedInput(format!(
                "expected {NUM_CELLS} probability entries, found {}",
                self.probs.len()
            )));
        }
        let mut cells = [0.0; NUM_CELLS];
        let mut seen = [false; NUM_CELLS];
        for e in &self.probs {
            if e.x > 1 || e.m1 > 1 || e.m2 > 1 || e.y > 1 {
                return Err(Error::MalformedInput(format!(
                    "cell (x={}, m1={}, m2={}, y={}) is not binary",
                    e.x, e.m1, e.m2, e.y
                )));
            }
            let i = cell_index(e.y, e.m1, e.m2, e.x);
            if seen[i] {
                return Err(Error::MalformedInput(format!(
                    "duplicate cell (x={}, m1={}, m2={}, y={})",
                    e.x, e.m1, e.m2, e.y
                )));
            }
            seen[i] = true;
            cells[i] = e.p;
        }
        ObservedDistribution::from_cells(cells)
    }
}

impl From<&ObservedDistribution> for ProbabilityFile {
    fn from(d: &ObservedDistribution) -> Self {
        let mut probs = Vec::with_capacity(NUM_CELLS);
        for x in 0..2 {
            for m1 in 0..2 {
                for m2 in 0..2 {
                    for y in 0..2 {
                        probs.push(ProbabilityEntry {
                            x,
                            m1,
                            m2,
                            y,
                            p: d.p(y, m1, m2, x),
                        });
                    }
                }
            }
        }
        Self { probs }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point_mass_both_arms() -> [[[[f64; 2]; 2]; 2]; 2] {
        let mut p = [[[[0.0; 2]; 2]; 2]; 2];
        p[0][0][0][0] = 1.0;
        p[0][0][0][1] = 1.0;
        p
    }

    #[test]
    fn validate_accepts_uniform_and_point_masses() {
        assert!(ObservedDistribution::new([[[[0.125; 2]; 2]; 2]; 2]).is_ok());
        assert!(ObservedDistribution::new(point_mass_both_arms()).is_ok());
    }

    #[test]
    fn validate_rejects_unnormalized_arm() {
        let mut p = [[[[0.125; 2]; 2]; 2]; 2];
        p[1][1][1][1] = 0.25;
        match ObservedDistribution::new(p) {
            Err(Error::ArmNotNormalized { arm, sum }) => {
                assert_eq!(arm, 1);
                assert!((sum - 1.125).abs() < 1e-15);
            }
            other => panic!("expected ArmNotNormalized, got {other:?}"),
        }
    }

    #[test]
    fn validate_rejects_out_of_range_cells() {
        let mut p = point_mass_both_arms();
        p[0][0][0][0] = 1.5;
        p[1][0][0][0] = -0.5;
        let err = ObservedDistribution::new(p).unwrap_err();
        assert_eq!(err.name(), "NegativeProbability");
    }

    #[test]
    fn cell_index_round_trips() {
        for i in 0..NUM_CELLS {
            let (y, m1, m2, x) = cell_bits(i);
            assert_eq!(cell_index(y, m1, m2, x), i);
        }
    }

    #[test]
    fn estimate_from_balanced_rows_is_uniform() {
        let mut rows = Vec::new();
        for x in 0..2 {
            for c in 0..8u8 {
                rows.push(Record::new(x, (c >> 1) & 1, c & 1, c >> 2));
            }
        }
        let table = RecordTable::new(rows).unwrap();
        let dist = estimate_distribution(&table).unwrap();
        assert_eq!(dist, ObservedDistribution::uniform());
        assert_eq!(total_effect(&dist), 0.0);
    }

    #[test]
    fn estimate_uses_per_arm_denominators() {
        let mut counts = [0u64; NUM_CELLS];
        counts[cell_index(1, 0, 0, 1)] = 210;
        counts[cell_index(0, 0, 0, 1)] = 390;
        counts[cell_index(1, 1, 1, 0)] = 87;
        counts[cell_index(0, 1, 1, 0)] = 212;
        let table = RecordTable::from_counts(&counts);
        assert_eq!(table.arm_sizes(), [299, 600]);
        let dist = estimate_distribution(&table).unwrap();
        assert_eq!(dist.p(1, 0, 0, 1), 210.0 / 600.0);
        assert_eq!(dist.p(1, 1, 1, 0), 87.0 / 299.0);
        assert!(validate(dist).is_ok());
    }

    #[test]
    fn estimate_rejects_empty_arm() {
        let table = RecordTable::new(vec![Record::new(1, 0, 0, 1), Record::new(1, 1, 0, 0)]).unwrap();
        match estimate_distribution(&table) {
            Err(Error::EmptyArm { arm: 0 }) => {}
            other => panic!("expected EmptyArm, got {other:?}"),
        }
    }

    #[test]
    fn total_effect_of_deterministic_arms() {
        let mut p = [[[[0.0; 2]; 2]; 2]; 2];
        p[0][0][0][0] = 1.0;
        p[1][1][1][1] = 1.0;
        let d = ObservedDistribution::new(p).unwrap();
        assert_eq!(total_effect(&d), 1.0);
    }

    #[test]
    fn csv_parsing_respects_header_order_and_rejects_non_binary() {
        let csv = "y,x,m2,m1\n1,1,0,1\n0,0,1,0\n";
        let t = RecordTable::read_csv(csv.as_bytes()).unwrap();
        assert_eq!(t.rows()[0], Record::new(1, 1, 0, 1));
        assert_eq!(t.rows()[1], Record::new(0, 0, 1, 0));

        let bad = "x,m1,m2,y\n1,2,0,0\n";
        assert_eq!(RecordTable::read_csv(bad.as_bytes()).unwrap_err().name(), "MalformedInput");
        let missing = "x,m1,y\n1,0,0\n";
        assert_eq!(RecordTable::read_csv(missing.as_bytes()).unwrap_err().name(), "MalformedInput");
    }

    #[test]
    fn probability_json_requires_sixteen_distinct_cells() {
        let mut buf = Vec::new();
        ObservedDistribution::uniform().write_json(&mut buf).unwrap();
        let back = ObservedDistribution::read_json(buf.as_slice()).unwrap();
        assert_eq!(back, ObservedDistribution::uniform());

        let mut file = ProbabilityFile::from(&ObservedDistribution::uniform());
        file.probs[3] = file.probs[2].clone();
        assert_eq!(file.into_distribution().unwrap_err().name(), "MalformedInput");

        let mut file = ProbabilityFile::from(&ObservedDistribution::uniform());
        file.probs.pop();
        assert_eq!(file.into_distribution().unwrap_err().name(), "MalformedInput");
    }
}
