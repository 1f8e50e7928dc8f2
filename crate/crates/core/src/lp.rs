//! Sharp bounds for any catalog estimand by linear programming over the
//! counterfactual distribution.
//!
//! Variables are the 16,384 response-type masses `q_t >= 0`; the 16 equality
//! rows fix the observed cell probabilities (each type contributes to one cell
//! per arm, so every column has exactly two ones). The per-arm row sums make
//! one row redundant, which phase one detects.
//!
//! Before solving, columns with identical `(arm-0 cell, arm-1 cell, objective)`
//! are merged: they are interchangeable in the LP, so the optimum is
//! unchanged and the solver works on at most 192 distinct columns. Rows whose
//! cell probability is exactly zero are dropped together with every column
//! that touches them, since those masses are forced to zero.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::bounds::{BoundInterval, Method};
use crate::canonical::{natural_cells, NUM_TYPES};
use crate::error::{Error, Result};
use crate::estimand::{objective_vector, EstimandId, NUM_ESTIMANDS};
use crate::observed::{cell_bits, validate, ObservedDistribution, NUM_CELLS};
use crate::simplex::{self, Scalar, SimplexOptions, StandardForm};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy)]
pub struct LpOptions {
    pub simplex: SimplexOptions,
    /// Merge duplicate columns before solving.
    pub merge_columns: bool,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self {
            simplex: SimplexOptions::default(),
            merge_columns: true,
        }
    }
}

/// `opt c.q  s.t.  A q = b, q >= 0` for one estimand and one observed law.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    estimand: EstimandId,
    objective: &'static [i8],
    rhs: [f64; NUM_CELLS],
}

/// Basis and optimum of one solve, in response-type indices.
#[derive(Debug, Clone, Serialize)]
pub struct LpSolution {
    pub value: f64,
    /// Response types in the final basis (merged columns are represented by
    /// their lowest type index).
    pub basis: Vec<usize>,
    pub basic_values: Vec<f64>,
    pub pivots: usize,
    pub redundant_rows: usize,
}

impl LinearProgram {
    pub fn new(dist: &ObservedDistribution, estimand: EstimandId) -> Self {
        Self {
            estimand,
            objective: objective_vector(estimand),
            rhs: *dist.cells(),
        }
    }

    pub fn estimand(&self) -> EstimandId {
        self.estimand
    }

    pub fn objective(&self) -> &[i8] {
        self.objective
    }

    pub fn rhs(&self) -> &[f64; NUM_CELLS] {
        &self.rhs
    }

    /// Constraint rows hit by type `t` (one per arm).
    pub fn column_rows(&self, t: usize) -> [usize; 2] {
        let c = natural_cells()[t];
        [c[0] as usize, c[1] as usize]
    }

    /// Dense 16 x 16,384 incidence matrix.
    pub fn constraint_matrix(&self) -> Vec<Vec<u8>> {
        let mut a = vec![vec![0u8; NUM_TYPES]; NUM_CELLS];
        for t in 0..NUM_TYPES {
            for r in self.column_rows(t) {
                a[r][t] = 1;
            }
        }
        a
    }

    pub fn solve(&self, sense: Sense, opts: &LpOptions) -> Result<LpSolution> {
        let rhs: Vec<f64> = self.rhs.to_vec();
        let (form, reps) = self.standard_form(sense, rhs, opts.merge_columns, |c| c as f64);
        let sol = simplex::solve(&form, opts.simplex)?;
        let value = match sense {
            Sense::Minimize => sol.objective,
            Sense::Maximize => -sol.objective,
        };
        Ok(LpSolution {
            value,
            basis: sol.basis.iter().flatten().map(|&j| reps[j]).collect(),
            basic_values: sol
                .basis
                .iter()
                .zip(&sol.basic_values)
                .filter(|(b, _)| b.is_some())
                .map(|(_, v)| *v)
                .collect(),
            pivots: sol.pivots,
            redundant_rows: sol.redundant_rows,
        })
    }

    /// Exact solve against rational right-hand side `b`.
    pub fn solve_exact(&self, b: &ExactObserved, sense: Sense, opts: &LpOptions) -> Result<BigRational> {
        let (form, _) = self.standard_form(sense, b.cells.to_vec(), opts.merge_columns, |c| {
            BigRational::from_integer(BigInt::from(c))
        });
        let sol = simplex::solve(&form, opts.simplex)?;
        Ok(match sense {
            Sense::Minimize => sol.objective,
            Sense::Maximize => -sol.objective,
        })
    }

    /// Builds the minimization form; returns it with the representative type
    /// index of each column.
    fn standard_form<T: Scalar>(
        &self,
        sense: Sense,
        rhs: Vec<T>,
        merge: bool,
        scalar: impl Fn(i64) -> T,
    ) -> (StandardForm<T>, Vec<usize>) {
        let sign = match sense {
            Sense::Minimize => 1,
            Sense::Maximize => -1,
        };
        // A row with zero right-hand side forces every column in it to zero.
        let mut row_map = [usize::MAX; NUM_CELLS];
        let mut kept_rhs = Vec::with_capacity(NUM_CELLS);
        for (r, b) in rhs.into_iter().enumerate() {
            if b.gt_tol(0.0) || b.lt_tol(0.0) {
                row_map[r] = kept_rhs.len();
                kept_rhs.push(b);
            }
        }
        let live = |t: &usize| self.column_rows(*t).iter().all(|&r| row_map[r] != usize::MAX);
        let reps: Vec<usize> = if merge {
            merged_representatives(self.estimand).iter().copied().filter(live).collect()
        } else {
            (0..NUM_TYPES).filter(live).collect()
        };
        let columns = reps
            .iter()
            .map(|&t| {
                let [r0, r1] = self.column_rows(t);
                vec![(row_map[r0], scalar(1)), (row_map[r1], scalar(1))]
            })
            .collect();
        let cost = reps
            .iter()
            .map(|&t| scalar(sign * self.objective[t] as i64))
            .collect();
        (
            StandardForm {
                num_rows: kept_rhs.len(),
                columns,
                cost,
                rhs: kept_rhs,
            },
            reps,
        )
    }
}

/// Lowest type index of each group of interchangeable columns, ascending.
/// Depends only on the estimand, so it is computed once per estimand.
fn merged_representatives(e: EstimandId) -> &'static [usize] {
    static CACHE: [OnceLock<Box<[usize]>>; NUM_ESTIMANDS] = [const { OnceLock::new() }; NUM_ESTIMANDS];
    CACHE[e.dense_index()].get_or_init(|| {
        let objective = objective_vector(e);
        let cells = natural_cells();
        let mut groups: BTreeMap<(u8, u8, i8), usize> = BTreeMap::new();
        for t in 0..NUM_TYPES {
            groups.entry((cells[t][0], cells[t][1], objective[t])).or_insert(t);
        }
        let mut reps: Vec<usize> = groups.into_values().collect();
        reps.sort_unstable();
        reps.into_boxed_slice()
    })
}

/// Sharp bounds `[min c.q, max c.q]` over all `q` consistent with `dist`.
pub fn sharp_bounds_lp(dist: &ObservedDistribution, e: EstimandId) -> Result<BoundInterval> {
    sharp_bounds_lp_with(dist, e, &LpOptions::default())
}

pub fn sharp_bounds_lp_with(
    dist: &ObservedDistribution,
    e: EstimandId,
    opts: &LpOptions,
) -> Result<BoundInterval> {
    let dist = validate(*dist)?;
    let lp = LinearProgram::new(&dist, e);
    let lower = lp.solve(Sense::Minimize, opts)?.value;
    let upper = lp.solve(Sense::Maximize, opts)?.value;
    Ok(BoundInterval::new(lower, upper.max(lower), Method::Lp))
}

/// Observed cell probabilities as exact rationals.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactObserved {
    cells: [BigRational; NUM_CELLS],
}

impl ExactObserved {
    /// Exact cell proportions from counts.
    pub fn from_counts(counts: &[u64; NUM_CELLS]) -> Result<Self> {
        let mut n = [0u64; 2];
        for (i, c) in counts.iter().enumerate() {
            n[i >> 3] += c;
        }
        if let Some(arm) = n.iter().position(|&v| v == 0) {
            return Err(Error::EmptyArm { arm: arm as u8 });
        }
        let cells = std::array::from_fn(|i| {
            BigRational::new(BigInt::from(counts[i]), BigInt::from(n[i >> 3]))
        });
        Ok(Self { cells })
    }

    /// Parses decimal strings (e.g. `"0.125"`, `"1e-3"`, `"3/8"`) in
    /// `cell_index` order. Each arm must sum to exactly one.
    pub fn from_decimal_strs(cells: &[&str; NUM_CELLS]) -> Result<Self> {
        let mut parsed: Vec<BigRational> = Vec::with_capacity(NUM_CELLS);
        for s in cells {
            parsed.push(parse_decimal(s)?);
        }
        let out = Self {
            cells: parsed.try_into().expect("sixteen cells"),
        };
        out.check()?;
        Ok(out)
    }

    /// Converts each cell through its shortest round-trip decimal string,
    /// then rescales each arm so it sums to exactly one.
    pub fn from_distribution(dist: &ObservedDistribution) -> Result<Self> {
        let mut cells: [BigRational; NUM_CELLS] = std::array::from_fn(|_| <BigRational as Zero>::zero());
        for (i, p) in dist.cells().iter().enumerate() {
            cells[i] = parse_decimal(&format!("{p}"))?;
        }
        for arm in 0..2 {
            let sum: BigRational = cells[arm * 8..arm * 8 + 8].iter().cloned().sum();
            if sum.is_zero() {
                return Err(Error::ArmNotNormalized { arm: arm as u8, sum: 0.0 });
            }
            for c in &mut cells[arm * 8..arm * 8 + 8] {
                *c = &*c / &sum;
            }
        }
        let out = Self { cells };
        out.check()?;
        Ok(out)
    }

    fn check(&self) -> Result<()> {
        for (i, c) in self.cells.iter().enumerate() {
            if c.is_negative() || *c > <BigRational as One>::one() {
                let (y, m1, m2, x) = cell_bits(i);
                return Err(Error::NegativeProbability {
                    y,
                    m1,
                    m2,
                    x,
                    value: Scalar::to_f64(c),
                });
            }
        }
        for arm in 0..2u8 {
            let lo = arm as usize * 8;
            let sum: BigRational = self.cells[lo..lo + 8].iter().cloned().sum();
            if !sum.is_one() {
                return Err(Error::ArmNotNormalized {
                    arm,
                    sum: Scalar::to_f64(&sum),
                });
            }
        }
        Ok(())
    }

    pub fn cells(&self) -> &[BigRational; NUM_CELLS] {
        &self.cells
    }

    pub fn to_f64(&self) -> ObservedDistribution {
        ObservedDistribution::from_cells_unchecked(std::array::from_fn(|i| {
            Scalar::to_f64(&self.cells[i])
        }))
    }
}

/// Exact interval from the rational LP.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactInterval {
    pub lower: BigRational,
    pub upper: BigRational,
}

impl ExactInterval {
    pub fn to_bound(&self) -> BoundInterval {
        BoundInterval::new(
            Scalar::to_f64(&self.lower),
            Scalar::to_f64(&self.upper),
            Method::Lp,
        )
    }
}

pub fn sharp_bounds_lp_exact(dist: &ExactObserved, e: EstimandId) -> Result<ExactInterval> {
    let opts = LpOptions::default();
    let lp = LinearProgram::new(&dist.to_f64(), e);
    Ok(ExactInterval {
        lower: lp.solve_exact(dist, Sense::Minimize, &opts)?,
        upper: lp.solve_exact(dist, Sense::Maximize, &opts)?,
    })
}

/// Parses a decimal literal or `p/q` fraction into an exact rational.
pub fn parse_decimal(s: &str) -> Result<BigRational> {
    let bad = || Error::MalformedInput(format!("not a decimal number: `{s}`"));
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(k) => (&s[..k], s[k + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(digits.parse::<BigInt>().map_err(|_| bad())?);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    let factor = num_traits::pow(ten, scale.unsigned_abs() as usize);
    if scale >= 0 {
        value *= factor;
    } else {
        value /= factor;
    }
    Ok(if negative { -value } else { value })
}
