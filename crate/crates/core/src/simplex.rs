//! Two-phase revised primal simplex for small row counts.
//!
//! Solves `min c.x  s.t.  A x = b, x >= 0` with a dense explicit basis
//! inverse, which is adequate when the number of rows is tiny and the number
//! of columns is large. Entering and leaving variables follow Bland's rule,
//! so the method terminates on degenerate problems. Phase one starts from an
//! all-artificial basis; artificials that cannot be pivoted out afterwards
//! mark linearly dependent rows and stay basic at level zero.
//!
//! The arithmetic is generic over [`Scalar`], implemented for `f64` (with
//! tolerances) and for `BigRational` (exact, tolerances ignored).

use std::cmp::Ordering;
use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub trait Scalar: Clone + Debug + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    /// `self > tol`.
    fn gt_tol(&self, tol: f64) -> bool;
    /// `self < -tol`.
    fn lt_tol(&self, tol: f64) -> bool;
    /// Ordering where values within `tol` compare equal.
    fn cmp_tol(&self, o: &Self, tol: f64) -> Ordering;
    fn to_f64(&self) -> f64;
    /// True for floating-point scalars that need periodic refactorization.
    const INEXACT: bool;
}

impl Scalar for f64 {
    const INEXACT: bool = true;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn gt_tol(&self, tol: f64) -> bool {
        *self > tol
    }
    fn lt_tol(&self, tol: f64) -> bool {
        *self < -tol
    }
    fn cmp_tol(&self, o: &Self, tol: f64) -> Ordering {
        if (self - o).abs() <= tol {
            Ordering::Equal
        } else if self < o {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for BigRational {
    const INEXACT: bool = false;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        num_traits::One::one()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn gt_tol(&self, _tol: f64) -> bool {
        self.is_positive()
    }
    fn lt_tol(&self, _tol: f64) -> bool {
        self.is_negative()
    }
    fn cmp_tol(&self, o: &Self, _tol: f64) -> Ordering {
        self.cmp(o)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    /// Phase-one residual above which the problem is declared infeasible.
    pub feasibility_tol: f64,
    /// Reduced costs below `-optimality_tol` are improving.
    pub optimality_tol: f64,
    /// Smallest admissible pivot magnitude.
    pub pivot_tol: f64,
    pub max_pivots: usize,
    /// Rebuild the basis inverse from scratch every this many pivots (f64 only).
    pub refactor_every: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-9,
            optimality_tol: 1e-10,
            pivot_tol: 1e-9,
            max_pivots: 1_000_000,
            refactor_every: 32,
        }
    }
}

/// Sparse column: `(row, value)` pairs.
pub type Column<T> = Vec<(usize, T)>;

#[derive(Debug, Clone)]
pub struct StandardForm<T> {
    pub num_rows: usize,
    pub columns: Vec<Column<T>>,
    pub cost: Vec<T>,
    pub rhs: Vec<T>,
}

#[derive(Debug, Clone)]
pub struct SimplexSolution<T> {
    pub objective: T,
    /// Column index per basis row; `None` marks a retained artificial
    /// (a redundant row).
    pub basis: Vec<Option<usize>>,
    /// Values of the basic variables, aligned with `basis`.
    pub basic_values: Vec<T>,
    pub pivots: usize,
    pub redundant_rows: usize,
}

impl<T: Scalar> SimplexSolution<T> {
    /// Dense primal solution over the structural columns.
    pub fn primal(&self, num_columns: usize) -> Vec<T> {
        let mut x = vec![T::zero(); num_columns];
        for (b, v) in self.basis.iter().zip(&self.basic_values) {
            if let Some(j) = b {
                x[*j] = v.clone();
            }
        }
        x
    }
}

struct Tableau<'a, T> {
    lp: &'a StandardForm<T>,
    /// Row sign flips that make the right-hand side nonnegative.
    row_sign: Vec<T>,
    rhs: Vec<T>,
    /// Basic variable per row; indices `>= n` are artificials.
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    /// Row-major `m x m`.
    binv: Vec<T>,
    xb: Vec<T>,
    pivots: usize,
    since_refactor: usize,
    opts: SimplexOptions,
}

impl<'a, T: Scalar> Tableau<'a, T> {
    fn new(lp: &'a StandardForm<T>, opts: SimplexOptions) -> Self {
        let m = lp.num_rows;
        let n = lp.columns.len();
        let mut row_sign = vec![T::one(); m];
        let mut rhs = lp.rhs.clone();
        for i in 0..m {
            if rhs[i].lt_tol(0.0) {
                row_sign[i] = T::one().neg();
                rhs[i] = rhs[i].neg();
            }
        }
        let mut binv = vec![T::zero(); m * m];
        for i in 0..m {
            binv[i * m + i] = T::one();
        }
        let mut is_basic = vec![false; n + m];
        for flag in &mut is_basic[n..] {
            *flag = true;
        }
        Self {
            lp,
            row_sign,
            xb: rhs.clone(),
            rhs,
            basis: (n..n + m).collect(),
            is_basic,
            binv,
            pivots: 0,
            since_refactor: 0,
            opts,
        }
    }

    fn m(&self) -> usize {
        self.lp.num_rows
    }

    fn n(&self) -> usize {
        self.lp.columns.len()
    }

    /// Column `j` of the sign-adjusted constraint matrix, artificials included.
    fn column(&self, j: usize) -> Column<T> {
        if j >= self.n() {
            vec![(j - self.n(), T::one())]
        } else {
            self.lp.columns[j]
                .iter()
                .map(|(i, a)| (*i, a.mul(&self.row_sign[*i])))
                .collect()
        }
    }

    /// `B^-1 a_j`.
    fn ftran(&self, j: usize) -> Vec<T> {
        let m = self.m();
        let col = self.column(j);
        (0..m)
            .map(|r| {
                col.iter().fold(T::zero(), |acc, (i, a)| {
                    acc.add(&self.binv[r * m + i].mul(a))
                })
            })
            .collect()
    }

    /// Simplex multipliers `c_B^T B^-1`.
    fn duals(&self, cost: &dyn Fn(usize) -> T) -> Vec<T> {
        let m = self.m();
        let cb: Vec<T> = self.basis.iter().map(|&j| cost(j)).collect();
        (0..m)
            .map(|k| {
                (0..m).fold(T::zero(), |acc, i| acc.add(&cb[i].mul(&self.binv[i * m + k])))
            })
            .collect()
    }

    fn pivot(&mut self, row: usize, entering: usize, alpha: &[T]) {
        let m = self.m();
        let piv = alpha[row].clone();
        for k in 0..m {
            self.binv[row * m + k] = self.binv[row * m + k].div(&piv);
        }
        self.xb[row] = self.xb[row].div(&piv);
        for i in 0..m {
            if i == row {
                continue;
            }
            let f = alpha[i].clone();
            if !f.gt_tol(0.0) && !f.lt_tol(0.0) {
                continue;
            }
            for k in 0..m {
                let delta = f.mul(&self.binv[row * m + k]);
                self.binv[i * m + k] = self.binv[i * m + k].sub(&delta);
            }
            let delta = f.mul(&self.xb[row]);
            self.xb[i] = self.xb[i].sub(&delta);
        }
        self.is_basic[self.basis[row]] = false;
        self.is_basic[entering] = true;
        self.basis[row] = entering;
        self.pivots += 1;
        self.since_refactor += 1;
        if T::INEXACT && self.since_refactor >= self.opts.refactor_every {
            self.refactor();
        }
    }

    /// Rebuilds `B^-1` and `x_B` by Gauss-Jordan elimination on the basis.
    fn refactor(&mut self) {
        let m = self.m();
        let mut mat = vec![T::zero(); m * 2 * m];
        for (c, &j) in self.basis.iter().enumerate() {
            for (i, a) in self.column(j) {
                mat[i * 2 * m + c] = a;
            }
        }
        for i in 0..m {
            mat[i * 2 * m + m + i] = T::one();
        }
        for col in 0..m {
            let mut best = col;
            let mut best_mag = mat[col * 2 * m + col].to_f64().abs();
            for r in col + 1..m {
                let mag = mat[r * 2 * m + col].to_f64().abs();
                if mag > best_mag {
                    best = r;
                    best_mag = mag;
                }
            }
            if best_mag == 0.0 {
                // Singular basis: keep the incrementally updated inverse.
                return;
            }
            if best != col {
                for k in 0..2 * m {
                    mat.swap(col * 2 * m + k, best * 2 * m + k);
                }
            }
            let piv = mat[col * 2 * m + col].clone();
            for k in 0..2 * m {
                mat[col * 2 * m + k] = mat[col * 2 * m + k].div(&piv);
            }
            for r in 0..m {
                if r == col {
                    continue;
                }
                let f = mat[r * 2 * m + col].clone();
                if f.to_f64() == 0.0 {
                    continue;
                }
                for k in 0..2 * m {
                    let delta = f.mul(&mat[col * 2 * m + k]);
                    mat[r * 2 * m + k] = mat[r * 2 * m + k].sub(&delta);
                }
            }
        }
        for i in 0..m {
            for k in 0..m {
                self.binv[i * m + k] = mat[i * 2 * m + m + k].clone();
            }
        }
        for i in 0..m {
            let v = (0..m).fold(T::zero(), |acc, k| {
                acc.add(&self.binv[i * m + k].mul(&self.rhs[k]))
            });
            // Clear round-off below zero.
            self.xb[i] = if v.lt_tol(0.0) && !v.lt_tol(self.opts.feasibility_tol) {
                T::zero()
            } else {
                v
            };
        }
        self.since_refactor = 0;
    }

    /// Runs simplex iterations with Bland's rule until optimal.
    fn optimize(&mut self, cost: &dyn Fn(usize) -> T, may_enter: &dyn Fn(usize) -> bool) -> Result<()> {
        let n = self.n();
        loop {
            if self.pivots >= self.opts.max_pivots {
                return Err(Error::NumericalFailure(format!(
                    "pivot limit {} exceeded",
                    self.opts.max_pivots
                )));
            }
            let y = self.duals(cost);
            let entering = (0..n + self.m()).find(|&j| {
                if self.is_basic[j] || !may_enter(j) {
                    return false;
                }
                let d = self
                    .column(j)
                    .iter()
                    .fold(cost(j), |acc, (i, a)| acc.sub(&y[*i].mul(a)));
                d.lt_tol(self.opts.optimality_tol)
            });
            let Some(entering) = entering else {
                return Ok(());
            };
            let alpha = self.ftran(entering);
            let mut leave: Option<(usize, T)> = None;
            for (r, a) in alpha.iter().enumerate() {
                if !a.gt_tol(self.opts.pivot_tol) {
                    continue;
                }
                let ratio = self.xb[r].div(a);
                let better = match &leave {
                    None => true,
                    Some((best_r, best)) => match ratio.cmp_tol(best, 1e-12) {
                        Ordering::Less => true,
                        Ordering::Equal => self.basis[r] < self.basis[*best_r],
                        Ordering::Greater => false,
                    },
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            let Some((row, _)) = leave else {
                return Err(Error::NumericalFailure("objective is unbounded".into()));
            };
            self.pivot(row, entering, &alpha);
        }
    }

    fn objective(&self, cost: &dyn Fn(usize) -> T) -> T {
        self.basis
            .iter()
            .zip(&self.xb)
            .fold(T::zero(), |acc, (&j, v)| acc.add(&cost(j).mul(v)))
    }
}

/// Minimizes `cost . x` over `{x >= 0 : A x = rhs}`.
pub fn solve<T: Scalar>(lp: &StandardForm<T>, opts: SimplexOptions) -> Result<SimplexSolution<T>> {
    let n = lp.columns.len();
    let m = lp.num_rows;
    if lp.cost.len() != n || lp.rhs.len() != m {
        return Err(Error::InvalidConfig("inconsistent LP dimensions".into()));
    }
    let mut tab = Tableau::new(lp, opts);

    let phase_one_cost = |j: usize| if j >= n { T::one() } else { T::zero() };
    tab.optimize(&phase_one_cost, &|j| j < n)?;
    let residual = tab.objective(&phase_one_cost);
    if residual.gt_tol(opts.feasibility_tol) {
        return Err(Error::Infeasible {
            residual: residual.to_f64(),
        });
    }

    // Drive remaining artificials out of the basis where some structural
    // column has a usable entry in their row.
    let mut redundant_rows = 0;
    for row in 0..m {
        if tab.basis[row] < n {
            continue;
        }
        let candidate = (0..n).filter(|&j| !tab.is_basic[j]).find_map(|j| {
            let alpha = tab.ftran(j);
            let a = &alpha[row];
            (a.gt_tol(opts.pivot_tol) || a.lt_tol(opts.pivot_tol)).then_some((j, alpha))
        });
        match candidate {
            Some((j, alpha)) => tab.pivot(row, j, &alpha),
            None => redundant_rows += 1,
        }
    }

    let phase_two_cost = |j: usize| if j >= n { T::zero() } else { lp.cost[j].clone() };
    tab.optimize(&phase_two_cost, &|j| j < n)?;
    if T::INEXACT {
        tab.refactor();
    }

    Ok(SimplexSolution {
        objective: tab.objective(&phase_two_cost),
        basis: tab.basis.iter().map(|&j| (j < n).then_some(j)).collect(),
        basic_values: tab.xb.clone(),
        pivots: tab.pivots,
        redundant_rows,
    })
}
