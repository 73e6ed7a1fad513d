//! Linear programs `min c·x  s.t.  A x = b, x ≥ 0`.
//!
//! Rationals are solved exactly by a dense two-phase tableau simplex. Pivoting
//! uses Dantzig's rule and falls back to Bland's rule after a run of degenerate
//! pivots, which rules out cycling. Floats go to `microlp`.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::exact::Rational;

pub trait LpNum:
    Clone
    + Debug
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    /// Treat as zero (exact zero for rationals).
    fn negligible(&self) -> bool;
    fn positive(&self) -> bool {
        !self.negligible() && *self > Self::zero()
    }
    fn negative(&self) -> bool {
        !self.negligible() && *self < Self::zero()
    }
    fn to_f64(&self) -> f64;
    /// Large enough to serve as a pivot element.
    fn pivotable(&self) -> bool {
        self.positive()
    }
    /// Primal feasibility slack allowed in the ratio test.
    fn ratio_slack() -> Self {
        Self::zero()
    }
    fn from_rational(value: &Rational) -> Self;
    /// Exact value (floats are dyadic rationals).
    fn to_rational(&self) -> Rational;
    /// Backend used by [`LinearProgram::solve`].
    fn solve_lp(lp: &LinearProgram<Self>) -> Result<LpOutcome<Self>, SolverFailure> {
        lp.solve_dense()
    }
}

pub const F64_EPS: f64 = 1e-11;
pub const F64_PIVOT_TOL: f64 = 1e-9;
pub const F64_RATIO_SLACK: f64 = 1e-10;

impl LpNum for f64 {
    fn negligible(&self) -> bool {
        self.abs() <= F64_EPS
    }
    fn pivotable(&self) -> bool {
        *self > F64_PIVOT_TOL
    }
    fn ratio_slack() -> Self {
        F64_RATIO_SLACK
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn from_rational(value: &Rational) -> Self {
        crate::exact::to_f64(value)
    }
    fn to_rational(&self) -> Rational {
        Rational::from_float(*self).unwrap_or_else(Rational::zero)
    }
    /// Revised simplex with LU refactorization; the dense tableau drifts on
    /// degenerate problems in floating point.
    fn solve_lp(lp: &LinearProgram<f64>) -> Result<LpOutcome<f64>, SolverFailure> {
        use microlp::{ComparisonOp, Error as LpError, OptimizationDirection, Problem};
        let mut problem = Problem::new(OptimizationDirection::Minimize);
        let vars: Vec<_> = lp
            .cost
            .iter()
            .map(|&c| problem.add_var(c, (0.0, f64::INFINITY)))
            .collect();
        for (row, &b) in lp.rows.iter().zip(&lp.rhs) {
            let terms: Vec<_> = row.iter().map(|&(c, a)| (vars[c], a)).collect();
            problem.add_constraint(terms.as_slice(), ComparisonOp::Eq, b);
        }
        match problem.solve() {
            Ok(outcome) => {
                let solution = outcome
                    .solution()
                    .ok_or_else(|| SolverFailure("LP solve was interrupted".into()))?;
                let x: Vec<f64> = vars.iter().map(|&v| solution.var_value_raw(v).max(0.0)).collect();
                Ok(LpOutcome::Optimal {
                    objective: solution.objective(),
                    x,
                })
            }
            Err(LpError::Infeasible) => Ok(LpOutcome::Infeasible {
                phase_one_objective: f64::NAN,
            }),
            Err(LpError::Unbounded) => Ok(LpOutcome::Unbounded),
            Err(e) => Err(SolverFailure(e.to_string())),
        }
    }
}

impl LpNum for Rational {
    fn negligible(&self) -> bool {
        self.is_zero()
    }
    fn positive(&self) -> bool {
        self.is_positive()
    }
    fn negative(&self) -> bool {
        self.is_negative()
    }
    fn to_f64(&self) -> f64 {
        crate::exact::to_f64(self)
    }
    fn from_rational(value: &Rational) -> Self {
        value.clone()
    }
    fn to_rational(&self) -> Rational {
        self.clone()
    }
}

#[derive(Clone, Debug)]
pub struct LinearProgram<T> {
    pub num_vars: usize,
    /// Sparse rows `(column, coefficient)`.
    pub rows: Vec<Vec<(usize, T)>>,
    pub rhs: Vec<T>,
    pub cost: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome<T> {
    Optimal { x: Vec<T>, objective: T },
    Infeasible { phase_one_objective: T },
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverFailure(pub String);

impl From<SolverFailure> for crate::error::Error {
    fn from(e: SolverFailure) -> Self {
        crate::error::Error::Solver(e.0)
    }
}

struct Tableau<T> {
    width: usize,
    cells: Vec<T>,
    basis: Vec<usize>,
    rows: usize,
}

impl<T: LpNum> Tableau<T> {
    fn at(&self, r: usize, c: usize) -> &T {
        &self.cells[r * self.width + c]
    }

    fn rhs(&self, r: usize) -> &T {
        self.at(r, self.width - 1)
    }

    fn pivot(&mut self, pr: usize, pc: usize, objective_rows: usize) {
        let w = self.width;
        let inv = T::one() / self.at(pr, pc).clone();
        for c in 0..w {
            let v = self.cells[pr * w + c].clone() * inv.clone();
            self.cells[pr * w + c] = v;
        }
        self.cells[pr * w + pc] = T::one();
        let pivot_row: Vec<T> = self.cells[pr * w..(pr + 1) * w].to_vec();
        for r in 0..self.rows + objective_rows {
            if r == pr {
                continue;
            }
            let f = self.cells[r * w + pc].clone();
            if f.is_zero() {
                continue;
            }
            for (c, pv) in pivot_row.iter().enumerate() {
                if pv.is_zero() {
                    continue;
                }
                let v = self.cells[r * w + c].clone() - f.clone() * pv.clone();
                self.cells[r * w + c] = if v.negligible() { T::zero() } else { v };
            }
            self.cells[r * w + pc] = T::zero();
        }
        self.basis[pr] = pc;
    }

    /// Minimizes the objective stored in row `obj` (reduced costs, rhs = -objective),
    /// over columns `0..active`.
    fn optimize(
        &mut self,
        obj: usize,
        active: usize,
        objective_rows: usize,
        max_iter: usize,
    ) -> Result<bool, SolverFailure> {
        let mut degenerate_run = 0usize;
        for _ in 0..max_iter {
            let bland = degenerate_run > 50;
            let mut entering = None;
            let mut best = T::zero();
            for c in 0..active {
                let d = self.at(obj, c);
                if d.negative() {
                    if bland {
                        entering = Some(c);
                        break;
                    }
                    if entering.is_none() || *d < best {
                        best = d.clone();
                        entering = Some(c);
                    }
                }
            }
            let Some(pc) = entering else {
                return Ok(true);
            };
            // Harris two-pass ratio test: bound the step with a small primal
            // slack, then take the largest pivot among rows within the bound
            let delta = if bland { T::zero() } else { T::ratio_slack() };
            let mut bound: Option<T> = None;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if !a.pivotable() {
                    continue;
                }
                let b = self.rhs(r);
                let b = if b.negative() { T::zero() } else { b.clone() };
                let ratio = (b + delta.clone()) / a.clone();
                if bound.as_ref().is_none_or(|t| ratio < *t) {
                    bound = Some(ratio);
                }
            }
            let mut leave: Option<(usize, T)> = None;
            if let Some(bound) = bound {
                for r in 0..self.rows {
                    let a = self.at(r, pc);
                    if !a.pivotable() {
                        continue;
                    }
                    let b = self.rhs(r);
                    let b = if b.negative() { T::zero() } else { b.clone() };
                    let ratio = b / a.clone();
                    if ratio > bound {
                        continue;
                    }
                    let better = match &leave {
                        None => true,
                        Some((lr, lv)) => {
                            if bland {
                                ratio < *lv || (ratio == *lv && self.basis[r] < self.basis[*lr])
                            } else if delta.is_zero() {
                                ratio < *lv || (ratio == *lv && *a > *self.at(*lr, pc))
                            } else {
                                *a > *self.at(*lr, pc)
                            }
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((pr, ratio)) = leave else {
                return Ok(false);
            };
            if ratio.negligible() {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(pr, pc, objective_rows);
        }
        Err(SolverFailure(format!(
            "simplex did not converge within {max_iter} iterations"
        )))
    }
}

impl<T: LpNum> LinearProgram<T> {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            rows: Vec::new(),
            rhs: Vec::new(),
            cost: vec![T::zero(); num_vars],
        }
    }

    pub fn add_row(&mut self, coefficients: Vec<(usize, T)>, rhs: T) {
        self.rows.push(coefficients);
        self.rhs.push(rhs);
    }

    pub fn solve(&self) -> Result<LpOutcome<T>, SolverFailure> {
        T::solve_lp(self)
    }

    /// Dense two-phase tableau simplex.
    pub fn solve_dense(&self) -> Result<LpOutcome<T>, SolverFailure> {
        let m = self.rows.len();
        let nv = self.num_vars;
        // dense rows with rhs made non-negative
        let mut dense: Vec<Vec<T>> = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        for (row, b) in self.rows.iter().zip(&self.rhs) {
            let mut d = vec![T::zero(); nv];
            for (c, v) in row {
                d[*c] = d[*c].clone() + v.clone();
            }
            if b.negative() {
                d.iter_mut().for_each(|v| *v = -v.clone());
                rhs.push(-b.clone());
            } else {
                rhs.push(b.clone());
            }
            dense.push(d);
        }
        // reuse unit columns as the initial basis where possible
        let mut basis = vec![usize::MAX; m];
        let mut col_nonzeros = vec![0usize; nv];
        let mut col_row = vec![usize::MAX; nv];
        for (r, d) in dense.iter().enumerate() {
            for (c, v) in d.iter().enumerate() {
                if !v.is_zero() {
                    col_nonzeros[c] += 1;
                    col_row[c] = r;
                }
            }
        }
        for c in 0..nv {
            if col_nonzeros[c] == 1 {
                let r = col_row[c];
                if basis[r] == usize::MAX && dense[r][c] == T::one() {
                    basis[r] = c;
                }
            }
        }
        let artificial_rows: Vec<usize> = (0..m).filter(|&r| basis[r] == usize::MAX).collect();
        let na = artificial_rows.len();
        let width = nv + na + 1;
        let total_rows = m + 2; // phase-2 objective at m, phase-1 at m+1
        let mut cells = vec![T::zero(); total_rows * width];
        for r in 0..m {
            for c in 0..nv {
                cells[r * width + c] = dense[r][c].clone();
            }
            cells[r * width + width - 1] = rhs[r].clone();
        }
        for (a, &r) in artificial_rows.iter().enumerate() {
            cells[r * width + nv + a] = T::one();
            basis[r] = nv + a;
        }
        for c in 0..nv {
            cells[m * width + c] = self.cost[c].clone();
        }
        for a in 0..na {
            cells[(m + 1) * width + nv + a] = T::one();
        }
        let mut tab = Tableau {
            width,
            cells,
            basis,
            rows: m,
        };
        // price out basic columns from both objective rows
        for r in 0..m {
            let bc = tab.basis[r];
            for obj in [m, m + 1] {
                let f = tab.at(obj, bc).clone();
                if !f.is_zero() {
                    for c in 0..width {
                        let v = tab.cells[obj * width + c].clone() - f.clone() * tab.at(r, c).clone();
                        tab.cells[obj * width + c] = v;
                    }
                }
            }
        }
        let max_iter = 50 * (m + nv + na + 10);
        if na > 0 {
            tab.optimize(m + 1, nv + na, 2, max_iter)?;
            let phase_one = -tab.rhs(m + 1).clone();
            if phase_one.positive() {
                return Ok(LpOutcome::Infeasible {
                    phase_one_objective: phase_one,
                });
            }
            // drive artificials out of the basis
            for r in 0..m {
                if tab.basis[r] >= nv {
                    if let Some(c) = (0..nv).find(|&c| !tab.at(r, c).negligible()) {
                        tab.pivot(r, c, 2);
                    }
                }
            }
        }
        // rows still carrying an artificial are redundant; exclude them from ratio tests
        let keep: Vec<usize> = (0..m).filter(|&r| tab.basis[r] < nv).collect();
        if keep.len() < m {
            let mut cells = Vec::with_capacity((keep.len() + 2) * width);
            let mut basis = Vec::with_capacity(keep.len());
            for &r in &keep {
                cells.extend_from_slice(&tab.cells[r * width..(r + 1) * width]);
                basis.push(tab.basis[r]);
            }
            cells.extend_from_slice(&tab.cells[m * width..(m + 2) * width]);
            tab = Tableau {
                width,
                cells,
                basis,
                rows: keep.len(),
            };
        }
        let obj = tab.rows;
        if !tab.optimize(obj, nv, 1, max_iter)? {
            return Ok(LpOutcome::Unbounded);
        }
        let mut x = vec![T::zero(); nv];
        for r in 0..tab.rows {
            let v = tab.rhs(r).clone();
            x[tab.basis[r]] = if v.negative() { T::zero() } else { v };
        }
        let objective = x
            .iter()
            .zip(&self.cost)
            .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone());
        Ok(LpOutcome::Optimal { x, objective })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};

    #[test]
    fn small_optimum_exact() {
        // min -x - y  s.t. x + 2y + s1 = 4, 3x + y + s2 = 6
        let mut lp = LinearProgram::<Rational>::new(4);
        lp.cost = vec![int(-1), int(-1), int(0), int(0)];
        lp.add_row(vec![(0, int(1)), (1, int(2)), (2, int(1))], int(4));
        lp.add_row(vec![(0, int(3)), (1, int(1)), (3, int(1))], int(6));
        match lp.solve().unwrap() {
            LpOutcome::Optimal { x, objective } => {
                assert_eq!(x[0], rat(8, 5));
                assert_eq!(x[1], rat(6, 5));
                assert_eq!(objective, rat(-14, 5));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn equality_system_with_artificials() {
        // x + y = 1, x - y = 1/2, min y
        let mut lp = LinearProgram::<f64>::new(2);
        lp.cost = vec![0.0, 1.0];
        lp.add_row(vec![(0, 1.0), (1, 1.0)], 1.0);
        lp.add_row(vec![(0, 1.0), (1, -1.0)], 0.5);
        match lp.solve().unwrap() {
            LpOutcome::Optimal { x, .. } => {
                assert!((x[0] - 0.75).abs() < 1e-12);
                assert!((x[1] - 0.25).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn detects_infeasibility() {
        let mut lp = LinearProgram::<Rational>::new(2);
        lp.add_row(vec![(0, int(1)), (1, int(1))], int(1));
        lp.add_row(vec![(0, int(1)), (1, int(1))], int(2));
        assert!(matches!(lp.solve().unwrap(), LpOutcome::Infeasible { .. }));
    }

    #[test]
    fn detects_unboundedness() {
        let mut lp = LinearProgram::<f64>::new(2);
        lp.cost = vec![-1.0, 0.0];
        lp.add_row(vec![(0, 1.0), (1, -1.0)], 1.0);
        assert_eq!(lp.solve().unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        let mut lp = LinearProgram::<Rational>::new(2);
        lp.cost = vec![int(1), int(2)];
        lp.add_row(vec![(0, int(1)), (1, int(1))], int(1));
        lp.add_row(vec![(0, int(2)), (1, int(2))], int(2));
        match lp.solve().unwrap() {
            LpOutcome::Optimal { objective, .. } => assert_eq!(objective, int(1)),
            other => panic!("{other:?}"),
        }
    }
}
