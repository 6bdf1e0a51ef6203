//! Dense two-phase simplex method with Bland's rule.
//!
//! Problems here have at most a few dozen rows and columns, so the tableau
//! is stored densely and rebuilt per solve.

use crate::error::{Error, Result};
use crate::simplex::SimplexPoint;

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-10;
const FEAS_TOL: f64 = 1e-9;

/// Half-space `<normal, x> >= offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Halfspace {
    pub fn new(normal: Vec<f64>, offset: f64) -> Self {
        Halfspace { normal, offset }
    }

    pub fn slack(&self, x: &[f64]) -> f64 {
        crate::simplex::dot(&self.normal, x) - self.offset
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: SimplexPoint, value: f64 },
    Infeasible,
}

/// Maximizes `<objective, x>` over the simplex intersected with
/// `halfspaces`; returns an optimal vertex.
pub fn lp_solve(objective: &[f64], halfspaces: &[Halfspace]) -> Result<LpOutcome> {
    let n = objective.len();
    if n == 0 {
        return Err(Error::Dimension { expected: 1, got: 0 });
    }
    if let Some(h) = halfspaces.iter().find(|h| h.normal.len() != n) {
        return Err(Error::Dimension {
            expected: n,
            got: h.normal.len(),
        });
    }
    let mut lp = LinearProgram::new(objective.to_vec());
    lp.add_row(vec![1.0; n], Relation::Eq, 1.0);
    for h in halfspaces {
        lp.add_row(h.normal.clone(), Relation::Ge, h.offset);
    }
    match lp.solve()? {
        LpStatus::Optimal { x, .. } => {
            let x = clean_simplex(x);
            let value = crate::simplex::dot(objective, &x);
            Ok(LpOutcome::Optimal {
                x: SimplexPoint::from_vec_unchecked(x),
                value,
            })
        }
        LpStatus::Infeasible => Ok(LpOutcome::Infeasible),
        LpStatus::Unbounded => Err(Error::LpDegenerate(
            "unbounded objective over a bounded region".into(),
        )),
    }
}

/// Clips round-off negatives and renormalizes.
pub(crate) fn clean_simplex(mut x: Vec<f64>) -> Vec<f64> {
    x.iter_mut().for_each(|v| *v = v.max(0.0));
    let s: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= s);
    x
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpStatus {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

/// `max c^T v` subject to rows and `v >= 0`.
#[derive(Debug, Clone)]
pub(crate) struct LinearProgram {
    objective: Vec<f64>,
    rows: Vec<(Vec<f64>, Relation, f64)>,
}

impl LinearProgram {
    pub(crate) fn new(objective: Vec<f64>) -> Self {
        LinearProgram {
            objective,
            rows: Vec::new(),
        }
    }

    pub(crate) fn add_row(&mut self, coeffs: Vec<f64>, rel: Relation, rhs: f64) {
        debug_assert_eq!(coeffs.len(), self.objective.len());
        self.rows.push((coeffs, rel, rhs));
    }

    pub(crate) fn solve(&self) -> Result<LpStatus> {
        Tableau::build(self).run()
    }
}

struct Tableau {
    /// Row-major, `rows x (cols + 1)`; the last column is the right-hand side.
    a: Vec<Vec<f64>>,
    basis: Vec<usize>,
    n_struct: usize,
    /// Columns `>= first_artificial` are artificial.
    first_artificial: usize,
    cols: usize,
    objective: Vec<f64>,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        let n = lp.objective.len();
        let m = lp.rows.len();
        let n_slack = lp.rows.iter().filter(|(_, r, _)| *r != Relation::Eq).count();
        let n_art = lp
            .rows
            .iter()
            .filter(|(_, r, rhs)| {
                // After sign normalization a row needs an artificial unless it
                // is a `<=` row with nonnegative rhs.
                let flipped = *rhs < 0.0;
                match r {
                    Relation::Eq => true,
                    Relation::Le => flipped,
                    Relation::Ge => !flipped,
                }
            })
            .count();
        let cols = n + n_slack + n_art;
        let first_artificial = n + n_slack;
        let mut a = vec![vec![0.0; cols + 1]; m];
        let mut basis = vec![0; m];
        let mut next_slack = n;
        let mut next_art = first_artificial;
        for (i, (coeffs, rel, rhs)) in lp.rows.iter().enumerate() {
            let sign = if *rhs < 0.0 { -1.0 } else { 1.0 };
            for (j, c) in coeffs.iter().enumerate() {
                a[i][j] = sign * c;
            }
            a[i][cols] = sign * rhs;
            let rel = match (rel, sign < 0.0) {
                (Relation::Le, true) => Relation::Ge,
                (Relation::Ge, true) => Relation::Le,
                (r, _) => *r,
            };
            match rel {
                Relation::Le => {
                    a[i][next_slack] = 1.0;
                    basis[i] = next_slack;
                    next_slack += 1;
                }
                Relation::Ge => {
                    a[i][next_slack] = -1.0;
                    next_slack += 1;
                    a[i][next_art] = 1.0;
                    basis[i] = next_art;
                    next_art += 1;
                }
                Relation::Eq => {
                    a[i][next_art] = 1.0;
                    basis[i] = next_art;
                    next_art += 1;
                }
            }
        }
        Tableau {
            a,
            basis,
            n_struct: n,
            first_artificial,
            cols,
            objective: lp.objective.clone(),
        }
    }

    fn run(mut self) -> Result<LpStatus> {
        let m = self.a.len();
        let cap = 200 * (m + self.cols) + 1000;
        if self.first_artificial < self.cols {
            // Phase 1: maximize -(sum of artificials).
            let mut c1 = vec![0.0; self.cols];
            c1[self.first_artificial..].iter_mut().for_each(|c| *c = -1.0);
            match self.optimize(&c1, self.cols, cap)? {
                Phase::Optimal => {}
                Phase::Unbounded => {
                    return Err(Error::LpDegenerate("phase one reported unbounded".into()))
                }
            }
            let infeas: f64 = self
                .basis
                .iter()
                .enumerate()
                .filter(|(_, b)| **b >= self.first_artificial)
                .map(|(i, _)| self.a[i][self.cols])
                .sum();
            if infeas > FEAS_TOL {
                return Ok(LpStatus::Infeasible);
            }
            self.evict_artificials();
        }
        let mut c2 = vec![0.0; self.cols];
        c2[..self.n_struct].copy_from_slice(&self.objective);
        match self.optimize(&c2, self.first_artificial, cap)? {
            Phase::Unbounded => return Ok(LpStatus::Unbounded),
            Phase::Optimal => {}
        }
        let mut x = vec![0.0; self.n_struct];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n_struct {
                x[b] = self.a[i][self.cols];
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::LpDegenerate("non-finite solution".into()));
        }
        let value = x.iter().zip(&self.objective).map(|(a, b)| a * b).sum();
        Ok(LpStatus::Optimal { x, value })
    }

    /// Pivots artificial variables (at zero) out of the basis; rows with no
    /// usable pivot are redundant and dropped.
    fn evict_artificials(&mut self) {
        let mut i = 0;
        while i < self.a.len() {
            if self.basis[i] >= self.first_artificial {
                let pivot = (0..self.first_artificial).find(|&j| self.a[i][j].abs() > PIVOT_TOL);
                match pivot {
                    Some(j) => self.pivot(i, j),
                    None => {
                        self.a.remove(i);
                        self.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    /// Primal simplex on columns `< allowed`, Bland's rule for entering and
    /// leaving variables.
    fn optimize(&mut self, c: &[f64], allowed: usize, cap: usize) -> Result<Phase> {
        for _ in 0..cap {
            // Reduced cost d_j = c_j - c_B^T B^{-1} A_j; enter the first j with d_j > 0.
            let entering = (0..allowed).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let z: f64 = self
                    .basis
                    .iter()
                    .enumerate()
                    .map(|(i, &b)| c[b] * self.a[i][j])
                    .sum();
                c[j] - z > COST_TOL
            });
            let Some(j) = entering else {
                return Ok(Phase::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.a.len() {
                let aij = self.a[i][j];
                if aij > PIVOT_TOL {
                    let ratio = self.a[i][self.cols] / aij;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-12 || (ratio <= lr + 1e-12 && self.basis[i] < self.basis[li]) {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((i, _)) = leave else {
                return Ok(Phase::Unbounded);
            };
            self.pivot(i, j);
            if !self.a[i][self.cols].is_finite() {
                return Err(Error::LpDegenerate("pivot produced non-finite values".into()));
            }
        }
        Err(Error::LpDegenerate(format!("no convergence after {cap} pivots")))
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.a[row][col];
        self.a[row].iter_mut().for_each(|v| *v /= p);
        let pivot_row = self.a[row].clone();
        for (i, r) in self.a.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col];
            if f != 0.0 {
                for (v, pv) in r.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                r[col] = 0.0;
            }
        }
        // Clamp tiny negative right-hand sides from round-off.
        for r in self.a.iter_mut() {
            let last = r.len() - 1;
            if r[last] < 0.0 && r[last] > -FEAS_TOL {
                r[last] = 0.0;
            }
        }
        self.basis[row] = col;
    }
}

enum Phase {
    Optimal,
    Unbounded,
}
