//! Dense two-phase tableau simplex for small linear programs in standard form
//!
//! ```text
//! min c^T x   s.t.  A x = b,  x >= 0
//! ```
//!
//! Pricing is Dantzig's most-negative reduced cost. After a run of degenerate
//! pivots the solver switches to Bland's rule for the rest of the phase, which
//! cannot cycle.

use nalgebra::{DMatrix, DVector};

use crate::error::{MlrError, Result};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const DEGENERATE_RUN: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct StandardForm {
    pub c: DVector<f64>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: DVector<f64>,
    pub objective: f64,
    pub pivots: usize,
}

struct Tableau {
    rows: usize,
    width: usize,
    cells: Vec<f64>,
    cost: Vec<f64>,
    basis: Vec<usize>,
    pivots: usize,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.cells[r * self.width + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.width - 1)
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width;
        let inv = 1.0 / self.at(pr, pc);
        for v in &mut self.cells[pr * w..(pr + 1) * w] {
            *v *= inv;
        }
        let pivot_row: Vec<f64> = self.cells[pr * w..(pr + 1) * w].to_vec();
        for r in 0..self.rows {
            if r == pr {
                continue;
            }
            let f = self.cells[r * w + pc];
            if f != 0.0 {
                for (v, p) in self.cells[r * w..(r + 1) * w].iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
            }
        }
        let f = self.cost[pc];
        if f != 0.0 {
            for (v, p) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= f * p;
            }
        }
        self.basis[pr] = pc;
        self.pivots += 1;
    }

    /// Runs simplex iterations over the columns `0..allowed`.
    fn optimize(&mut self, allowed: usize, max_pivots: usize) -> Result<()> {
        let mut bland = false;
        let mut degenerate = 0usize;
        loop {
            if self.pivots >= max_pivots {
                return Err(MlrError::IterationLimit(max_pivots));
            }
            let entering = if bland {
                (0..allowed).find(|&j| self.cost[j] < -COST_TOL)
            } else {
                (0..allowed)
                    .filter(|&j| self.cost[j] < -COST_TOL)
                    .min_by(|&a, &b| self.cost[a].total_cmp(&self.cost[b]))
            };
            let Some(pc) = entering else { return Ok(()) };

            let mut leave: Option<(f64, usize)> = None;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if a > PIVOT_TOL {
                    let ratio = self.rhs(r) / a;
                    let better = match leave {
                        None => true,
                        Some((best, br)) => {
                            ratio < best - 1e-12 || (ratio <= best + 1e-12 && self.basis[r] < self.basis[br])
                        }
                    };
                    if better {
                        leave = Some((ratio, r));
                    }
                }
            }
            let (ratio, pr) = leave.ok_or(MlrError::Unbounded)?;
            if ratio.abs() <= 1e-12 {
                degenerate += 1;
                if degenerate >= DEGENERATE_RUN {
                    bland = true;
                }
            } else {
                degenerate = 0;
            }
            self.pivot(pr, pc);
        }
    }
}

pub fn solve(lp: &StandardForm) -> Result<LpSolution> {
    let (m, n) = lp.a.shape();
    if lp.b.len() != m || lp.c.len() != n {
        return Err(MlrError::DimensionMismatch("inconsistent LP shapes".into()));
    }
    let width = n + m + 1;
    let mut cells = vec![0.0; m * width];
    for r in 0..m {
        let sign = if lp.b[r] < 0.0 { -1.0 } else { 1.0 };
        for c in 0..n {
            cells[r * width + c] = sign * lp.a[(r, c)];
        }
        cells[r * width + n + r] = 1.0;
        cells[r * width + width - 1] = sign * lp.b[r];
    }
    // phase one minimizes the sum of artificials
    let mut cost = vec![0.0; width];
    for r in 0..m {
        for c in 0..n {
            cost[c] -= cells[r * width + c];
        }
        cost[width - 1] -= cells[r * width + width - 1];
    }
    let mut t = Tableau { rows: m, width, cells, cost, basis: (n..n + m).collect(), pivots: 0 };
    let max_pivots = 50 * (m + n) + 1000;

    t.optimize(n + m, max_pivots)?;
    let infeasibility = -t.cost[width - 1];
    let b_scale = 1.0 + lp.b.iter().map(|v| v.abs()).sum::<f64>();
    if infeasibility > 1e-9 * b_scale {
        return Err(MlrError::Infeasible);
    }
    for r in 0..m {
        if t.basis[r] >= n {
            if let Some(c) = (0..n).find(|&c| t.at(r, c).abs() > PIVOT_TOL) {
                t.pivot(r, c);
            }
        }
    }

    // phase two with the original costs priced out against the basis
    t.cost = vec![0.0; width];
    t.cost[..n].copy_from_slice(lp.c.as_slice());
    for r in 0..m {
        let j = t.basis[r];
        let cj = if j < n { lp.c[j] } else { 0.0 };
        if cj != 0.0 {
            for c in 0..width {
                t.cost[c] -= cj * t.cells[r * width + c];
            }
        }
    }
    t.optimize(n, max_pivots)?;

    let mut x = DVector::zeros(n);
    for r in 0..m {
        if t.basis[r] < n {
            x[t.basis[r]] = t.rhs(r);
        }
    }
    let objective = lp.c.dot(&x);
    Ok(LpSolution { x, objective, pivots: t.pivots })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_problem() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), value 36
        let lp = StandardForm {
            c: DVector::from_column_slice(&[-3.0, -5.0, 0.0, 0.0, 0.0]),
            a: DMatrix::from_row_slice(
                3,
                5,
                &[1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 1.0, 0.0, 3.0, 2.0, 0.0, 0.0, 1.0],
            ),
            b: DVector::from_column_slice(&[4.0, 12.0, 18.0]),
        };
        let sol = solve(&lp).unwrap();
        assert!((sol.objective + 36.0).abs() < 1e-12);
        assert!((sol.x[0] - 2.0).abs() < 1e-12 && (sol.x[1] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn negative_rhs_and_equalities() {
        // min x + y s.t. x - y = -1, x + y >= 3 (x + y - s = 3) -> x = 1, y = 2
        let lp = StandardForm {
            c: DVector::from_column_slice(&[1.0, 1.0, 0.0]),
            a: DMatrix::from_row_slice(2, 3, &[1.0, -1.0, 0.0, 1.0, 1.0, -1.0]),
            b: DVector::from_column_slice(&[-1.0, 3.0]),
        };
        let sol = solve(&lp).unwrap();
        assert!((sol.objective - 3.0).abs() < 1e-12);
        assert!((sol.x[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let infeasible = StandardForm {
            c: DVector::from_column_slice(&[1.0]),
            a: DMatrix::from_row_slice(2, 1, &[1.0, 1.0]),
            b: DVector::from_column_slice(&[1.0, 2.0]),
        };
        assert_eq!(solve(&infeasible), Err(MlrError::Infeasible));
        let unbounded = StandardForm {
            c: DVector::from_column_slice(&[-1.0, 0.0]),
            a: DMatrix::from_row_slice(1, 2, &[1.0, -1.0]),
            b: DVector::from_column_slice(&[1.0]),
        };
        assert_eq!(solve(&unbounded), Err(MlrError::Unbounded));
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        let lp = StandardForm {
            c: DVector::from_column_slice(&[1.0, 2.0]),
            a: DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 2.0, 2.0]),
            b: DVector::from_column_slice(&[1.0, 2.0]),
        };
        let sol = solve(&lp).unwrap();
        assert!((sol.objective - 1.0).abs() < 1e-12);
    }
}
