//! Dense simplex for small covering linear programs.
//!
//! Problems have the form
//!
//! ```text
//! minimize  c . x   subject to  a_j . x >= b_j  (j = 1..m),  x free
//! ```
//!
//! with few variables and many rows. They are solved through the dual
//! `maximize b . y  s.t.  A^T y = c, y >= 0`, which has one equality row per
//! variable, using a two-phase tableau with artificial variables. Pivoting is
//! Dantzig's rule with a switch to Bland's rule after a run of degenerate
//! pivots, so the method is deterministic and cannot cycle.

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-11;
const FEASIBILITY_EPS: f64 = 1e-9;
const DEGENERATE_RUN: usize = 50;
const MAX_PIVOTS: usize = 100_000;

/// `minimize objective . x` subject to `row . x >= rhs` for every row.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        Self {
            objective,
            rows: Vec::new(),
            rhs: Vec::new(),
        }
    }

    pub fn n_variables(&self) -> usize {
        self.objective.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Adds `row . x >= rhs`.
    pub fn push_row(&mut self, row: Vec<f64>, rhs: f64) {
        debug_assert_eq!(row.len(), self.n_variables());
        self.rows.push(row);
        self.rhs.push(rhs);
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        dot(&self.objective, x)
    }

    /// Largest `rhs - row . x` over all rows (non-positive when feasible).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        self.rows
            .iter()
            .zip(&self.rhs)
            .map(|(row, b)| b - dot(row, x))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal {
        x: Vec<f64>,
        value: f64,
    },
    /// The objective decreases without bound along `ray`: every `row . ray >= 0`
    /// and `objective . ray < 0`.
    Unbounded {
        ray: Vec<f64>,
    },
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Tableau {
    /// `n` rows of `m + n + 1` entries: dual columns, artificials, right-hand side.
    cells: Vec<Vec<f64>>,
    basis: Vec<usize>,
    m: usize,
    n: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.cells[i][self.m + self.n]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let width = self.m + self.n + 1;
        let p = self.cells[row][col];
        for v in self.cells[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.cells[row].clone();
        for (i, r) in self.cells.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col];
            if f != 0.0 {
                for j in 0..width {
                    r[j] -= f * pivot_row[j];
                }
                r[col] = 0.0;
            }
        }
        self.basis[row] = col;
    }

    /// Reduced costs `cost_j - cost_B . column_j` for the first `limit` columns.
    fn reduced_costs(&self, cost: &[f64], limit: usize) -> Vec<f64> {
        let mut reduced = cost[..limit].to_vec();
        for (i, row) in self.cells.iter().enumerate() {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for j in 0..limit {
                    reduced[j] -= cb * row[j];
                }
            }
        }
        reduced
    }

    /// Simplex multipliers `cost_B^T B^{-1}`; the artificial block holds `B^{-1}`.
    fn multipliers(&self, cost: &[f64]) -> Vec<f64> {
        let mut pi = vec![0.0; self.n];
        for (i, row) in self.cells.iter().enumerate() {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for (k, p) in pi.iter_mut().enumerate() {
                    *p += cb * row[self.m + k];
                }
            }
        }
        pi
    }

    /// Minimizes `cost` over columns `< enter_limit`. Returns `false` if unbounded.
    fn optimize(&mut self, cost: &[f64], enter_limit: usize) -> Result<bool> {
        let mut degenerate = 0usize;
        for _ in 0..MAX_PIVOTS {
            let reduced = self.reduced_costs(cost, enter_limit);
            let bland = degenerate >= DEGENERATE_RUN;
            let entering = if bland {
                reduced.iter().position(|&r| r < -PIVOT_EPS)
            } else {
                reduced
                    .iter()
                    .enumerate()
                    .filter(|(_, &r)| r < -PIVOT_EPS)
                    .min_by(|a, b| a.1.total_cmp(b.1))
                    .map(|(j, _)| j)
            };
            let Some(col) = entering else {
                return Ok(true);
            };

            let mut leaving: Option<(usize, f64)> = None;
            for i in 0..self.n {
                let a = self.cells[i][col];
                if a > PIVOT_EPS {
                    let ratio = self.rhs(i).max(0.0) / a;
                    leaving = match leaving {
                        None => Some((i, ratio)),
                        Some((r, best)) => {
                            let tie = (ratio - best).abs() <= 1e-12 * best.abs().max(1.0);
                            if ratio < best && !tie || tie && self.basis[i] < self.basis[r] {
                                Some((i, ratio))
                            } else {
                                Some((r, best))
                            }
                        }
                    };
                }
            }
            let Some((row, ratio)) = leaving else {
                return Ok(false);
            };
            if ratio <= 1e-14 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(row, col);
        }
        Err(Error::Numerical(format!(
            "simplex exceeded {MAX_PIVOTS} pivots"
        )))
    }
}

/// Solves the program; an optimal basic solution or an unbounded ray.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpOutcome> {
    let n = lp.n_variables();
    let m = lp.n_rows();
    if n == 0 {
        return Err(Error::Numerical("linear program has no variables".into()));
    }
    if lp.rows.iter().any(|r| r.len() != n) || lp.rhs.len() != m {
        return Err(Error::Numerical(
            "constraint rows do not match the variable count".into(),
        ));
    }

    // Dual equality rows sum_j y_j a_j[i] = c_i, flipped so the right-hand side is >= 0.
    let signs: Vec<f64> = lp
        .objective
        .iter()
        .map(|&c| if c < 0.0 { -1.0 } else { 1.0 })
        .collect();
    let width = m + n + 1;
    let cells = (0..n)
        .map(|i| {
            let mut row = vec![0.0; width];
            for (j, a) in lp.rows.iter().enumerate() {
                row[j] = signs[i] * a[i];
            }
            row[m + i] = 1.0;
            row[m + n] = signs[i] * lp.objective[i];
            row
        })
        .collect();
    let mut tableau = Tableau {
        cells,
        basis: (m..m + n).collect(),
        m,
        n,
    };

    // Phase I: drive the artificials to zero.
    let mut phase1 = vec![0.0; m + n];
    phase1[m..].iter_mut().for_each(|c| *c = 1.0);
    tableau.optimize(&phase1, m + n)?;
    let infeasibility: f64 = (0..n)
        .filter(|&i| tableau.basis[i] >= m)
        .map(|i| tableau.rhs(i))
        .sum();
    let scale = lp.objective.iter().fold(1.0f64, |s, c| s.max(c.abs()));
    if infeasibility > FEASIBILITY_EPS * scale {
        // Farkas certificate of the dual infeasibility is a primal descent ray.
        let pi = tableau.multipliers(&phase1);
        let ray: Vec<f64> = pi.iter().zip(&signs).map(|(p, s)| -p * s).collect();
        return Ok(LpOutcome::Unbounded { ray });
    }

    // Pivot remaining zero-level artificials out where possible.
    for i in 0..n {
        if tableau.basis[i] >= m {
            let col = (0..m)
                .filter(|&j| tableau.cells[i][j].abs() > PIVOT_EPS)
                .max_by(|&a, &b| {
                    tableau.cells[i][a]
                        .abs()
                        .total_cmp(&tableau.cells[i][b].abs())
                });
            if let Some(col) = col {
                tableau.pivot(i, col);
            }
        }
    }

    // Phase II: maximize b . y, artificials may not re-enter.
    let mut phase2 = vec![0.0; m + n];
    for (j, b) in lp.rhs.iter().enumerate() {
        phase2[j] = -b;
    }
    if !tableau.optimize(&phase2, m)? {
        return Err(Error::Numerical(
            "covering program is infeasible (dual unbounded)".into(),
        ));
    }

    let x = basis_solution(lp, &tableau.basis).unwrap_or_else(|| {
        let pi = tableau.multipliers(&phase2);
        pi.iter().zip(&signs).map(|(p, s)| -p * s).collect()
    });
    let value = lp.objective_value(&x);
    Ok(LpOutcome::Optimal { x, value })
}

/// Solves `a_j . x = b_j` over the basic rows by Gaussian elimination with
/// partial pivoting; `None` if an artificial is still basic or the system is
/// singular.
#[allow(clippy::needless_range_loop)]
fn basis_solution(lp: &LinearProgram, basis: &[usize]) -> Option<Vec<f64>> {
    let n = lp.n_variables();
    let m = lp.n_rows();
    if basis.iter().any(|&j| j >= m) {
        return None;
    }
    let mut a: Vec<Vec<f64>> = basis
        .iter()
        .map(|&j| {
            let mut row = lp.rows[j].clone();
            row.push(lp.rhs[j]);
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &k| a[i][col].abs().total_cmp(&a[k][col].abs()))?;
        if a[pivot][col].abs() < 1e-13 {
            return None;
        }
        a.swap(col, pivot);
        for i in 0..n {
            if i != col {
                let f = a[i][col] / a[col][col];
                if f != 0.0 {
                    for k in col..=n {
                        a[i][k] -= f * a[col][k];
                    }
                }
            }
        }
    }
    Some((0..n).map(|i| a[i][n] / a[i][i]).collect())
}
