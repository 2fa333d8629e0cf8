//! Dense exact-rational simplex for `min c·x  s.t.  A x = b,  x ≥ 0`.
//!
//! Equality rows are first reduced to an independent set by exact
//! Gauss-Jordan elimination. Phase one starts from the reduced pivot columns
//! and adds artificial columns only for rows whose right-hand side is
//! negative. Both phases use Bland's rule: the entering column is the
//! lowest-indexed one with negative reduced cost, and ratio ties leave on
//! the lowest-indexed basic variable. Pivoting is therefore deterministic
//! and never cycles.

use num_traits::{One, Signed, Zero};

use crate::error::{invalid, Result};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpResult {
    Optimal { value: Rational, x: Vec<Rational> },
    Unbounded,
}

/// A basic feasible tableau. Reuse it to optimize many objectives over the
/// same polyhedron.
#[derive(Clone, Debug)]
pub struct Tableau {
    n: usize,
    /// rows of length `width + 1`, last column is the right-hand side
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    width: usize,
}

/// Reduces `[A | b]` to reduced row-echelon form, dropping dependent rows.
/// Returns `None` when the system is inconsistent; otherwise the rows and
/// their pivot columns.
fn reduce(
    a: &[Vec<Rational>],
    b: &[Rational],
    n: usize,
) -> Option<(Vec<Vec<Rational>>, Vec<usize>)> {
    let mut rows: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..n {
        let Some(p) = (rank..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let inv = Rational::one() / &rows[rank][col];
        for v in rows[rank].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        let pivot_row = rows[rank].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == rank || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    if rows[rank..].iter().any(|r| !r[n].is_zero()) {
        return None;
    }
    rows.truncate(rank);
    Some((rows, pivots))
}

impl Tableau {
    /// Phase one. `Ok(None)` means the constraints are infeasible.
    pub fn feasible(a: &[Vec<Rational>], b: &[Rational], n: usize) -> Result<Option<Tableau>> {
        if a.len() != b.len() || a.iter().any(|r| r.len() != n) {
            return invalid("constraint matrix shape does not match");
        }
        let Some((mut rows, pivots)) = reduce(a, b, n) else {
            return Ok(None);
        };
        let negative: Vec<usize> = (0..rows.len())
            .filter(|&i| rows[i][n].is_negative())
            .collect();
        let width = n + negative.len();
        let mut basis = pivots;
        for row in rows.iter_mut() {
            let rhs = row.pop().expect("rhs column");
            row.resize(width, Rational::zero());
            row.push(rhs);
        }
        for (k, &i) in negative.iter().enumerate() {
            for v in rows[i].iter_mut() {
                *v = -&*v;
            }
            rows[i][n + k] = Rational::one();
            basis[i] = n + k;
        }
        let mut tab = Tableau {
            n,
            rows,
            basis,
            width,
        };
        if negative.is_empty() {
            return Ok(Some(tab));
        }
        let mut cost = vec![Rational::zero(); width];
        for c in cost.iter_mut().skip(n) {
            *c = Rational::one();
        }
        let (value, _) = match tab.run(&cost) {
            LpResult::Optimal { value, x } => (value, x),
            LpResult::Unbounded => unreachable!("phase one is bounded below by zero"),
        };
        if !value.is_zero() {
            return Ok(None);
        }
        tab.drop_artificials();
        Ok(Some(tab))
    }

    fn drop_artificials(&mut self) {
        let n = self.n;
        for i in 0..self.rows.len() {
            if self.basis[i] < n {
                continue;
            }
            // the reduced rows are independent, so a structural column exists
            let col = (0..n)
                .find(|&j| !self.rows[i][j].is_zero())
                .expect("independent rows keep a structural entry");
            self.pivot(i, col, None);
        }
        for row in self.rows.iter_mut() {
            let rhs = row.pop().expect("rhs");
            row.truncate(n);
            row.push(rhs);
        }
        self.width = n;
    }

    fn pivot(&mut self, r: usize, col: usize, obj: Option<&mut Vec<Rational>>) {
        let inv = Rational::one() / &self.rows[r][col];
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let eliminate = |row: &mut Vec<Rational>| {
            if row[col].is_zero() {
                return;
            }
            let factor = row[col].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        if let Some(obj) = obj {
            eliminate(obj);
        }
        self.rows[r] = pivot_row;
        self.basis[r] = col;
    }

    fn solution(&self) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); self.n];
        for (row, &j) in self.rows.iter().zip(&self.basis) {
            if j < self.n {
                x[j] = row[self.width].clone();
            }
        }
        x
    }

    /// Bland-rule simplex from the current basis on a cost over all
    /// `width` columns.
    fn run(&mut self, cost: &[Rational]) -> LpResult {
        let w = self.width;
        // objective row: reduced costs, last entry is −(c_B · x_B)
        let mut obj: Vec<Rational> = cost.to_vec();
        obj.push(Rational::zero());
        for (row, &j) in self.rows.iter().zip(&self.basis) {
            let cj = cost[j].clone();
            if cj.is_zero() {
                continue;
            }
            for (o, v) in obj.iter_mut().zip(row) {
                if !v.is_zero() {
                    *o -= &cj * v;
                }
            }
        }
        loop {
            let Some(enter) = (0..w).find(|&j| obj[j].is_negative()) else {
                let value = -obj[w].clone();
                let mut x = vec![Rational::zero(); w];
                for (row, &j) in self.rows.iter().zip(&self.basis) {
                    x[j] = row[w].clone();
                }
                return LpResult::Optimal { value, x };
            };
            let mut leave: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[enter].is_positive() {
                    continue;
                }
                let ratio = &row[w] / &row[enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, _)) = leave else {
                return LpResult::Unbounded;
            };
            self.pivot(r, enter, Some(&mut obj));
        }
    }

    pub fn variable_count(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// The basic feasible solution of the current basis.
    pub fn vertex(&self) -> Vec<Rational> {
        self.solution()
    }

    /// Minimizes `c·x` starting from this basis; `self` is left untouched.
    pub fn minimize(&self, c: &[Rational]) -> Result<LpResult> {
        if c.len() != self.n {
            return invalid(format!(
                "objective has {} entries, expected {}",
                c.len(),
                self.n
            ));
        }
        let mut tab = self.clone();
        Ok(match tab.run(c) {
            LpResult::Optimal { value, mut x } => {
                x.truncate(self.n);
                LpResult::Optimal { value, x }
            }
            LpResult::Unbounded => LpResult::Unbounded,
        })
    }

    pub fn maximize(&self, c: &[Rational]) -> Result<LpResult> {
        let neg: Vec<Rational> = c.iter().map(|v| -v).collect();
        Ok(match self.minimize(&neg)? {
            LpResult::Optimal { value, x } => LpResult::Optimal { value: -value, x },
            LpResult::Unbounded => LpResult::Unbounded,
        })
    }
}
