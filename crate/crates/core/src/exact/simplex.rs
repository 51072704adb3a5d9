//! Dense exact simplex with Bland's rule.
//!
//! Equations are first reduced to an independent set; phase one then
//! minimises the sum of artificial variables. Artificial columns are not
//! stored, so a Farkas vector is recovered at the end by solving
//! `B^T y = c_B` for the final basis.

use super::linalg::row_reduce;
use super::q::Q;
use super::{Certificate, LinearSystem, LpVerdict};
use crate::error::{Error, Result};
use crate::rational::Rat;
use crate::verdict::Verdict;

/// Pivots allowed per solve before giving up with `IterationBudget`.
pub const PIVOT_BUDGET: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub enum LpOptimum {
    Optimal { x: Vec<Rat>, value: Rat },
    Unbounded,
    Infeasible(Certificate),
}

struct Tableau {
    n: usize,
    /// `m` constraint rows, each of width `n + 1` with the rhs last.
    rows: Vec<Vec<Q>>,
    /// Reduced costs with the negated objective value last.
    obj: Vec<Q>,
    /// Basic variable per row; `n + i` is the artificial of row `i`.
    basis: Vec<usize>,
    /// Row sign flips applied to make the rhs nonnegative.
    signs: Vec<bool>,
    /// Original system row index for each tableau row.
    origin: Vec<usize>,
    pivots: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, j: usize) -> Result<()> {
        self.pivots += 1;
        if self.pivots > PIVOT_BUDGET {
            return Err(Error::IterationBudget(PIVOT_BUDGET));
        }
        let p = self.rows[r][j].clone();
        let nz: Vec<usize> = (0..=self.n).filter(|&c| !self.rows[r][c].is_zero()).collect();
        for &c in &nz {
            self.rows[r][c] = self.rows[r][c].div(&p);
        }
        let prow: Vec<(usize, Q)> = nz.iter().map(|&c| (c, self.rows[r][c].clone())).collect();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][j].is_zero() {
                continue;
            }
            let f = self.rows[i][j].clone();
            let row = &mut self.rows[i];
            for (c, v) in &prow {
                row[*c] = row[*c].sub_mul(&f, v);
            }
        }
        if !self.obj[j].is_zero() {
            let f = self.obj[j].clone();
            for (c, v) in &prow {
                self.obj[*c] = self.obj[*c].sub_mul(&f, v);
            }
        }
        self.basis[r] = j;
        Ok(())
    }

    /// Runs Bland's rule on the current objective row. Returns false when unbounded.
    fn optimise(&mut self) -> Result<bool> {
        loop {
            let is_basic = {
                let mut b = vec![false; self.n];
                for &v in &self.basis {
                    if v < self.n {
                        b[v] = true;
                    }
                }
                b
            };
            let Some(j) = (0..self.n).find(|&j| !is_basic[j] && self.obj[j].is_negative()) else {
                return Ok(true);
            };
            let mut best: Option<(usize, Q)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[j].is_positive() {
                    continue;
                }
                let ratio = row[self.n].div(&row[j]);
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br || (ratio == br && self.basis[i] < self.basis[bi]) {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            let Some((r, _)) = best else { return Ok(false) };
            self.pivot(r, j)?;
        }
    }

    fn solution(&self) -> Vec<Rat> {
        let mut x = vec![Rat::from_integer(0.into()); self.n];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n {
                x[b] = self.rows[i][self.n].to_rat();
            }
        }
        x
    }
}

enum Phase1 {
    Feasible(Tableau),
    Infeasible(Certificate),
}

fn phase_one(sys: &LinearSystem) -> Result<Phase1> {
    let red = row_reduce(sys);
    if let Some(y) = red.inconsistent {
        return Ok(Phase1::Infeasible(Certificate::Farkas { y }));
    }
    let n = sys.num_vars();
    let m = red.independent.len();
    let mut rows = Vec::with_capacity(m);
    let mut signs = Vec::with_capacity(m);
    for &ri in &red.independent {
        let mut row = vec![Q::zero(); n + 1];
        for (c, v) in &sys.rows[ri] {
            row[*c] = Q::from_rat(v);
        }
        row[n] = Q::from_rat(&sys.rhs[ri]);
        let flip = row[n].is_negative();
        if flip {
            for v in row.iter_mut() {
                *v = v.neg();
            }
        }
        signs.push(flip);
        rows.push(row);
    }
    let mut obj = vec![Q::zero(); n + 1];
    for row in &rows {
        for (o, v) in obj.iter_mut().zip(row) {
            *o = o.sub(v);
        }
    }
    let mut t = Tableau {
        n,
        rows,
        obj,
        basis: (0..m).map(|i| n + i).collect(),
        signs,
        origin: red.independent,
        pivots: 0,
    };
    t.optimise()?;
    if t.obj[n].is_zero() {
        return Ok(Phase1::Feasible(t));
    }
    let y = farkas_from_basis(sys, &t);
    let cert = Certificate::Farkas { y };
    debug_assert!(super::verify_farkas(&cert, sys).unwrap_or(false));
    Ok(Phase1::Infeasible(cert))
}

/// Solves `B^T y = c_B` where `c_B` marks artificial basics, then maps `y`
/// back to the original rows.
fn farkas_from_basis(sys: &LinearSystem, t: &Tableau) -> Vec<Rat> {
    let m = t.rows.len();
    let n = t.n;
    let col_of = |var: usize| -> Vec<Q> {
        let mut col = vec![Q::zero(); m];
        if var >= n {
            col[var - n] = Q::one();
        } else {
            for (i, &ri) in t.origin.iter().enumerate() {
                if let Some((_, v)) = sys.rows[ri].iter().find(|e| e.0 == var) {
                    let q = Q::from_rat(v);
                    col[i] = if t.signs[i] { q.neg() } else { q };
                }
            }
        }
        col
    };
    // Row k of B^T is the column of the k-th basic variable.
    let mut mat: Vec<Vec<Q>> = t.basis.iter().map(|&v| col_of(v)).collect();
    let mut rhs: Vec<Q> = t.basis.iter().map(|&v| if v >= n { Q::one() } else { Q::zero() }).collect();
    for col in 0..m {
        let piv = (col..m).find(|&r| !mat[r][col].is_zero()).expect("basis is nonsingular");
        mat.swap(col, piv);
        rhs.swap(col, piv);
        let p = mat[col][col].clone();
        for c in col..m {
            mat[col][c] = mat[col][c].div(&p);
        }
        rhs[col] = rhs[col].div(&p);
        for r in 0..m {
            if r != col && !mat[r][col].is_zero() {
                let f = mat[r][col].clone();
                for c in col..m {
                    let v = mat[col][c].clone();
                    mat[r][c] = mat[r][c].sub_mul(&f, &v);
                }
                let v = rhs[col].clone();
                rhs[r] = rhs[r].sub_mul(&f, &v);
            }
        }
    }
    let mut y = vec![Rat::from_integer(0.into()); sys.num_rows()];
    for (i, &ri) in t.origin.iter().enumerate() {
        let v = if t.signs[i] { rhs[i].neg() } else { rhs[i].clone() };
        y[ri] = v.to_rat();
    }
    y
}

/// Decides whether `A x = b` has a solution with `x >= 0`.
pub fn lp_feasible(sys: &LinearSystem) -> Result<LpVerdict> {
    match phase_one(sys)? {
        Phase1::Feasible(t) => Ok(Verdict::Accept(t.solution())),
        Phase1::Infeasible(c) => Ok(Verdict::Reject(c)),
    }
}

/// Maximises `c^T x` over `A x = b, x >= 0`.
pub fn lp_maximize(sys: &LinearSystem, c: &[Rat]) -> Result<LpOptimum> {
    if c.len() != sys.num_vars() {
        return Err(Error::LengthMismatch(format!("{} costs for {} variables", c.len(), sys.num_vars())));
    }
    let mut t = match phase_one(sys)? {
        Phase1::Feasible(t) => t,
        Phase1::Infeasible(cert) => return Ok(LpOptimum::Infeasible(cert)),
    };
    let n = t.n;
    // Drive zero-level artificials out; rows are independent so a pivot exists.
    for r in 0..t.rows.len() {
        if t.basis[r] >= n {
            let j = (0..n)
                .find(|&j| !t.rows[r][j].is_zero() && !t.basis.contains(&j))
                .expect("independent rows admit a pivot");
            t.pivot(r, j)?;
        }
    }
    let mut obj: Vec<Q> = c.iter().map(|v| Q::from_rat(v).neg()).collect();
    obj.push(Q::zero());
    for (i, &b) in t.basis.iter().enumerate() {
        let f = obj[b].clone();
        if f.is_zero() {
            continue;
        }
        for (o, v) in obj.iter_mut().zip(&t.rows[i]) {
            *o = o.sub_mul(&f, v);
        }
    }
    t.obj = obj;
    if !t.optimise()? {
        return Ok(LpOptimum::Unbounded);
    }
    let x = t.solution();
    let value = x.iter().zip(c).map(|(a, b)| a * b).sum();
    Ok(LpOptimum::Optimal { x, value })
}
