//! Exact Gaussian elimination used to drop redundant equations.

use super::q::Q;
use super::LinearSystem;
use crate::rational::Rat;

pub struct RowReduction {
    /// Original indices of a maximal independent set of rows, in input order.
    pub independent: Vec<usize>,
    /// When the system is inconsistent: `y` over the original rows with
    /// `y^T A = 0` and `y^T b = 1`.
    pub inconsistent: Option<Vec<Rat>>,
}

struct BasisRow {
    pivot: usize,
    coeffs: Vec<(usize, Q)>,
    rhs: Q,
    /// Combination of original rows that produced this row.
    combo: Vec<(usize, Q)>,
}

/// Picks independent rows of `sys`, stopping at the first inconsistency.
pub fn row_reduce(sys: &LinearSystem) -> RowReduction {
    let n = sys.num_vars();
    let m = sys.num_rows();
    let mut basis: Vec<BasisRow> = Vec::new();
    let mut independent = Vec::new();
    let mut scratch = vec![Q::zero(); n];
    let mut combo = vec![Q::zero(); m];
    let mut touched_cols: Vec<usize> = Vec::new();
    let mut touched_rows: Vec<usize> = Vec::new();

    for (ri, row) in sys.rows.iter().enumerate() {
        touched_cols.clear();
        touched_rows.clear();
        for (c, v) in row {
            scratch[*c] = Q::from_rat(v);
            touched_cols.push(*c);
        }
        let mut rhs = Q::from_rat(&sys.rhs[ri]);
        combo[ri] = Q::one();
        touched_rows.push(ri);

        for b in &basis {
            let f = scratch[b.pivot].clone();
            if f.is_zero() {
                continue;
            }
            for (c, v) in &b.coeffs {
                if scratch[*c].is_zero() {
                    touched_cols.push(*c);
                }
                scratch[*c] = scratch[*c].sub_mul(&f, v);
            }
            rhs = rhs.sub_mul(&f, &b.rhs);
            for (r, v) in &b.combo {
                if combo[*r].is_zero() {
                    touched_rows.push(*r);
                }
                combo[*r] = combo[*r].sub_mul(&f, v);
            }
        }

        touched_cols.sort_unstable();
        touched_cols.dedup();
        let coeffs: Vec<(usize, Q)> = touched_cols
            .iter()
            .filter(|&&c| !scratch[c].is_zero())
            .map(|&c| (c, scratch[c].clone()))
            .collect();
        for &c in &touched_cols {
            scratch[c] = Q::zero();
        }
        touched_rows.sort_unstable();
        touched_rows.dedup();
        let row_combo: Vec<(usize, Q)> = touched_rows
            .iter()
            .filter(|&&r| !combo[r].is_zero())
            .map(|&r| (r, combo[r].clone()))
            .collect();
        for &r in &touched_rows {
            combo[r] = Q::zero();
        }

        if coeffs.is_empty() {
            if rhs.is_zero() {
                continue;
            }
            let mut y = vec![Rat::from_integer(0.into()); m];
            for (r, v) in &row_combo {
                y[*r] = v.div(&rhs).to_rat();
            }
            return RowReduction { independent, inconsistent: Some(y) };
        }
        let pivot = coeffs[0].0;
        let p = coeffs[0].1.clone();
        let scale = |v: &Q| v.div(&p);
        basis.push(BasisRow {
            pivot,
            coeffs: coeffs.iter().map(|(c, v)| (*c, scale(v))).collect(),
            rhs: scale(&rhs),
            combo: row_combo.iter().map(|(r, v)| (*r, scale(v))).collect(),
        });
        independent.push(ri);
    }
    RowReduction { independent, inconsistent: None }
}

/// Expresses `target` as a combination of `rows`: returns `y` with
/// `sum_r y[r] rows[r] = target`, or `None` when `target` is outside the span.
pub fn express(n: usize, rows: &[Vec<(usize, Rat)>], target: &[(usize, Rat)]) -> Option<Vec<Rat>> {
    let mut sys = LinearSystem::new((0..n).map(|i| format!("v{i}")).collect(), super::Domain::NonnegRational);
    let zero = Rat::from_integer(0.into());
    for row in rows {
        sys.rows.push(row.clone());
        sys.rhs.push(zero.clone());
    }
    sys.rows.push(target.to_vec());
    sys.rhs.push(Rat::from_integer(1.into()));
    // `target` is in the span iff appending it last makes the system
    // inconsistent; then `y^T A = 0` with `y[last] = 1` gives the combination.
    let y = row_reduce(&sys).inconsistent?;
    debug_assert_eq!(y[rows.len()], Rat::from_integer(1.into()));
    Some(y[..rows.len()].iter().map(|v| -v).collect())
}

/// Sparse reduced row echelon form, grown one row at a time. Every stored
/// row has a unit pivot and is zero on all other pivot columns.
#[derive(Clone, Debug)]
pub struct Rref {
    n: usize,
    rows: Vec<Vec<(usize, Q)>>,
    pivot_row: Vec<Option<usize>>,
}

fn axpy(a: &[(usize, Q)], f: &Q, b: &[(usize, Q)]) -> Vec<(usize, Q)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j == b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i == a.len() || (j < b.len() && b[j].0 < a[i].0);
        if take_a {
            out.push(a[i].clone());
            i += 1;
        } else if take_b {
            out.push((b[j].0, Q::zero().sub_mul(f, &b[j].1)));
            j += 1;
        } else {
            let v = a[i].1.sub_mul(f, &b[j].1);
            if !v.is_zero() {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

impl Rref {
    pub fn new(n: usize) -> Rref {
        Rref { n, rows: Vec::new(), pivot_row: vec![None; n] }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Adds a row; false when it was already in the span.
    pub fn insert(&mut self, row: &[(usize, Rat)]) -> bool {
        let mut r: Vec<(usize, Q)> = Vec::new();
        let mut sorted: Vec<(usize, Q)> = row.iter().map(|(c, v)| (*c, Q::from_rat(v))).filter(|p| !p.1.is_zero()).collect();
        sorted.sort_by_key(|p| p.0);
        for (c, v) in sorted {
            match r.last_mut() {
                Some(last) if last.0 == c => last.1 = last.1.add(&v),
                _ => r.push((c, v)),
            }
        }
        r.retain(|p| !p.1.is_zero());
        // Pivot entries of the input are untouched by eliminating other
        // pivots, so one pass over the original support suffices.
        let hits: Vec<(usize, usize)> = r.iter().filter_map(|(c, _)| self.pivot_row[*c].map(|b| (*c, b))).collect();
        for (c, b) in hits {
            let f = match r.binary_search_by_key(&c, |p| p.0) {
                Ok(pos) => r[pos].1.clone(),
                Err(_) => continue,
            };
            r = axpy(&r, &f, &self.rows[b]);
        }
        if r.is_empty() {
            return false;
        }
        let lead = r[0].1.clone();
        let pivot = r[0].0;
        for p in &mut r {
            p.1 = p.1.div(&lead);
        }
        for b in 0..self.rows.len() {
            if let Ok(pos) = self.rows[b].binary_search_by_key(&pivot, |p| p.0) {
                let f = self.rows[b][pos].1.clone();
                self.rows[b] = axpy(&self.rows[b], &f, &r);
            }
        }
        self.pivot_row[pivot] = Some(self.rows.len());
        self.rows.push(r);
        true
    }

    /// A basis of the solutions of `A v = 0`, given per variable: row `i`
    /// holds the coordinates of `v_i` over the free variables.
    pub fn nullspace_rows(&self) -> (usize, Vec<Vec<(usize, Rat)>>) {
        let mut free_index = vec![usize::MAX; self.n];
        let mut m = 0;
        for c in 0..self.n {
            if self.pivot_row[c].is_none() {
                free_index[c] = m;
                m += 1;
            }
        }
        let rows = (0..self.n)
            .map(|c| match self.pivot_row[c] {
                None => vec![(free_index[c], Rat::from_integer(1.into()))],
                Some(b) => self.rows[b]
                    .iter()
                    .filter(|(q, _)| self.pivot_row[*q].is_none())
                    .map(|(q, v)| (free_index[*q], v.neg().to_rat()))
                    .collect(),
            })
            .collect();
        (m, rows)
    }
}

#[cfg(test)]
mod tests {
    use super::super::Domain;
    use super::*;
    use crate::rational::int;

    #[test]
    fn finds_rank_and_inconsistency() {
        let mut s = LinearSystem::new(vec!["a".into(), "b".into()], Domain::NonnegRational);
        s.add_row([(0, int(1)), (1, int(1))], int(1));
        s.add_row([(0, int(2)), (1, int(2))], int(2));
        s.add_row([(0, int(1))], int(0));
        let r = row_reduce(&s);
        assert_eq!(r.independent, vec![0, 2]);
        assert!(r.inconsistent.is_none());
        s.add_row([(1, int(1))], int(2));
        let r = row_reduce(&s);
        let y = r.inconsistent.unwrap();
        assert!(s.transpose_apply(&y).iter().all(|v| *v == int(0)));
        let yb: Rat = y.iter().zip(&s.rhs).map(|(a, b)| a * b).sum();
        assert_eq!(yb, int(1));
    }

    #[test]
    fn rref_nullspace_and_span() {
        // v0 + v1 - v2 = 0, v1 - v3 = 0.
        let rows = vec![vec![(0, int(1)), (1, int(1)), (2, int(-1))], vec![(1, int(1)), (3, int(-1))]];
        let mut r = Rref::new(4);
        for row in &rows {
            assert!(r.insert(row));
        }
        assert!(!r.insert(&[(0, int(2)), (1, int(4)), (2, int(-2)), (3, int(-2))]));
        let (m, basis) = r.nullspace_rows();
        assert_eq!(m, 2);
        // Every basis direction solves both rows.
        for dir in 0..m {
            let v: Vec<Rat> = basis.iter().map(|row| row.iter().filter(|p| p.0 == dir).map(|p| p.1.clone()).sum()).collect();
            for row in &rows {
                let dot: Rat = row.iter().map(|(c, a)| a * &v[*c]).sum();
                assert_eq!(dot, int(0));
            }
        }
        let y = express(4, &rows, &[(0, int(1)), (2, int(-1)), (3, int(1))]).unwrap();
        assert_eq!(y, vec![int(1), int(-1)]);
        assert!(express(4, &rows, &[(0, int(1))]).is_none());
    }
}
