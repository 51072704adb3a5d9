//! Feasibility of vector systems through their Gram matrices.
//!
//! A [`GramProblem`] asks for vectors `v_i`, one per label, with some inner
//! products forced to zero, some linear combinations forced to vanish, and
//! some groups of squared norms summing to one. Solving runs in two phases:
//! [`affine_reduce`] derives exact consequences over the rationals and may
//! refute the system outright, then [`psd_feasibility`] searches numerically
//! for a PSD Gram matrix on the reduced parametrisation.

mod reduce;
mod solve;

pub use reduce::{affine_reduce, diagonal_system, ReducedProblem, Reduction, Refutation, Step};
pub use solve::{gram_to_vectors, psd_feasibility, solve_gram, GramVerdict, PsdConfig, SoSWitness};

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::rational::{format_rat, Rat};

#[derive(Clone, Debug, PartialEq)]
pub struct GramProblem {
    pub labels: Vec<String>,
    /// Pairs `i < j` with `v_i . v_j = 0`.
    pub zero_entries: Vec<(usize, usize)>,
    /// Rows `sum c_i v_i = 0`.
    pub identifications: Vec<Vec<(usize, Rat)>>,
    /// Groups whose squared norms sum to one.
    pub unit_rows: Vec<Vec<usize>>,
    /// Ambient dimension allowed for the vectors.
    pub omega: usize,
}

impl GramProblem {
    pub fn new(labels: Vec<String>) -> GramProblem {
        let omega = labels.len();
        GramProblem { labels, zero_entries: Vec::new(), identifications: Vec::new(), unit_rows: Vec::new(), omega }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn add_zero(&mut self, i: usize, j: usize) {
        debug_assert_ne!(i, j);
        self.zero_entries.push((i.min(j), i.max(j)));
    }

    pub fn check(&self) -> Result<()> {
        let n = self.len();
        let bad = |what: &str| Err(Error::IndexOutOfRange(format!("{what} refers to a missing label")));
        if self.zero_entries.iter().any(|&(i, j)| i >= j || j >= n) {
            return bad("zero entry");
        }
        if self.identifications.iter().flatten().any(|p| p.0 >= n) {
            return bad("identification");
        }
        if self.unit_rows.iter().flatten().any(|&i| i >= n) {
            return bad("unit row");
        }
        Ok(())
    }

    /// Number of scalar constraints on the Gram matrix, for reporting.
    pub fn num_constraints(&self) -> usize {
        self.zero_entries.len() + self.identifications.len() + self.unit_rows.len()
    }

    pub fn to_json(&self) -> Value {
        let ident: Vec<Value> = self
            .identifications
            .iter()
            .map(|row| Value::Array(row.iter().map(|(i, c)| json!([i, format_rat(c)])).collect()))
            .collect();
        json!({
            "labels": self.labels,
            "zero_entries": self.zero_entries,
            "identifications": ident,
            "unit_rows": self.unit_rows,
            "omega": self.omega,
        })
    }

    /// Largest violation of any constraint by a Gram matrix indexed like
    /// `labels`. An identification contributes `sqrt(c^T G c)`, the norm of
    /// the combination it forces to vanish.
    pub fn gram_residual(&self, gram: &[Vec<f64>]) -> Result<f64> {
        let n = self.len();
        if gram.len() != n || gram.iter().any(|r| r.len() != n) {
            return Err(Error::ShapeMismatch(format!("Gram matrix must be {n} x {n}")));
        }
        if gram.iter().flatten().any(|v| !v.is_finite()) {
            return Ok(f64::INFINITY);
        }
        let mut worst: f64 = 0.0;
        for &(i, j) in &self.zero_entries {
            worst = worst.max(gram[i][j].abs());
        }
        for row in &self.unit_rows {
            worst = worst.max((row.iter().map(|&i| gram[i][i]).sum::<f64>() - 1.0).abs());
        }
        for row in &self.identifications {
            let c: Vec<(usize, f64)> = row.iter().map(|(i, v)| (*i, crate::rational::to_f64(v))).collect();
            let q: f64 = c.iter().flat_map(|&(i, a)| c.iter().map(move |&(j, b)| a * b * gram[i][j])).sum();
            worst = worst.max(q.max(0.0).sqrt());
        }
        Ok(worst)
    }

    /// Sorted zero pairs for membership queries.
    pub(crate) fn zero_set(&self) -> std::collections::HashSet<(usize, usize)> {
        self.zero_entries.iter().copied().collect()
    }
}
