//! Exact feasibility for `A x = b`: rational simplex for `x >= 0` and a
//! Hermite normal form solver for `x` integral. Both return certificates that
//! can be checked independently of the solver.

mod hnf;
mod linalg;
pub mod q;
mod simplex;

pub use hnf::{diophantine_solve, hnf, HnfResult};
pub use linalg::{express, row_reduce, Rref, RowReduction};
pub use simplex::{lp_feasible, lp_maximize, LpOptimum, PIVOT_BUDGET};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::rational::{serde_rat_vec, Rat};
use crate::verdict::Verdict;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    NonnegRational,
    Integer,
}

/// `A x = b` with sparse rows. Coefficients are merged per column and zeros dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSystem {
    pub vars: Vec<String>,
    pub rows: Vec<Vec<(usize, Rat)>>,
    pub rhs: Vec<Rat>,
    pub domain: Domain,
}

impl LinearSystem {
    pub fn new(vars: Vec<String>, domain: Domain) -> Self {
        LinearSystem { vars, rows: Vec::new(), rhs: Vec::new(), domain }
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn add_row(&mut self, coeffs: impl IntoIterator<Item = (usize, Rat)>, rhs: Rat) {
        let mut row: Vec<(usize, Rat)> = coeffs.into_iter().collect();
        row.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, Rat)> = Vec::with_capacity(row.len());
        for (c, v) in row {
            match merged.last_mut() {
                Some(last) if last.0 == c => last.1 += v,
                _ => merged.push((c, v)),
            }
        }
        merged.retain(|e| !e.1.is_zero());
        self.rows.push(merged);
        self.rhs.push(rhs);
    }

    /// `A x` for a rational `x`.
    pub fn apply(&self, x: &[Rat]) -> Vec<Rat> {
        self.rows.iter().map(|r| r.iter().map(|(c, v)| v * &x[*c]).sum()).collect()
    }

    /// `y^T A`.
    pub fn transpose_apply(&self, y: &[Rat]) -> Vec<Rat> {
        let mut out = vec![Rat::zero(); self.num_vars()];
        for (r, yr) in self.rows.iter().zip(y) {
            if yr.is_zero() {
                continue;
            }
            for (c, v) in r {
                out[*c] += v * yr;
            }
        }
        out
    }

    pub fn is_solution(&self, x: &[Rat]) -> bool {
        x.len() == self.num_vars()
            && self.apply(x) == self.rhs
            && match self.domain {
                Domain::NonnegRational => x.iter().all(|v| !v.is_negative()),
                Domain::Integer => x.iter().all(|v| v.is_integer()),
            }
    }

    /// Keeps only the columns with `keep[c]`, renumbering the rest.
    pub fn restrict(&self, keep: &[bool]) -> (LinearSystem, Vec<usize>) {
        let kept: Vec<usize> = (0..self.num_vars()).filter(|&c| keep[c]).collect();
        let mut new_index = vec![usize::MAX; self.num_vars()];
        for (i, &c) in kept.iter().enumerate() {
            new_index[c] = i;
        }
        let mut out = LinearSystem::new(kept.iter().map(|&c| self.vars[c].clone()).collect(), self.domain);
        for (r, b) in self.rows.iter().zip(&self.rhs) {
            out.add_row(r.iter().filter(|e| keep[e.0]).map(|(c, v)| (new_index[*c], v.clone())), b.clone());
        }
        (out, kept)
    }

    pub fn with_domain(&self, domain: Domain) -> LinearSystem {
        LinearSystem { domain, ..self.clone() }
    }
}

/// Machine-checkable refutation of a linear system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Certificate {
    /// `y^T A <= 0` and `y^T b > 0`, so no nonnegative `x` solves `A x = b`.
    #[serde(rename = "FARKAS")]
    Farkas {
        #[serde(with = "serde_rat_vec")]
        y: Vec<Rat>,
    },
    /// `z^T A` is integral and `z^T b` is not, so no integral `x` solves `A x = b`.
    #[serde(rename = "PARITY_HNF")]
    ParityHnf {
        #[serde(with = "serde_rat_vec")]
        z: Vec<Rat>,
    },
}

impl Certificate {
    pub fn kind(&self) -> &'static str {
        match self {
            Certificate::Farkas { .. } => "FARKAS",
            Certificate::ParityHnf { .. } => "PARITY_HNF",
        }
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).unwrap_or_else(|_| json!(null))
    }

    /// Checks whichever kind this is against `sys`.
    pub fn verify(&self, sys: &LinearSystem) -> Result<bool> {
        match self {
            Certificate::Farkas { .. } => verify_farkas(self, sys),
            Certificate::ParityHnf { .. } => verify_parity(self, sys),
        }
    }
}

pub type LpVerdict = Verdict<Vec<Rat>, Certificate>;
pub type IpVerdict = Verdict<Vec<BigInt>, Certificate>;

fn wrong_kind(expected: &str, found: &Certificate) -> Error {
    Error::WrongKind { expected: expected.into(), found: found.kind().into() }
}

pub fn verify_farkas(cert: &Certificate, sys: &LinearSystem) -> Result<bool> {
    let Certificate::Farkas { y } = cert else {
        return Err(wrong_kind("FARKAS", cert));
    };
    if y.len() != sys.num_rows() {
        return Err(Error::LengthMismatch(format!("{} multipliers for {} rows", y.len(), sys.num_rows())));
    }
    let yb: Rat = y.iter().zip(&sys.rhs).map(|(a, b)| a * b).sum();
    Ok(yb.is_positive() && sys.transpose_apply(y).iter().all(|v| !v.is_positive()))
}

pub fn verify_parity(cert: &Certificate, sys: &LinearSystem) -> Result<bool> {
    let Certificate::ParityHnf { z } = cert else {
        return Err(wrong_kind("PARITY_HNF", cert));
    };
    if z.len() != sys.num_rows() {
        return Err(Error::LengthMismatch(format!("{} multipliers for {} rows", z.len(), sys.num_rows())));
    }
    let zb: Rat = z.iter().zip(&sys.rhs).map(|(a, b)| a * b).sum();
    Ok(!zb.is_integer() && sys.transpose_apply(z).iter().all(|v| v.is_integer()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn system(rows: &[(&[(usize, i64)], i64)], n: usize, domain: Domain) -> LinearSystem {
        let mut s = LinearSystem::new((0..n).map(|i| format!("x{i}")).collect(), domain);
        for (r, b) in rows {
            s.add_row(r.iter().map(|&(c, v)| (c, int(v))), int(*b));
        }
        s
    }

    #[test]
    fn farkas_verification() {
        let s = system(&[(&[(0, 1)], -1)], 1, Domain::NonnegRational);
        assert!(verify_farkas(&Certificate::Farkas { y: vec![int(-1)] }, &s).unwrap());
        assert!(!verify_farkas(&Certificate::Farkas { y: vec![int(0)] }, &s).unwrap());
        let err = verify_farkas(&Certificate::ParityHnf { z: vec![int(0)] }, &s).unwrap_err();
        assert!(matches!(err, Error::WrongKind { .. }));
    }

    #[test]
    fn rows_merge() {
        let mut s = LinearSystem::new(vec!["a".into(), "b".into()], Domain::Integer);
        s.add_row([(1, int(1)), (0, int(2)), (1, int(-1))], int(3));
        assert_eq!(s.rows[0], vec![(0, int(2))]);
    }

    #[test]
    fn certificate_json() {
        let c = Certificate::ParityHnf { z: vec![crate::rational::rat(1, 2), int(0)] };
        let v = c.to_json();
        assert_eq!(v["kind"], "PARITY_HNF");
        assert_eq!(v["z"][0], "1/2");
        let back: Certificate = serde_json::from_value(v).unwrap();
        assert_eq!(back, c);
    }
}
