//! Exact consequences of the linear part of a Gram problem.
//!
//! The identifications say `C V = 0` for the matrix `V` whose rows are the
//! label vectors, so `V = N W` for a rational basis `N` of the nullspace of
//! `C` and the Gram matrix is `N K N^T` for some PSD `K`. Two exact rules
//! then shrink the problem:
//!
//! * if `v_i = c v_j` follows from the identifications and `v_i . v_j = 0`
//!   is required, both vectors vanish; the new identifications are added and
//!   the nullspace recomputed;
//! * when a row `c_t v_t = -sum c_j v_j` has pairwise orthogonal right-hand
//!   terms, the squared norms satisfy `c_t^2 |v_t|^2 = sum c_j^2 |v_j|^2`,
//!   which together with the unit rows is a linear program in the norms.
//!
//! Every refutation records its derivation so that it can be replayed.

use std::collections::HashMap;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use super::GramProblem;
use crate::error::Result;
use crate::exact::{express, lp_feasible, row_reduce, Certificate, Domain, LinearSystem, Rref};
use crate::rational::{format_rat, int, Rat};
use crate::verdict::Verdict;

/// One exact derivation. `combination` multiplies the identification rows
/// followed by the unit rows `e_t` of every label derived to vanish by the
/// preceding steps, in order.
#[derive(Clone, Debug, PartialEq)]
pub enum Step {
    /// The rows combine to `e_i - c e_j` and `v_i . v_j = 0` is required, so
    /// `v_i` and `v_j` both vanish (`e_i` then `e_j` are appended).
    Collinear { i: usize, j: usize, c: Rat, combination: Vec<Rat> },
    /// The rows combine to `e_i` (appended).
    Forced { i: usize, combination: Vec<Rat> },
}

impl Step {
    fn vanishing(&self) -> Vec<usize> {
        match self {
            Step::Collinear { i, j, .. } => vec![*i, *j],
            Step::Forced { i, .. } => vec![*i],
        }
    }

    fn to_json(&self, p: &GramProblem) -> Value {
        let combo = |y: &[Rat]| -> Value {
            let nz: Vec<Value> = y.iter().enumerate().filter(|e| !e.1.is_zero()).map(|(r, v)| json!([r, format_rat(v)])).collect();
            Value::Array(nz)
        };
        match self {
            Step::Collinear { i, j, c, combination } => json!({
                "collinear": [p.labels[*i], p.labels[*j]],
                "factor": format_rat(c),
                "combination": combo(combination),
            }),
            Step::Forced { i, combination } => json!({ "forced": p.labels[*i], "combination": combo(combination) }),
        }
    }
}

/// Replays `steps`, checking each combination exactly. Returns the vanished
/// labels when every step holds.
fn replay(p: &GramProblem, steps: &[Step]) -> Option<Vec<bool>> {
    let n = p.len();
    let zeros = p.zero_set();
    let mut rows = p.identifications.clone();
    let mut vanished = vec![false; n];
    for step in steps {
        let (target, ok) = match step {
            Step::Collinear { i, j, c, .. } => {
                let ok = *i < n && *j < n && !c.is_zero() && zeros.contains(&(*i.min(j), *i.max(j)));
                (vec![(*i, int(1)), (*j, -c.clone())], ok)
            }
            Step::Forced { i, .. } => (vec![(*i, int(1))], *i < n),
        };
        let combination = match step {
            Step::Collinear { combination, .. } | Step::Forced { combination, .. } => combination,
        };
        if !ok || combination.len() != rows.len() {
            return None;
        }
        let mut acc = vec![Rat::zero(); n];
        for (y, row) in combination.iter().zip(&rows) {
            if y.is_zero() {
                continue;
            }
            for (c, v) in row {
                acc[*c] += y * v;
            }
        }
        let mut want = vec![Rat::zero(); n];
        for (c, v) in target {
            want[c] += v;
        }
        if acc != want {
            return None;
        }
        for t in step.vanishing() {
            vanished[t] = true;
            rows.push(vec![(t, int(1))]);
        }
    }
    Some(vanished)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Refutation {
    /// Every label of one unit row vanishes.
    Vanishing { steps: Vec<Step>, unit_row: usize },
    /// The norm program is infeasible; `farkas` refers to
    /// [`diagonal_system`] with the vanished labels of `steps`.
    Diagonal { steps: Vec<Step>, farkas: Certificate },
    /// The linear constraints on `K` are inconsistent; `y` refers to the
    /// rows of the Gram system built from the vanished labels of `steps`.
    GramLinear { steps: Vec<Step>, y: Vec<Rat> },
}

impl Refutation {
    pub fn steps(&self) -> &[Step] {
        match self {
            Refutation::Vanishing { steps, .. } | Refutation::Diagonal { steps, .. } | Refutation::GramLinear { steps, .. } => {
                steps
            }
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Refutation::Vanishing { .. } => "VANISHING",
            Refutation::Diagonal { .. } => "NORM_FARKAS",
            Refutation::GramLinear { .. } => "GRAM_LINEAR",
        }
    }

    pub fn to_json(&self, p: &GramProblem) -> Value {
        let steps: Vec<Value> = self.steps().iter().map(|s| s.to_json(p)).collect();
        let mut out = json!({ "kind": "INCONSISTENT", "reason": self.kind(), "steps": steps });
        match self {
            Refutation::Vanishing { unit_row, .. } => {
                let labels: Vec<&String> = p.unit_rows[*unit_row].iter().map(|&i| &p.labels[i]).collect();
                out["unit_row"] = json!(labels);
            }
            Refutation::Diagonal { farkas, .. } => out["farkas"] = farkas.to_json(),
            Refutation::GramLinear { y, .. } => out["y"] = json!(y.iter().map(format_rat).collect::<Vec<_>>()),
        }
        out
    }

    /// Independent check against the original problem.
    pub fn verify(&self, p: &GramProblem) -> Result<bool> {
        let Some(vanished) = replay(p, self.steps()) else { return Ok(false) };
        match self {
            Refutation::Vanishing { unit_row, .. } => {
                Ok(p.unit_rows.get(*unit_row).is_some_and(|row| row.iter().all(|&i| vanished[i])))
            }
            Refutation::Diagonal { farkas, .. } => farkas.verify(&diagonal_system(p, &vanished)),
            Refutation::GramLinear { y, .. } => {
                let (basis, m) = nullspace(p, &vanished);
                let sys = gram_system(p, &basis, m);
                if y.len() != sys.num_rows() {
                    return Ok(false);
                }
                let yb: Rat = y.iter().zip(&sys.rhs).map(|(a, b)| a * b).sum();
                Ok(!yb.is_zero() && sys.transpose_apply(y).iter().all(Zero::is_zero))
            }
        }
    }
}

/// Variables `d_i = |v_i|^2`. Rows: `d_t = 0` for vanished labels, the unit
/// rows, and the norm identity of every identification term whose partners
/// are pairwise orthogonal.
pub fn diagonal_system(p: &GramProblem, vanished: &[bool]) -> LinearSystem {
    let zeros = p.zero_set();
    let orth = |i: usize, j: usize| zeros.contains(&(i.min(j), i.max(j)));
    let mut sys = LinearSystem::new(p.labels.clone(), Domain::NonnegRational);
    for (t, &z) in vanished.iter().enumerate() {
        if z {
            sys.add_row([(t, int(1))], Rat::zero());
        }
    }
    for row in &p.unit_rows {
        sys.add_row(row.iter().map(|&i| (i, int(1))), int(1));
    }
    for row in &p.identifications {
        let live: Vec<&(usize, Rat)> = row.iter().filter(|(i, c)| !vanished[*i] && !c.is_zero()).collect();
        if live.len() < 2 {
            continue;
        }
        for (ti, (t, ct)) in live.iter().enumerate() {
            let others: Vec<&(usize, Rat)> = live.iter().enumerate().filter(|e| e.0 != ti).map(|e| *e.1).collect();
            let pairwise = others.iter().enumerate().all(|(a, x)| others[a + 1..].iter().all(|y| orth(x.0, y.0)));
            if !pairwise {
                continue;
            }
            let mut r = vec![(*t, ct * ct)];
            r.extend(others.iter().map(|(j, cj)| (*j, -(cj * cj))));
            sys.add_row(r, Rat::zero());
        }
    }
    sys
}

/// Rows of `N` (one per label, sparse over `m` coordinates) for the
/// identifications plus `v_t = 0` on vanished labels.
fn nullspace(p: &GramProblem, vanished: &[bool]) -> (Vec<Vec<(usize, Rat)>>, usize) {
    let mut rref = Rref::new(p.len());
    for row in &p.identifications {
        rref.insert(row);
    }
    for (t, &z) in vanished.iter().enumerate() {
        if z {
            rref.insert(&[(t, int(1))]);
        }
    }
    let (m, basis) = rref.nullspace_rows();
    (basis, m)
}

/// Index of `K[p][q]` (`p <= q`) in the packed upper triangle.
pub(crate) fn svec_index(m: usize, p: usize, q: usize) -> usize {
    debug_assert!(p <= q && q < m);
    p * m - p * (p + 1) / 2 + q
}

/// Linear constraints on the packed entries of `K`: vanishing inner products
/// and the unit rows, written through `G = N K N^T`.
fn gram_system(p: &GramProblem, basis: &[Vec<(usize, Rat)>], m: usize) -> LinearSystem {
    let s = m * (m + 1) / 2;
    let vars = (0..m).flat_map(|a| (a..m).map(move |b| format!("K[{a},{b}]"))).collect::<Vec<_>>();
    debug_assert_eq!(vars.len(), s);
    let mut sys = LinearSystem::new(vars, Domain::NonnegRational);
    let entry = |i: usize, j: usize, out: &mut Vec<(usize, Rat)>, scale: &Rat| {
        for (a, x) in &basis[i] {
            for (b, y) in &basis[j] {
                out.push((svec_index(m, *a.min(b), *a.max(b)), scale * x * y));
            }
        }
    };
    for &(i, j) in &p.zero_entries {
        if basis[i].is_empty() || basis[j].is_empty() {
            continue;
        }
        let mut row = Vec::new();
        entry(i, j, &mut row, &Rat::one());
        sys.add_row(row, Rat::zero());
        if sys.rows.last().is_some_and(Vec::is_empty) {
            sys.rows.pop();
            sys.rhs.pop();
        }
    }
    for row in &p.unit_rows {
        let mut r = Vec::new();
        for &i in row {
            entry(i, i, &mut r, &Rat::one());
        }
        sys.add_row(r, int(1));
    }
    sys
}

/// A consistent problem in the coordinates of `K`.
#[derive(Clone, Debug)]
pub struct ReducedProblem {
    pub problem: GramProblem,
    /// `N`, one sparse row per label over `dim` coordinates.
    pub basis: Vec<Vec<(usize, Rat)>>,
    pub dim: usize,
    pub vanished: Vec<bool>,
    pub steps: Vec<Step>,
    /// Independent linear constraints on the packed upper triangle of `K`.
    pub gram_system: LinearSystem,
}

#[derive(Clone, Debug)]
pub enum Reduction {
    Reduced(ReducedProblem),
    Inconsistent(Refutation),
}

fn forced_steps(p: &GramProblem, rows: &mut Vec<Vec<(usize, Rat)>>, vanished: &mut [bool], targets: &[usize]) -> Vec<Step> {
    let mut steps = Vec::new();
    for &t in targets {
        if vanished[t] {
            continue;
        }
        let combination = express(p.len(), rows, &[(t, int(1))]).expect("label vanishes in the nullspace");
        steps.push(Step::Forced { i: t, combination });
        vanished[t] = true;
        rows.push(vec![(t, int(1))]);
    }
    steps
}

pub fn affine_reduce(p: &GramProblem) -> Result<Reduction> {
    p.check()?;
    let n = p.len();
    let mut rref = Rref::new(n);
    for row in &p.identifications {
        rref.insert(row);
    }
    let mut rows = p.identifications.clone();
    let mut vanished = vec![false; n];
    let mut steps = Vec::new();
    let (m, basis) = loop {
        let (m, basis) = rref.nullspace_rows();
        // n_i = scale_i * key_i with the key normalised to a leading 1.
        let mut keyed: HashMap<Vec<(usize, Rat)>, Vec<(usize, Rat)>> = HashMap::new();
        let mut scale = vec![Rat::zero(); n];
        for (i, row) in basis.iter().enumerate() {
            if let Some((_, lead)) = row.first() {
                scale[i] = lead.clone();
                let key: Vec<(usize, Rat)> = row.iter().map(|(c, v)| (*c, v / lead)).collect();
                keyed.entry(key).or_default().push((i, lead.clone()));
            }
        }
        let mut group = vec![usize::MAX; n];
        for (g, members) in keyed.values().enumerate() {
            for (i, _) in members {
                group[*i] = g;
            }
        }
        let hit = p
            .zero_entries
            .iter()
            .copied()
            .filter(|&(i, j)| group[i] != usize::MAX && group[i] == group[j])
            .min();
        let Some((i, j)) = hit else { break (m, basis) };
        let c = &scale[i] / &scale[j];
        let target = vec![(i, int(1)), (j, -c.clone())];
        let combination = express(n, &rows, &target).expect("collinear labels differ by an identification");
        steps.push(Step::Collinear { i, j, c, combination });
        for t in [i, j] {
            vanished[t] = true;
            rows.push(vec![(t, int(1))]);
            rref.insert(&[(t, int(1))]);
        }
    };
    let zero: Vec<usize> = (0..n).filter(|&i| basis[i].is_empty()).collect();
    if let Some(u) = p.unit_rows.iter().position(|row| row.iter().all(|&i| basis[i].is_empty())) {
        let extra = forced_steps(p, &mut rows, &mut vanished, &p.unit_rows[u]);
        steps.extend(extra);
        return Ok(Reduction::Inconsistent(Refutation::Vanishing { steps, unit_row: u }));
    }
    let mut all_zero = vanished.clone();
    for &z in &zero {
        all_zero[z] = true;
    }
    let diag = diagonal_system(p, &all_zero);
    if let Verdict::Reject(farkas) = lp_feasible(&diag)? {
        let extra = forced_steps(p, &mut rows, &mut vanished, &zero);
        steps.extend(extra);
        return Ok(Reduction::Inconsistent(Refutation::Diagonal { steps, farkas }));
    }
    let full = gram_system(p, &basis, m);
    let rr = row_reduce(&full);
    if let Some(y) = rr.inconsistent {
        let extra = forced_steps(p, &mut rows, &mut vanished, &zero);
        steps.extend(extra);
        return Ok(Reduction::Inconsistent(Refutation::GramLinear { steps, y }));
    }
    let mut gram = LinearSystem::new(full.vars.clone(), Domain::NonnegRational);
    for &r in &rr.independent {
        gram.rows.push(full.rows[r].clone());
        gram.rhs.push(full.rhs[r].clone());
    }
    Ok(Reduction::Reduced(ReducedProblem { problem: p.clone(), basis, dim: m, vanished: all_zero, steps, gram_system: gram }))
}
