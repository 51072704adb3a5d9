//! Numerical search for `K >= 0` on the reduced parametrisation.
//!
//! Alternating projections between the affine set cut out by the exact
//! constraint rows and the PSD cone. Packed coordinates scale off-diagonal
//! entries by `sqrt 2`, so both projections are orthogonal in the Frobenius
//! metric. Feasible sets here are usually lower-dimensional faces of the
//! cone, where plain alternation crawls, so the iterate is periodically
//! polished by Gauss-Newton on a factor `K = W W^T`, which stays PSD by
//! construction.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde_json::{json, Value};

use super::reduce::{affine_reduce, svec_index, ReducedProblem, Reduction, Refutation};
use super::GramProblem;
use crate::error::{Error, Result};
use crate::rational::to_f64;
use crate::verdict::{NumericDiagnostics, Verdict};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsdConfig {
    pub accept_tol: f64,
    pub reject_floor: f64,
    /// Iterations without a 1% improvement, above `reject_floor`, before giving up.
    pub stall_window: usize,
    pub max_iter: usize,
    /// Deterministic cap on arithmetic, counted as `m^3 + c^2` per
    /// projection step and `c^3 / 3` per polishing step, for dimension `m`
    /// and `c` constraint rows.
    pub work_limit: f64,
}

impl Default for PsdConfig {
    fn default() -> Self {
        PsdConfig { accept_tol: 1e-8, reject_floor: 1e-4, stall_window: 2_000, max_iter: 100_000, work_limit: 1e10 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SoSWitness {
    pub labels: Vec<String>,
    /// Symmetric, indexed like `labels`.
    pub gram: Vec<Vec<f64>>,
    /// Largest violation of any original constraint.
    pub residual: f64,
    pub min_eig: f64,
    pub iterations: usize,
}

impl SoSWitness {
    pub fn to_json(&self) -> Value {
        json!({
            "labels": self.labels,
            "gram": self.gram,
            "residual": self.residual,
            "min_eig": self.min_eig,
            "iterations": self.iterations,
        })
    }

    pub fn index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

pub type GramVerdict = Verdict<SoSWitness, Refutation>;

/// One linear functional on `K`, as `(p, q, coefficient of K[p][q])` with `p <= q`.
type Functional = Vec<(usize, usize, f64)>;

struct Affine {
    /// Rows in packed scaled coordinates.
    rows: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    functionals: Vec<Functional>,
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

fn pack(m: usize) -> Vec<(usize, usize)> {
    (0..m).flat_map(|p| (p..m).map(move |q| (p, q))).collect()
}

impl Affine {
    fn new(r: &ReducedProblem) -> Affine {
        let m = r.dim;
        let pairs = pack(m);
        let sqrt2 = std::f64::consts::SQRT_2;
        let mut rows = Vec::new();
        let mut functionals = Vec::new();
        for row in &r.gram_system.rows {
            let mut packed: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            let mut f = Vec::with_capacity(row.len());
            for (k, c) in row {
                let (p, q) = pairs[*k];
                let c = to_f64(c);
                f.push((p, q, c));
                packed.push((*k, if p == q { c } else { c / sqrt2 }));
            }
            rows.push(packed);
            functionals.push(f);
        }
        let rhs: Vec<f64> = r.gram_system.rhs.iter().map(to_f64).collect();
        let c = rows.len();
        let mut h = DMatrix::<f64>::zeros(c, c);
        for i in 0..c {
            for j in i..c {
                let d = sparse_dot(&rows[i], &rows[j]);
                h[(i, j)] = d;
                h[(j, i)] = d;
            }
        }
        let chol = match h.clone().cholesky() {
            Some(ch) => ch,
            None => {
                let ridge = 1e-12 * (1.0 + h.diagonal().max());
                (h + DMatrix::identity(c, c) * ridge).cholesky().expect("ridged Gram matrix of independent rows")
            }
        };
        Affine { rows, rhs, functionals, chol }
    }

    fn violation(&self, y: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .zip(&self.rhs)
            .map(|(row, b)| row.iter().map(|(k, v)| v * y[*k]).sum::<f64>() - b)
            .collect()
    }

    fn project(&self, y: &mut [f64]) {
        if self.rows.is_empty() {
            return;
        }
        let z = self.chol.solve(&DVector::from_vec(self.violation(y)));
        for (row, zi) in self.rows.iter().zip(z.iter()) {
            for (k, v) in row {
                y[*k] -= v * zi;
            }
        }
    }
}

fn sparse_dot(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let (mut i, mut j, mut acc) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

fn unpack(m: usize, y: &[f64]) -> DMatrix<f64> {
    let inv = std::f64::consts::FRAC_1_SQRT_2;
    let mut k = DMatrix::zeros(m, m);
    for p in 0..m {
        for q in p..m {
            let v = y[svec_index(m, p, q)];
            if p == q {
                k[(p, p)] = v;
            } else {
                k[(p, q)] = v * inv;
                k[(q, p)] = v * inv;
            }
        }
    }
    k
}

fn packv(k: &DMatrix<f64>) -> Vec<f64> {
    let m = k.nrows();
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut y = vec![0.0; m * (m + 1) / 2];
    for p in 0..m {
        for q in p..m {
            y[svec_index(m, p, q)] = if p == q { k[(p, p)] } else { 0.5 * (k[(p, q)] + k[(q, p)]) * sqrt2 };
        }
    }
    y
}

/// Eigenpairs sorted by decreasing eigenvalue.
fn eigen_sorted(k: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let e = SymmetricEigen::new(k.clone());
    let mut order: Vec<usize> = (0..k.nrows()).collect();
    order.sort_by(|&a, &b| e.eigenvalues[b].total_cmp(&e.eigenvalues[a]));
    let vals = order.iter().map(|&i| e.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(k.nrows(), k.nrows(), |r, c| e.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

fn clamp_psd(vals: &[f64], vecs: &DMatrix<f64>) -> DMatrix<f64> {
    let m = vals.len();
    let mut out = DMatrix::zeros(m, m);
    for (c, &l) in vals.iter().enumerate() {
        if l > 0.0 {
            let u = vecs.column(c);
            out += (u * u.transpose()) * l;
        }
    }
    out
}

/// Vectors `v_i = N_i F` with `K = F F^T`, the Gram matrix and the largest
/// original constraint violation.
fn evaluate(r: &ReducedProblem, k: &DMatrix<f64>) -> (Vec<Vec<f64>>, Vec<Vec<f64>>, f64, f64) {
    let m = r.dim;
    let p = &r.problem;
    let (vals, vecs) = if m > 0 { eigen_sorted(k) } else { (Vec::new(), DMatrix::zeros(0, 0)) };
    let factor = DMatrix::from_fn(m, m, |a, c| vecs[(a, c)] * vals[c].max(0.0).sqrt());
    let vectors: Vec<Vec<f64>> = r
        .basis
        .iter()
        .map(|row| {
            let mut v = vec![0.0; m];
            for (a, x) in row {
                let x = to_f64(x);
                for (c, slot) in v.iter_mut().enumerate() {
                    *slot += x * factor[(*a, c)];
                }
            }
            v
        })
        .collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let n = vectors.len();
    let mut gram = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let d = dot(&vectors[i], &vectors[j]);
            gram[i][j] = d;
            gram[j][i] = d;
        }
    }
    let mut residual: f64 = 0.0;
    for &(i, j) in &p.zero_entries {
        residual = residual.max(gram[i][j].abs());
    }
    for row in &p.unit_rows {
        residual = residual.max((row.iter().map(|&i| gram[i][i]).sum::<f64>() - 1.0).abs());
    }
    for row in &p.identifications {
        let mut acc = vec![0.0; m];
        for (i, c) in row {
            let c = to_f64(c);
            for (s, v) in acc.iter_mut().zip(&vectors[*i]) {
                *s += c * v;
            }
        }
        residual = residual.max(acc.iter().fold(0.0, |a, v| a.max(v.abs())));
    }
    // f64::max drops NaN, so non-finite entries must be caught explicitly.
    if gram.iter().flatten().any(|v| !v.is_finite()) {
        residual = f64::INFINITY;
    }
    let min_eig = if n == 0 {
        0.0
    } else {
        let g = DMatrix::from_fn(n, n, |a, b| gram[a][b]);
        SymmetricEigen::new(g).eigenvalues.min()
    };
    (vectors, gram, residual, min_eig)
}

fn witness(r: &ReducedProblem, k: &DMatrix<f64>, iterations: usize) -> SoSWitness {
    let (_, gram, residual, min_eig) = evaluate(r, k);
    SoSWitness { labels: r.problem.labels.clone(), gram, residual, min_eig, iterations }
}

/// `<A_i, W W^T> - b_i` for every functional.
fn factor_residual(aff: &Affine, w: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_iterator(
        aff.functionals.len(),
        aff.functionals.iter().zip(&aff.rhs).map(|(f, b)| {
            f.iter().map(|&(p, q, c)| c * w.row(p).dot(&w.row(q))).sum::<f64>() - b
        }),
    )
}

/// Gradient of each functional with respect to `W`, as sparse rows of `W`.
fn factor_gradients(aff: &Affine, w: &DMatrix<f64>) -> Vec<Vec<(usize, DVector<f64>)>> {
    aff.functionals
        .iter()
        .map(|f| {
            let mut rows: Vec<(usize, DVector<f64>)> = Vec::new();
            let mut add = |r: usize, v: DVector<f64>| match rows.iter_mut().find(|e| e.0 == r) {
                Some(e) => e.1 += v,
                None => rows.push((r, v)),
            };
            for &(p, q, c) in f {
                if p == q {
                    add(p, w.row(p).transpose() * (2.0 * c));
                } else {
                    add(p, w.row(q).transpose() * c);
                    add(q, w.row(p).transpose() * c);
                }
            }
            rows
        })
        .collect()
}

/// `J J^T` from sparse gradients, accumulated per row of `W` so only
/// functionals sharing a row interact.
fn normal_matrix(grads: &[Vec<(usize, DVector<f64>)>], m: usize) -> DMatrix<f64> {
    let c = grads.len();
    let mut by_row: Vec<Vec<(usize, &DVector<f64>)>> = vec![Vec::new(); m];
    for (i, g) in grads.iter().enumerate() {
        for (r, v) in g {
            by_row[*r].push((i, v));
        }
    }
    let mut h = DMatrix::<f64>::zeros(c, c);
    for list in &by_row {
        for (a, &(i, gi)) in list.iter().enumerate() {
            for &(j, gj) in &list[a..] {
                let d = gi.dot(gj);
                h[(i, j)] += d;
                if i != j {
                    h[(j, i)] += d;
                }
            }
        }
    }
    h
}

const POLISH_STEPS: usize = 400;
/// Polishing factors dense normal equations with one row per functional;
/// beyond this size only the projection loop runs.
const POLISH_LIMIT: usize = 1200;
const POLISH_WINDOW: usize = 30;

/// Damped Gauss-Newton on a factor `K = W W^T`, started from the PSD
/// iterate. Minimum-norm steps suit the underdetermined systems here.
/// Steps are accepted on the Euclidean residual, which Gauss-Newton
/// actually decreases. Success needs the largest entry below `accept` and
/// `done` to approve the iterate, since the independent rows kept here can
/// undercount violations of the dropped dependent ones. Gives up once the
/// residual fails to halve within `POLISH_WINDOW` steps.
fn polish(
    aff: &Affine,
    vals: &[f64],
    vecs: &DMatrix<f64>,
    accept: f64,
    done: impl Fn(&DMatrix<f64>) -> bool,
    steps: &mut usize,
) -> Option<DMatrix<f64>> {
    let m = vals.len();
    let c = aff.functionals.len();
    let mut w = DMatrix::from_fn(m, m, |a, b| vecs[(a, b)] * vals[b].max(0.0).sqrt());
    let mut r = factor_residual(aff, &w);
    let mut norm = r.norm();
    let mut mu = 1e-8;
    let mut checkpoint = norm;
    for it in 1..=POLISH_STEPS {
        *steps += 1;
        if it % POLISH_WINDOW == 0 {
            if norm > 0.5 * checkpoint {
                return None;
            }
            checkpoint = norm;
        }
        if !norm.is_finite() {
            return None;
        }
        if r.amax() <= accept {
            let k = &w * w.transpose();
            if done(&k) {
                return Some(k);
            }
        }
        let grads = factor_gradients(aff, &w);
        let h = normal_matrix(&grads, m);
        let scale = h.diagonal().max().max(1e-300);
        let mut improved = false;
        for _ in 0..8 {
            let Some(ch) = (&h + DMatrix::identity(c, c) * (mu * scale)).cholesky() else {
                mu *= 10.0;
                continue;
            };
            let z = ch.solve(&r);
            let mut trial = w.clone();
            for (g, zi) in grads.iter().zip(z.iter()) {
                for (row, v) in g {
                    let mut target = trial.row_mut(*row);
                    target -= v.transpose() * *zi;
                }
            }
            let tr = factor_residual(aff, &trial);
            let tn = tr.norm();
            if tn < norm {
                w = trial;
                r = tr;
                norm = tn;
                mu = (mu * 0.1).max(1e-14);
                improved = true;
                break;
            }
            mu *= 10.0;
        }
        if !improved {
            return None;
        }
    }
    let k = &w * w.transpose();
    (r.amax() <= accept && done(&k)).then_some(k)
}

/// Alternating projections with periodic polishing. Only a numeric search:
/// failure yields diagnostics, never a proof.
pub fn psd_feasibility(r: &ReducedProblem, cfg: &PsdConfig) -> std::result::Result<SoSWitness, NumericDiagnostics> {
    let m = r.dim;
    if m == 0 {
        let w = witness(r, &DMatrix::zeros(0, 0), 0);
        if w.residual <= cfg.accept_tol {
            return Ok(w);
        }
        return Err(NumericDiagnostics { residual: w.residual, iterations: 0, reason: "no free directions".into(), rigorous: false });
    }
    let aff = Affine::new(r);
    let mut y = packv(&DMatrix::identity(m, m));
    aff.project(&mut y);
    let mut best = f64::INFINITY;
    let mut best_at = 0;
    let mut next_polish = 10;
    let mut gap = 10;
    let mut residual = f64::INFINITY;
    let c = aff.functionals.len() as f64;
    let step_work = (m as f64).powi(3) + c * c;
    let mut work = 0.0;
    for it in 1..=cfg.max_iter {
        work += step_work;
        if work > cfg.work_limit {
            return Err(NumericDiagnostics {
                residual,
                iterations: it - 1,
                reason: format!("work limit {:e} reached", cfg.work_limit),
                rigorous: false,
            });
        }
        let k = unpack(m, &y);
        let (vals, vecs) = eigen_sorted(&k);
        let kp = clamp_psd(&vals, &vecs);
        let yp = packv(&kp);
        residual = aff.violation(&yp).iter().fold(0.0, |a, v| a.max(v.abs()));
        if residual <= 0.1 * cfg.accept_tol {
            let w = witness(r, &kp, it);
            if w.residual <= cfg.accept_tol {
                return Ok(w);
            }
        }
        if it >= next_polish && residual < 0.5 && aff.functionals.len() <= POLISH_LIMIT {
            let done = |k: &DMatrix<f64>| evaluate(r, k).2 <= cfg.accept_tol;
            let mut steps = 0;
            let polished = polish(&aff, &vals, &vecs, 0.1 * cfg.accept_tol, done, &mut steps);
            work += steps as f64 * c.powi(3) / 3.0;
            if let Some(kk) = polished {
                let w = witness(r, &kk, it);
                if w.residual <= cfg.accept_tol {
                    return Ok(w);
                }
            }
            gap = (gap * 2).min(500);
            next_polish = it + gap;
        }
        if residual < best * 0.99 {
            best = residual;
            best_at = it;
        } else if it - best_at >= cfg.stall_window && residual >= cfg.reject_floor {
            return Err(NumericDiagnostics {
                residual,
                iterations: it,
                reason: format!("residual stalled above {:e} for {} iterations", cfg.reject_floor, cfg.stall_window),
                rigorous: false,
            });
        }
        // Douglas-Rachford: reflect through the cone, project onto the
        // affine set, and move by the difference.
        let mut z: Vec<f64> = yp.iter().zip(&y).map(|(p, q)| 2.0 * p - q).collect();
        aff.project(&mut z);
        for ((yi, zi), pi) in y.iter_mut().zip(&z).zip(&yp) {
            *yi += zi - pi;
        }
    }
    Err(NumericDiagnostics {
        residual,
        iterations: cfg.max_iter,
        reason: "iteration limit reached".into(),
        rigorous: false,
    })
}

/// Both phases: exact reduction, then the numeric search.
pub fn solve_gram(p: &GramProblem, cfg: &PsdConfig) -> Result<GramVerdict> {
    match affine_reduce(p)? {
        Reduction::Inconsistent(r) => Ok(Verdict::Reject(r)),
        Reduction::Reduced(r) => Ok(match psd_feasibility(&r, cfg) {
            Ok(w) => Verdict::Accept(w),
            Err(d) => Verdict::RejectNumeric(d),
        }),
    }
}

/// Rows `v_i` with `v_i . v_j = G_ij`, of dimension the numerical rank.
pub fn gram_to_vectors(g: &[Vec<f64>], rank_tol: f64) -> Result<Vec<Vec<f64>>> {
    let n = g.len();
    if g.iter().any(|row| row.len() != n) {
        return Err(Error::ShapeMismatch("Gram matrix is not square".into()));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let k = DMatrix::from_fn(n, n, |a, b| 0.5 * (g[a][b] + g[b][a]));
    let (vals, vecs) = eigen_sorted(&k);
    let min = *vals.last().expect("nonempty");
    if min < -rank_tol {
        return Err(Error::NotPsd(min));
    }
    let rank = vals.iter().filter(|&&l| l > rank_tol).count();
    let out: Vec<Vec<f64>> = (0..n).map(|i| (0..rank).map(|c| vecs[(i, c)] * vals[c].sqrt()).collect()).collect();
    if out.iter().flatten().all(|v| v.is_finite()) {
        return Ok(out);
    }
    // The eigen solver occasionally returns NaN vectors on exactly
    // structured inputs; a pivoted Cholesky factor is an equally valid
    // set of vectors.
    pivoted_cholesky(&k, rank_tol)
}

/// `L` with `K = L L^T`, columns stopping once the largest remaining
/// diagonal entry is at most `tol`.
fn pivoted_cholesky(k: &DMatrix<f64>, tol: f64) -> Result<Vec<Vec<f64>>> {
    let n = k.nrows();
    let mut d: Vec<f64> = (0..n).map(|i| k[(i, i)]).collect();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    loop {
        let (p, &dp) = d.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("nonempty");
        if dp <= tol {
            break;
        }
        let root = dp.sqrt();
        let col: Vec<f64> = (0..n)
            .map(|i| {
                let prev: f64 = cols.iter().map(|c| c[i] * c[p]).sum();
                (k[(i, p)] - prev) / root
            })
            .collect();
        for (di, ci) in d.iter_mut().zip(&col) {
            *di -= ci * ci;
        }
        d[p] = 0.0;
        cols.push(col);
    }
    if d.iter().any(|&v| v < -tol.sqrt()) {
        return Err(Error::NotPsd(d.iter().copied().fold(0.0, f64::min)));
    }
    Ok((0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use proptest::prelude::*;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("v{i}")).collect()
    }

    #[test]
    fn identity_and_rank_one() {
        let id = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let v = gram_to_vectors(&id, 1e-9).unwrap();
        assert_eq!(v.len(), 3);
        for i in 0..3 {
            for j in 0..3 {
                let d: f64 = v[i].iter().zip(&v[j]).map(|(a, b)| a * b).sum();
                assert!((d - id[i][j]).abs() < 1e-12);
            }
        }
        let ones = vec![vec![1.0; 3]; 3];
        let v = gram_to_vectors(&ones, 1e-9).unwrap();
        assert!(v.iter().all(|x| x.len() == 1 && (x[0] - v[0][0]).abs() < 1e-12 && (x[0].abs() - 1.0).abs() < 1e-12));
        assert!(matches!(gram_to_vectors(&[vec![-1.0]], 1e-9), Err(Error::NotPsd(_))));
    }

    #[test]
    fn pivoted_cholesky_reproduces_low_rank() {
        let g = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 2.0]);
        let v = pivoted_cholesky(&g, 1e-12).unwrap();
        assert!(v.iter().all(|x| x.len() == 2));
        for i in 0..3 {
            for j in 0..3 {
                let d: f64 = v[i].iter().zip(&v[j]).map(|(a, b)| a * b).sum();
                assert!((d - g[(i, j)]).abs() < 1e-12);
            }
        }
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(pivoted_cholesky(&bad, 1e-12), Err(Error::NotPsd(_))));
    }

    #[test]
    fn orthonormal_frame_is_found() {
        // Three mutually orthogonal vectors, each of norm one, with v3 = v0 + v1 - v2
        // orthogonal to v0: forces a specific low-rank face.
        let mut p = GramProblem::new(labels(4));
        for (i, j) in [(0, 1), (0, 2), (1, 2), (0, 3)] {
            p.add_zero(i, j);
        }
        p.identifications.push(vec![(3, int(1)), (0, int(-1)), (1, int(-1)), (2, int(1))]);
        for i in 0..3 {
            p.unit_rows.push(vec![i]);
        }
        let v = solve_gram(&p, &PsdConfig::default()).unwrap();
        // v3 . v0 = |v0|^2 = 1 contradicts the zero entry, which the norm
        // program does not see but the Gram system does.
        assert!(v.is_reject(), "{v:?}");
        p.zero_entries.pop();
        let w = solve_gram(&p, &PsdConfig::default()).unwrap();
        let w = w.accepted().expect("feasible");
        assert!(w.residual <= 1e-8 && w.min_eig > -1e-8);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn vectors_reproduce_gram(entries in proptest::collection::vec(-1.0f64..1.0, 12)) {
            let a = DMatrix::from_row_slice(4, 3, &entries);
            let g = &a * a.transpose();
            let rows: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| g[(i, j)]).collect()).collect();
            let v = gram_to_vectors(&rows, 1e-12).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    let d: f64 = v[i].iter().zip(&v[j]).map(|(x, y)| x * y).sum();
                    prop_assert!((d - rows[i][j]).abs() < 1e-7);
                }
            }
        }
    }
}
