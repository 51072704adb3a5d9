//! The vector relaxations: basic SDP and the SoS^k hierarchy, each assembled
//! as a [`GramProblem`], plus checks of the inner-product facts every
//! solution must satisfy.

use serde_json::{json, Value};

use crate::budget::Budget;
use crate::error::Result;
use crate::psd::{gram_to_vectors, solve_gram, GramProblem, GramVerdict, PsdConfig, SoSWitness};
use crate::rational::{int, Rat};
use crate::structure::{enhancement_symbol, lex_tuples, Structure};

use super::club::{build_club_system, ClubSystem, LambdaKey};

/// Where each SDP label lives in the Gram problem.
#[derive(Clone, Debug)]
pub struct SdpLayout {
    pub nx: usize,
    pub na: usize,
    /// `(symbol, x, [(a, label)])` for every constraint of `X`.
    pub constraints: Vec<(String, Vec<usize>, Vec<(Vec<usize>, usize)>)>,
}

impl SdpLayout {
    /// Label of `lambda[x, a]`.
    pub fn var(&self, x: usize, a: usize) -> usize {
        x * self.na + a
    }
}

#[derive(Clone, Debug)]
pub struct SdpRun {
    pub problem: GramProblem,
    pub layout: SdpLayout,
    pub verdict: GramVerdict,
}

pub fn build_sdp_problem(x: &Structure, a: &Structure, budget: &Budget) -> Result<(GramProblem, SdpLayout)> {
    x.same_signature(a)?;
    let (nx, na) = (x.size(), a.size());
    let mut estimate = (nx * na) as u128;
    for (s, r) in x.relations() {
        estimate += r.len() as u128 * a.relation(s).expect("same signature").len() as u128;
    }
    budget.check_tuples(estimate, "SDP vectors")?;

    let mut labels = Vec::new();
    for u in 0..nx {
        for v in 0..na {
            labels.push(format!("{}->{}", x.atom(u), a.atom(v)));
        }
    }
    let mut constraints = Vec::new();
    for (s, rx) in x.relations() {
        let ra = a.relation(s).expect("same signature");
        for xt in rx.tuples() {
            let mut group = Vec::new();
            for at in ra.tuples() {
                let key = LambdaKey { symbol: s.clone(), x: xt.clone(), a: at.clone() };
                group.push((at.clone(), labels.len()));
                labels.push(key.label(x, a));
            }
            constraints.push((s.clone(), xt.clone(), group));
        }
    }
    let layout = SdpLayout { nx, na, constraints };
    let mut p = GramProblem::new(labels);
    for u in 0..nx {
        p.unit_rows.push((0..na).map(|v| layout.var(u, v)).collect());
        for v in 0..na {
            for w in v + 1..na {
                p.add_zero(layout.var(u, v), layout.var(u, w));
            }
        }
    }
    for (_, xt, group) in &layout.constraints {
        for (gi, (_, li)) in group.iter().enumerate() {
            for (_, lj) in &group[gi + 1..] {
                p.add_zero(*li, *lj);
            }
        }
        for (i, &xi) in xt.iter().enumerate() {
            for v in 0..na {
                let mut row: Vec<(usize, Rat)> = group.iter().filter(|(at, _)| at[i] == v).map(|(_, l)| (*l, int(1))).collect();
                row.push((layout.var(xi, v), int(-1)));
                p.identifications.push(row);
            }
        }
    }
    Ok((p, layout))
}

pub fn sdp(x: &Structure, a: &Structure, budget: &Budget, cfg: &PsdConfig) -> Result<SdpRun> {
    let (problem, layout) = build_sdp_problem(x, a, budget)?;
    let verdict = solve_gram(&problem, cfg)?;
    Ok(SdpRun { problem, layout, verdict })
}

#[derive(Clone, Debug)]
pub struct SosRun {
    pub system: ClubSystem,
    pub problem: GramProblem,
    pub verdict: GramVerdict,
}

/// Vectors indexed like the lift-and-project variables: unit rows and zero
/// entries per constraint, identifications from the marginal rows.
pub fn build_sos_problem(x: &Structure, a: &Structure, k: usize, budget: &Budget) -> Result<(ClubSystem, GramProblem)> {
    let system = build_club_system(x, a, k, budget)?;
    let labels = system.system.vars.clone();
    let mut p = GramProblem::new(labels);
    for (row, rhs) in system.system.rows.iter().zip(&system.system.rhs) {
        if rhs == &int(1) {
            let group: Vec<usize> = row.iter().map(|e| e.0).collect();
            for (gi, &i) in group.iter().enumerate() {
                for &j in &group[gi + 1..] {
                    p.add_zero(i, j);
                }
            }
            p.unit_rows.push(group);
        } else {
            p.identifications.push(row.clone());
        }
    }
    Ok((system, p))
}

pub fn sos(x: &Structure, a: &Structure, k: usize, budget: &Budget, cfg: &PsdConfig) -> Result<SosRun> {
    let (system, problem) = build_sos_problem(x, a, k, budget)?;
    let verdict = solve_gram(&problem, cfg)?;
    Ok(SosRun { system, problem, verdict })
}

/// Squared norms of an accepted SoS solution, read as a point of the
/// lift-and-project system.
pub fn diagonal_point(w: &SoSWitness) -> Vec<f64> {
    (0..w.gram.len()).map(|i| w.gram[i][i]).collect()
}

/// Largest violation of the lift-and-project rows, including negativity.
pub fn club_violation(sys: &ClubSystem, d: &[f64]) -> f64 {
    let rows = sys.system.rows.iter().zip(&sys.system.rhs);
    let eq = rows
        .map(|(row, b)| (row.iter().map(|(j, c)| crate::rational::to_f64(c) * d[*j]).sum::<f64>() - crate::rational::to_f64(b)).abs())
        .fold(0.0, f64::max);
    d.iter().fold(eq, |acc, &v| acc.max(-v))
}

/// Outcome of a family of numeric identities.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FactReport {
    pub checked: usize,
    pub max_error: f64,
    pub violations: Vec<String>,
}

impl FactReport {
    fn record(&mut self, name: impl FnOnce() -> String, err: f64, tol: f64) {
        self.checked += 1;
        self.max_error = self.max_error.max(err);
        // Negated so that NaN counts as a violation.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(err <= tol) {
            self.violations.push(format!("{}: error {err:e}", name()));
        }
    }

    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({ "checked": self.checked, "max_error": self.max_error, "violations": self.violations })
    }
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn sum_of(vectors: &[Vec<f64>], idx: impl Iterator<Item = usize>, dim: usize) -> Vec<f64> {
    let mut acc = vec![0.0; dim];
    for i in idx {
        for (s, v) in acc.iter_mut().zip(&vectors[i]) {
            *s += v;
        }
    }
    acc
}

fn is_full_square(s: &Structure, symbol: &str) -> bool {
    s.relation(symbol).is_some_and(|r| r.arity() == 2 && r.len() == s.size() * s.size())
}

/// The consequences of the SDP constraints on extracted vectors. The
/// equal-sum fact needs both structures to carry the full binary relation.
pub fn check_sdp_facts(vectors: &[Vec<f64>], layout: &SdpLayout, x: &Structure, a: &Structure, tol: f64) -> FactReport {
    let mut rep = FactReport::default();
    let dim = vectors.first().map_or(0, Vec::len);
    let na = layout.na;
    let sums: Vec<Vec<f64>> = (0..layout.nx).map(|u| sum_of(vectors, (0..na).map(|v| layout.var(u, v)), dim)).collect();
    for (u, s) in sums.iter().enumerate() {
        rep.record(|| format!("(i) at {}", x.atom(u)), (dot(s, s) - 1.0).abs(), tol);
    }
    for (symbol, xt, group) in &layout.constraints {
        let norms: f64 = group.iter().map(|(_, l)| dot(&vectors[*l], &vectors[*l])).sum();
        let total = sum_of(vectors, group.iter().map(|g| g.1), dim);
        let name = || format!("(ii) at {symbol}{xt:?}");
        rep.record(name, (norms - 1.0).abs().max((dot(&total, &total) - 1.0).abs()), tol);
        for i in 0..xt.len() {
            for j in 0..xt.len() {
                for v in 0..na {
                    for w in 0..na {
                        let lhs: f64 = group
                            .iter()
                            .filter(|(at, _)| at[i] == v && at[j] == w)
                            .map(|(_, l)| dot(&vectors[*l], &vectors[*l]))
                            .sum();
                        let rhs = dot(&vectors[layout.var(xt[i], v)], &vectors[layout.var(xt[j], w)]);
                        rep.record(|| format!("(iii) at {symbol}{xt:?} i={i} j={j} a={v} a'={w}"), (lhs - rhs).abs(), tol);
                    }
                }
            }
        }
    }
    let r2 = enhancement_symbol(2);
    if is_full_square(x, &r2) && is_full_square(a, &r2) {
        for u in 1..layout.nx {
            let err = sums[0].iter().zip(&sums[u]).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
            rep.record(|| format!("(iv) between {} and {}", x.atom(0), x.atom(u)), err, tol);
        }
    }
    rep
}

/// Pairwise facts on the diagonal vectors `lambda[R_2k, (x,x), (a,a)]` of
/// an SoS^2k solution, with `x, y in X^k` and `a, b in A^k`.
pub fn check_sos_pair_facts(vectors: &[Vec<f64>], sys: &ClubSystem, k: usize, tol: f64) -> FactReport {
    let mut rep = FactReport::default();
    let dim = vectors.first().map_or(0, Vec::len);
    let zero = vec![0.0; dim];
    let symbol = enhancement_symbol(2 * k);
    let (nx, na) = (sys.x.size(), sys.a.size());
    let vec_of = |x: &[usize], a: &[usize]| -> &[f64] {
        let key = LambdaKey { symbol: symbol.clone(), x: [x, x].concat(), a: [a, a].concat() };
        sys.var(&key).map_or(&zero[..], |i| &vectors[i][..])
    };
    let xs = lex_tuples(nx, k);
    let as_ = lex_tuples(na, k);
    let perms = permutations(2 * k);
    let mut prods = std::collections::HashMap::new();
    for x in &xs {
        for a in &as_ {
            for y in &xs {
                for b in &as_ {
                    prods.insert((x.clone(), a.clone(), y.clone(), b.clone()), dot(vec_of(x, a), vec_of(y, b)));
                }
            }
        }
    }
    for ((x, a, y, b), &pr) in &prods {
        rep.record(|| format!("(i) at {x:?}{a:?} {y:?}{b:?}"), (-pr).max(0.0), tol);
        let conflict = (0..k).any(|p| (0..k).any(|q| x[p] == y[q] && a[p] != b[q]));
        if conflict {
            rep.record(|| format!("(ii) at {x:?}{a:?} {y:?}{b:?}"), pr.abs(), tol);
        }
        let xy = [x.as_slice(), y.as_slice()].concat();
        let ab = [a.as_slice(), b.as_slice()].concat();
        for l in &perms {
            // (x^, y^)_l = (x, y): position l[t] of the hatted tuple holds entry t.
            let mut hx = vec![0; 2 * k];
            let mut ha = vec![0; 2 * k];
            for t in 0..2 * k {
                hx[l[t]] = xy[t];
                ha[l[t]] = ab[t];
            }
            let other = prods[&(hx[..k].to_vec(), ha[..k].to_vec(), hx[k..].to_vec(), ha[k..].to_vec())];
            rep.record(|| format!("(iii) at {x:?}{a:?} {y:?}{b:?} under {l:?}"), (pr - other).abs(), tol);
        }
    }
    rep
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    fn rec(i: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for j in i..cur.len() {
            cur.swap(i, j);
            rec(i + 1, cur, out);
            cur.swap(i, j);
        }
    }
    rec(0, &mut cur, &mut out);
    out
}

/// Vectors of an accepted run, one per label.
pub fn extract_vectors(w: &SoSWitness) -> Result<Vec<Vec<f64>>> {
    gram_to_vectors(&w.gram, 1e-9)
}
