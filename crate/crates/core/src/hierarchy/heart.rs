//! Sherali-Adams in its local-distribution form, on the raw structures.
//!
//! Variables are `mu[V](f)` for every atom set `V` with `1 <= |V| <= k` and
//! every `f: V -> A`, and `mu[R,x](a)` for every constraint `x in R^X` and
//! `a in R^A` consistent with `x` (so `a` is a function of the atoms of `x`).
//! Each family is a distribution and marginals agree on every shared set of
//! at most `k` atoms.

use std::collections::HashMap;

use num_traits::Zero;

use crate::budget::Budget;
use crate::error::Result;
use crate::exact::{lp_feasible, Certificate, Domain, LinearSystem};
use crate::homomorphism::subsets_of_size;
use crate::rational::{int, Rat};
use crate::structure::{encode, lex_tuples, Structure};
use crate::tensor::precedes_unchecked;
use crate::verdict::Verdict;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MuKey {
    /// A sorted atom set and the values on it.
    Local { set: Vec<usize>, values: Vec<usize> },
    Constraint { symbol: String, x: Vec<usize>, a: Vec<usize> },
}

#[derive(Clone, Debug)]
pub struct HeartSystem {
    pub level: usize,
    pub keys: Vec<MuKey>,
    pub system: LinearSystem,
}

fn label(key: &MuKey, x: &Structure, a: &Structure) -> String {
    let xs = |v: &[usize]| v.iter().map(|&u| x.atom(u).to_string()).collect::<Vec<_>>().join(",");
    let as_ = |v: &[usize]| v.iter().map(|&u| a.atom(u).to_string()).collect::<Vec<_>>().join(",");
    match key {
        MuKey::Local { set, values } => format!("{{{}}}|({})", xs(set), as_(values)),
        MuKey::Constraint { symbol, x: t, a: b } => format!("{symbol}|({})|({})", xs(t), as_(b)),
    }
}

pub fn build_heart_system(x: &Structure, a: &Structure, k: usize, budget: &Budget) -> Result<HeartSystem> {
    x.same_signature(a)?;
    let (nx, na) = (x.size(), a.size());
    let mut estimate: u128 = 0;
    for s in 1..=k.min(nx) {
        estimate += subsets_of_size(nx, s).len() as u128 * (na as u128).pow(s as u32);
    }
    for (s, r) in x.relations() {
        estimate += r.len() as u128 * a.relation(s).expect("same signature").len() as u128;
    }
    budget.check_tuples(estimate, "local distribution variables")?;

    let mut keys = Vec::new();
    let mut index: HashMap<MuKey, usize> = HashMap::new();
    let mut push = |key: MuKey, keys: &mut Vec<MuKey>| {
        index.insert(key.clone(), keys.len());
        keys.push(key);
    };
    let mut sets: Vec<Vec<usize>> = Vec::new();
    for s in 1..=k.min(nx) {
        for set in subsets_of_size(nx, s) {
            for values in lex_tuples(na, s) {
                push(MuKey::Local { set: set.clone(), values }, &mut keys);
            }
            sets.push(set);
        }
    }
    let mut constraints: Vec<(String, Vec<usize>, Vec<Vec<usize>>)> = Vec::new();
    for (s, rx) in x.relations() {
        let ra = a.relation(s).expect("same signature");
        for xt in rx.tuples() {
            let ok: Vec<Vec<usize>> = ra.tuples().iter().filter(|at| precedes_unchecked(xt, at)).cloned().collect();
            for at in &ok {
                push(MuKey::Constraint { symbol: s.clone(), x: xt.clone(), a: at.clone() }, &mut keys);
            }
            constraints.push((s.clone(), xt.clone(), ok));
        }
    }
    let names = keys.iter().map(|key| label(key, x, a)).collect();
    let mut sys = LinearSystem::new(names, Domain::NonnegRational);
    let one = int(1);
    let local = |set: &[usize], values: Vec<usize>| index[&MuKey::Local { set: set.to_vec(), values }];

    for set in &sets {
        sys.add_row(lex_tuples(na, set.len()).into_iter().map(|f| (local(set, f), one.clone())), one.clone());
    }
    // Each subset U of V with one fewer atom; chaining covers the rest.
    for set in sets.iter().filter(|s| s.len() >= 2) {
        for drop in 0..set.len() {
            let sub: Vec<usize> = set.iter().enumerate().filter(|p| p.0 != drop).map(|p| *p.1).collect();
            let mut groups: Vec<Vec<usize>> = vec![Vec::new(); na.pow(sub.len() as u32)];
            for g in lex_tuples(na, set.len()) {
                let restricted = g.iter().enumerate().filter(|p| p.0 != drop).map(|p| *p.1);
                groups[encode(restricted, na)].push(local(set, g));
            }
            for (fi, f) in lex_tuples(na, sub.len()).into_iter().enumerate() {
                let mut row: Vec<(usize, Rat)> = groups[fi].iter().map(|&v| (v, one.clone())).collect();
                row.push((local(&sub, f), -one.clone()));
                sys.add_row(row, Rat::zero());
            }
        }
    }
    for (symbol, xt, ok) in &constraints {
        let vars: Vec<usize> = ok
            .iter()
            .map(|at| index[&MuKey::Constraint { symbol: symbol.clone(), x: xt.clone(), a: at.clone() }])
            .collect();
        sys.add_row(vars.iter().map(|&v| (v, one.clone())), one.clone());
        let mut atoms = xt.clone();
        atoms.sort_unstable();
        atoms.dedup();
        for s in 1..=k.min(atoms.len()) {
            for pick in subsets_of_size(atoms.len(), s) {
                let sub: Vec<usize> = pick.iter().map(|&p| atoms[p]).collect();
                let pos: Vec<usize> = sub.iter().map(|u| xt.iter().position(|v| v == u).expect("atom of x")).collect();
                let mut groups: Vec<Vec<usize>> = vec![Vec::new(); na.pow(s as u32)];
                for (at, &v) in ok.iter().zip(&vars) {
                    groups[encode(pos.iter().map(|&p| at[p]), na)].push(v);
                }
                for (fi, f) in lex_tuples(na, s).into_iter().enumerate() {
                    let mut row: Vec<(usize, Rat)> = groups[fi].iter().map(|&v| (v, one.clone())).collect();
                    row.push((local(&sub, f), -one.clone()));
                    sys.add_row(row, Rat::zero());
                }
            }
        }
    }
    Ok(HeartSystem { level: k, keys, system: sys })
}

pub type SaAltVerdict = Verdict<Vec<Rat>, Certificate>;

pub fn sa_alt(x: &Structure, a: &Structure, k: usize, budget: &Budget) -> Result<(HeartSystem, SaAltVerdict)> {
    let system = build_heart_system(x, a, k, budget)?;
    let verdict = lp_feasible(&system.system)?;
    Ok((system, verdict))
}
