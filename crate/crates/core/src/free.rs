//! The free structure of the minion H over a finite structure, and the minion
//! test it induces.
//!
//! Elements of `F_H(B)` are nonempty subsets of `B`'s domain, stored as `u64`
//! bitmasks with atom 0 as the least significant bit. A tuple `(M_1..M_r)`
//! lies in `R^F` iff some nonempty `Q ⊆ R^B` has `pi_i(Q) = M_i` for every
//! position `i`. Every valid `Q` sits inside
//! `Q* = { b in R^B : b_i in M_i for all i }` and projections are monotone, so
//! membership reduces to `pi_i(Q*) = M_i`. The same test decides partially
//! assigned tuples, which makes the structure usable as a search target.
//!
//! Homomorphisms into `F_H(B)` are closed under pointwise union, so a
//! greatest homomorphism exists whenever any does; generalised arc
//! consistency computes it.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::homomorphism::{find_into, Target};
use crate::minion::{minor, MinionElement, MinorMap};
use crate::rational::Rat;
use crate::structure::{decode, lex_tuples, Atom, Relation, Structure};
use crate::tensor::structural::{build_p, build_pi};
use crate::tensor::{contract, precedes_unchecked, Semiring, Tensor};
use crate::verdict::Verdict;

/// Largest base domain the bitmask representation handles.
pub const MAX_BASE: usize = 64;

/// `F_H(B)` for a base structure `B`, with lazily evaluated relations.
#[derive(Clone, Debug)]
pub struct FreeStructureH {
    base: Structure,
    rels: Vec<(String, Relation)>,
}

impl FreeStructureH {
    /// The lazy free structure; does not enumerate the domain.
    pub fn lazy(base: &Structure) -> Result<FreeStructureH> {
        if base.size() > MAX_BASE {
            return Err(Error::BudgetExceeded(format!(
                "free structure over {} atoms (limit {MAX_BASE})",
                base.size()
            )));
        }
        Ok(FreeStructureH {
            base: base.clone(),
            rels: base.relations().iter().map(|(s, r)| (s.clone(), r.clone())).collect(),
        })
    }

    pub fn base(&self) -> &Structure {
        &self.base
    }

    /// Number of points of the underlying domain, `|B|`.
    pub fn arity(&self) -> usize {
        self.base.size()
    }

    pub fn full_mask(&self) -> u64 {
        full_mask(self.arity())
    }

    fn rel_index(&self, symbol: &str) -> Result<usize> {
        self.rels
            .iter()
            .position(|(s, _)| s == symbol)
            .ok_or_else(|| Error::SignatureMismatch(format!("no symbol `{symbol}`")))
    }

    /// Membership of a fully specified tuple of masks.
    pub fn contains(&self, symbol: &str, tuple: &[u64]) -> Result<bool> {
        let ri = self.rel_index(symbol)?;
        let r = &self.rels[ri].1;
        if tuple.len() != r.arity() {
            return Err(Error::ArityMismatch(format!("{} masks for arity {}", tuple.len(), r.arity())));
        }
        let partial: Vec<Option<u64>> = tuple.iter().map(|&m| Some(m)).collect();
        Ok(self.admits_masks(ri, &partial))
    }

    /// Membership by enumerating every nonempty `Q ⊆ R^B` and comparing the
    /// minors `Q_{/pi_i}`; exponential in `|R^B|`, kept as an oracle.
    pub fn contains_by_enumeration(&self, symbol: &str, tuple: &[u64]) -> Result<bool> {
        let ri = self.rel_index(symbol)?;
        let r = &self.rels[ri].1;
        let m = r.len();
        if m > 20 {
            return Err(Error::BudgetExceeded(format!("enumerating subsets of {m} tuples")));
        }
        let n = self.arity();
        let pis: Vec<MinorMap> = (0..r.arity())
            .map(|i| MinorMap::new(n, r.tuples().iter().map(|t| t[i]).collect()))
            .collect::<Result<_>>()?;
        for q in 1u64..1 << m {
            let qe = MinionElement::h_from_mask(m, q);
            let mut ok = true;
            for (i, pi) in pis.iter().enumerate() {
                if minor(&qe, pi)?.h_mask() != Some(tuple[i]) {
                    ok = false;
                    break;
                }
            }
            if ok {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// `Q*` for relation `ri` under the (possibly partial) constraint masks.
    fn maximal_q<'a>(&'a self, ri: usize, masks: &'a [Option<u64>]) -> impl Iterator<Item = &'a Vec<usize>> {
        self.rels[ri].1.tuples().iter().filter(move |b| {
            b.iter().zip(masks).all(|(&v, m)| m.map_or(true, |m| m >> v & 1 == 1))
        })
    }

    fn admits_masks(&self, ri: usize, masks: &[Option<u64>]) -> bool {
        let mut proj = vec![0u64; masks.len()];
        let mut any = false;
        for b in self.maximal_q(ri, masks) {
            any = true;
            for (p, &v) in proj.iter_mut().zip(b) {
                *p |= 1 << v;
            }
        }
        any && proj.iter().zip(masks).all(|(p, m)| m.map_or(true, |m| *p == m))
    }

    /// Whether `masks` (one per atom of `x`) is a homomorphism `x -> F_H(B)`.
    pub fn is_homomorphism(&self, x: &Structure, masks: &[u64]) -> Result<bool> {
        x.same_signature(&self.base)?;
        if masks.len() != x.size() {
            return Err(Error::LengthMismatch(format!("{} masks for {} atoms", masks.len(), x.size())));
        }
        let full = self.full_mask();
        if masks.iter().any(|&m| m == 0 || m & !full != 0) {
            return Ok(false);
        }
        for (ri, (_, r)) in x.relations().iter().enumerate() {
            for t in r.tuples() {
                let partial: Vec<Option<u64>> = t.iter().map(|&v| Some(masks[v])).collect();
                if !self.admits_masks(ri, &partial) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// The greatest homomorphism from `x`, or the first atom whose mask
    /// empties together with the number of sweeps taken.
    pub fn greatest_homomorphism(&self, x: &Structure) -> Result<std::result::Result<Vec<u64>, (usize, usize)>> {
        x.same_signature(&self.base)?;
        let mut masks = vec![self.full_mask(); x.size()];
        let constraints: Vec<(usize, &Vec<usize>)> = x
            .relations()
            .values()
            .enumerate()
            .flat_map(|(ri, r)| r.tuples().iter().map(move |t| (ri, t)))
            .collect();
        let mut sweeps = 0;
        loop {
            sweeps += 1;
            let mut changed = false;
            for &(ri, t) in &constraints {
                let partial: Vec<Option<u64>> = t.iter().map(|&v| Some(masks[v])).collect();
                let mut proj = vec![0u64; t.len()];
                for b in self.maximal_q(ri, &partial) {
                    for (p, &v) in proj.iter_mut().zip(b) {
                        *p |= 1 << v;
                    }
                }
                for (p, &v) in proj.iter().zip(t) {
                    let next = masks[v] & p;
                    if next != masks[v] {
                        masks[v] = next;
                        changed = true;
                        if next == 0 {
                            return Ok(Err((v, sweeps)));
                        }
                    }
                }
            }
            if !changed {
                return Ok(Ok(masks));
            }
        }
    }

    /// The materialised structure: atoms are bitstrings such as `"10"` (row
    /// 1 first), relations list the projections of every nonempty `Q`.
    pub fn materialize(&self, budget: &Budget) -> Result<Structure> {
        let n = self.arity();
        budget.check_domain((1u128 << n) - 1, "free structure domain")?;
        let domain: Vec<Atom> = (1u64..1 << n).map(|m| Atom::name(bitstring(m, n))).collect();
        let mut relations = BTreeMap::new();
        for (s, r) in &self.rels {
            let m = r.len();
            budget.check_tuples(1u128 << m.min(127), &format!("free relation `{s}`"))?;
            let mut tuples = Vec::new();
            for q in 1u64..1 << m {
                let mut proj = vec![0u64; r.arity()];
                for (j, b) in r.tuples().iter().enumerate() {
                    if q >> j & 1 == 1 {
                        for (p, &v) in proj.iter_mut().zip(b) {
                            *p |= 1 << v;
                        }
                    }
                }
                tuples.push(proj.into_iter().map(|p| p as usize - 1).collect());
            }
            relations.insert(s.clone(), Relation::new(r.arity(), tuples)?);
        }
        Structure::new(domain, relations)
    }
}

impl Target for FreeStructureH {
    /// Value `v` stands for the mask `v + 1`.
    fn domain_size(&self) -> usize {
        (1usize << self.arity()) - 1
    }

    fn admits(&self, rel: usize, partial: &[Option<usize>]) -> bool {
        let masks: Vec<Option<u64>> = partial.iter().map(|p| p.map(|v| v as u64 + 1)).collect();
        self.admits_masks(rel, &masks)
    }
}

/// `F_H(A)` with the budget on its `2^|A| - 1` elements enforced.
pub fn free_structure_h(a: &Structure, budget: &Budget) -> Result<FreeStructureH> {
    let f = FreeStructureH::lazy(a)?;
    budget.check_domain((1u128 << a.size()) - 1, "free structure domain")?;
    Ok(f)
}

pub fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// `mask` as a string of `n` bits, row 1 first.
pub fn bitstring(mask: u64, n: usize) -> String {
    (0..n).map(|i| if mask >> i & 1 == 1 { '1' } else { '0' }).collect()
}

pub fn parse_bitstring(s: &str) -> Result<u64> {
    if s.len() > MAX_BASE {
        return Err(Error::MalformedInput(format!("bitstring of length {}", s.len())));
    }
    s.chars().enumerate().try_fold(0u64, |acc, (i, c)| match c {
        '0' => Ok(acc),
        '1' => Ok(acc | 1 << i),
        _ => Err(Error::MalformedInput(format!("bad bitstring `{s}`"))),
    })
}

/// The map `a -> {a}` from `A` into `F_H(A)`.
pub fn canonical_map(a: &Structure) -> Vec<u64> {
    (0..a.size()).map(|v| 1u64 << v).collect()
}

/// `xi : X^⊗k -> F_H(A^⊗k)` given by one mask per atom of `X^⊗k`.
#[derive(Clone, Debug, PartialEq)]
pub struct HomWitness {
    pub level: usize,
    /// Atoms of `X^⊗k` in domain order.
    pub atoms: Vec<Atom>,
    /// Number of atoms of `A^⊗k`, the width of each mask.
    pub width: usize,
    pub masks: Vec<u64>,
}

impl HomWitness {
    pub fn to_json(&self) -> Value {
        let map: serde_json::Map<String, Value> = self
            .atoms
            .iter()
            .zip(&self.masks)
            .map(|(a, &m)| (a.to_string(), json!(bitstring(m, self.width))))
            .collect();
        json!({ "level": self.level, "map": map })
    }
}

/// Reason a minion test rejected: the atom whose set of candidates emptied.
#[derive(Clone, Debug, PartialEq)]
pub struct Exhausted {
    pub atom: Atom,
    pub sweeps: usize,
}

impl Exhausted {
    pub fn to_json(&self) -> Value {
        json!({ "kind": "ARC_CONSISTENCY", "atom": self.atom.to_string(), "sweeps": self.sweeps })
    }
}

pub type HVerdict = Verdict<HomWitness, Exhausted>;

/// Decides `X -> F_H(A)`.
pub fn minion_test_h(x: &Structure, a: &Structure, budget: &Budget) -> Result<HVerdict> {
    let f = free_structure_h(a, budget)?;
    run(&f, x, 1)
}

fn run(f: &FreeStructureH, x: &Structure, level: usize) -> Result<HVerdict> {
    Ok(match f.greatest_homomorphism(x)? {
        Ok(masks) => Verdict::Accept(HomWitness {
            level,
            atoms: x.domain().to_vec(),
            width: f.arity(),
            masks,
        }),
        Err((v, sweeps)) => Verdict::Reject(Exhausted { atom: x.atom(v).clone(), sweeps }),
    })
}

/// `X^⊗k` and `A^⊗k` for the `k`-enhanced structures.
pub fn tensorised_pair(x: &Structure, a: &Structure, k: usize, budget: &Budget) -> Result<(Structure, Structure)> {
    let xe = x.k_enhance(k, budget)?.tensor_power(k, budget)?;
    let ae = a.k_enhance(k, budget)?.tensor_power(k, budget)?;
    Ok((xe, ae))
}

/// Decides `X^⊗k -> F_H(A^⊗k)` with both structures `k`-enhanced first.
pub fn minion_test_h_level(x: &Structure, a: &Structure, k: usize, budget: &Budget) -> Result<HVerdict> {
    x.same_signature(a)?;
    let (xt, at) = tensorised_pair(x, a, k, budget)?;
    let f = free_structure_h(&at, budget)?;
    run(&f, &xt, k)
}

/// Backtracking search for `X -> F_H(A)` over the materialised domain; an
/// oracle for [`minion_test_h`].
pub fn find_h_by_search(x: &Structure, a: &Structure, budget: &Budget) -> Result<Option<Vec<u64>>> {
    x.same_signature(a)?;
    let f = free_structure_h(a, budget)?;
    Ok(find_into(x, &f).map(|h| h.into_iter().map(|v| v as u64 + 1).collect()))
}

/// Checks that `w` is a homomorphism `X^⊗k -> F_H(A^⊗k)` of the enhanced
/// structures, then that `xi(x)` vanishes at every `a` with `x ⊀ a` and that
/// `xi(x_i) = Pi_i * xi(x)` for all `i in [k]^k`.
pub fn check_vanishing(w: &HomWitness, x: &Structure, a: &Structure, k: usize, budget: &Budget) -> Result<bool> {
    let (xt, at) = tensorised_pair(x, a, k, budget)?;
    let f = FreeStructureH::lazy(&at)?;
    if w.masks.len() != xt.size() || w.width != at.size() || !f.is_homomorphism(&xt, &w.masks)? {
        return Err(Error::NotAHomomorphism("witness does not map X^k into F_H(A^k)".into()));
    }
    let (nx, na) = (x.size(), a.size());
    for (xi, &m) in w.masks.iter().enumerate() {
        let xv = decode(xi, nx, k);
        for ai in 0..at.size() {
            if m >> ai & 1 == 1 && !precedes_unchecked(&xv, &decode(ai, na, k)) {
                return Ok(false);
            }
        }
    }
    let shape = vec![na; k];
    let as_tensor = |m: u64| Tensor::<bool>::from_entries(&shape, (0..at.size()).map(|j| m >> j & 1 == 1).collect());
    for i in lex_tuples(k, k) {
        let pi = build_pi::<bool>(na, &i)?;
        for (xi, &m) in w.masks.iter().enumerate() {
            let xv = decode(xi, nx, k);
            let target = crate::structure::encode(i.iter().map(|&p| xv[p]), nx);
            let image = contract(&pi, &as_tensor(m)?, k)?;
            if image != as_tensor(w.masks[target])? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The block `M_i = P_i * q` of the free-structure tuple generated by the
/// distribution or indicator `q` over `R^A` (canonical tuple order).
pub fn free_block<S: Semiring>(a: &Structure, symbol: &str, i: &[usize], q: &Tensor<S>) -> Result<Tensor<S>> {
    let p = build_p::<S>(a, symbol, i)?;
    contract(&p, q, 1)
}

/// [`free_block`] for a rational vector `q`.
pub fn qconv_block(a: &Structure, symbol: &str, i: &[usize], q: &[Rat]) -> Result<Tensor<Rat>> {
    let qt = Tensor::from_entries(&[q.len()], q.to_vec())?;
    free_block(a, symbol, i, &qt)
}
