//! Backtracking homomorphism search, partial homomorphisms and polymorphisms.
//!
//! Variables are ordered by descending constraint degree (ties by atom id) and
//! values are tried in domain order, so every search is deterministic.

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::structure::Structure;

/// A total map from source atom ids to target atom ids.
pub type Assignment = Vec<usize>;

/// Anything a source structure can be mapped into. Relations are addressed by
/// their position in the (shared, name-ordered) signature.
pub trait Target {
    fn domain_size(&self) -> usize;

    /// Whether some tuple of relation `rel` agrees with the assigned entries
    /// of `partial`. Targets that cannot decide partial tuples cheaply may
    /// answer `true` unless `partial` is fully assigned.
    fn admits(&self, rel: usize, partial: &[Option<usize>]) -> bool;
}

/// Adapter for an ordinary structure as a target.
pub struct StructureTarget<'a> {
    rels: Vec<&'a crate::structure::Relation>,
    size: usize,
}

impl<'a> StructureTarget<'a> {
    pub fn new(a: &'a Structure) -> Self {
        StructureTarget { rels: a.relations().values().collect(), size: a.size() }
    }
}

impl Target for StructureTarget<'_> {
    fn domain_size(&self) -> usize {
        self.size
    }

    fn admits(&self, rel: usize, partial: &[Option<usize>]) -> bool {
        let r = self.rels[rel];
        if partial.iter().all(Option::is_some) {
            let full: Vec<usize> = partial.iter().map(|x| x.unwrap()).collect();
            return r.contains(&full);
        }
        r.tuples().iter().any(|t| {
            t.iter().zip(partial).all(|(v, p)| p.map_or(true, |p| p == *v))
        })
    }
}

struct Search<'s> {
    order: Vec<usize>,
    /// Constraints incident to each source atom: (relation index, tuple).
    incident: Vec<Vec<(usize, &'s [usize])>>,
}

impl<'s> Search<'s> {
    fn new(x: &'s Structure) -> Self {
        let mut incident = vec![Vec::new(); x.size()];
        for (ri, rel) in x.relations().values().enumerate() {
            for t in rel.tuples() {
                let mut seen: Vec<usize> = t.clone();
                seen.sort_unstable();
                seen.dedup();
                for v in seen {
                    incident[v].push((ri, t.as_slice()));
                }
            }
        }
        let mut order: Vec<usize> = (0..x.size()).collect();
        order.sort_by_key(|&v| (std::cmp::Reverse(incident[v].len()), v));
        Search { order, incident }
    }

    /// Calls `visit` on each homomorphism until it returns `false`.
    fn run<T: Target>(&self, target: &T, visit: &mut dyn FnMut(&[usize]) -> bool) {
        let mut assign: Vec<Option<usize>> = vec![None; self.order.len()];
        self.descend(0, target, &mut assign, visit);
    }

    fn descend<T: Target>(
        &self,
        depth: usize,
        target: &T,
        assign: &mut Vec<Option<usize>>,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if depth == self.order.len() {
            let total: Vec<usize> = assign.iter().map(|v| v.unwrap()).collect();
            return visit(&total);
        }
        let v = self.order[depth];
        let mut partial = Vec::new();
        for value in 0..target.domain_size() {
            assign[v] = Some(value);
            let ok = self.incident[v].iter().all(|&(ri, t)| {
                partial.clear();
                partial.extend(t.iter().map(|&u| assign[u]));
                target.admits(ri, &partial)
            });
            if ok && !self.descend(depth + 1, target, assign, visit) {
                assign[v] = None;
                return false;
            }
        }
        assign[v] = None;
        true
    }
}

pub fn is_homomorphism(f: &[usize], x: &Structure, a: &Structure) -> Result<bool> {
    x.same_signature(a)?;
    if f.len() != x.size() {
        return Err(Error::LengthMismatch(format!("map has {} entries for {} atoms", f.len(), x.size())));
    }
    if let Some(&bad) = f.iter().find(|&&v| v >= a.size()) {
        return Err(Error::UnknownAtom(format!("target id {bad}")));
    }
    Ok(x.relations().iter().all(|(s, r)| {
        let ra = a.relation(s).expect("signatures agree");
        r.tuples().iter().all(|t| {
            let img: Vec<usize> = t.iter().map(|&v| f[v]).collect();
            ra.contains(&img)
        })
    }))
}

/// Searches for a homomorphism from `x` into an arbitrary target.
pub fn find_into<T: Target>(x: &Structure, target: &T) -> Option<Assignment> {
    let mut found = None;
    Search::new(x).run(target, &mut |f| {
        found = Some(f.to_vec());
        false
    });
    found
}

pub fn find_homomorphism(x: &Structure, a: &Structure) -> Result<Option<Assignment>> {
    x.same_signature(a)?;
    Ok(find_into(x, &StructureTarget::new(a)))
}

/// All homomorphisms, in search order. Stops with `BudgetExceeded` past
/// `budget.max_tuples` results.
pub fn all_homomorphisms(x: &Structure, a: &Structure, budget: &Budget) -> Result<Vec<Assignment>> {
    x.same_signature(a)?;
    let mut out = Vec::new();
    let mut overflow = false;
    Search::new(x).run(&StructureTarget::new(a), &mut |f| {
        if out.len() >= budget.max_tuples {
            overflow = true;
            return false;
        }
        out.push(f.to_vec());
        true
    });
    if overflow {
        return Err(Error::BudgetExceeded("too many homomorphisms".into()));
    }
    Ok(out)
}

/// Homomorphisms `A^L -> B`, as maps indexed by the lexicographic id of the
/// `L`-tuple.
pub fn polymorphisms(a: &Structure, b: &Structure, l: usize, budget: &Budget) -> Result<Vec<Assignment>> {
    a.same_signature(b)?;
    let p = a.power(l, budget)?;
    all_homomorphisms(&p, b, budget)
}

/// A homomorphism from an induced substructure. Pairs are sorted by source id.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartialMap {
    pub pairs: Vec<(usize, usize)>,
}

impl PartialMap {
    pub fn empty() -> Self {
        PartialMap { pairs: Vec::new() }
    }

    pub fn domain(&self) -> impl Iterator<Item = usize> + '_ {
        self.pairs.iter().map(|p| p.0)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn get(&self, x: usize) -> Option<usize> {
        self.pairs.binary_search_by_key(&x, |p| p.0).ok().map(|i| self.pairs[i].1)
    }

    /// Restriction to the domain minus the `i`-th pair.
    pub fn without(&self, i: usize) -> PartialMap {
        let mut pairs = self.pairs.clone();
        pairs.remove(i);
        PartialMap { pairs }
    }

    /// Extension by `x -> a`, where `x` is not yet in the domain.
    pub fn with(&self, x: usize, a: usize) -> PartialMap {
        let mut pairs = self.pairs.clone();
        let at = pairs.partition_point(|p| p.0 < x);
        pairs.insert(at, (x, a));
        PartialMap { pairs }
    }

    pub fn to_json(&self, x: &Structure, a: &Structure) -> serde_json::Value {
        serde_json::Value::Array(
            self.pairs
                .iter()
                .map(|&(u, v)| serde_json::json!([x.atom(u), a.atom(v)]))
                .collect(),
        )
    }
}

/// Whether `f` respects every constraint of `x` whose atoms all lie in its domain.
pub fn is_partial_homomorphism(f: &PartialMap, x: &Structure, a: &Structure) -> bool {
    if f.pairs.windows(2).any(|w| w[0].0 >= w[1].0) {
        return false;
    }
    if f.pairs.iter().any(|&(u, v)| u >= x.size() || v >= a.size()) {
        return false;
    }
    x.relations().iter().all(|(s, r)| {
        let ra = a.relation(s).expect("signatures agree");
        r.tuples().iter().all(|t| {
            let img: Option<Vec<usize>> = t.iter().map(|&v| f.get(v)).collect();
            img.map_or(true, |img| ra.contains(&img))
        })
    })
}

/// All partial homomorphisms with domain size at most `k`, including the
/// empty map. Ordered by domain size, then domain, then values.
pub fn enumerate_partial_homomorphisms(
    x: &Structure,
    a: &Structure,
    k: usize,
    budget: &Budget,
) -> Result<Vec<PartialMap>> {
    x.same_signature(a)?;
    let n = x.size();
    let m = a.size() as u128;
    let mut estimate: u128 = 0;
    for j in 0..=k.min(n) {
        estimate = estimate.saturating_add(binomial(n, j).saturating_mul(m.saturating_pow(j as u32)));
    }
    budget.check_tuples(estimate, "partial homomorphisms")?;
    let mut out = vec![PartialMap::empty()];
    for size in 1..=k.min(n) {
        for dom in subsets_of_size(n, size) {
            for values in crate::structure::lex_tuples(a.size(), size) {
                let f = PartialMap { pairs: dom.iter().copied().zip(values).collect() };
                if is_partial_homomorphism(&f, x, a) {
                    out.push(f);
                }
            }
        }
    }
    Ok(out)
}

/// Sorted `size`-subsets of `0..n` in lexicographic order.
pub fn subsets_of_size(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(size);
    fn rec(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            if n - v < size - cur.len() {
                break;
            }
            cur.push(v);
            rec(v + 1, n, size, cur, out);
            cur.pop();
        }
    }
    rec(0, n, size, &mut cur, &mut out);
    out
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::templates;

    #[test]
    fn k3_to_k2_has_no_homomorphism() {
        assert_eq!(find_homomorphism(&templates::k3(), &templates::k2()).unwrap(), None);
        let f = find_homomorphism(&templates::k2(), &templates::k3()).unwrap().unwrap();
        assert!(is_homomorphism(&f, &templates::k2(), &templates::k3()).unwrap());
    }

    #[test]
    fn c5_to_k3() {
        let f = find_homomorphism(&templates::c5(), &templates::k3()).unwrap().unwrap();
        assert!(is_homomorphism(&f, &templates::c5(), &templates::k3()).unwrap());
        assert_eq!(find_homomorphism(&templates::c5(), &templates::k2()).unwrap(), None);
    }

    #[test]
    fn counts_partial_maps() {
        let b = Budget::default();
        let k1 = enumerate_partial_homomorphisms(&templates::k3(), &templates::k2(), 1, &b).unwrap();
        assert_eq!(k1.len(), 7);
        let k2 = enumerate_partial_homomorphisms(&templates::k3(), &templates::k2(), 2, &b).unwrap();
        assert_eq!(k2.len(), 13);
        assert!(k2[0].is_empty());
    }

    #[test]
    fn automorphisms_of_k3() {
        let homs = all_homomorphisms(&templates::k3(), &templates::k3(), &Budget::default()).unwrap();
        assert_eq!(homs.len(), 6);
    }

    #[test]
    fn boolean_unary_polymorphism_counts() {
        let a = templates::bool_unary();
        let b = Budget::default();
        assert_eq!(all_homomorphisms(&a, &a, &b).unwrap().len(), 4);
        let t = a.tensor_power(2, &b).unwrap();
        assert_eq!(all_homomorphisms(&t, &t, &b).unwrap().len(), 64);
        // Binary polymorphisms of a structure with only a full unary relation are all maps.
        assert_eq!(polymorphisms(&a, &a, 2, &b).unwrap().len(), 16);
    }

    #[test]
    fn subsets() {
        assert_eq!(subsets_of_size(4, 2).len(), 6);
        assert_eq!(subsets_of_size(3, 0), vec![Vec::<usize>::new()]);
    }
}
