//! Bounded width: the greatest restriction-closed family of partial
//! homomorphisms on at most `k` atoms with the extension property.
//!
//! Extension by one atom at a time suffices: if every surviving map extends
//! to each one-larger domain, chaining those extensions reaches every domain
//! of size at most `k`. Deleting maps that violate either condition therefore
//! converges to the greatest family, which is nonempty iff it keeps the empty
//! map.

use std::collections::HashMap;

use serde_json::{json, Value};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::homomorphism::{enumerate_partial_homomorphisms, is_partial_homomorphism, PartialMap};
use crate::structure::Structure;
use crate::verdict::Verdict;

/// A family of partial homomorphisms, sorted.
#[derive(Clone, Debug, PartialEq)]
pub struct BWFamily {
    pub maps: Vec<PartialMap>,
}

impl BWFamily {
    pub fn new(mut maps: Vec<PartialMap>) -> Self {
        maps.sort();
        maps.dedup();
        BWFamily { maps }
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn contains(&self, f: &PartialMap) -> bool {
        self.maps.binary_search(f).is_ok()
    }

    /// Checks every defining condition, naming the first violation.
    pub fn validate(&self, x: &Structure, a: &Structure, k: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidWitness(msg));
        if !self.contains(&PartialMap::empty()) {
            return bad("family lacks the empty map".into());
        }
        for f in &self.maps {
            if f.len() > k {
                return bad(format!("map on {} atoms exceeds level {k}", f.len()));
            }
            if !is_partial_homomorphism(f, x, a) {
                return bad(format!("{:?} is not a partial homomorphism", f.pairs));
            }
            for i in 0..f.len() {
                if !self.contains(&f.without(i)) {
                    return bad(format!("{:?} misses a restriction", f.pairs));
                }
            }
            if f.len() < k {
                for y in 0..x.size() {
                    if f.get(y).is_none() && !(0..a.size()).any(|v| self.contains(&f.with(y, v))) {
                        return bad(format!("{:?} does not extend to atom {y}", f.pairs));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self, x: &Structure, a: &Structure) -> Value {
        Value::Array(self.maps.iter().map(|f| f.to_json(x, a)).collect())
    }
}

/// Why a map was removed from the family.
#[derive(Clone, Debug, PartialEq)]
pub enum Deletion {
    /// The restriction dropping this atom was already gone.
    MissingRestriction { map: PartialMap, atom: usize },
    /// No surviving map extends this one to the atom.
    NoExtension { map: PartialMap, atom: usize },
}

impl Deletion {
    pub fn map(&self) -> &PartialMap {
        match self {
            Deletion::MissingRestriction { map, .. } | Deletion::NoExtension { map, .. } => map,
        }
    }
}

/// Deletions in the order they were made; replaying them from the full set
/// of partial homomorphisms removes the empty map.
#[derive(Clone, Debug, PartialEq)]
pub struct DeletionTrace {
    pub level: usize,
    pub steps: Vec<Deletion>,
}

impl DeletionTrace {
    pub fn to_json(&self, x: &Structure, a: &Structure) -> Value {
        let steps: Vec<Value> = self
            .steps
            .iter()
            .map(|d| match d {
                Deletion::MissingRestriction { map, atom } => {
                    json!({"delete": map.to_json(x, a), "missing_restriction": x.atom(*atom)})
                }
                Deletion::NoExtension { map, atom } => {
                    json!({"delete": map.to_json(x, a), "no_extension": x.atom(*atom)})
                }
            })
            .collect();
        json!({ "kind": "DELETION_TRACE", "level": self.level, "steps": steps })
    }

    /// Replays the trace against a fresh enumeration, checking each step's
    /// justification at the moment it is applied.
    pub fn verify(&self, x: &Structure, a: &Structure, budget: &Budget) -> Result<bool> {
        let all = enumerate_partial_homomorphisms(x, a, self.level, budget)?;
        let mut alive: HashMap<PartialMap, bool> = all.into_iter().map(|f| (f, true)).collect();
        for step in &self.steps {
            let f = step.map();
            if alive.get(f) != Some(&true) {
                return Ok(false);
            }
            let justified = match step {
                Deletion::MissingRestriction { map, atom } => match map.pairs.iter().position(|p| p.0 == *atom) {
                    Some(i) => alive.get(&map.without(i)) != Some(&true),
                    None => false,
                },
                Deletion::NoExtension { map, atom } => {
                    map.len() < self.level
                        && *atom < x.size()
                        && map.get(*atom).is_none()
                        && (0..a.size()).all(|v| alive.get(&map.with(*atom, v)) != Some(&true))
                }
            };
            if !justified {
                return Ok(false);
            }
            alive.insert(f.clone(), false);
        }
        Ok(alive.get(&PartialMap::empty()) == Some(&false))
    }
}

pub type BwVerdict = Verdict<BWFamily, DeletionTrace>;

/// Runs the level-`k` bounded width fixpoint.
pub fn bw(x: &Structure, a: &Structure, k: usize, budget: &Budget) -> Result<BwVerdict> {
    let all = enumerate_partial_homomorphisms(x, a, k, budget)?;
    let index: HashMap<PartialMap, usize> = all.iter().cloned().enumerate().map(|(i, f)| (f, i)).collect();
    let mut alive = vec![true; all.len()];
    let is_alive = |alive: &[bool], f: &PartialMap| index.get(f).is_some_and(|&i| alive[i]);
    let mut steps = Vec::new();
    loop {
        let mut changed = false;
        for (fi, f) in all.iter().enumerate() {
            if !alive[fi] {
                continue;
            }
            let mut reason = None;
            for (i, &(atom, _)) in f.pairs.iter().enumerate() {
                if !is_alive(&alive, &f.without(i)) {
                    reason = Some(Deletion::MissingRestriction { map: f.clone(), atom });
                    break;
                }
            }
            if reason.is_none() && f.len() < k {
                for y in (0..x.size()).filter(|&y| f.get(y).is_none()) {
                    if !(0..a.size()).any(|v| is_alive(&alive, &f.with(y, v))) {
                        reason = Some(Deletion::NoExtension { map: f.clone(), atom: y });
                        break;
                    }
                }
            }
            if let Some(r) = reason {
                alive[fi] = false;
                steps.push(r);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    if alive[index[&PartialMap::empty()]] {
        let maps = all.into_iter().zip(alive).filter(|p| p.1).map(|p| p.0).collect();
        Ok(Verdict::Accept(BWFamily::new(maps)))
    } else {
        Ok(Verdict::Reject(DeletionTrace { level: k, steps }))
    }
}

/// Whether some family with the two properties exists, by trying every
/// subset of the partial homomorphisms. Only for tiny inputs.
pub fn bw_by_subsets(x: &Structure, a: &Structure, k: usize, budget: &Budget) -> Result<bool> {
    let all = enumerate_partial_homomorphisms(x, a, k, budget)?;
    if all.len() > 22 {
        return Err(Error::BudgetExceeded(format!("{} partial maps to search", all.len())));
    }
    for mask in 1u64..1 << all.len() {
        if mask & 1 == 0 {
            continue; // the empty map comes first and every family holds it
        }
        let fam = BWFamily::new((0..all.len()).filter(|&i| mask >> i & 1 == 1).map(|i| all[i].clone()).collect());
        if fam.validate(x, a, k).is_ok() {
            return Ok(true);
        }
    }
    Ok(false)
}
