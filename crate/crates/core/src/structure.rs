//! Finite relational structures and the constructions built from them:
//! enhancement, induced substructures, powers and tensor powers.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::budget::Budget;
use crate::error::{Error, Result};

/// A domain element. Powers and tensor powers use tuples of base atoms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Atom {
    Name(String),
    Tuple(Vec<Atom>),
}

impl Atom {
    pub fn name(s: impl Into<String>) -> Atom {
        Atom::Name(s.into())
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Name(s) => write!(f, "{s}"),
            Atom::Tuple(items) => {
                write!(f, "(")?;
                for (i, a) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Symbol name to arity, iterated in name order.
pub type Signature = BTreeMap<String, usize>;

/// Name of the full `k`-ary relation added by enhancement.
pub fn enhancement_symbol(k: usize) -> String {
    format!("R_{k}")
}

/// A set of tuples over atom ids, kept sorted lexicographically and free of
/// duplicates. The sorted order is the canonical order of `R^A` used by
/// every linear-algebraic construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    arity: usize,
    tuples: Vec<Vec<usize>>,
}

impl Relation {
    pub fn new(arity: usize, mut tuples: Vec<Vec<usize>>) -> Result<Relation> {
        if arity == 0 {
            return Err(Error::ArityMismatch("relations need arity at least 1".into()));
        }
        if let Some(t) = tuples.iter().find(|t| t.len() != arity) {
            return Err(Error::ArityMismatch(format!(
                "tuple of length {} in relation of arity {arity}",
                t.len()
            )));
        }
        tuples.sort_unstable();
        tuples.dedup();
        Ok(Relation { arity, tuples })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn tuples(&self) -> &[Vec<usize>] {
        &self.tuples
    }

    pub fn contains(&self, t: &[usize]) -> bool {
        self.position(t).is_some()
    }

    /// Index of `t` in canonical order.
    pub fn position(&self, t: &[usize]) -> Option<usize> {
        self.tuples.binary_search_by(|u| u.as_slice().cmp(t)).ok()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Structure {
    domain: Vec<Atom>,
    index: HashMap<Atom, usize>,
    relations: BTreeMap<String, Relation>,
}

impl Structure {
    /// Builds a structure from atoms and relations over atom ids.
    pub fn new(domain: Vec<Atom>, relations: BTreeMap<String, Relation>) -> Result<Structure> {
        if domain.is_empty() {
            return Err(Error::MalformedInput("empty domain".into()));
        }
        let mut index = HashMap::with_capacity(domain.len());
        for (i, a) in domain.iter().enumerate() {
            if index.insert(a.clone(), i).is_some() {
                return Err(Error::MalformedInput(format!("duplicate atom `{a}`")));
            }
        }
        let n = domain.len();
        for (name, rel) in &relations {
            if rel.tuples.iter().flatten().any(|&x| x >= n) {
                return Err(Error::UnknownAtom(format!("atom id out of range in `{name}`")));
            }
        }
        Ok(Structure { domain, index, relations })
    }

    /// Convenience constructor with named atoms and tuples over atom ids.
    pub fn from_parts(names: &[&str], relations: &[(&str, usize, Vec<Vec<usize>>)]) -> Result<Structure> {
        let domain = names.iter().map(|s| Atom::name(*s)).collect();
        let mut rels = BTreeMap::new();
        for (name, arity, tuples) in relations {
            if rels.insert(name.to_string(), Relation::new(*arity, tuples.clone())?).is_some() {
                return Err(Error::MalformedInput(format!("symbol `{name}` declared twice")));
            }
        }
        Structure::new(domain, rels)
    }

    pub fn size(&self) -> usize {
        self.domain.len()
    }

    pub fn domain(&self) -> &[Atom] {
        &self.domain
    }

    pub fn atom(&self, id: usize) -> &Atom {
        &self.domain[id]
    }

    pub fn atom_id(&self, atom: &Atom) -> Option<usize> {
        self.index.get(atom).copied()
    }

    pub fn relations(&self) -> &BTreeMap<String, Relation> {
        &self.relations
    }

    pub fn relation(&self, symbol: &str) -> Option<&Relation> {
        self.relations.get(symbol)
    }

    pub fn signature(&self) -> Signature {
        self.relations.iter().map(|(s, r)| (s.clone(), r.arity)).collect()
    }

    /// Largest arity, 0 for an empty signature.
    pub fn max_arity(&self) -> usize {
        self.relations.values().map(|r| r.arity).max().unwrap_or(0)
    }

    pub fn same_signature(&self, other: &Structure) -> Result<()> {
        if self.signature() != other.signature() {
            return Err(Error::SignatureMismatch(format!(
                "{:?} vs {:?}",
                self.signature(),
                other.signature()
            )));
        }
        Ok(())
    }

    /// Adds the full `k`-ary relation `R_k`. Idempotent when `R_k` is already
    /// present and full; other `R_j` symbols are left untouched.
    pub fn k_enhance(&self, k: usize, budget: &Budget) -> Result<Structure> {
        if !(1..=9).contains(&k) {
            return Err(Error::IndexOutOfRange(format!("enhancement level {k} not in 1..=9")));
        }
        let n = self.size();
        let full = (n as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
        let symbol = enhancement_symbol(k);
        if let Some(existing) = self.relations.get(&symbol) {
            if existing.arity == k && existing.len() as u128 == full {
                return Ok(self.clone());
            }
            return Err(Error::SymbolClash(symbol));
        }
        budget.check_tuples(full, "enhancement relation")?;
        let tuples = lex_tuples(n, k);
        let mut out = self.clone();
        out.relations.insert(symbol, Relation { arity: k, tuples });
        Ok(out)
    }

    /// Substructure induced on the given atom ids, kept in the given order.
    pub fn induced_substructure(&self, subset: &[usize]) -> Result<Structure> {
        if subset.is_empty() {
            return Err(Error::EmptySubset);
        }
        let mut local = vec![usize::MAX; self.size()];
        for (i, &x) in subset.iter().enumerate() {
            if x >= self.size() {
                return Err(Error::UnknownAtom(format!("id {x}")));
            }
            local[x] = i;
        }
        let domain = subset.iter().map(|&x| self.domain[x].clone()).collect();
        let relations = self
            .relations
            .iter()
            .map(|(s, r)| {
                let tuples = r
                    .tuples
                    .iter()
                    .filter(|t| t.iter().all(|&x| local[x] != usize::MAX))
                    .map(|t| t.iter().map(|&x| local[x]).collect())
                    .collect();
                (s.clone(), Relation::new(r.arity, tuples).expect("arity preserved"))
            })
            .collect();
        Structure::new(domain, relations)
    }

    /// The `L`-th direct power. Atoms are `L`-tuples in lexicographic order;
    /// tuples are the columns of `L x r` matrices whose rows lie in `R^A`.
    pub fn power(&self, l: usize, budget: &Budget) -> Result<Structure> {
        if l == 0 {
            return Err(Error::IndexOutOfRange("power exponent must be positive".into()));
        }
        let n = self.size();
        budget.check_domain(checked_pow(n, l), "power domain")?;
        for (s, r) in &self.relations {
            budget.check_tuples(checked_pow(r.len(), l), &format!("power relation `{s}`"))?;
        }
        let domain = lex_tuples(n, l)
            .into_iter()
            .map(|t| Atom::Tuple(t.into_iter().map(|x| self.domain[x].clone()).collect()))
            .collect();
        let mut relations = BTreeMap::new();
        for (s, r) in &self.relations {
            let mut tuples = Vec::with_capacity(r.len().pow(l as u32));
            for rows in lex_tuples(r.len(), l) {
                let col = (0..r.arity)
                    .map(|j| encode(rows.iter().map(|&t| r.tuples[t][j]), n))
                    .collect();
                tuples.push(col);
            }
            relations.insert(s.clone(), Relation::new(r.arity, tuples)?);
        }
        Structure::new(domain, relations)
    }

    /// The `k`-th tensor power. Atoms are `k`-tuples in lexicographic order.
    /// A relation of arity `r` becomes one of arity `r^k` whose tuples are
    /// the tensors `a^{(x)k}`, flattened row-major with the first mode
    /// outermost: cell `(i_1..i_k)` holds `(a_{i_1},...,a_{i_k})`.
    pub fn tensor_power(&self, k: usize, budget: &Budget) -> Result<Structure> {
        if k == 0 {
            return Err(Error::IndexOutOfRange("tensor exponent must be positive".into()));
        }
        let n = self.size();
        budget.check_domain(checked_pow(n, k), "tensor power domain")?;
        if k == 1 {
            return Ok(self.clone());
        }
        let domain = lex_tuples(n, k)
            .into_iter()
            .map(|t| Atom::Tuple(t.into_iter().map(|x| self.domain[x].clone()).collect()))
            .collect();
        let mut relations = BTreeMap::new();
        for (s, r) in &self.relations {
            let cells = lex_tuples(r.arity, k);
            budget.check_tuples(checked_pow(r.arity, k), &format!("tensor arity of `{s}`"))?;
            let tuples = r
                .tuples
                .iter()
                .map(|a| cells.iter().map(|i| encode(i.iter().map(|&p| a[p]), n)).collect())
                .collect();
            relations.insert(s.clone(), Relation::new(checked_pow(r.arity, k) as usize, tuples)?);
        }
        Structure::new(domain, relations)
    }

    /// Parses the JSON interchange format:
    /// `{"domain": [...], "relations": {"E": {"arity": 2, "tuples": [[..], ..]}}}`.
    /// Atoms are strings or nested arrays of atoms.
    pub fn from_json(text: &str) -> Result<Structure> {
        let raw: RawStructure = serde_json::from_str(text)?;
        raw.into_structure()
    }

    pub fn to_json_value(&self) -> Value {
        let raw = RawStructure {
            domain: self.domain.clone(),
            relations: self
                .relations
                .iter()
                .map(|(s, r)| {
                    let tuples = r
                        .tuples
                        .iter()
                        .map(|t| t.iter().map(|&x| self.domain[x].clone()).collect())
                        .collect();
                    (s.clone(), RawRelation { arity: r.arity, tuples })
                })
                .collect(),
        };
        serde_json::to_value(raw).expect("structures always serialize")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("structures always serialize")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRelation {
    arity: usize,
    #[serde(default)]
    tuples: Vec<Vec<Atom>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStructure {
    domain: Vec<Atom>,
    #[serde(default)]
    relations: BTreeMap<String, RawRelation>,
}

impl RawStructure {
    fn into_structure(self) -> Result<Structure> {
        let mut index = HashMap::new();
        for (i, a) in self.domain.iter().enumerate() {
            index.insert(a.clone(), i);
        }
        let mut relations = BTreeMap::new();
        for (s, raw) in self.relations {
            let arity = raw.arity;
            let mut tuples = Vec::with_capacity(raw.tuples.len());
            for t in &raw.tuples {
                if t.len() != arity {
                    return Err(Error::ArityMismatch(format!(
                        "`{s}` has arity {arity} but a tuple has length {}",
                        t.len()
                    )));
                }
                let ids = t
                    .iter()
                    .map(|a| index.get(a).copied().ok_or_else(|| Error::UnknownAtom(a.to_string())))
                    .collect::<Result<Vec<_>>>()?;
                tuples.push(ids);
            }
            relations.insert(s, Relation::new(arity, tuples)?);
        }
        Structure::new(self.domain, relations)
    }
}

/// All `k`-tuples over `0..n` in lexicographic order.
pub fn lex_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let total = n.pow(k as u32);
    let mut out = Vec::with_capacity(total);
    let mut cur = vec![0usize; k];
    if n == 0 && k > 0 {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut p = k;
        loop {
            if p == 0 {
                return out;
            }
            p -= 1;
            cur[p] += 1;
            if cur[p] < n {
                break;
            }
            cur[p] = 0;
        }
    }
}

/// Row-major index of a tuple over `0..n`.
pub fn encode(digits: impl IntoIterator<Item = usize>, n: usize) -> usize {
    digits.into_iter().fold(0, |acc, d| acc * n + d)
}

/// Inverse of [`encode`] for tuples of length `k`.
pub fn decode(mut index: usize, n: usize, k: usize) -> Vec<usize> {
    let mut out = vec![0; k];
    for p in (0..k).rev() {
        out[p] = index % n;
        index /= n;
    }
    out
}

fn checked_pow(base: usize, exp: usize) -> u128 {
    (base as u128).checked_pow(exp as u32).unwrap_or(u128::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k3() -> Structure {
        let edges = (0..3)
            .flat_map(|a| (0..3).filter(move |&b| b != a).map(move |b| vec![a, b]))
            .collect();
        Structure::from_parts(&["1", "2", "3"], &[("E", 2, edges)]).unwrap()
    }

    #[test]
    fn lex_order_and_codec() {
        let t = lex_tuples(3, 2);
        assert_eq!(t.len(), 9);
        for (i, tup) in t.iter().enumerate() {
            assert_eq!(encode(tup.iter().copied(), 3), i);
            assert_eq!(&decode(i, 3, 2), tup);
        }
    }

    #[test]
    fn json_round_trip() {
        let s = k3();
        let back = Structure::from_json(&s.to_json()).unwrap();
        assert_eq!(s, back);
        let t = s.tensor_power(2, &Budget::default()).unwrap();
        assert_eq!(Structure::from_json(&t.to_json()).unwrap(), t);
    }

    #[test]
    fn json_errors() {
        let bad_arity = r#"{"domain":["a"],"relations":{"E":{"arity":2,"tuples":[["a"]]}}}"#;
        assert!(matches!(Structure::from_json(bad_arity), Err(Error::ArityMismatch(_))));
        let unknown = r#"{"domain":["a"],"relations":{"E":{"arity":1,"tuples":[["b"]]}}}"#;
        assert!(matches!(Structure::from_json(unknown), Err(Error::UnknownAtom(_))));
        assert!(matches!(Structure::from_json("{\"domain\": ["), Err(Error::MalformedInput(_))));
    }

    #[test]
    fn enhancement() {
        let b = Budget::default();
        let s = k3().k_enhance(2, &b).unwrap();
        assert_eq!(s.relation("R_2").unwrap().len(), 9);
        assert_eq!(s.k_enhance(2, &b).unwrap(), s);
        let both = s.k_enhance(1, &b).unwrap();
        assert_eq!(both.relation("R_1").unwrap().len(), 3);
        assert_eq!(both.relation("R_2").unwrap().len(), 9);
        let clash = Structure::from_parts(&["a", "b"], &[("R_1", 1, vec![vec![0]])]).unwrap();
        assert!(matches!(clash.k_enhance(1, &b), Err(Error::SymbolClash(_))));
        assert!(matches!(
            k3().k_enhance(2, &Budget { max_domain: 10, max_tuples: 8 }),
            Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn induced() {
        let s = k3().induced_substructure(&[2, 0]).unwrap();
        assert_eq!(s.domain(), &[Atom::name("3"), Atom::name("1")]);
        assert_eq!(s.relation("E").unwrap().len(), 2);
        assert!(matches!(k3().induced_substructure(&[]), Err(Error::EmptySubset)));
    }

    #[test]
    fn power_sizes() {
        let p = k3().power(2, &Budget::default()).unwrap();
        assert_eq!(p.size(), 9);
        assert_eq!(p.relation("E").unwrap().len(), 36);
    }

    #[test]
    fn tensor_cube_of_k3() {
        let t = k3().tensor_power(3, &Budget::default()).unwrap();
        let e = t.relation("E").unwrap();
        assert_eq!(e.arity(), 8);
        assert_eq!(e.len(), 6);
        let expect = ["(2,2,2)", "(2,2,3)", "(2,3,2)", "(2,3,3)", "(3,2,2)", "(3,2,3)", "(3,3,2)", "(3,3,3)"];
        let found = e.tuples().iter().any(|tup| {
            tup.iter().map(|&x| t.atom(x).to_string()).collect::<Vec<_>>() == expect
        });
        assert!(found);
        assert_eq!(k3().tensor_power(1, &Budget::default()).unwrap(), k3());
    }
}
