//! Concrete minions as sets of `L x d` matrices closed under minors.
//!
//! An element stores its matrix as a [`Block`], which keeps each column group
//! in its own semiring so that semidirect products such as the BLP+AIP minion
//! stay exact.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::rational::Rat;
use crate::tensor::{Semiring, Tensor};

/// Absolute tolerance for the conditions defining the SDP minion.
pub const S_TOL: f64 = 1e-8;

/// Largest arity accepted by the subset enumeration in [`is_conic_matrix`].
pub const CONIC_MAX_ROWS: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MinionTag {
    /// Nonzero Boolean columns; the free structures of this minion decide arc consistency.
    H,
    /// Stochastic rational columns.
    Qconv,
    /// Integer columns summing to one.
    Zaff,
    /// Real matrices with orthogonal rows and unit total norm.
    S,
    /// Pairs `(q, z)` with `q` in `Qconv`, `z` in `Zaff` and `supp z` inside `supp q`.
    Mba,
    /// Semidirect product of two minions.
    Product(Box<MinionTag>, Box<MinionTag>),
}

impl fmt::Display for MinionTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MinionTag::H => write!(f, "H"),
            MinionTag::Qconv => write!(f, "QCONV"),
            MinionTag::Zaff => write!(f, "ZAFF"),
            MinionTag::S => write!(f, "S"),
            MinionTag::Mba => write!(f, "MBA"),
            MinionTag::Product(a, b) => write!(f, "PRODUCT({a},{b})"),
        }
    }
}

/// Matrix storage. Order-2 tensors with shape `[L, d]`.
#[derive(Clone, Debug, PartialEq)]
pub enum Block {
    Bool(Tensor<bool>),
    Int(Tensor<BigInt>),
    Rat(Tensor<Rat>),
    Real(Tensor<f64>),
    /// Horizontal concatenation of two blocks with the same number of rows.
    Pair(Box<Block>, Box<Block>),
}

impl Block {
    pub fn rows(&self) -> usize {
        match self {
            Block::Bool(t) => t.shape()[0],
            Block::Int(t) => t.shape()[0],
            Block::Rat(t) => t.shape()[0],
            Block::Real(t) => t.shape()[0],
            Block::Pair(a, _) => a.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            Block::Bool(t) => t.shape()[1],
            Block::Int(t) => t.shape()[1],
            Block::Rat(t) => t.shape()[1],
            Block::Real(t) => t.shape()[1],
            Block::Pair(a, b) => a.cols() + b.cols(),
        }
    }

    /// Bitmask of rows that are entirely zero.
    fn zero_rows(&self) -> u64 {
        fn of<S: Semiring>(t: &Tensor<S>) -> u64 {
            let d = t.shape()[1];
            let mut mask = 0;
            for (i, row) in t.entries().chunks(d.max(1)).enumerate() {
                if d == 0 || row.iter().all(Semiring::is_zero) {
                    mask |= 1 << i;
                }
            }
            mask
        }
        match self {
            Block::Bool(t) => of(t),
            Block::Int(t) => of(t),
            Block::Rat(t) => of(t),
            Block::Real(t) => of(t),
            Block::Pair(a, b) => a.zero_rows() & b.zero_rows(),
        }
    }

    /// `P * M` with `P[i][j] = 1` iff `pi(j) = i`.
    fn minor(&self, pi: &[usize], target: usize) -> Block {
        fn of<S: Semiring>(t: &Tensor<S>, pi: &[usize], target: usize) -> Tensor<S> {
            let d = t.shape()[1];
            let mut entries = vec![S::zero(); target * d];
            for (j, &i) in pi.iter().enumerate() {
                for c in 0..d {
                    entries[i * d + c] = entries[i * d + c].add(&t.entries()[j * d + c]);
                }
            }
            Tensor::from_entries(&[target, d], entries).expect("shape fixed")
        }
        match self {
            Block::Bool(t) => Block::Bool(of(t, pi, target)),
            Block::Int(t) => Block::Int(of(t, pi, target)),
            Block::Rat(t) => Block::Rat(of(t, pi, target)),
            Block::Real(t) => Block::Real(of(t, pi, target)),
            Block::Pair(a, b) => Block::Pair(Box::new(a.minor(pi, target)), Box::new(b.minor(pi, target))),
        }
    }

    /// For every subset `V` of rows (as a bitmask), whether the rows in `V` sum to zero.
    fn zero_sum_subsets(&self) -> Vec<bool> {
        fn of<S: Semiring>(t: &Tensor<S>) -> Vec<bool> {
            let (l, d) = (t.shape()[0], t.shape()[1]);
            let rows: Vec<&[S]> = (0..l).map(|i| &t.entries()[i * d..(i + 1) * d]).collect();
            let mut out = vec![false; 1 << l];
            let mut sum = vec![S::zero(); d];
            dfs(&rows, 0, 0, &mut sum, &mut out);
            out
        }
        fn dfs<S: Semiring>(rows: &[&[S]], j: usize, mask: usize, sum: &mut Vec<S>, out: &mut [bool]) {
            if j == rows.len() {
                out[mask] = sum.iter().all(Semiring::is_zero);
                return;
            }
            dfs(rows, j + 1, mask, sum, out);
            let saved = sum.clone();
            for (s, r) in sum.iter_mut().zip(rows[j]) {
                *s = s.add(r);
            }
            dfs(rows, j + 1, mask | (1 << j), sum, out);
            *sum = saved;
        }
        match self {
            // Booleans have no cancellation: a subset sums to zero iff all its rows are zero.
            Block::Bool(t) => {
                let zero = Block::Bool(t.clone()).zero_rows() as usize;
                (0..1usize << t.shape()[0]).map(|m| m & !zero == 0).collect()
            }
            Block::Int(t) => of(t),
            Block::Rat(t) => of(t),
            Block::Real(t) => of(t),
            Block::Pair(a, b) => {
                let (x, y) = (a.zero_sum_subsets(), b.zero_sum_subsets());
                x.iter().zip(&y).map(|(p, q)| *p && *q).collect()
            }
        }
    }

    fn to_rows_json(&self) -> Vec<Vec<Value>> {
        fn of<S: Semiring>(t: &Tensor<S>) -> Vec<Vec<Value>> {
            let d = t.shape()[1];
            (0..t.shape()[0])
                .map(|i| t.entries()[i * d..(i + 1) * d].iter().map(Semiring::to_json).collect())
                .collect()
        }
        match self {
            Block::Bool(t) => of(t),
            Block::Int(t) => of(t),
            Block::Rat(t) => of(t),
            Block::Real(t) => of(t),
            Block::Pair(a, b) => a
                .to_rows_json()
                .into_iter()
                .zip(b.to_rows_json())
                .map(|(mut x, y)| {
                    x.extend(y);
                    x
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinionElement {
    pub tag: MinionTag,
    pub matrix: Block,
}

/// A map `pi: [from] -> [to]` between arities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinorMap {
    pub to: usize,
    pub map: Vec<usize>,
}

impl MinorMap {
    pub fn new(to: usize, map: Vec<usize>) -> Result<MinorMap> {
        if let Some(&bad) = map.iter().find(|&&i| i >= to) {
            return Err(Error::IndexOutOfRange(format!("image {bad} not below {to}")));
        }
        Ok(MinorMap { to, map })
    }

    pub fn from_len(&self) -> usize {
        self.map.len()
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &MinorMap) -> Result<MinorMap> {
        if other.from_len() != self.to {
            return Err(Error::ArityMismatch("maps do not compose".into()));
        }
        MinorMap::new(other.to, self.map.iter().map(|&i| other.map[i]).collect())
    }
}

fn column<S: Semiring>(entries: Vec<S>) -> Tensor<S> {
    let l = entries.len();
    Tensor::from_entries(&[l, 1], entries).expect("column shape")
}

impl MinionElement {
    pub fn h(bits: &[bool]) -> Self {
        MinionElement { tag: MinionTag::H, matrix: Block::Bool(column(bits.to_vec())) }
    }

    /// H element of arity `l` whose row `i` is set iff bit `i` of `mask` is.
    pub fn h_from_mask(l: usize, mask: u64) -> Self {
        Self::h(&(0..l).map(|i| mask >> i & 1 == 1).collect::<Vec<_>>())
    }

    pub fn qconv(entries: Vec<Rat>) -> Self {
        MinionElement { tag: MinionTag::Qconv, matrix: Block::Rat(column(entries)) }
    }

    pub fn zaff(entries: Vec<BigInt>) -> Self {
        MinionElement { tag: MinionTag::Zaff, matrix: Block::Int(column(entries)) }
    }

    pub fn s(matrix: Tensor<f64>) -> Self {
        MinionElement { tag: MinionTag::S, matrix: Block::Real(matrix) }
    }

    pub fn mba(q: Vec<Rat>, z: Vec<BigInt>) -> Self {
        MinionElement {
            tag: MinionTag::Mba,
            matrix: Block::Pair(Box::new(Block::Rat(column(q))), Box::new(Block::Int(column(z)))),
        }
    }

    pub fn arity(&self) -> usize {
        self.matrix.rows()
    }

    pub fn depth(&self) -> usize {
        self.matrix.cols()
    }

    /// For H elements, the set rows as a bitmask.
    pub fn h_mask(&self) -> Option<u64> {
        match &self.matrix {
            Block::Bool(t) if self.tag == MinionTag::H => Some(
                t.entries().iter().enumerate().filter(|(_, &b)| b).fold(0, |m, (i, _)| m | 1 << i),
            ),
            _ => None,
        }
    }

    pub fn is_member(&self) -> bool {
        check_membership(&self.matrix, &self.tag)
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "arity": self.arity(),
            "depth": self.depth(),
            "tag": self.tag.to_string(),
            "matrix": self.matrix.to_rows_json(),
        });
        if let (Block::Pair(a, b), MinionTag::Product(ta, tb)) = (&self.matrix, &self.tag) {
            v["components"] = json!([
                MinionElement { tag: (**ta).clone(), matrix: (**a).clone() }.to_json(),
                MinionElement { tag: (**tb).clone(), matrix: (**b).clone() }.to_json(),
            ]);
        }
        v
    }

    pub fn from_json(v: &Value) -> Result<MinionElement> {
        let tag = v["tag"].as_str().ok_or_else(|| Error::MalformedInput("missing tag".into()))?;
        let rows = v["matrix"]
            .as_array()
            .ok_or_else(|| Error::MalformedInput("matrix must be an array of rows".into()))?;
        let grid: Vec<&Vec<Value>> = rows
            .iter()
            .map(|r| r.as_array().ok_or_else(|| Error::MalformedInput("row must be an array".into())))
            .collect::<Result<_>>()?;
        let l = grid.len();
        let d = grid.first().map_or(0, |r| r.len());
        if grid.iter().any(|r| r.len() != d) {
            return Err(Error::ShapeMismatch("ragged matrix".into()));
        }
        fn parse<S: Semiring>(grid: &[&Vec<Value>], cols: std::ops::Range<usize>) -> Result<Tensor<S>> {
            let w = cols.len();
            let entries = grid
                .iter()
                .flat_map(|r| r[cols.clone()].iter())
                .map(S::from_json)
                .collect::<Result<Vec<_>>>()?;
            Tensor::from_entries(&[grid.len(), w], entries)
        }
        let elem = match tag {
            "H" => MinionElement { tag: MinionTag::H, matrix: Block::Bool(parse(&grid, 0..d)?) },
            "QCONV" => MinionElement { tag: MinionTag::Qconv, matrix: Block::Rat(parse(&grid, 0..d)?) },
            "ZAFF" => MinionElement { tag: MinionTag::Zaff, matrix: Block::Int(parse(&grid, 0..d)?) },
            "S" => MinionElement { tag: MinionTag::S, matrix: Block::Real(parse(&grid, 0..d)?) },
            "MBA" => {
                if d != 2 {
                    return Err(Error::ShapeMismatch("MBA elements have two columns".into()));
                }
                MinionElement {
                    tag: MinionTag::Mba,
                    matrix: Block::Pair(
                        Box::new(Block::Rat(parse(&grid, 0..1)?)),
                        Box::new(Block::Int(parse(&grid, 1..2)?)),
                    ),
                }
            }
            t if t.starts_with("PRODUCT") => {
                let comps = v["components"]
                    .as_array()
                    .filter(|c| c.len() == 2)
                    .ok_or_else(|| Error::MalformedInput("product needs two components".into()))?;
                let a = MinionElement::from_json(&comps[0])?;
                let b = MinionElement::from_json(&comps[1])?;
                MinionElement {
                    tag: MinionTag::Product(Box::new(a.tag), Box::new(b.tag)),
                    matrix: Block::Pair(Box::new(a.matrix), Box::new(b.matrix)),
                }
            }
            other => return Err(Error::MalformedInput(format!("unknown minion tag `{other}`"))),
        };
        if elem.arity() != l {
            return Err(Error::ShapeMismatch("component rows disagree with matrix".into()));
        }
        Ok(elem)
    }
}

fn single_column<S: Semiring>(t: &Tensor<S>) -> Option<&[S]> {
    (t.shape()[1] == 1).then(|| t.entries())
}

/// Whether `matrix` lies in the minion named by `tag`.
pub fn check_membership(matrix: &Block, tag: &MinionTag) -> bool {
    match (tag, matrix) {
        (MinionTag::H, Block::Bool(t)) => single_column(t).is_some_and(|c| c.iter().any(|&b| b)),
        (MinionTag::Qconv, Block::Rat(t)) => single_column(t).is_some_and(|c| {
            c.iter().all(|q| !q.is_negative()) && c.iter().sum::<Rat>().is_one()
        }),
        (MinionTag::Zaff, Block::Int(t)) => {
            single_column(t).is_some_and(|c| c.iter().sum::<BigInt>().is_one())
        }
        (MinionTag::S, Block::Real(t)) => s_conditions(t),
        (MinionTag::Mba, Block::Pair(a, b)) => {
            check_membership(a, &MinionTag::Qconv)
                && check_membership(b, &MinionTag::Zaff)
                && supports_nested(a, b)
        }
        (MinionTag::Product(ta, tb), Block::Pair(a, b)) => {
            check_membership(a, ta) && check_membership(b, tb) && supports_nested(a, b)
        }
        _ => false,
    }
}

/// Rows of `m` are pairwise orthogonal and their squared norms sum to one.
/// Finite storage gives finitely many nonzero columns; entries must be finite.
fn s_conditions(m: &Tensor<f64>) -> bool {
    let (l, d) = (m.shape()[0], m.shape()[1]);
    let e = m.entries();
    if e.iter().any(|x| !x.is_finite()) {
        return false;
    }
    let dot = |i: usize, j: usize| (0..d).map(|c| e[i * d + c] * e[j * d + c]).sum::<f64>();
    for i in 0..l {
        for j in i + 1..l {
            if dot(i, j).abs() > S_TOL {
                return false;
            }
        }
    }
    ((0..l).map(|i| dot(i, i)).sum::<f64>() - 1.0).abs() <= S_TOL
}

/// Every zero row of `a` is a zero row of `b`.
fn supports_nested(a: &Block, b: &Block) -> bool {
    let za = a.zero_rows();
    za & !b.zero_rows() == 0
}

/// `minor(M, pi)`: row `i` of the result is the sum of the rows `j` of `M`
/// with `pi(j) = i`.
pub fn minor(m: &MinionElement, pi: &MinorMap) -> Result<MinionElement> {
    if pi.from_len() != m.arity() {
        return Err(Error::ArityMismatch(format!(
            "map from [{}] applied to element of arity {}",
            pi.from_len(),
            m.arity()
        )));
    }
    if pi.to > 64 {
        return Err(Error::BudgetExceeded("minion arities above 64".into()));
    }
    let out = MinionElement { tag: m.tag.clone(), matrix: m.matrix.minor(&pi.map, pi.to) };
    if m.is_member() && !out.is_member() {
        return Err(Error::MembershipLost(format!("{} minor of arity {}", m.tag, pi.to)));
    }
    Ok(out)
}

/// `M` is conic when nonzero and no nonempty set of nonzero rows sums to zero.
pub fn is_conic_matrix(m: &Block) -> Result<bool> {
    let l = m.rows();
    if l > CONIC_MAX_ROWS {
        return Err(Error::BudgetExceeded(format!("conic check on {l} rows > {CONIC_MAX_ROWS}")));
    }
    let zero = m.zero_rows() as usize;
    if zero == (1usize << l) - 1 {
        return Ok(false);
    }
    let sums = m.zero_sum_subsets();
    Ok(sums.iter().enumerate().all(|(v, &z)| !z || v & !zero == 0))
}

/// The semidirect product element `[M N]`.
pub fn semidirect(m: &MinionElement, n: &MinionElement) -> Result<MinionElement> {
    if m.arity() != n.arity() {
        return Err(Error::ArityMismatch(format!("{} vs {}", m.arity(), n.arity())));
    }
    if !supports_nested(&m.matrix, &n.matrix) {
        return Err(Error::SupportViolation("a zero row of M is nonzero in N".into()));
    }
    Ok(MinionElement {
        tag: MinionTag::Product(Box::new(m.tag.clone()), Box::new(n.tag.clone())),
        matrix: Block::Pair(Box::new(m.matrix.clone()), Box::new(n.matrix.clone())),
    })
}

/// All `2^L - 1` elements of H of arity `L`, ordered by bitmask with row 1 as
/// the least significant bit.
pub fn enumerate_h(l: usize) -> Result<Vec<MinionElement>> {
    if l > CONIC_MAX_ROWS {
        return Err(Error::BudgetExceeded(format!("enumerating H of arity {l}")));
    }
    Ok((1u64..1 << l).map(|m| MinionElement::h_from_mask(l, m)).collect())
}

/// Identity element of arity one: the matrix `(1)` for exact minions.
pub fn unit_element(tag: &MinionTag) -> MinionElement {
    match tag {
        MinionTag::H => MinionElement::h(&[true]),
        MinionTag::Qconv => MinionElement::qconv(vec![crate::rational::int(1)]),
        MinionTag::Zaff => MinionElement::zaff(vec![BigInt::from(1)]),
        MinionTag::S => MinionElement::s(Tensor::from_entries(&[1, 1], vec![1.0]).expect("1x1")),
        MinionTag::Mba => MinionElement::mba(vec![crate::rational::int(1)], vec![BigInt::from(1)]),
        MinionTag::Product(a, b) => semidirect(&unit_element(a), &unit_element(b)).expect("units nest"),
    }
}
