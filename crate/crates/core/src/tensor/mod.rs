//! Dense tensors over a semiring, with contraction and index-tuple helpers.
//!
//! Indices are 0-based everywhere in this crate. Entries are stored
//! row-major, last mode fastest.

mod semiring;
pub mod structural;

pub use semiring::{Semiring, SemiringTag, REAL_TOL};

use serde_json::{json, Value};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<S> {
    shape: Vec<usize>,
    entries: Vec<S>,
}

impl<S: Semiring> Tensor<S> {
    pub fn zeros(shape: &[usize]) -> Self {
        Tensor { shape: shape.to_vec(), entries: vec![S::zero(); shape.iter().product()] }
    }

    pub fn from_entries(shape: &[usize], entries: Vec<S>) -> Result<Self> {
        let total: usize = shape.iter().product();
        if entries.len() != total {
            return Err(Error::ShapeMismatch(format!(
                "shape {shape:?} needs {total} entries, got {}",
                entries.len()
            )));
        }
        Ok(Tensor { shape: shape.to_vec(), entries })
    }

    pub fn from_fn(shape: &[usize], mut f: impl FnMut(&[usize]) -> S) -> Self {
        let mut entries = Vec::with_capacity(shape.iter().product());
        for_each_index(shape, |idx| entries.push(f(idx)));
        Tensor { shape: shape.to_vec(), entries }
    }

    /// The unit tensor `E_i`: one at `i`, zero elsewhere.
    pub fn unit(shape: &[usize], i: &[usize]) -> Result<Self> {
        let mut t = Tensor::zeros(shape);
        let off = t.offset(i)?;
        t.entries[off] = S::one();
        Ok(t)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn entries(&self) -> &[S] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<S> {
        self.entries
    }

    pub fn offset(&self, idx: &[usize]) -> Result<usize> {
        if idx.len() != self.shape.len() {
            return Err(Error::ShapeMismatch(format!(
                "index of length {} for order-{} tensor",
                idx.len(),
                self.shape.len()
            )));
        }
        let mut off = 0;
        for (&i, &n) in idx.iter().zip(&self.shape) {
            if i >= n {
                return Err(Error::IndexOutOfRange(format!("{idx:?} in shape {:?}", self.shape)));
            }
            off = off * n + i;
        }
        Ok(off)
    }

    pub fn get(&self, idx: &[usize]) -> Result<&S> {
        Ok(&self.entries[self.offset(idx)?])
    }

    pub fn set(&mut self, idx: &[usize], value: S) -> Result<()> {
        let off = self.offset(idx)?;
        self.entries[off] = value;
        Ok(())
    }

    /// Indices of the nonzero entries, in row-major order.
    pub fn support(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut k = 0;
        for_each_index(&self.shape, |idx| {
            if !self.entries[k].is_zero() {
                out.push(idx.to_vec());
            }
            k += 1;
        });
        out
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.shape == other.shape
            && self.entries.iter().zip(&other.entries).all(|(a, b)| a.approx_eq(b, tol))
    }

    /// Same entries, with every mode of size 1 removed.
    pub fn squeeze(&self) -> Self {
        Tensor {
            shape: self.shape.iter().copied().filter(|&n| n != 1).collect(),
            entries: self.entries.clone(),
        }
    }

    pub fn reshape(&self, shape: &[usize]) -> Result<Self> {
        Tensor::from_entries(shape, self.entries.clone())
    }

    pub fn map<T: Semiring>(&self, f: impl Fn(&S) -> T) -> Tensor<T> {
        Tensor { shape: self.shape.clone(), entries: self.entries.iter().map(f).collect() }
    }

    /// Lays out an order-3 tensor as a matrix: row = second mode, and the
    /// column block and position within it come from the first and third
    /// modes. This is the layered display used for tensor-power examples.
    pub fn layered_matrix(&self) -> Result<Vec<Vec<S>>> {
        let [n1, n2, n3] = self.shape[..] else {
            return Err(Error::ShapeMismatch(format!("layered display needs order 3, got {:?}", self.shape)));
        };
        let mut rows = vec![vec![S::zero(); n1 * n3]; n2];
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                for i3 in 0..n3 {
                    rows[i2][i1 * n3 + i3] = self.entries[(i1 * n2 + i2) * n3 + i3].clone();
                }
            }
        }
        Ok(rows)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "shape": self.shape,
            "semiring": S::TAG,
            "entries": self.entries.iter().map(Semiring::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let tag: SemiringTag = serde_json::from_value(v["semiring"].clone())?;
        if tag != S::TAG {
            return Err(Error::SemiringMismatch(format!("expected {:?}, found {tag:?}", S::TAG)));
        }
        let shape: Vec<usize> = serde_json::from_value(v["shape"].clone())?;
        let entries = v["entries"]
            .as_array()
            .ok_or_else(|| Error::MalformedInput("tensor entries must be an array".into()))?
            .iter()
            .map(S::from_json)
            .collect::<Result<Vec<_>>>()?;
        Tensor::from_entries(&shape, entries)
    }
}

/// `T *_l U`: sums over the last `l` modes of `t` against the first `l` of `u`.
pub fn contract<S: Semiring>(t: &Tensor<S>, u: &Tensor<S>, l: usize) -> Result<Tensor<S>> {
    if l > t.order() || l > u.order() {
        return Err(Error::ShapeMismatch(format!("cannot contract {l} modes")));
    }
    let t_keep = &t.shape[..t.order() - l];
    let t_sum = &t.shape[t.order() - l..];
    if t_sum != &u.shape[..l] {
        return Err(Error::ShapeMismatch(format!(
            "contracted modes {t_sum:?} vs {:?}",
            &u.shape[..l]
        )));
    }
    let p: usize = t_keep.iter().product();
    let q: usize = t_sum.iter().product();
    let r: usize = u.shape[l..].iter().product();
    let mut out = vec![S::zero(); p * r];
    for i in 0..p {
        for j in 0..q {
            let tv = &t.entries[i * q + j];
            if tv.is_zero() {
                continue;
            }
            let row = &u.entries[j * r..(j + 1) * r];
            for (o, uv) in out[i * r..(i + 1) * r].iter_mut().zip(row) {
                if !uv.is_zero() {
                    *o = o.add(&tv.mul(uv));
                }
            }
        }
    }
    let shape: Vec<usize> = t_keep.iter().chain(&u.shape[l..]).copied().collect();
    Ok(Tensor { shape, entries: out })
}

/// `s_i = (s_{i_1}, ..., s_{i_k})`.
pub fn project<T: Clone>(s: &[T], i: &[usize]) -> Result<Vec<T>> {
    i.iter()
        .map(|&j| {
            s.get(j)
                .cloned()
                .ok_or_else(|| Error::IndexOutOfRange(format!("position {j} in tuple of length {}", s.len())))
        })
        .collect()
}

/// `s` precedes `t` when every equality among the entries of `s` also holds in `t`.
pub fn precedes<T: PartialEq, U: PartialEq>(s: &[T], t: &[U]) -> Result<bool> {
    if s.len() != t.len() {
        return Err(Error::LengthMismatch(format!("{} vs {}", s.len(), t.len())));
    }
    Ok(precedes_unchecked(s, t))
}

pub(crate) fn precedes_unchecked<T: PartialEq, U: PartialEq>(s: &[T], t: &[U]) -> bool {
    for a in 0..s.len() {
        for b in a + 1..s.len() {
            if s[a] == s[b] && t[a] != t[b] {
                return false;
            }
        }
    }
    true
}

/// Visits every index of `shape` in row-major order.
pub fn for_each_index(shape: &[usize], mut f: impl FnMut(&[usize])) {
    if shape.iter().any(|&n| n == 0) {
        return;
    }
    let mut idx = vec![0; shape.len()];
    loop {
        f(&idx);
        let mut p = shape.len();
        loop {
            if p == 0 {
                return;
            }
            p -= 1;
            idx[p] += 1;
            if idx[p] < shape[p] {
                break;
            }
            idx[p] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, Rat};
    use num_bigint::BigInt;
    use proptest::prelude::*;

    #[test]
    fn project_and_precedes() {
        let s = ["a", "b", "c"];
        assert_eq!(project(&s, &[1, 1]).unwrap(), vec!["b", "b"]);
        assert!(project(&s, &[3]).is_err());
        assert!(precedes(&[1, 1, 2], &[5, 5, 5]).unwrap());
        assert!(!precedes(&[1, 1, 2], &[5, 6, 5]).unwrap());
        assert!(precedes(&[1, 2, 3], &[5, 5, 5]).unwrap());
        assert!(matches!(precedes(&[1], &[1, 2]), Err(Error::LengthMismatch(_))));
    }

    #[test]
    fn matrix_product() {
        let a = Tensor::<BigInt>::from_fn(&[2, 3], |i| BigInt::from(i[0] * 3 + i[1]));
        let b = Tensor::<BigInt>::from_fn(&[3, 2], |i| BigInt::from(i[0] + i[1]));
        let c = contract(&a, &b, 1).unwrap();
        assert_eq!(c.shape(), &[2, 2]);
        let want: Vec<BigInt> = [5, 8, 14, 26].into_iter().map(BigInt::from).collect();
        assert_eq!(c.entries(), &want[..]);
        assert!(contract(&a, &a, 1).is_err());
    }

    #[test]
    fn unit_tensor_and_support() {
        let e = Tensor::<Rat>::unit(&[2, 3], &[1, 2]).unwrap();
        assert_eq!(e.support(), vec![vec![1, 2]]);
        assert_eq!(*e.get(&[1, 2]).unwrap(), int(1));
        assert!(Tensor::<Rat>::unit(&[2, 3], &[2, 0]).is_err());
    }

    #[test]
    fn json_round_trip_and_mismatch() {
        let t = Tensor::<Rat>::from_fn(&[2, 2], |i| crate::rational::rat(i[0] as i64 + 1, 3));
        let v = t.to_json();
        assert_eq!(v["entries"][0], "1/3");
        assert_eq!(Tensor::<Rat>::from_json(&v).unwrap(), t);
        assert!(matches!(Tensor::<f64>::from_json(&v), Err(Error::SemiringMismatch(_))));
    }

    #[test]
    fn layered_display() {
        let t = Tensor::<BigInt>::from_fn(&[2, 2, 2], |i| BigInt::from(i[0] * 4 + i[1] * 2 + i[2]));
        let m = t.layered_matrix().unwrap();
        let s: Vec<Vec<String>> = m.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect();
        assert_eq!(s, vec![vec!["0", "1", "4", "5"], vec!["2", "3", "6", "7"]]);
    }

    #[test]
    fn real_tolerance() {
        let a = Tensor::<f64>::from_entries(&[2], vec![1.0, 0.0]).unwrap();
        let b = Tensor::<f64>::from_entries(&[2], vec![1.0 + 1e-12, 1e-12]).unwrap();
        assert!(a.approx_eq(&b, REAL_TOL));
        assert!(b.support().len() == 1);
    }

    fn small_tensor(shape: Vec<usize>) -> impl Strategy<Value = Tensor<BigInt>> {
        let n: usize = shape.iter().product();
        proptest::collection::vec(-3i64..4, n).prop_map(move |v| {
            Tensor::from_entries(&shape, v.into_iter().map(BigInt::from).collect()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn contraction_is_associative(
            t in small_tensor(vec![2, 3]),
            u in small_tensor(vec![3, 2, 2]),
            v in small_tensor(vec![2, 2, 3]),
        ) {
            let left = contract(&contract(&t, &u, 1).unwrap(), &v, 2).unwrap();
            let right = contract(&t, &contract(&u, &v, 2).unwrap(), 1).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn contracting_with_units_reads_entries(t in small_tensor(vec![2, 3, 2]), i in 0usize..2, j in 0usize..3) {
            let e = Tensor::<BigInt>::unit(&[2, 3], &[i, j]).unwrap();
            let row = contract(&e, &t, 2).unwrap();
            for c in 0..2 {
                prop_assert_eq!(row.get(&[c]).unwrap(), t.get(&[i, j, c]).unwrap());
            }
        }

        #[test]
        fn precedes_is_a_preorder(s in proptest::collection::vec(0u8..3, 4), t in proptest::collection::vec(0u8..3, 4), w in proptest::collection::vec(0u8..3, 4)) {
            prop_assert!(precedes(&s, &s).unwrap());
            if precedes(&s, &t).unwrap() && precedes(&t, &w).unwrap() {
                prop_assert!(precedes(&s, &w).unwrap());
            }
        }
    }
}
