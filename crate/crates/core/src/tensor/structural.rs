//! The tensors `P_i` and `Pi_i` that encode a structure's relations and the
//! projections of index tuples.

use super::{project, Semiring, Tensor};
use crate::error::{Error, Result};
use crate::structure::{decode, Structure};

/// `P_i` for relation `symbol` of `a` and `i in [r]^k`. Shape is `n` repeated
/// `k` times followed by `|R^A|`; the entry at `(b, j)` is one iff the `j`-th
/// tuple of `R^A` (canonical order) projects along `i` to `b`.
pub fn build_p<S: Semiring>(a: &Structure, symbol: &str, i: &[usize]) -> Result<Tensor<S>> {
    let rel = a
        .relation(symbol)
        .ok_or_else(|| Error::SignatureMismatch(format!("no symbol `{symbol}`")))?;
    if rel.is_empty() {
        return Err(Error::EmptyRelation(symbol.to_string()));
    }
    if let Some(&bad) = i.iter().find(|&&p| p >= rel.arity()) {
        return Err(Error::IndexOutOfRange(format!("position {bad} for arity {}", rel.arity())));
    }
    let n = a.size();
    let k = i.len();
    let m = rel.len();
    let mut shape = vec![n; k];
    shape.push(m);
    let mut t = Tensor::zeros(&shape);
    for (j, tuple) in rel.tuples().iter().enumerate() {
        let mut idx = project(tuple, i)?;
        idx.push(j);
        t.set(&idx, S::one())?;
    }
    Ok(t)
}

/// `Pi_i` for `i in [k]^k` over a domain of size `n`. Shape is `n` repeated
/// `2k` times; the entry at `(b, c)` is one iff `c_i = b`.
pub fn build_pi<S: Semiring>(n: usize, i: &[usize]) -> Result<Tensor<S>> {
    let k = i.len();
    if k == 0 {
        return Err(Error::ShapeMismatch("empty index tuple".into()));
    }
    if let Some(&bad) = i.iter().find(|&&p| p >= k) {
        return Err(Error::IndexOutOfRange(format!("position {bad} for k = {k}")));
    }
    let mut t = Tensor::zeros(&vec![n; 2 * k]);
    let cells = n.pow(k as u32);
    for c in 0..cells {
        let cv = decode(c, n, k);
        let mut idx = project(&cv, i)?;
        idx.extend(cv);
        t.set(&idx, S::one())?;
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{encode, lex_tuples};
    use crate::templates;
    use crate::tensor::contract;
    use num_bigint::BigInt;

    #[test]
    fn p_row_law_on_k3() {
        let a = templates::k3();
        let rel = a.relation("E").unwrap();
        for i in lex_tuples(2, 2) {
            let p = build_p::<BigInt>(&a, "E", &i).unwrap();
            for b in lex_tuples(3, 2) {
                let e = Tensor::<BigInt>::unit(&[3, 3], &b).unwrap();
                let row = contract(&e, &p, 2).unwrap();
                for (j, t) in rel.tuples().iter().enumerate() {
                    let want = u8::from(project(t, &i).unwrap() == b);
                    assert_eq!(row.entries()[j], BigInt::from(want));
                }
            }
        }
    }

    #[test]
    fn pi_identity_and_constant() {
        let id = build_pi::<BigInt>(2, &[0, 1]).unwrap();
        let t = Tensor::<BigInt>::from_fn(&[2, 2], |i| BigInt::from(encode(i.iter().copied(), 2) + 1));
        assert_eq!(contract(&id, &t, 2).unwrap(), t);
        let c = build_pi::<bool>(2, &[0, 0]).unwrap();
        assert_eq!(c.support().len(), 4);
        assert!(build_pi::<bool>(2, &[0, 2]).is_err());
    }

    #[test]
    fn p_errors() {
        let empty = crate::Structure::from_parts(&["a"], &[("E", 2, vec![])]).unwrap();
        assert!(matches!(build_p::<bool>(&empty, "E", &[0]), Err(Error::EmptyRelation(_))));
        assert!(build_p::<bool>(&templates::k3(), "E", &[2]).is_err());
    }
}
