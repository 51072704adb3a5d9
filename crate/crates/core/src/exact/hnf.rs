//! Column Hermite normal form over the integers and the affine integer
//! feasibility test built on it.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::linalg::row_reduce;
use super::{Certificate, IpVerdict, LinearSystem};
use crate::error::{Error, Result};
use crate::rational::Rat;
use crate::verdict::Verdict;

/// `H = A U` with `U` unimodular and `H` in column Hermite form: each
/// pivot row's pivot is positive, entries to its right are zero, and
/// entries to its left lie in `[0, pivot)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HnfResult {
    pub h: Vec<Vec<BigInt>>,
    pub u: Vec<Vec<BigInt>>,
    /// `(row, column)` of each pivot, columns `0, 1, 2, ...`.
    pub pivots: Vec<(usize, usize)>,
}

fn col_combine(m: &mut [Vec<BigInt>], a: usize, b: usize, coef: [&BigInt; 4]) {
    // (col_a, col_b) <- (p col_a + q col_b, r col_a + s col_b)
    let [p, q, r, s] = coef;
    for row in m.iter_mut() {
        let (x, y) = (&row[a], &row[b]);
        if x.is_zero() && y.is_zero() {
            continue;
        }
        let na = p * x + q * y;
        let nb = r * x + s * y;
        row[a] = na;
        row[b] = nb;
    }
}

fn col_axpy(m: &mut [Vec<BigInt>], dst: usize, src: usize, f: &BigInt) {
    for row in m.iter_mut() {
        if !row[src].is_zero() {
            let d = &row[src] * f;
            row[dst] -= d;
        }
    }
}

fn col_negate(m: &mut [Vec<BigInt>], c: usize) {
    for row in m.iter_mut() {
        row[c] = -row[c].clone();
    }
}

/// Column Hermite normal form of an integer matrix with `n` columns.
pub fn hnf(a: &[Vec<BigInt>], n: usize) -> Result<HnfResult> {
    if a.iter().any(|r| r.len() != n) {
        return Err(Error::ShapeMismatch("ragged matrix".into()));
    }
    let mut h: Vec<Vec<BigInt>> = a.to_vec();
    let mut u: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    let mut pivots = Vec::new();
    let mut c = 0;
    for i in 0..h.len() {
        if c == n {
            break;
        }
        for j in c + 1..n {
            if h[i][j].is_zero() {
                continue;
            }
            let (x, y) = (h[i][c].clone(), h[i][j].clone());
            let eg = x.extended_gcd(&y);
            let (g, s, t) = (eg.gcd, eg.x, eg.y);
            let (xg, yg) = (&x / &g, &y / &g);
            let neg_yg = -yg;
            // det [[s, -y/g], [t, x/g]] = (s x + t y) / g = 1.
            col_combine(&mut h, c, j, [&s, &t, &neg_yg, &xg]);
            col_combine(&mut u, c, j, [&s, &t, &neg_yg, &xg]);
        }
        if h[i][c].is_zero() {
            continue;
        }
        if h[i][c].is_negative() {
            col_negate(&mut h, c);
            col_negate(&mut u, c);
        }
        let p = h[i][c].clone();
        for j in 0..c {
            let q = h[i][j].div_floor(&p);
            if !q.is_zero() {
                col_axpy(&mut h, j, c, &q);
                col_axpy(&mut u, j, c, &q);
            }
        }
        pivots.push((i, c));
        c += 1;
    }
    Ok(HnfResult { h, u, pivots })
}

fn integer_rows(sys: &LinearSystem, rows: &[usize]) -> Vec<(Vec<BigInt>, BigInt)> {
    // Scaling a row by the lcm of its denominators preserves the solution set.
    rows.iter()
        .map(|&ri| {
            let lr = Rat::from_integer(row_lcm(sys, ri));
            let mut dense = vec![BigInt::zero(); sys.num_vars()];
            for (c, v) in &sys.rows[ri] {
                dense[*c] = (v * &lr).to_integer();
            }
            (dense, (&sys.rhs[ri] * &lr).to_integer())
        })
        .collect()
}

/// Decides whether `A x = b` has an integral solution. Rejections carry
/// `z` with `z^T A` integral and `z^T b` fractional.
pub fn diophantine_solve(sys: &LinearSystem) -> Result<IpVerdict> {
    let m = sys.num_rows();
    let red = row_reduce(sys);
    if let Some(y) = red.inconsistent {
        // y^T A = 0 and y^T b = 1, so y / 2 is a parity witness.
        let half = Rat::new(BigInt::one(), BigInt::from(2));
        return Ok(Verdict::Reject(Certificate::ParityHnf { z: y.iter().map(|v| v * &half).collect() }));
    }
    let rows = &red.independent;
    let scaled = integer_rows(sys, rows);
    let a: Vec<Vec<BigInt>> = scaled.iter().map(|r| r.0.clone()).collect();
    let b: Vec<BigInt> = scaled.iter().map(|r| r.1.clone()).collect();
    let n = sys.num_vars();
    let res = hnf(&a, n)?;
    let r = res.pivots.len();
    debug_assert_eq!(r, rows.len(), "independent rows all pivot");

    // Forward substitution on the lower-triangular pivot block.
    let mut y: Vec<BigInt> = Vec::with_capacity(r);
    for (t, &(i, c)) in res.pivots.iter().enumerate() {
        let mut acc = b[i].clone();
        for (s, ys) in y.iter().enumerate() {
            acc -= &res.h[i][s] * ys;
        }
        let p = &res.h[i][c];
        if !acc.is_multiple_of(p) {
            let z = parity_vector(&res, t);
            let mut full = vec![Rat::zero(); m];
            for (k, &ri) in rows.iter().enumerate() {
                // Rows were scaled by their denominator lcm; fold that scale into z.
                let row_scale = Rat::from_integer(row_lcm(sys, ri));
                full[ri] = &z[k] * &row_scale;
            }
            return Ok(Verdict::Reject(Certificate::ParityHnf { z: full }));
        }
        y.push(acc / p);
    }
    let mut x = vec![BigInt::zero(); n];
    for (k, xk) in x.iter_mut().enumerate() {
        for (s, ys) in y.iter().enumerate() {
            *xk += &res.u[k][s] * ys;
        }
    }
    Ok(Verdict::Accept(x))
}

fn row_lcm(sys: &LinearSystem, ri: usize) -> BigInt {
    let mut l = sys.rhs[ri].denom().clone();
    for (_, v) in &sys.rows[ri] {
        l = l.lcm(v.denom());
    }
    l
}

/// Row `t` of the inverse of the pivot block: `z^T H_P = e_t^T`.
fn parity_vector(res: &HnfResult, t: usize) -> Vec<Rat> {
    let r = res.pivots.len();
    let mut z = vec![Rat::zero(); r];
    for s in (0..=t).rev() {
        let (_, c) = res.pivots[s];
        let mut acc = if s == t { Rat::one() } else { Rat::zero() };
        for (q, zq) in z.iter().enumerate().take(t + 1).skip(s + 1) {
            let (iq, _) = res.pivots[q];
            if !res.h[iq][c].is_zero() {
                acc -= zq * Rat::from_integer(res.h[iq][c].clone());
            }
        }
        let (is, _) = res.pivots[s];
        z[s] = acc / Rat::from_integer(res.h[is][c].clone());
    }
    z
}

#[cfg(test)]
mod tests {
    use super::super::{verify_parity, Domain};
    use super::*;
    use crate::rational::int;
    use proptest::prelude::*;

    fn big(rows: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
        rows.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect()
    }

    fn system(rows: &[Vec<i64>], rhs: &[i64]) -> LinearSystem {
        let n = rows.first().map_or(0, |r| r.len());
        let mut s = LinearSystem::new((0..n).map(|i| format!("x{i}")).collect(), Domain::Integer);
        for (r, b) in rows.iter().zip(rhs) {
            s.add_row(r.iter().enumerate().map(|(c, &v)| (c, int(v))), int(*b));
        }
        s
    }

    fn matmul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
        a.iter()
            .map(|row| {
                (0..b[0].len())
                    .map(|j| row.iter().zip(b).map(|(x, br)| x * &br[j]).sum())
                    .collect()
            })
            .collect()
    }

    /// Bareiss fraction-free determinant, used only as an independent check.
    fn det(m: &[Vec<BigInt>]) -> BigInt {
        let n = m.len();
        let mut a = m.to_vec();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if a[k][k].is_zero() {
                let Some(p) = (k + 1..n).find(|&r| !a[r][k].is_zero()) else { return BigInt::zero() };
                a.swap(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        sign * &a[n - 1][n - 1]
    }

    #[test]
    fn small_forms() {
        let r = hnf(&big(&[vec![2, 4]]), 2).unwrap();
        assert_eq!(r.h, big(&[vec![2, 0]]));
        let r = hnf(&big(&[vec![3, 5], vec![1, 1]]), 2).unwrap();
        assert_eq!(r.h, matmul(&big(&[vec![3, 5], vec![1, 1]]), &r.u));
        assert_eq!(r.h[0][0], BigInt::one());
    }

    #[test]
    fn parity_examples() {
        let s = system(&[vec![2]], &[1]);
        let Verdict::Reject(c) = diophantine_solve(&s).unwrap() else { panic!() };
        assert!(verify_parity(&c, &s).unwrap());
        let s = system(&[vec![1, 1]], &[1]);
        let Verdict::Accept(x) = diophantine_solve(&s).unwrap() else { panic!() };
        assert_eq!(&x[0] + &x[1], BigInt::one());
        // a+b = b+c = a+c = 1 forces a = b = c = 1/2.
        let s = system(&[vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]], &[1, 1, 1]);
        let Verdict::Reject(c) = diophantine_solve(&s).unwrap() else { panic!() };
        assert!(verify_parity(&c, &s).unwrap());
        let s = system(&[vec![1, 1], vec![1, 1]], &[1, 2]);
        let Verdict::Reject(c) = diophantine_solve(&s).unwrap() else { panic!() };
        assert!(verify_parity(&c, &s).unwrap());
    }

    #[test]
    fn rational_rows_are_scaled() {
        let mut s = LinearSystem::new(vec!["a".into()], Domain::Integer);
        s.add_row([(0, crate::rational::rat(1, 2))], crate::rational::rat(1, 2));
        assert_eq!(diophantine_solve(&s).unwrap(), Verdict::Accept(vec![BigInt::one()]));
        let mut s = LinearSystem::new(vec!["a".into()], Domain::Integer);
        s.add_row([(0, crate::rational::rat(2, 3))], crate::rational::rat(1, 3));
        let Verdict::Reject(c) = diophantine_solve(&s).unwrap() else { panic!() };
        assert!(verify_parity(&c, &s).unwrap());
    }

    proptest! {
        #[test]
        fn hnf_is_a_unimodular_factorisation(a in proptest::collection::vec(proptest::collection::vec(-6i64..7, 4), 1..4)) {
            let a = big(&a);
            let r = hnf(&a, 4).unwrap();
            prop_assert_eq!(&r.h, &matmul(&a, &r.u));
            prop_assert!(det(&r.u).abs().is_one());
            for (t, &(i, c)) in r.pivots.iter().enumerate() {
                prop_assert_eq!(c, t);
                prop_assert!(r.h[i][c].is_positive());
                for j in c + 1..4 {
                    prop_assert!(r.h[i][j].is_zero());
                }
                for j in 0..c {
                    prop_assert!(!r.h[i][j].is_negative() && r.h[i][j] < r.h[i][c]);
                }
            }
        }

        #[test]
        fn verdicts_verify(a in proptest::collection::vec(proptest::collection::vec(-4i64..5, 4), 1..4), b in proptest::collection::vec(-4i64..5, 3)) {
            let s = system(&a, &b[..a.len()]);
            match diophantine_solve(&s).unwrap() {
                Verdict::Accept(x) => {
                    let xr: Vec<Rat> = x.into_iter().map(Rat::from_integer).collect();
                    prop_assert!(s.is_solution(&xr));
                }
                Verdict::Reject(c) => prop_assert!(verify_parity(&c, &s).unwrap()),
                Verdict::RejectNumeric(_) => prop_assert!(false),
            }
        }

        #[test]
        fn planted_integer_solutions_are_found(a in proptest::collection::vec(proptest::collection::vec(-4i64..5, 4), 1..4), x in proptest::collection::vec(-3i64..4, 4)) {
            let rhs: Vec<i64> = a.iter().map(|r| r.iter().zip(&x).map(|(p, q)| p * q).sum()).collect();
            prop_assert!(diophantine_solve(&system(&a, &rhs)).unwrap().is_accept());
        }
    }
}
