//! The lift-and-project equality system behind SA^k, AIP^k and BA^k.
//!
//! Both structures are `k`-enhanced first. There is a variable
//! `lambda[R, x, a]` for every symbol `R` (including `R_k`), `x in R^X` and
//! `a in R^A` with `x ≺ a`; the pairs with `x ⊀ a` are forced to zero and
//! never materialised. Rows:
//!
//! * for every `R, x`: the `lambda[R, x, .]` sum to one;
//! * for every `R, x`, `i in [r]^k` and `b in A^k`: the `lambda[R, x, a]`
//!   with `a_i = b` sum to `lambda[R_k, x_i, b]`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::exact::{diophantine_solve, lp_feasible, lp_maximize, Certificate, Domain, LinearSystem, LpOptimum};
use crate::homomorphism::PartialMap;
use crate::rational::{format_rat, int, Rat};
use crate::structure::{encode, enhancement_symbol, lex_tuples, Structure};
use crate::tensor::{precedes_unchecked, project};
use crate::verdict::Verdict;

use super::bw::BWFamily;

/// Identifies `lambda[symbol, x, a]` by atom ids of the base structures.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LambdaKey {
    pub symbol: String,
    pub x: Vec<usize>,
    pub a: Vec<usize>,
}

impl LambdaKey {
    pub fn label(&self, x: &Structure, a: &Structure) -> String {
        let xs: Vec<String> = self.x.iter().map(|&v| x.atom(v).to_string()).collect();
        let as_: Vec<String> = self.a.iter().map(|&v| a.atom(v).to_string()).collect();
        format!("{}|({})|({})", self.symbol, xs.join(","), as_.join(","))
    }
}

impl fmt::Display for LambdaKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{:?}|{:?}", self.symbol, self.x, self.a)
    }
}

/// The assembled system together with the enhanced structures it came from.
#[derive(Clone, Debug)]
pub struct ClubSystem {
    pub level: usize,
    /// `X` and `A` after `k`-enhancement.
    pub x: Structure,
    pub a: Structure,
    pub keys: Vec<LambdaKey>,
    pub system: LinearSystem,
    index: HashMap<LambdaKey, usize>,
}

impl ClubSystem {
    pub fn var(&self, key: &LambdaKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn num_vars(&self) -> usize {
        self.keys.len()
    }

    pub fn num_rows(&self) -> usize {
        self.system.num_rows()
    }

    fn values<T: Clone>(&self, v: &[T]) -> BTreeMap<LambdaKey, T> {
        self.keys.iter().cloned().zip(v.iter().cloned()).collect()
    }

    /// The `lambda[R_k, x, .]` variables, grouped per `x in X^k`.
    pub fn enhancement_symbol(&self) -> String {
        enhancement_symbol(self.level)
    }
}

/// Builds the system for `(X, A)` at level `k`.
pub fn build_club_system(x: &Structure, a: &Structure, k: usize, budget: &Budget) -> Result<ClubSystem> {
    x.same_signature(a)?;
    let xe = x.k_enhance(k, budget)?;
    let ae = a.k_enhance(k, budget)?;
    let rk = enhancement_symbol(k);
    let (nx, na) = (xe.size(), ae.size());
    let mut estimate: u128 = 0;
    for (s, r) in xe.relations() {
        estimate += r.len() as u128 * ae.relation(s).expect("same signature").len() as u128;
    }
    budget.check_tuples(estimate, "lambda variables")?;

    let mut keys = Vec::new();
    let mut index = HashMap::new();
    for (s, rx) in xe.relations() {
        let ra = ae.relation(s).expect("same signature");
        for xt in rx.tuples() {
            for at in ra.tuples() {
                if precedes_unchecked(xt, at) {
                    let key = LambdaKey { symbol: s.clone(), x: xt.clone(), a: at.clone() };
                    index.insert(key.clone(), keys.len());
                    keys.push(key);
                }
            }
        }
    }
    let names = keys.iter().map(|key| key.label(&xe, &ae)).collect();
    let mut sys = LinearSystem::new(names, Domain::NonnegRational);
    let one = int(1);
    let bs = lex_tuples(na, k);

    for (s, rx) in xe.relations() {
        let ra = ae.relation(s).expect("same signature");
        for xt in rx.tuples() {
            let local: Vec<(usize, &Vec<usize>)> = ra
                .tuples()
                .iter()
                .filter_map(|at| index.get(&LambdaKey { symbol: s.clone(), x: xt.clone(), a: at.clone() }).map(|&v| (v, at)))
                .collect();
            sys.add_row(local.iter().map(|&(v, _)| (v, one.clone())), one.clone());
            for i in lex_tuples(rx.arity(), k) {
                let xi = project(xt, &i)?;
                let mut groups: Vec<Vec<usize>> = vec![Vec::new(); bs.len()];
                for &(v, at) in &local {
                    groups[encode(i.iter().map(|&p| at[p]), na)].push(v);
                }
                for (bi, b) in bs.iter().enumerate() {
                    let target = index.get(&LambdaKey { symbol: rk.clone(), x: xi.clone(), a: b.clone() });
                    if groups[bi].is_empty() && target.is_none() {
                        continue;
                    }
                    let mut row: Vec<(usize, Rat)> = groups[bi].iter().map(|&v| (v, one.clone())).collect();
                    if let Some(&t) = target {
                        row.push((t, -one.clone()));
                    }
                    sys.add_row(row, Rat::zero());
                    if sys.rows.last().is_some_and(Vec::is_empty) {
                        sys.rows.pop();
                        sys.rhs.pop();
                    }
                }
            }
        }
    }
    debug_assert!(nx > 0);
    Ok(ClubSystem { level: k, x: xe, a: ae, keys, system: sys, index })
}

/// Nonnegative rational solution of the system.
#[derive(Clone, Debug, PartialEq)]
pub struct SAWitness {
    pub level: usize,
    pub values: BTreeMap<LambdaKey, Rat>,
}

/// Integer solution of the system.
#[derive(Clone, Debug, PartialEq)]
pub struct AIPWitness {
    pub level: usize,
    pub values: BTreeMap<LambdaKey, BigInt>,
}

/// An LP solution attaining the maximal support and an integer solution
/// vanishing outside it.
#[derive(Clone, Debug, PartialEq)]
pub struct BAWitness {
    pub lp: SAWitness,
    pub ip: AIPWitness,
    pub maximal_support: Vec<LambdaKey>,
}

fn nonzero_json<T>(values: &BTreeMap<LambdaKey, T>, x: &Structure, a: &Structure, fmt: impl Fn(&T) -> Option<String>) -> Value {
    let map: serde_json::Map<String, Value> = values
        .iter()
        .filter_map(|(k, v)| fmt(v).map(|s| (k.label(x, a), json!(s))))
        .collect();
    Value::Object(map)
}

impl SAWitness {
    pub fn to_json(&self, x: &Structure, a: &Structure) -> Value {
        nonzero_json(&self.values, x, a, |v| (!v.is_zero()).then(|| format_rat(v)))
    }

    pub fn as_vector(&self, sys: &ClubSystem) -> Vec<Rat> {
        sys.keys.iter().map(|k| self.values.get(k).cloned().unwrap_or_else(Rat::zero)).collect()
    }
}

impl AIPWitness {
    pub fn to_json(&self, x: &Structure, a: &Structure) -> Value {
        nonzero_json(&self.values, x, a, |v| (!v.is_zero()).then(|| v.to_string()))
    }

    pub fn as_vector(&self, sys: &ClubSystem) -> Vec<Rat> {
        sys.keys
            .iter()
            .map(|k| Rat::from_integer(self.values.get(k).cloned().unwrap_or_default()))
            .collect()
    }
}

impl BAWitness {
    pub fn to_json(&self, x: &Structure, a: &Structure) -> Value {
        let support: Vec<String> = self.maximal_support.iter().map(|k| k.label(x, a)).collect();
        json!({ "lp": self.lp.to_json(x, a), "ip": self.ip.to_json(x, a), "maximal_support": support })
    }
}

/// Output of a driver on the lift-and-project system.
#[derive(Clone, Debug)]
pub struct ClubRun<W, C> {
    pub system: ClubSystem,
    pub verdict: Verdict<W, C>,
}

pub fn sa(x: &Structure, a: &Structure, k: usize, budget: &Budget) -> Result<ClubRun<SAWitness, Certificate>> {
    let system = build_club_system(x, a, k, budget)?;
    let verdict = match lp_feasible(&system.system)? {
        Verdict::Accept(v) => Verdict::Accept(SAWitness { level: k, values: system.values(&v) }),
        Verdict::Reject(c) => Verdict::Reject(c),
        Verdict::RejectNumeric(d) => Verdict::RejectNumeric(d),
    };
    Ok(ClubRun { system, verdict })
}

pub fn aip(x: &Structure, a: &Structure, k: usize, budget: &Budget) -> Result<ClubRun<AIPWitness, Certificate>> {
    let system = build_club_system(x, a, k, budget)?;
    let verdict = match diophantine_solve(&system.system.with_domain(Domain::Integer))? {
        Verdict::Accept(v) => Verdict::Accept(AIPWitness { level: k, values: system.values(&v) }),
        Verdict::Reject(c) => Verdict::Reject(c),
        Verdict::RejectNumeric(d) => Verdict::RejectNumeric(d),
    };
    Ok(ClubRun { system, verdict })
}

/// Largest support of a nonnegative solution, with a solution attaining it.
/// Each round maximises the total mass on variables not yet seen positive;
/// an optimum of zero proves the rest vanish on the whole feasible region.
pub fn maximal_support(sys: &LinearSystem) -> Result<std::result::Result<(Vec<bool>, Vec<Rat>), Certificate>> {
    let first = match lp_feasible(sys)? {
        Verdict::Accept(v) => v,
        Verdict::Reject(c) => return Ok(Err(c)),
        Verdict::RejectNumeric(_) => unreachable!("exact solver"),
    };
    let n = sys.num_vars();
    let mut support: Vec<bool> = first.iter().map(|v| v.is_positive()).collect();
    let mut points = vec![first];
    loop {
        if support.iter().all(|&s| s) {
            break;
        }
        let c: Vec<Rat> = support.iter().map(|&s| if s { Rat::zero() } else { int(1) }).collect();
        match lp_maximize(sys, &c)? {
            LpOptimum::Optimal { x, value } => {
                if !value.is_positive() {
                    break;
                }
                for (s, v) in support.iter_mut().zip(&x) {
                    *s |= v.is_positive();
                }
                points.push(x);
            }
            LpOptimum::Unbounded => {
                return Err(Error::MalformedInput("lift-and-project system is unbounded".into()))
            }
            LpOptimum::Infeasible(c) => return Ok(Err(c)),
        }
    }
    let count = Rat::from_integer(BigInt::from(points.len()));
    let mut avg = vec![Rat::zero(); n];
    for p in &points {
        for (acc, v) in avg.iter_mut().zip(p) {
            *acc += v;
        }
    }
    for v in &mut avg {
        *v /= &count;
    }
    Ok(Ok((support, avg)))
}

/// `A x - b t = 0`, `sum of x outside S = 1`, `x, t >= 0`. Infeasible iff
/// every solution of the bounded system vanishes outside `S`.
pub fn maximality_system(sys: &LinearSystem, support: &[bool]) -> LinearSystem {
    let n = sys.num_vars();
    let mut vars = sys.vars.clone();
    vars.push("t".into());
    let mut out = LinearSystem::new(vars, Domain::NonnegRational);
    for (row, b) in sys.rows.iter().zip(&sys.rhs) {
        let mut r = row.clone();
        r.push((n, -b.clone()));
        out.add_row(r, Rat::zero());
    }
    out.add_row((0..n).filter(|&j| !support[j]).map(|j| (j, int(1))), int(1));
    out
}

#[derive(Clone, Debug, PartialEq)]
pub enum BaRejection {
    /// The LP itself is infeasible.
    Lp(Certificate),
    /// The LP is feasible but no integer solution lives on its support.
    Ip {
        support: Vec<bool>,
        /// LP solution positive exactly on `support`.
        lp_point: Vec<Rat>,
        /// Farkas certificate for [`maximality_system`].
        maximality: Certificate,
        /// Parity certificate for the system restricted to `support`.
        parity: Certificate,
    },
}

impl BaRejection {
    pub fn to_json(&self) -> Value {
        match self {
            BaRejection::Lp(c) => json!({ "kind": "BA_LP", "farkas": c.to_json() }),
            BaRejection::Ip { support, lp_point, maximality, parity } => json!({
                "kind": "BA_IP",
                "support": support.iter().enumerate().filter(|p| *p.1).map(|p| p.0).collect::<Vec<_>>(),
                "lp_point": lp_point.iter().map(format_rat).collect::<Vec<_>>(),
                "maximality": maximality.to_json(),
                "parity": parity.to_json(),
            }),
        }
    }

    /// Re-checks every part against the system it refers to.
    pub fn verify(&self, sys: &LinearSystem) -> Result<bool> {
        match self {
            BaRejection::Lp(c) => c.verify(sys),
            BaRejection::Ip { support, lp_point, maximality, parity } => {
                if support.len() != sys.num_vars() {
                    return Ok(false);
                }
                let exact_support = lp_point.iter().zip(support).all(|(v, &s)| v.is_positive() == s);
                if !exact_support || !sys.is_solution(lp_point) {
                    return Ok(false);
                }
                if !maximality.verify(&maximality_system(sys, support))? {
                    return Ok(false);
                }
                let (restricted, _) = sys.with_domain(Domain::Integer).restrict(support);
                parity.verify(&restricted)
            }
        }
    }
}

pub fn ba(x: &Structure, a: &Structure, k: usize, budget: &Budget) -> Result<ClubRun<BAWitness, BaRejection>> {
    let system = build_club_system(x, a, k, budget)?;
    let (support, lp_point) = match maximal_support(&system.system)? {
        Ok(p) => p,
        Err(c) => return Ok(ClubRun { system, verdict: Verdict::Reject(BaRejection::Lp(c)) }),
    };
    let (restricted, kept) = system.system.with_domain(Domain::Integer).restrict(&support);
    let verdict = match diophantine_solve(&restricted)? {
        Verdict::Accept(z) => {
            let mut full = vec![BigInt::zero(); system.num_vars()];
            for (&j, v) in kept.iter().zip(z) {
                full[j] = v;
            }
            let maximal_support = kept.iter().map(|&j| system.keys[j].clone()).collect();
            Verdict::Accept(BAWitness {
                lp: SAWitness { level: k, values: system.values(&lp_point) },
                ip: AIPWitness { level: k, values: system.values(&full) },
                maximal_support,
            })
        }
        Verdict::Reject(parity) => {
            let maximality = match lp_feasible(&maximality_system(&system.system, &support))? {
                Verdict::Reject(c) => c,
                _ => return Err(Error::InvalidWitness("support is not maximal".into())),
            };
            Verdict::Reject(BaRejection::Ip { support, lp_point, maximality, parity })
        }
        Verdict::RejectNumeric(d) => Verdict::RejectNumeric(d),
    };
    Ok(ClubRun { system, verdict })
}

/// Decides the refinement condition directly: some support set `S` carries
/// an LP solution positive on all of `S` and an integer solution inside `S`.
/// Exponential in the number of variables.
pub fn ba_by_joint_enumeration(sys: &LinearSystem) -> Result<bool> {
    let n = sys.num_vars();
    if n > 16 {
        return Err(Error::BudgetExceeded(format!("{n} variables for joint enumeration")));
    }
    for mask in 0u32..1 << n {
        let keep: Vec<bool> = (0..n).map(|j| mask >> j & 1 == 1).collect();
        let (restricted, _) = sys.restrict(&keep);
        // An LP solution positive on all of S exists iff, for each j in S, some
        // solution supported in S has x_j > 0 (average them).
        let mut all_positive = true;
        for j in 0..restricted.num_vars() {
            let mut c = vec![Rat::zero(); restricted.num_vars()];
            c[j] = int(1);
            match lp_maximize(&restricted, &c)? {
                LpOptimum::Optimal { value, .. } if value.is_positive() => {}
                _ => {
                    all_positive = false;
                    break;
                }
            }
        }
        if !all_positive || !lp_feasible(&restricted)?.is_accept() {
            continue;
        }
        if diophantine_solve(&restricted.with_domain(Domain::Integer))?.is_accept() {
            return Ok(true);
        }
    }
    Ok(false)
}

/// The maps `x -> a` for every `lambda[R_k, x, a] > 0`, plus the empty map,
/// checked to form a bounded-width family.
pub fn support_family(w: &SAWitness, x: &Structure, a: &Structure, k: usize) -> Result<BWFamily> {
    let rk = enhancement_symbol(k);
    let mut maps = vec![PartialMap::empty()];
    for (key, v) in &w.values {
        if key.symbol != rk || !v.is_positive() {
            continue;
        }
        if !precedes_unchecked(&key.x, &key.a) {
            return Err(Error::InvalidWitness(format!("positive mass on {key} with x ⊀ a")));
        }
        let mut f = PartialMap::empty();
        for (&u, &v) in key.x.iter().zip(&key.a) {
            if f.get(u).is_none() {
                f = f.with(u, v);
            }
        }
        maps.push(f);
    }
    let fam = BWFamily::new(maps);
    fam.validate(x, a, k)?;
    Ok(fam)
}

/// Reads off the diagonal weights of a nonnegative solution as a check that
/// it solves the system exactly.
pub fn validate_sa(w: &SAWitness, sys: &ClubSystem) -> bool {
    sys.system.is_solution(&w.as_vector(sys))
}

pub fn validate_aip(w: &AIPWitness, sys: &ClubSystem) -> bool {
    sys.system.with_domain(Domain::Integer).is_solution(&w.as_vector(sys))
}

/// Whether `lambda[.,x,a]` follows an actual homomorphism `h` (used for
/// planted instances): the indicator of `h(x) = a`.
pub fn integral_point(sys: &ClubSystem, h: &[usize]) -> Vec<Rat> {
    sys.keys
        .iter()
        .map(|k| {
            let hit = k.x.iter().zip(&k.a).all(|(&u, &v)| h[u] == v);
            if hit {
                Rat::one()
            } else {
                Rat::zero()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use crate::templates;

    #[test]
    fn triangle_edge_levels() {
        let b = Budget::default();
        let (k2, k3) = (templates::k2(), templates::k3());
        let r1 = sa(&k3, &k2, 1, &b).unwrap();
        let w = r1.verdict.accepted().unwrap();
        assert!(validate_sa(w, &r1.system));
        // The half/half point solves the level-1 system.
        let half: Vec<Rat> = vec![rat(1, 2); r1.system.num_vars()];
        assert!(r1.system.system.is_solution(&half));

        let r2 = sa(&k3, &k2, 2, &b).unwrap();
        assert!(r2.verdict.is_accept());
        let r3 = sa(&k3, &k2, 3, &b).unwrap();
        let c = r3.verdict.rejected().unwrap();
        assert!(c.verify(&r3.system.system).unwrap());

        let a1 = aip(&k3, &k2, 1, &b).unwrap();
        assert!(a1.verdict.rejected().unwrap().verify(&a1.system.system.with_domain(Domain::Integer)).unwrap());
        assert!(aip(&k2, &k2, 1, &b).unwrap().verdict.is_accept());

        let b1 = ba(&k3, &k2, 1, &b).unwrap();
        assert!(b1.verdict.rejected().unwrap().verify(&b1.system.system).unwrap());
    }

    #[test]
    fn support_family_from_witness() {
        let b = Budget::default();
        let (k2, k3) = (templates::k2(), templates::k3());
        for (x, a) in [(&k3, &k2), (&k2, &k3), (&k3, &k3)] {
            let r = sa(x, a, 2, &b).unwrap();
            let w = r.verdict.accepted().unwrap();
            support_family(w, x, a, 2).unwrap();
        }
    }

    #[test]
    fn integral_points_solve() {
        let b = Budget::default();
        let (k2, k3) = (templates::k2(), templates::k3());
        let sys = build_club_system(&k2, &k3, 2, &b).unwrap();
        assert!(sys.system.is_solution(&integral_point(&sys, &[0, 1])));
        assert!(!sys.system.is_solution(&integral_point(&sys, &[0, 0])));
    }

    #[test]
    fn ba_matches_joint_enumeration() {
        let b = Budget::default();
        let single = Structure::from_parts(&["p", "q"], &[("E", 2, vec![vec![0, 1]])]).unwrap();
        let loop_ = Structure::from_parts(&["u"], &[("E", 2, vec![vec![0, 0]])]).unwrap();
        let two = Structure::from_parts(&["u", "w"], &[("E", 2, vec![vec![0, 1], vec![1, 0]])]).unwrap();
        let mut checked = 0;
        for (x, a) in [(&single, &two), (&single, &loop_), (&loop_, &two), (&two, &two), (&loop_, &loop_)] {
            let run = ba(x, a, 1, &b).unwrap();
            if run.system.num_vars() <= 12 {
                assert_eq!(run.verdict.is_accept(), ba_by_joint_enumeration(&run.system.system).unwrap());
                checked += 1;
            }
        }
        assert!(checked >= 3);
    }
}
