//! Validation of externally supplied witnesses, in the JSON shape the
//! reports emit. Nothing here calls a solver: each check rebuilds the
//! relevant system and substitutes the witness.

use std::collections::HashMap;

use serde_json::Value;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::exact::{Domain, LinearSystem};
use crate::free::{free_structure_h, parse_bitstring};
use crate::homomorphism::{is_homomorphism, PartialMap};
use crate::rational::{parse_rat, Rat};
use crate::structure::{Atom, Structure};

use super::bw::BWFamily;
use super::semidefinite::{build_sdp_problem, build_sos_problem};
use super::{build_club_system, heart::build_heart_system, Algorithm};

/// Tolerance for Gram witnesses read back from text.
pub const GRAM_TOLERANCE: f64 = 1e-6;

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidWitness(msg.into())
}

/// A full report is accepted in place of its `witness` field.
fn unwrap_report(v: &Value) -> &Value {
    if v.get("verdict").is_some() {
        &v["witness"]
    } else {
        v
    }
}

fn atom_of(v: &Value) -> Result<Atom> {
    serde_json::from_value(v.clone()).map_err(|e| bad(format!("not an atom: {e}")))
}

fn lookup(s: &Structure, atom: &Atom) -> Result<usize> {
    s.atom_id(atom).ok_or_else(|| Error::UnknownAtom(atom.to_string()))
}

/// Label to value over the variables of `sys`; missing labels are zero.
fn point(sys: &LinearSystem, values: &Value) -> Result<Vec<Rat>> {
    let obj = values.as_object().ok_or_else(|| bad("expected an object of label -> value"))?;
    let index: HashMap<&str, usize> = sys.vars.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
    let mut out = vec![Rat::from_integer(0.into()); sys.num_vars()];
    for (label, v) in obj {
        let i = *index.get(label.as_str()).ok_or_else(|| bad(format!("unknown variable `{label}`")))?;
        let text = match v {
            Value::String(s) => s.clone(),
            Value::Number(n) => n.to_string(),
            _ => return Err(bad(format!("value of `{label}` is not a number"))),
        };
        out[i] = parse_rat(&text)?;
    }
    Ok(out)
}

fn gram_ok(labels: &[String], problem: &crate::psd::GramProblem, w: &Value) -> Result<bool> {
    let got: Vec<String> = serde_json::from_value(w["labels"].clone()).map_err(|e| bad(format!("labels: {e}")))?;
    if got != labels {
        return Err(bad("Gram labels do not match the problem"));
    }
    let gram: Vec<Vec<f64>> = serde_json::from_value(w["gram"].clone()).map_err(|e| bad(format!("gram: {e}")))?;
    let residual = problem.gram_residual(&gram)?;
    match crate::psd::gram_to_vectors(&gram, GRAM_TOLERANCE) {
        Ok(_) => Ok(residual <= GRAM_TOLERANCE),
        Err(Error::NotPsd(_)) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Whether `witness` certifies acceptance of `alg` at level `k`.
pub fn check_witness(alg: Algorithm, x: &Structure, a: &Structure, k: usize, witness: &Value, budget: &Budget) -> Result<bool> {
    x.same_signature(a)?;
    let w = unwrap_report(witness);
    match alg {
        Algorithm::Oracle => {
            let obj = w.as_object().ok_or_else(|| bad("expected an object atom -> atom"))?;
            let mut h = vec![usize::MAX; x.size()];
            for (u, v) in obj {
                let u = lookup(x, &Atom::name(u.clone()))?;
                h[u] = lookup(a, &atom_of(v)?)?;
            }
            if h.contains(&usize::MAX) {
                return Ok(false);
            }
            is_homomorphism(&h, x, a)
        }
        Algorithm::Bw => {
            let maps = w.as_array().ok_or_else(|| bad("expected an array of partial maps"))?;
            let mut family = Vec::with_capacity(maps.len());
            for m in maps {
                let pairs = m.as_array().ok_or_else(|| bad("a partial map is an array of pairs"))?;
                let mut f = PartialMap::empty();
                for p in pairs {
                    let (u, v) = match p.as_array().map(Vec::as_slice) {
                        Some([u, v]) => (lookup(x, &atom_of(u)?)?, lookup(a, &atom_of(v)?)?),
                        _ => return Err(bad("a pair must have two entries")),
                    };
                    if f.get(u).is_some() {
                        return Ok(false);
                    }
                    f = f.with(u, v);
                }
                family.push(f);
            }
            Ok(BWFamily::new(family).validate(x, a, k).is_ok())
        }
        Algorithm::Sa | Algorithm::Aip => {
            let sys = build_club_system(x, a, k, budget)?;
            let domain = if alg == Algorithm::Sa { Domain::NonnegRational } else { Domain::Integer };
            Ok(sys.system.with_domain(domain).is_solution(&point(&sys.system, w)?))
        }
        Algorithm::Ba => {
            let sys = build_club_system(x, a, k, budget)?;
            let lp = point(&sys.system, &w["lp"])?;
            let ip = point(&sys.system, &w["ip"])?;
            // Any LP solution's support lies in the maximal one, so an
            // integer solution inside supp(lp) suffices.
            let inside = ip.iter().zip(&lp).all(|(i, l)| i == &Rat::from_integer(0.into()) || l != &Rat::from_integer(0.into()));
            Ok(sys.system.is_solution(&lp) && sys.system.with_domain(Domain::Integer).is_solution(&ip) && inside)
        }
        Algorithm::SaAlt => {
            let hs = build_heart_system(x, a, k, budget)?;
            Ok(hs.system.is_solution(&point(&hs.system, w)?))
        }
        Algorithm::Sdp => {
            let (problem, _) = build_sdp_problem(x, a, budget)?;
            gram_ok(&problem.labels, &problem, w)
        }
        Algorithm::Sos => {
            let (_, problem) = build_sos_problem(x, a, k, budget)?;
            gram_ok(&problem.labels, &problem, w)
        }
        Algorithm::MinionH => {
            let xt = x.tensor_power(k, budget)?;
            let at = a.tensor_power(k, budget)?;
            let obj = w["map"].as_object().ok_or_else(|| bad("expected `map` of atom -> bitstring"))?;
            let by_name: HashMap<String, usize> = xt.domain().iter().enumerate().map(|(i, t)| (t.to_string(), i)).collect();
            let mut masks = vec![None; xt.size()];
            for (atom, bits) in obj {
                let i = *by_name.get(atom).ok_or_else(|| Error::UnknownAtom(atom.clone()))?;
                let s = bits.as_str().ok_or_else(|| bad("mask must be a bitstring"))?;
                if s.len() != at.size() {
                    return Ok(false);
                }
                masks[i] = Some(parse_bitstring(s)?);
            }
            let Some(masks) = masks.into_iter().collect::<Option<Vec<u64>>>() else { return Ok(false) };
            free_structure_h(&at, budget)?.is_homomorphism(&xt, &masks)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::{run, Outcome};
    use crate::templates;

    #[test]
    fn emitted_witnesses_check_and_tampering_fails() {
        let b = Budget::default();
        let (x, a) = (templates::k2(), templates::k3());
        for alg in Algorithm::ALL {
            let r = run(alg, &x, &a, 2, &b).unwrap();
            assert_eq!(r.outcome, Outcome::Accept, "{alg}");
            let full = r.to_json();
            assert!(check_witness(alg, &x, &a, 2, &full, &b).unwrap(), "{alg}");
        }
        let r = run(Algorithm::Oracle, &x, &a, 1, &b).unwrap();
        let mut w = r.witness.unwrap();
        w["1"] = w["0"].clone();
        assert!(!check_witness(Algorithm::Oracle, &x, &a, 1, &w, &b).unwrap());
        let r = run(Algorithm::Sa, &x, &a, 1, &b).unwrap();
        let mut w = r.witness.unwrap();
        let key = w.as_object().unwrap().keys().next().unwrap().clone();
        w[&key] = serde_json::json!("2");
        assert!(!check_witness(Algorithm::Sa, &x, &a, 1, &w, &b).unwrap());
    }
}
