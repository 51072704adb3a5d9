//! Consistency algorithms: bounded width, the lift-and-project family and
//! the semidefinite relaxations, behind one dispatcher that produces
//! uniform JSON reports.

pub mod bw;
pub mod club;
pub mod heart;
pub mod semidefinite;
pub mod witness;

pub use bw::{bw, BWFamily, BwVerdict, Deletion, DeletionTrace};
pub use club::{aip, ba, build_club_system, sa, support_family, AIPWitness, BAWitness, ClubSystem, LambdaKey, SAWitness};
pub use heart::sa_alt;
pub use semidefinite::{check_sdp_facts, check_sos_pair_facts, sdp, sos, SdpRun, SosRun};
pub use witness::check_witness;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_traits::Zero;
use serde_json::{json, Value};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::exact::Domain;
use crate::free::{free_structure_h, minion_test_h_level, tensorised_pair};
use crate::homomorphism::{enumerate_partial_homomorphisms, find_homomorphism, is_homomorphism};
use crate::psd::PsdConfig;
use crate::rational::format_rat;
use crate::structure::Structure;
use crate::verdict::{NumericDiagnostics, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Bw,
    Sa,
    SaAlt,
    Aip,
    Ba,
    Sdp,
    Sos,
    MinionH,
    Oracle,
}

impl Algorithm {
    pub const ALL: [Algorithm; 9] = [
        Algorithm::Bw,
        Algorithm::Sa,
        Algorithm::SaAlt,
        Algorithm::Aip,
        Algorithm::Ba,
        Algorithm::Sdp,
        Algorithm::Sos,
        Algorithm::MinionH,
        Algorithm::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Bw => "bw",
            Algorithm::Sa => "sa",
            Algorithm::SaAlt => "sa-alt",
            Algorithm::Aip => "aip",
            Algorithm::Ba => "ba",
            Algorithm::Sdp => "sdp",
            Algorithm::Sos => "sos",
            Algorithm::MinionH => "minion-h",
            Algorithm::Oracle => "oracle",
        }
    }

    /// Whether the level parameter matters.
    pub fn is_leveled(self) -> bool {
        !matches!(self, Algorithm::Sdp | Algorithm::Oracle)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Algorithm> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::MalformedInput(format!("unknown algorithm `{s}`")))
    }
}

/// The three verdict kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Accept,
    Reject,
    RejectNumeric,
}

impl Outcome {
    pub fn label(self) -> &'static str {
        match self {
            Outcome::Accept => "accept",
            Outcome::Reject => "reject",
            Outcome::RejectNumeric => "reject-numeric",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Accept => 0,
            Outcome::Reject => 1,
            Outcome::RejectNumeric => 2,
        }
    }

    fn of<W, C>(v: &Verdict<W, C>) -> Outcome {
        match v {
            Verdict::Accept(_) => Outcome::Accept,
            Verdict::Reject(_) => Outcome::Reject,
            Verdict::RejectNumeric(_) => Outcome::RejectNumeric,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stats {
    pub vars: usize,
    pub constraints: usize,
    pub millis: u128,
}

/// Result of one algorithm on one pair.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub algorithm: Algorithm,
    pub level: Option<usize>,
    pub outcome: Outcome,
    pub witness: Option<Value>,
    pub certificate: Option<Value>,
    pub diagnostics: Option<NumericDiagnostics>,
    /// The witness or certificate was re-checked independently of the
    /// solver that produced it. `None` when there is nothing to check.
    pub checked: Option<bool>,
    pub stats: Stats,
}

impl Report {
    pub fn to_json(&self) -> Value {
        let mut out = json!({
            "algorithm": self.algorithm.name(),
            "level": self.level,
            "verdict": self.outcome.label(),
            "stats": { "vars": self.stats.vars, "constraints": self.stats.constraints, "millis": self.stats.millis },
        });
        if let Some(w) = &self.witness {
            out["witness"] = w.clone();
        }
        if let Some(c) = &self.certificate {
            out["certificate"] = c.clone();
        }
        if let Some(d) = &self.diagnostics {
            out["diagnostics"] = json!({
                "residual": d.residual,
                "iterations": d.iterations,
                "reason": d.reason,
                "rigorous": d.rigorous,
            });
        }
        if let Some(c) = self.checked {
            out["checked"] = json!(c);
        }
        out
    }

    /// The JSON without the wall-clock field, for golden comparisons.
    pub fn to_stable_json(&self) -> Value {
        let mut v = self.to_json();
        v["stats"].as_object_mut().expect("stats object").remove("millis");
        v
    }
}

struct Parts {
    outcome: Outcome,
    witness: Option<Value>,
    certificate: Option<Value>,
    diagnostics: Option<NumericDiagnostics>,
    checked: Option<bool>,
    vars: usize,
    constraints: usize,
}

fn parts<W, C>(
    v: &Verdict<W, C>,
    witness: impl FnOnce(&W) -> Value,
    certificate: impl FnOnce(&C) -> Value,
    check: impl FnOnce(&Verdict<W, C>) -> Result<Option<bool>>,
    vars: usize,
    constraints: usize,
) -> Result<Parts> {
    let checked = check(v)?;
    Ok(Parts {
        outcome: Outcome::of(v),
        witness: v.accepted().map(witness),
        certificate: v.rejected().map(certificate),
        diagnostics: match v {
            Verdict::RejectNumeric(d) => Some(d.clone()),
            _ => None,
        },
        checked,
        vars,
        constraints,
    })
}

fn tuple_count(s: &Structure) -> usize {
    s.relations().values().map(|r| r.len()).sum()
}

/// Runs one algorithm. `level` is ignored by `sdp` and `oracle`.
pub fn run(alg: Algorithm, x: &Structure, a: &Structure, level: usize, budget: &Budget) -> Result<Report> {
    run_with(alg, x, a, level, budget, &PsdConfig::default())
}

pub fn run_with(alg: Algorithm, x: &Structure, a: &Structure, level: usize, budget: &Budget, cfg: &PsdConfig) -> Result<Report> {
    x.same_signature(a)?;
    if alg.is_leveled() && level == 0 {
        return Err(Error::MalformedInput("level must be at least 1".into()));
    }
    let k = level;
    let start = Instant::now();
    let p = match alg {
        Algorithm::Bw => {
            let v = bw(x, a, k, budget)?;
            let maps = enumerate_partial_homomorphisms(x, a, k, budget)?.len();
            parts(
                &v,
                |f| f.to_json(x, a),
                |t| t.to_json(x, a),
                |v| match v {
                    Verdict::Accept(f) => Ok(Some(f.validate(x, a, k).is_ok())),
                    Verdict::Reject(t) => t.verify(x, a, budget).map(Some),
                    Verdict::RejectNumeric(_) => Ok(None),
                },
                maps,
                0,
            )?
        }
        Algorithm::Sa => {
            let r = sa(x, a, k, budget)?;
            let sys = &r.system;
            parts(
                &r.verdict,
                |w| w.to_json(&sys.x, &sys.a),
                |c| c.to_json(),
                |v| match v {
                    Verdict::Accept(w) => Ok(Some(club::validate_sa(w, sys))),
                    Verdict::Reject(c) => c.verify(&sys.system).map(Some),
                    Verdict::RejectNumeric(_) => Ok(None),
                },
                sys.num_vars(),
                sys.num_rows(),
            )?
        }
        Algorithm::Aip => {
            let r = aip(x, a, k, budget)?;
            let sys = &r.system;
            parts(
                &r.verdict,
                |w| w.to_json(&sys.x, &sys.a),
                |c| c.to_json(),
                |v| match v {
                    Verdict::Accept(w) => Ok(Some(club::validate_aip(w, sys))),
                    Verdict::Reject(c) => c.verify(&sys.system.with_domain(Domain::Integer)).map(Some),
                    Verdict::RejectNumeric(_) => Ok(None),
                },
                sys.num_vars(),
                sys.num_rows(),
            )?
        }
        Algorithm::Ba => {
            let r = ba(x, a, k, budget)?;
            let sys = &r.system;
            parts(
                &r.verdict,
                |w| w.to_json(&sys.x, &sys.a),
                |c| c.to_json(),
                |v| match v {
                    Verdict::Accept(w) => {
                        Ok(Some(club::validate_sa(&w.lp, sys) && club::validate_aip(&w.ip, sys)))
                    }
                    Verdict::Reject(c) => c.verify(&sys.system).map(Some),
                    Verdict::RejectNumeric(_) => Ok(None),
                },
                sys.num_vars(),
                sys.num_rows(),
            )?
        }
        Algorithm::SaAlt => {
            let (hs, v) = sa_alt(x, a, k, budget)?;
            parts(
                &v,
                |p| {
                    let nz: serde_json::Map<String, Value> = p
                        .iter()
                        .enumerate()
                        .filter(|e| !e.1.is_zero())
                        .map(|(i, val)| (hs.system.vars[i].clone(), json!(format_rat(val))))
                        .collect();
                    Value::Object(nz)
                },
                |c| c.to_json(),
                |v| match v {
                    Verdict::Accept(p) => Ok(Some(hs.system.is_solution(p))),
                    Verdict::Reject(c) => c.verify(&hs.system).map(Some),
                    Verdict::RejectNumeric(_) => Ok(None),
                },
                hs.system.num_vars(),
                hs.system.num_rows(),
            )?
        }
        Algorithm::Sdp => {
            let r = sdp(x, a, budget, cfg)?;
            gram_parts(&r.verdict, &r.problem)?
        }
        Algorithm::Sos => {
            let r = sos(x, a, k, budget, cfg)?;
            gram_parts(&r.verdict, &r.problem)?
        }
        Algorithm::MinionH => {
            let v = minion_test_h_level(x, a, k, budget)?;
            let (xt, at) = tensorised_pair(x, a, k, budget)?;
            parts(
                &v,
                |w| w.to_json(),
                |c| c.to_json(),
                |v| match v {
                    Verdict::Accept(w) => free_structure_h(&at, budget)?.is_homomorphism(&xt, &w.masks).map(Some),
                    _ => Ok(None),
                },
                xt.size(),
                tuple_count(&xt),
            )?
        }
        Algorithm::Oracle => {
            let h = find_homomorphism(x, a)?;
            let v: Verdict<Vec<usize>, ()> = match h {
                Some(h) => Verdict::Accept(h),
                None => Verdict::Reject(()),
            };
            parts(
                &v,
                |h| {
                    let map: serde_json::Map<String, Value> =
                        h.iter().enumerate().map(|(u, &t)| (x.atom(u).to_string(), json!(a.atom(t).to_string()))).collect();
                    Value::Object(map)
                },
                |_| json!({ "kind": "EXHAUSTIVE_SEARCH" }),
                |v| match v {
                    Verdict::Accept(h) => is_homomorphism(h, x, a).map(Some),
                    _ => Ok(None),
                },
                x.size(),
                tuple_count(x),
            )?
        }
    };
    Ok(Report {
        algorithm: alg,
        level: alg.is_leveled().then_some(k),
        outcome: p.outcome,
        witness: p.witness,
        certificate: p.certificate,
        diagnostics: p.diagnostics,
        checked: p.checked,
        stats: Stats { vars: p.vars, constraints: p.constraints, millis: start.elapsed().as_millis() },
    })
}

fn gram_parts(v: &crate::psd::GramVerdict, problem: &crate::psd::GramProblem) -> Result<Parts> {
    parts(
        v,
        |w| w.to_json(),
        |r| r.to_json(problem),
        |v| match v {
            Verdict::Accept(w) => Ok(Some(w.residual <= PsdConfig::default().accept_tol && w.min_eig >= -1e-8)),
            Verdict::Reject(r) => r.verify(problem).map(Some),
            Verdict::RejectNumeric(_) => Ok(None),
        },
        problem.len(),
        problem.num_constraints(),
    )
}
