//! Runs every algorithm on one pair and tests the implications that must
//! hold between their verdicts.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::hierarchy::{run_with, Algorithm, Outcome, Report};
use crate::psd::PsdConfig;
use crate::structure::Structure;

pub const MONOTONICITY: &str = "monotonicity";
pub const COMPLETENESS: &str = "completeness";
pub const BW_EQUALS_MINION_H: &str = "bw-equals-minion-h";
pub const SA_EQUALS_SA_ALT: &str = "sa-equals-sa-alt";
pub const SOS_IMPLIES_SA: &str = "sos-implies-sa";
pub const BA_IMPLIES_SA_AND_AIP: &str = "ba-implies-sa-and-aip";
pub const EVIDENCE: &str = "evidence-verifies";

const LEVELED: [Algorithm; 7] = [
    Algorithm::Bw,
    Algorithm::MinionH,
    Algorithm::Sa,
    Algorithm::SaAlt,
    Algorithm::Aip,
    Algorithm::Ba,
    Algorithm::Sos,
];

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub invariant: &'static str,
    pub detail: String,
}

/// One cell of the matrix: a report, or the error that prevented it.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Ran(Report),
    Failed(Error),
}

impl Cell {
    pub fn outcome(&self) -> Option<Outcome> {
        match self {
            Cell::Ran(r) => Some(r.outcome),
            Cell::Failed(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrosscheckReport {
    pub level: usize,
    /// Keyed by algorithm and level; unleveled algorithms use level 0.
    pub cells: BTreeMap<(Algorithm, usize), Cell>,
    pub violations: Vec<Violation>,
    /// Invariant instances that were actually evaluated.
    pub checks: usize,
}

impl CrosscheckReport {
    pub fn outcome(&self, alg: Algorithm, level: usize) -> Option<Outcome> {
        let level = if alg.is_leveled() { level } else { 0 };
        self.cells.get(&(alg, level)).and_then(Cell::outcome)
    }

    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_json(&self) -> Value {
        let mut matrix = serde_json::Map::new();
        let mut runs = Vec::new();
        for ((alg, level), cell) in &self.cells {
            let row = matrix.entry(alg.name().to_string()).or_insert_with(|| json!({}));
            let key = if alg.is_leveled() { level.to_string() } else { "-".to_string() };
            row[key] = match cell {
                Cell::Ran(r) => json!(r.outcome.label()),
                Cell::Failed(e) => json!(format!("error: {e}")),
            };
            if let Cell::Ran(r) = cell {
                runs.push(json!({
                    "algorithm": r.algorithm.name(),
                    "level": r.level,
                    "verdict": r.outcome.label(),
                    "checked": r.checked,
                    "stats": { "vars": r.stats.vars, "constraints": r.stats.constraints, "millis": r.stats.millis },
                }));
            }
        }
        let violations: Vec<Value> =
            self.violations.iter().map(|v| json!({ "invariant": v.invariant, "detail": v.detail })).collect();
        json!({
            "level": self.level,
            "matrix": matrix,
            "runs": runs,
            "checks": self.checks,
            "violations": violations,
        })
    }
}

/// Runs the oracle, `sdp`, and every leveled algorithm at each level
/// `1..=k`, then evaluates the implications between them.
pub fn crosscheck(x: &Structure, a: &Structure, k: usize, budget: &Budget) -> Result<CrosscheckReport> {
    crosscheck_with(x, a, k, budget, &PsdConfig::default())
}

pub fn crosscheck_with(x: &Structure, a: &Structure, k: usize, budget: &Budget, cfg: &PsdConfig) -> Result<CrosscheckReport> {
    x.same_signature(a)?;
    if k == 0 {
        return Err(Error::MalformedInput("level must be at least 1".into()));
    }
    let mut cells = BTreeMap::new();
    let mut go = |alg: Algorithm, level: usize| {
        let cell = match run_with(alg, x, a, level.max(1), budget, cfg) {
            Ok(r) => Cell::Ran(r),
            Err(e) => Cell::Failed(e),
        };
        cells.insert((alg, level), cell);
    };
    go(Algorithm::Oracle, 0);
    go(Algorithm::Sdp, 0);
    for level in 1..=k {
        for alg in LEVELED {
            go(alg, level);
        }
    }
    let mut report = CrosscheckReport { level: k, cells, violations: Vec::new(), checks: 0 };
    evaluate(&mut report, x.max_arity().max(a.max_arity()));
    Ok(report)
}

fn evaluate(r: &mut CrosscheckReport, armax: usize) {
    let mut violations = Vec::new();
    let mut checks = 0;
    let mut check = |ok: bool, invariant: &'static str, detail: String| {
        checks += 1;
        if !ok {
            violations.push(Violation { invariant, detail });
        }
    };
    let accepts = |o: Option<Outcome>| o == Some(Outcome::Accept);
    // Only a rigorous rejection contradicts an acceptance.
    let rejects = |o: Option<Outcome>| o == Some(Outcome::Reject);

    for cell in r.cells.values() {
        if let Cell::Ran(rep) = cell {
            if rep.checked.is_some() {
                let level = rep.level.map_or("-".to_string(), |l| l.to_string());
                check(rep.checked == Some(true), EVIDENCE, format!("{} at level {level}", rep.algorithm));
            }
        }
    }

    if accepts(r.outcome(Algorithm::Oracle, 0)) {
        for ((alg, level), cell) in &r.cells {
            if let Some(o) = cell.outcome() {
                check(o == Outcome::Accept, COMPLETENESS, format!("homomorphism exists but {alg} at level {level} gave {}", o.label()));
            }
        }
    }

    for level in 1..=r.level {
        let at = |alg| r.outcome(alg, level);
        if level > 1 {
            for alg in LEVELED {
                let (hi, lo) = (at(alg), r.outcome(alg, level - 1));
                if hi.is_some() && lo.is_some() {
                    check(
                        !(accepts(hi) && rejects(lo)),
                        MONOTONICITY,
                        format!("{alg} accepts at level {level} but rejects at level {}", level - 1),
                    );
                }
            }
        }
        if level >= armax {
            if let (Some(b), Some(m)) = (at(Algorithm::Bw), at(Algorithm::MinionH)) {
                check(b == m, BW_EQUALS_MINION_H, format!("level {level}: bw {} vs minion-h {}", b.label(), m.label()));
            }
        }
        if let (Some(s), Some(t)) = (at(Algorithm::Sa), at(Algorithm::SaAlt)) {
            check(s == t, SA_EQUALS_SA_ALT, format!("level {level}: sa {} vs sa-alt {}", s.label(), t.label()));
        }
        if accepts(at(Algorithm::Sos)) && at(Algorithm::Sa).is_some() {
            check(!rejects(at(Algorithm::Sa)), SOS_IMPLIES_SA, format!("level {level}: sos accepts, sa rejects"));
        }
        if accepts(at(Algorithm::Ba)) {
            for other in [Algorithm::Sa, Algorithm::Aip] {
                if at(other).is_some() {
                    check(!rejects(at(other)), BA_IMPLIES_SA_AND_AIP, format!("level {level}: ba accepts, {other} rejects"));
                }
            }
        }
    }
    r.violations = violations;
    r.checks = checks;
}
