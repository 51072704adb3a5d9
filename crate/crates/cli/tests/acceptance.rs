//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines are always printed. The
//! process fails if any criterion fails, except those listed in
//! `KNOWN_DEVIATIONS`, whose failure is asserted against concrete
//! counter-evidence instead (see the README).

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::Instant;

use serde_json::Value;

use minionlab::corpus::{binary_signature, exhaustive_pairs, exhaustive_structures, generate, CorpusConfig, Pair};
use minionlab::hierarchy::semidefinite::extract_vectors;
use minionlab::hierarchy::{
    check_sdp_facts, check_sos_pair_facts, check_witness, run, sa, sdp, sos, support_family, Algorithm, Outcome, Report,
};
use minionlab::homomorphism::find_homomorphism;
use minionlab::psd::{PsdConfig, Refutation};
use minionlab::rational::{rat, Rat};
use minionlab::structure::{enhancement_symbol, lex_tuples};
use minionlab::tensor::structural::{build_p, build_pi};
use minionlab::tensor::{contract, precedes, project, Tensor};
use minionlab::verdict::Verdict;
use minionlab::{templates, Budget, Structure};

/// Criteria whose stated verdicts contradict the definitions the library
/// implements. Their FAIL line is expected; the counter-evidence is checked.
const KNOWN_DEVIATIONS: [usize; 1] = [8];

const ACCEPT_RESIDUAL: f64 = 1e-8;
const FACT_TOLERANCE: f64 = 1e-6;

struct Verdicts {
    pass: bool,
    detail: String,
}

fn fail(detail: impl Into<String>) -> Verdicts {
    Verdicts { pass: false, detail: detail.into() }
}

fn judge(ok: bool, detail: impl Into<String>) -> Verdicts {
    Verdicts { pass: ok, detail: detail.into() }
}

/// Every report produced by criteria 3 to 9, re-checked by criterion 11.
#[derive(Default)]
struct Ledger {
    entries: Vec<(Structure, Structure, Report)>,
}

impl Ledger {
    fn run(&mut self, alg: Algorithm, x: &Structure, a: &Structure, k: usize) -> Outcome {
        let r = run(alg, x, a, k, &Budget::default()).unwrap_or_else(|e| panic!("{alg} level {k}: {e}"));
        let o = r.outcome;
        self.entries.push((x.clone(), a.clone(), r));
        o
    }
}

fn data(name: &str) -> String {
    format!("{}/../../data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn corpus(seed: u64, count: usize, planted: bool) -> Vec<Pair> {
    generate(&CorpusConfig { seed, count, max_domain: 3, max_instance: 4, planted, ..CorpusConfig::default() })
        .expect("corpus configuration is valid")
}

fn tensor_cli() -> Verdicts {
    let out = Command::new(env!("CARGO_BIN_EXE_minionlab"))
        .args(["tensor", "--k", "3", "--structure", &data("k3.json")])
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).expect("JSON output");
    let rel = &v["relations"]["E"];
    let tuples = rel["tuples"].as_array().expect("tuples");
    let cell = |s: &str| -> Vec<String> { s.chars().map(String::from).collect() };
    // Row-major over [2]^3, first mode outermost.
    let expected: Vec<Vec<String>> =
        ["222", "223", "232", "233", "322", "323", "332", "333"].iter().map(|s| cell(s)).collect();
    let displayed = tuples.iter().any(|t| serde_json::from_value::<Vec<Vec<String>>>(t.clone()).ok() == Some(expected.clone()));
    let domain = v["domain"].as_array().map_or(0, Vec::len);
    let ok = rel["arity"] == 8 && tuples.len() == 6 && domain == 27 && displayed;
    judge(ok, format!("arity {}, {} tuples, {domain} atoms, (2,3)^3 cell-for-cell {displayed}", rel["arity"], tuples.len()))
}

fn free_structure_example() -> Verdicts {
    let k3 = templates::k3();
    // Canonical edge order (1,2) (1,3) (2,1) (2,3) (3,1) (3,2) against the
    // displayed numbering q1 = (1,2), q6 = (1,3), q2 = (2,1), q3 = (2,3),
    // q5 = (3,1), q4 = (3,2). Distinct powers of two make every sum legible.
    let weight = |j: u32| Rat::from_integer((1u64 << j).into());
    let (q1, q2, q3, q4, q5, q6) = (weight(0), weight(1), weight(2), weight(3), weight(4), weight(5));
    let q = vec![q1.clone(), q6.clone(), q2.clone(), q3.clone(), q5.clone(), q4.clone()];
    let z = Rat::from_integer(0.into());
    let layered = |i: &[usize], q: &[Rat]| {
        minionlab::free::qconv_block(&k3, "E", i, q).unwrap().layered_matrix().unwrap()
    };
    let mut m111 = vec![vec![z.clone(); 9]; 3];
    m111[0][0] = &q1 + &q6;
    m111[1][4] = &q2 + &q3;
    m111[2][8] = &q4 + &q5;
    let mut m212 = vec![vec![z.clone(); 9]; 3];
    m212[0][4] = q1.clone();
    m212[0][8] = q6.clone();
    m212[1][0] = q2.clone();
    m212[1][8] = q3.clone();
    m212[2][0] = q5.clone();
    m212[2][4] = q4.clone();
    let symbolic = layered(&[0, 0, 0], &q) == m111 && layered(&[1, 0, 1], &q) == m212;

    let uniform = vec![rat(1, 6); 6];
    let mut blocks = 0;
    let mut stochastic = true;
    for i in lex_tuples(2, 3) {
        let b = minionlab::free::qconv_block(&k3, "E", &i, &uniform).unwrap();
        stochastic &= b.entries().iter().sum::<Rat>() == rat(1, 1);
        blocks += 1;
    }
    let u111 = layered(&[0, 0, 0], &uniform);
    let diag = (0..3).all(|a| u111[a][4 * a] == rat(1, 3));
    let nonzeros = u111.iter().flatten().filter(|v| **v != z).count();
    let u212 = layered(&[1, 0, 1], &uniform);
    let sixths = u212.iter().flatten().filter(|v| **v == rat(1, 6)).count();
    let ok = symbolic && stochastic && blocks == 8 && diag && nonzeros == 3 && sixths == 6;
    judge(ok, format!("typeset blocks {symbolic}, uniform diagonal 1/3 {diag}, {blocks} stochastic blocks {stochastic}"))
}

fn completeness(ledger: &mut Ledger) -> Verdicts {
    let pairs = corpus(1, 50, true);
    let cfg = PsdConfig::default();
    let b = Budget::default();
    let mut runs = 0;
    let mut bad = Vec::new();
    let mut worst: f64 = 0.0;
    for (n, p) in pairs.iter().enumerate() {
        let (x, a) = (&p.instance, &p.template);
        assert!(x.size() <= 4 && a.size() <= 3);
        for alg in [Algorithm::Bw, Algorithm::Sa, Algorithm::SaAlt, Algorithm::Aip, Algorithm::Ba, Algorithm::Sos] {
            for k in 1..=2 {
                runs += 1;
                if ledger.run(alg, x, a, k) != Outcome::Accept {
                    bad.push(format!("pair {n}: {alg} level {k}"));
                }
            }
        }
        runs += 1;
        if ledger.run(Algorithm::Sdp, x, a, 1) != Outcome::Accept {
            bad.push(format!("pair {n}: sdp"));
        }
        let s = sdp(x, a, &b, &cfg).unwrap();
        worst = worst.max(s.verdict.accepted().map_or(f64::INFINITY, |w| w.residual));
        for k in 1..=2 {
            let s = sos(x, a, k, &b, &cfg).unwrap();
            worst = worst.max(s.verdict.accepted().map_or(f64::INFINITY, |w| w.residual));
        }
    }
    let ok = bad.is_empty() && worst <= ACCEPT_RESIDUAL;
    judge(ok, format!("{} pairs, {runs} runs, {} non-accepts {bad:?}, worst residual {worst:.1e}", pairs.len(), bad.len()))
}

fn monotonicity(ledger: &mut Ledger) -> Verdicts {
    let pairs = corpus(2, 30, false);
    let mut violations = Vec::new();
    let mut rejections = 0;
    for (n, p) in pairs.iter().enumerate() {
        for alg in [Algorithm::Bw, Algorithm::Sa, Algorithm::Aip] {
            let outcomes: Vec<Outcome> = (1..=3).map(|k| ledger.run(alg, &p.instance, &p.template, k)).collect();
            rejections += outcomes.iter().filter(|o| **o != Outcome::Accept).count();
            for k in 1..3 {
                if outcomes[k] == Outcome::Accept && outcomes[k - 1] != Outcome::Accept {
                    violations.push(format!("pair {n}: {alg} accepts at {} but rejects at {k}", k + 1));
                }
            }
        }
    }
    judge(violations.is_empty(), format!("{} pairs, {rejections} rejections seen, violations {violations:?}", pairs.len()))
}

fn soundness_in_the_limit(ledger: &mut Ledger) -> Verdicts {
    let pairs = exhaustive_pairs(2, 2, &binary_signature()).unwrap();
    let mut mismatches = Vec::new();
    let mut homs = 0;
    for (x, a) in &pairs {
        let truth = find_homomorphism(x, a).unwrap().is_some();
        homs += usize::from(truth);
        for alg in [Algorithm::Bw, Algorithm::Sa, Algorithm::Sos] {
            let o = ledger.run(alg, x, a, 2);
            // A numeric stall is not a refutation, so it never counts as agreement.
            let agrees = if truth { o == Outcome::Accept } else { o == Outcome::Reject };
            if !agrees {
                mismatches.push(format!("{alg} gave {} on {} -> {} atoms", o.label(), x.size(), a.size()));
            }
        }
    }
    judge(mismatches.is_empty(), format!("{} pairs ({homs} homomorphic), mismatches {mismatches:?}", pairs.len()))
}

fn bw_matches_minion_h(ledger: &mut Ledger) -> Verdicts {
    let xs = exhaustive_structures(3, &binary_signature()).unwrap();
    let as_ = exhaustive_structures(2, &binary_signature()).unwrap();
    let mut diffs = Vec::new();
    let mut accepts = 0;
    for x in &xs {
        for a in &as_ {
            let b = ledger.run(Algorithm::Bw, x, a, 2);
            let m = ledger.run(Algorithm::MinionH, x, a, 2);
            accepts += usize::from(b == Outcome::Accept);
            if b != m {
                diffs.push(format!("{} -> {} atoms: bw {} minion-h {}", x.size(), a.size(), b.label(), m.label()));
            }
        }
    }
    judge(diffs.is_empty(), format!("{} pairs ({accepts} accepted), differences {diffs:?}", xs.len() * as_.len()))
}

fn sa_formulations(ledger: &mut Ledger) -> Verdicts {
    let pairs = corpus(3, 30, false);
    let mut diffs = Vec::new();
    let mut rejects = 0;
    for (n, p) in pairs.iter().enumerate() {
        for k in 1..=2 {
            let s = ledger.run(Algorithm::Sa, &p.instance, &p.template, k);
            let t = ledger.run(Algorithm::SaAlt, &p.instance, &p.template, k);
            rejects += usize::from(s == Outcome::Reject);
            if s != t {
                diffs.push(format!("pair {n} level {k}: sa {} sa-alt {}", s.label(), t.label()));
            }
        }
    }
    judge(diffs.is_empty(), format!("{} pairs, {rejects} sa rejections, differences {diffs:?}", pairs.len()))
}

/// The stated separation asks `bw` and `sa` to reject at level 2. Both
/// accept on the triangle against an edge, because level 2 only sees
/// two-element pieces of a three-element instance. They reject at level 3.
fn canonical_separation(ledger: &mut Ledger) -> Verdicts {
    let (k3, k2) = (templates::k3(), templates::k2());
    let mut claims = Vec::new();
    let mut claim = |name: &str, ok: bool| claims.push((name.to_string(), ok));

    let verified = |ledger: &Ledger| ledger.entries.last().and_then(|e| e.2.checked) == Some(true);
    let sa1 = ledger.run(Algorithm::Sa, &k3, &k2, 1);
    claim("sa level 1 accepts", sa1 == Outcome::Accept && verified(ledger));
    let bw2 = ledger.run(Algorithm::Bw, &k3, &k2, 2);
    let bw2_checked = verified(ledger);
    claim("bw level 2 rejects", bw2 == Outcome::Reject && bw2_checked);
    let sa2 = ledger.run(Algorithm::Sa, &k3, &k2, 2);
    let sa2_checked = verified(ledger);
    claim("sa level 2 rejects", sa2 == Outcome::Reject && sa2_checked);
    let aip1 = ledger.run(Algorithm::Aip, &k3, &k2, 1);
    claim("aip level 1 rejects", aip1 == Outcome::Reject && verified(ledger));
    let ba1 = ledger.run(Algorithm::Ba, &k3, &k2, 1);
    claim("ba level 1 rejects", ba1 == Outcome::Reject && verified(ledger));

    let s = sdp(&k3, &k2, &Budget::default(), &PsdConfig::default()).unwrap();
    let exact = matches!(&s.verdict, Verdict::Reject(r) if r.verify(&s.problem).unwrap());
    let affine = matches!(&s.verdict, Verdict::Reject(Refutation::Vanishing { .. } | Refutation::GramLinear { .. }));
    ledger.run(Algorithm::Sdp, &k3, &k2, 1);
    claim("sdp rejects by exact affine reduction", exact && affine && verified(ledger));

    // Counter-evidence for the two level-2 claims: verified acceptance
    // witnesses, and verified rejection one level up.
    assert_eq!((bw2, sa2), (Outcome::Accept, Outcome::Accept));
    assert!(bw2_checked && sa2_checked);
    for alg in [Algorithm::Bw, Algorithm::Sa] {
        let rep = &ledger.entries.iter().rev().find(|e| e.2.algorithm == alg && e.2.level == Some(2)).unwrap().2;
        assert!(check_witness(alg, &k3, &k2, 2, &rep.to_json(), &Budget::default()).unwrap());
        assert_eq!(ledger.run(alg, &k3, &k2, 3), Outcome::Reject);
        assert!(verified(ledger));
    }

    let failed: Vec<&str> = claims.iter().filter(|c| !c.1).map(|c| c.0.as_str()).collect();
    let held = claims.len() - failed.len();
    let detail = format!(
        "{held}/{} claims hold; not met: {failed:?}; bw and sa accept at level 2 with verified witnesses and reject at level 3 with verified certificates",
        claims.len()
    );
    judge(failed.is_empty(), detail)
}

fn support_structure() -> Verdicts {
    let b = Budget::default();
    let mut pairs = corpus(2, 30, false);
    pairs.extend(corpus(1, 20, true));
    let (mut accepts, mut families, mut positive) = (0, 0, 0);
    let mut bad = Vec::new();
    for (n, p) in pairs.iter().enumerate() {
        let r = sa(&p.instance, &p.template, 2, &b).unwrap();
        let Some(w) = r.verdict.accepted() else { continue };
        accepts += 1;
        for (key, v) in &w.values {
            if *v > Rat::from_integer(0.into()) {
                positive += 1;
                if !precedes(&key.x, &key.a).unwrap() {
                    bad.push(format!("pair {n}: {key:?}"));
                }
            }
        }
        match support_family(w, &r.system.x, &r.system.a, 2) {
            Ok(f) if !f.is_empty() => families += 1,
            Ok(_) => bad.push(format!("pair {n}: empty family")),
            Err(e) => bad.push(format!("pair {n}: {e}")),
        }
    }
    let ok = bad.is_empty() && accepts > 0 && families == accepts;
    judge(ok, format!("{accepts} SA accepts, {families} valid families, {positive} positive entries, problems {bad:?}"))
}

fn vector_facts() -> Verdicts {
    let b = Budget::default();
    let cfg = PsdConfig::default();
    let mut pairs: Vec<(Structure, Structure)> =
        corpus(1, 50, true).into_iter().chain(corpus(2, 30, false)).map(|p| (p.instance, p.template)).collect();
    let enhanced: Vec<(Structure, Structure)> =
        pairs.iter().take(30).map(|(x, a)| (x.k_enhance(2, &b).unwrap(), a.k_enhance(2, &b).unwrap())).collect();
    pairs.extend([
        (templates::k2(), templates::k3()),
        (templates::c5(), templates::k3()),
        (templates::one_in_three(), templates::nae()),
        (templates::bool_unary(), templates::bool_unary()),
    ]);
    let (mut sdp_accepts, mut sos_accepts, mut facts) = (0, 0, 0);
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    for (x, a) in pairs.iter().chain(&enhanced) {
        let s = sdp(x, a, &b, &cfg).unwrap();
        if let Some(w) = s.verdict.accepted() {
            sdp_accepts += 1;
            let rep = check_sdp_facts(&extract_vectors(w).unwrap(), &s.layout, x, a, FACT_TOLERANCE);
            facts += rep.checked;
            worst = worst.max(rep.max_error);
            bad.extend(rep.violations.into_iter().take(3));
        }
    }
    for (x, a) in &pairs {
        let s = sos(x, a, 2, &b, &cfg).unwrap();
        if let Some(w) = s.verdict.accepted() {
            sos_accepts += 1;
            let rep = check_sos_pair_facts(&extract_vectors(w).unwrap(), &s.system, 1, FACT_TOLERANCE);
            facts += rep.checked;
            worst = worst.max(rep.max_error);
            bad.extend(rep.violations.into_iter().take(3));
        }
    }
    let enhanced_pairs = enhanced.len();
    let ok = bad.is_empty() && sdp_accepts > 0 && sos_accepts > 0;
    judge(
        ok,
        format!("{sdp_accepts} SDP accepts over {} plain and {enhanced_pairs} 2-enhanced pairs, {sos_accepts} SoS level-2 accepts, {facts} facts, worst error {worst:.1e}, violations {bad:?}", pairs.len()),
    )
}

fn certificates(ledger: &Ledger) -> Verdicts {
    let b = Budget::default();
    let (mut certs, mut witnesses) = (0, 0);
    let mut bad = Vec::new();
    for (x, a, r) in &ledger.entries {
        let k = r.level.unwrap_or(1);
        match r.outcome {
            Outcome::Accept => {
                witnesses += 1;
                let json = r.to_json();
                if r.checked != Some(true) || !check_witness(r.algorithm, x, a, k, &json, &b).unwrap() {
                    bad.push(format!("{} level {k}: witness", r.algorithm));
                }
            }
            // The oracle and the minion test reject by exhausting a search,
            // which leaves no certificate to check.
            Outcome::Reject if !matches!(r.algorithm, Algorithm::Oracle | Algorithm::MinionH) => {
                certs += 1;
                if r.checked != Some(true) {
                    bad.push(format!("{} level {k}: certificate", r.algorithm));
                }
            }
            _ => {}
        }
    }
    let ok = bad.is_empty() && certs > 0;
    bad.truncate(5);
    judge(ok, format!("{certs} rejection certificates and {witnesses} witnesses re-verified, failures {bad:?}"))
}

fn tensor_lemmas() -> Verdicts {
    let b = Budget::default();
    let k = 2;
    let structures: Vec<Structure> = exhaustive_structures(3, &binary_signature()).unwrap();
    let (mut p_rows, mut pi_rows, mut enhanced, mut transfers) = (0, 0, 0, 0);
    let mut bad = Vec::new();
    for a in &structures {
        let n = a.size();
        let rel = a.relation("E").unwrap();
        // P_i needs a nonempty relation; the empty one has no tuples to index.
        if !rel.is_empty() {
            for i in lex_tuples(2, k) {
                let p = build_p::<Rat>(a, "E", &i).unwrap();
                let pb = build_p::<bool>(a, "E", &i).unwrap();
                for row in lex_tuples(n, k) {
                    let e = Tensor::<Rat>::unit(&vec![n; k], &row).unwrap();
                    let got = contract(&e, &p, k).unwrap();
                    let eb = Tensor::<bool>::unit(&vec![n; k], &row).unwrap();
                    let got_b = contract(&eb, &pb, k).unwrap();
                    for (j, t) in rel.tuples().iter().enumerate() {
                        let hit = project(t, &i).unwrap() == row;
                        if got.entries()[j] != rat(i64::from(hit), 1) || got_b.entries()[j] != hit {
                            bad.push(format!("P row law at {n} atoms, i={i:?}"));
                        }
                    }
                    p_rows += 1;
                }
            }
        }
        for i in lex_tuples(k, k) {
            let pi = build_pi::<Rat>(n, &i).unwrap();
            for row in lex_tuples(n, k) {
                let e = Tensor::<Rat>::unit(&vec![n; k], &row).unwrap();
                let got = contract(&e, &pi, k).unwrap();
                let want = Tensor::<Rat>::from_fn(&vec![n; k], |b| rat(i64::from(project(b, &i).unwrap() == row), 1));
                if got != want {
                    bad.push(format!("Pi row law at {n} atoms, i={i:?}"));
                }
                pi_rows += 1;
            }
        }
        let rk = a.k_enhance(k, &b).unwrap();
        for i in lex_tuples(k, k) {
            let p = build_p::<Rat>(&rk, &enhancement_symbol(k), &i).unwrap();
            let pi = build_pi::<Rat>(n, &i).unwrap();
            if p.entries() != pi.entries() {
                bad.push(format!("P equals Pi for the full relation at {n} atoms, i={i:?}"));
            }
            enhanced += 1;
        }
    }
    let powers: Vec<Structure> = structures.iter().map(|s| s.tensor_power(k, &b).unwrap()).collect();
    for (x, xt) in structures.iter().zip(&powers) {
        for (a, at) in structures.iter().zip(&powers) {
            let plain = find_homomorphism(x, a).unwrap().is_some();
            let tensored = find_homomorphism(xt, at).unwrap().is_some();
            if plain != tensored {
                bad.push(format!("transfer {} -> {} atoms", x.size(), a.size()));
            }
            transfers += 1;
        }
    }
    bad.truncate(5);
    judge(
        bad.is_empty(),
        format!("{} structures: {p_rows} P rows, {pi_rows} Pi rows, {enhanced} full-relation comparisons, {transfers} transfer pairs, failures {bad:?}", structures.len()),
    )
}

fn main() -> ExitCode {
    let mut ledger = Ledger::default();
    let criteria: Vec<(usize, &str, Box<dyn FnMut(&mut Ledger) -> Verdicts>)> = vec![
        (1, "tensor power of K3 at k = 3", Box::new(|_| tensor_cli())),
        (2, "free-structure blocks from a distribution", Box::new(|_| free_structure_example())),
        (3, "completeness on planted pairs", Box::new(completeness)),
        (4, "monotonicity in the level", Box::new(monotonicity)),
        (5, "soundness on instances of at most k atoms", Box::new(soundness_in_the_limit)),
        (6, "bounded width equals the minion test at k = 2", Box::new(bw_matches_minion_h)),
        (7, "the two SA formulations agree", Box::new(sa_formulations)),
        (8, "canonical separation on (K3, K2)", Box::new(canonical_separation)),
        (9, "SA supports give bounded-width families", Box::new(|_| support_structure())),
        (10, "SDP and SoS vector facts", Box::new(|_| vector_facts())),
        (11, "certificate and witness re-verification", Box::new(|l: &mut Ledger| certificates(l))),
        (12, "tensor row laws and homomorphism transfer", Box::new(|_| tensor_lemmas())),
    ];
    let mut unexpected = 0;
    for (n, name, mut f) in criteria {
        let start = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(|| f(&mut ledger))).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            fail(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let ms = start.elapsed().as_millis();
        let label = if v.pass { "PASS" } else { "FAIL" };
        let known = !v.pass && KNOWN_DEVIATIONS.contains(&n) && !v.detail.starts_with("panicked");
        let note = if known { " [documented deviation]" } else { "" };
        println!("criterion {n:>2} {label}{note}: {name}: {} ({ms} ms)", v.detail);
        if !v.pass && !known {
            unexpected += 1;
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} criteria failed unexpectedly");
        ExitCode::FAILURE
    }
}
