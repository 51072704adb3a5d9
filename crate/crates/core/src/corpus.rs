//! Deterministic test corpora: seeded random pairs, planted pairs with a
//! known homomorphism, and exhaustive enumeration of tiny structures up to
//! renaming of atoms.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::structure::{lex_tuples, Atom, Relation, Structure};
use crate::templates;

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusConfig {
    pub seed: u64,
    pub count: usize,
    /// Largest template domain; templates have at least two atoms.
    pub max_domain: usize,
    /// Largest instance domain.
    pub max_instance: usize,
    pub planted: bool,
    /// Symbols and arities shared by every pair.
    pub signature: Vec<(String, usize)>,
    /// Probability that a candidate tuple is kept.
    pub density: f64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            seed: 0,
            count: 20,
            max_domain: 3,
            max_instance: 4,
            planted: false,
            signature: vec![("E".to_string(), 2)],
            density: 0.4,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Pair {
    pub instance: Structure,
    pub template: Structure,
    /// The planted homomorphism, instance atom id to template atom id.
    pub planted: Option<Vec<usize>>,
}

fn names(n: usize, prefix: &str) -> Vec<Atom> {
    (0..n).map(|i| Atom::name(format!("{prefix}{i}"))).collect()
}

fn random_structure(rng: &mut ChaCha8Rng, n: usize, prefix: &str, cfg: &CorpusConfig) -> Result<Structure> {
    let mut relations = BTreeMap::new();
    for (symbol, arity) in &cfg.signature {
        let tuples = lex_tuples(n, *arity).into_iter().filter(|_| rng.gen_bool(cfg.density)).collect();
        relations.insert(symbol.clone(), Relation::new(*arity, tuples)?);
    }
    Structure::new(names(n, prefix), relations)
}

/// `X` keeps a random subset of the tuples whose image under `h` lies in
/// the template, so `h` is a homomorphism by construction.
fn preimage_structure(rng: &mut ChaCha8Rng, a: &Structure, h: &[usize], cfg: &CorpusConfig) -> Result<Structure> {
    let mut relations = BTreeMap::new();
    for (symbol, arity) in &cfg.signature {
        let ra = a.relation(symbol).expect("template carries every symbol");
        let tuples = lex_tuples(h.len(), *arity)
            .into_iter()
            .filter(|t| {
                let image: Vec<usize> = t.iter().map(|&u| h[u]).collect();
                ra.contains(&image) && rng.gen_bool(cfg.density.max(0.5))
            })
            .collect();
        relations.insert(symbol.clone(), Relation::new(*arity, tuples)?);
    }
    Structure::new(names(h.len(), "x"), relations)
}

/// Generates `cfg.count` pairs. The same configuration always yields the
/// same pairs. Unplanted corpora over a single binary symbol start with
/// the triangle against `K2`, so at least one pair has no homomorphism.
pub fn generate(cfg: &CorpusConfig) -> Result<Vec<Pair>> {
    if cfg.max_domain < 2 || cfg.max_instance < 1 {
        return Err(Error::MalformedInput("corpus needs max_domain >= 2 and max_instance >= 1".into()));
    }
    if !(0.0..=1.0).contains(&cfg.density) {
        return Err(Error::MalformedInput(format!("density {} outside [0, 1]", cfg.density)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::with_capacity(cfg.count);
    let graph = cfg.signature == [("E".to_string(), 2)];
    if !cfg.planted && graph && cfg.count > 0 && cfg.max_instance >= 3 {
        out.push(Pair { instance: templates::cycle(3), template: templates::k2(), planted: None });
    }
    while out.len() < cfg.count {
        let na = rng.gen_range(2..=cfg.max_domain);
        let nx = rng.gen_range(1..=cfg.max_instance);
        let template = random_structure(&mut rng, na, "", cfg)?;
        if cfg.planted {
            let h: Vec<usize> = (0..nx).map(|_| rng.gen_range(0..na)).collect();
            let instance = preimage_structure(&mut rng, &template, &h, cfg)?;
            out.push(Pair { instance, template, planted: Some(h) });
        } else {
            let instance = random_structure(&mut rng, nx, "x", cfg)?;
            out.push(Pair { instance, template, planted: None });
        }
    }
    Ok(out)
}

/// Writes `NNN-instance.json`, `NNN-template.json` and `manifest.json`.
/// Output bytes depend only on the configuration.
pub fn write_corpus(dir: &Path, cfg: &CorpusConfig, pairs: &[Pair]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut entries = Vec::with_capacity(pairs.len());
    for (i, p) in pairs.iter().enumerate() {
        let inst = format!("{i:03}-instance.json");
        let tmpl = format!("{i:03}-template.json");
        std::fs::write(dir.join(&inst), p.instance.to_json() + "\n")?;
        std::fs::write(dir.join(&tmpl), p.template.to_json() + "\n")?;
        let mut e = json!({ "index": i, "instance": inst, "template": tmpl });
        if let Some(h) = &p.planted {
            let map: serde_json::Map<String, Value> = h
                .iter()
                .enumerate()
                .map(|(u, &t)| (p.instance.atom(u).to_string(), json!(p.template.atom(t).to_string())))
                .collect();
            e["planted"] = Value::Object(map);
        }
        entries.push(e);
    }
    let signature: serde_json::Map<String, Value> =
        cfg.signature.iter().map(|(s, a)| (s.clone(), json!(a))).collect();
    let manifest = json!({
        "seed": cfg.seed,
        "count": cfg.count,
        "max_domain": cfg.max_domain,
        "max_instance": cfg.max_instance,
        "planted": cfg.planted,
        "density": cfg.density,
        "signature": signature,
        "pairs": entries,
    });
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(dir.join("manifest.json"), text + "\n")?;
    Ok(())
}

/// Reads back a directory written by [`write_corpus`].
pub fn read_corpus(dir: &Path) -> Result<Vec<Pair>> {
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json"))?)?;
    let entries = manifest["pairs"].as_array().ok_or_else(|| Error::MalformedInput("manifest lacks `pairs`".into()))?;
    let field = |e: &Value, k: &str| -> Result<String> {
        e[k].as_str().map(str::to_owned).ok_or_else(|| Error::MalformedInput(format!("manifest entry lacks `{k}`")))
    };
    let mut out = Vec::with_capacity(entries.len());
    for e in entries {
        let instance = Structure::from_json(&std::fs::read_to_string(dir.join(field(e, "instance")?))?)?;
        let template = Structure::from_json(&std::fs::read_to_string(dir.join(field(e, "template")?))?)?;
        let planted = match e.get("planted").and_then(Value::as_object) {
            None => None,
            Some(m) => {
                let mut h = vec![usize::MAX; instance.size()];
                for (u, t) in m {
                    let u = instance.atom_id(&Atom::name(u.clone())).ok_or_else(|| Error::UnknownAtom(u.clone()))?;
                    let t = t.as_str().ok_or_else(|| Error::MalformedInput("planted image must be a string".into()))?;
                    h[u] = template.atom_id(&Atom::name(t)).ok_or_else(|| Error::UnknownAtom(t.to_string()))?;
                }
                if h.contains(&usize::MAX) {
                    return Err(Error::MalformedInput("planted map is not total".into()));
                }
                Some(h)
            }
        };
        out.push(Pair { instance, template, planted });
    }
    Ok(out)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Every structure on `1..=max_atoms` atoms over `signature`, one per
/// isomorphism class, in a fixed order. Atoms are named `0..n`.
pub fn exhaustive_structures(max_atoms: usize, signature: &[(String, usize)]) -> Result<Vec<Structure>> {
    let mut out = Vec::new();
    for n in 1..=max_atoms {
        let slots: Vec<(usize, Vec<usize>)> = signature
            .iter()
            .enumerate()
            .flat_map(|(s, (_, ar))| lex_tuples(n, *ar).into_iter().map(move |t| (s, t)))
            .collect();
        if slots.len() > 20 {
            return Err(Error::BudgetExceeded(format!("{} tuple slots for exhaustive enumeration", slots.len())));
        }
        let slot_index: BTreeMap<(usize, Vec<usize>), usize> =
            slots.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        let perms = permutations(n);
        // Slot images under each renaming; a class is represented by its
        // smallest bitmask.
        let images: Vec<Vec<usize>> = perms
            .iter()
            .map(|p| {
                slots
                    .iter()
                    .map(|(s, t)| slot_index[&(*s, t.iter().map(|&u| p[u]).collect::<Vec<_>>())])
                    .collect()
            })
            .collect();
        let mut seen = BTreeSet::new();
        for mask in 0u32..(1u32 << slots.len()) {
            let canon = images
                .iter()
                .map(|img| {
                    (0..slots.len()).filter(|&b| mask >> b & 1 == 1).fold(0u32, |acc, b| acc | 1 << img[b])
                })
                .min()
                .expect("at least one permutation");
            if canon != mask || !seen.insert(mask) {
                continue;
            }
            let mut relations = BTreeMap::new();
            for (s, (symbol, arity)) in signature.iter().enumerate() {
                let tuples = slots
                    .iter()
                    .enumerate()
                    .filter(|(b, (si, _))| *si == s && mask >> b & 1 == 1)
                    .map(|(_, (_, t))| t.clone())
                    .collect();
                relations.insert(symbol.clone(), Relation::new(*arity, tuples)?);
            }
            out.push(Structure::new(names(n, ""), relations)?);
        }
    }
    Ok(out)
}

/// All ordered pairs from [`exhaustive_structures`] with instance size at
/// most `max_x` and template size at most `max_a`.
pub fn exhaustive_pairs(max_x: usize, max_a: usize, signature: &[(String, usize)]) -> Result<Vec<(Structure, Structure)>> {
    let all = exhaustive_structures(max_x.max(max_a), signature)?;
    let mut out = Vec::new();
    for x in all.iter().filter(|s| s.size() <= max_x) {
        for a in all.iter().filter(|s| s.size() <= max_a) {
            out.push((x.clone(), a.clone()));
        }
    }
    Ok(out)
}

pub fn binary_signature() -> Vec<(String, usize)> {
    vec![("E".to_string(), 2)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homomorphism::{find_homomorphism, is_homomorphism};

    #[test]
    fn graph_classes_match_known_counts() {
        // Directed graphs with loops up to isomorphism: 2, 10, 104.
        let sig = binary_signature();
        let all = exhaustive_structures(3, &sig).unwrap();
        let count = |n| all.iter().filter(|s| s.size() == n).count();
        assert_eq!((count(1), count(2), count(3)), (2, 10, 104));
    }

    #[test]
    fn planted_maps_are_homomorphisms() {
        let cfg = CorpusConfig { seed: 7, count: 30, planted: true, ..CorpusConfig::default() };
        for p in generate(&cfg).unwrap() {
            let h = p.planted.as_ref().unwrap();
            assert!(is_homomorphism(h, &p.instance, &p.template).unwrap());
        }
    }

    #[test]
    fn unplanted_corpus_has_a_no_instance() {
        let pairs = generate(&CorpusConfig::default()).unwrap();
        let no = pairs.iter().filter(|p| p.template.size() == 2).any(|p| find_homomorphism(&p.instance, &p.template).unwrap().is_none());
        assert!(no);
    }

    #[test]
    fn files_are_deterministic_and_round_trip() {
        let cfg = CorpusConfig { seed: 3, count: 5, planted: true, ..CorpusConfig::default() };
        let d1 = tempdir("a");
        let d2 = tempdir("b");
        write_corpus(&d1, &cfg, &generate(&cfg).unwrap()).unwrap();
        write_corpus(&d2, &cfg, &generate(&cfg).unwrap()).unwrap();
        for f in ["manifest.json", "000-instance.json", "004-template.json"] {
            assert_eq!(std::fs::read(d1.join(f)).unwrap(), std::fs::read(d2.join(f)).unwrap());
        }
        assert_eq!(read_corpus(&d1).unwrap(), generate(&cfg).unwrap());
        let _ = std::fs::remove_dir_all(&d1);
        let _ = std::fs::remove_dir_all(&d2);
    }

    fn tempdir(tag: &str) -> std::path::PathBuf {
        let d = std::env::temp_dir().join(format!("minionlab-corpus-{}-{tag}", std::process::id()));
        let _ = std::fs::remove_dir_all(&d);
        d
    }
}
