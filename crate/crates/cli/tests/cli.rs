use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name).display().to_string()
}

fn minionlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_minionlab")).args(args).output().expect("binary runs")
}

fn check(alg: &str, level: &str, x: &str, a: &str, extra: &[&str]) -> Output {
    let (x, a) = (data(&format!("{x}.json")), data(&format!("{a}.json")));
    let mut args = vec!["check", "--algorithm", alg, "--level", level, "--instance", &x, "--template", &a];
    args.extend_from_slice(extra);
    minionlab(&args)
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

#[test]
fn exit_codes_follow_the_verdict() {
    assert_eq!(code(&check("oracle", "1", "k2", "k3", &[])), 0);
    assert_eq!(code(&check("oracle", "1", "k3", "k2", &[])), 1);
    assert_eq!(code(&check("bw", "2", "k3", "k3", &[])), 0);
    // Level 2 sees only two atoms of the triangle at a time; level 3 sees all.
    assert_eq!(code(&check("sa", "2", "k3", "k2", &[])), 0);
    assert_eq!(code(&check("sa", "3", "k3", "k2", &[])), 1);
    assert_eq!(code(&check("aip", "1", "k3", "k2", &[])), 1);
    assert_eq!(code(&check("sdp", "1", "k3", "k2", &[])), 1);
    // No homomorphism, no exact refutation: the numeric phase gives up.
    assert_eq!(code(&check("sdp", "1", "k3", "c5", &[])), 2);
}

#[test]
fn errors_exit_with_three() {
    assert_eq!(code(&check("lasserre", "1", "k2", "k3", &[])), 3);
    assert_eq!(code(&check("sa", "0", "k2", "k3", &[])), 3);
    assert_eq!(code(&check("sa", "1", "k2", "missing", &[])), 3);
    assert_eq!(code(&minionlab(&["check", "--instance", "x"])), 3);
    assert_eq!(code(&minionlab(&["frobnicate"])), 3);
    assert_eq!(code(&minionlab(&["--help"])), 0);
    let mixed = check("sa", "1", "k2", "one_in_three", &[]);
    assert_eq!(code(&mixed), 3);
    assert!(String::from_utf8_lossy(&mixed.stderr).starts_with("error:"));
}

#[test]
fn summary_line_names_the_verdict() {
    let o = check("aip", "1", "k3", "k2", &[]);
    let line = String::from_utf8(o.stdout).unwrap();
    assert!(line.starts_with("aip level 1: reject, evidence verified ("), "{line}");
    let o = check("oracle", "1", "k3", "k2", &[]);
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("oracle: reject ("));
}

#[test]
fn oracle_report_is_golden() {
    let mut v = stdout_json(&check("oracle", "1", "k2", "k3", &["--json"]));
    v["stats"].as_object_mut().unwrap().remove("millis");
    let want = json!({
        "algorithm": "oracle",
        "checked": true,
        "level": null,
        "stats": { "constraints": 2, "vars": 2 },
        "verdict": "accept",
        "witness": { "0": "1", "1": "2" },
    });
    assert_eq!(v, want);
}

#[test]
fn emitted_witnesses_validate_and_tampered_ones_do_not() {
    let dir = tempfile::tempdir().unwrap();
    for alg in ["oracle", "bw", "sa", "sa-alt", "aip", "ba", "sdp", "sos", "minion-h"] {
        let o = check(alg, "2", "c5", "k3", &["--json"]);
        assert_eq!(code(&o), 0, "{alg}");
        let path = dir.path().join(format!("{alg}.json"));
        std::fs::write(&path, &o.stdout).unwrap();
        let v = check(alg, "2", "c5", "k3", &["--witness", path.to_str().unwrap()]);
        assert_eq!(code(&v), 0, "{alg}: {}", String::from_utf8_lossy(&v.stdout));
    }
    let mut report = stdout_json(&check("sa", "1", "c5", "k3", &["--json"]));
    let w = report["witness"].as_object_mut().unwrap();
    let key = w.keys().next().unwrap().clone();
    w.insert(key, json!("5"));
    let path = dir.path().join("tampered.json");
    std::fs::write(&path, report.to_string()).unwrap();
    let v = check("sa", "1", "c5", "k3", &["--witness", path.to_str().unwrap(), "--json"]);
    assert_eq!(code(&v), 1);
    assert_eq!(stdout_json(&v)["witness_valid"], false);
}

#[test]
fn crosscheck_is_clean_on_the_triangle() {
    let (x, a) = (data("k3.json"), data("k2.json"));
    let o = minionlab(&["crosscheck", "--level", "2", "--instance", &x, "--template", &a]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["violations"], json!([]));
    assert_eq!(v["matrix"]["oracle"]["-"], "reject");
    assert_eq!(v["matrix"]["sa"]["1"], "accept");
    assert_eq!(v["matrix"]["aip"]["1"], "reject");
    assert_eq!(v["matrix"]["sdp"]["-"], "reject");
    assert!(v["checks"].as_u64().unwrap() > 0);
    let o = check("crosscheck", "1", "k2", "k3", &[]);
    assert_eq!(code(&o), 0);
}

#[test]
fn tensor_powers_print_structures() {
    let o = minionlab(&["tensor", "--k", "1", "--structure", &data("k2.json")]);
    assert_eq!(code(&o), 0);
    let k2: Value = serde_json::from_str(&std::fs::read_to_string(data("k2.json")).unwrap()).unwrap();
    let v = stdout_json(&o);
    assert_eq!(v["relations"]["E"]["tuples"].as_array().unwrap().len(), 2);
    assert_eq!(v["domain"].as_array().unwrap().len(), k2["domain"].as_array().unwrap().len());
    let o = minionlab(&["tensor", "--k", "2", "--structure", &data("one_in_three.json")]);
    let v = stdout_json(&o);
    let r = v["relations"].as_object().unwrap().values().next().unwrap();
    assert_eq!(r["arity"], 9);
    assert_eq!(r["tuples"].as_array().unwrap().len(), 3);
}

#[test]
fn corpus_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let o = minionlab(&["corpus", "--seed", seed, "--count", "6", "--planted", "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&out)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
            })
            .collect();
        files.sort();
        files
    };
    let a = write("a", "7");
    assert_eq!(a.len(), 13);
    assert_eq!(a, write("b", "7"));
    assert_ne!(a, write("c", "8"));
    let instance = dir.path().join("a/000-instance.json");
    let template = dir.path().join("a/000-template.json");
    let o = minionlab(&["check", "--algorithm", "oracle", "--instance", instance.to_str().unwrap(), "--template", template.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
}

#[test]
fn bundled_files_match_the_generator() {
    for (stem, s) in minionlab::templates::bundled() {
        let text = std::fs::read_to_string(data(&format!("{stem}.json"))).unwrap();
        assert_eq!(minionlab::Structure::from_json(&text).unwrap(), s, "{stem}");
    }
}
