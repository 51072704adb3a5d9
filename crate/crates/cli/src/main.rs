//! `minionlab` command-line front end.
//!
//! Exit codes: 0 accept, 1 reject, 2 reject-numeric, 3 error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use minionlab::corpus::{generate, write_corpus, CorpusConfig};
use minionlab::crosscheck::crosscheck;
use minionlab::hierarchy::{check_witness, run, Algorithm};
use minionlab::{Budget, Error, Result, Structure};

const EXIT_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "minionlab", version, about = "Minion tests and consistency hierarchies for finite-template CSPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm on an instance and a template.
    Check {
        /// bw, sa, sa-alt, aip, ba, sdp, sos, minion-h, oracle or crosscheck.
        #[arg(long)]
        algorithm: String,
        #[arg(long, default_value_t = 1)]
        level: usize,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        template: PathBuf,
        /// Validate this witness instead of solving; exit 0 if it is valid.
        #[arg(long)]
        witness: Option<PathBuf>,
        /// Print the full JSON report instead of a summary line.
        #[arg(long)]
        json: bool,
    },
    /// Run every algorithm at levels up to `level` and test their implications.
    Crosscheck {
        #[arg(long)]
        level: usize,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        template: PathBuf,
    },
    /// Print the k-th tensor power of a structure.
    Tensor {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        structure: PathBuf,
    },
    /// Write a seeded corpus of instance/template pairs.
    Corpus {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 3)]
        max_domain: usize,
        #[arg(long, default_value_t = 4)]
        max_instance: usize,
        /// Plant a homomorphism in every pair.
        #[arg(long)]
        planted: bool,
        #[arg(long, default_value = "corpus")]
        out: PathBuf,
    },
}

fn load(path: &Path) -> Result<Structure> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Structure::from_json(&text)
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("JSON values serialize"));
}

fn execute(cmd: Command, budget: &Budget) -> Result<u8> {
    match cmd {
        Command::Check { algorithm, level, instance, template, witness, json } => {
            if level == 0 {
                return Err(Error::MalformedInput("level must be at least 1".into()));
            }
            let (x, a) = (load(&instance)?, load(&template)?);
            if algorithm == "crosscheck" {
                let r = crosscheck(&x, &a, level, budget)?;
                print_json(&r.to_json());
                return Ok(u8::from(!r.is_clean()));
            }
            let alg: Algorithm = algorithm.parse()?;
            if let Some(path) = witness {
                let text = std::fs::read_to_string(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                let valid = check_witness(alg, &x, &a, level, &serde_json::from_str(&text)?, budget)?;
                let level = alg.is_leveled().then_some(level);
                if json {
                    print_json(&json!({ "algorithm": alg.name(), "level": level, "witness_valid": valid }));
                } else {
                    println!("{alg}: witness {}", if valid { "valid" } else { "invalid" });
                }
                return Ok(u8::from(!valid));
            }
            let r = run(alg, &x, &a, level, budget)?;
            if json {
                print_json(&r.to_json());
            } else {
                let level = r.level.map_or(String::new(), |l| format!(" level {l}"));
                let checked = match r.checked {
                    Some(true) => ", evidence verified",
                    Some(false) => ", evidence FAILED verification",
                    None => "",
                };
                println!("{alg}{level}: {}{checked} ({} ms)", r.outcome.label(), r.stats.millis);
            }
            Ok(r.outcome.exit_code() as u8)
        }
        Command::Crosscheck { level, instance, template } => {
            let r = crosscheck(&load(&instance)?, &load(&template)?, level, budget)?;
            print_json(&r.to_json());
            Ok(u8::from(!r.is_clean()))
        }
        Command::Tensor { k, structure } => {
            let t = load(&structure)?.tensor_power(k, budget)?;
            println!("{}", t.to_json());
            Ok(0)
        }
        Command::Corpus { seed, count, max_domain, max_instance, planted, out } => {
            let cfg = CorpusConfig { seed, count, max_domain, max_instance, planted, ..CorpusConfig::default() };
            budget.check_domain(max_domain.max(max_instance) as u128, "corpus structures")?;
            let pairs = generate(&cfg)?;
            write_corpus(&out, &cfg, &pairs)?;
            println!("wrote {} pairs to {}", pairs.len(), out.display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    // clap's own usage-error code 2 would collide with reject-numeric.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command, &Budget::from_env()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
