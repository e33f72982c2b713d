//! Command-line front end for batch exploration and the self-test suites.
//!
//! Exit codes: 0 success, 1 invariant failure in the self tests, 2 usage
//! or parse errors, 3 resource caps.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::deduction::{self, QOracle, SearchParams};
use crate::selftest;
use crate::term::{self, OrdinalTerm};
use crate::wellorder::{self, WellOrdering};
use crate::{arith, bounds, order};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Parser)]
#[command(
    name = "thetax",
    version,
    about = "ordinal notations and deduction-chain search"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct WoArg {
    /// Parameter ordering: `nat`, `finite:<n>`, or `table:<path>`.
    #[arg(long, default_value = "nat")]
    wo: String,
}

impl WoArg {
    fn resolve(&self) -> Result<WellOrdering, String> {
        parse_wo_spec(&self.wo)
    }
}

/// Parse a `--wo` spec.
pub fn parse_wo_spec(spec: &str) -> Result<WellOrdering, String> {
    if spec == "nat" {
        return Ok(wellorder::wo_nat());
    }
    if let Some(n) = spec.strip_prefix("finite:") {
        let n: u64 = n
            .parse()
            .map_err(|_| format!("bad carrier bound in {spec:?}"))?;
        return Ok(wellorder::wo_finite(n));
    }
    if let Some(path) = spec.strip_prefix("table:") {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read table file {path:?}: {e}"))?;
        return wellorder::parse_table_file(&text).map_err(|e| e.to_string());
    }
    Err(format!(
        "unknown ordering spec {spec:?}: expected nat, finite:<n>, or table:<path>"
    ))
}

#[derive(Subcommand)]
enum Command {
    /// Compare two terms; prints `<`, `=`, or `>`.
    Cmp {
        #[command(flatten)]
        wo: WoArg,
        left: String,
        right: String,
    },
    /// Parse and normalize a term; prints the canonical form.
    Normalize {
        #[command(flatten)]
        wo: WoArg,
        term: String,
    },
    /// Enumerate the bounded term universe.
    Enumerate {
        #[command(flatten)]
        wo: WoArg,
        #[arg(long, default_value_t = 2)]
        g: u32,
        #[arg(long, default_value_t = 4)]
        size: u32,
        #[arg(long, default_value_t = 2)]
        e_prefix: usize,
        /// Print only the count.
        #[arg(long)]
        count: bool,
    },
    /// Apply a fundamental function to a term.
    Ff {
        #[command(flatten)]
        wo: WoArg,
        /// Function expression: `id`, `w^(fn)`, or `<term> + fn`.
        #[arg(long = "fn")]
        function: String,
        #[arg(long)]
        at: String,
    },
    /// Build the truncated deduction-chain tree for a set.
    Search {
        /// Set spec: `{1,3,5}` or `evens<=20`.
        #[arg(long)]
        q: String,
        #[arg(long)]
        depth: u32,
        #[arg(long, default_value_t = 2)]
        omega_bound: u64,
        #[arg(long, default_value_t = deduction::DEFAULT_MAX_NODES)]
        max_nodes: usize,
        /// Emit `tree.json`, `model.json`, or `kb.txt` (by file name);
        /// repeatable.
        #[arg(long)]
        emit: Vec<PathBuf>,
    },
    /// Print the Kleene-Brouwer listing of the search tree.
    KbOrder {
        #[arg(long)]
        q: String,
        #[arg(long)]
        depth: u32,
        #[arg(long, default_value_t = 2)]
        omega_bound: u64,
        #[arg(long, default_value_t = deduction::DEFAULT_MAX_NODES)]
        max_nodes: usize,
    },
    /// Bound transforms and the inference step checker.
    Bounds {
        #[command(flatten)]
        wo: WoArg,
        #[command(subcommand)]
        op: BoundsOp,
    },
    /// Run the invariant suites and print a pass/fail table.
    Selftest {
        #[command(flatten)]
        wo: WoArg,
        #[arg(long, default_value_t = 2)]
        g: u32,
        #[arg(long, default_value_t = 4)]
        size: u32,
        #[arg(long, default_value_t = selftest::DEFAULT_SEED)]
        seed: u64,
        /// Also rerun everything and compare emitted bytes.
        #[arg(long)]
        determinism: bool,
        /// Write emitted files under this directory.
        #[arg(long)]
        emit_dir: Option<PathBuf>,
        /// Run the full acceptance-scale suite instead of the quick one.
        #[arg(long)]
        full: bool,
    },
}

#[derive(Subcommand)]
enum BoundsOp {
    /// omega^alpha.
    Cutred { alpha: String },
    /// The collapse of alpha.
    Collapse { alpha: String },
    /// alpha + delta under the additive shape condition.
    Add { alpha: String, delta: String },
    /// E(u) + k.
    Embed { u: u64, k: u64 },
    /// The collapse of the n-fold tower over E(u0) + m.
    Final { u0: u64, n: u32, m: u64 },
    /// Check a single inference step from a file.
    Check {
        #[arg(long)]
        step: PathBuf,
    },
}

/// Entry point; returns the process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    EXIT_OK
                }
                _ => EXIT_USAGE,
            };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(Failure { code, message }) => {
            eprintln!("error: {message}");
            code
        }
    }
}

struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn parse_term(text: &str, wo: &WellOrdering) -> Result<OrdinalTerm, Failure> {
    term::parse(text, wo).map_err(|e| usage(format!("{text:?}: {e}")))
}

fn dispatch(command: Command) -> Result<i32, Failure> {
    match command {
        Command::Cmp { wo, left, right } => {
            let wo = wo.resolve().map_err(usage)?;
            let l = parse_term(&left, &wo)?;
            let r = parse_term(&right, &wo)?;
            let glyph = match order::compare(&wo, &l, &r).map_err(|e| usage(e.to_string()))? {
                std::cmp::Ordering::Less => "<",
                std::cmp::Ordering::Equal => "=",
                std::cmp::Ordering::Greater => ">",
            };
            println!("{glyph}");
            Ok(EXIT_OK)
        }
        Command::Normalize { wo, term: text } => {
            let wo = wo.resolve().map_err(usage)?;
            println!("{}", term::print(&parse_term(&text, &wo)?));
            Ok(EXIT_OK)
        }
        Command::Enumerate {
            wo,
            g,
            size,
            e_prefix,
            count,
        } => {
            let wo = wo.resolve().map_err(usage)?;
            let universe = term::enumerate_terms(&wo, g, size, e_prefix).map_err(|e| Failure {
                code: EXIT_RESOURCE,
                message: e.to_string(),
            })?;
            if count {
                println!("{}", universe.len());
            } else {
                for t in &universe.terms {
                    println!("{}", term::print(t));
                }
            }
            Ok(EXIT_OK)
        }
        Command::Ff { wo, function, at } => {
            let wo = wo.resolve().map_err(usage)?;
            let f = arith::parse_fundfn(&function, &wo).map_err(usage)?;
            let arg = parse_term(&at, &wo)?;
            let value = arith::ff_apply(&wo, &f, &arg).map_err(|e| usage(e.to_string()))?;
            println!("{}", term::print(&value));
            Ok(EXIT_OK)
        }
        Command::Search {
            q,
            depth,
            omega_bound,
            max_nodes,
            emit,
        } => {
            let q = QOracle::parse_spec(&q).map_err(|e| usage(e.to_string()))?;
            let mut params = SearchParams::new(depth, omega_bound);
            params.max_nodes = max_nodes;
            let tree = build_tree_cli(&q, &params)?;
            let truncated = tree.truncated_leaf_paths();
            println!(
                "{} nodes, {} surviving branches at depth {}",
                tree.node_count(),
                truncated.len(),
                depth
            );
            for path in emit {
                emit_search_file(&tree, &truncated, &path)?;
            }
            Ok(EXIT_OK)
        }
        Command::KbOrder {
            q,
            depth,
            omega_bound,
            max_nodes,
        } => {
            let q = QOracle::parse_spec(&q).map_err(|e| usage(e.to_string()))?;
            let mut params = SearchParams::new(depth, omega_bound);
            params.max_nodes = max_nodes;
            let tree = build_tree_cli(&q, &params)?;
            print!("{}", tree.emit_kb_text());
            Ok(EXIT_OK)
        }
        Command::Bounds { wo, op } => {
            let wo = wo.resolve().map_err(usage)?;
            match op {
                BoundsOp::Cutred { alpha } => {
                    let a = parse_term(&alpha, &wo)?;
                    println!("{}", term::print(&bounds::cut_reduce_bound(&a)));
                }
                BoundsOp::Collapse { alpha } => {
                    let a = parse_term(&alpha, &wo)?;
                    println!("{}", term::print(&bounds::collapse_bound(&a)));
                }
                BoundsOp::Add { alpha, delta } => {
                    let a = parse_term(&alpha, &wo)?;
                    let d = parse_term(&delta, &wo)?;
                    let sum = bounds::add_bound(&wo, &a, &d).map_err(|e| usage(e.to_string()))?;
                    println!("{}", term::print(&sum));
                }
                BoundsOp::Embed { u, k } => {
                    let t = bounds::embed_bound(&wo, u, k).map_err(|e| usage(e.to_string()))?;
                    println!("{}", term::print(&t));
                }
                BoundsOp::Final { u0, n, m } => {
                    let t = bounds::final_bound(&wo, u0, n, m).map_err(|e| usage(e.to_string()))?;
                    println!("{}", term::print(&t));
                }
                BoundsOp::Check { step } => {
                    let text = std::fs::read_to_string(&step)
                        .map_err(|e| usage(format!("cannot read {step:?}: {e}")))?;
                    let file: bounds::StepFile = serde_json::from_str(&text)
                        .map_err(|e| usage(format!("bad step file: {e}")))?;
                    let (q, inst) = file.resolve(&wo).map_err(|e| usage(e.to_string()))?;
                    let report = bounds::check_step(&wo, &q, &inst);
                    for note in &report.notes {
                        println!("note: {note}");
                    }
                    if report.accepted() {
                        println!("accepted");
                    } else {
                        for failure in &report.failures {
                            println!("rejected: {failure}");
                        }
                        return Ok(EXIT_FAILED);
                    }
                }
            }
            Ok(EXIT_OK)
        }
        Command::Selftest {
            wo,
            g,
            size,
            seed,
            determinism,
            emit_dir,
            full,
        } => {
            let wo = wo.resolve().map_err(usage)?;
            let config = if full {
                selftest::SuiteConfig::acceptance(seed)
            } else {
                selftest::SuiteConfig::quick(&wo, g, size, seed)
            };
            let outcome = selftest::run_all(&config, emit_dir.as_deref()).map_err(|e| Failure {
                code: EXIT_RESOURCE,
                message: e,
            })?;
            for r in &outcome.results {
                println!("{}", r.table_line());
            }
            let mut ok = outcome.results.iter().all(|r| r.passed);
            if determinism {
                let second = selftest::run_all(&config, None).map_err(|e| Failure {
                    code: EXIT_RESOURCE,
                    message: e,
                })?;
                let identical = selftest::emitted_identical(&outcome, &second);
                println!(
                    "determinism: emitted files bit-identical across reruns ... {}",
                    if identical { "PASS" } else { "FAIL" }
                );
                ok &= identical;
            }
            Ok(if ok { EXIT_OK } else { EXIT_FAILED })
        }
    }
}

fn build_tree_cli(q: &QOracle, params: &SearchParams) -> Result<deduction::DTree, Failure> {
    deduction::build_tree(q, params).map_err(|e| Failure {
        code: match e {
            deduction::DeductionError::ResourceCap { .. } => EXIT_RESOURCE,
            _ => EXIT_USAGE,
        },
        message: e.to_string(),
    })
}

fn emit_search_file(
    tree: &deduction::DTree,
    truncated: &[Vec<u32>],
    path: &Path,
) -> Result<(), Failure> {
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or_default();
    let bytes = if name.ends_with("tree.json") {
        serde_json::to_vec_pretty(&tree.emit_json()).expect("tree emit serializes")
    } else if name.ends_with("model.json") {
        // The model of the leftmost surviving branch; empty if none.
        let model = match truncated.first() {
            Some(leaf) => {
                let branch = tree.branch_sequents(leaf).expect("leaf path resolves");
                deduction::extract_model(&branch)
            }
            None => deduction::CodedModel::default(),
        };
        serde_json::to_vec_pretty(&model.emit_json()).expect("model emit serializes")
    } else if name.ends_with("kb.txt") {
        tree.emit_kb_text().into_bytes()
    } else {
        return Err(usage(format!(
            "emit target {name:?} must end in tree.json, model.json, or kb.txt"
        )));
    };
    std::fs::write(path, bytes).map_err(|e| usage(format!("cannot write {path:?}: {e}")))
}
