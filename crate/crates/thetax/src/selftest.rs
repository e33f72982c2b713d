//! The invariant suites behind `thetax selftest` and the acceptance
//! tests: exhaustive order laws, the clause-closure oracle equivalence,
//! the collapsing lemmas at term level, an independently written
//! Cantor-normal-form cross-check, the majorization suite, fundamental
//! function laws, the deduction-chain run, Kleene-Brouwer checks, and the
//! bound calculus fixtures.
//!
//! Every suite is deterministic for a fixed seed; emitted files contain no
//! timing data, so reruns are byte-identical.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::arith::{
    self, add, ff_apply, ff_make, omega_pow, omega_tower, times_nat, FundFn, FundFnExpr,
};
use crate::bounds::{self, check_step, StepFile};
use crate::deduction::{self, kb_path_compare, QOracle, SearchParams};
use crate::order::{cmp, oracle_compare, triangle_le, triangle_less};
use crate::term::{self, enumerate_terms, star, OrdinalTerm, TermUniverse};
use crate::wellorder::{wo_finite, wo_nat, WellOrdering};

pub const DEFAULT_SEED: u64 = 1729;

pub const STEPS_VALID_JSON: &str = include_str!("fixtures/steps_valid.json");
pub const STEPS_BROKEN_JSON: &str = include_str!("fixtures/steps_broken.json");

/// Scale knobs for one suite run.
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Universe of the main total-order suite.
    pub order_wo: WellOrdering,
    pub order_g: u32,
    pub order_size: u32,
    pub order_e: usize,
    /// Smaller universe for the quadratic suites (oracle, collapsing
    /// lemmas, majorization).
    pub small_wo: WellOrdering,
    pub small_g: u32,
    pub small_size: u32,
    pub small_e: usize,
    /// Universe fundamental-function parameters and arguments come from.
    pub ff_wo: WellOrdering,
    pub ff_g: u32,
    pub ff_size: u32,
    pub ff_e: usize,
    pub transitivity_samples: usize,
    pub triangle_samples: usize,
    pub cnf_size: u32,
    pub fundfn_count: usize,
    pub fundfn_depth: u32,
    pub search_q: QOracle,
    pub search_depth: u32,
    pub search_omega: u64,
    pub search_max_nodes: usize,
    pub kb_trees: usize,
    pub kb_node_cap: usize,
    pub kb_pair_samples: usize,
    pub bound_u: u64,
    pub bound_k: u64,
    pub bound_nm: u32,
    /// Per-criterion wall-clock limits in seconds (acceptance only).
    pub budgets: [Option<f64>; 9],
}

impl SuiteConfig {
    /// The full acceptance-scale configuration.
    pub fn acceptance(seed: u64) -> SuiteConfig {
        SuiteConfig {
            seed,
            order_wo: wo_finite(3),
            order_g: 3,
            order_size: 6,
            order_e: 3,
            small_wo: wo_finite(2),
            small_g: 2,
            small_size: 5,
            small_e: 2,
            ff_wo: wo_finite(2),
            ff_g: 2,
            ff_size: 4,
            ff_e: 2,
            transitivity_samples: 1_000_000,
            triangle_samples: 200_000,
            cnf_size: 8,
            fundfn_count: 1000,
            fundfn_depth: 5,
            search_q: QOracle::parse_spec("evens<=20").expect("builtin spec parses"),
            search_depth: 40,
            search_omega: 5,
            search_max_nodes: deduction::DEFAULT_MAX_NODES,
            kb_trees: 100,
            kb_node_cap: 200,
            kb_pair_samples: 100_000,
            bound_u: 3,
            bound_k: 10,
            bound_nm: 4,
            budgets: [
                Some(120.0),
                Some(60.0),
                None,
                Some(30.0),
                None,
                Some(120.0),
                Some(300.0),
                None,
                Some(30.0),
            ],
        }
    }

    /// A scaled-down configuration for interactive runs.
    pub fn quick(wo: &WellOrdering, g: u32, size: u32, seed: u64) -> SuiteConfig {
        SuiteConfig {
            seed,
            order_wo: wo.clone(),
            order_g: g,
            order_size: size,
            order_e: 2,
            small_wo: wo.clone(),
            small_g: g.min(2),
            small_size: size.min(4),
            small_e: 2,
            ff_wo: wo.clone(),
            ff_g: g.min(2),
            ff_size: size.min(4),
            ff_e: 2,
            transitivity_samples: 20_000,
            triangle_samples: 10_000,
            cnf_size: 6,
            fundfn_count: 50,
            fundfn_depth: 4,
            search_q: QOracle::parse_spec("evens<=6").expect("builtin spec parses"),
            search_depth: 8,
            search_omega: 2,
            search_max_nodes: 200_000,
            kb_trees: 20,
            kb_node_cap: 60,
            kb_pair_samples: 5_000,
            bound_u: 3,
            bound_k: 4,
            bound_nm: 3,
            budgets: [None; 9],
        }
    }
}

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub index: usize,
    pub name: &'static str,
    pub passed: bool,
    pub seconds: f64,
    pub details: String,
}

impl CriterionResult {
    pub fn table_line(&self) -> String {
        format!(
            "criterion {}: {} ... {} [{:.1}s] {}",
            self.index,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.seconds,
            self.details
        )
    }
}

#[derive(Debug)]
pub struct SuiteOutcome {
    pub results: Vec<CriterionResult>,
    /// Named files the run emitted (also written to disk when a directory
    /// was given).
    pub emitted: BTreeMap<String, Vec<u8>>,
}

impl SuiteOutcome {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }
}

/// Byte-identical emissions between two runs.
pub fn emitted_identical(a: &SuiteOutcome, b: &SuiteOutcome) -> bool {
    a.emitted == b.emitted
}

struct Emitter {
    files: BTreeMap<String, Vec<u8>>,
}

impl Emitter {
    fn put(&mut self, name: &str, bytes: impl Into<Vec<u8>>) {
        self.files.insert(name.to_string(), bytes.into());
    }
}

/// A criterion body reports violations through this collector.
#[derive(Default)]
struct Checks {
    checked: u64,
    violations: Vec<String>,
}

impl Checks {
    fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok && self.violations.len() < 25 {
            self.violations.push(describe());
        } else if !ok {
            self.violations.push(String::new());
        }
    }

    fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn summary(&self) -> String {
        format!(
            "{} checks, {} violations",
            self.checked,
            self.violations.len()
        )
    }
}

/// Run criteria 1 through 9, optionally writing the emitted files under a
/// directory. Returns an error only when a run cannot even be set up
/// (enumeration cap, disk errors).
pub fn run_all(config: &SuiteConfig, emit_dir: Option<&Path>) -> Result<SuiteOutcome, String> {
    let mut emitter = Emitter {
        files: BTreeMap::new(),
    };
    type Criterion = fn(&SuiteConfig, &mut Emitter) -> Result<(Checks, String), String>;
    let criteria: [(&'static str, Criterion); 9] = [
        ("total order on the bounded universe", criterion1),
        ("clause-closure oracle equivalence", criterion2),
        ("collapsing lemmas at term level", criterion3),
        ("Cantor-normal-form cross-check", criterion4),
        ("majorization suite", criterion5),
        ("fundamental function laws", criterion6),
        ("deduction chains and model extraction", criterion7),
        ("Kleene-Brouwer ordering", criterion8),
        ("bound calculus and step fixtures", criterion9),
    ];
    let mut results = Vec::new();
    for (k, (name, body)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (checks, extra) = body(config, &mut emitter)?;
        let seconds = start.elapsed().as_secs_f64();
        let mut passed = checks.ok();
        let mut details = checks.summary();
        if !extra.is_empty() {
            details = format!("{details}; {extra}");
        }
        if let Some(first) = checks.violations.iter().find(|v| !v.is_empty()) {
            details = format!("{details}; first: {first}");
        }
        if let Some(budget) = config.budgets[k] {
            if seconds > budget {
                passed = false;
                details = format!("{details}; exceeded {budget}s budget");
            }
        }
        results.push(CriterionResult {
            index: k + 1,
            name,
            passed,
            seconds,
            details,
        });
    }
    if let Some(dir) = emit_dir {
        std::fs::create_dir_all(dir).map_err(|e| e.to_string())?;
        for (name, bytes) in &emitter.files {
            std::fs::write(dir.join(name), bytes).map_err(|e| e.to_string())?;
        }
    }
    Ok(SuiteOutcome {
        results,
        emitted: emitter.files,
    })
}

fn rng_for(config: &SuiteConfig, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(config.seed ^ salt)
}

// ---------------------------------------------------------------------------
// Criterion 1: irreflexivity, trichotomy, transitivity
// ---------------------------------------------------------------------------

fn criterion1(config: &SuiteConfig, emitter: &mut Emitter) -> Result<(Checks, String), String> {
    let wo = &config.order_wo;
    let universe = enumerate_terms(wo, config.order_g, config.order_size, config.order_e)
        .map_err(|e| e.to_string())?;
    let terms = &universe.terms;
    let n = terms.len();
    let mut checks = Checks::default();

    for t in terms {
        checks.check(cmp(wo, t, t) == Ordering::Equal, || {
            format!("irreflexivity broke at {t}")
        });
    }
    for i in 0..n {
        for j in i + 1..n {
            let c = cmp(wo, &terms[i], &terms[j]);
            let ok = c != Ordering::Equal && cmp(wo, &terms[j], &terms[i]) == c.reverse();
            checks.check(ok, || {
                format!("trichotomy broke at ({}, {})", terms[i], terms[j])
            });
        }
    }

    let full_cube = (n as u128).pow(3) <= config.transitivity_samples as u128;
    let mut triples_checked = 0u64;
    let mut check_triple = |checks: &mut Checks, a: usize, b: usize, c: usize| {
        if cmp(wo, &terms[a], &terms[b]) == Ordering::Less
            && cmp(wo, &terms[b], &terms[c]) == Ordering::Less
        {
            checks.check(cmp(wo, &terms[a], &terms[c]) == Ordering::Less, || {
                format!(
                    "transitivity broke at ({}, {}, {})",
                    terms[a], terms[b], terms[c]
                )
            });
        }
        triples_checked += 1;
    };
    if full_cube {
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    check_triple(&mut checks, a, b, c);
                }
            }
        }
    } else {
        let mut rng = rng_for(config, 0x0001);
        for _ in 0..config.transitivity_samples {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            let c = rng.gen_range(0..n);
            check_triple(&mut checks, a, b, c);
        }
    }

    let mut file = String::new();
    let _ = writeln!(file, "universe: {} over {}", n, wo);
    let _ = writeln!(
        file,
        "bounds: g<={} size<={} e<{}",
        config.order_g, config.order_size, config.order_e
    );
    let _ = writeln!(
        file,
        "triples: {} ({})",
        triples_checked,
        if full_cube { "full cube" } else { "sampled" }
    );
    let _ = writeln!(file, "violations: {}", checks.violations.len());
    emitter.put("c1_order.txt", file);
    Ok((checks, format!("{n} terms")))
}

// ---------------------------------------------------------------------------
// Criterion 2: oracle equivalence
// ---------------------------------------------------------------------------

fn small_universe(config: &SuiteConfig) -> Result<TermUniverse, String> {
    enumerate_terms(
        &config.small_wo,
        config.small_g,
        config.small_size,
        config.small_e,
    )
    .map_err(|e| e.to_string())
}

fn criterion2(config: &SuiteConfig, emitter: &mut Emitter) -> Result<(Checks, String), String> {
    let universe = small_universe(config)?;
    let wo = &universe.ordering;
    let n = universe.len();
    let mut checks = Checks::default();

    let table = oracle_compare(&universe);
    checks.check(table.is_total(), || {
        format!("fixpoint left {} pairs undecided", table.undecided.len())
    });
    for i in 0..n {
        for j in 0..n {
            let by_cmp = cmp(wo, &universe.terms[i], &universe.terms[j]) == Ordering::Less;
            checks.check(table.lt(i, j) == by_cmp, || {
                format!(
                    "oracle disagrees with the comparator at ({}, {})",
                    universe.terms[i], universe.terms[j]
                )
            });
        }
    }

    let mut file = String::new();
    let _ = writeln!(file, "universe: {} over {}", n, wo);
    let _ = writeln!(file, "fixpoint total: {}", table.is_total());
    let _ = writeln!(file, "violations: {}", checks.violations.len());
    emitter.put("c2_oracle.txt", file);
    Ok((checks, format!("{n} terms")))
}

// ---------------------------------------------------------------------------
// Criterion 3: collapsing lemmas at term level
// ---------------------------------------------------------------------------

fn criterion3(config: &SuiteConfig, emitter: &mut Emitter) -> Result<(Checks, String), String> {
    let mut checks = Checks::default();

    // Star sits below the collapse, over the big universe.
    let order_universe = enumerate_terms(
        &config.order_wo,
        config.order_g,
        config.order_size,
        config.order_e,
    )
    .map_err(|e| e.to_string())?;
    let wo = &config.order_wo;
    for t in &order_universe.terms {
        let s = star(wo, t);
        checks.check(
            cmp(wo, &s, &OrdinalTerm::theta(t.clone())) == Ordering::Less,
            || format!("star not below collapse at {t}"),
        );
    }

    // The quadratic parts run on the smaller universe.
    let universe = small_universe(config)?;
    let wo = &universe.ordering;
    for s in &universe.terms {
        let ths = OrdinalTerm::theta(s.clone());
        let star_s = star(wo, s);
        for t in &universe.terms {
            let tht = OrdinalTerm::theta(t.clone());
            // Both directions of the collapse comparison equivalence.
            let lhs = cmp(wo, &ths, &tht) == Ordering::Less;
            let rhs = (cmp(wo, s, t) == Ordering::Less && cmp(wo, &star_s, &tht) == Ordering::Less)
                || cmp(wo, &ths, &star(wo, t)) != Ordering::Greater;
            checks.check(lhs == rhs, || {
                format!("collapse comparison equivalence broke at ({s}, {t})")
            });
            // Raising to an omega power does not cross a collapse.
            let below = cmp(wo, s, &tht) == Ordering::Less;
            let pow_below = cmp(wo, &omega_pow(s), &tht) == Ordering::Less;
            checks.check(below == pow_below, || {
                format!("omega-power bridge broke at ({s}, {t})")
            });
        }
    }

    let mut file = String::new();
    let _ = writeln!(
        file,
        "linear pass: {} terms; quadratic pass: {} terms",
        order_universe.len(),
        universe.len()
    );
    let _ = writeln!(file, "violations: {}", checks.violations.len());
    emitter.put("c3_collapse.txt", file);
    Ok((checks, String::new()))
}

// ---------------------------------------------------------------------------
// Criterion 4: independent Cantor-normal-form comparator
// ---------------------------------------------------------------------------

/// Independent representation of an ordinal below the first epsilon
/// number: a weakly decreasing list of exponents. Written from the
/// textbook definition, sharing no code with the term comparator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfOrdinal(pub Vec<CnfOrdinal>);

impl CnfOrdinal {
    pub fn zero() -> CnfOrdinal {
        CnfOrdinal(Vec::new())
    }

    pub fn size(&self) -> u32 {
        if self.0.is_empty() {
            1
        } else {
            self.0.iter().map(|e| 1 + e.size()).sum()
        }
    }
}

/// Textbook comparison: compare exponent sequences lexicographically, a
/// proper prefix being smaller.
pub fn cnf_compare(a: &CnfOrdinal, b: &CnfOrdinal) -> Ordering {
    for (x, y) in a.0.iter().zip(b.0.iter()) {
        match cnf_compare(x, y) {
            Ordering::Equal => continue,
            decided => return decided,
        }
    }
    a.0.len().cmp(&b.0.len())
}

/// All CNF ordinals within the size bound, built directly from the
/// exponent-list representation.
pub fn enumerate_cnf(size_bound: u32) -> Vec<CnfOrdinal> {
    let mut by_size: Vec<Vec<CnfOrdinal>> = vec![Vec::new(); size_bound as usize + 1];
    if size_bound >= 1 {
        by_size[1].push(CnfOrdinal::zero());
    }
    for s in 2..=size_bound {
        // Pick a first (largest) exponent of size e, then any ordinal of
        // size s - 1 - e whose exponents do not exceed it, or nothing.
        let mut bucket = Vec::new();
        let smaller: Vec<CnfOrdinal> = by_size.iter().flatten().cloned().collect();
        for head in &smaller {
            let head_cost = 1 + head.size();
            if head_cost > s {
                continue;
            }
            if head_cost == s {
                bucket.push(CnfOrdinal(vec![head.clone()]));
                continue;
            }
            for rest in by_size[(s - head_cost) as usize].iter() {
                let fits = rest
                    .0
                    .first()
                    .map(|e| cnf_compare(e, head) != Ordering::Greater)
                    .unwrap_or(false);
                if fits {
                    let mut exps = vec![head.clone()];
                    exps.extend(rest.0.iter().cloned());
                    bucket.push(CnfOrdinal(exps));
                }
            }
        }
        by_size[s as usize] = bucket;
    }
    by_size.into_iter().flatten().collect()
}

/// Bridge into the term representation (through the normalizer).
pub fn cnf_to_term(wo: &WellOrdering, c: &CnfOrdinal) -> OrdinalTerm {
    fn raw(c: &CnfOrdinal) -> term::RawTerm {
        c.0.iter().fold(term::RawTerm::Zero, |acc, e| {
            let part = term::RawTerm::WPow(Box::new(raw(e)));
            if matches!(acc, term::RawTerm::Zero) {
                part
            } else {
                term::RawTerm::Add(Box::new(acc), Box::new(part))
            }
        })
    }
    term::normalize(wo, &raw(c)).expect("CNF ordinals normalize")
}

fn is_pure_cnf_term(t: &OrdinalTerm) -> bool {
    match t {
        OrdinalTerm::Zero => true,
        OrdinalTerm::Omega | OrdinalTerm::E(_) | OrdinalTerm::Theta(_) => false,
        OrdinalTerm::Sum(ps) => ps.iter().all(|p| match p {
            term::Principal::WPow(e) => is_pure_cnf_term(e),
            term::Principal::Atom(_) => false,
        }),
    }
}

fn criterion4(config: &SuiteConfig, emitter: &mut Emitter) -> Result<(Checks, String), String> {
    let wo = wo_nat();
    let mut checks = Checks::default();
    let cnfs = enumerate_cnf(config.cnf_size);
    let terms: Vec<OrdinalTerm> = cnfs.iter().map(|c| cnf_to_term(&wo, c)).collect();

    // Same fragment as the term enumerator sees it.
    let pure: Vec<OrdinalTerm> = enumerate_terms(&wo, config.cnf_size, config.cnf_size, 0)
        .map_err(|e| e.to_string())?
        .terms
        .into_iter()
        .filter(is_pure_cnf_term)
        .collect();
    checks.check(pure.len() == cnfs.len(), || {
        format!(
            "fragment sizes disagree: {} CNF ordinals vs {} pure terms",
            cnfs.len(),
            pure.len()
        )
    });
    for t in &terms {
        checks.check(pure.contains(t), || {
            format!("{t} missing from the pure fragment")
        });
    }

    for (i, a) in cnfs.iter().enumerate() {
        for (j, b) in cnfs.iter().enumerate() {
            checks.check(cnf_compare(a, b) == cmp(&wo, &terms[i], &terms[j]), || {
                format!("CNF comparator disagrees at ({}, {})", terms[i], terms[j])
            });
        }
    }

    let mut file = String::new();
    let _ = writeln!(file, "fragment size: {}", cnfs.len());
    let _ = writeln!(file, "violations: {}", checks.violations.len());
    emitter.put("c4_cnf.txt", file);
    Ok((checks, format!("{} pure terms", cnfs.len())))
}

// ---------------------------------------------------------------------------
// Criterion 5: majorization suite
// ---------------------------------------------------------------------------

fn criterion5(config: &SuiteConfig, emitter: &mut Emitter) -> Result<(Checks, String), String> {
    let universe = small_universe(config)?;
    let wo = &universe.ordering;
    let terms = &universe.terms;
    let n = terms.len();
    let mut checks = Checks::default();
    let omega = OrdinalTerm::Omega;

    // Pairwise laws.
    for a in terms {
        for b in terms {
            let a_lt_b = cmp(wo, a, b) == Ordering::Less;
            if a_lt_b
                && cmp(wo, a, &omega) == Ordering::Less
                && cmp(wo, b, &omega) == Ordering::Less
            {
                checks.check(triangle_less(wo, a, b), || {
                    format!("below the anchor, {a} < {b} is not a majorization")
                });
            }
            if triangle_less(wo, a, b) {
                checks.check(
                    triangle_less(
                        wo,
                        &OrdinalTerm::theta(a.clone()),
                        &OrdinalTerm::theta(b.clone()),
                    ),
                    || format!("collapse does not preserve majorization at ({a}, {b})"),
                );
                checks.check(triangle_le(wo, &arith::succ(wo, a), b), || {
                    format!("successor law broke at ({a}, {b})")
                });
                // One omega power up swallows finite multiples.
                for k in 1..=3u64 {
                    let lhs = times_nat(&omega_pow(a), k).expect("principal");
                    checks.check(triangle_less(wo, &lhs, &omega_pow(b)), || {
                        format!("multiple-vs-power law broke at ({a}, {b}, {k})")
                    });
                }
            }
        }
    }

    // Finite multiples of one power step up by one, and collapses of
    // successors majorize the collapse below.
    for a in terms {
        for k in 1..=3u64 {
            let pow = omega_pow(a);
            let lhs = times_nat(&pow, k).expect("principal");
            let rhs = times_nat(&pow, k + 1).expect("principal");
            checks.check(triangle_less(wo, &lhs, &rhs), || {
                format!("consecutive-multiple law broke at ({a}, {k})")
            });
        }
        checks.check(
            triangle_less(
                wo,
                &OrdinalTerm::theta(a.clone()),
                &OrdinalTerm::theta(arith::succ(wo, a)),
            ),
            || format!("collapse-of-successor law broke at {a}"),
        );
    }

    // Adding a nonzero ordinal below the first fixed point of the omega
    // map always majorizes; such terms are exactly the pure ones here.
    let small_cnf: Vec<OrdinalTerm> = enumerate_cnf(config.small_size.min(6))
        .iter()
        .map(|c| cnf_to_term(wo, c))
        .filter(|t| t != &OrdinalTerm::Zero)
        .collect();
    for a in terms {
        for b in &small_cnf {
            checks.check(triangle_less(wo, a, &add(wo, a, b)), || {
                format!("additive majorization broke at ({a}, {b})")
            });
        }
    }

    // Sampled majorization transitivity and the left-addition law.
    let mut rng = rng_for(config, 0x0005);
    for _ in 0..config.triangle_samples {
        let a = &terms[rng.gen_range(0..n)];
        let b = &terms[rng.gen_range(0..n)];
        let c = &terms[rng.gen_range(0..n)];
        if triangle_less(wo, a, b) && triangle_less(wo, b, c) {
            checks.check(triangle_less(wo, a, c), || {
                format!("majorization transitivity broke at ({a}, {b}, {c})")
            });
        }
        // Left addition of one power preserves majorization under the
        // ceiling.
        let gamma = c;
        let ceiling = omega_pow(&arith::succ(wo, gamma));
        if triangle_less(wo, a, b) && cmp(wo, b, &ceiling) == Ordering::Less {
            let lhs = add(wo, &omega_pow(gamma), a);
            let rhs = add(wo, &omega_pow(gamma), b);
            checks.check(triangle_less(wo, &lhs, &rhs), || {
                format!("left-addition law broke at (gamma={gamma}, {a}, {b})")
            });
        }
    }

    let mut file = String::new();
    let _ = writeln!(
        file,
        "universe: {n} terms; samples: {}",
        config.triangle_samples
    );
    let _ = writeln!(file, "violations: {}", checks.violations.len());
    emitter.put("c5_majorization.txt", file);
    Ok((checks, String::new()))
}

// ---------------------------------------------------------------------------
// Criterion 6: fundamental function laws
// ---------------------------------------------------------------------------

/// Seeded random fundamental functions with parameters from the universe.
pub fn random_fundfns(
    wo: &WellOrdering,
    gammas: &[OrdinalTerm],
    count: usize,
    depth: u32,
    rng: &mut ChaCha8Rng,
) -> Vec<FundFn> {
    fn gen_expr(rng: &mut ChaCha8Rng, gammas: &[OrdinalTerm], depth: u32) -> FundFnExpr {
        if depth == 0 {
            return FundFnExpr::Id;
        }
        match rng.gen_range(0..3u32) {
            0 => FundFnExpr::Id,
            1 => FundFnExpr::AddLeft(
                gammas[rng.gen_range(0..gammas.len())].clone(),
                Box::new(gen_expr(rng, gammas, depth - 1)),
            ),
            _ => FundFnExpr::ExpOmega(Box::new(gen_expr(rng, gammas, depth - 1))),
        }
    }
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count && attempts < count * 1000 {
        attempts += 1;
        if let Ok(f) = ff_make(wo, gen_expr(rng, gammas, depth)) {
            out.push(f);
        }
    }
    out
}

fn criterion6(config: &SuiteConfig, emitter: &mut Emitter) -> Result<(Checks, String), String> {
    let universe = enumerate_terms(&config.ff_wo, config.ff_g, config.ff_size, config.ff_e)
        .map_err(|e| e.to_string())?;
    let wo = &universe.ordering;
    let mut checks = Checks::default();

    // Arguments at or below the anchor, ascending.
    let mut args: Vec<&OrdinalTerm> = universe
        .terms
        .iter()
        .filter(|t| cmp(wo, t, &OrdinalTerm::Omega) != Ordering::Greater)
        .collect();
    args.sort_by(|a, b| cmp(wo, a, b));
    let arg_stars: Vec<OrdinalTerm> = args.iter().map(|t| star(wo, t)).collect();
    let triangle_pairs: Vec<(usize, usize)> = (0..args.len())
        .flat_map(|i| (i + 1..args.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| triangle_less(wo, args[i], args[j]))
        .collect();

    let mut rng = rng_for(config, 0x0006);
    let fns = random_fundfns(
        wo,
        &universe.terms,
        config.fundfn_count,
        config.fundfn_depth,
        &mut rng,
    );
    checks.check(fns.len() == config.fundfn_count, || {
        format!(
            "generated only {} of {} functions",
            fns.len(),
            config.fundfn_count
        )
    });

    for f in &fns {
        let values: Vec<OrdinalTerm> = args
            .iter()
            .map(|t| ff_apply(wo, f, t).expect("argument at or below the anchor"))
            .collect();
        // Strict monotonicity along the full ascending argument chain
        // settles the order-preservation law for every pair.
        for k in 1..values.len() {
            checks.check(
                cmp(wo, &values[k - 1], &values[k]) == Ordering::Less,
                || {
                    format!(
                        "monotonicity broke for {f} between {} and {}",
                        args[k - 1],
                        args[k]
                    )
                },
            );
        }
        for &(i, j) in &triangle_pairs {
            checks.check(triangle_less(wo, &values[i], &values[j]), || {
                format!(
                    "majorization preservation broke for {f} at ({}, {})",
                    args[i], args[j]
                )
            });
        }
        // The star of a value never exceeds the larger of the star at
        // zero and the argument star.
        let star_at_zero = star(wo, &f.at_zero(wo));
        for (k, value) in values.iter().enumerate() {
            let bound = if cmp(wo, &star_at_zero, &arg_stars[k]) == Ordering::Less {
                &arg_stars[k]
            } else {
                &star_at_zero
            };
            checks.check(
                cmp(wo, &star(wo, value), bound) != Ordering::Greater,
                || format!("star bound broke for {f} at {}", args[k]),
            );
        }
        checks.check(arith::majorization_at_collapse(wo, f), || {
            format!("collapse majorization broke for {f}")
        });
    }

    let mut file = String::new();
    let _ = writeln!(
        file,
        "functions: {}; arguments: {}; majorized pairs: {}",
        fns.len(),
        args.len(),
        triangle_pairs.len()
    );
    let _ = writeln!(file, "violations: {}", checks.violations.len());
    emitter.put("c6_fundfn.txt", file);
    Ok((
        checks,
        format!("{} functions over {} arguments", fns.len(), args.len()),
    ))
}

// ---------------------------------------------------------------------------
// Criterion 7: deduction chains
// ---------------------------------------------------------------------------

fn criterion7(config: &SuiteConfig, emitter: &mut Emitter) -> Result<(Checks, String), String> {
    let mut checks = Checks::default();
    let mut params = SearchParams::new(config.search_depth, config.search_omega);
    params.max_nodes = config.search_max_nodes;
    let tree = deduction::build_tree(&config.search_q, &params).map_err(|e| e.to_string())?;

    let replay = tree.replay_validate();
    checks.check(replay.is_clean(), || {
        format!("replay diverged: {}", replay.divergences.join("; "))
    });

    let mut surviving = 0usize;
    let mut window_checked = 0u64;
    tree.walk_truncated_branches(&mut |path, branch| {
        surviving += 1;
        let report = deduction::check_branch_properties(branch, &config.search_q);
        checks.check(report.is_clean(), || {
            format!(
                "branch {} failed: {}",
                deduction::format_path(path),
                report.failures.join("; ")
            )
        });
        window_checked = window_checked.max(branch.len() as u64 - 1);
    });
    checks.check(surviving > 0, || {
        "no surviving branch reached the depth bound".to_string()
    });
    checks.check(window_checked == config.search_depth as u64, || {
        format!("longest surviving branch reached only {window_checked}")
    });

    let model = {
        let leaves = tree.truncated_leaf_paths();
        match leaves.first() {
            Some(leaf) => {
                let branch = tree.branch_sequents(leaf).expect("leaf resolves");
                deduction::extract_model(&branch)
            }
            None => deduction::CodedModel::default(),
        }
    };

    let mut file = String::new();
    let _ = writeln!(file, "q: {}", config.search_q);
    let _ = writeln!(
        file,
        "depth: {}, omega bound: {}",
        config.search_depth, config.search_omega
    );
    let _ = writeln!(file, "nodes: {}", tree.node_count());
    let _ = writeln!(file, "surviving branches: {surviving}");
    let _ = writeln!(file, "tree digest: {:016x}", tree.digest());
    emitter.put("c7_search.txt", file);
    emitter.put(
        "c7_model.json",
        serde_json::to_vec_pretty(&model.emit_json()).expect("model serializes"),
    );

    Ok((
        checks,
        format!(
            "{} nodes, {} surviving branches",
            tree.node_count(),
            surviving
        ),
    ))
}

// ---------------------------------------------------------------------------
// Criterion 8: Kleene-Brouwer ordering
// ---------------------------------------------------------------------------

/// A random tree as a prefix-closed path set, child indices contiguous.
fn random_tree_paths(rng: &mut ChaCha8Rng, max_nodes: usize) -> Vec<Vec<u32>> {
    let target = rng.gen_range(1..=max_nodes);
    let mut parents: Vec<usize> = vec![0];
    let mut children: Vec<Vec<usize>> = vec![Vec::new()];
    for node in 1..target {
        let parent = rng.gen_range(0..node);
        parents.push(parent);
        children.push(Vec::new());
        children[parent].push(node);
    }
    let mut paths = vec![Vec::new(); target];
    for node in 1..target {
        let parent = parents[node];
        let index = children[parent]
            .iter()
            .position(|&c| c == node)
            .expect("child recorded") as u32;
        let mut path = paths[parent].clone();
        path.push(index);
        paths[node] = path;
    }
    paths
}

/// Independent postorder of a path set (children in index order), written
/// directly from the traversal definition.
fn postorder_of_paths(paths: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let mut out = Vec::with_capacity(paths.len());
    fn go(paths: &[Vec<u32>], prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        for k in 0.. {
            prefix.push(k);
            let exists = paths.iter().any(|p| p == prefix);
            if !exists {
                prefix.pop();
                break;
            }
            go(paths, prefix, out);
            prefix.pop();
        }
        out.push(prefix.clone());
    }
    go(paths, &mut Vec::new(), &mut out);
    out
}

fn criterion8(config: &SuiteConfig, emitter: &mut Emitter) -> Result<(Checks, String), String> {
    let mut checks = Checks::default();
    let mut rng = rng_for(config, 0x0008);

    for _ in 0..config.kb_trees {
        let paths = random_tree_paths(&mut rng, config.kb_node_cap);
        let mut sorted = paths.clone();
        sorted.sort_by(|a, b| kb_path_compare(a, b));
        for pair in sorted.windows(2) {
            checks.check(
                kb_path_compare(&pair[0], &pair[1]) == Ordering::Less,
                || "listing is not strictly ascending".to_string(),
            );
        }
        checks.check(sorted.last().map(|p| p.is_empty()) == Some(true), || {
            "root is not the maximum".to_string()
        });
        checks.check(sorted == postorder_of_paths(&paths), || {
            "listing differs from the postorder traversal".to_string()
        });
        // Trichotomy and antisymmetry over all pairs of this tree.
        for a in &paths {
            for b in &paths {
                let c = kb_path_compare(a, b);
                checks.check(
                    (c == Ordering::Equal) == (a == b) && kb_path_compare(b, a) == c.reverse(),
                    || "path comparison is not a strict total order".to_string(),
                );
            }
        }
    }

    // The search tree from the deduction run, spot-checked at scale.
    let mut params = SearchParams::new(config.search_depth, config.search_omega);
    params.max_nodes = config.search_max_nodes;
    let tree = deduction::build_tree(&config.search_q, &params).map_err(|e| e.to_string())?;
    let listing = tree.kb_listing();
    checks.check(listing.len() == tree.node_count(), || {
        "listing is not a permutation of the nodes".to_string()
    });
    checks.check(listing.last().map(|p| p.is_empty()) == Some(true), || {
        "search tree root is not the KB maximum".to_string()
    });
    for pair in listing.windows(2) {
        checks.check(
            kb_path_compare(&pair[0], &pair[1]) == Ordering::Less,
            || "search tree listing is not strictly ascending".to_string(),
        );
    }
    for _ in 0..config.kb_pair_samples {
        let a = &listing[rng.gen_range(0..listing.len())];
        let b = &listing[rng.gen_range(0..listing.len())];
        let c = kb_path_compare(a, b);
        checks.check(
            (c == Ordering::Equal) == (a == b) && kb_path_compare(b, a) == c.reverse(),
            || "sampled pair comparison inconsistent".to_string(),
        );
    }

    let mut file = String::new();
    let _ = writeln!(file, "random trees: {}", config.kb_trees);
    let _ = writeln!(file, "search tree nodes: {}", listing.len());
    let _ = writeln!(file, "violations: {}", checks.violations.len());
    emitter.put("c8_kb.txt", file);
    Ok((checks, String::new()))
}

// ---------------------------------------------------------------------------
// Criterion 9: bound calculus
// ---------------------------------------------------------------------------

fn criterion9(config: &SuiteConfig, emitter: &mut Emitter) -> Result<(Checks, String), String> {
    let wo = wo_finite(config.bound_u);
    let mut checks = Checks::default();
    let mut file = String::new();

    // The axiom-cut overhead stays majorized below every embedding bound.
    let overhead = add(
        &wo,
        &times_nat(&OrdinalTerm::Omega, 2).expect("principal"),
        &omega_pow(&OrdinalTerm::one()),
    );
    for u in 0..config.bound_u {
        for k in 0..=config.bound_k {
            let e = bounds::embed_bound(&wo, u, k).map_err(|e| e.to_string())?;
            checks.check(triangle_less(&wo, &overhead, &e), || {
                format!("overhead not majorized below the embedding bound at (u={u}, k={k})")
            });
        }
    }

    // Finite towers over one node's bound stay majorized below the next.
    for u in 0..config.bound_u {
        for v in 0..config.bound_u {
            if !wo.lt(u, v) {
                continue;
            }
            for n in 0..=config.bound_nm {
                for m in 0..=config.bound_nm as u64 {
                    let base = add(&wo, &OrdinalTerm::E(u), &OrdinalTerm::numeral(m));
                    let tower = omega_tower(n, &base);
                    checks.check(triangle_less(&wo, &tower, &OrdinalTerm::E(v)), || {
                        format!("tower not majorized at (u={u}, v={v}, n={n}, m={m})")
                    });
                }
            }
        }
    }

    // Final bounds are well-formed terms.
    for u in 0..config.bound_u {
        for n in 0..=config.bound_nm {
            for m in 0..=config.bound_nm as u64 {
                let t = bounds::final_bound(&wo, u, n, m).map_err(|e| e.to_string())?;
                checks.check(term::validate(&wo, &t).is_empty(), || {
                    format!("final bound invalid at (u={u}, n={n}, m={m})")
                });
            }
        }
    }

    // Monotonicity of the bound maps over the small universe.
    let universe = small_universe(config)?;
    let swo = &universe.ordering;
    for a in &universe.terms {
        for b in &universe.terms {
            if triangle_less(swo, a, b) {
                checks.check(
                    triangle_less(
                        swo,
                        &bounds::cut_reduce_bound(a),
                        &bounds::cut_reduce_bound(b),
                    ),
                    || format!("cut-reduction bound not monotone at ({a}, {b})"),
                );
                checks.check(
                    cmp(swo, &bounds::collapse_bound(a), &bounds::collapse_bound(b))
                        == Ordering::Less,
                    || format!("collapse bound not monotone at ({a}, {b})"),
                );
            }
        }
    }

    // Step fixtures through the documented file format.
    let fixture_wo = wo_nat();
    let valid: Vec<StepFile> = serde_json::from_str(STEPS_VALID_JSON).map_err(|e| e.to_string())?;
    let broken: Vec<StepFile> =
        serde_json::from_str(STEPS_BROKEN_JSON).map_err(|e| e.to_string())?;
    let mut seen = std::collections::BTreeSet::new();
    for (k, step) in valid.iter().enumerate() {
        seen.insert(step.rule.clone());
        let (q, inst) = step.resolve(&fixture_wo).map_err(|e| e.to_string())?;
        let report = check_step(&fixture_wo, &q, &inst);
        checks.check(report.accepted(), || {
            format!(
                "valid step {k} ({}) rejected: {}",
                step.rule,
                report.failures.join("; ")
            )
        });
        let _ = writeln!(file, "step {} ({}): accepted", k, step.rule);
    }
    checks.check(seen.len() == bounds::RuleKind::ALL.len(), || {
        format!(
            "fixture covers only {} of {} rule tags",
            seen.len(),
            bounds::RuleKind::ALL.len()
        )
    });
    for (k, step) in broken.iter().enumerate() {
        let (q, inst) = step.resolve(&fixture_wo).map_err(|e| e.to_string())?;
        let report = check_step(&fixture_wo, &q, &inst);
        checks.check(!report.accepted(), || {
            format!("broken step {k} ({}) was accepted", step.rule)
        });
        let _ = writeln!(file, "mutant {} ({}): rejected", k, step.rule);
    }

    let _ = writeln!(file, "violations: {}", checks.violations.len());
    emitter.put("c9_bounds.txt", file);
    Ok((
        checks,
        format!("{} valid steps, {} mutants", valid.len(), broken.len()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cnf_oracle_basics() {
        let zero = CnfOrdinal::zero();
        let one = CnfOrdinal(vec![zero.clone()]);
        let omega = CnfOrdinal(vec![one.clone()]);
        let two = CnfOrdinal(vec![zero.clone(), zero.clone()]);
        assert_eq!(cnf_compare(&zero, &one), Ordering::Less);
        assert_eq!(cnf_compare(&one, &two), Ordering::Less);
        assert_eq!(cnf_compare(&two, &omega), Ordering::Less);
        assert_eq!(cnf_compare(&omega, &omega), Ordering::Equal);
        let wo = wo_nat();
        assert_eq!(cnf_to_term(&wo, &two), OrdinalTerm::numeral(2));
        assert_eq!(cnf_to_term(&wo, &omega), term::parse("w(1)", &wo).unwrap());
    }

    #[test]
    fn cnf_enumeration_counts_match_sizes() {
        for c in enumerate_cnf(6) {
            assert!(c.size() <= 6);
            let t = cnf_to_term(&wo_nat(), &c);
            assert_eq!(t.size(), c.size());
        }
    }

    #[test]
    fn random_trees_are_prefix_closed() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let paths = random_tree_paths(&mut rng, 40);
            for p in &paths {
                for k in 0..p.len() {
                    assert!(paths.contains(&p[..k].to_vec()));
                }
            }
            assert_eq!(postorder_of_paths(&paths).len(), paths.len());
        }
    }

    #[test]
    fn quick_suite_passes() {
        let config = SuiteConfig::quick(&wo_finite(2), 2, 4, DEFAULT_SEED);
        let outcome = run_all(&config, None).unwrap();
        for r in &outcome.results {
            assert!(r.passed, "{}", r.table_line());
        }
        // Deterministic reruns.
        let second = run_all(&config, None).unwrap();
        assert!(emitted_identical(&outcome, &second));
    }
}
