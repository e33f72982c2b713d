//! The deduction-chain proof-search tree: axiom enumeration, the chain
//! step rules, truncated tree construction, replay validation, the
//! Kleene-Brouwer ordering, and omega-model extraction from surviving
//! branches.
//!
//! A chain starts from the negated membership fact for 0 and the negated
//! comprehension axiom, and at every step appends the next negated
//! membership fact and negated theory axiom while decomposing the first
//! non-literal formula. The tree of all chains is truncated at a depth
//! bound, and the one infinitary rule (number-sort universals) at a
//! branching bound.
//!
//! Construction is deterministic: identical inputs produce bit-identical
//! trees, listings and emitted files.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde_json::json;
use thiserror::Error;

use crate::logic::{
    self, codes, is_arithmetic, is_axiomatic, negate, numeral, subst_num, subst_num_term,
    subst_setvar, Formula, FormulaWithHole, LogicError, NumTerm, Rel, Sequent,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DeductionError {
    #[error("node cap exceeded: {nodes} nodes built, deepest position {deepest} (partial tree discarded)")]
    ResourceCap { nodes: usize, deepest: u32 },
    #[error("chain rules do not apply to an axiomatic sequent")]
    AxiomaticSequent,
    #[error("unknown node path {path:?}")]
    UnknownPath { path: Vec<u32> },
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("cannot parse set spec {spec:?}: expected {{1,3,5}} or evens<=N / odds<=N")]
    BadSetSpec { spec: String },
}

/// A decidable subset of the naturals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QOracle {
    Finite(BTreeSet<u64>),
    /// Membership given by a finite prefix and then a repeating period.
    EventuallyPeriodic {
        prefix: Vec<bool>,
        period: Vec<bool>,
    },
}

impl QOracle {
    pub fn contains(&self, n: u64) -> bool {
        match self {
            QOracle::Finite(set) => set.contains(&n),
            QOracle::EventuallyPeriodic { prefix, period } => {
                if (n as usize) < prefix.len() {
                    prefix[n as usize]
                } else {
                    period[(n as usize - prefix.len()) % period.len()]
                }
            }
        }
    }

    /// Parse a set spec: `{1,3,5}`, `evens<=20`, or `odds<=19`.
    pub fn parse_spec(spec: &str) -> Result<QOracle, DeductionError> {
        let spec = spec.trim();
        let bad = || DeductionError::BadSetSpec {
            spec: spec.to_string(),
        };
        if let Some(inner) = spec.strip_prefix('{').and_then(|s| s.strip_suffix('}')) {
            let mut set = BTreeSet::new();
            for item in inner.split(',') {
                let item = item.trim();
                if item.is_empty() {
                    continue;
                }
                set.insert(item.parse::<u64>().map_err(|_| bad())?);
            }
            return Ok(QOracle::Finite(set));
        }
        for (name, parity) in [("evens<=", 0u64), ("odds<=", 1u64)] {
            if let Some(rest) = spec.strip_prefix(name) {
                let bound: u64 = rest.trim().parse().map_err(|_| bad())?;
                return Ok(QOracle::Finite(
                    (0..=bound).filter(|n| n % 2 == parity).collect(),
                ));
            }
        }
        Err(bad())
    }
}

impl fmt::Display for QOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QOracle::Finite(set) => {
                let items: Vec<String> = set.iter().map(|n| n.to_string()).collect();
                write!(f, "{{{}}}", items.join(","))
            }
            QOracle::EventuallyPeriodic { prefix, period } => {
                write!(f, "periodic:{prefix:?}:{period:?}")
            }
        }
    }
}

/// The membership fact for `n`: `n in U_0` when n is in the set, its
/// negation otherwise.
pub fn q_literal(q: &QOracle, n: u64) -> Formula {
    if q.contains(n) {
        Formula::In(numeral(n), 0)
    } else {
        Formula::NotIn(numeral(n), 0)
    }
}

/// The literal the chain rules insert: the negation of the membership
/// fact. Collecting the non-membership literals of a surviving branch
/// therefore recovers exactly the set in row 0.
pub fn neg_q_literal(q: &QOracle, n: u64) -> Formula {
    negate(&q_literal(q, n))
}

// ---------------------------------------------------------------------------
// Axiom enumeration
// ---------------------------------------------------------------------------

/// Configuration of the theory axioms fed into the chains.
///
/// Index 0 is the comprehension axiom; the default is a finite conjunction
/// of set-comprehension instances (extracted models are models of this
/// supplied list, not of full comprehension). Indices above 0 decode into
/// transfinite-induction instances through the formula-code pairing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomConfig {
    pub aca: Formula,
}

impl Default for AxiomConfig {
    fn default() -> Self {
        AxiomConfig {
            aca: default_aca_axiom(),
        }
    }
}

/// `ALL X. (exists Y identical to X) and (exists Y complementing X)`,
/// a two-instance comprehension conjunction in negation normal form.
pub fn default_aca_axiom() -> Formula {
    let x = 0u32; // outer set variable
    let identity = FormulaWithHole::new(0, Formula::In(NumTerm::Var(0), x));
    let complement = FormulaWithHole::new(0, Formula::NotIn(NumTerm::Var(0), x));
    let body = Formula::and(
        comprehension_instance(&identity, x),
        comprehension_instance(&complement, x),
    );
    logic::canonicalize(&Formula::ForallSet(x, Box::new(body)))
}

/// `EX Y. all n. (n in Y <-> matrix(n))` in negation normal form, with the
/// set variable of the matrix left free (index `param`).
fn comprehension_instance(matrix: &FormulaWithHole, param: u32) -> Formula {
    let y = param + 1;
    let n = matrix.var + 1;
    let nv = NumTerm::Var(n);
    let holds = matrix.apply(&nv);
    let member = Formula::In(nv.clone(), y);
    let both = Formula::and(
        Formula::or(negate(&member), holds.clone()),
        Formula::or(negate(&holds), member),
    );
    Formula::ExistsSet(y, Box::new(Formula::ForallNum(n, Box::new(both))))
}

/// The i-th theory axiom: the configured comprehension axiom at 0, and a
/// transfinite-induction instance for every i >= 1, obtained by unpairing
/// i-1 into codes for the relation and the induction predicate. Codes that
/// do not decode (or decode to a non-arithmetic relation) fall back to a
/// fixed instance, so the enumeration is total.
pub fn axiom_enumerator(config: &AxiomConfig, i: u64) -> Formula {
    if i == 0 {
        return config.aca.clone();
    }
    let (p, fq) = codes::unpair(i - 1);
    let prec = codes::decode(p).filter(is_arithmetic);
    let pred = codes::decode(fq);
    let (prec, pred) = match (prec, pred) {
        (Some(a), Some(b)) => (a, b),
        _ => (
            Formula::PosLit(Rel::Lt, NumTerm::Var(0), NumTerm::Var(1)),
            Formula::PosLit(Rel::Eq, NumTerm::Var(0), NumTerm::Var(0)),
        ),
    };
    bar_induction_instance(&prec, &pred)
}

/// The universal closure of `WF(prec) -> TI(prec, pred)` in negation
/// normal form. The relation reads its left argument from x_0 and its
/// right from x_1; the predicate reads its argument from x_0.
pub fn bar_induction_instance(prec: &Formula, pred: &Formula) -> Formula {
    let mut taken: BTreeSet<u32> = prec.free_num_vars();
    taken.extend(pred.free_num_vars());
    let base = taken.iter().max().map_or(0, |m| m + 1).max(2);
    let vx = base;
    let vy = base + 1;

    let rel = |left: &NumTerm, right: &NumTerm| -> Formula {
        // Substitute the right slot through a variable outside both terms
        // so the two substitutions cannot interfere.
        let tmp = base + 2;
        let step = subst_num_term(prec, 1, &NumTerm::Var(tmp));
        let step = subst_num_term(&step, 0, left);
        subst_num_term(&step, tmp, right)
    };

    let progressive = |holds: &dyn Fn(&NumTerm) -> Formula| -> Formula {
        // all x. (ex y. (y < x & not holds(y)) | holds(x))
        let xv = NumTerm::Var(vx);
        let yv = NumTerm::Var(vy);
        let bad_below = Formula::ExistsNum(
            vy,
            Box::new(Formula::and(rel(&yv, &xv), negate(&holds(&yv)))),
        );
        Formula::ForallNum(vx, Box::new(Formula::or(bad_below, holds(&xv))))
    };
    let transfinite_induction = |holds: &dyn Fn(&NumTerm) -> Formula| -> Formula {
        let all = Formula::ForallNum(vx, Box::new(holds(&NumTerm::Var(vx))));
        Formula::or(negate(&progressive(holds)), all)
    };

    // Well-foundedness: every set is transfinitely inductive along prec.
    let set_slot = prec.free_set_vars().iter().max().map_or(0, |m| m + 1);
    let member = |t: &NumTerm| Formula::In(t.clone(), set_slot);
    let well_founded = Formula::ForallSet(set_slot, Box::new(transfinite_induction(&member)));

    let apply_pred = |t: &NumTerm| subst_num_term(pred, 0, t);
    let instance = logic::implies(&well_founded, transfinite_induction(&apply_pred));

    // Universal closure over the remaining free variables, sets outermost.
    let mut closed = instance;
    for v in closed.free_num_vars().into_iter().rev() {
        closed = Formula::ForallNum(v, Box::new(closed));
    }
    for s in closed.free_set_vars().into_iter().rev() {
        closed = Formula::ForallSet(s, Box::new(closed));
    }
    logic::canonicalize(&closed)
}

// ---------------------------------------------------------------------------
// Chain step rules
// ---------------------------------------------------------------------------

/// Which rule produced a node's children.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleTag {
    /// No redex: append the next negated facts (rule 3).
    Stall,
    OrSplit,
    AndSplit,
    ExistsNumWitness,
    ForallNumBranch,
    ExistsSetWitness,
    ForallSetFresh,
}

impl RuleTag {
    pub fn name(self) -> &'static str {
        match self {
            RuleTag::Stall => "stall",
            RuleTag::OrSplit => "or",
            RuleTag::AndSplit => "and",
            RuleTag::ExistsNumWitness => "exists-num",
            RuleTag::ForallNumBranch => "forall-num",
            RuleTag::ExistsSetWitness => "exists-set",
            RuleTag::ForallSetFresh => "forall-set",
        }
    }
}

/// Occurrence history of a chain: every formula that has appeared in any
/// sequent so far (the witness rules pick the first instance not yet
/// seen).
#[derive(Debug, Clone, Default)]
pub struct FormulaHistory {
    set: HashSet<Formula>,
}

impl FormulaHistory {
    pub fn from_chain<'a>(chain: impl IntoIterator<Item = &'a Sequent>) -> FormulaHistory {
        let mut h = FormulaHistory::default();
        for seq in chain {
            h.absorb(seq);
        }
        h
    }

    pub fn absorb(&mut self, seq: &Sequent) {
        for f in seq.iter() {
            self.set.insert(f.clone());
        }
    }

    pub fn contains(&self, f: &Formula) -> bool {
        self.set.contains(f)
    }
}

/// One application of the chain step rules.
#[derive(Debug, Clone)]
pub struct ChainStep {
    pub rule: RuleTag,
    /// Children in canonical order, each with the choice that produced it
    /// (the conjunct index, the witness, or the branching instance).
    pub children: Vec<(u64, Sequent)>,
}

/// Derive the children of a non-axiomatic sequent at chain position `i`.
/// `history` must cover the chain up to and including `gamma`.
pub fn chain_children(
    q: &QOracle,
    axioms: &AxiomConfig,
    gamma: &Sequent,
    i: u64,
    omega_bound: u64,
    history: &FormulaHistory,
) -> Result<ChainStep, DeductionError> {
    if is_axiomatic(gamma)? {
        return Err(DeductionError::AxiomaticSequent);
    }
    let neg_q = neg_q_literal(q, i + 1);
    let neg_a = negate(&axiom_enumerator(axioms, i + 1));
    let appends = [neg_q, neg_a];

    let child = |parts: &[Formula], at: usize, keep_redex: Option<&Formula>| -> Sequent {
        let mut seq = Sequent::new(
            gamma
                .formulas()
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != at)
                .map(|(_, f)| f.clone()),
        );
        // Parts land at the redex position, preserving the prefix.
        let mut cursor = at.min(seq.len());
        for part in parts {
            let before = seq.len();
            seq.insert_at(cursor, part.clone());
            if seq.len() > before {
                cursor += 1;
            }
        }
        for f in &appends {
            seq.push(f.clone());
        }
        if let Some(e) = keep_redex {
            seq.push(e.clone());
        }
        seq
    };

    let step = match logic::find_redex(gamma) {
        None => ChainStep {
            rule: RuleTag::Stall,
            children: vec![(0, {
                let mut seq = gamma.clone();
                for f in &appends {
                    seq.push(f.clone());
                }
                seq
            })],
        },
        Some(redex) => {
            let at = redex.position;
            match redex.redex.clone() {
                Formula::Or(a, b) => ChainStep {
                    rule: RuleTag::OrSplit,
                    children: vec![(0, child(&[*a, *b], at, None))],
                },
                Formula::And(a, b) => ChainStep {
                    rule: RuleTag::AndSplit,
                    children: vec![
                        (0, child(&[*a.clone()], at, None)),
                        (1, child(&[*b.clone()], at, None)),
                    ],
                },
                e @ Formula::ExistsNum(..) => {
                    let Formula::ExistsNum(x, f) = &e else {
                        unreachable!()
                    };
                    let m = first_fresh_instance(history, |m| subst_num(f, *x, m));
                    let inst = subst_num(f, *x, m);
                    ChainStep {
                        rule: RuleTag::ExistsNumWitness,
                        children: vec![(m, child(&[inst], at, Some(&e)))],
                    }
                }
                Formula::ForallNum(x, f) => ChainStep {
                    rule: RuleTag::ForallNumBranch,
                    children: (0..=omega_bound)
                        .map(|m| (m, child(&[subst_num(&f, x, m)], at, None)))
                        .collect(),
                },
                e @ Formula::ExistsSet(..) => {
                    let Formula::ExistsSet(x, f) = &e else {
                        unreachable!()
                    };
                    let m = first_fresh_instance(history, |m| subst_setvar(f, *x, m as u32));
                    let inst = subst_setvar(f, *x, m as u32);
                    ChainStep {
                        rule: RuleTag::ExistsSetWitness,
                        children: vec![(m, child(&[inst], at, Some(&e)))],
                    }
                }
                Formula::ForallSet(x, f) => {
                    let used: BTreeSet<u32> =
                        gamma.iter().flat_map(|g| g.all_set_indices()).collect();
                    let m = (0u32..).find(|m| !used.contains(m)).unwrap();
                    ChainStep {
                        rule: RuleTag::ForallSetFresh,
                        children: vec![(m as u64, child(&[subst_setvar(&f, x, m)], at, None))],
                    }
                }
                other => unreachable!("redex cannot be a literal: {other}"),
            }
        }
    };
    Ok(step)
}

/// First `m` whose instance does not yet occur in the history. When the
/// instance does not depend on `m` at all, the search would never end, so
/// the witness defaults to 0.
fn first_fresh_instance(history: &FormulaHistory, instance: impl Fn(u64) -> Formula) -> u64 {
    if instance(0) == instance(1) {
        return 0;
    }
    (0u64..).find(|m| !history.contains(&instance(*m))).unwrap()
}

// ---------------------------------------------------------------------------
// The tree
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeStatus {
    AxiomaticLeaf,
    TruncatedLeaf,
    Internal,
}

impl NodeStatus {
    pub fn name(self) -> &'static str {
        match self {
            NodeStatus::AxiomaticLeaf => "axiomatic-leaf",
            NodeStatus::TruncatedLeaf => "truncated-leaf",
            NodeStatus::Internal => "internal",
        }
    }
}

/// Build bounds and configuration.
#[derive(Debug, Clone)]
pub struct SearchParams {
    /// Maximum chain position; nodes there become truncated leaves.
    pub depth: u32,
    /// The number-sort universal rule branches over 0..=omega_bound.
    pub omega_bound: u64,
    /// Hard cap on built nodes.
    pub max_nodes: usize,
    pub axioms: AxiomConfig,
}

pub const DEFAULT_MAX_NODES: usize = 1_500_000;

impl SearchParams {
    pub fn new(depth: u32, omega_bound: u64) -> SearchParams {
        SearchParams {
            depth,
            omega_bound,
            max_nodes: DEFAULT_MAX_NODES,
            axioms: AxiomConfig::default(),
        }
    }
}

/// Sequent change from parent to child, in interned formula ids. Applying
/// the recorded operations to the parent sequent reproduces the child
/// exactly (deduplication already resolved).
#[derive(Debug, Clone, Default)]
struct Delta {
    removed: Option<(u32, u32)>,
    inserted: Vec<(u32, u32)>,
}

#[derive(Debug)]
struct Node {
    parent: Option<u32>,
    children: Vec<u32>,
    position: u32,
    status: NodeStatus,
    rule: Option<RuleTag>,
    choice: u64,
    delta: Delta,
}

/// Interned formula store with per-formula literal facts.
#[derive(Debug, Default)]
struct Pool {
    formulas: Vec<Formula>,
    ids: HashMap<Formula, u32>,
    infos: Vec<Info>,
}

#[derive(Debug, Clone)]
struct Info {
    is_literal: bool,
    true_literal: bool,
    /// (positive?, set index, term value) for closed membership literals.
    membership: Option<(bool, u32, u64)>,
    set_indices: Vec<u32>,
}

impl Pool {
    fn intern(&mut self, f: Formula) -> u32 {
        if let Some(&id) = self.ids.get(&f) {
            return id;
        }
        let id = self.formulas.len() as u32;
        let info = Info {
            is_literal: f.is_literal(),
            true_literal: logic::literal_true(&f).unwrap_or(false),
            membership: match &f {
                Formula::In(t, u) => logic::eval_term(t).ok().map(|v| (true, *u, v)),
                Formula::NotIn(t, u) => logic::eval_term(t).ok().map(|v| (false, *u, v)),
                _ => None,
            },
            set_indices: f.all_set_indices().into_iter().collect(),
        };
        self.ids.insert(f.clone(), id);
        self.formulas.push(f);
        self.infos.push(info);
        id
    }

    fn lookup(&self, f: &Formula) -> Option<u32> {
        self.ids.get(f).copied()
    }

    fn formula(&self, id: u32) -> &Formula {
        &self.formulas[id as usize]
    }

    fn info(&self, id: u32) -> &Info {
        &self.infos[id as usize]
    }
}

/// The truncated deduction-chain tree.
#[derive(Debug)]
pub struct DTree {
    q: QOracle,
    params: SearchParams,
    pool: Pool,
    nodes: Vec<Node>,
}

struct Builder<'a> {
    q: &'a QOracle,
    params: &'a SearchParams,
    pool: Pool,
    nodes: Vec<Node>,
    seq: Vec<u32>,
    hist: HashMap<u32, u32>,
    in_vals: HashMap<(u32, u64), u32>,
    notin_vals: HashMap<(u32, u64), u32>,
    neg_axiom_cache: HashMap<u64, u32>,
    deepest: u32,
}

impl<'a> Builder<'a> {
    /// Apply a delta to the live state; reports whether the resulting
    /// sequent is axiomatic.
    fn apply(&mut self, delta: &Delta) -> bool {
        if let Some((pos, _)) = delta.removed {
            self.seq.remove(pos as usize);
        }
        let mut axiomatic = false;
        for &(pos, id) in &delta.inserted {
            self.seq.insert(pos as usize, id);
            *self.hist.entry(id).or_insert(0) += 1;
            let info = self.pool.info(id).clone();
            if info.true_literal {
                axiomatic = true;
            }
            if let Some((positive, set, value)) = info.membership {
                let (own, other) = if positive {
                    (&mut self.in_vals, &self.notin_vals)
                } else {
                    (&mut self.notin_vals, &self.in_vals)
                };
                if other.get(&(set, value)).copied().unwrap_or(0) > 0 {
                    axiomatic = true;
                }
                *own.entry((set, value)).or_insert(0) += 1;
            }
        }
        axiomatic
    }

    fn undo(&mut self, delta: &Delta) {
        for &(pos, id) in delta.inserted.iter().rev() {
            self.seq.remove(pos as usize);
            match self.hist.get_mut(&id) {
                Some(c) if *c > 1 => *c -= 1,
                _ => {
                    self.hist.remove(&id);
                }
            }
            if let Some((positive, set, value)) = self.pool.info(id).membership {
                let own = if positive {
                    &mut self.in_vals
                } else {
                    &mut self.notin_vals
                };
                match own.get_mut(&(set, value)) {
                    Some(c) if *c > 1 => *c -= 1,
                    _ => {
                        own.remove(&(set, value));
                    }
                }
            }
        }
        if let Some((pos, id)) = delta.removed {
            self.seq.insert(pos as usize, id);
        }
    }

    fn neg_axiom_id(&mut self, i: u64) -> u32 {
        if let Some(&id) = self.neg_axiom_cache.get(&i) {
            return id;
        }
        let id = self
            .pool
            .intern(negate(&axiom_enumerator(&self.params.axioms, i)));
        self.neg_axiom_cache.insert(i, id);
        id
    }

    /// Build one child delta: remove the redex (if any), insert parts at
    /// its position, append the step formulas and possibly the kept redex,
    /// deduplicating against the live sequent.
    fn make_delta(
        &mut self,
        removed_at: Option<usize>,
        parts: Vec<Formula>,
        i: u64,
        keep: Option<u32>,
    ) -> Delta {
        let mut scratch = self.seq.clone();
        let mut delta = Delta::default();
        let mut cursor = match removed_at {
            Some(p) => {
                delta.removed = Some((p as u32, scratch.remove(p)));
                p
            }
            None => scratch.len(),
        };
        let insert = |scratch: &mut Vec<u32>, delta: &mut Delta, pos: usize, id: u32| {
            if !scratch.contains(&id) {
                scratch.insert(pos, id);
                delta.inserted.push((pos as u32, id));
                true
            } else {
                false
            }
        };
        for part in parts {
            let id = self.pool.intern(part);
            let pos = cursor.min(scratch.len());
            if insert(&mut scratch, &mut delta, pos, id) {
                cursor += 1;
            }
        }
        let nq = self.pool.intern(neg_q_literal(self.q, i + 1));
        let len = scratch.len();
        insert(&mut scratch, &mut delta, len, nq);
        let na = self.neg_axiom_id(i + 1);
        let len = scratch.len();
        insert(&mut scratch, &mut delta, len, na);
        if let Some(e) = keep {
            let len = scratch.len();
            insert(&mut scratch, &mut delta, len, e);
        }
        delta
    }

    /// Children of the live sequent at position `i`, as (rule, choice,
    /// delta) triples.
    fn compute_children(&mut self, i: u64) -> (RuleTag, Vec<(u64, Delta)>) {
        let redex = self
            .seq
            .iter()
            .position(|&id| !self.pool.info(id).is_literal);
        let Some(at) = redex else {
            return (
                RuleTag::Stall,
                vec![(0, self.make_delta(None, Vec::new(), i, None))],
            );
        };
        let e_id = self.seq[at];
        let e = self.pool.formula(e_id).clone();
        match e {
            Formula::Or(a, b) => (
                RuleTag::OrSplit,
                vec![(0, self.make_delta(Some(at), vec![*a, *b], i, None))],
            ),
            Formula::And(a, b) => (
                RuleTag::AndSplit,
                vec![
                    (0, self.make_delta(Some(at), vec![*a], i, None)),
                    (1, self.make_delta(Some(at), vec![*b], i, None)),
                ],
            ),
            Formula::ExistsNum(x, f) => {
                let m = self.first_fresh(|m| subst_num(&f, x, m));
                let inst = subst_num(&f, x, m);
                (
                    RuleTag::ExistsNumWitness,
                    vec![(m, self.make_delta(Some(at), vec![inst], i, Some(e_id)))],
                )
            }
            Formula::ForallNum(x, f) => (
                RuleTag::ForallNumBranch,
                (0..=self.params.omega_bound)
                    .map(|m| {
                        let inst = subst_num(&f, x, m);
                        (m, self.make_delta(Some(at), vec![inst], i, None))
                    })
                    .collect(),
            ),
            Formula::ExistsSet(x, f) => {
                let m = self.first_fresh(|m| subst_setvar(&f, x, m as u32));
                let inst = subst_setvar(&f, x, m as u32);
                (
                    RuleTag::ExistsSetWitness,
                    vec![(m, self.make_delta(Some(at), vec![inst], i, Some(e_id)))],
                )
            }
            Formula::ForallSet(x, f) => {
                let used: BTreeSet<u32> = self
                    .seq
                    .iter()
                    .flat_map(|&id| self.pool.info(id).set_indices.iter().copied())
                    .collect();
                let m = (0u32..).find(|m| !used.contains(m)).unwrap();
                let inst = subst_setvar(&f, x, m);
                (
                    RuleTag::ForallSetFresh,
                    vec![(m as u64, self.make_delta(Some(at), vec![inst], i, None))],
                )
            }
            other => unreachable!("redex cannot be a literal: {other}"),
        }
    }

    fn first_fresh(&mut self, instance: impl Fn(u64) -> Formula) -> u64 {
        if instance(0) == instance(1) {
            return 0;
        }
        (0u64..)
            .find(|m| {
                let f = instance(*m);
                match self.pool.lookup(&f) {
                    Some(id) => self.hist.get(&id).copied().unwrap_or(0) == 0,
                    None => true,
                }
            })
            .unwrap()
    }

    fn grow(&mut self, node: u32) -> Result<(), DeductionError> {
        if self.nodes[node as usize].status != NodeStatus::Internal {
            return Ok(());
        }
        let position = self.nodes[node as usize].position;
        let (rule, specs) = self.compute_children(position as u64);
        self.nodes[node as usize].rule = Some(rule);
        for (choice, delta) in specs {
            if self.nodes.len() >= self.params.max_nodes {
                return Err(DeductionError::ResourceCap {
                    nodes: self.nodes.len(),
                    deepest: self.deepest,
                });
            }
            let axiomatic = self.apply(&delta);
            let child_pos = position + 1;
            self.deepest = self.deepest.max(child_pos);
            let status = if axiomatic {
                NodeStatus::AxiomaticLeaf
            } else if child_pos >= self.params.depth {
                NodeStatus::TruncatedLeaf
            } else {
                NodeStatus::Internal
            };
            let child = self.nodes.len() as u32;
            self.nodes.push(Node {
                parent: Some(node),
                children: Vec::new(),
                position: child_pos,
                status,
                rule: None,
                choice,
                delta: delta.clone(),
            });
            self.nodes[node as usize].children.push(child);
            self.grow(child)?;
            self.undo(&delta);
        }
        Ok(())
    }
}

/// Build the truncated deduction-chain tree for `q`.
pub fn build_tree(q: &QOracle, params: &SearchParams) -> Result<DTree, DeductionError> {
    let mut b = Builder {
        q,
        params,
        pool: Pool::default(),
        nodes: Vec::new(),
        seq: Vec::new(),
        hist: HashMap::new(),
        in_vals: HashMap::new(),
        notin_vals: HashMap::new(),
        neg_axiom_cache: HashMap::new(),
        deepest: 0,
    };
    // Root sequent: the negated membership fact for 0 and the negated
    // comprehension axiom.
    let f0 = neg_q_literal(q, 0);
    let a0 = negate(&axiom_enumerator(&params.axioms, 0));
    let id0 = b.pool.intern(f0);
    let id1 = b.pool.intern(a0);
    let mut root_delta = Delta::default();
    root_delta.inserted.push((0, id0));
    if id1 != id0 {
        root_delta.inserted.push((1, id1));
    }
    let axiomatic = b.apply(&root_delta);
    let status = if axiomatic {
        NodeStatus::AxiomaticLeaf
    } else if params.depth == 0 {
        NodeStatus::TruncatedLeaf
    } else {
        NodeStatus::Internal
    };
    b.nodes.push(Node {
        parent: None,
        children: Vec::new(),
        position: 0,
        status,
        rule: None,
        choice: 0,
        delta: root_delta,
    });
    b.grow(0)?;
    Ok(DTree {
        q: q.clone(),
        params: params.clone(),
        pool: b.pool,
        nodes: b.nodes,
    })
}

impl DTree {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn q(&self) -> &QOracle {
        &self.q
    }

    pub fn params(&self) -> &SearchParams {
        &self.params
    }

    fn node_index(&self, path: &[u32]) -> Option<u32> {
        let mut idx = 0u32;
        for &child in path {
            idx = *self.nodes[idx as usize].children.get(child as usize)?;
        }
        Some(idx)
    }

    fn path_of(&self, mut idx: u32) -> Vec<u32> {
        let mut rev = Vec::new();
        while let Some(parent) = self.nodes[idx as usize].parent {
            let pos = self.nodes[parent as usize]
                .children
                .iter()
                .position(|&c| c == idx)
                .unwrap();
            rev.push(pos as u32);
            idx = parent;
        }
        rev.reverse();
        rev
    }

    pub fn contains_path(&self, path: &[u32]) -> bool {
        self.node_index(path).is_some()
    }

    pub fn status_at(&self, path: &[u32]) -> Option<NodeStatus> {
        self.node_index(path).map(|i| self.nodes[i as usize].status)
    }

    pub fn rule_at(&self, path: &[u32]) -> Option<RuleTag> {
        self.node_index(path)
            .and_then(|i| self.nodes[i as usize].rule)
    }

    pub fn children_count(&self, path: &[u32]) -> Option<usize> {
        self.node_index(path)
            .map(|i| self.nodes[i as usize].children.len())
    }

    /// Reconstruct the sequent stored at a node.
    pub fn sequent_at(&self, path: &[u32]) -> Result<Sequent, DeductionError> {
        let idx = self
            .node_index(path)
            .ok_or_else(|| DeductionError::UnknownPath {
                path: path.to_vec(),
            })?;
        let mut chain = vec![idx];
        let mut cur = idx;
        while let Some(p) = self.nodes[cur as usize].parent {
            chain.push(p);
            cur = p;
        }
        chain.reverse();
        let mut ids: Vec<u32> = Vec::new();
        for node in chain {
            let delta = &self.nodes[node as usize].delta;
            if let Some((pos, _)) = delta.removed {
                ids.remove(pos as usize);
            }
            for &(pos, id) in &delta.inserted {
                ids.insert(pos as usize, id);
            }
        }
        Ok(Sequent::new(
            ids.iter().map(|&id| self.pool.formula(id).clone()),
        ))
    }

    /// The chain of sequents from the root to a node, inclusive.
    pub fn branch_sequents(&self, path: &[u32]) -> Result<Vec<Sequent>, DeductionError> {
        let mut out = Vec::with_capacity(path.len() + 1);
        for k in 0..=path.len() {
            out.push(self.sequent_at(&path[..k])?);
        }
        Ok(out)
    }

    /// All node paths in preorder (root first, children in index order).
    pub fn preorder_paths(&self) -> Vec<Vec<u32>> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![0u32];
        while let Some(idx) = stack.pop() {
            out.push(self.path_of(idx));
            for &c in self.nodes[idx as usize].children.iter().rev() {
                stack.push(c);
            }
        }
        out
    }

    /// Paths of all truncated (surviving) leaves, in preorder.
    pub fn truncated_leaf_paths(&self) -> Vec<Vec<u32>> {
        (0..self.nodes.len() as u32)
            .filter(|&i| self.nodes[i as usize].status == NodeStatus::TruncatedLeaf)
            .map(|i| self.path_of(i))
            .collect()
    }

    /// Kleene-Brouwer comparison of two node paths.
    pub fn kb_compare(&self, a: &[u32], b: &[u32]) -> Result<Ordering, DeductionError> {
        for p in [a, b] {
            if !self.contains_path(p) {
                return Err(DeductionError::UnknownPath { path: p.to_vec() });
            }
        }
        Ok(kb_path_compare(a, b))
    }

    /// All node paths in ascending Kleene-Brouwer order; the root comes
    /// last. This is exactly a left-to-right postorder traversal.
    pub fn kb_listing(&self) -> Vec<Vec<u32>> {
        let mut out = Vec::with_capacity(self.nodes.len());
        fn post(tree: &DTree, idx: u32, path: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            for (k, &c) in tree.nodes[idx as usize].children.iter().enumerate() {
                path.push(k as u32);
                post(tree, c, path, out);
                path.pop();
            }
            out.push(path.clone());
        }
        post(self, 0, &mut Vec::new(), &mut out);
        out
    }

    /// Re-derive every step of the tree through the public chain rules and
    /// re-check every status.
    pub fn replay_validate(&self) -> ReplayReport {
        let mut report = ReplayReport::default();
        let mut history = FormulaHistory::default();
        let root_seq = match self.sequent_at(&[]) {
            Ok(s) => s,
            Err(e) => {
                report
                    .divergences
                    .push(format!("root reconstruction failed: {e}"));
                return report;
            }
        };
        let expected_root = Sequent::new([
            neg_q_literal(&self.q, 0),
            negate(&axiom_enumerator(&self.params.axioms, 0)),
        ]);
        if root_seq != expected_root {
            report.divergences.push("root sequent mismatch".to_string());
        }
        self.replay_node(0, &root_seq, &mut history, &mut report);
        report
    }

    fn replay_node(
        &self,
        idx: u32,
        seq: &Sequent,
        history: &mut FormulaHistory,
        report: &mut ReplayReport,
    ) {
        if report.divergences.len() >= 20 {
            return;
        }
        let node = &self.nodes[idx as usize];
        let path = || format!("{:?}", self.path_of(idx));
        let axiomatic = match is_axiomatic(seq) {
            Ok(b) => b,
            Err(e) => {
                report
                    .divergences
                    .push(format!("{}: open term in sequent: {e}", path()));
                return;
            }
        };
        report.nodes_checked += 1;
        let expected_status = if axiomatic {
            NodeStatus::AxiomaticLeaf
        } else if node.position >= self.params.depth {
            NodeStatus::TruncatedLeaf
        } else {
            NodeStatus::Internal
        };
        if node.status != expected_status {
            report.divergences.push(format!(
                "{}: status {} but rules demand {}",
                path(),
                node.status.name(),
                expected_status.name()
            ));
            return;
        }
        if node.status != NodeStatus::Internal {
            return;
        }
        let snapshot = history.clone();
        history.absorb(seq);
        match chain_children(
            &self.q,
            &self.params.axioms,
            seq,
            node.position as u64,
            self.params.omega_bound,
            history,
        ) {
            Ok(step) => {
                if Some(step.rule) != node.rule {
                    report.divergences.push(format!(
                        "{}: stored rule {:?} but derived {:?}",
                        path(),
                        node.rule,
                        step.rule
                    ));
                }
                if step.children.len() != node.children.len() {
                    report.divergences.push(format!(
                        "{}: {} stored children, derived {}",
                        path(),
                        node.children.len(),
                        step.children.len()
                    ));
                } else {
                    for (k, ((choice, derived), &child_idx)) in
                        step.children.iter().zip(node.children.iter()).enumerate()
                    {
                        let child = &self.nodes[child_idx as usize];
                        if *choice != child.choice {
                            report.divergences.push(format!(
                                "{} child {k}: stored choice {} derived {}",
                                path(),
                                child.choice,
                                choice
                            ));
                        }
                        let stored = self
                            .sequent_at(&self.path_of(child_idx))
                            .expect("child path resolves");
                        if &stored != derived {
                            report
                                .divergences
                                .push(format!("{} child {k}: sequent mismatch", path()));
                        } else {
                            self.replay_node(child_idx, derived, history, report);
                        }
                    }
                }
            }
            Err(e) => {
                report
                    .divergences
                    .push(format!("{}: chain rules failed: {e}", path()));
            }
        }
        *history = snapshot;
    }

    /// Visit every truncated leaf together with its full branch of
    /// sequents, sharing reconstruction work across the walk.
    pub fn walk_truncated_branches(&self, visit: &mut dyn FnMut(&[u32], &[Sequent])) {
        fn go(
            tree: &DTree,
            idx: u32,
            ids: &mut Vec<u32>,
            path: &mut Vec<u32>,
            branch: &mut Vec<Sequent>,
            visit: &mut dyn FnMut(&[u32], &[Sequent]),
        ) {
            let node = &tree.nodes[idx as usize];
            let saved = ids.clone();
            if let Some((pos, _)) = node.delta.removed {
                ids.remove(pos as usize);
            }
            for &(pos, id) in &node.delta.inserted {
                ids.insert(pos as usize, id);
            }
            branch.push(Sequent::new(
                ids.iter().map(|&id| tree.pool.formula(id).clone()),
            ));
            match node.status {
                NodeStatus::TruncatedLeaf => visit(path, branch),
                NodeStatus::AxiomaticLeaf => {}
                NodeStatus::Internal => {
                    for (k, &child) in node.children.iter().enumerate() {
                        path.push(k as u32);
                        go(tree, child, ids, path, branch, visit);
                        path.pop();
                    }
                }
            }
            branch.pop();
            *ids = saved;
        }
        go(
            self,
            0,
            &mut Vec::new(),
            &mut Vec::new(),
            &mut Vec::new(),
            visit,
        );
    }

    /// Deterministic structural digest of the whole tree (formula pool
    /// plus per-node records), stable across runs and platforms.
    pub fn digest(&self) -> u64 {
        let mut h = Fnv::new();
        for f in &self.pool.formulas {
            h.write(logic::print_formula(f).as_bytes());
            h.write(b";");
        }
        for node in &self.nodes {
            h.write_u32(node.parent.map_or(u32::MAX, |p| p));
            h.write_u32(node.position);
            h.write_u32(node.status as u32);
            h.write_u32(node.rule.map_or(99, |r| r as u32));
            h.write(&node.choice.to_le_bytes());
            if let Some((pos, id)) = node.delta.removed {
                h.write_u32(pos);
                h.write_u32(id);
            }
            for &(pos, id) in &node.delta.inserted {
                h.write_u32(pos);
                h.write_u32(id);
            }
        }
        h.finish()
    }

    /// Structured tree dump for `--emit`.
    pub fn emit_json(&self) -> serde_json::Value {
        let mut nodes = Vec::new();
        for path in self.preorder_paths() {
            let idx = self.node_index(&path).unwrap();
            let node = &self.nodes[idx as usize];
            let seq = self.sequent_at(&path).unwrap();
            nodes.push(json!({
                "path": path,
                "position": node.position,
                "status": node.status.name(),
                "rule": node.rule.map(RuleTag::name),
                "choice": node.choice,
                "sequent-texts": seq.iter().map(logic::print_formula).collect::<Vec<_>>(),
            }));
        }
        json!({
            "q": self.q.to_string(),
            "depth": self.params.depth,
            "omega-bound": self.params.omega_bound,
            "nodes": nodes,
        })
    }

    /// Ascending KB listing as text, one path per line.
    pub fn emit_kb_text(&self) -> String {
        let mut out = String::new();
        for path in self.kb_listing() {
            out.push_str(&format_path(&path));
            out.push('\n');
        }
        out
    }
}

/// FNV-1a, used for the structural digest so it does not depend on the
/// process-random std hasher keys.
struct Fnv(u64);

impl Fnv {
    fn new() -> Fnv {
        Fnv(0xcbf2_9ce4_8422_2325)
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x1000_0000_01b3);
        }
    }

    fn write_u32(&mut self, v: u32) {
        self.write(&v.to_le_bytes());
    }

    fn finish(&self) -> u64 {
        self.0
    }
}

/// Kleene-Brouwer path order: descendants come before their ancestors,
/// and at the first differing child index the smaller index comes first.
pub fn kb_path_compare(a: &[u32], b: &[u32]) -> Ordering {
    let shared = a.len().min(b.len());
    for k in 0..shared {
        match a[k].cmp(&b[k]) {
            Ordering::Equal => continue,
            decided => return decided,
        }
    }
    // Equal on the shared prefix: the longer path (descendant) is smaller.
    b.len().cmp(&a.len())
}

pub fn format_path(path: &[u32]) -> String {
    let items: Vec<String> = path.iter().map(|c| c.to_string()).collect();
    format!("[{}]", items.join(","))
}

#[derive(Debug, Default)]
pub struct ReplayReport {
    pub nodes_checked: usize,
    pub divergences: Vec<String>,
}

impl ReplayReport {
    pub fn is_clean(&self) -> bool {
        self.divergences.is_empty()
    }
}

// ---------------------------------------------------------------------------
// Model extraction
// ---------------------------------------------------------------------------

/// The coded model read off a branch: row `i` holds the values whose
/// non-membership literal for `U_i` occurs on the branch.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CodedModel {
    pub rows: BTreeMap<u32, BTreeSet<u64>>,
}

impl CodedModel {
    pub fn row(&self, i: u32) -> BTreeSet<u64> {
        self.rows.get(&i).cloned().unwrap_or_default()
    }

    pub fn emit_json(&self) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> = self
            .rows
            .iter()
            .map(|(i, row)| {
                (
                    i.to_string(),
                    json!(row.iter().copied().collect::<Vec<u64>>()),
                )
            })
            .collect();
        serde_json::Value::Object(map)
    }
}

/// Collect the numeral non-membership literals of a branch into rows.
/// Only literal numerals count, matching the defining display.
pub fn extract_model(branch: &[Sequent]) -> CodedModel {
    let mut model = CodedModel::default();
    for seq in branch {
        for f in seq.iter() {
            if let Formula::NotIn(t, u) = f {
                if let Some(k) = t.as_numeral() {
                    model.rows.entry(*u).or_default().insert(k);
                }
            }
        }
    }
    model
}

#[derive(Debug, Default)]
pub struct BranchReport {
    pub failures: Vec<String>,
}

impl BranchReport {
    pub fn is_clean(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Check the branch properties that are decidable on a finite truncated
/// branch: no true literal occurs (1), no matching membership pair occurs
/// (2), every decomposition that fired left its residue on the branch
/// (bounded 3-8), the negated membership facts are all present (10), and
/// row 0 of the extracted model agrees with the set on the inspected
/// window.
pub fn check_branch_properties(branch: &[Sequent], q: &QOracle) -> BranchReport {
    let mut report = BranchReport::default();
    if branch.is_empty() {
        report.failures.push("empty branch".to_string());
        return report;
    }
    let union: HashSet<&Formula> = branch.iter().flat_map(|s| s.iter()).collect();

    // Item 1: no true closed literal anywhere on the branch.
    for f in &union {
        if logic::literal_true(f).unwrap_or(false) {
            report.failures.push(format!("true literal occurs: {f}"));
        }
    }

    // Item 2: no membership/non-membership clash across the whole branch.
    let mut ins: HashMap<u32, BTreeSet<u64>> = HashMap::new();
    let mut outs: HashMap<u32, BTreeSet<u64>> = HashMap::new();
    for f in &union {
        match f {
            Formula::In(t, u) => {
                if let Ok(v) = logic::eval_term(t) {
                    ins.entry(*u).or_default().insert(v);
                }
            }
            Formula::NotIn(t, u) => {
                if let Ok(v) = logic::eval_term(t) {
                    outs.entry(*u).or_default().insert(v);
                }
            }
            _ => {}
        }
    }
    for (u, vals) in &ins {
        if let Some(against) = outs.get(u) {
            for v in vals.intersection(against) {
                report
                    .failures
                    .push(format!("membership clash on U_{u} at value {v}"));
            }
        }
    }

    // Bounded items 3-8: wherever a decomposition fired (every non-leaf
    // step), its residue must occur on the branch.
    let window = branch.len() as u64 - 1;
    let set_limit = 2 + union
        .iter()
        .flat_map(|f| f.all_set_indices())
        .max()
        .unwrap_or(0);
    let num_limit = window + 64;
    let occurs = |f: &Formula| union.contains(f);
    for (step, gamma) in branch[..branch.len() - 1].iter().enumerate() {
        let Some(redex) = logic::find_redex(gamma) else {
            continue;
        };
        let e = redex.redex;
        let ok = match e {
            Formula::Or(a, b) => occurs(a) && occurs(b),
            Formula::And(a, b) => occurs(a) || occurs(b),
            Formula::ExistsNum(x, f) | Formula::ForallNum(x, f) => {
                (0..=num_limit).any(|m| occurs(&subst_num(f, *x, m)))
            }
            Formula::ExistsSet(x, f) | Formula::ForallSet(x, f) => {
                (0..=set_limit).any(|m| occurs(&subst_setvar(f, *x, m)))
            }
            _ => true,
        };
        if !ok {
            report
                .failures
                .push(format!("step {step}: decomposed {e} left no residue"));
        }
    }

    // Item 10: the negated membership facts up to the branch length.
    for m in 0..=window {
        if !occurs(&neg_q_literal(q, m)) {
            report
                .failures
                .push(format!("negated membership fact for {m} missing"));
        }
    }

    // Row 0 of the extracted model matches the set on the window.
    let model = extract_model(branch);
    let row0 = model.row(0);
    for n in 0..=window {
        if row0.contains(&n) != q.contains(n) {
            report
                .failures
                .push(format!("row 0 disagrees with the set at {n}"));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;

    fn params(depth: u32, omega_bound: u64) -> SearchParams {
        SearchParams::new(depth, omega_bound)
    }

    #[test]
    fn q_literal_orientation() {
        let q = QOracle::Finite([2].into());
        assert_eq!(q_literal(&q, 2), Formula::In(numeral(2), 0));
        assert_eq!(q_literal(&q, 3), Formula::NotIn(numeral(3), 0));
        let empty = QOracle::Finite(BTreeSet::new());
        assert_eq!(q_literal(&empty, 7), Formula::NotIn(numeral(7), 0));
        assert_eq!(neg_q_literal(&empty, 7), Formula::In(numeral(7), 0));
    }

    #[test]
    fn set_specs() {
        let q = QOracle::parse_spec("{1,3,5}").unwrap();
        assert!(q.contains(3) && !q.contains(2));
        let q = QOracle::parse_spec("evens<=20").unwrap();
        assert!(q.contains(0) && q.contains(20) && !q.contains(7) && !q.contains(22));
        assert!(QOracle::parse_spec("junk").is_err());
        let q = QOracle::EventuallyPeriodic {
            prefix: vec![true],
            period: vec![false, true],
        };
        assert!(q.contains(0) && !q.contains(1) && q.contains(2) && !q.contains(3));
    }

    #[test]
    fn axiom_enumerator_outputs_are_closed_nnf() {
        let config = AxiomConfig::default();
        for i in 0..25 {
            let a = axiom_enumerator(&config, i);
            assert!(a.free_num_vars().is_empty(), "axiom {i} has free num vars");
            assert!(a.free_set_vars().is_empty(), "axiom {i} has free set vars");
        }
    }

    #[test]
    fn axiom_zero_is_configured() {
        let config = AxiomConfig::default();
        assert_eq!(axiom_enumerator(&config, 0), config.aca);
        assert!(matches!(config.aca, Formula::ForallSet(..)));
    }

    #[test]
    fn first_decodable_instance_uses_code_order() {
        // unpair(0) = (0,0): both decode to the first coded formula "0<0",
        // which is arithmetic, so no fallback fires.
        let a1 = axiom_enumerator(&AxiomConfig::default(), 1);
        let expected = bar_induction_instance(
            &parse_formula("0<0").unwrap(),
            &parse_formula("0<0").unwrap(),
        );
        assert_eq!(a1, expected);
    }

    #[test]
    fn bar_induction_instance_shape() {
        // WF -> TI as an Or under the closure quantifiers.
        let inst = bar_induction_instance(
            &parse_formula("x_0<x_1").unwrap(),
            &parse_formula("x_0=x_0").unwrap(),
        );
        assert!(inst.free_num_vars().is_empty());
        assert!(inst.free_set_vars().is_empty());
        let mut f = &inst;
        while let Formula::ForallSet(_, b) | Formula::ForallNum(_, b) = f {
            f = b;
        }
        assert!(matches!(f, Formula::Or(..)));
    }

    #[test]
    fn stall_rule_appends_next_facts() {
        let q = QOracle::Finite(BTreeSet::new());
        let axioms = AxiomConfig::default();
        let gamma = Sequent::new([Formula::NotIn(numeral(0), 0), Formula::NotIn(numeral(7), 3)]);
        let history = FormulaHistory::from_chain([&gamma]);
        let step = chain_children(&q, &axioms, &gamma, 4, 2, &history).unwrap();
        assert_eq!(step.rule, RuleTag::Stall);
        assert_eq!(step.children.len(), 1);
        let child = &step.children[0].1;
        assert!(child.contains(&neg_q_literal(&q, 5)));
        assert!(child.contains(&negate(&axiom_enumerator(&axioms, 5))));
        assert_eq!(child.len(), gamma.len() + 2);
    }

    #[test]
    fn or_rule_splices_in_place() {
        let q = QOracle::Finite(BTreeSet::new());
        let axioms = AxiomConfig::default();
        let lit = Formula::NotIn(numeral(1), 2);
        let a = parse_formula("0=0'").unwrap();
        let b = parse_formula("0<0").unwrap();
        let gamma = Sequent::new([lit.clone(), Formula::or(a.clone(), b.clone())]);
        let history = FormulaHistory::from_chain([&gamma]);
        let step = chain_children(&q, &axioms, &gamma, 0, 2, &history).unwrap();
        assert_eq!(step.rule, RuleTag::OrSplit);
        let child = &step.children[0].1;
        assert_eq!(child.formulas()[0], lit);
        assert_eq!(child.formulas()[1], a);
        assert_eq!(child.formulas()[2], b);
    }

    #[test]
    fn forall_num_branches_per_instance() {
        let q = QOracle::Finite(BTreeSet::new());
        let axioms = AxiomConfig::default();
        let body = parse_formula("x_0=0").unwrap();
        let gamma = Sequent::new([Formula::ForallNum(0, Box::new(body.clone()))]);
        let history = FormulaHistory::from_chain([&gamma]);
        let step = chain_children(&q, &axioms, &gamma, 0, 2, &history).unwrap();
        assert_eq!(step.rule, RuleTag::ForallNumBranch);
        assert_eq!(step.children.len(), 3);
        for (m, child) in &step.children {
            assert!(child.contains(&subst_num(&body, 0, *m)));
            assert!(!child.iter().any(|f| matches!(f, Formula::ForallNum(..))
                && f == &Formula::ForallNum(0, Box::new(body.clone()))));
        }
    }

    #[test]
    fn exists_rules_keep_the_redex_and_track_history() {
        let q = QOracle::Finite(BTreeSet::new());
        let axioms = AxiomConfig::default();
        let body = parse_formula("x_0<0").unwrap();
        let e = Formula::ExistsNum(0, Box::new(body.clone()));
        let gamma = Sequent::new([e.clone(), subst_num(&body, 0, 0)]);
        // History claims instance 0 was already used.
        let history = FormulaHistory::from_chain([&gamma]);
        let step = chain_children(&q, &axioms, &gamma, 0, 2, &history).unwrap();
        assert_eq!(step.rule, RuleTag::ExistsNumWitness);
        let (m, child) = &step.children[0];
        assert_eq!(*m, 1);
        assert!(child.contains(&subst_num(&body, 0, 1)));
        // The redex returns at the very end.
        assert_eq!(child.formulas().last().unwrap(), &e);
    }

    #[test]
    fn axiomatic_sequents_are_rejected() {
        let q = QOracle::Finite(BTreeSet::new());
        let axioms = AxiomConfig::default();
        let gamma = Sequent::new([parse_formula("0=0").unwrap()]);
        let history = FormulaHistory::default();
        assert!(matches!(
            chain_children(&q, &axioms, &gamma, 0, 2, &history),
            Err(DeductionError::AxiomaticSequent)
        ));
    }

    #[test]
    fn depth_zero_tree_is_a_truncated_root() {
        let q = QOracle::Finite(BTreeSet::new());
        let tree = build_tree(&q, &params(0, 2)).unwrap();
        assert_eq!(tree.node_count(), 1);
        assert_eq!(tree.status_at(&[]), Some(NodeStatus::TruncatedLeaf));
        let seq = tree.sequent_at(&[]).unwrap();
        assert_eq!(seq.len(), 2);
        assert!(seq.contains(&neg_q_literal(&q, 0)));
    }

    #[test]
    fn small_tree_replays_cleanly() {
        let q = QOracle::Finite([0, 2].into());
        let tree = build_tree(&q, &params(6, 2)).unwrap();
        assert!(tree.node_count() > 6);
        let report = tree.replay_validate();
        assert!(report.is_clean(), "divergences: {:?}", report.divergences);
        assert_eq!(report.nodes_checked, tree.node_count());
    }

    #[test]
    fn every_sequent_carries_all_negated_facts_so_far() {
        let q = QOracle::Finite(BTreeSet::new());
        let tree = build_tree(&q, &params(3, 2)).unwrap();
        for path in tree.preorder_paths() {
            let seq = tree.sequent_at(&path).unwrap();
            for j in 0..=path.len() as u64 {
                assert!(
                    seq.contains(&neg_q_literal(&q, j)),
                    "missing fact {j} at {path:?}"
                );
            }
        }
    }

    #[test]
    fn build_is_deterministic() {
        let q = QOracle::parse_spec("evens<=6").unwrap();
        let t1 = build_tree(&q, &params(7, 2)).unwrap();
        let t2 = build_tree(&q, &params(7, 2)).unwrap();
        assert_eq!(t1.node_count(), t2.node_count());
        assert_eq!(t1.kb_listing(), t2.kb_listing());
        assert_eq!(
            serde_json::to_string(&t1.emit_json()).unwrap(),
            serde_json::to_string(&t2.emit_json()).unwrap()
        );
    }

    #[test]
    fn node_cap_is_enforced() {
        let q = QOracle::Finite(BTreeSet::new());
        let mut p = params(12, 3);
        p.max_nodes = 10;
        match build_tree(&q, &p) {
            Err(DeductionError::ResourceCap { nodes, .. }) => assert!(nodes >= 10),
            other => panic!("expected resource cap, got {other:?}"),
        }
    }

    #[test]
    fn kb_order_examples() {
        // Root with two leaf children: left child < right child < root.
        assert_eq!(kb_path_compare(&[0], &[1]), Ordering::Less);
        assert_eq!(kb_path_compare(&[1], &[]), Ordering::Less);
        assert_eq!(kb_path_compare(&[0], &[]), Ordering::Less);
        assert_eq!(kb_path_compare(&[], &[0]), Ordering::Greater);
        assert_eq!(kb_path_compare(&[0, 1], &[0, 1]), Ordering::Equal);
        // Descendant below ancestor.
        assert_eq!(kb_path_compare(&[0, 3, 1], &[0, 3]), Ordering::Less);
        // Left subtree entirely below the right sibling.
        assert_eq!(kb_path_compare(&[0, 9, 9], &[1]), Ordering::Less);
    }

    #[test]
    fn kb_listing_is_ascending_and_root_is_maximum() {
        let q = QOracle::Finite([1].into());
        let tree = build_tree(&q, &params(5, 2)).unwrap();
        let listing = tree.kb_listing();
        assert_eq!(listing.len(), tree.node_count());
        assert_eq!(listing.last().unwrap(), &Vec::<u32>::new());
        for pair in listing.windows(2) {
            assert_eq!(kb_path_compare(&pair[0], &pair[1]), Ordering::Less);
        }
        // Sorting by the comparison reproduces the listing.
        let mut sorted = tree.preorder_paths();
        sorted.sort_by(|a, b| kb_path_compare(a, b));
        assert_eq!(sorted, listing);
        assert!(matches!(
            tree.kb_compare(&[9, 9], &[]),
            Err(DeductionError::UnknownPath { .. })
        ));
    }

    #[test]
    fn model_extraction_collects_nonmembership_numerals() {
        let branch = vec![Sequent::new([
            Formula::NotIn(numeral(5), 2),
            Formula::In(numeral(1), 2),
            Formula::NotIn(NumTerm::Plus(Box::new(numeral(1)), Box::new(numeral(1))), 4),
        ])];
        let model = extract_model(&branch);
        assert_eq!(model.row(2), BTreeSet::from([5]));
        // Non-numeral terms do not populate rows.
        assert!(model.row(4).is_empty());
    }

    #[test]
    fn root_only_branch_over_empty_set_has_empty_rows() {
        // The negated membership fact for 0 over the empty set is the
        // positive literal, so nothing lands in row 0.
        let q = QOracle::Finite(BTreeSet::new());
        let tree = build_tree(&q, &params(0, 2)).unwrap();
        let branch = tree.branch_sequents(&[]).unwrap();
        let model = extract_model(&branch);
        assert!(model.rows.is_empty());
        let report = check_branch_properties(&branch, &q);
        assert!(report.is_clean(), "{:?}", report.failures);
    }

    #[test]
    fn branch_properties_on_surviving_branches() {
        let q = QOracle::parse_spec("evens<=4").unwrap();
        let tree = build_tree(&q, &params(8, 2)).unwrap();
        let leaves = tree.truncated_leaf_paths();
        assert!(!leaves.is_empty());
        for leaf in &leaves {
            let branch = tree.branch_sequents(leaf).unwrap();
            let report = check_branch_properties(&branch, &q);
            assert!(report.is_clean(), "{:?}", report.failures);
            let model = extract_model(&branch);
            let window = branch.len() as u64 - 1;
            for n in 0..=window {
                assert_eq!(model.row(0).contains(&n), q.contains(n));
            }
        }
    }

    #[test]
    fn tampered_tree_is_detected() {
        let q = QOracle::Finite([1].into());
        let mut tree = build_tree(&q, &params(4, 2)).unwrap();
        // Corrupt one stored choice.
        if let Some(node) = tree
            .nodes
            .iter_mut()
            .find(|n| n.choice == 0 && n.parent.is_some())
        {
            node.choice = 99;
        }
        let report = tree.replay_validate();
        assert!(!report.is_clean());
    }
}
