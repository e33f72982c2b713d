//! The ordinal bound calculus of the infinitary system: local validation
//! of single inference steps against their side conditions, and the bound
//! transforms used by the embedding, cut-reduction and collapsing
//! bookkeeping.
//!
//! There is deliberately no whole-derivation checker: the derivations this
//! calculus measures are infinite objects, so only single steps are
//! validated. The two infinitary rules are checked partially — the
//! number-sort rule on the supplied finite premise list, the collapsing
//! rule on the supplied witness pairs — and the report says so.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{add, ff_apply, omega_pow, omega_tower, FundFn};
use crate::deduction::QOracle;
use crate::logic::{
    self, eval_term, grade, is_arithmetic, negate, parse_grade, Formula, Grade, Sequent,
};
use crate::order::{cmp, triangle_le, triangle_less};
use crate::term::{print, OrdinalTerm, Principal};
use crate::wellorder::WellOrdering;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BoundsError {
    #[error("additive bound needs {delta} at or below the least part {least} of the left summand")]
    ShapeViolation { delta: String, least: String },
    #[error("the left summand is zero, so it has no least part")]
    EmptySum,
    #[error("E-index {index} is outside the carrier")]
    OffCarrier { index: u64 },
    #[error("unknown rule tag {tag:?}")]
    UnknownRule { tag: String },
    #[error("step file field {field}: {message}")]
    BadStepFile { field: String, message: String },
}

/// Rule tags of the inference step checker.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    AxiomTrueLit,
    AxiomQ,
    AxiomNotQ,
    AxiomMatch,
    And,
    Or,
    Exists1,
    Forall2,
    Cut,
    Exists2,
    OmegaRule,
    BigOmegaRule,
}

impl RuleKind {
    pub fn name(self) -> &'static str {
        match self {
            RuleKind::AxiomTrueLit => "axiom-true-lit",
            RuleKind::AxiomQ => "axiom-q",
            RuleKind::AxiomNotQ => "axiom-not-q",
            RuleKind::AxiomMatch => "axiom-match",
            RuleKind::And => "and",
            RuleKind::Or => "or",
            RuleKind::Exists1 => "exists1",
            RuleKind::Forall2 => "forall2",
            RuleKind::Cut => "cut",
            RuleKind::Exists2 => "exists2",
            RuleKind::OmegaRule => "omega-rule",
            RuleKind::BigOmegaRule => "big-omega-rule",
        }
    }

    pub fn from_name(tag: &str) -> Result<RuleKind, BoundsError> {
        Ok(match tag {
            "axiom-true-lit" => RuleKind::AxiomTrueLit,
            "axiom-q" => RuleKind::AxiomQ,
            "axiom-not-q" => RuleKind::AxiomNotQ,
            "axiom-match" => RuleKind::AxiomMatch,
            "and" => RuleKind::And,
            "or" => RuleKind::Or,
            "exists1" => RuleKind::Exists1,
            "forall2" => RuleKind::Forall2,
            "cut" => RuleKind::Cut,
            "exists2" => RuleKind::Exists2,
            "omega-rule" => RuleKind::OmegaRule,
            "big-omega-rule" => RuleKind::BigOmegaRule,
            other => {
                return Err(BoundsError::UnknownRule {
                    tag: other.to_string(),
                })
            }
        })
    }

    pub const ALL: [RuleKind; 12] = [
        RuleKind::AxiomTrueLit,
        RuleKind::AxiomQ,
        RuleKind::AxiomNotQ,
        RuleKind::AxiomMatch,
        RuleKind::And,
        RuleKind::Or,
        RuleKind::Exists1,
        RuleKind::Forall2,
        RuleKind::Cut,
        RuleKind::Exists2,
        RuleKind::OmegaRule,
        RuleKind::BigOmegaRule,
    ];
}

/// A derivability judgment: bound, cut degree, sequent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Judgment {
    pub bound: OrdinalTerm,
    pub degree: Grade,
    pub sequent: Sequent,
}

/// A clause-(c) spot check for the collapsing rule: a weak side sequent,
/// its bound below the anchor, and the bound the instance claims for the
/// transformed premise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OmegaWitness {
    pub side: Sequent,
    pub beta: OrdinalTerm,
    pub claimed: OrdinalTerm,
}

/// One inference step to be checked locally.
#[derive(Debug, Clone)]
pub struct InferenceInstance {
    pub rule: RuleKind,
    pub conclusion: Judgment,
    pub premises: Vec<Judgment>,
    pub cut_formula: Option<Formula>,
    pub fund_fn: Option<FundFn>,
    pub witnesses: Vec<OmegaWitness>,
}

/// Outcome of [`check_step`].
#[derive(Debug, Default)]
pub struct StepReport {
    pub failures: Vec<String>,
    pub notes: Vec<String>,
}

impl StepReport {
    pub fn accepted(&self) -> bool {
        self.failures.is_empty()
    }

    fn fail(&mut self, msg: impl Into<String>) {
        self.failures.push(msg.into());
    }

    fn note(&mut self, msg: impl Into<String>) {
        self.notes.push(msg.into());
    }
}

/// Validate the clause-specific side conditions of a single inference
/// step. The infinitary rules are checked on the supplied finite data
/// only; the report marks those checks as partial.
pub fn check_step(wo: &WellOrdering, q: &QOracle, inst: &InferenceInstance) -> StepReport {
    let mut report = StepReport::default();
    let conclusion = &inst.conclusion;
    let alpha = &conclusion.bound;

    let labeled: Vec<(String, &Judgment)> = std::iter::once(("conclusion".to_string(), conclusion))
        .chain(
            inst.premises
                .iter()
                .enumerate()
                .map(|(k, j)| (format!("premise {k}"), j)),
        )
        .collect();
    for (label, j) in labeled {
        if !j.sequent.is_closed() {
            report.fail(format!("{label} sequent has free number variables"));
        }
        if !crate::term::validate(wo, &j.bound).is_empty() {
            report.fail(format!(
                "{label} bound {} is not normalized",
                print(&j.bound)
            ));
        }
    }

    let premise_bounds_majorized = |report: &mut StepReport| {
        for (k, p) in inst.premises.iter().enumerate() {
            if !triangle_less(wo, &p.bound, alpha) {
                report.fail(format!(
                    "premise {k} bound {} is not majorized by {}",
                    print(&p.bound),
                    print(alpha)
                ));
            }
            if p.degree > conclusion.degree {
                report.fail(format!(
                    "premise {k} degree {} exceeds conclusion degree {}",
                    p.degree, conclusion.degree
                ));
            }
        }
    };

    match inst.rule {
        RuleKind::AxiomTrueLit => {
            expect_no_premises(inst, &mut report);
            let found = conclusion
                .sequent
                .iter()
                .any(|f| logic::literal_true(f).unwrap_or(false));
            if !found {
                report.fail("no true closed literal in the conclusion");
            }
        }
        RuleKind::AxiomQ | RuleKind::AxiomNotQ => {
            expect_no_premises(inst, &mut report);
            let want_member = inst.rule == RuleKind::AxiomQ;
            let found = conclusion.sequent.iter().any(|f| match f {
                Formula::In(t, 0) if want_member => {
                    eval_term(t).map(|n| q.contains(n)).unwrap_or(false)
                }
                Formula::NotIn(t, 0) if !want_member => {
                    eval_term(t).map(|n| !q.contains(n)).unwrap_or(false)
                }
                _ => false,
            });
            if !found {
                report.fail(if want_member {
                    "no membership literal over row 0 with a value in the set"
                } else {
                    "no non-membership literal over row 0 with a value outside the set"
                });
            }
        }
        RuleKind::AxiomMatch => {
            expect_no_premises(inst, &mut report);
            let fs = conclusion.sequent.formulas();
            let mut found = false;
            'outer: for a in fs {
                let g = grade(a);
                if g != Grade::Finite(0) && g != Grade::OMEGA {
                    continue;
                }
                for b in fs {
                    if equal_modulo_terms(a, &negate(b)) && !std::ptr::eq(a, b) {
                        found = true;
                        break 'outer;
                    }
                }
            }
            if !found {
                report.fail("no dual pair of grade 0 or omega with equivalent terms");
            }
        }
        RuleKind::And => {
            premise_bounds_majorized(&mut report);
            if inst.premises.len() != 2 {
                report.fail("conjunction needs exactly two premises");
            } else {
                let ok = conclusion.sequent.iter().any(|f| {
                    if let Formula::And(a, b) = f {
                        let rest = minus(&conclusion.sequent, f);
                        premise_matches(&inst.premises[0].sequent, &rest, a)
                            && premise_matches(&inst.premises[1].sequent, &rest, b)
                    } else {
                        false
                    }
                });
                if !ok {
                    report.fail("no conjunction in the conclusion matches the premises");
                }
            }
        }
        RuleKind::Or => {
            premise_bounds_majorized(&mut report);
            if inst.premises.len() != 1 {
                report.fail("disjunction needs exactly one premise");
            } else {
                let ok = conclusion.sequent.iter().any(|f| {
                    if let Formula::Or(a, b) = f {
                        let rest = minus(&conclusion.sequent, f);
                        premise_matches(&inst.premises[0].sequent, &rest, a)
                            || premise_matches(&inst.premises[0].sequent, &rest, b)
                    } else {
                        false
                    }
                });
                if !ok {
                    report.fail("no disjunction in the conclusion matches the premise");
                }
            }
        }
        RuleKind::Exists1 => {
            premise_bounds_majorized(&mut report);
            if inst.premises.len() != 1 {
                report.fail("number-sort witness rule needs exactly one premise");
            } else {
                let premise = &inst.premises[0].sequent;
                let ok = conclusion.sequent.iter().any(|f| {
                    if let Formula::ExistsNum(x, body) = f {
                        // An instance already present in the rest also
                        // matches: adding it back changes nothing.
                        let rest = minus(&conclusion.sequent, f);
                        premise
                            .iter()
                            .any(|g| rest_matches(premise, &rest, g) && num_instance(body, *x, g))
                    } else {
                        false
                    }
                });
                if !ok {
                    report.fail("premise is not a witness instance of an existential");
                }
            }
        }
        RuleKind::Forall2 => {
            premise_bounds_majorized(&mut report);
            if inst.premises.len() != 1 {
                report.fail("set-sort universal rule needs exactly one premise");
            } else {
                let premise = &inst.premises[0].sequent;
                let conclusion_free: std::collections::BTreeSet<u32> = conclusion
                    .sequent
                    .iter()
                    .flat_map(|f| f.free_set_vars())
                    .collect();
                let ok = conclusion.sequent.iter().any(|f| {
                    if let Formula::ForallSet(x, body) = f {
                        let rest = minus(&conclusion.sequent, f);
                        premise.iter().any(|g| {
                            rest_matches(premise, &rest, g)
                                && set_instance(body, *x, g).is_some_and(|witness| {
                                    // A vacuous instance admits any fresh
                                    // eigenvariable.
                                    witness.is_none_or(|m| !conclusion_free.contains(&m))
                                })
                        })
                    } else {
                        false
                    }
                });
                if !ok {
                    report.fail("premise is not a fresh-variable instance of a set universal");
                }
            }
        }
        RuleKind::Cut => {
            premise_bounds_majorized(&mut report);
            match (&inst.cut_formula, inst.premises.as_slice()) {
                (Some(cut), [p0, p1]) => {
                    if grade(cut) >= conclusion.degree {
                        report.fail(format!(
                            "cut formula grade {} not below conclusion degree {}",
                            grade(cut),
                            conclusion.degree
                        ));
                    }
                    let with_pos = plus(&conclusion.sequent, cut);
                    let with_neg = plus(&conclusion.sequent, &negate(cut));
                    if canonical_set(&p0.sequent) != canonical_set(&with_pos)
                        || canonical_set(&p1.sequent) != canonical_set(&with_neg)
                    {
                        report.fail("premises are not the conclusion extended by the cut formula and its negation");
                    }
                }
                (None, _) => report.fail("cut needs a cut formula"),
                _ => report.fail("cut needs exactly two premises"),
            }
        }
        RuleKind::Exists2 => {
            premise_bounds_majorized(&mut report);
            if inst.premises.len() != 1 {
                report.fail("set-sort witness rule needs exactly one premise");
            } else {
                let premise = &inst.premises[0].sequent;
                let ok = conclusion.sequent.iter().any(|f| {
                    if let Formula::ExistsSet(x, body) = f {
                        if is_arithmetic(body) {
                            return false;
                        }
                        let rest = minus(&conclusion.sequent, f);
                        premise.iter().any(|g| {
                            rest_matches(premise, &rest, g) && set_instance(body, *x, g).is_some()
                        })
                    } else {
                        false
                    }
                });
                if !ok {
                    report.fail("premise is not an instance of a non-arithmetic set existential");
                }
            }
        }
        RuleKind::OmegaRule => {
            if inst.premises.is_empty() {
                report.fail("the number-sort infinitary rule needs at least one supplied premise");
            }
            let common = inst.premises.first().map(|p| p.bound.clone());
            if let Some(beta) = &common {
                if !triangle_less(wo, beta, alpha) {
                    report.fail(format!(
                        "common premise bound {} is not majorized by {}",
                        print(beta),
                        print(alpha)
                    ));
                }
                for (k, p) in inst.premises.iter().enumerate() {
                    if &p.bound != beta {
                        report.fail(format!("premise {k} bound differs from the common bound"));
                    }
                    if p.degree > conclusion.degree {
                        report.fail(format!("premise {k} degree exceeds the conclusion degree"));
                    }
                }
            }
            let ok = conclusion.sequent.iter().any(|f| {
                if let Formula::ForallNum(x, body) = f {
                    inst.premises.iter().enumerate().all(|(m, p)| {
                        let inst_m = logic::subst_num(body, *x, m as u64);
                        canonical_set(&p.sequent)
                            == canonical_set(&plus(&conclusion.sequent, &inst_m))
                    })
                } else {
                    false
                }
            });
            if !ok {
                report.fail("premises are not instances 0..k of a universal in the conclusion");
            }
            report.note(format!(
                "infinitary premises spot-checked for m < {}; locally consistent, not derivable",
                inst.premises.len()
            ));
        }
        RuleKind::BigOmegaRule => {
            let Some(f) = &inst.fund_fn else {
                report.fail("collapsing rule needs a fundamental function");
                return report;
            };
            // (a) f at the anchor is majorized by the conclusion bound.
            let at_omega = f.at_omega(wo);
            if !triangle_le(wo, &at_omega, alpha) {
                report.fail(format!(
                    "condition (a): f(Om) = {} is not majorized-or-equal to {}",
                    print(&at_omega),
                    print(alpha)
                ));
            }
            // (b) one premise at bound f(0) carrying the universal main
            // formula.
            if inst.premises.len() != 1 {
                report.fail("collapsing rule needs exactly the one (b)-premise");
            } else {
                let p = &inst.premises[0];
                let at_zero = f.at_zero(wo);
                if p.bound != at_zero {
                    report.fail(format!(
                        "condition (b): premise bound {} differs from f(0) = {}",
                        print(&p.bound),
                        print(&at_zero)
                    ));
                }
                if p.degree > conclusion.degree {
                    report.fail("condition (b): premise degree exceeds the conclusion degree");
                }
                let ok = p.sequent.iter().any(|g| {
                    matches!(g, Formula::ForallSet(_, body) if is_arithmetic(body))
                        && canonical_set(&p.sequent) == canonical_set(&plus(&conclusion.sequent, g))
                });
                if !ok {
                    report.fail(
                        "condition (b): premise is not the conclusion plus a universal set formula over an arithmetic matrix",
                    );
                }
            }
            // (c) supplied witness pairs.
            for (k, w) in inst.witnesses.iter().enumerate() {
                if let Some(bad) = w.side.iter().find(|g| !logic::is_weak(g)) {
                    report.fail(format!("witness {k}: side formula {bad} is not weak"));
                }
                if cmp(wo, &w.beta, &OrdinalTerm::Omega) != Ordering::Less {
                    report.fail(format!(
                        "witness {k}: bound {} is not below the anchor",
                        print(&w.beta)
                    ));
                }
                match ff_apply(wo, f, &w.beta) {
                    Ok(expected) => {
                        if expected != w.claimed {
                            report.fail(format!(
                                "witness {k}: claimed bound {} differs from f(beta) = {}",
                                print(&w.claimed),
                                print(&expected)
                            ));
                        }
                    }
                    Err(e) => report.fail(format!("witness {k}: {e}")),
                }
            }
            report.note(format!(
                "condition (c) checked on {} supplied witness pair(s); partial by nature",
                inst.witnesses.len()
            ));
        }
    }

    if matches!(
        inst.rule,
        RuleKind::AxiomTrueLit | RuleKind::AxiomQ | RuleKind::AxiomNotQ | RuleKind::AxiomMatch
    ) && conclusion.sequent.is_empty()
    {
        report.fail("axioms never conclude the empty sequent");
    }
    report
}

fn expect_no_premises(inst: &InferenceInstance, report: &mut StepReport) {
    if !inst.premises.is_empty() {
        report.fail("axiom steps take no premises");
    }
}

/// The conclusion without one designated formula occurrence.
fn minus(seq: &Sequent, drop: &Formula) -> Sequent {
    Sequent::new(seq.iter().filter(|f| *f != drop).cloned())
}

/// The sequent extended by a formula.
fn plus(seq: &Sequent, add: &Formula) -> Sequent {
    let mut out = seq.clone();
    out.push(add.clone());
    out
}

/// Equality up to bound-variable naming.
fn alpha_eq(a: &Formula, b: &Formula) -> bool {
    logic::canonicalize(a) == logic::canonicalize(b)
}

/// The members of a sequent as a set of canonical formulas.
fn canonical_set(seq: &Sequent) -> std::collections::BTreeSet<Formula> {
    seq.iter().map(logic::canonicalize).collect()
}

/// Does `premise` equal `rest + extra` as a set, up to renaming?
fn premise_matches(premise: &Sequent, rest: &Sequent, extra: &Formula) -> bool {
    canonical_set(premise) == canonical_set(&plus(rest, extra))
}

/// Is `g` the only member of `premise` beyond `rest`, up to renaming?
fn rest_matches(premise: &Sequent, rest: &Sequent, g: &Formula) -> bool {
    canonical_set(premise) == canonical_set(&plus(rest, g))
}

/// All number-term subtrees of a formula (the witness of a number-sort
/// instance is always among them).
fn num_subterms(g: &Formula) -> Vec<crate::logic::NumTerm> {
    use crate::logic::NumTerm;
    fn terms(t: &NumTerm, out: &mut Vec<NumTerm>) {
        out.push(t.clone());
        match t {
            NumTerm::Succ(a) => terms(a, out),
            NumTerm::Plus(a, b) | NumTerm::Times(a, b) => {
                terms(a, out);
                terms(b, out);
            }
            _ => {}
        }
    }
    fn go(f: &Formula, out: &mut Vec<NumTerm>) {
        match f {
            Formula::PosLit(_, a, b) | Formula::NegLit(_, a, b) => {
                terms(a, out);
                terms(b, out);
            }
            Formula::In(t, _) | Formula::NotIn(t, _) => terms(t, out),
            Formula::And(a, b) | Formula::Or(a, b) => {
                go(a, out);
                go(b, out);
            }
            Formula::ForallNum(_, b)
            | Formula::ExistsNum(_, b)
            | Formula::ForallSet(_, b)
            | Formula::ExistsSet(_, b) => go(b, out),
        }
    }
    let mut out = Vec::new();
    go(g, &mut out);
    out.sort();
    out.dedup();
    out
}

/// Is `g` the body with some term substituted for the bound variable?
/// Candidates are read off `g` itself, so the search is finite.
fn num_instance(body: &Formula, var: u32, g: &Formula) -> bool {
    if !body.free_num_vars().contains(&var) {
        return alpha_eq(body, g);
    }
    num_subterms(g)
        .iter()
        .any(|t| alpha_eq(&logic::subst_num_term(body, var, t), g))
}

/// If `g` is the body with a set variable substituted for the bound one,
/// return a witness: the substituted variable, or `None` inside `Some`
/// when the bound variable is vacuous (any witness works).
fn set_instance(body: &Formula, var: u32, g: &Formula) -> Option<Option<u32>> {
    if !body.free_set_vars().contains(&var) {
        return alpha_eq(body, g).then_some(None);
    }
    let mut candidates: Vec<u32> = g.all_set_indices().into_iter().collect();
    candidates.push(candidates.iter().copied().max().unwrap_or(0) + 1);
    candidates
        .into_iter()
        .find(|m| alpha_eq(&logic::subst_setvar(body, var, *m), g))
        .map(Some)
}

/// Structural equality with closed number terms compared by value.
fn equal_modulo_terms(a: &Formula, b: &Formula) -> bool {
    use crate::logic::NumTerm;
    fn term_equiv(s: &NumTerm, t: &NumTerm) -> bool {
        match (eval_term(s), eval_term(t)) {
            (Ok(a), Ok(b)) => a == b,
            _ => s == t,
        }
    }
    match (a, b) {
        (Formula::PosLit(r1, a1, b1), Formula::PosLit(r2, a2, b2))
        | (Formula::NegLit(r1, a1, b1), Formula::NegLit(r2, a2, b2)) => {
            r1 == r2 && term_equiv(a1, a2) && term_equiv(b1, b2)
        }
        (Formula::In(t1, u1), Formula::In(t2, u2))
        | (Formula::NotIn(t1, u1), Formula::NotIn(t2, u2)) => u1 == u2 && term_equiv(t1, t2),
        (Formula::And(a1, b1), Formula::And(a2, b2))
        | (Formula::Or(a1, b1), Formula::Or(a2, b2)) => {
            equal_modulo_terms(a1, a2) && equal_modulo_terms(b1, b2)
        }
        (Formula::ForallNum(x1, b1), Formula::ForallNum(x2, b2))
        | (Formula::ExistsNum(x1, b1), Formula::ExistsNum(x2, b2))
        | (Formula::ForallSet(x1, b1), Formula::ForallSet(x2, b2))
        | (Formula::ExistsSet(x1, b1), Formula::ExistsSet(x2, b2)) => {
            x1 == x2 && equal_modulo_terms(b1, b2)
        }
        _ => false,
    }
}

// ---------------------------------------------------------------------------
// Bound transforms
// ---------------------------------------------------------------------------

/// The cut-reduction bound map: one degree step costs one omega power.
pub fn cut_reduce_bound(alpha: &OrdinalTerm) -> OrdinalTerm {
    omega_pow(alpha)
}

/// The collapsing bound map.
pub fn collapse_bound(alpha: &OrdinalTerm) -> OrdinalTerm {
    OrdinalTerm::theta(alpha.clone())
}

/// The additive bound of the reduction lemma: requires the added bound to
/// sit at or below the least part of the left summand.
pub fn add_bound(
    wo: &WellOrdering,
    alpha: &OrdinalTerm,
    delta: &OrdinalTerm,
) -> Result<OrdinalTerm, BoundsError> {
    if delta == &OrdinalTerm::Zero {
        return Ok(alpha.clone());
    }
    let parts = alpha.parts();
    let Some(last) = parts.last() else {
        return Err(BoundsError::EmptySum);
    };
    let least = match last {
        Principal::Atom(a) => a.clone(),
        p @ Principal::WPow(_) => OrdinalTerm::Sum(vec![p.clone()]),
    };
    if cmp(wo, delta, &least) == Ordering::Greater {
        return Err(BoundsError::ShapeViolation {
            delta: print(delta),
            least: print(&least),
        });
    }
    Ok(add(wo, alpha, delta))
}

/// The embedding bound for a tree node: the node's epsilon term plus a
/// finite offset.
pub fn embed_bound(wo: &WellOrdering, u: u64, k: u64) -> Result<OrdinalTerm, BoundsError> {
    if !wo.carrier_contains(u) {
        return Err(BoundsError::OffCarrier { index: u });
    }
    Ok(add(wo, &OrdinalTerm::E(u), &OrdinalTerm::numeral(k)))
}

/// The final collapse bound: the collapse of a finite tower over the
/// bottom node's epsilon term plus a finite offset.
pub fn final_bound(wo: &WellOrdering, u0: u64, n: u32, m: u64) -> Result<OrdinalTerm, BoundsError> {
    if !wo.carrier_contains(u0) {
        return Err(BoundsError::OffCarrier { index: u0 });
    }
    let base = add(wo, &OrdinalTerm::E(u0), &OrdinalTerm::numeral(m));
    Ok(collapse_bound(&omega_tower(n, &base)))
}

// ---------------------------------------------------------------------------
// Step file format
// ---------------------------------------------------------------------------

/// Serialized judgment: term and grade in their canonical grammars,
/// formulas as canonical texts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JudgmentFile {
    pub bound: String,
    pub degree: String,
    pub sequent: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessFile {
    pub side: Vec<String>,
    pub beta: String,
    #[serde(rename = "claimed-bound")]
    pub claimed_bound: String,
}

/// On-disk form of an [`InferenceInstance`], as consumed by
/// `thetax bounds check --step <file>`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepFile {
    pub rule: String,
    /// Set spec the membership axioms refer to; defaults to the empty set.
    #[serde(default)]
    pub q: Option<String>,
    pub conclusion: JudgmentFile,
    #[serde(default)]
    pub premises: Vec<JudgmentFile>,
    #[serde(rename = "cut-formula", default)]
    pub cut_formula: Option<String>,
    #[serde(rename = "fundamental-function", default)]
    pub fund_fn: Option<String>,
    #[serde(default)]
    pub witnesses: Vec<WitnessFile>,
}

impl StepFile {
    pub fn resolve(&self, wo: &WellOrdering) -> Result<(QOracle, InferenceInstance), BoundsError> {
        let field = |field: &str, message: String| BoundsError::BadStepFile {
            field: field.to_string(),
            message,
        };
        let judgment = |j: &JudgmentFile, name: &str| -> Result<Judgment, BoundsError> {
            Ok(Judgment {
                bound: crate::term::parse(&j.bound, wo)
                    .map_err(|e| field(&format!("{name}.bound"), e.to_string()))?,
                degree: parse_grade(&j.degree)
                    .ok_or_else(|| field(&format!("{name}.degree"), "bad grade".into()))?,
                sequent: j
                    .sequent
                    .iter()
                    .map(|t| logic::parse_formula(t))
                    .collect::<Result<Sequent, _>>()
                    .map_err(|e| field(&format!("{name}.sequent"), e.to_string()))?,
            })
        };
        let q = match &self.q {
            Some(spec) => QOracle::parse_spec(spec).map_err(|e| field("q", e.to_string()))?,
            None => QOracle::Finite(Default::default()),
        };
        let inst = InferenceInstance {
            rule: RuleKind::from_name(&self.rule)?,
            conclusion: judgment(&self.conclusion, "conclusion")?,
            premises: self
                .premises
                .iter()
                .enumerate()
                .map(|(k, j)| judgment(j, &format!("premises[{k}]")))
                .collect::<Result<_, _>>()?,
            cut_formula: self
                .cut_formula
                .as_ref()
                .map(|t| logic::parse_formula(t))
                .transpose()
                .map_err(|e| field("cut-formula", e.to_string()))?,
            fund_fn: self
                .fund_fn
                .as_ref()
                .map(|t| crate::arith::parse_fundfn(t, wo))
                .transpose()
                .map_err(|e| field("fundamental-function", e))?,
            witnesses: self
                .witnesses
                .iter()
                .enumerate()
                .map(|(k, w)| -> Result<OmegaWitness, BoundsError> {
                    Ok(OmegaWitness {
                        side: w
                            .side
                            .iter()
                            .map(|t| logic::parse_formula(t))
                            .collect::<Result<Sequent, _>>()
                            .map_err(|e| field(&format!("witnesses[{k}].side"), e.to_string()))?,
                        beta: crate::term::parse(&w.beta, wo)
                            .map_err(|e| field(&format!("witnesses[{k}].beta"), e.to_string()))?,
                        claimed: crate::term::parse(&w.claimed_bound, wo).map_err(|e| {
                            field(&format!("witnesses[{k}].claimed-bound"), e.to_string())
                        })?,
                    })
                })
                .collect::<Result<_, _>>()?,
        };
        Ok((q, inst))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{parse_fundfn, times_nat};
    use crate::logic::parse_formula;
    use crate::term::parse;
    use crate::wellorder::{wo_finite, wo_nat};

    fn p(text: &str) -> OrdinalTerm {
        parse(text, &wo_nat()).unwrap()
    }

    fn empty_q() -> QOracle {
        QOracle::Finite(Default::default())
    }

    fn judgment(bound: &str, degree: &str, formulas: &[&str]) -> Judgment {
        Judgment {
            bound: p(bound),
            degree: parse_grade(degree).unwrap(),
            sequent: formulas.iter().map(|t| parse_formula(t).unwrap()).collect(),
        }
    }

    #[test]
    fn bound_maps() {
        let wo = wo_nat();
        assert_eq!(cut_reduce_bound(&p("1")), p("w(1)"));
        assert_eq!(cut_reduce_bound(&p("E(0)")), p("E(0)"));
        assert_eq!(collapse_bound(&p("0")), p("th(0)"));
        assert_eq!(
            add_bound(&wo, &p("w(1) + 1"), &p("1")).unwrap(),
            p("w(1) + 2")
        );
        assert!(matches!(
            add_bound(&wo, &p("w(1) + 1"), &p("w(1)")),
            Err(BoundsError::ShapeViolation { .. })
        ));
        assert!(matches!(
            add_bound(&wo, &p("0"), &p("1")),
            Err(BoundsError::EmptySum)
        ));
        assert_eq!(add_bound(&wo, &p("0"), &p("0")).unwrap(), p("0"));
    }

    #[test]
    fn embedding_bounds() {
        let wo = wo_finite(3);
        assert_eq!(embed_bound(&wo, 1, 0).unwrap(), OrdinalTerm::E(1));
        assert_eq!(embed_bound(&wo, 1, 2).unwrap(), p("E(1) + 2"));
        assert!(matches!(
            embed_bound(&wo, 7, 0),
            Err(BoundsError::OffCarrier { index: 7 })
        ));
        assert_eq!(final_bound(&wo, 0, 0, 0).unwrap(), p("th(E(0))"));
        assert_eq!(final_bound(&wo, 0, 1, 2).unwrap(), p("th(w(E(0) + 2))"));
        // Towers over a bare epsilon term collapse back onto it.
        assert_eq!(final_bound(&wo, 0, 3, 0).unwrap(), p("th(E(0))"));
        for (u, n, m) in [(0, 0, 0), (1, 2, 3), (2, 4, 4)] {
            let t = final_bound(&wo, u, n, m).unwrap();
            assert!(crate::term::validate(&wo, &t).is_empty());
        }
    }

    #[test]
    fn cut_step_accepted_and_degree_checked() {
        let wo = wo_nat();
        let inst = InferenceInstance {
            rule: RuleKind::Cut,
            conclusion: judgment("E(0) + 2", "w", &["0 in U_1"]),
            premises: vec![
                judgment("E(0)", "3", &["0 in U_1", "0=0"]),
                judgment("E(0)", "3", &["0 in U_1", "0!=0"]),
            ],
            cut_formula: Some(parse_formula("0=0").unwrap()),
            fund_fn: None,
            witnesses: vec![],
        };
        let report = check_step(&wo, &empty_q(), &inst);
        assert!(report.accepted(), "{:?}", report.failures);

        let mut too_high = inst.clone();
        too_high.conclusion.degree = Grade::Finite(0);
        assert!(!check_step(&wo, &empty_q(), &too_high).accepted());
    }

    #[test]
    fn or_step_requires_strict_majorization() {
        let wo = wo_nat();
        let or = "(0=0 | 0<0)";
        let inst = InferenceInstance {
            rule: RuleKind::Or,
            conclusion: judgment("w(1)", "0", &[or]),
            premises: vec![judgment("w(1)", "0", &["0=0"])],
            cut_formula: None,
            fund_fn: None,
            witnesses: vec![],
        };
        let report = check_step(&wo, &empty_q(), &inst);
        assert!(!report.accepted());
        let mut fixed = inst;
        fixed.premises[0].bound = p("2");
        assert!(check_step(&wo, &empty_q(), &fixed).accepted());
    }

    #[test]
    fn axiom_steps() {
        let wo = wo_nat();
        let q = QOracle::Finite([4].into());
        let ax = |rule, formulas: &[&str]| InferenceInstance {
            rule,
            conclusion: judgment("0", "0", formulas),
            premises: vec![],
            cut_formula: None,
            fund_fn: None,
            witnesses: vec![],
        };
        assert!(check_step(&wo, &q, &ax(RuleKind::AxiomTrueLit, &["0<0'"])).accepted());
        assert!(!check_step(&wo, &q, &ax(RuleKind::AxiomTrueLit, &["0<0"])).accepted());
        assert!(check_step(&wo, &q, &ax(RuleKind::AxiomQ, &["0'''' in U_0"])).accepted());
        assert!(!check_step(&wo, &q, &ax(RuleKind::AxiomQ, &["0' in U_0"])).accepted());
        assert!(check_step(&wo, &q, &ax(RuleKind::AxiomNotQ, &["0' notin U_0"])).accepted());
        // Matching membership pair with equivalent terms, grade 0.
        assert!(check_step(
            &wo,
            &q,
            &ax(RuleKind::AxiomMatch, &["(0+0') in U_2", "0' notin U_2"])
        )
        .accepted());
        // Empty-sequent sanity.
        assert!(!check_step(&wo, &q, &ax(RuleKind::AxiomTrueLit, &[])).accepted());
    }

    #[test]
    fn exists1_accepts_instances_already_present() {
        let wo = wo_nat();
        // The witness instance coincides with a side formula, so the
        // premise equals the rest of the conclusion as a set.
        let inst = InferenceInstance {
            rule: RuleKind::Exists1,
            conclusion: judgment("w(1)", "0", &["0=0'", "ex x_0. x_0=0'"]),
            premises: vec![judgment("1", "0", &["0=0'"])],
            cut_formula: None,
            fund_fn: None,
            witnesses: vec![],
        };
        let report = check_step(&wo, &empty_q(), &inst);
        assert!(report.accepted(), "{:?}", report.failures);
        // Without any instance present the same shape is rejected.
        let bad = InferenceInstance {
            rule: RuleKind::Exists1,
            conclusion: judgment("w(1)", "0", &["0<0", "ex x_0. x_0=0'"]),
            premises: vec![judgment("1", "0", &["0<0"])],
            cut_formula: None,
            fund_fn: None,
            witnesses: vec![],
        };
        assert!(!check_step(&wo, &empty_q(), &bad).accepted());
    }

    #[test]
    fn forall2_eigenvariable_condition() {
        let wo = wo_nat();
        let inst = InferenceInstance {
            rule: RuleKind::Forall2,
            conclusion: judgment("w(1)", "0", &["ALL X_0. 0 in U_0"]),
            premises: vec![judgment("1", "0", &["0 in U_3"])],
            cut_formula: None,
            fund_fn: None,
            witnesses: vec![],
        };
        assert!(check_step(&wo, &empty_q(), &inst).accepted());
        // Eigenvariable occurring in the conclusion is rejected.
        let mut bad = inst;
        bad.conclusion = judgment("w(1)", "0", &["ALL X_0. 0 in U_0", "0 in U_3"]);
        bad.premises = vec![judgment("1", "0", &["0 in U_3"])];
        assert!(!check_step(&wo, &empty_q(), &bad).accepted());
    }

    #[test]
    fn exists2_needs_non_arithmetic_matrix() {
        let wo = wo_nat();
        let inst = InferenceInstance {
            rule: RuleKind::Exists2,
            conclusion: judgment("w(1)", "w", &["EX X_0. EX X_1. 0 in U_1"]),
            premises: vec![judgment("2", "w", &["EX X_0. 0 in U_0"])],
            cut_formula: None,
            fund_fn: None,
            witnesses: vec![],
        };
        let report = check_step(&wo, &empty_q(), &inst);
        assert!(report.accepted(), "{:?}", report.failures);
        let bad = InferenceInstance {
            rule: RuleKind::Exists2,
            conclusion: judgment("w(1)", "w", &["EX X_0. 0 in U_0"]),
            premises: vec![judgment("2", "w", &["0 in U_9"])],
            cut_formula: None,
            fund_fn: None,
            witnesses: vec![],
        };
        assert!(!check_step(&wo, &empty_q(), &bad).accepted());
    }

    #[test]
    fn omega_rule_spot_checks() {
        let wo = wo_nat();
        let inst = InferenceInstance {
            rule: RuleKind::OmegaRule,
            conclusion: judgment("w(1)", "0", &["all x_0. x_0!<x_0"]),
            premises: (0..3)
                .map(|m| {
                    let lit = format!("0{} !< 0{}", "'".repeat(m), "'".repeat(m));
                    judgment("3", "0", &["all x_0. x_0!<x_0", &lit])
                })
                .collect(),
            cut_formula: None,
            fund_fn: None,
            witnesses: vec![],
        };
        let report = check_step(&wo, &empty_q(), &inst);
        assert!(report.accepted(), "{:?}", report.failures);
        assert!(report.notes.iter().any(|n| n.contains("spot-checked")));
        // A premise with a different bound breaks the common-bound demand.
        let mut bad = inst;
        bad.premises[1].bound = p("2");
        assert!(!check_step(&wo, &empty_q(), &bad).accepted());
    }

    #[test]
    fn big_omega_rule_conditions() {
        let wo = wo_nat();
        let f = parse_fundfn("Om + id", &wo).unwrap();
        let omega2 = times_nat(&p("Om"), 2).unwrap();
        let pi11 = "ALL X_0. 0 in U_0";
        let inst = InferenceInstance {
            rule: RuleKind::BigOmegaRule,
            conclusion: Judgment {
                bound: omega2.clone(),
                degree: Grade::OMEGA,
                sequent: [parse_formula("0 in U_5").unwrap()].into_iter().collect(),
            },
            premises: vec![judgment("Om", "w", &["0 in U_5", pi11])],
            cut_formula: None,
            fund_fn: Some(f),
            witnesses: vec![OmegaWitness {
                side: [parse_formula("0=0").unwrap()].into_iter().collect(),
                beta: p("th(0)"),
                claimed: p("Om + th(0)"),
            }],
        };
        let report = check_step(&wo, &empty_q(), &inst);
        assert!(report.accepted(), "{:?}", report.failures);
        // Condition (a) holds with equality here: f(Om) = Om + Om.
        let mut bad = inst.clone();
        bad.witnesses[0].claimed = p("Om + th(0) + 1");
        assert!(!check_step(&wo, &empty_q(), &bad).accepted());
        let mut bad = inst;
        bad.premises[0].bound = p("Om + 1");
        assert!(!check_step(&wo, &empty_q(), &bad).accepted());
    }

    #[test]
    fn step_file_roundtrip() {
        let wo = wo_nat();
        let text = r#"{
            "rule": "cut",
            "q": "{1}",
            "conclusion": {"bound": "E(0) + 2", "degree": "w", "sequent": ["0 in U_1"]},
            "premises": [
                {"bound": "E(0)", "degree": "3", "sequent": ["0 in U_1", "0=0"]},
                {"bound": "E(0)", "degree": "3", "sequent": ["0 in U_1", "0!=0"]}
            ],
            "cut-formula": "0=0"
        }"#;
        let file: StepFile = serde_json::from_str(text).unwrap();
        let (q, inst) = file.resolve(&wo).unwrap();
        assert!(q.contains(1));
        assert!(check_step(&wo, &q, &inst).accepted());
        let bad: StepFile = serde_json::from_str(&text.replace("\"cut\"", "\"chop\"")).unwrap();
        assert!(matches!(
            bad.resolve(&wo),
            Err(BoundsError::UnknownRule { .. })
        ));
    }
}
