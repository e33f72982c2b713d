//! The ordinal notation term kernel: normalized terms, the `*` function,
//! the G complexity measure, parsing/printing, and bounded enumeration of
//! the term universe.
//!
//! Normalized terms are: `0`, `Om` (the uncountable anchor), `E(u)` (the
//! u-th epsilon number above it, one per carrier element of the parameter
//! ordering), `th(t)` (the collapse of `t`), and sums of additively
//! principal parts with non-increasing exponents. A principal part is
//! either an epsilon atom xi (with omega^xi = xi, i.e. `Om`, `E(u)` or a
//! `th` term) or `w(e)` = omega^e for a non-atom exponent `e`; the epsilon
//! collapse omega^xi = xi is therefore structural rather than a side
//! condition. A one-part sum whose part is an atom is stored as the atom
//! itself, so structural equality on normalized terms coincides with
//! ordinal equality.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::order;
use crate::wellorder::WellOrdering;

/// A normalized term of the notation system.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OrdinalTerm {
    Zero,
    Omega,
    E(u64),
    Theta(Box<OrdinalTerm>),
    /// Non-increasing sum of principal parts, length >= 1. A length-1 sum
    /// always has a `WPow` part (a lone atom is stored as the atom).
    Sum(Vec<Principal>),
}

/// An additively principal part of a sum.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Principal {
    /// An epsilon atom: `Omega`, `E(u)`, or `Theta(t)`.
    Atom(OrdinalTerm),
    /// `omega^e` for an exponent that is not an epsilon atom.
    WPow(OrdinalTerm),
}

impl Principal {
    /// The exponent of the part: an atom is its own exponent (xi = omega^xi).
    pub fn exponent(&self) -> &OrdinalTerm {
        match self {
            Principal::Atom(a) => a,
            Principal::WPow(e) => e,
        }
    }
}

impl OrdinalTerm {
    pub fn theta(arg: OrdinalTerm) -> OrdinalTerm {
        OrdinalTerm::Theta(Box::new(arg))
    }

    /// The finite ordinal `n` as a term (a sum of n copies of omega^0).
    pub fn numeral(n: u64) -> OrdinalTerm {
        if n == 0 {
            OrdinalTerm::Zero
        } else {
            OrdinalTerm::Sum(vec![Principal::WPow(OrdinalTerm::Zero); n as usize])
        }
    }

    pub fn one() -> OrdinalTerm {
        OrdinalTerm::numeral(1)
    }

    /// True for terms xi with omega^xi = xi: `Omega`, `E(u)`, `Theta(_)`.
    pub fn is_epsilon_atom(&self) -> bool {
        matches!(
            self,
            OrdinalTerm::Omega | OrdinalTerm::E(_) | OrdinalTerm::Theta(_)
        )
    }

    /// The principal parts of the term viewed as a (possibly empty) sum.
    pub fn parts(&self) -> Vec<Principal> {
        match self {
            OrdinalTerm::Zero => Vec::new(),
            OrdinalTerm::Sum(ps) => ps.clone(),
            atom => vec![Principal::Atom(atom.clone())],
        }
    }

    /// Rebuild a term from principal parts (assumed non-increasing).
    pub(crate) fn from_parts(parts: Vec<Principal>) -> OrdinalTerm {
        match parts.len() {
            0 => OrdinalTerm::Zero,
            1 => match parts.into_iter().next().unwrap() {
                Principal::Atom(a) => a,
                p @ Principal::WPow(_) => OrdinalTerm::Sum(vec![p]),
            },
            _ => OrdinalTerm::Sum(parts),
        }
    }

    /// Is the term `Some(n)` for a finite ordinal n (including 0)?
    pub fn as_numeral(&self) -> Option<u64> {
        match self {
            OrdinalTerm::Zero => Some(0),
            OrdinalTerm::Sum(ps)
                if ps
                    .iter()
                    .all(|p| matches!(p, Principal::WPow(OrdinalTerm::Zero))) =>
            {
                Some(ps.len() as u64)
            }
            _ => None,
        }
    }

    /// Node count: atoms count 1, `th` and `w(.)` count 1 plus their
    /// argument, a sum counts the total of its parts.
    pub fn size(&self) -> u32 {
        match self {
            OrdinalTerm::Zero | OrdinalTerm::Omega | OrdinalTerm::E(_) => 1,
            OrdinalTerm::Theta(t) => 1 + t.size(),
            OrdinalTerm::Sum(ps) => ps
                .iter()
                .map(|p| match p {
                    Principal::Atom(a) => a.size(),
                    Principal::WPow(e) => 1 + e.size(),
                })
                .sum(),
        }
    }

    /// All E-indices mentioned in the term.
    pub fn e_indices(&self, out: &mut Vec<u64>) {
        match self {
            OrdinalTerm::Zero | OrdinalTerm::Omega => {}
            OrdinalTerm::E(u) => out.push(*u),
            OrdinalTerm::Theta(t) => t.e_indices(out),
            OrdinalTerm::Sum(ps) => {
                for p in ps {
                    p.exponent().e_indices(out);
                }
            }
        }
    }
}

/// Unnormalized input trees over the raw constructors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RawTerm {
    Zero,
    Omega,
    E(u64),
    Theta(Box<RawTerm>),
    WPow(Box<RawTerm>),
    Add(Box<RawTerm>, Box<RawTerm>),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TermError {
    #[error("E-index {index} is outside the carrier of {ordering}")]
    IndexOutsideCarrier { index: u64, ordering: String },
    #[error("sum parts are not non-increasing at part {position}: {left} < {right}")]
    MisorderedSum {
        position: usize,
        left: String,
        right: String,
    },
    #[error("term universe exceeds the cardinality cap {cap}")]
    UniverseTooLarge { cap: usize },
}

/// Normalize a raw term tree.
///
/// Collapses omega^xi to xi for epsilon atoms, flattens nested sums and
/// drops zero summands, and validates that the resulting principal parts
/// are non-increasing. Mis-ordered sums are rejected rather than sorted:
/// the raw term does not denote a normal form, and sorting would silently
/// perform ordinal addition (1+w and w+1 differ). Callers wanting ordinal
/// addition use `arith::add`.
pub fn normalize(wo: &WellOrdering, raw: &RawTerm) -> Result<OrdinalTerm, TermError> {
    let term = norm(wo, raw)?;
    if let OrdinalTerm::Sum(ps) = &term {
        for (i, win) in ps.windows(2).enumerate() {
            let (a, b) = (win[0].exponent(), win[1].exponent());
            if order::cmp(wo, a, b) == Ordering::Less {
                return Err(TermError::MisorderedSum {
                    position: i,
                    left: print(a),
                    right: print(b),
                });
            }
        }
    }
    Ok(term)
}

fn norm(wo: &WellOrdering, raw: &RawTerm) -> Result<OrdinalTerm, TermError> {
    Ok(match raw {
        RawTerm::Zero => OrdinalTerm::Zero,
        RawTerm::Omega => OrdinalTerm::Omega,
        RawTerm::E(u) => {
            if !wo.carrier_contains(*u) {
                return Err(TermError::IndexOutsideCarrier {
                    index: *u,
                    ordering: wo.description().to_string(),
                });
            }
            OrdinalTerm::E(*u)
        }
        RawTerm::Theta(t) => OrdinalTerm::theta(norm(wo, t)?),
        RawTerm::WPow(e) => {
            let e = norm(wo, e)?;
            if e.is_epsilon_atom() {
                e
            } else {
                OrdinalTerm::Sum(vec![Principal::WPow(e)])
            }
        }
        RawTerm::Add(a, b) => {
            let mut parts = norm(wo, a)?.parts();
            parts.extend(norm(wo, b)?.parts());
            // Ordering of the flattened parts is validated once at the top.
            OrdinalTerm::from_parts(parts)
        }
    })
}

/// A single invariant violation found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Path into the term, e.g. `th.sum[2]`.
    pub path: String,
    pub message: String,
}

/// Check every structural invariant of a term, reporting each violation
/// with a path into the term. An empty report means the term is normalized
/// over `wo`.
pub fn validate(wo: &WellOrdering, t: &OrdinalTerm) -> Vec<Violation> {
    let mut out = Vec::new();
    check(wo, t, "root", &mut out);
    out
}

fn check(wo: &WellOrdering, t: &OrdinalTerm, path: &str, out: &mut Vec<Violation>) {
    match t {
        OrdinalTerm::Zero | OrdinalTerm::Omega => {}
        OrdinalTerm::E(u) => {
            if !wo.carrier_contains(*u) {
                out.push(Violation {
                    path: path.to_string(),
                    message: format!("E-index {u} outside carrier of {wo}"),
                });
            }
        }
        OrdinalTerm::Theta(arg) => check(wo, arg, &format!("{path}.th"), out),
        OrdinalTerm::Sum(ps) => {
            if ps.is_empty() {
                out.push(Violation {
                    path: path.to_string(),
                    message: "empty sum".to_string(),
                });
            }
            if ps.len() == 1 && matches!(ps[0], Principal::Atom(_)) {
                out.push(Violation {
                    path: path.to_string(),
                    message: "one-part sum of an atom must be stored as the atom".to_string(),
                });
            }
            for (i, p) in ps.iter().enumerate() {
                let ppath = format!("{path}.sum[{i}]");
                match p {
                    Principal::Atom(a) => {
                        if !a.is_epsilon_atom() {
                            out.push(Violation {
                                path: ppath.clone(),
                                message: "atom part is not an epsilon atom".to_string(),
                            });
                        }
                        check(wo, a, &ppath, out);
                    }
                    Principal::WPow(e) => {
                        if e.is_epsilon_atom() {
                            out.push(Violation {
                                path: ppath.clone(),
                                message: "omega power with epsilon-atom exponent must collapse"
                                    .to_string(),
                            });
                        }
                        check(wo, e, &ppath, out);
                    }
                }
            }
            for (i, win) in ps.windows(2).enumerate() {
                let (a, b) = (win[0].exponent(), win[1].exponent());
                if validate(wo, a).is_empty()
                    && validate(wo, b).is_empty()
                    && order::cmp(wo, a, b) == Ordering::Less
                {
                    out.push(Violation {
                        path: format!("{path}.sum[{i}]"),
                        message: format!("parts increase: {} < {}", print(a), print(b)),
                    });
                }
            }
        }
    }
}

/// The `*` function: the largest collapse subterm relevant below the
/// uncountable anchor, or `0`.
///
/// `0* = Om* = E(u)* = 0`, `th(a)* = th(a)`, `(w^a)* = a*`, and a sum's
/// star is the comparator-maximum of its parts' stars. The result is
/// always `0` or a `th` term. Precondition: `t` normalized over `wo`.
pub fn star(wo: &WellOrdering, t: &OrdinalTerm) -> OrdinalTerm {
    match t {
        OrdinalTerm::Zero | OrdinalTerm::Omega | OrdinalTerm::E(_) => OrdinalTerm::Zero,
        OrdinalTerm::Theta(_) => t.clone(),
        OrdinalTerm::Sum(ps) => {
            let mut best = OrdinalTerm::Zero;
            for p in ps {
                let s = star(wo, p.exponent());
                if order::cmp(wo, &best, &s) == Ordering::Less {
                    best = s;
                }
            }
            best
        }
    }
}

/// The G complexity measure: atoms measure 0, a collapse adds one to its
/// argument, a sum adds one to the largest exponent measure.
///
/// Every comparison the comparator makes recursively is between terms of
/// strictly smaller joint measure, which is what makes it terminate.
pub fn g_complexity(t: &OrdinalTerm) -> u32 {
    match t {
        OrdinalTerm::Zero | OrdinalTerm::Omega | OrdinalTerm::E(_) => 0,
        OrdinalTerm::Theta(a) => g_complexity(a) + 1,
        OrdinalTerm::Sum(ps) => {
            ps.iter()
                .map(|p| g_complexity(p.exponent()))
                .max()
                .unwrap_or(0)
                + 1
        }
    }
}

// ---------------------------------------------------------------------------
// Printing
//
// Canonical grammar:
//   term := "0" | nat | "Om" | "E(" nat ")" | "th(" term ")" | "w(" term ")"
//         | term " + " term
// `+` is left-associative, `w(t)` is omega^t, and decimal numerals >= 1 are
// sugar for sums of omega^0. A numeral run at the tail of a larger sum
// prints as a decimal; a pure numeral in exponent position prints expanded
// (so omega prints "w(w(0))", and omega+1 prints "w(w(0)) + 1").
// ---------------------------------------------------------------------------

/// Render a term in the canonical grammar.
pub fn print(t: &OrdinalTerm) -> String {
    print_in(t, false)
}

fn print_in(t: &OrdinalTerm, exponent_position: bool) -> String {
    if let Some(n) = t.as_numeral() {
        if !exponent_position || n == 0 {
            return n.to_string();
        }
        return vec!["w(0)"; n as usize].join(" + ");
    }
    match t {
        OrdinalTerm::Zero => "0".to_string(),
        OrdinalTerm::Omega => "Om".to_string(),
        OrdinalTerm::E(u) => format!("E({u})"),
        OrdinalTerm::Theta(a) => format!("th({})", print_in(a, false)),
        OrdinalTerm::Sum(ps) => {
            let ones = ps
                .iter()
                .rev()
                .take_while(|p| matches!(p, Principal::WPow(OrdinalTerm::Zero)))
                .count();
            let mut pieces: Vec<String> = ps[..ps.len() - ones]
                .iter()
                .map(|p| match p {
                    Principal::Atom(a) => print_in(a, false),
                    Principal::WPow(e) => format!("w({})", print_in(e, true)),
                })
                .collect();
            if ones > 0 {
                pieces.push(ones.to_string());
            }
            pieces.join(" + ")
        }
    }
}

impl fmt::Display for OrdinalTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", print(self))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("parse error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error(transparent)]
    Term(#[from] TermError),
}

/// Parse a term in the canonical grammar and normalize it over `wo`.
pub fn parse(text: &str, wo: &WellOrdering) -> Result<OrdinalTerm, ParseError> {
    let raw = parse_raw(text)?;
    Ok(normalize(wo, &raw)?)
}

/// Parse a term in the canonical grammar without normalizing.
pub fn parse_raw(text: &str) -> Result<RawTerm, ParseError> {
    let mut p = Parser {
        bytes: text.as_bytes(),
        pos: 0,
    };
    let t = p.term()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.err("trailing input"));
    }
    Ok(t)
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, message: &str) -> ParseError {
        ParseError::Syntax {
            position: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, text: &str) -> bool {
        self.skip_ws();
        if self.bytes[self.pos..].starts_with(text.as_bytes()) {
            self.pos += text.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, text: &str) -> Result<(), ParseError> {
        if self.eat(text) {
            Ok(())
        } else {
            Err(self.err(&format!("expected {text:?}")))
        }
    }

    fn nat(&mut self) -> Result<u64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a number"));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.err("number too large"))
    }

    fn term(&mut self) -> Result<RawTerm, ParseError> {
        let mut acc = self.atom()?;
        while self.eat("+") {
            let rhs = self.atom()?;
            acc = RawTerm::Add(Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<RawTerm, ParseError> {
        if self.eat("Om") {
            return Ok(RawTerm::Omega);
        }
        if self.eat("E") {
            self.expect("(")?;
            let u = self.nat()?;
            self.expect(")")?;
            return Ok(RawTerm::E(u));
        }
        if self.eat("th") {
            self.expect("(")?;
            let t = self.term()?;
            self.expect(")")?;
            return Ok(RawTerm::Theta(Box::new(t)));
        }
        if self.eat("w") {
            self.expect("(")?;
            let t = self.term()?;
            self.expect(")")?;
            return Ok(RawTerm::WPow(Box::new(t)));
        }
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let n = self.nat()?;
                // Numeral sugar: n is a sum of n copies of omega^0.
                let one = || RawTerm::WPow(Box::new(RawTerm::Zero));
                let mut t = if n == 0 { RawTerm::Zero } else { one() };
                for _ in 1..n {
                    t = RawTerm::Add(Box::new(t), Box::new(one()));
                }
                Ok(t)
            }
            _ => Err(self.err("expected a term")),
        }
    }
}

// ---------------------------------------------------------------------------
// Bounded enumeration of the term universe
// ---------------------------------------------------------------------------

/// A finite fragment of the term universe, used as the substrate for the
/// exhaustive order suites and the clause-closure oracle.
#[derive(Debug, Clone)]
pub struct TermUniverse {
    pub ordering: WellOrdering,
    /// All normalized terms within the bounds, in (size, structural) order.
    pub terms: Vec<OrdinalTerm>,
    pub g_bound: u32,
    pub size_bound: u32,
    pub e_prefix: usize,
}

const UNIVERSE_CAP: usize = 1 << 21;

/// Enumerate every normalized term with `g_complexity <= g_bound`,
/// `size <= size_bound`, and E-indices among the first `e_prefix` carrier
/// elements. Deterministic: output is sorted by (size, structural order).
pub fn enumerate_terms(
    wo: &WellOrdering,
    g_bound: u32,
    size_bound: u32,
    e_prefix: usize,
) -> Result<TermUniverse, TermError> {
    let e_indices = wo.prefix(e_prefix);
    // by_size[s] = all terms of size s (index 0 unused).
    let mut by_size: Vec<Vec<OrdinalTerm>> = vec![Vec::new(); size_bound as usize + 1];
    let mut total = 0usize;
    let push = |bucket: &mut Vec<OrdinalTerm>, t: OrdinalTerm, total: &mut usize| {
        *total += 1;
        bucket.push(t);
    };

    for s in 1..=size_bound {
        let mut bucket = Vec::new();
        if s == 1 {
            push(&mut bucket, OrdinalTerm::Zero, &mut total);
            push(&mut bucket, OrdinalTerm::Omega, &mut total);
            for &u in &e_indices {
                push(&mut bucket, OrdinalTerm::E(u), &mut total);
            }
        } else {
            // th(t) for every t of size s-1 within the g budget.
            for t in &by_size[s as usize - 1] {
                if g_complexity(t) < g_bound {
                    push(&mut bucket, OrdinalTerm::theta(t.clone()), &mut total);
                }
            }
        }
        // Sums with parts drawn from strictly smaller terms: every multiset
        // of principal parts sorts uniquely into a non-increasing sum, so
        // enumerate non-increasing part sequences directly. A one-part sum
        // is only a term when the part is a w-power.
        let mut principals: Vec<(Principal, u32)> = Vec::new();
        for smaller in by_size.iter().take(s as usize) {
            for t in smaller {
                let part = if t.is_epsilon_atom() {
                    (Principal::Atom(t.clone()), t.size())
                } else {
                    (Principal::WPow(t.clone()), t.size() + 1)
                };
                if part.1 <= s && g_complexity(t) < g_bound {
                    principals.push(part);
                }
            }
        }
        // Non-increasing by exponent; exponents are pairwise distinct.
        principals.sort_by(|a, b| order::cmp(wo, b.0.exponent(), a.0.exponent()));
        let mut stack: Vec<Principal> = Vec::new();
        sums_rec(&principals, 0, s, &mut stack, &mut bucket, &mut total);
        if total > UNIVERSE_CAP {
            return Err(TermError::UniverseTooLarge { cap: UNIVERSE_CAP });
        }
        bucket.sort();
        bucket.dedup();
        by_size[s as usize] = bucket;
    }

    let terms: Vec<OrdinalTerm> = by_size.into_iter().flatten().collect();
    Ok(TermUniverse {
        ordering: wo.clone(),
        terms,
        g_bound,
        size_bound,
        e_prefix,
    })
}

fn sums_rec(
    principals: &[(Principal, u32)],
    from: usize,
    budget: u32,
    stack: &mut Vec<Principal>,
    out: &mut Vec<OrdinalTerm>,
    total: &mut usize,
) {
    if budget == 0 {
        let ok = stack.len() >= 2 || matches!(stack.as_slice(), [Principal::WPow(_)]);
        if ok {
            out.push(OrdinalTerm::Sum(stack.clone()));
            *total += 1;
        }
        return;
    }
    for (i, (p, psize)) in principals.iter().enumerate().skip(from) {
        if *psize <= budget {
            stack.push(p.clone());
            // Allow repeats of the same part (equal exponents are fine).
            sums_rec(principals, i, budget - psize, stack, out, total);
            stack.pop();
        }
    }
}

impl TermUniverse {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Index lookup for oracle tables.
    pub fn index_map(&self) -> std::collections::HashMap<&OrdinalTerm, usize> {
        self.terms.iter().enumerate().map(|(i, t)| (t, i)).collect()
    }
}

/// Check that terms in the universe are pairwise distinct (used by tests).
pub fn all_distinct(terms: &[OrdinalTerm]) -> bool {
    let mut seen = HashSet::new();
    terms.iter().all(|t| seen.insert(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wellorder::{wo_finite, wo_nat};

    fn p(text: &str) -> OrdinalTerm {
        parse(text, &wo_nat()).unwrap()
    }

    #[test]
    fn normalize_collapses_epsilon_atoms() {
        let wo = wo_nat();
        let raw = RawTerm::WPow(Box::new(RawTerm::Omega));
        assert_eq!(normalize(&wo, &raw).unwrap(), OrdinalTerm::Omega);
        let raw = RawTerm::WPow(Box::new(RawTerm::Theta(Box::new(RawTerm::Zero))));
        assert_eq!(
            normalize(&wo, &raw).unwrap(),
            OrdinalTerm::theta(OrdinalTerm::Zero)
        );
    }

    #[test]
    fn normalize_keeps_repeated_principal_parts() {
        let wo = wo_nat();
        let raw = RawTerm::Add(
            Box::new(RawTerm::WPow(Box::new(RawTerm::Omega))),
            Box::new(RawTerm::WPow(Box::new(RawTerm::Omega))),
        );
        let omega2 = OrdinalTerm::Sum(vec![
            Principal::Atom(OrdinalTerm::Omega),
            Principal::Atom(OrdinalTerm::Omega),
        ]);
        assert_eq!(normalize(&wo, &raw).unwrap(), omega2);
    }

    #[test]
    fn normalize_rejects_misordered_sums() {
        let wo = wo_nat();
        // 1 + Om increases.
        let raw = RawTerm::Add(
            Box::new(RawTerm::WPow(Box::new(RawTerm::Zero))),
            Box::new(RawTerm::Omega),
        );
        assert!(matches!(
            normalize(&wo, &raw),
            Err(TermError::MisorderedSum { .. })
        ));
    }

    #[test]
    fn normalize_rejects_off_carrier_e() {
        let raw = RawTerm::E(5);
        assert!(matches!(
            normalize(&wo_finite(3), &raw),
            Err(TermError::IndexOutsideCarrier { index: 5, .. })
        ));
    }

    #[test]
    fn validate_reports_violations_with_paths() {
        let wo = wo_finite(3);
        assert!(validate(&wo, &p("th(Om)")).is_empty());
        let bad = OrdinalTerm::Sum(vec![
            Principal::WPow(OrdinalTerm::Zero),
            Principal::Atom(OrdinalTerm::Omega),
        ]);
        let report = validate(&wo, &bad);
        assert!(report.iter().any(|v| v.message.contains("increase")));
        let report = validate(&wo, &OrdinalTerm::E(5));
        assert_eq!(report.len(), 1);
        assert!(report[0].message.contains("outside carrier"));
    }

    #[test]
    fn star_base_cases() {
        let wo = wo_nat();
        assert_eq!(star(&wo, &OrdinalTerm::Zero), OrdinalTerm::Zero);
        assert_eq!(star(&wo, &OrdinalTerm::Omega), OrdinalTerm::Zero);
        assert_eq!(star(&wo, &OrdinalTerm::E(0)), OrdinalTerm::Zero);
        let t = p("th(Om)");
        assert_eq!(star(&wo, &t), t);
    }

    #[test]
    fn star_of_sum_takes_comparator_max() {
        let wo = wo_nat();
        assert_eq!(star(&wo, &p("Om + th(0)")), p("th(0)"));
        assert_eq!(star(&wo, &p("w(th(0) + 1)")), p("th(0)"));
    }

    #[test]
    fn g_measure() {
        assert_eq!(g_complexity(&OrdinalTerm::E(0)), 0);
        assert_eq!(g_complexity(&p("th(0)")), 1);
        // max(G(th 0), G(0)) + 1 = 2 for w(th(0)+...)-style sums.
        let t = OrdinalTerm::Sum(vec![
            Principal::WPow(p("th(0)")),
            Principal::WPow(OrdinalTerm::Zero),
        ]);
        assert_eq!(g_complexity(&t), 2);
        assert_eq!(g_complexity(&p("1")), 1);
    }

    #[test]
    fn parse_examples() {
        assert_eq!(
            p("th(Om + th(0))"),
            OrdinalTerm::theta(OrdinalTerm::Sum(vec![
                Principal::Atom(OrdinalTerm::Omega),
                Principal::Atom(OrdinalTerm::theta(OrdinalTerm::Zero)),
            ]))
        );
        assert_eq!(p("3"), OrdinalTerm::numeral(3));
        assert_eq!(print(&p("w(w(0))")), "w(w(0))");
        assert_eq!(p(" th( Om ) "), p("th(Om)"));
    }

    #[test]
    fn print_numeral_sugar() {
        assert_eq!(print(&OrdinalTerm::numeral(3)), "3");
        assert_eq!(print(&OrdinalTerm::Zero), "0");
        // Trailing numeral run prints as a decimal, exponent-position
        // numerals print expanded.
        let omega_plus_one = crate::arith::add(&wo_nat(), &p("w(1)"), &p("1"));
        assert_eq!(print(&omega_plus_one), "w(w(0)) + 1");
        assert_eq!(print(&p("w(2)")), "w(w(0) + w(0))");
        assert_eq!(print(&p("E(0) + 2")), "E(0) + 2");
    }

    #[test]
    fn whitespace_between_tokens_is_ignored() {
        assert_eq!(p("th ( Om + th( 0 ) )"), p("th(Om + th(0))"));
        assert_eq!(p("w (  w( 0 ))"), p("w(w(0))"));
        assert_eq!(p("E ( 3 ) + 2"), p("E(3) + 2"));
    }

    #[test]
    fn parse_errors_carry_positions() {
        match parse("th(Om", &wo_nat()) {
            Err(ParseError::Syntax { position, .. }) => assert_eq!(position, 5),
            other => panic!("expected syntax error, got {other:?}"),
        }
        assert!(parse("E(7)", &wo_finite(3)).is_err());
    }

    #[test]
    fn roundtrip_on_universe() {
        let wo = wo_finite(2);
        let universe = enumerate_terms(&wo, 2, 4, 2).unwrap();
        for t in &universe.terms {
            let back = parse(&print(t), &wo).unwrap();
            assert_eq!(&back, t, "roundtrip failed for {}", print(t));
        }
    }

    #[test]
    fn enumerate_g0_size2() {
        let wo = wo_finite(1);
        let universe = enumerate_terms(&wo, 0, 2, 1).unwrap();
        assert_eq!(
            universe.terms,
            vec![OrdinalTerm::Zero, OrdinalTerm::Omega, OrdinalTerm::E(0)]
        );
    }

    #[test]
    fn enumerate_grows_with_bounds() {
        let wo = wo_finite(1);
        let small = enumerate_terms(&wo, 0, 2, 1).unwrap();
        let bigger = enumerate_terms(&wo, 1, 2, 1).unwrap();
        assert!(bigger.len() > small.len());
        for t in &small.terms {
            assert!(bigger.terms.contains(t));
        }
        assert!(bigger.terms.contains(&p("th(0)")));
        assert!(bigger.terms.contains(&p("1")));
    }

    #[test]
    fn enumerated_terms_are_valid_and_within_bounds() {
        let wo = wo_finite(2);
        let universe = enumerate_terms(&wo, 2, 4, 2).unwrap();
        assert!(all_distinct(&universe.terms));
        for t in &universe.terms {
            assert!(validate(&wo, t).is_empty(), "invalid: {}", print(t));
            assert!(t.size() <= 4);
            assert!(g_complexity(t) <= 2);
        }
    }

    #[test]
    fn star_lands_in_zero_or_theta_and_shrinks_g() {
        let wo = wo_finite(2);
        let universe = enumerate_terms(&wo, 2, 4, 2).unwrap();
        for t in &universe.terms {
            let s = star(&wo, t);
            assert!(s == OrdinalTerm::Zero || matches!(s, OrdinalTerm::Theta(_)));
            assert!(g_complexity(&s) <= g_complexity(t));
        }
    }

    #[test]
    fn enumeration_regression_pin() {
        // Independent route: close the atom set under collapse, omega
        // powers and binary addition to a fixpoint, keeping only terms
        // within bounds. The enumerator must produce exactly that set.
        let wo = wo_finite(2);
        let (g_bound, size_bound) = (2u32, 4u32);
        let within = |t: &OrdinalTerm| t.size() <= size_bound && g_complexity(t) <= g_bound;
        let mut set: std::collections::BTreeSet<OrdinalTerm> = [
            OrdinalTerm::Zero,
            OrdinalTerm::Omega,
            OrdinalTerm::E(0),
            OrdinalTerm::E(1),
        ]
        .into_iter()
        .collect();
        loop {
            let snapshot: Vec<OrdinalTerm> = set.iter().cloned().collect();
            let before = set.len();
            let admit = |raw: &RawTerm, set: &mut std::collections::BTreeSet<OrdinalTerm>| {
                if let Ok(t) = normalize(&wo, raw) {
                    if within(&t) {
                        set.insert(t);
                    }
                }
            };
            for a in &snapshot {
                let ra = to_raw(a);
                admit(&RawTerm::Theta(Box::new(ra.clone())), &mut set);
                admit(&RawTerm::WPow(Box::new(ra.clone())), &mut set);
                for b in &snapshot {
                    admit(
                        &RawTerm::Add(Box::new(ra.clone()), Box::new(to_raw(b))),
                        &mut set,
                    );
                }
            }
            if set.len() == before {
                break;
            }
        }
        let universe = enumerate_terms(&wo, g_bound, size_bound, 2).unwrap();
        let enumerated: std::collections::BTreeSet<OrdinalTerm> =
            universe.terms.iter().cloned().collect();
        assert_eq!(enumerated, set);
        // Regression pin from the first run, cross-checked above.
        assert_eq!(universe.len(), 165);
    }

    fn to_raw(t: &OrdinalTerm) -> RawTerm {
        match t {
            OrdinalTerm::Zero => RawTerm::Zero,
            OrdinalTerm::Omega => RawTerm::Omega,
            OrdinalTerm::E(u) => RawTerm::E(*u),
            OrdinalTerm::Theta(a) => RawTerm::Theta(Box::new(to_raw(a))),
            OrdinalTerm::Sum(ps) => ps
                .iter()
                .map(|p| match p {
                    Principal::Atom(a) => to_raw(a),
                    Principal::WPow(e) => RawTerm::WPow(Box::new(to_raw(e))),
                })
                .reduce(|acc, x| RawTerm::Add(Box::new(acc), Box::new(x)))
                .expect("sums are nonempty"),
        }
    }

    #[test]
    fn theta_injectivity_over_universe() {
        let wo = wo_finite(2);
        let universe = enumerate_terms(&wo, 2, 4, 2).unwrap();
        for s in &universe.terms {
            for t in &universe.terms {
                assert_eq!(
                    OrdinalTerm::theta(s.clone()) == OrdinalTerm::theta(t.clone()),
                    s == t
                );
            }
        }
    }
}
