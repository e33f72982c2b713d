//! The total comparison of normalized terms, the majorization relation,
//! and the clause-closure oracle used to cross-check the comparator.
//!
//! Dispatch table for [`cmp`], by constructor pair (rows = left argument):
//!
//! |          | Zero | Omega | E(v)  | Theta | Sum   |
//! |----------|------|-------|-------|-------|-------|
//! | Zero     | EQ   | c2    | c2    | c2    | c2    |
//! | Omega    | c2   | EQ    | c3    | c4    | c7    |
//! | E(u)     | c2   | c3    | c3    | c4    | c7    |
//! | Theta    | c2   | c4    | c4    | c9/10 | c7    |
//! | Sum      | c2   | c7    | c7    | c7    | c8    |
//!
//! c2: zero is least. c3: the anchor sits below every `E(u)`, and E-terms
//! compare by the parameter ordering. c4: collapses sit below the anchor
//! and every `E(u)`. c7: a stored sum against an epsilon atom b compares
//! through the sum's leading exponent a1 — the sum is smaller iff a1 < b,
//! and b <= a1 puts b below the sum (a stored sum never equals an atom).
//! c8: sums compare lexicographically on their exponent sequences, a
//! proper prefix being smaller. c9/c10: theta terms compare by
//! `th(s) < th(t) iff (s < t and s* < th(t)) or th(s) <= t*`, the
//! completion of the two generative clauses into a decision procedure.
//!
//! Every recursive comparison strictly decreases the joint (max size,
//! size sum) of its arguments, so the recursion terminates.

use std::cmp::Ordering;

use thiserror::Error;

use crate::term::{star, OrdinalTerm, Principal, TermUniverse};
use crate::wellorder::WellOrdering;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OrderError {
    #[error("term mentions E-index {index} outside the carrier of {ordering}")]
    OffCarrier { index: u64, ordering: String },
}

/// Compare two normalized terms, validating E-indices against the carrier
/// first.
pub fn compare(
    wo: &WellOrdering,
    s: &OrdinalTerm,
    t: &OrdinalTerm,
) -> Result<Ordering, OrderError> {
    let mut indices = Vec::new();
    s.e_indices(&mut indices);
    t.e_indices(&mut indices);
    for u in indices {
        if !wo.carrier_contains(u) {
            return Err(OrderError::OffCarrier {
                index: u,
                ordering: wo.description().to_string(),
            });
        }
    }
    Ok(cmp(wo, s, t))
}

/// Comparison core. Precondition: all E-indices lie in the carrier of `wo`
/// (guaranteed for terms produced by `term::normalize` over `wo`).
pub fn cmp(wo: &WellOrdering, s: &OrdinalTerm, t: &OrdinalTerm) -> Ordering {
    use OrdinalTerm::*;
    match (s, t) {
        (Zero, Zero) => Ordering::Equal,
        (Zero, _) => Ordering::Less,
        (_, Zero) => Ordering::Greater,
        (Omega, Omega) => Ordering::Equal,
        (Omega, E(_)) => Ordering::Less,
        (E(_), Omega) => Ordering::Greater,
        (E(u), E(v)) => wo.less(*u, *v).expect("E-indices must lie in the carrier"),
        (Theta(_), Omega) | (Theta(_), E(_)) => Ordering::Less,
        (Omega, Theta(_)) | (E(_), Theta(_)) => Ordering::Greater,
        (Theta(a), Theta(b)) => cmp_thetas(wo, a, b),
        (Sum(ps), Sum(qs)) => cmp_sums(wo, ps, qs),
        (Sum(ps), _) => cmp_sum_vs_atom(wo, ps, t),
        (_, Sum(qs)) => cmp_sum_vs_atom(wo, qs, s).reverse(),
    }
}

/// A stored sum against an epsilon atom: decide through the leading
/// exponent. Equality is impossible (a stored sum is never a lone atom).
fn cmp_sum_vs_atom(wo: &WellOrdering, parts: &[Principal], atom: &OrdinalTerm) -> Ordering {
    match cmp(wo, parts[0].exponent(), atom) {
        Ordering::Less => Ordering::Less,
        // atom <= leading exponent puts the atom strictly below the sum.
        Ordering::Equal | Ordering::Greater => Ordering::Greater,
    }
}

/// Lexicographic comparison of exponent sequences; a proper prefix is
/// smaller. Equal sequences mean equal terms (parts are determined by
/// their exponents).
fn cmp_sums(wo: &WellOrdering, ps: &[Principal], qs: &[Principal]) -> Ordering {
    for (p, q) in ps.iter().zip(qs.iter()) {
        match cmp(wo, p.exponent(), q.exponent()) {
            Ordering::Equal => continue,
            decided => return decided,
        }
    }
    ps.len().cmp(&qs.len())
}

/// `th(a)` vs `th(b)`: equal iff the arguments are; otherwise
/// `th(a) < th(b) iff (a < b and a* < th(b)) or th(a) <= b*`.
fn cmp_thetas(wo: &WellOrdering, a: &OrdinalTerm, b: &OrdinalTerm) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    let less = (cmp(wo, a, b) == Ordering::Less
        && cmp_vs_theta(wo, &star(wo, a), b) == Ordering::Less)
        || theta_le(wo, a, &star(wo, b));
    if less {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

/// Compare a star value (always `0` or a theta term) against `th(b)`
/// without materializing the theta term.
fn cmp_vs_theta(wo: &WellOrdering, star_value: &OrdinalTerm, b: &OrdinalTerm) -> Ordering {
    match star_value {
        OrdinalTerm::Zero => Ordering::Less,
        OrdinalTerm::Theta(a) => cmp_thetas(wo, a, b),
        other => unreachable!("star produced a non-star value {other:?}"),
    }
}

/// `th(a) <= star_value`?
fn theta_le(wo: &WellOrdering, a: &OrdinalTerm, star_value: &OrdinalTerm) -> bool {
    match star_value {
        OrdinalTerm::Zero => false,
        OrdinalTerm::Theta(b) => cmp_thetas(wo, a, b) != Ordering::Greater,
        other => unreachable!("star produced a non-star value {other:?}"),
    }
}

/// The majorization relation: `s` is majorized by `t` when both `s < t`
/// and `th(s) < th(t)`.
pub fn triangle_less(wo: &WellOrdering, s: &OrdinalTerm, t: &OrdinalTerm) -> bool {
    cmp(wo, s, t) == Ordering::Less && cmp_thetas(wo, s, t) == Ordering::Less
}

/// Majorized-or-equal.
pub fn triangle_le(wo: &WellOrdering, s: &OrdinalTerm, t: &OrdinalTerm) -> bool {
    s == t || triangle_less(wo, s, t)
}

/// True exactly for `Omega`, `E(u)` and theta terms.
pub fn is_epsilon_term(t: &OrdinalTerm) -> bool {
    t.is_epsilon_atom()
}

// ---------------------------------------------------------------------------
// Clause-closure oracle
// ---------------------------------------------------------------------------

/// The strict-less table computed by [`oracle_compare`]: `lt[i][j]` says
/// term `i` is below term `j` in the least relation closed under the
/// comparison clauses.
pub struct OracleTable {
    pub n: usize,
    lt: Vec<bool>,
    /// Pairs (i, j), i < j, left undecided by the fixpoint; nonempty means
    /// a clause is missing.
    pub undecided: Vec<(usize, usize)>,
}

impl OracleTable {
    pub fn lt(&self, i: usize, j: usize) -> bool {
        self.lt[i * self.n + j]
    }

    pub fn is_total(&self) -> bool {
        self.undecided.is_empty()
    }
}

/// Compute the least relation on the universe closed under the comparison
/// clauses read as Horn rules, iterating to a fixpoint. Independent of
/// [`cmp`]: premises are looked up in the table under construction, never
/// computed by the comparator.
pub fn oracle_compare(universe: &TermUniverse) -> OracleTable {
    use OrdinalTerm::*;
    let wo = &universe.ordering;
    let terms = &universe.terms;
    let n = terms.len();
    let index = universe.index_map();
    let at = |t: &OrdinalTerm| -> usize {
        *index
            .get(t)
            .unwrap_or_else(|| panic!("universe not closed under subterms: {t}"))
    };

    // Per-term shape data, all resolved to universe indices up front.
    struct Info {
        exponents: Vec<usize>,
        star: usize,
        theta_arg: Option<usize>,
    }
    let infos: Vec<Info> = terms
        .iter()
        .map(|t| Info {
            exponents: t.parts().iter().map(|p| at(p.exponent())).collect(),
            star: at(&star(wo, t)),
            theta_arg: match t {
                Theta(a) => Some(at(a)),
                _ => None,
            },
        })
        .collect();

    let mut lt = vec![false; n * n];
    loop {
        let mut changed = false;
        let set = |lt: &mut Vec<bool>, i: usize, j: usize, changed: &mut bool| {
            if !lt[i * n + j] {
                lt[i * n + j] = true;
                *changed = true;
            }
        };
        for i in 0..n {
            for j in 0..n {
                if i == j || lt[i * n + j] {
                    continue;
                }
                let fires = match (&terms[i], &terms[j]) {
                    // Clause 2: zero below everything else.
                    (Zero, _) => true,
                    (_, Zero) => false,
                    // Clause 3: anchor below E-terms; E-terms by parameter.
                    (Omega, E(_)) => true,
                    (E(u), E(v)) => wo.lt(*u, *v),
                    // Clause 4: collapses below the anchor and E-terms.
                    (Theta(_), Omega) | (Theta(_), E(_)) => true,
                    // Clause 9 and 10 premises via the table.
                    (Theta(_), Theta(_)) => {
                        let (a, b) = (infos[i].theta_arg.unwrap(), infos[j].theta_arg.unwrap());
                        let clause9 = lt[a * n + b] && lt[infos[a].star * n + j];
                        let clause10 = i == infos[b].star || lt[i * n + infos[b].star];
                        clause9 || clause10
                    }
                    // Clause 7(i): sum below an atom when its leading
                    // exponent is.
                    (Sum(_), t) if t.is_epsilon_atom() => lt[infos[i].exponents[0] * n + j],
                    // Clause 7(ii): atom at or below the leading exponent
                    // sits below the sum.
                    (s, Sum(_)) if s.is_epsilon_atom() => {
                        let lead = infos[j].exponents[0];
                        i == lead || lt[i * n + lead]
                    }
                    // Clause 8: lexicographic with proper-prefix-smaller.
                    (Sum(_), Sum(_)) => {
                        let (pa, pb) = (&infos[i].exponents, &infos[j].exponents);
                        let mut fires = false;
                        let mut k = 0;
                        loop {
                            match (pa.get(k), pb.get(k)) {
                                (None, Some(_)) => {
                                    fires = true;
                                    break;
                                }
                                (Some(a), Some(b)) if a == b => k += 1,
                                (Some(a), Some(b)) => {
                                    fires = lt[a * n + b];
                                    break;
                                }
                                _ => break,
                            }
                        }
                        fires
                    }
                    _ => false,
                };
                if fires {
                    set(&mut lt, i, j, &mut changed);
                }
            }
        }
        if !changed {
            break;
        }
    }

    let mut undecided = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (lt[i * n + j], lt[j * n + i]);
            if a == b {
                // Either incomparable or (a bug) related both ways.
                undecided.push((i, j));
            }
        }
    }
    OracleTable { n, lt, undecided }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{enumerate_terms, g_complexity, parse};
    use crate::wellorder::{wo_finite, wo_nat};

    fn p(text: &str) -> OrdinalTerm {
        parse(text, &wo_nat()).unwrap()
    }

    fn lt(s: &str, t: &str) -> bool {
        cmp(&wo_nat(), &p(s), &p(t)) == Ordering::Less
    }

    #[test]
    fn comparator_base_clauses() {
        assert!(lt("0", "Om"));
        assert!(lt("th(Om)", "E(0)"));
        assert!(lt("E(0)", "E(1)"));
        assert!(lt("th(Om)", "Om"));
        assert!(lt("Om", "E(0)"));
    }

    #[test]
    fn comparator_theta_and_sum_clauses() {
        assert!(lt("th(th(0))", "th(Om)"));
        assert!(lt("w(w(0))", "th(0)"));
        assert!(lt("Om", "Om + Om"));
        assert!(lt("Om + 1", "Om + Om"));
        assert!(lt("1", "w(w(0))"));
        assert!(lt("w(w(0))", "w(w(0)) + 1"));
        assert!(lt("th(0)", "th(0) + th(0)"));
    }

    #[test]
    fn compare_validates_carrier() {
        let wo = wo_finite(2);
        let t = OrdinalTerm::E(5);
        assert!(matches!(
            compare(&wo, &t, &OrdinalTerm::Zero),
            Err(OrderError::OffCarrier { index: 5, .. })
        ));
        assert_eq!(
            compare(&wo, &OrdinalTerm::E(1), &OrdinalTerm::Omega).unwrap(),
            Ordering::Greater
        );
    }

    #[test]
    fn triangle_examples() {
        let wo = wo_nat();
        assert!(triangle_less(&wo, &p("0"), &p("w(0)")));
        assert!(triangle_less(&wo, &p("th(0)"), &p("Om")));
        for t in ["0", "Om", "E(0)", "th(Om)", "w(w(0)) + 1"] {
            assert!(!triangle_less(&wo, &p(t), &p(t)));
            assert!(triangle_le(&wo, &p(t), &p(t)));
        }
    }

    #[test]
    fn epsilon_term_classification() {
        assert!(is_epsilon_term(&p("Om")));
        assert!(is_epsilon_term(&p("th(E(0))")));
        assert!(!is_epsilon_term(&p("w(0)")));
        assert!(!is_epsilon_term(&p("0")));
    }

    #[test]
    fn total_order_on_small_universe() {
        let wo = wo_finite(2);
        let universe = enumerate_terms(&wo, 2, 4, 2).unwrap();
        let terms = &universe.terms;
        for s in terms {
            assert_eq!(cmp(&wo, s, s), Ordering::Equal);
            for t in terms {
                let c = cmp(&wo, s, t);
                assert_eq!(c == Ordering::Equal, s == t);
                assert_eq!(c.reverse(), cmp(&wo, t, s));
            }
        }
        // Transitivity over the full cube of this small universe.
        let n = terms.len();
        let mut less = vec![false; n * n];
        for (i, s) in terms.iter().enumerate() {
            for (j, t) in terms.iter().enumerate() {
                less[i * n + j] = cmp(&wo, s, t) == Ordering::Less;
            }
        }
        for i in 0..n {
            for j in 0..n {
                if !less[i * n + j] {
                    continue;
                }
                for k in 0..n {
                    if less[j * n + k] {
                        assert!(less[i * n + k], "transitivity broke");
                    }
                }
            }
        }
    }

    #[test]
    fn oracle_on_two_terms() {
        let wo = wo_finite(1);
        let universe = enumerate_terms(&wo, 0, 1, 0).unwrap();
        assert_eq!(universe.terms, vec![OrdinalTerm::Zero, OrdinalTerm::Omega]);
        let table = oracle_compare(&universe);
        assert!(table.is_total());
        assert!(table.lt(0, 1));
        assert!(!table.lt(1, 0));
    }

    #[test]
    fn oracle_matches_comparator() {
        let wo = wo_finite(2);
        let universe = enumerate_terms(&wo, 2, 4, 2).unwrap();
        let table = oracle_compare(&universe);
        assert!(table.is_total(), "undecided: {:?}", table.undecided);
        for (i, s) in universe.terms.iter().enumerate() {
            for (j, t) in universe.terms.iter().enumerate() {
                assert_eq!(
                    table.lt(i, j),
                    cmp(&wo, s, t) == Ordering::Less,
                    "mismatch on ({s}, {t})"
                );
            }
        }
    }

    #[test]
    fn star_below_theta_over_universe() {
        let wo = wo_finite(2);
        let universe = enumerate_terms(&wo, 2, 4, 2).unwrap();
        for t in &universe.terms {
            let s = star(&wo, t);
            assert_eq!(cmp(&wo, &s, &OrdinalTerm::theta(t.clone())), Ordering::Less);
        }
    }

    #[test]
    fn theta_comparison_equivalence_over_universe() {
        let wo = wo_finite(2);
        let universe = enumerate_terms(&wo, 1, 3, 2).unwrap();
        for s in &universe.terms {
            for t in &universe.terms {
                let ths = OrdinalTerm::theta(s.clone());
                let tht = OrdinalTerm::theta(t.clone());
                let lhs = cmp(&wo, &ths, &tht) == Ordering::Less;
                let rhs = (cmp(&wo, s, t) == Ordering::Less
                    && cmp(&wo, &star(&wo, s), &tht) == Ordering::Less)
                    || cmp(&wo, &ths, &star(&wo, t)) != Ordering::Greater;
                assert_eq!(lhs, rhs, "equivalence broke at ({s}, {t})");
            }
        }
    }

    #[test]
    fn omega_power_bridge_over_universe() {
        let wo = wo_finite(2);
        let universe = enumerate_terms(&wo, 1, 3, 2).unwrap();
        for b in &universe.terms {
            for a in &universe.terms {
                let tha = OrdinalTerm::theta(a.clone());
                let lhs = cmp(&wo, b, &tha) == Ordering::Less;
                let rhs = cmp(&wo, &crate::arith::omega_pow(b), &tha) == Ordering::Less;
                assert_eq!(lhs, rhs, "bridge broke at ({b}, {a})");
            }
        }
    }

    #[test]
    fn g_decreases_under_star() {
        let wo = wo_finite(2);
        let universe = enumerate_terms(&wo, 2, 4, 2).unwrap();
        for t in &universe.terms {
            assert!(g_complexity(&star(&wo, t)) <= g_complexity(t));
        }
    }
}
