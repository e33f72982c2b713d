//! Ordinal arithmetic on normalized terms and the fundamental-function
//! calculus.
//!
//! Addition is Cantor-normal-form addition (leading parts of the left
//! summand absorb into the right when their exponents are too small),
//! omega-exponentiation collapses epsilon atoms, and finite multiples are
//! provided for additively principal terms only — that is all the bound
//! bookkeeping ever needs.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::order::{cmp, triangle_le};
use crate::term::{print, OrdinalTerm, Principal};
use crate::wellorder::WellOrdering;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ArithError {
    #[error("finite multiples require an additively principal term, got {term}")]
    NotPrincipal { term: String },
    #[error("finite multiples require a multiplier >= 1")]
    ZeroMultiplier,
    #[error("left-addition side condition failed: {fn_at_omega} is not below {limit}")]
    SideCondition { fn_at_omega: String, limit: String },
    #[error("fundamental functions only apply to arguments <= Om, got {term}")]
    ArgAboveOmega { term: String },
}

/// Cantor-normal-form ordinal addition. Precondition: both terms
/// normalized over `wo`.
pub fn add(wo: &WellOrdering, s: &OrdinalTerm, t: &OrdinalTerm) -> OrdinalTerm {
    if t == &OrdinalTerm::Zero {
        return s.clone();
    }
    let tparts = t.parts();
    let lead = tparts[0].exponent();
    let mut parts: Vec<Principal> = s
        .parts()
        .into_iter()
        .filter(|p| cmp(wo, p.exponent(), lead) != Ordering::Less)
        .collect();
    parts.extend(tparts);
    OrdinalTerm::from_parts(parts)
}

/// omega^t; epsilon atoms collapse to themselves.
pub fn omega_pow(t: &OrdinalTerm) -> OrdinalTerm {
    if t.is_epsilon_atom() {
        t.clone()
    } else {
        OrdinalTerm::Sum(vec![Principal::WPow(t.clone())])
    }
}

/// t + 1.
pub fn succ(wo: &WellOrdering, t: &OrdinalTerm) -> OrdinalTerm {
    add(wo, t, &OrdinalTerm::one())
}

/// `t` repeated `n` times as a sum. `t` must be additively principal
/// (a single principal part), so the repeated exponents stay equal and no
/// reordering is involved.
pub fn times_nat(t: &OrdinalTerm, n: u64) -> Result<OrdinalTerm, ArithError> {
    if n == 0 {
        return Err(ArithError::ZeroMultiplier);
    }
    let parts = t.parts();
    if parts.len() != 1 {
        return Err(ArithError::NotPrincipal { term: print(t) });
    }
    Ok(OrdinalTerm::Sum(vec![parts[0].clone(); n as usize]))
}

/// The finite omega tower over `t`: zero iterations return `t`, each
/// further iteration exponentiates.
pub fn omega_tower(n: u32, t: &OrdinalTerm) -> OrdinalTerm {
    let mut acc = t.clone();
    for _ in 0..n {
        acc = omega_pow(&acc);
    }
    acc
}

/// A fundamental function: a bound transformer on arguments at or below
/// `Om`, built from the identity, left-addition of an omega power, and
/// omega-exponentiation.
///
/// Construction through [`ff_make`] enforces the left-addition side
/// condition `f(Om) < omega^(gamma+1)` eagerly; it quantifies over the one
/// evaluable point, so eager checking is complete.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FundFn {
    expr: FundFnExpr,
}

/// Raw expression trees accepted by [`ff_make`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FundFnExpr {
    Id,
    /// `omega^gamma + f`.
    AddLeft(OrdinalTerm, Box<FundFnExpr>),
    /// `omega^f`.
    ExpOmega(Box<FundFnExpr>),
}

impl fmt::Display for FundFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(e: &FundFnExpr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match e {
                FundFnExpr::Id => write!(f, "id"),
                FundFnExpr::AddLeft(gamma, inner) => {
                    write!(f, "{} + ", print(&omega_pow(gamma)))?;
                    go(inner, f)
                }
                FundFnExpr::ExpOmega(inner) => {
                    write!(f, "w^(")?;
                    go(inner, f)?;
                    write!(f, ")")
                }
            }
        }
        go(&self.expr, f)
    }
}

/// Validate an expression tree into a fundamental function, checking every
/// left-addition side condition by evaluating the inner function at `Om`.
pub fn ff_make(wo: &WellOrdering, expr: FundFnExpr) -> Result<FundFn, ArithError> {
    fn check(wo: &WellOrdering, e: &FundFnExpr) -> Result<(), ArithError> {
        match e {
            FundFnExpr::Id => Ok(()),
            FundFnExpr::AddLeft(gamma, inner) => {
                check(wo, inner)?;
                let at_omega = eval(wo, inner, &OrdinalTerm::Omega);
                let limit = omega_pow(&succ(wo, gamma));
                if cmp(wo, &at_omega, &limit) != Ordering::Less {
                    return Err(ArithError::SideCondition {
                        fn_at_omega: print(&at_omega),
                        limit: print(&limit),
                    });
                }
                Ok(())
            }
            FundFnExpr::ExpOmega(inner) => check(wo, inner),
        }
    }
    check(wo, &expr)?;
    Ok(FundFn { expr })
}

fn eval(wo: &WellOrdering, e: &FundFnExpr, arg: &OrdinalTerm) -> OrdinalTerm {
    match e {
        FundFnExpr::Id => arg.clone(),
        FundFnExpr::AddLeft(gamma, inner) => add(wo, &omega_pow(gamma), &eval(wo, inner, arg)),
        FundFnExpr::ExpOmega(inner) => omega_pow(&eval(wo, inner, arg)),
    }
}

/// Apply a fundamental function. The domain is the terms at or below `Om`.
pub fn ff_apply(wo: &WellOrdering, f: &FundFn, t: &OrdinalTerm) -> Result<OrdinalTerm, ArithError> {
    if cmp(wo, t, &OrdinalTerm::Omega) == Ordering::Greater {
        return Err(ArithError::ArgAboveOmega { term: print(t) });
    }
    Ok(eval(wo, &f.expr, t))
}

impl FundFn {
    pub fn expr(&self) -> &FundFnExpr {
        &self.expr
    }

    /// `f(Om)`, always defined.
    pub fn at_omega(&self, wo: &WellOrdering) -> OrdinalTerm {
        eval(wo, &self.expr, &OrdinalTerm::Omega)
    }

    /// `f(0)`, always defined.
    pub fn at_zero(&self, wo: &WellOrdering) -> OrdinalTerm {
        eval(wo, &self.expr, &OrdinalTerm::Zero)
    }
}

/// Parse the fundamental-function grammar:
/// `fn := "id" | "w^(" fn ")" | term " + " fn`,
/// where the added term must be additively principal.
pub fn parse_fundfn(text: &str, wo: &WellOrdering) -> Result<FundFn, String> {
    fn split_top_plus(text: &str) -> Option<(&str, &str)> {
        let mut depth = 0i32;
        for (i, c) in text.char_indices() {
            match c {
                '(' => depth += 1,
                ')' => depth -= 1,
                '+' if depth == 0 => return Some((&text[..i], &text[i + 1..])),
                _ => {}
            }
        }
        None
    }
    fn go(text: &str, wo: &WellOrdering) -> Result<FundFnExpr, String> {
        let text = text.trim();
        if text == "id" {
            return Ok(FundFnExpr::Id);
        }
        if let Some(rest) = text.strip_prefix("w^(") {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| "expected closing parenthesis".to_string())?;
            return Ok(FundFnExpr::ExpOmega(Box::new(go(inner, wo)?)));
        }
        if let Some((head, tail)) = split_top_plus(text) {
            let value = crate::term::parse(head.trim(), wo).map_err(|e| e.to_string())?;
            // The written summand is the added value omega^gamma; recover
            // gamma from it.
            let parts = value.parts();
            let gamma = match parts.as_slice() {
                [p] => p.exponent().clone(),
                _ => return Err(format!("{} is not additively principal", head.trim())),
            };
            return Ok(FundFnExpr::AddLeft(gamma, Box::new(go(tail, wo)?)));
        }
        Err(format!("cannot parse fundamental function {text:?}"))
    }
    let expr = go(text, wo)?;
    ff_make(wo, expr).map_err(|e| e.to_string())
}

/// `f(th(f(0)))` is majorized by `f(Om)` — the shape the collapsing
/// argument leans on. Exposed for the test suites.
pub fn majorization_at_collapse(wo: &WellOrdering, f: &FundFn) -> bool {
    let inner = OrdinalTerm::theta(f.at_zero(wo));
    let lhs = eval(wo, &f.expr, &inner);
    let rhs = f.at_omega(wo);
    crate::order::triangle_less(wo, &lhs, &rhs)
}

/// Check `s <= Om`.
pub fn at_most_omega(wo: &WellOrdering, t: &OrdinalTerm) -> bool {
    cmp(wo, t, &OrdinalTerm::Omega) != Ordering::Greater
}

/// Check `f(Om) <= alpha` under majorization (clause a of the collapsing
/// rule).
pub fn omega_value_majorized_by(wo: &WellOrdering, f: &FundFn, alpha: &OrdinalTerm) -> bool {
    triangle_le(wo, &f.at_omega(wo), alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::triangle_less;
    use crate::term::parse;
    use crate::wellorder::wo_nat;

    fn p(text: &str) -> OrdinalTerm {
        parse(text, &wo_nat()).unwrap()
    }

    #[test]
    fn addition_absorbs() {
        let wo = wo_nat();
        assert_eq!(add(&wo, &p("1"), &p("w(1)")), p("w(1)"));
        assert_eq!(print(&add(&wo, &p("w(1)"), &p("1"))), "w(w(0)) + 1");
        assert_eq!(add(&wo, &p("Om"), &p("Om")), p("Om + Om"));
        assert_eq!(add(&wo, &p("w(1) + 1"), &p("w(1)")), p("w(1) + w(1)"));
    }

    #[test]
    fn addition_identities_and_monotonicity() {
        let wo = wo_nat();
        let sample = ["0", "1", "Om", "E(2)", "th(Om)", "w(1) + 2", "Om + th(0)"];
        for s in sample {
            let s = p(s);
            assert_eq!(add(&wo, &s, &OrdinalTerm::Zero), s);
            assert_eq!(add(&wo, &OrdinalTerm::Zero, &s), s);
            for t in sample {
                let t = p(t);
                let sum = add(&wo, &s, &t);
                if t == OrdinalTerm::Zero {
                    assert_eq!(sum, s);
                } else {
                    assert_eq!(cmp(&wo, &s, &sum), Ordering::Less);
                }
                for u in sample {
                    let u = p(u);
                    assert_eq!(
                        add(&wo, &add(&wo, &s, &t), &u),
                        add(&wo, &s, &add(&wo, &t, &u)),
                        "associativity broke"
                    );
                }
            }
        }
    }

    #[test]
    fn omega_pow_examples() {
        assert_eq!(omega_pow(&p("E(0)")), p("E(0)"));
        assert_eq!(omega_pow(&p("0")), p("1"));
        assert_eq!(omega_pow(&p("Om + 1")), p("w(Om + 1)"));
    }

    #[test]
    fn finite_multiples() {
        assert_eq!(times_nat(&p("Om"), 2).unwrap(), p("Om + Om"));
        assert_eq!(times_nat(&p("w(1)"), 3).unwrap(), p("w(1) + w(1) + w(1)"));
        assert!(matches!(
            times_nat(&p("Om + 1"), 2),
            Err(ArithError::NotPrincipal { .. })
        ));
        assert!(matches!(
            times_nat(&p("Om"), 0),
            Err(ArithError::ZeroMultiplier)
        ));
    }

    #[test]
    fn towers() {
        let wo = wo_nat();
        let t = p("Om + 1");
        assert_eq!(omega_tower(0, &t), t);
        assert_eq!(omega_tower(2, &p("0")), p("w(1)"));
        assert_eq!(
            omega_tower(1, &add(&wo, &p("E(0)"), &p("2"))),
            p("w(E(0) + 2)")
        );
        // Epsilon atoms are fixed points of the tower.
        assert_eq!(omega_tower(4, &p("E(0)")), p("E(0)"));
    }

    #[test]
    fn fundamental_function_basics() {
        let wo = wo_nat();
        let id = ff_make(&wo, FundFnExpr::Id).unwrap();
        assert_eq!(ff_apply(&wo, &id, &p("Om")).unwrap(), p("Om"));

        let f = ff_make(
            &wo,
            FundFnExpr::AddLeft(OrdinalTerm::Omega, Box::new(FundFnExpr::Id)),
        )
        .unwrap();
        assert_eq!(ff_apply(&wo, &f, &p("0")).unwrap(), p("Om"));
        assert_eq!(ff_apply(&wo, &f, &p("Om")).unwrap(), p("Om + Om"));
        assert!(matches!(
            ff_apply(&wo, &f, &p("E(0)")),
            Err(ArithError::ArgAboveOmega { .. })
        ));

        // f(th(f(0))) = Om + th(Om), majorized by f(Om) = Om + Om.
        let collapsed = OrdinalTerm::theta(ff_apply(&wo, &f, &p("0")).unwrap());
        let lhs = ff_apply(&wo, &f, &collapsed).unwrap();
        assert_eq!(lhs, p("Om + th(Om)"));
        assert!(triangle_less(
            &wo,
            &lhs,
            &ff_apply(&wo, &f, &p("Om")).unwrap()
        ));
        assert!(majorization_at_collapse(&wo, &f));
    }

    #[test]
    fn addleft_side_condition_is_checked() {
        let wo = wo_nat();
        // gamma = 0 demands f(Om) < omega, impossible since f(Om) >= Om.
        let err = ff_make(
            &wo,
            FundFnExpr::AddLeft(OrdinalTerm::Zero, Box::new(FundFnExpr::Id)),
        )
        .unwrap_err();
        assert!(matches!(err, ArithError::SideCondition { .. }));
    }

    #[test]
    fn fundfn_grammar() {
        let wo = wo_nat();
        let f = parse_fundfn("Om + id", &wo).unwrap();
        assert_eq!(ff_apply(&wo, &f, &p("1")).unwrap(), p("Om + 1"));
        let g = parse_fundfn("w^(id)", &wo).unwrap();
        assert_eq!(ff_apply(&wo, &g, &p("1")).unwrap(), p("w(1)"));
        let h = parse_fundfn("E(0) + w^(id)", &wo).unwrap();
        assert_eq!(ff_apply(&wo, &h, &p("0")).unwrap(), p("E(0) + 1"));
        assert!(parse_fundfn("Om + 1 + id", &wo).is_err());
        assert!(parse_fundfn("0 + id", &wo).is_err());
    }
}
