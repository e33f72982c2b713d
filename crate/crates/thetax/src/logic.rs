//! Second-order formula machinery: negation-normal-form formulas over the
//! signature {0, successor, +, *; =, <} with set membership, de Morgan
//! negation, substitution, closed-term evaluation, the grade measure,
//! weak/arithmetic classification, sequents, and axiom/redex detection.
//!
//! The signature is a finite restriction of "one symbol per primitive
//! recursive function": every concrete formula the chain machinery builds
//! needs only successor-level arithmetic, and the finite signature keeps
//! closed-term evaluation total.
//!
//! Set variables live in a single indexed namespace. Literals always
//! display the variable as `U_i`; quantifier binders display as `X_i`.
//! After parsing, bound indices are renamed apart from free ones (and
//! minimized), so printing is canonical.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LogicError {
    #[error("cannot evaluate open term: variable x_{var} occurs")]
    OpenTerm { var: u32 },
    #[error("formula parse error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
}

/// First-sort terms over {0, successor, +, *} and number variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NumTerm {
    Zero,
    Succ(Box<NumTerm>),
    Plus(Box<NumTerm>, Box<NumTerm>),
    Times(Box<NumTerm>, Box<NumTerm>),
    Var(u32),
}

/// The numeral for `n`: a successor chain over zero.
pub fn numeral(n: u64) -> NumTerm {
    let mut t = NumTerm::Zero;
    for _ in 0..n {
        t = NumTerm::Succ(Box::new(t));
    }
    t
}

/// Evaluate a closed term.
pub fn eval_term(t: &NumTerm) -> Result<u64, LogicError> {
    Ok(match t {
        NumTerm::Zero => 0,
        NumTerm::Succ(a) => eval_term(a)? + 1,
        NumTerm::Plus(a, b) => eval_term(a)? + eval_term(b)?,
        NumTerm::Times(a, b) => eval_term(a)? * eval_term(b)?,
        NumTerm::Var(v) => return Err(LogicError::OpenTerm { var: *v }),
    })
}

impl NumTerm {
    pub fn is_closed(&self) -> bool {
        match self {
            NumTerm::Zero => true,
            NumTerm::Succ(a) => a.is_closed(),
            NumTerm::Plus(a, b) | NumTerm::Times(a, b) => a.is_closed() && b.is_closed(),
            NumTerm::Var(_) => false,
        }
    }

    /// `Some(n)` iff the term is the literal numeral for n.
    pub fn as_numeral(&self) -> Option<u64> {
        match self {
            NumTerm::Zero => Some(0),
            NumTerm::Succ(a) => a.as_numeral().map(|n| n + 1),
            _ => None,
        }
    }

    fn vars(&self, out: &mut BTreeSet<u32>) {
        match self {
            NumTerm::Zero => {}
            NumTerm::Succ(a) => a.vars(out),
            NumTerm::Plus(a, b) | NumTerm::Times(a, b) => {
                a.vars(out);
                b.vars(out);
            }
            NumTerm::Var(v) => {
                out.insert(*v);
            }
        }
    }
}

/// Binary primitive recursive relations of the signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Eq,
    Lt,
}

/// Negation-normal-form formulas.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    PosLit(Rel, NumTerm, NumTerm),
    NegLit(Rel, NumTerm, NumTerm),
    In(NumTerm, u32),
    NotIn(NumTerm, u32),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    ForallNum(u32, Box<Formula>),
    ExistsNum(u32, Box<Formula>),
    ForallSet(u32, Box<Formula>),
    ExistsSet(u32, Box<Formula>),
}

use Formula::*;

/// De Morgan negation: dualizes every node; an involution.
pub fn negate(f: &Formula) -> Formula {
    match f {
        PosLit(r, a, b) => NegLit(*r, a.clone(), b.clone()),
        NegLit(r, a, b) => PosLit(*r, a.clone(), b.clone()),
        In(t, u) => NotIn(t.clone(), *u),
        NotIn(t, u) => In(t.clone(), *u),
        And(a, b) => Or(Box::new(negate(a)), Box::new(negate(b))),
        Or(a, b) => And(Box::new(negate(a)), Box::new(negate(b))),
        ForallNum(x, b) => ExistsNum(*x, Box::new(negate(b))),
        ExistsNum(x, b) => ForallNum(*x, Box::new(negate(b))),
        ForallSet(x, b) => ExistsSet(*x, Box::new(negate(b))),
        ExistsSet(x, b) => ForallSet(*x, Box::new(negate(b))),
    }
}

/// `a -> b` in negation normal form.
pub fn implies(a: &Formula, b: Formula) -> Formula {
    Or(Box::new(negate(a)), Box::new(b))
}

impl Formula {
    pub fn is_literal(&self) -> bool {
        matches!(self, PosLit(..) | NegLit(..) | In(..) | NotIn(..))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Or(Box::new(a), Box::new(b))
    }

    pub fn free_num_vars(&self) -> BTreeSet<u32> {
        fn go(f: &Formula, bound: &mut Vec<u32>, out: &mut BTreeSet<u32>) {
            match f {
                PosLit(_, a, b) | NegLit(_, a, b) => {
                    let mut vs = BTreeSet::new();
                    a.vars(&mut vs);
                    b.vars(&mut vs);
                    out.extend(vs.into_iter().filter(|v| !bound.contains(v)));
                }
                In(t, _) | NotIn(t, _) => {
                    let mut vs = BTreeSet::new();
                    t.vars(&mut vs);
                    out.extend(vs.into_iter().filter(|v| !bound.contains(v)));
                }
                And(a, b) | Or(a, b) => {
                    go(a, bound, out);
                    go(b, bound, out);
                }
                ForallNum(x, b) | ExistsNum(x, b) => {
                    bound.push(*x);
                    go(b, bound, out);
                    bound.pop();
                }
                ForallSet(_, b) | ExistsSet(_, b) => go(b, bound, out),
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn free_set_vars(&self) -> BTreeSet<u32> {
        fn go(f: &Formula, bound: &mut Vec<u32>, out: &mut BTreeSet<u32>) {
            match f {
                PosLit(..) | NegLit(..) => {}
                In(_, u) | NotIn(_, u) => {
                    if !bound.contains(u) {
                        out.insert(*u);
                    }
                }
                And(a, b) | Or(a, b) => {
                    go(a, bound, out);
                    go(b, bound, out);
                }
                ForallNum(_, b) | ExistsNum(_, b) => go(b, bound, out),
                ForallSet(x, b) | ExistsSet(x, b) => {
                    bound.push(*x);
                    go(b, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Every set-variable index occurring anywhere, free or bound.
    pub fn all_set_indices(&self) -> BTreeSet<u32> {
        fn go(f: &Formula, out: &mut BTreeSet<u32>) {
            match f {
                PosLit(..) | NegLit(..) => {}
                In(_, u) | NotIn(_, u) => {
                    out.insert(*u);
                }
                And(a, b) | Or(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                ForallNum(_, b) | ExistsNum(_, b) => go(b, out),
                ForallSet(x, b) | ExistsSet(x, b) => {
                    out.insert(*x);
                    go(b, out);
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut out);
        out
    }

    pub fn is_closed_num(&self) -> bool {
        self.free_num_vars().is_empty()
    }
}

/// No set quantifiers (set parameters are allowed).
pub fn is_arithmetic(f: &Formula) -> bool {
    match f {
        PosLit(..) | NegLit(..) | In(..) | NotIn(..) => true,
        And(a, b) | Or(a, b) => is_arithmetic(a) && is_arithmetic(b),
        ForallNum(_, b) | ExistsNum(_, b) => is_arithmetic(b),
        ForallSet(..) | ExistsSet(..) => false,
    }
}

/// Arithmetic, or a universal set quantifier over an arithmetic matrix.
pub fn is_weak(f: &Formula) -> bool {
    match f {
        ForallSet(_, b) => is_arithmetic(b),
        _ => is_arithmetic(f),
    }
}

/// Cut-rank measure below omega+omega.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Grade {
    Finite(u32),
    /// omega + offset; omega itself is `OmegaPlus(0)`.
    OmegaPlus(u32),
}

impl Grade {
    pub fn succ(self) -> Grade {
        match self {
            Grade::Finite(n) => Grade::Finite(n + 1),
            Grade::OmegaPlus(n) => Grade::OmegaPlus(n + 1),
        }
    }

    pub const OMEGA: Grade = Grade::OmegaPlus(0);
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Grade::Finite(n) => write!(f, "{n}"),
            Grade::OmegaPlus(0) => write!(f, "w"),
            Grade::OmegaPlus(n) => write!(f, "w+{n}"),
        }
    }
}

/// Parse a grade: a decimal, `w`, or `w+n`.
pub fn parse_grade(text: &str) -> Option<Grade> {
    let text = text.trim();
    if text == "w" {
        return Some(Grade::OmegaPlus(0));
    }
    if let Some(rest) = text.strip_prefix("w+") {
        return rest.trim().parse().ok().map(Grade::OmegaPlus);
    }
    text.parse().ok().map(Grade::Finite)
}

/// The grade of a formula: literals are 0; a set quantifier over an
/// arithmetic matrix is omega; connectives and quantifiers otherwise add
/// one to the body measure.
pub fn grade(f: &Formula) -> Grade {
    match f {
        PosLit(..) | NegLit(..) | In(..) | NotIn(..) => Grade::Finite(0),
        And(a, b) | Or(a, b) => grade(a).max(grade(b)).succ(),
        ForallNum(_, b) | ExistsNum(_, b) => grade(b).succ(),
        ForallSet(_, b) | ExistsSet(_, b) => {
            if is_arithmetic(b) {
                Grade::OMEGA
            } else {
                grade(b).succ()
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Substitution
// ---------------------------------------------------------------------------

fn subst_in_term(t: &NumTerm, var: u32, repl: &NumTerm) -> NumTerm {
    match t {
        NumTerm::Zero => NumTerm::Zero,
        NumTerm::Succ(a) => NumTerm::Succ(Box::new(subst_in_term(a, var, repl))),
        NumTerm::Plus(a, b) => NumTerm::Plus(
            Box::new(subst_in_term(a, var, repl)),
            Box::new(subst_in_term(b, var, repl)),
        ),
        NumTerm::Times(a, b) => NumTerm::Times(
            Box::new(subst_in_term(a, var, repl)),
            Box::new(subst_in_term(b, var, repl)),
        ),
        NumTerm::Var(v) => {
            if *v == var {
                repl.clone()
            } else {
                t.clone()
            }
        }
    }
}

/// Substitute a term for a free number variable, capture-avoiding: binders
/// that would capture a variable of the replacement are renamed first.
pub fn subst_num_term(f: &Formula, var: u32, repl: &NumTerm) -> Formula {
    let mut repl_vars = BTreeSet::new();
    repl.vars(&mut repl_vars);
    fn go(f: &Formula, var: u32, repl: &NumTerm, repl_vars: &BTreeSet<u32>) -> Formula {
        match f {
            PosLit(r, a, b) => PosLit(*r, subst_in_term(a, var, repl), subst_in_term(b, var, repl)),
            NegLit(r, a, b) => NegLit(*r, subst_in_term(a, var, repl), subst_in_term(b, var, repl)),
            In(t, u) => In(subst_in_term(t, var, repl), *u),
            NotIn(t, u) => NotIn(subst_in_term(t, var, repl), *u),
            And(a, b) => Formula::and(go(a, var, repl, repl_vars), go(b, var, repl, repl_vars)),
            Or(a, b) => Formula::or(go(a, var, repl, repl_vars), go(b, var, repl, repl_vars)),
            ForallNum(x, b) | ExistsNum(x, b) => {
                let make = |x, b| match f {
                    ForallNum(..) => ForallNum(x, Box::new(b)),
                    _ => ExistsNum(x, Box::new(b)),
                };
                if *x == var {
                    // Shadowed: nothing to substitute below.
                    return f.clone();
                }
                if repl_vars.contains(x) {
                    // Rename the binder away from the replacement's
                    // variables before descending.
                    let mut avoid = repl_vars.clone();
                    avoid.extend(b.free_num_vars());
                    avoid.insert(var);
                    let fresh = (0..).find(|i| !avoid.contains(i)).unwrap();
                    let renamed = go(b, *x, &NumTerm::Var(fresh), &BTreeSet::from([fresh]));
                    make(fresh, go(&renamed, var, repl, repl_vars))
                } else {
                    make(*x, go(b, var, repl, repl_vars))
                }
            }
            ForallSet(x, b) => ForallSet(*x, Box::new(go(b, var, repl, repl_vars))),
            ExistsSet(x, b) => ExistsSet(*x, Box::new(go(b, var, repl, repl_vars))),
        }
    }
    go(f, var, repl, &repl_vars)
}

/// Substitute the numeral for `n` for a free number variable.
pub fn subst_num(f: &Formula, var: u32, n: u64) -> Formula {
    subst_num_term(f, var, &numeral(n))
}

/// Replace one free set variable by another, capture-avoiding.
pub fn subst_setvar(f: &Formula, from: u32, to: u32) -> Formula {
    match f {
        PosLit(..) | NegLit(..) => f.clone(),
        In(t, u) => In(t.clone(), if *u == from { to } else { *u }),
        NotIn(t, u) => NotIn(t.clone(), if *u == from { to } else { *u }),
        And(a, b) => Formula::and(subst_setvar(a, from, to), subst_setvar(b, from, to)),
        Or(a, b) => Formula::or(subst_setvar(a, from, to), subst_setvar(b, from, to)),
        ForallNum(x, b) => ForallNum(*x, Box::new(subst_setvar(b, from, to))),
        ExistsNum(x, b) => ExistsNum(*x, Box::new(subst_setvar(b, from, to))),
        ForallSet(x, b) | ExistsSet(x, b) => {
            let make = |x, b: Formula| match f {
                ForallSet(..) => ForallSet(x, Box::new(b)),
                _ => ExistsSet(x, Box::new(b)),
            };
            if *x == from {
                return f.clone();
            }
            if *x == to {
                // Binder would capture the new variable: rename it first.
                let mut avoid = b.all_set_indices();
                avoid.insert(from);
                avoid.insert(to);
                let fresh = (0..).find(|i| !avoid.contains(i)).unwrap();
                let renamed = subst_setvar(b, *x, fresh);
                make(fresh, subst_setvar(&renamed, from, to))
            } else {
                make(*x, subst_setvar(b, from, to))
            }
        }
    }
}

/// A formula with a distinguished free number variable, as used for
/// comprehension and induction predicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormulaWithHole {
    pub var: u32,
    pub body: Formula,
}

impl FormulaWithHole {
    pub fn new(var: u32, body: Formula) -> Self {
        FormulaWithHole { var, body }
    }

    /// The predicate applied to a term.
    pub fn apply(&self, t: &NumTerm) -> Formula {
        subst_num_term(&self.body, self.var, t)
    }
}

/// Replace every membership occurrence `e in U` of the set variable `u` by
/// `pred(e)`, and `e notin U` by `negate(pred(e))`, preserving negation
/// normal form. Bound variables of `f` are renamed apart from the
/// predicate's free variables first, so the substitution never captures.
pub fn subst_comprehension(f: &Formula, u: u32, pred: &FormulaWithHole) -> Formula {
    let avoid_num: BTreeSet<u32> = pred.body.free_num_vars();
    let avoid_set: BTreeSet<u32> = pred.body.free_set_vars();
    let f = rename_bound_apart(f, &avoid_num, &avoid_set);
    fn go(f: &Formula, u: u32, pred: &FormulaWithHole) -> Formula {
        match f {
            PosLit(..) | NegLit(..) => f.clone(),
            In(t, v) => {
                if *v == u {
                    pred.apply(t)
                } else {
                    f.clone()
                }
            }
            NotIn(t, v) => {
                if *v == u {
                    negate(&pred.apply(t))
                } else {
                    f.clone()
                }
            }
            And(a, b) => Formula::and(go(a, u, pred), go(b, u, pred)),
            Or(a, b) => Formula::or(go(a, u, pred), go(b, u, pred)),
            ForallNum(x, b) => ForallNum(*x, Box::new(go(b, u, pred))),
            ExistsNum(x, b) => ExistsNum(*x, Box::new(go(b, u, pred))),
            ForallSet(x, b) if *x != u => ForallSet(*x, Box::new(go(b, u, pred))),
            ExistsSet(x, b) if *x != u => ExistsSet(*x, Box::new(go(b, u, pred))),
            // The substituted variable is shadowed below this binder.
            shadowed => shadowed.clone(),
        }
    }
    go(&f, u, pred)
}

/// Rename bound variables so none collides with the given free indices
/// (nor with free variables of the formula itself), deterministically.
pub fn rename_bound_apart(
    f: &Formula,
    avoid_num: &BTreeSet<u32>,
    avoid_set: &BTreeSet<u32>,
) -> Formula {
    let mut taboo_num = f.free_num_vars();
    taboo_num.extend(avoid_num);
    let mut taboo_set = f.free_set_vars();
    taboo_set.extend(avoid_set);
    canonicalize_with(f, &taboo_num, &taboo_set)
}

/// Canonical bound-variable naming: every binder takes the smallest index
/// that is neither free in the whole formula nor used by an enclosing
/// binder. Fixes the textual form used for formula codes.
pub fn canonicalize(f: &Formula) -> Formula {
    canonicalize_with(f, &f.free_num_vars(), &f.free_set_vars())
}

fn canonicalize_with(f: &Formula, taboo_num: &BTreeSet<u32>, taboo_set: &BTreeSet<u32>) -> Formula {
    fn fresh(taboo: &BTreeSet<u32>, scope: &[u32]) -> u32 {
        (0..)
            .find(|i| !taboo.contains(i) && !scope.contains(i))
            .unwrap()
    }
    #[allow(clippy::too_many_arguments)]
    fn go(
        f: &Formula,
        num_env: &mut Vec<(u32, u32)>,
        set_env: &mut Vec<(u32, u32)>,
        num_scope: &mut Vec<u32>,
        set_scope: &mut Vec<u32>,
        taboo_num: &BTreeSet<u32>,
        taboo_set: &BTreeSet<u32>,
    ) -> Formula {
        let map_term = |t: &NumTerm, num_env: &Vec<(u32, u32)>| -> NumTerm {
            fn m(t: &NumTerm, env: &Vec<(u32, u32)>) -> NumTerm {
                match t {
                    NumTerm::Zero => NumTerm::Zero,
                    NumTerm::Succ(a) => NumTerm::Succ(Box::new(m(a, env))),
                    NumTerm::Plus(a, b) => NumTerm::Plus(Box::new(m(a, env)), Box::new(m(b, env))),
                    NumTerm::Times(a, b) => {
                        NumTerm::Times(Box::new(m(a, env)), Box::new(m(b, env)))
                    }
                    NumTerm::Var(v) => NumTerm::Var(
                        env.iter()
                            .rev()
                            .find(|(o, _)| o == v)
                            .map(|(_, n)| *n)
                            .unwrap_or(*v),
                    ),
                }
            }
            m(t, num_env)
        };
        let map_set = |u: u32, set_env: &Vec<(u32, u32)>| -> u32 {
            set_env
                .iter()
                .rev()
                .find(|(o, _)| *o == u)
                .map(|(_, n)| *n)
                .unwrap_or(u)
        };
        match f {
            PosLit(r, a, b) => PosLit(*r, map_term(a, num_env), map_term(b, num_env)),
            NegLit(r, a, b) => NegLit(*r, map_term(a, num_env), map_term(b, num_env)),
            In(t, u) => In(map_term(t, num_env), map_set(*u, set_env)),
            NotIn(t, u) => NotIn(map_term(t, num_env), map_set(*u, set_env)),
            And(a, b) => Formula::and(
                go(
                    a, num_env, set_env, num_scope, set_scope, taboo_num, taboo_set,
                ),
                go(
                    b, num_env, set_env, num_scope, set_scope, taboo_num, taboo_set,
                ),
            ),
            Or(a, b) => Formula::or(
                go(
                    a, num_env, set_env, num_scope, set_scope, taboo_num, taboo_set,
                ),
                go(
                    b, num_env, set_env, num_scope, set_scope, taboo_num, taboo_set,
                ),
            ),
            ForallNum(x, b) | ExistsNum(x, b) => {
                let new = fresh(taboo_num, num_scope);
                num_env.push((*x, new));
                num_scope.push(new);
                let body = go(
                    b, num_env, set_env, num_scope, set_scope, taboo_num, taboo_set,
                );
                num_scope.pop();
                num_env.pop();
                match f {
                    ForallNum(..) => ForallNum(new, Box::new(body)),
                    _ => ExistsNum(new, Box::new(body)),
                }
            }
            ForallSet(x, b) | ExistsSet(x, b) => {
                let new = fresh(taboo_set, set_scope);
                set_env.push((*x, new));
                set_scope.push(new);
                let body = go(
                    b, num_env, set_env, num_scope, set_scope, taboo_num, taboo_set,
                );
                set_scope.pop();
                set_env.pop();
                match f {
                    ForallSet(..) => ForallSet(new, Box::new(body)),
                    _ => ExistsSet(new, Box::new(body)),
                }
            }
        }
    }
    go(
        f,
        &mut Vec::new(),
        &mut Vec::new(),
        &mut Vec::new(),
        &mut Vec::new(),
        taboo_num,
        taboo_set,
    )
}

// ---------------------------------------------------------------------------
// Sequents
// ---------------------------------------------------------------------------

/// A finite set of formulas carrying first-occurrence order (the chain
/// rules insert formulas positionally); duplicates collapse on insert.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Sequent {
    formulas: Vec<Formula>,
}

impl Sequent {
    pub fn new(formulas: impl IntoIterator<Item = Formula>) -> Sequent {
        let mut seq = Sequent::default();
        for f in formulas {
            seq.push(f);
        }
        seq
    }

    /// Insert at the end unless already present.
    pub fn push(&mut self, f: Formula) {
        if !self.formulas.contains(&f) {
            self.formulas.push(f);
        }
    }

    /// Insert at a position unless already present; later formulas shift.
    pub fn insert_at(&mut self, index: usize, f: Formula) {
        if !self.formulas.contains(&f) {
            self.formulas.insert(index.min(self.formulas.len()), f);
        }
    }

    pub fn remove_at(&mut self, index: usize) -> Formula {
        self.formulas.remove(index)
    }

    pub fn contains(&self, f: &Formula) -> bool {
        self.formulas.contains(f)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Formula> {
        self.formulas.iter()
    }

    pub fn len(&self) -> usize {
        self.formulas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.formulas.is_empty()
    }

    pub fn formulas(&self) -> &[Formula] {
        &self.formulas
    }

    pub fn is_closed(&self) -> bool {
        self.formulas.iter().all(|f| f.is_closed_num())
    }

    /// Same members regardless of occurrence order.
    pub fn same_set(&self, other: &Sequent) -> bool {
        self.formulas.iter().all(|f| other.contains(f))
            && other.formulas.iter().all(|f| self.contains(f))
    }
}

impl FromIterator<Formula> for Sequent {
    fn from_iter<I: IntoIterator<Item = Formula>>(iter: I) -> Self {
        Sequent::new(iter)
    }
}

/// Is some literal of the sequent a true closed prime statement, or does
/// the sequent contain a matching membership/non-membership pair with
/// equal term values?
pub fn is_axiomatic(seq: &Sequent) -> Result<bool, LogicError> {
    for f in seq.iter() {
        if literal_true(f)? {
            return Ok(true);
        }
    }
    for f in seq.iter() {
        if let In(s, u) = f {
            let sv = eval_term(s)?;
            for g in seq.iter() {
                if let NotIn(t, v) = g {
                    if u == v && eval_term(t)? == sv {
                        return Ok(true);
                    }
                }
            }
        }
    }
    Ok(false)
}

/// Truth of a closed prime literal; membership literals are never decided
/// here (they have no standalone truth value).
pub fn literal_true(f: &Formula) -> Result<bool, LogicError> {
    Ok(match f {
        PosLit(Rel::Eq, a, b) => eval_term(a)? == eval_term(b)?,
        NegLit(Rel::Eq, a, b) => eval_term(a)? != eval_term(b)?,
        PosLit(Rel::Lt, a, b) => eval_term(a)? < eval_term(b)?,
        NegLit(Rel::Lt, a, b) => eval_term(a)? >= eval_term(b)?,
        _ => false,
    })
}

/// The decomposition of a reducible sequent: a literal-only prefix, the
/// first non-literal formula, and the rest.
#[derive(Debug, Clone, Copy)]
pub struct Redex<'a> {
    pub prefix: &'a [Formula],
    pub redex: &'a Formula,
    pub suffix: &'a [Formula],
    pub position: usize,
}

/// Split off the first non-literal formula; `None` iff the sequent is all
/// literals.
pub fn find_redex(seq: &Sequent) -> Option<Redex<'_>> {
    let fs = seq.formulas();
    let position = fs.iter().position(|f| !f.is_literal())?;
    Some(Redex {
        prefix: &fs[..position],
        redex: &fs[position],
        suffix: &fs[position + 1..],
        position,
    })
}

// ---------------------------------------------------------------------------
// Canonical text grammar
//
//   F   := lit | "(" F " & " F ")" | "(" F " | " F ")"
//        | "all x_" nat ". " F | "ex x_" nat ". " F
//        | "ALL X_" nat ". " F | "EX X_" nat ". " F
//   lit := nt "=" nt | nt "!=" nt | nt "<" nt | nt "!<" nt
//        | nt " in U_" nat | nt " notin U_" nat
//   nt  := "0" | nt "'" | "(" nt "+" nt ")" | "(" nt "*" nt ")" | "x_" nat
//
// Whitespace between tokens is insignificant on input; printing uses the
// spacing shown. Set-variable occurrences always print as U_i; binders
// print as X_i over the same index space.
// ---------------------------------------------------------------------------

pub fn print_num_term(t: &NumTerm) -> String {
    match t {
        NumTerm::Zero => "0".to_string(),
        NumTerm::Succ(a) => format!("{}'", print_num_term(a)),
        NumTerm::Plus(a, b) => format!("({}+{})", print_num_term(a), print_num_term(b)),
        NumTerm::Times(a, b) => format!("({}*{})", print_num_term(a), print_num_term(b)),
        NumTerm::Var(v) => format!("x_{v}"),
    }
}

pub fn print_formula(f: &Formula) -> String {
    match f {
        PosLit(Rel::Eq, a, b) => format!("{}={}", print_num_term(a), print_num_term(b)),
        NegLit(Rel::Eq, a, b) => format!("{}!={}", print_num_term(a), print_num_term(b)),
        PosLit(Rel::Lt, a, b) => format!("{}<{}", print_num_term(a), print_num_term(b)),
        NegLit(Rel::Lt, a, b) => format!("{}!<{}", print_num_term(a), print_num_term(b)),
        In(t, u) => format!("{} in U_{u}", print_num_term(t)),
        NotIn(t, u) => format!("{} notin U_{u}", print_num_term(t)),
        And(a, b) => format!("({} & {})", print_formula(a), print_formula(b)),
        Or(a, b) => format!("({} | {})", print_formula(a), print_formula(b)),
        ForallNum(x, b) => format!("all x_{x}. {}", print_formula(b)),
        ExistsNum(x, b) => format!("ex x_{x}. {}", print_formula(b)),
        ForallSet(x, b) => format!("ALL X_{x}. {}", print_formula(b)),
        ExistsSet(x, b) => format!("EX X_{x}. {}", print_formula(b)),
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", print_formula(self))
    }
}

/// Parse a formula and canonicalize its bound variables.
pub fn parse_formula(text: &str) -> Result<Formula, LogicError> {
    let mut p = FParser {
        bytes: text.as_bytes(),
        pos: 0,
    };
    let f = p.formula()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.err("trailing input"));
    }
    Ok(canonicalize(&f))
}

struct FParser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> FParser<'a> {
    fn err(&self, message: &str) -> LogicError {
        LogicError::Syntax {
            position: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
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

    fn expect(&mut self, text: &str) -> Result<(), LogicError> {
        if self.eat(text) {
            Ok(())
        } else {
            Err(self.err(&format!("expected {text:?}")))
        }
    }

    fn nat(&mut self) -> Result<u32, LogicError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected an index"));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.err("index too large"))
    }

    fn num_term(&mut self) -> Result<NumTerm, LogicError> {
        let mut t = if self.eat("0") {
            NumTerm::Zero
        } else if self.eat("x_") {
            NumTerm::Var(self.nat()?)
        } else if self.eat("(") {
            let a = self.num_term()?;
            let op = if self.eat("+") {
                NumTerm::Plus
            } else if self.eat("*") {
                NumTerm::Times
            } else {
                return Err(self.err("expected + or *"));
            };
            let b = self.num_term()?;
            self.expect(")")?;
            op(Box::new(a), Box::new(b))
        } else {
            return Err(self.err("expected a number term"));
        };
        // Successor ticks bind immediately, no whitespace skipping.
        while self.bytes.get(self.pos) == Some(&b'\'') {
            self.pos += 1;
            t = NumTerm::Succ(Box::new(t));
        }
        Ok(t)
    }

    fn formula(&mut self) -> Result<Formula, LogicError> {
        for (kw, var, forall, set) in [
            ("all", "x_", true, false),
            ("ex", "x_", false, false),
            ("ALL", "X_", true, true),
            ("EX", "X_", false, true),
        ] {
            let save = self.pos;
            if self.eat(kw) {
                if !self.eat(var) {
                    self.pos = save;
                    continue;
                }
                let idx = self.nat()?;
                self.expect(".")?;
                let body = self.formula()?;
                return Ok(match (forall, set) {
                    (true, false) => ForallNum(idx, Box::new(body)),
                    (false, false) => ExistsNum(idx, Box::new(body)),
                    (true, true) => ForallSet(idx, Box::new(body)),
                    (false, true) => ExistsSet(idx, Box::new(body)),
                });
            }
        }
        self.skip_ws();
        // "(" opens either a connective or a compound number term; decide
        // by attempting the connective form first.
        if self.bytes.get(self.pos) == Some(&b'(') {
            let save = self.pos;
            self.pos += 1;
            if let Ok(a) = self.formula() {
                let conn = if self.eat("&") {
                    Some(true)
                } else if self.eat("|") {
                    Some(false)
                } else {
                    None
                };
                if let Some(is_and) = conn {
                    let b = self.formula()?;
                    self.expect(")")?;
                    return Ok(if is_and {
                        Formula::and(a, b)
                    } else {
                        Formula::or(a, b)
                    });
                }
            }
            self.pos = save;
        }
        let a = self.num_term()?;
        if self.eat("!=") {
            let b = self.num_term()?;
            return Ok(NegLit(Rel::Eq, a, b));
        }
        if self.eat("!<") {
            let b = self.num_term()?;
            return Ok(NegLit(Rel::Lt, a, b));
        }
        if self.eat("=") {
            let b = self.num_term()?;
            return Ok(PosLit(Rel::Eq, a, b));
        }
        if self.eat("<") {
            let b = self.num_term()?;
            return Ok(PosLit(Rel::Lt, a, b));
        }
        if self.eat("notin") {
            self.expect("U_")?;
            return Ok(NotIn(a, self.nat()?));
        }
        if self.eat("in") {
            self.expect("U_")?;
            return Ok(In(a, self.nat()?));
        }
        Err(self.err("expected a relation"))
    }
}

// ---------------------------------------------------------------------------
// Formula codes
//
// The code of a formula is the index of its canonical text in the
// length-lexicographic enumeration of all canonical formula texts. The
// enumeration is materialized lazily up to a hard length cap; codes beyond
// the cap are not assigned (callers fall back to a fixed instance).
// ---------------------------------------------------------------------------

pub mod codes {
    use super::*;

    /// Texts longer than this are never enumerated.
    pub const MAX_TEXT_LEN: usize = 8;

    struct Cache {
        texts: Vec<String>,
        next_len: usize,
    }

    fn cache() -> &'static Mutex<Cache> {
        static CACHE: OnceLock<Mutex<Cache>> = OnceLock::new();
        CACHE.get_or_init(|| {
            Mutex::new(Cache {
                texts: Vec::new(),
                next_len: 1,
            })
        })
    }

    /// The formula with the given code, if the code is within the
    /// enumerable range.
    pub fn decode(code: u64) -> Option<Formula> {
        let text = nth_text(code)?;
        Some(parse_formula(&text).expect("enumerated texts always parse"))
    }

    /// The code of a formula, if its canonical text is short enough to be
    /// enumerated.
    pub fn encode(f: &Formula) -> Option<u64> {
        let text = print_formula(&canonicalize(f));
        if text.len() > MAX_TEXT_LEN {
            return None;
        }
        let _ = nth_text(u64::MAX); // force full materialization
        let cache = cache().lock().unwrap();
        cache
            .texts
            .binary_search_by(|probe| cmp_len_lex(probe, &text))
            .ok()
            .map(|i| i as u64)
    }

    fn cmp_len_lex(a: &str, b: &str) -> std::cmp::Ordering {
        a.len().cmp(&b.len()).then_with(|| a.cmp(b))
    }

    fn nth_text(n: u64) -> Option<String> {
        let mut cache = cache().lock().unwrap();
        while (cache.texts.len() as u64) <= n && cache.next_len <= MAX_TEXT_LEN {
            let len = cache.next_len;
            let mut batch: Vec<String> = texts_of_len(len)
                .into_iter()
                .filter(|t| {
                    parse_formula(t)
                        .map(|f| print_formula(&f) == *t)
                        .unwrap_or(false)
                })
                .collect();
            batch.sort();
            batch.dedup();
            cache.texts.extend(batch);
            cache.next_len += 1;
        }
        cache.texts.get(n as usize).cloned()
    }

    /// Candidate formula texts of exactly the given length, generated from
    /// the grammar (a superset of the canonical ones; the caller filters
    /// by round-trip).
    fn texts_of_len(len: usize) -> Vec<String> {
        let nts = num_term_texts(len.saturating_sub(2));
        let mut out = Vec::new();
        for (rel, w) in [("=", 1), ("<", 1), ("!=", 2), ("!<", 2)] {
            for a in &nts {
                if a.len() + w >= len {
                    continue;
                }
                for b in &nts {
                    if a.len() + w + b.len() == len {
                        out.push(format!("{a}{rel}{b}"));
                    }
                }
            }
        }
        for kw in [" in U_", " notin U_"] {
            for a in &nts {
                let prefix_len = a.len() + kw.len();
                if prefix_len < len {
                    for idx in nat_texts(len - prefix_len) {
                        out.push(format!("{a}{kw}{idx}"));
                    }
                }
            }
        }
        // Connectives "(A & B)" and quantifiers "all x_i. F" only fit above
        // the current cap, but generate them anyway so the cap can be
        // raised without touching this function.
        if len >= 11 {
            let subs: Vec<String> = (3..len).flat_map(texts_of_len).collect();
            for op in ["&", "|"] {
                for a in &subs {
                    for b in &subs {
                        if a.len() + b.len() + 5 == len {
                            out.push(format!("({a} {op} {b})"));
                        }
                    }
                }
            }
            for (kw, var) in [("all", "x_"), ("ex", "x_"), ("ALL", "X_"), ("EX", "X_")] {
                for body in &subs {
                    let fixed = kw.len() + 1 + var.len() + 2 + body.len();
                    if fixed < len {
                        for idx in nat_texts(len - fixed) {
                            out.push(format!("{kw} {var}{idx}. {body}"));
                        }
                    }
                }
            }
        }
        out
    }

    fn num_term_texts(max_len: usize) -> Vec<String> {
        let mut by_len: Vec<Vec<String>> = vec![Vec::new(); max_len + 1];
        for l in 1..=max_len {
            let mut bucket = Vec::new();
            if l == 1 {
                bucket.push("0".to_string());
            }
            if l >= 2 {
                for t in &by_len[l - 1] {
                    bucket.push(format!("{t}'"));
                }
            }
            if l >= 3 {
                for idx in nat_texts(l - 2) {
                    bucket.push(format!("x_{idx}"));
                }
            }
            if l >= 5 {
                for la in 1..=l - 4 {
                    let lb = l - 3 - la;
                    for a in &by_len[la] {
                        for b in &by_len[lb] {
                            bucket.push(format!("({a}+{b})"));
                            bucket.push(format!("({a}*{b})"));
                        }
                    }
                }
            }
            by_len[l] = bucket;
        }
        by_len.into_iter().flatten().collect()
    }

    /// Decimal texts of exactly the given length, without leading zeros.
    fn nat_texts(len: usize) -> Vec<String> {
        match len {
            0 => Vec::new(),
            1 => (0..10).map(|d| d.to_string()).collect(),
            _ => {
                let mut out = Vec::new();
                let lo = 10u64.pow(len as u32 - 1);
                let hi = 10u64.pow(len as u32);
                for n in lo..hi {
                    out.push(n.to_string());
                }
                out
            }
        }
    }

    /// Cantor unpairing; inverse of z = p + (p+q)(p+q+1)/2.
    pub fn unpair(z: u64) -> (u64, u64) {
        let w = (((8.0 * z as f64 + 1.0).sqrt() as u64).saturating_sub(1)) / 2;
        // Guard against floating point off-by-one near triangle numbers.
        let w = (w.saturating_sub(2)..=w + 2)
            .find(|w| w * (w + 1) / 2 <= z && z < (w + 1) * (w + 2) / 2)
            .unwrap();
        let t = w * (w + 1) / 2;
        let p = z - t;
        (p, w - p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lit(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn negation_examples() {
        let f = In(numeral(1), 3);
        assert_eq!(negate(&f), NotIn(numeral(1), 3));
        let g = Formula::and(lit("0=0"), lit("0<0'"));
        assert_eq!(negate(&g), Formula::or(lit("0!=0"), lit("0!<0'")));
    }

    #[test]
    fn evaluation() {
        assert_eq!(eval_term(&numeral(1)).unwrap(), 1);
        let t = NumTerm::Plus(
            Box::new(numeral(2)),
            Box::new(NumTerm::Times(Box::new(numeral(3)), Box::new(numeral(4)))),
        );
        assert_eq!(eval_term(&t).unwrap(), 14);
        assert_eq!(
            eval_term(&NumTerm::Var(7)),
            Err(LogicError::OpenTerm { var: 7 })
        );
    }

    #[test]
    fn grades() {
        assert_eq!(grade(&lit("0=0")), Grade::Finite(0));
        let f = ForallSet(0, Box::new(In(NumTerm::Zero, 0)));
        assert_eq!(grade(&f), Grade::OmegaPlus(0));
        assert_eq!(
            grade(&Formula::or(lit("0=0"), lit("0<0"))),
            Grade::Finite(1)
        );
        // Non-arithmetic body: one above the body grade.
        let g = ForallSet(0, Box::new(ExistsSet(1, Box::new(In(NumTerm::Zero, 1)))));
        assert_eq!(grade(&g), Grade::OmegaPlus(1));
        assert!(Grade::Finite(17) < Grade::OmegaPlus(0));
        assert!(Grade::OmegaPlus(0) < Grade::OmegaPlus(3));
    }

    #[test]
    fn classification() {
        assert!(is_arithmetic(&In(NumTerm::Zero, 0)));
        let pi11 = ForallSet(0, Box::new(In(NumTerm::Zero, 0)));
        assert!(is_weak(&pi11));
        let sigma11 = ExistsSet(0, Box::new(In(NumTerm::Zero, 0)));
        assert!(!is_weak(&sigma11));
        assert!(is_weak(&lit("0=0")));
    }

    #[test]
    fn substitution() {
        let f = In(NumTerm::Var(0), 2);
        assert_eq!(subst_num(&f, 0, 3), In(numeral(3), 2));

        let pred = FormulaWithHole::new(0, lit("x_0=0"));
        let f = In(numeral(2), 5);
        assert_eq!(
            subst_comprehension(&f, 5, &pred),
            PosLit(Rel::Eq, numeral(2), NumTerm::Zero)
        );
        let g = NotIn(numeral(2), 5);
        assert_eq!(
            subst_comprehension(&g, 5, &pred),
            NegLit(Rel::Eq, numeral(2), NumTerm::Zero)
        );
        // Untouched set variables stay.
        let h = In(numeral(2), 6);
        assert_eq!(subst_comprehension(&h, 5, &pred), h);
    }

    #[test]
    fn capture_avoidance() {
        // ALL X_1. x_0 in U_1 — substituting set var 0 by 1 must rename
        // the binder, not capture.
        let f = ForallSet(1, Box::new(In(NumTerm::Var(0), 0)));
        let g = subst_setvar(&f, 0, 1);
        match g {
            ForallSet(b, body) => {
                assert_ne!(b, 1);
                assert_eq!(*body, In(NumTerm::Var(0), 1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn axiomatic_and_redex() {
        let seq = Sequent::new([lit("0=0")]);
        assert!(is_axiomatic(&seq).unwrap());
        let seq = Sequent::new([
            In(numeral(1), 3),
            NotIn(
                NumTerm::Plus(Box::new(NumTerm::Zero), Box::new(numeral(1))),
                3,
            ),
        ]);
        assert!(is_axiomatic(&seq).unwrap());
        let seq = Sequent::new([In(numeral(1), 3), NotIn(numeral(2), 3), lit("0=0'")]);
        assert!(!is_axiomatic(&seq).unwrap());

        let or = Formula::or(lit("0=0"), lit("0<0"));
        let seq = Sequent::new([In(NumTerm::Zero, 1), or.clone(), lit("0<0")]);
        let redex = find_redex(&seq).unwrap();
        assert_eq!(redex.position, 1);
        assert_eq!(redex.redex, &or);
        assert_eq!(redex.prefix, &[In(NumTerm::Zero, 1)]);
        assert!(find_redex(&Sequent::new([lit("0=0")])).is_none());
    }

    #[test]
    fn sequent_set_semantics() {
        let mut seq = Sequent::new([lit("0=0"), lit("0=0"), lit("0<0")]);
        assert_eq!(seq.len(), 2);
        seq.push(lit("0=0"));
        assert_eq!(seq.len(), 2);
        seq.insert_at(0, lit("0<0"));
        assert_eq!(seq.formulas()[0], lit("0=0"));
    }

    #[test]
    fn parse_print_roundtrip() {
        for text in [
            "0=0",
            "0!<0''",
            "(0+x_3)=x_3",
            "0 in U_0",
            "0' notin U_2",
            "(0=0 & 0<0')",
            "all x_0. (x_0=x_0 | 0 in U_1)",
            "ALL X_0. 0 in U_0",
            "EX X_0. all x_0. x_0 in U_0",
        ] {
            let f = parse_formula(text).unwrap();
            assert_eq!(print_formula(&f), text, "not canonical: {text}");
        }
        // Non-canonical binder indices get minimized.
        let f = parse_formula("all x_5. 0=0").unwrap();
        assert_eq!(print_formula(&f), "all x_0. 0=0");
        // Whitespace between tokens is free-form on input.
        assert_eq!(
            parse_formula("all  x_0 .  ( 0''  in  U_1 | 0 notin U_1 )").unwrap(),
            parse_formula("all x_0. (0'' in U_1 | 0 notin U_1)").unwrap()
        );
        // Binder colliding with a free variable moves aside.
        let f = parse_formula("(x_0=0 & all x_0. x_0=0)").unwrap();
        assert_eq!(print_formula(&f), "(x_0=0 & all x_1. x_1=0)");
    }

    #[test]
    fn code_enumeration_starts_as_expected() {
        assert_eq!(codes::decode(0), Some(lit("0<0")));
        assert_eq!(codes::decode(1), Some(lit("0=0")));
        // Round trip over an initial segment.
        for i in 0..200 {
            let Some(f) = codes::decode(i) else { break };
            assert_eq!(
                codes::encode(&f),
                Some(i),
                "code {i} ({f}) did not round-trip"
            );
        }
        assert_eq!(codes::encode(&lit("0<0")), Some(0));
    }

    #[test]
    fn unpair_is_inverse() {
        let mut seen = std::collections::HashSet::new();
        for z in 0..1000u64 {
            let (p, q) = codes::unpair(z);
            assert_eq!(p + (p + q) * (p + q + 1) / 2, z);
            assert!(seen.insert((p, q)));
        }
    }

    fn arb_num_term() -> impl Strategy<Value = NumTerm> {
        let leaf = prop_oneof![
            Just(NumTerm::Zero),
            (0u32..4).prop_map(NumTerm::Var),
            (0u64..5).prop_map(numeral),
        ];
        leaf.prop_recursive(3, 16, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|t| NumTerm::Succ(Box::new(t))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| NumTerm::Plus(Box::new(a), Box::new(b))),
                (inner.clone(), inner).prop_map(|(a, b)| NumTerm::Times(Box::new(a), Box::new(b))),
            ]
        })
    }

    prop_compose! {
        fn arb_lit()(rel in prop_oneof![Just(Rel::Eq), Just(Rel::Lt)],
                     neg in any::<bool>(),
                     setlit in any::<bool>(),
                     idx in 0u32..4,
                     a in arb_num_term(),
                     b in arb_num_term()) -> Formula {
            match (setlit, neg) {
                (true, false) => In(a, idx),
                (true, true) => NotIn(a, idx),
                (false, false) => PosLit(rel, a, b),
                (false, true) => NegLit(rel, a, b),
            }
        }
    }

    fn arb_formula() -> impl Strategy<Value = Formula> {
        arb_lit().prop_recursive(4, 32, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
                (0u32..4, inner.clone()).prop_map(|(x, b)| ForallNum(x, Box::new(b))),
                (0u32..4, inner.clone()).prop_map(|(x, b)| ExistsNum(x, Box::new(b))),
                (0u32..4, inner.clone()).prop_map(|(x, b)| ForallSet(x, Box::new(b))),
                (0u32..4, inner).prop_map(|(x, b)| ExistsSet(x, Box::new(b))),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn negate_is_an_involution(f in arb_formula()) {
            prop_assert_eq!(negate(&negate(&f)), f);
        }

        #[test]
        fn negate_preserves_grade(f in arb_formula()) {
            prop_assert_eq!(grade(&negate(&f)), grade(&f));
        }

        #[test]
        fn weak_formulas_grade_at_most_omega(f in arb_formula()) {
            if is_weak(&f) {
                prop_assert!(grade(&f) <= Grade::OMEGA);
            }
        }

        #[test]
        fn formula_text_roundtrip(f in arb_formula()) {
            let canon = canonicalize(&f);
            let reparsed = parse_formula(&print_formula(&canon)).unwrap();
            prop_assert_eq!(reparsed, canon);
        }
    }
}
