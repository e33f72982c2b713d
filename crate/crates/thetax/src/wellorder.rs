//! The parameter well-ordering: a decidable carrier of naturals plus a
//! total comparison oracle.
//!
//! Builtin families are well-founded by construction. Well-foundedness of
//! user-supplied table orderings is not (and cannot be) verified; what is
//! validated is that the input describes a strict total order on the
//! mentioned elements.
//!
//! Note: the set-theoretic development requires the parameter ordering to
//! have no maximum element. The term system itself is meaningful for any
//! well-ordering, and finite orderings (in particular Kleene-Brouwer
//! orderings of truncated search trees) are the main source of parameters
//! here, so finite carriers are accepted.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WoError {
    #[error("table declares a cycle: {u} < {v} but also {v} <= {u}")]
    Cyclic { u: u64, v: u64 },
    #[error("elements {u} and {v} are mentioned but not comparable")]
    Incomparable { u: u64, v: u64 },
    #[error("line {line}: expected `u < v`, got {text:?}")]
    BadTableLine { line: usize, text: String },
}

#[derive(Debug, Clone)]
enum Carrier {
    /// All naturals with their usual order.
    Nat,
    /// The initial segment `{0, .., n-1}` with the usual order.
    Finite(u64),
    /// Explicit finite carrier; `rank[u] < rank[v]` iff `u < v`.
    Ranked(BTreeMap<u64, u64>),
}

/// A decidable carrier of naturals plus a strict total order oracle on it.
///
/// Values are immutable after construction; the oracle is pure.
#[derive(Debug, Clone)]
pub struct WellOrdering {
    carrier: Carrier,
    description: String,
    finite_bound: Option<u64>,
}

impl WellOrdering {
    pub fn carrier_contains(&self, n: u64) -> bool {
        match &self.carrier {
            Carrier::Nat => true,
            Carrier::Finite(b) => n < *b,
            Carrier::Ranked(rank) => rank.contains_key(&n),
        }
    }

    /// Compare two carrier elements; `None` if either is off the carrier.
    pub fn less(&self, u: u64, v: u64) -> Option<Ordering> {
        match &self.carrier {
            Carrier::Nat => Some(u.cmp(&v)),
            Carrier::Finite(b) => (u < *b && v < *b).then(|| u.cmp(&v)),
            Carrier::Ranked(rank) => Some(rank.get(&u)?.cmp(rank.get(&v)?)),
        }
    }

    pub fn lt(&self, u: u64, v: u64) -> bool {
        self.less(u, v) == Some(Ordering::Less)
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// `Some(n)` iff the carrier is exactly the initial segment `{0, .., n-1}`.
    pub fn finite_bound(&self) -> Option<u64> {
        self.finite_bound
    }

    /// The first `n` carrier elements in ascending order (fewer if the
    /// carrier is smaller). Used to pick E-index prefixes.
    pub fn prefix(&self, n: usize) -> Vec<u64> {
        match &self.carrier {
            Carrier::Nat => (0..n as u64).collect(),
            Carrier::Finite(b) => (0..*b).take(n).collect(),
            Carrier::Ranked(rank) => {
                let mut elems: Vec<u64> = rank.keys().copied().collect();
                elems.sort_by_key(|u| rank[u]);
                elems.truncate(n);
                elems
            }
        }
    }
}

impl fmt::Display for WellOrdering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.description)
    }
}

/// The naturals with their usual order.
pub fn wo_nat() -> WellOrdering {
    WellOrdering {
        carrier: Carrier::Nat,
        description: "nat".to_string(),
        finite_bound: None,
    }
}

/// The initial segment `{0, .., n-1}` with the usual order.
pub fn wo_finite(n: u64) -> WellOrdering {
    WellOrdering {
        carrier: Carrier::Finite(n),
        description: format!("finite:{n}"),
        finite_bound: Some(n),
    }
}

/// Build an ordering from explicit `u < v` pairs.
///
/// The transitive closure of the pairs must be a strict total order on the
/// set of mentioned elements; cyclic or incomparable inputs are rejected
/// with the offending pair.
pub fn wo_table(pairs: &[(u64, u64)]) -> Result<WellOrdering, WoError> {
    let mut elems: Vec<u64> = pairs.iter().flat_map(|&(u, v)| [u, v]).collect();
    elems.sort_unstable();
    elems.dedup();
    let index: BTreeMap<u64, usize> = elems.iter().enumerate().map(|(i, &u)| (u, i)).collect();
    let n = elems.len();

    // Transitive closure over the mentioned elements.
    let mut lt = vec![false; n * n];
    for &(u, v) in pairs {
        lt[index[&u] * n + index[&v]] = true;
    }
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                if !lt[i * n + j] {
                    continue;
                }
                for k in 0..n {
                    if lt[j * n + k] && !lt[i * n + k] {
                        lt[i * n + k] = true;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }

    for i in 0..n {
        for j in 0..n {
            if i != j && lt[i * n + j] && lt[j * n + i] {
                return Err(WoError::Cyclic {
                    u: elems[i],
                    v: elems[j],
                });
            }
        }
        if lt[i * n + i] {
            return Err(WoError::Cyclic {
                u: elems[i],
                v: elems[i],
            });
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if !lt[i * n + j] && !lt[j * n + i] {
                return Err(WoError::Incomparable {
                    u: elems[i],
                    v: elems[j],
                });
            }
        }
    }

    // Rank = number of strictly smaller elements.
    let mut rank = BTreeMap::new();
    for i in 0..n {
        let r = (0..n).filter(|&j| lt[j * n + i]).count() as u64;
        rank.insert(elems[i], r);
    }
    let finite_bound = initial_segment_bound(&rank);
    Ok(WellOrdering {
        carrier: Carrier::Ranked(rank),
        description: format!("table:{n} elements"),
        finite_bound,
    })
}

/// Parse the table file format: one `u < v` relation per line, `#` starts a
/// comment, blank lines ignored.
pub fn parse_table_file(text: &str) -> Result<WellOrdering, WoError> {
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = || WoError::BadTableLine {
            line: lineno + 1,
            text: raw.to_string(),
        };
        let (lhs, rhs) = line.split_once('<').ok_or_else(bad)?;
        let u = lhs.trim().parse::<u64>().map_err(|_| bad())?;
        let v = rhs.trim().parse::<u64>().map_err(|_| bad())?;
        pairs.push((u, v));
    }
    wo_table(&pairs)
}

/// The Kleene-Brouwer ordering of a finite tree's node set.
///
/// Nodes are encoded as naturals by their preorder index (root = 0,
/// children visited in child-index order); the order itself is the tree's
/// Kleene-Brouwer order, so the root encodes to the maximum element.
pub fn wo_from_kb(tree: &crate::deduction::DTree) -> WellOrdering {
    let preorder = tree.preorder_paths();
    let pos: BTreeMap<&[u32], u64> = preorder
        .iter()
        .enumerate()
        .map(|(i, p)| (p.as_slice(), i as u64))
        .collect();
    let mut rank = BTreeMap::new();
    for (kb_rank, path) in tree.kb_listing().iter().enumerate() {
        rank.insert(pos[path.as_slice()], kb_rank as u64);
    }
    let finite_bound = initial_segment_bound(&rank);
    WellOrdering {
        carrier: Carrier::Ranked(rank),
        description: format!("kb:{} nodes", preorder.len()),
        finite_bound,
    }
}

fn initial_segment_bound(rank: &BTreeMap<u64, u64>) -> Option<u64> {
    let n = rank.len() as u64;
    rank.keys().copied().eq(0..n).then_some(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nat_order() {
        let wo = wo_nat();
        assert_eq!(wo.less(3, 5), Some(Ordering::Less));
        assert_eq!(wo.less(5, 5), Some(Ordering::Equal));
        assert!(wo.carrier_contains(1_000_000));
        assert_eq!(wo.finite_bound(), None);
    }

    #[test]
    fn finite_carrier() {
        let wo = wo_finite(2);
        assert!(!wo.carrier_contains(2));
        assert!(wo.carrier_contains(1));
        assert_eq!(wo.less(0, 2), None);
        assert_eq!(wo.finite_bound(), Some(2));
    }

    #[test]
    fn table_transitive_closure() {
        let wo = wo_table(&[(7, 3), (3, 9)]).unwrap();
        assert_eq!(wo.less(7, 9), Some(Ordering::Less));
        assert_eq!(wo.less(9, 7), Some(Ordering::Greater));
        assert!(!wo.carrier_contains(4));
        // Carrier {3,7,9} is not an initial segment.
        assert_eq!(wo.finite_bound(), None);
    }

    #[test]
    fn table_rejects_cycles() {
        let err = wo_table(&[(1, 2), (2, 3), (3, 1)]).unwrap_err();
        assert!(matches!(err, WoError::Cyclic { .. }));
    }

    #[test]
    fn table_rejects_incomparable() {
        let err = wo_table(&[(1, 2), (3, 4), (1, 4), (3, 2)]).unwrap_err();
        match err {
            WoError::Incomparable { u, v } => {
                let mut pair = [u, v];
                pair.sort_unstable();
                assert!(pair == [1, 3] || pair == [2, 4]);
            }
            other => panic!("expected incomparable, got {other:?}"),
        }
    }

    #[test]
    fn table_file_format() {
        let wo = parse_table_file("# order on three elements\n2 < 0\n0 < 1\n").unwrap();
        assert_eq!(wo.less(2, 1), Some(Ordering::Less));
        assert_eq!(wo.finite_bound(), Some(3));
        assert_eq!(wo.prefix(2), vec![2, 0]);
        assert!(parse_table_file("1 << 2").is_err());
    }

    #[test]
    fn kb_ordering_of_trees() {
        use crate::deduction::{build_tree, AxiomConfig, QOracle, SearchParams};
        use crate::logic::parse_formula;

        let q = QOracle::Finite([7].into());
        // Depth zero: a single root, hence a one-element ordering.
        let tree = build_tree(&q, &SearchParams::new(0, 1)).unwrap();
        let wo = wo_from_kb(&tree);
        assert_eq!(wo.finite_bound(), Some(1));
        assert_eq!(wo.less(0, 0), Some(Ordering::Equal));

        // A negated conjunction at the root splits into two leaf children;
        // preorder numbers them root=0, left=1, right=2, and the KB order
        // puts left < right < root.
        let mut params = SearchParams::new(1, 1);
        params.axioms = AxiomConfig {
            aca: parse_formula("(0=0 | 0<0)").unwrap(),
        };
        let tree = build_tree(&q, &params).unwrap();
        assert_eq!(tree.node_count(), 3);
        let wo = wo_from_kb(&tree);
        assert_eq!(wo.finite_bound(), Some(3));
        assert_eq!(wo.less(1, 2), Some(Ordering::Less));
        assert_eq!(wo.less(2, 0), Some(Ordering::Less));
        // The root is the maximum element.
        assert!(wo.lt(1, 0) && wo.lt(2, 0));
    }

    #[test]
    fn kb_leaves_follow_left_first_traversal() {
        use crate::deduction::{build_tree, QOracle, SearchParams};

        let q = QOracle::parse_spec("evens<=4").unwrap();
        let tree = build_tree(&q, &SearchParams::new(6, 2)).unwrap();
        let wo = wo_from_kb(&tree);
        // Preorder index by path, leaves in left-first traversal order.
        let preorder = tree.preorder_paths();
        let leaves: Vec<u64> = preorder
            .iter()
            .enumerate()
            .filter(|(_, p)| tree.children_count(p) == Some(0))
            .map(|(i, _)| i as u64)
            .collect();
        assert!(leaves.len() > 1);
        for pair in leaves.windows(2) {
            assert_eq!(wo.less(pair[0], pair[1]), Some(Ordering::Less));
        }
    }

    #[test]
    fn builtin_families_are_strict_total_orders() {
        let families = [wo_nat(), wo_finite(6), wo_table(&[(5, 1), (1, 0)]).unwrap()];
        for wo in &families {
            let sample: Vec<u64> = (0..8).filter(|&n| wo.carrier_contains(n)).collect();
            for &u in &sample {
                for &v in &sample {
                    let c = wo.less(u, v).unwrap();
                    // Trichotomy: exactly one of the three relations holds.
                    assert_eq!(c == Ordering::Equal, u == v);
                    assert_eq!(c.reverse(), wo.less(v, u).unwrap());
                    for &w in &sample {
                        if c == Ordering::Less && wo.less(v, w) == Some(Ordering::Less) {
                            assert_eq!(wo.less(u, w), Some(Ordering::Less));
                        }
                    }
                }
            }
        }
    }
}
