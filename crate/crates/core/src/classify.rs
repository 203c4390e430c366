//! Structural taxonomy of Horn rules.
//!
//! Rules are labelled by the shape of their variable bindings alone;
//! predicate identities are never consulted. The reported histogram folds
//! the long-chain, triangle, and intersection shapes into `Other`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::miner::{Atom, Rule, Variable};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum RuleType {
    Symmetry,
    Inversion,
    Hierarchy,
    Composition,
    LongChain,
    Triangle,
    Intersection,
    Other,
}

impl RuleType {
    pub fn name(self) -> &'static str {
        match self {
            RuleType::Symmetry => "Symmetry",
            RuleType::Inversion => "Inversion",
            RuleType::Hierarchy => "Hierarchy",
            RuleType::Composition => "Composition",
            RuleType::LongChain => "LongChain",
            RuleType::Triangle => "Triangle",
            RuleType::Intersection => "Intersection",
            RuleType::Other => "Other",
        }
    }

    /// The reporting bucket: fine-grained shapes beyond the four headline
    /// classes all count as `Other`.
    pub fn table_bucket(self) -> RuleType {
        match self {
            RuleType::LongChain | RuleType::Triangle | RuleType::Intersection => RuleType::Other,
            other => other,
        }
    }
}

impl fmt::Display for RuleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn var_pair(atom: &Atom) -> Option<(Variable, Variable)> {
    Some((atom.subject.as_var()?, atom.object.as_var()?))
}

/// Assigns the first matching shape in the order Symmetry, Inversion,
/// Hierarchy, Composition, LongChain, Triangle, Intersection, with Other as
/// the total fallback. Matching is modulo variable renaming, so distinct
/// shape variables must bind distinct rule variables; body atom order is
/// immaterial. Two shape predicates may name the same concrete predicate,
/// which is why the specific shapes are tried first (a symmetric rule also
/// fits the inversion shape with both its predicates equal).
pub fn classify(rule: &Rule) -> RuleType {
    let Some((hs, ho)) = var_pair(&rule.head) else {
        return RuleType::Other;
    };
    if hs == ho {
        return RuleType::Other;
    }
    match rule.body.as_slice() {
        [only] => {
            let Some((bs, bo)) = var_pair(only) else {
                return RuleType::Other;
            };
            if (bs, bo) == (ho, hs) {
                if only.predicate == rule.head.predicate {
                    RuleType::Symmetry
                } else {
                    RuleType::Inversion
                }
            } else if (bs, bo) == (hs, ho) {
                RuleType::Hierarchy
            } else {
                RuleType::Other
            }
        }
        [first, second] => {
            let (Some(a), Some(b)) = (var_pair(first), var_pair(second)) else {
                return RuleType::Other;
            };
            // Chain x -> mid -> y under a head on (x, y), mid fresh.
            let chain = |lhs: (Variable, Variable), rhs: (Variable, Variable)| {
                lhs.0 == hs && rhs.1 == ho && lhs.1 == rhs.0 && lhs.1 != hs && lhs.1 != ho
            };
            if chain(a, b) || chain(b, a) {
                return RuleType::Composition;
            }
            // Fork from a fresh shared subject onto both head arguments.
            let fork = |lhs: (Variable, Variable), rhs: (Variable, Variable)| {
                lhs.1 == hs && rhs.1 == ho && lhs.0 == rhs.0 && lhs.0 != hs && lhs.0 != ho
            };
            if fork(a, b) || fork(b, a) {
                return RuleType::Triangle;
            }
            if a == (hs, ho) && b == (hs, ho) {
                return RuleType::Intersection;
            }
            RuleType::Other
        }
        [first, second, third] => {
            let (Some(a), Some(b), Some(c)) = (var_pair(first), var_pair(second), var_pair(third))
            else {
                return RuleType::Other;
            };
            for [p, q, r] in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
                let fresh = |v: Variable| v != hs && v != ho;
                if p.0 == hs
                    && p.1 == q.0
                    && q.1 == r.0
                    && r.1 == ho
                    && fresh(p.1)
                    && fresh(q.1)
                    && p.1 != q.1
                {
                    return RuleType::LongChain;
                }
            }
            RuleType::Other
        }
        _ => RuleType::Other,
    }
}

/// Counts rules per reporting bucket. Every bucket key is present even at
/// zero so the table layout is stable.
pub fn type_histogram(rules: &[Rule]) -> BTreeMap<RuleType, u64> {
    let mut histogram: BTreeMap<RuleType, u64> = [
        RuleType::Symmetry,
        RuleType::Inversion,
        RuleType::Hierarchy,
        RuleType::Composition,
        RuleType::Other,
    ]
    .into_iter()
    .map(|kind| (kind, 0))
    .collect();
    for rule in rules {
        *histogram.entry(classify(rule).table_bucket()).or_insert(0) += 1;
    }
    histogram
}

/// Renders a histogram as a two-column text table with a trailing total row.
pub fn render_histogram(histogram: &BTreeMap<RuleType, u64>) -> String {
    let mut rows: Vec<(&str, u64)> =
        histogram.iter().map(|(kind, count)| (kind.name(), *count)).collect();
    rows.push(("Total", histogram.values().sum()));
    let label_width = rows
        .iter()
        .map(|(label, _)| label.len())
        .max()
        .unwrap_or(0)
        .max("Rule type".len());
    let count_width = rows
        .iter()
        .map(|(_, count)| count.to_string().len())
        .max()
        .unwrap_or(0)
        .max("Count".len());
    let mut out = format!("{:label_width$}  {:>count_width$}\n", "Rule type", "Count");
    for (label, count) in rows {
        out.push_str(&format!("{label:<label_width$}  {count:>count_width$}\n"));
    }
    out
}
