//! Removal planning: which head triples leave the graph, and on whose
//! testimony.
//!
//! A removal is only useful if the benchmark can re-derive it, so every
//! accepted head comes with a witness grounding whose body triples are
//! pledged to stay. Greedy first-come scheduling enforces both constraints:
//! a candidate head must not be any accepted witness's body triple, and a
//! candidate witness must not lean on an already-removed head.

use std::collections::BTreeSet;

use crate::kg::{KnowledgeGraph, Triple};
use crate::miner::{groundings, Grounding, Rule};

use super::BenchError;

#[derive(Debug, Clone)]
pub struct Removal {
    pub head_triple: Triple,
    pub witness: Grounding,
    /// Index into the rule slice the plan was built from.
    pub rule_index: usize,
}

#[derive(Debug, Clone)]
pub struct RemovalPlan {
    pub removals: Vec<Removal>,
}

impl RemovalPlan {
    pub fn head_triples(&self) -> Vec<Triple> {
        self.removals.iter().map(|r| r.head_triple).collect()
    }
}

/// Selects up to `per_rule_limit` removable head triples per rule, scanning
/// rules in the order given and each rule's groundings in ascending head
/// order. A head removed by an earlier rule is never removed again. The
/// seed is recorded for provenance but unused: selection is deliberately
/// deterministic, not sampled.
pub fn plan_removals(
    graph: &KnowledgeGraph,
    rules: &[Rule],
    per_rule_limit: usize,
    _seed: u64,
) -> Result<RemovalPlan, BenchError> {
    let mut removed: BTreeSet<Triple> = BTreeSet::new();
    let mut protected: BTreeSet<Triple> = BTreeSet::new();
    let mut removals: Vec<Removal> = Vec::new();

    if per_rule_limit > 0 {
        for (rule_index, rule) in rules.iter().enumerate() {
            let mut accepted = 0;
            for grounding in groundings(rule, graph, usize::MAX) {
                if accepted == per_rule_limit {
                    break;
                }
                if admissible(&grounding, &removed, &protected) {
                    removed.insert(grounding.head_triple);
                    protected.extend(grounding.body_triples.iter().copied());
                    removals.push(Removal {
                        head_triple: grounding.head_triple,
                        witness: grounding,
                        rule_index,
                    });
                    accepted += 1;
                }
            }
        }
    }

    if removals.is_empty() {
        return Err(BenchError::EmptyPlan);
    }
    Ok(RemovalPlan { removals })
}

fn admissible(
    grounding: &Grounding,
    removed: &BTreeSet<Triple>,
    protected: &BTreeSet<Triple>,
) -> bool {
    let head = grounding.head_triple;
    // A reflexive head has no distinct topic/answer pair to ask about.
    if head.subject == head.object {
        return false;
    }
    // A witness that contains its own head evaporates on removal.
    if grounding.body_triples.contains(&head) {
        return false;
    }
    if removed.contains(&head) || protected.contains(&head) {
        return false;
    }
    // Body triples must remain in the incomplete graph.
    !grounding.body_triples.iter().any(|b| removed.contains(b))
}
