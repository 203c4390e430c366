//! Refinement operators: all legal one-atom extensions of a rule.

use std::collections::HashSet;

use super::{canonical, Atom, Rule, Term, Variable, MAX_VARS};
use crate::kg::{EntityId, KnowledgeGraph};

/// Dangling and closing refinements, plus instantiated ones when asked for.
pub(crate) fn refinements(rule: &Rule, graph: &KnowledgeGraph, instantiated: bool) -> Vec<Rule> {
    refinements_with(rule, graph, true, instantiated)
}

/// Refinements with the dangling operator switchable. The mining loop turns
/// dangling off on the last level: an atom with a fresh variable can never
/// be part of a closed rule of the target length.
pub(crate) fn refinements_with(
    rule: &Rule,
    graph: &KnowledgeGraph,
    dangling: bool,
    instantiated: bool,
) -> Vec<Rule> {
    let vars = rule.variables();
    let mut out = Vec::new();
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let push = |atom: Atom, out: &mut Vec<Rule>, seen: &mut HashSet<Vec<u32>>| {
        if rule.atoms().any(|existing| *existing == atom) {
            return;
        }
        let mut body = rule.body.clone();
        body.push(atom);
        let child = Rule::new(rule.head, body);
        if seen.insert(canonical::canonical_key(&child)) {
            out.push(child);
        }
    };

    if dangling {
        if let Some(fresh) = fresh_variable(&vars) {
            for &v in &vars {
                for p in graph.predicates() {
                    push(Atom::new(p, Term::Var(v), Term::Var(fresh)), &mut out, &mut seen);
                    push(Atom::new(p, Term::Var(fresh), Term::Var(v)), &mut out, &mut seen);
                }
            }
        }
    }
    for &s in &vars {
        for &o in &vars {
            if s == o {
                continue;
            }
            for p in graph.predicates() {
                push(Atom::new(p, Term::Var(s), Term::Var(o)), &mut out, &mut seen);
            }
        }
    }
    if instantiated {
        for p in graph.predicates() {
            let facts = graph.triples_with_p(p);
            // The per-predicate index is ordered by object, so objects
            // dedup in place; subjects need a sort first.
            let mut objects: Vec<EntityId> = facts.iter().map(|t| t.object).collect();
            let mut subjects: Vec<EntityId> = facts.iter().map(|t| t.subject).collect();
            objects.dedup();
            subjects.sort_unstable();
            subjects.dedup();
            for &v in &vars {
                for &c in &objects {
                    push(Atom::new(p, Term::Var(v), Term::Const(c)), &mut out, &mut seen);
                }
                for &c in &subjects {
                    push(Atom::new(p, Term::Const(c), Term::Var(v)), &mut out, &mut seen);
                }
            }
        }
    }
    out
}

fn fresh_variable(vars: &[Variable]) -> Option<Variable> {
    let next = vars.last().map_or(0, |v| v.0 as usize + 1);
    (next < MAX_VARS).then_some(Variable(next as u8))
}
