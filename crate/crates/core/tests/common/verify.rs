//! Independent single-step forward chaining, used to check that every
//! removed triple really is recoverable from what remains.

use std::collections::{HashMap, HashSet};

use kgbench::kg::{EntityId, KnowledgeGraph, Triple};
use kgbench::miner::{Atom, Rule, Term, Variable};

fn term_entity(term: Term, assign: &HashMap<u8, EntityId>) -> EntityId {
    match term {
        Term::Const(e) => e,
        Term::Var(Variable(v)) => assign[&v],
    }
}

/// Every head grounding derivable from `graph` in one application of
/// `rule`: instantiate the body against the graph and emit the bound head,
/// whether or not the graph already contains it.
pub fn derive_heads(rule: &Rule, graph: &KnowledgeGraph) -> HashSet<Triple> {
    fn descend(
        body: &[Atom],
        graph: &KnowledgeGraph,
        assign: &mut HashMap<u8, EntityId>,
        heads: &mut Vec<(EntityId, EntityId)>,
        head: &Atom,
    ) {
        let Some(atom) = body.first() else {
            heads.push((term_entity(head.subject, assign), term_entity(head.object, assign)));
            return;
        };
        for triple in graph.triples_with_p(atom.predicate) {
            let mut bound: Vec<u8> = Vec::new();
            let mut ok = true;
            for (term, entity) in [(atom.subject, triple.subject), (atom.object, triple.object)] {
                match term {
                    Term::Const(c) => ok = c == entity,
                    Term::Var(Variable(v)) => match assign.get(&v) {
                        Some(&e) => ok = e == entity,
                        None => {
                            assign.insert(v, entity);
                            bound.push(v);
                        }
                    },
                }
                if !ok {
                    break;
                }
            }
            if ok {
                descend(&body[1..], graph, assign, heads, head);
            }
            for v in bound {
                assign.remove(&v);
            }
        }
    }

    let mut pairs = Vec::new();
    descend(&rule.body, graph, &mut HashMap::new(), &mut pairs, &rule.head);
    pairs
        .into_iter()
        .map(|(s, o)| Triple::new(s, rule.head.predicate, o))
        .collect()
}
