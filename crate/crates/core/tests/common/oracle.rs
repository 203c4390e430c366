//! Exhaustive enumerate-then-filter reference miner.
//!
//! Everything here is written from the definitions, not from the mining
//! engine: rule templates are spelled out rather than refined, measures
//! come from a backtracking join over the raw triple lists, thresholds are
//! checked by explicit cross-multiplication, and the skyline embedding is
//! its own search. Agreement with `mine()` is then meaningful evidence.

use std::collections::{BTreeMap, HashMap, HashSet};

use kgbench::kg::{EntityId, KnowledgeGraph, PredicateId, Triple};
use kgbench::miner::{Atom, Measures, MinerConfig, Rule, Term, Variable};

/// Canonical key for comparing rules modulo renaming of body-only
/// variables. The head is pinned to (v0, v1); every injective renaming of
/// the remaining variables onto 2, 3, ... is tried and the smallest sorted
/// body encoding wins.
pub fn alpha_key(rule: &Rule) -> Vec<u32> {
    let encode_term = |term: Term, map: &HashMap<u8, u32>| match term {
        Term::Var(v) => map[&v.0],
        Term::Const(e) => 1_000_000 + e.index() as u32,
    };
    let mut body_only: Vec<u8> = Vec::new();
    for atom in &rule.body {
        for term in [atom.subject, atom.object] {
            if let Term::Var(Variable(v)) = term {
                if v > 1 && !body_only.contains(&v) {
                    body_only.push(v);
                }
            }
        }
    }
    let mut best: Option<Vec<u32>> = None;
    for perm in permutations(body_only.len()) {
        let mut map: HashMap<u8, u32> = HashMap::from([(0, 0), (1, 1)]);
        for (&var, &slot) in body_only.iter().zip(&perm) {
            map.insert(var, 2 + slot as u32);
        }
        let mut atoms: Vec<[u32; 3]> = rule
            .body
            .iter()
            .map(|a| {
                [a.predicate.index() as u32, encode_term(a.subject, &map), encode_term(a.object, &map)]
            })
            .collect();
        atoms.sort();
        let mut key = vec![
            rule.head.predicate.index() as u32,
            encode_term(rule.head.subject, &map),
            encode_term(rule.head.object, &map),
        ];
        for atom in atoms {
            key.extend(atom);
        }
        if best.as_ref().is_none_or(|b| key < *b) {
            best = Some(key);
        }
    }
    best.expect("at least the empty permutation")
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for slot in 0..=rest.len() {
            let mut perm = rest.clone();
            perm.insert(slot, n - 1);
            out.push(perm);
        }
    }
    out
}

fn occurs_twice_each(rule: &Rule) -> bool {
    let mut counts: HashMap<u8, usize> = HashMap::new();
    for atom in rule.atoms() {
        for term in [atom.subject, atom.object] {
            if let Term::Var(Variable(v)) = term {
                *counts.entry(v).or_insert(0) += 1;
            }
        }
    }
    counts.values().all(|&c| c >= 2)
}

fn connected(rule: &Rule) -> bool {
    let atoms: Vec<&Atom> = rule.atoms().collect();
    let share = |a: &Atom, b: &Atom| {
        [a.subject, a.object]
            .iter()
            .any(|t| [b.subject, b.object].contains(t))
    };
    let mut reached = vec![false; atoms.len()];
    reached[0] = true;
    loop {
        let mut grew = false;
        for i in 0..atoms.len() {
            if reached[i] {
                continue;
            }
            if (0..atoms.len()).any(|j| reached[j] && share(atoms[i], atoms[j])) {
                reached[i] = true;
                grew = true;
            }
        }
        if !grew {
            return reached.iter().all(|&r| r);
        }
    }
}

fn safe(rule: &Rule) -> bool {
    let body_vars: HashSet<Term> = rule
        .body
        .iter()
        .flat_map(|a| [a.subject, a.object])
        .filter(|t| matches!(t, Term::Var(_)))
        .collect();
    [rule.head.subject, rule.head.object]
        .iter()
        .all(|t| body_vars.contains(t))
}

/// Every closed, connected, safe variable-only rule of up to `max_length`
/// atoms (head included) over the graph's predicates, one representative
/// per alpha-equivalence class. Supports lengths 2 and 3.
pub fn enumerate_rules(graph: &KnowledgeGraph, max_length: usize) -> Vec<Rule> {
    assert!(
        (2..=3).contains(&max_length),
        "the oracle enumerates templates up to length 3"
    );
    let preds: Vec<PredicateId> = graph.predicates().collect();
    let vars = [Term::var(0), Term::var(1), Term::var(2)];
    let mut atoms: Vec<Atom> = Vec::new();
    for &p in &preds {
        for s in 0..3 {
            for o in 0..3 {
                if s != o {
                    atoms.push(Atom::new(p, vars[s], vars[o]));
                }
            }
        }
    }

    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut rules: Vec<Rule> = Vec::new();
    let admit = |rule: Rule, seen: &mut HashSet<Vec<u32>>, rules: &mut Vec<Rule>| {
        let distinct = rule
            .body
            .iter()
            .enumerate()
            .all(|(i, a)| *a != rule.head && rule.body[..i].iter().all(|b| b != a));
        if distinct
            && occurs_twice_each(&rule)
            && connected(&rule)
            && safe(&rule)
            && seen.insert(alpha_key(&rule))
        {
            rules.push(rule);
        }
    };

    for &h in &preds {
        let head = Atom::new(h, vars[0], vars[1]);
        for &b1 in &atoms {
            admit(Rule::new(head, vec![b1]), &mut seen, &mut rules);
        }
        if max_length >= 3 {
            for (i, &b1) in atoms.iter().enumerate() {
                for &b2 in &atoms[i + 1..] {
                    admit(Rule::new(head, vec![b1, b2]), &mut seen, &mut rules);
                }
            }
        }
    }
    rules
}

/// All distinct bindings of the head variable pair that satisfy the body,
/// found by backtracking over the per-predicate triple lists.
fn body_bindings(rule: &Rule, graph: &KnowledgeGraph) -> HashSet<(EntityId, EntityId)> {
    fn descend(
        body: &[Atom],
        graph: &KnowledgeGraph,
        assign: &mut HashMap<u8, EntityId>,
        pairs: &mut HashSet<(EntityId, EntityId)>,
    ) {
        let Some(atom) = body.first() else {
            pairs.insert((assign[&0], assign[&1]));
            return;
        };
        for triple in graph.triples_with_p(atom.predicate) {
            let mut bound: Vec<u8> = Vec::new();
            let mut ok = true;
            for (term, entity) in [(atom.subject, triple.subject), (atom.object, triple.object)] {
                match term {
                    Term::Const(c) => {
                        if c != entity {
                            ok = false;
                        }
                    }
                    Term::Var(Variable(v)) => match assign.get(&v) {
                        Some(&e) => {
                            if e != entity {
                                ok = false;
                            }
                        }
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
                descend(&body[1..], graph, assign, pairs);
            }
            for v in bound {
                assign.remove(&v);
            }
        }
    }

    let mut pairs = HashSet::new();
    descend(&rule.body, graph, &mut HashMap::new(), &mut pairs);
    pairs
}

/// The four integer counts, from first principles.
pub fn oracle_measures(rule: &Rule, graph: &KnowledgeGraph) -> Measures {
    let pairs = body_bindings(rule, graph);
    let head = rule.head.predicate;
    let support = pairs
        .iter()
        .filter(|&&(x, y)| graph.contains(Triple::new(x, head, y)))
        .count() as u64;
    let pca_pairs = pairs
        .iter()
        .filter(|&&(x, _)| !graph.triples_with_sp(x, head).is_empty())
        .count() as u64;
    Measures {
        support,
        head_facts: graph.triples_with_p(head).len() as u64,
        body_pairs: pairs.len() as u64,
        pca_pairs,
    }
}

fn meets(num: u64, den: u64, threshold_num: u32, threshold_den: u32) -> bool {
    // num/den >= threshold, cross-multiplied; a zero denominator fails.
    den != 0 && u128::from(num) * u128::from(threshold_den) >= u128::from(threshold_num) * u128::from(den)
}

fn passes(m: &Measures, config: &MinerConfig) -> bool {
    m.support > 0
        && meets(m.support, m.head_facts, config.min_head_coverage.num(), config.min_head_coverage.den())
        && meets(m.support, m.body_pairs, config.min_confidence.num(), config.min_confidence.den())
        && meets(m.support, m.pca_pairs, config.min_pca_confidence.num(), config.min_pca_confidence.den())
}

/// Does `small`'s body map into `large`'s under an injective variable
/// renaming that fixes the head pair? Brute force over target atoms.
fn body_embeds(small: &Rule, large: &Rule) -> bool {
    fn extend(
        small: &[Atom],
        large: &[Atom],
        map: &mut HashMap<u8, u8>,
    ) -> bool {
        let Some(atom) = small.first() else { return true };
        for target in large {
            if target.predicate != atom.predicate {
                continue;
            }
            let mut added: Vec<u8> = Vec::new();
            let mut ok = true;
            for (term, target_term) in
                [(atom.subject, target.subject), (atom.object, target.object)]
            {
                let (Term::Var(Variable(v)), Term::Var(Variable(w))) = (term, target_term) else {
                    ok = term == target_term;
                    if !ok {
                        break;
                    }
                    continue;
                };
                match map.get(&v) {
                    Some(&mapped) => {
                        if mapped != w {
                            ok = false;
                        }
                    }
                    None => {
                        if map.values().any(|&used| used == w) {
                            ok = false;
                        } else {
                            map.insert(v, w);
                            added.push(v);
                        }
                    }
                }
                if !ok {
                    break;
                }
            }
            if ok && extend(&small[1..], large, map) {
                return true;
            }
            for v in added {
                map.remove(&v);
            }
        }
        false
    }

    let mut map = HashMap::from([(0u8, 0u8), (1, 1)]);
    extend(&small.body, &large.body, &mut map)
}

/// The reference answer: every rule the definitions say `mine()` must
/// return, as (alpha key → measures).
pub fn oracle_mine(graph: &KnowledgeGraph, config: &MinerConfig) -> BTreeMap<Vec<u32>, Measures> {
    let mut survivors: Vec<(Rule, Measures)> = enumerate_rules(graph, config.max_length)
        .into_iter()
        .map(|rule| {
            let m = oracle_measures(&rule, graph);
            (rule, m)
        })
        .filter(|(_, m)| passes(m, config))
        .collect();
    survivors.sort_by_key(|(rule, _)| rule.body.len());

    let mut output: Vec<(Rule, Measures)> = Vec::new();
    'next: for (rule, m) in survivors {
        for (kept, kept_m) in &output {
            let shorter = kept.body.len() < rule.body.len();
            let same_head = kept.head.predicate == rule.head.predicate;
            let pca_at_least = u128::from(kept_m.support) * u128::from(m.pca_pairs)
                >= u128::from(m.support) * u128::from(kept_m.pca_pairs);
            if shorter && same_head && pca_at_least && body_embeds(kept, &rule) {
                continue 'next;
            }
        }
        output.push((rule, m));
    }
    output
        .into_iter()
        .map(|(rule, m)| (alpha_key(&rule), m))
        .collect()
}
