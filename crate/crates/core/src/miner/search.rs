//! Breadth-first mining loop.

use std::collections::HashSet;

use rayon::prelude::*;

use super::{counting, refine, structural_checks, Atom, MinerConfig, Rule, Term, MAX_VARS};
use crate::kg::KnowledgeGraph;

/// Mines every closed, connected, safe rule that clears the configured
/// thresholds and the skyline criterion.
///
/// The search proceeds level by level: all rules of one length are
/// measured, filtered for output, and refined before any longer rule is
/// looked at. A refinement enters the next level only if its support
/// clears the head-coverage bound; support never grows under refinement,
/// so this prunes nothing the output filter would keep. A rule whose PCA
/// confidence reaches 1.0 while meeting the confidence threshold is not
/// refined further: its extensions keep PCA confidence 1.0 and lose the
/// skyline comparison against the shorter rule itself.
///
/// Candidate evaluation runs on a rayon pool sized by `config.workers`;
/// admission and the skyline check happen serially in a fixed order, so
/// the result is identical for any worker count.
///
/// # Panics
///
/// Panics when `config.validate()` rejects the configuration.
pub fn mine(graph: &KnowledgeGraph, config: &MinerConfig) -> Vec<Rule> {
    if let Err(reason) = config.validate() {
        panic!("invalid miner config: {reason}");
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .expect("building the mining thread pool");
    pool.install(|| search(graph, config))
}

fn search(graph: &KnowledgeGraph, config: &MinerConfig) -> Vec<Rule> {
    let mut mined: Vec<Rule> = Vec::new();
    let mut frontier: Vec<Rule> = graph
        .predicates()
        .filter(|&p| !graph.triples_with_p(p).is_empty())
        .map(|p| Rule::new(Atom::new(p, Term::var(0), Term::var(1)), Vec::new()))
        .collect();

    while !frontier.is_empty() {
        measure_closed(&mut frontier, graph);

        // Skyline dominators are strictly shorter, hence from an earlier
        // level; rules of one level can never reject each other.
        for rule in &frontier {
            if passes_thresholds(rule, config) && !mined.iter().any(|prev| dominates(prev, rule)) {
                mined.push(rule.clone());
            }
        }

        let length = frontier[0].len();
        if length == config.max_length {
            break;
        }
        frontier = next_level(&frontier, graph, config, length + 1 == config.max_length);
    }

    mined.sort_by_cached_key(|rule| (rule.head.predicate, rule.signature()));
    mined
}

fn measure_closed(frontier: &mut [Rule], graph: &KnowledgeGraph) {
    let measures: Vec<_> = frontier
        .par_iter()
        .map(|rule| {
            structural_checks(rule)
                .closed
                .then(|| counting::pair_counts(rule, graph).expect("closed rule is measurable"))
        })
        .collect();
    for (rule, m) in frontier.iter_mut().zip(measures) {
        rule.measures = m;
    }
}

fn passes_thresholds(rule: &Rule, config: &MinerConfig) -> bool {
    let Some(m) = rule.measures else { return false };
    m.support > 0
        && config.min_head_coverage.le_ratio(m.support, m.head_facts)
        && config.min_confidence.le_ratio(m.support, m.body_pairs)
        && config.min_pca_confidence.le_ratio(m.support, m.pca_pairs)
}

/// One level of refinement: each parent admits the refinements whose
/// support clears the head-coverage bound, then alpha-equivalent children
/// from different parents collapse to their first occurrence. Equivalent
/// rules share their support, so which copy survives never changes an
/// admission decision, and the merge order keeps the frontier identical
/// for any worker count.
fn next_level(
    frontier: &[Rule],
    graph: &KnowledgeGraph,
    config: &MinerConfig,
    last: bool,
) -> Vec<Rule> {
    let proposals: Vec<Vec<(Rule, Vec<u32>)>> = frontier
        .par_iter()
        .map(|parent| admitted_children(parent, graph, config, last))
        .collect();

    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut next: Vec<Rule> = Vec::new();
    for batch in proposals {
        for (child, key) in batch {
            if seen.insert(key) {
                next.push(child);
            }
        }
    }
    next
}

/// Refinements of one parent with support ≥ max(1, ⌈θ_hc · head_facts⌉).
/// A single pass over the parent's groundings projects the exact support
/// of every variable-only extension, so each such child is decided by a
/// map lookup; instantiated atoms fall back to a per-child bounded count.
fn admitted_children(
    parent: &Rule,
    graph: &KnowledgeGraph,
    config: &MinerConfig,
    last: bool,
) -> Vec<(Rule, Vec<u32>)> {
    if stop_refining(parent, config) {
        return Vec::new();
    }
    // Dangling atoms are pointless on the last level: their fresh
    // variable occurs once, so the child cannot be closed, and there
    // is no further level to close it on.
    let children =
        refine::refinements_with(parent, graph, !last, config.allow_instantiated_atoms);
    if children.is_empty() {
        return Vec::new();
    }
    let head_facts = graph.triples_with_p(parent.head.predicate).len() as u64;
    let hc = config.min_head_coverage;
    let needed = (hc.num() as u64 * head_facts).div_ceil(hc.den() as u64).max(1);
    let span = parent.variable_span();
    let projected = counting::project_extensions(parent, graph);
    children
        .into_iter()
        .filter(|child| {
            let atom = child.body.last().expect("a refinement extends the body");
            match counting::extension_key(span, atom) {
                Some(key) => projected.get(&key).copied().unwrap_or(0) >= needed,
                None => counting::support_at_least(child, graph, needed),
            }
        })
        .map(|child| {
            let key = child.signature();
            (child, key)
        })
        .collect()
}

/// The perfect-PCA cutoff. It only fires when the rule also clears the
/// confidence threshold: a perfect-PCA rule below that threshold is not
/// mined, so it could not win the skyline comparison against a descendant
/// that clears the threshold later.
fn stop_refining(rule: &Rule, config: &MinerConfig) -> bool {
    match rule.measures {
        Some(m) => {
            m.support > 0
                && m.support == m.pca_pairs
                && config.min_confidence.le_ratio(m.support, m.body_pairs)
        }
        None => false,
    }
}

/// A strictly shorter mined rule with the same head, a body that embeds
/// into `longer`'s under an injective renaming fixing the head variables,
/// and a PCA confidence at least as high knocks `longer` off the skyline.
fn dominates(shorter: &Rule, longer: &Rule) -> bool {
    if shorter.head.predicate != longer.head.predicate
        || shorter.body.len() >= longer.body.len()
    {
        return false;
    }
    let a = shorter.measures.expect("mined rules carry measures");
    let b = longer.measures.expect("candidate was measured");
    // PCA(shorter) >= PCA(longer), compared exactly.
    if (a.support as u128) * (b.pca_pairs as u128) < (b.support as u128) * (a.pca_pairs as u128) {
        return false;
    }
    let mut map = [u8::MAX; MAX_VARS];
    let mut used = [false; MAX_VARS];
    map[0] = 0;
    map[1] = 1;
    used[0] = true;
    used[1] = true;
    embeds(&shorter.body, 0, &longer.body, &mut map, &mut used)
}

fn embeds(
    small: &[Atom],
    i: usize,
    large: &[Atom],
    map: &mut [u8; MAX_VARS],
    used: &mut [bool; MAX_VARS],
) -> bool {
    let Some(atom) = small.get(i) else { return true };
    for target in large {
        if target.predicate != atom.predicate {
            continue;
        }
        let mut bound: Vec<(u8, u8)> = Vec::new();
        if unify(atom.subject, target.subject, map, used, &mut bound)
            && unify(atom.object, target.object, map, used, &mut bound)
            && embeds(small, i + 1, large, map, used)
        {
            return true;
        }
        for (v, w) in bound {
            map[v as usize] = u8::MAX;
            used[w as usize] = false;
        }
    }
    false
}

fn unify(
    from: Term,
    to: Term,
    map: &mut [u8; MAX_VARS],
    used: &mut [bool; MAX_VARS],
    bound: &mut Vec<(u8, u8)>,
) -> bool {
    match (from, to) {
        (Term::Const(a), Term::Const(b)) => a == b,
        (Term::Var(v), Term::Var(w)) => {
            if map[v.0 as usize] == w.0 {
                return true;
            }
            if map[v.0 as usize] != u8::MAX || used[w.0 as usize] {
                return false;
            }
            map[v.0 as usize] = w.0;
            used[w.0 as usize] = true;
            bound.push((v.0, w.0));
            true
        }
        _ => false,
    }
}
