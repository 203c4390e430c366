//! The grounding and counting engine the measures are built on.
//!
//! Two access patterns cover everything the miner needs:
//!
//! * head-first: iterate the head predicate's facts and ask whether the
//!   body is satisfiable under that binding (support, with early exit for
//!   the head-coverage admission check);
//! * body-first: enumerate the distinct head-variable pairs the body can
//!   bind, testing each against the head extent (confidence and PCA
//!   denominators plus support in a single pass).
//!
//! Both walk atoms with a greedy most-constrained-first strategy and pull
//! candidate triples straight off the graph's sorted index slices, so no
//! intermediate join tables are materialized.

use std::collections::{HashMap, HashSet};

use crate::kg::{EntityId, KnowledgeGraph, Triple};

use super::{Atom, Grounding, Measures, MinerError, Rule, Term, MAX_VARS};

type Bindings = [Option<EntityId>; MAX_VARS];

fn resolve(term: Term, b: &Bindings) -> Option<EntityId> {
    match term {
        Term::Const(e) => Some(e),
        Term::Var(v) => b[v.0 as usize],
    }
}

/// Cost estimate: how many candidate triples would `atom` contribute under
/// the current bindings? Lower is more constrained.
fn candidate_estimate(atom: &Atom, b: &Bindings, g: &KnowledgeGraph) -> usize {
    match (resolve(atom.subject, b), resolve(atom.object, b)) {
        (Some(_), Some(_)) => 1,
        (Some(s), None) => g.triples_with_sp(s, atom.predicate).len(),
        (None, Some(o)) => g.triples_with_po(atom.predicate, o).len(),
        (None, None) => g.triples_with_p(atom.predicate).len(),
    }
}

/// Calls `f` with the bindings extended for every triple matching `atom`,
/// in the index order of the backing slice. Stops early (and reports true)
/// as soon as `f` returns true. Bindings are restored before returning.
fn for_each_match(
    atom: &Atom,
    b: &mut Bindings,
    g: &KnowledgeGraph,
    f: &mut dyn FnMut(&mut Bindings, Triple) -> bool,
) -> bool {
    let bind = |b: &mut Bindings, term: Term, value: EntityId| -> Option<bool> {
        // Some(newly_bound) on success, None on mismatch
        match term {
            Term::Const(c) => (c == value).then_some(false),
            Term::Var(v) => match b[v.0 as usize] {
                Some(bound) => (bound == value).then_some(false),
                None => {
                    b[v.0 as usize] = Some(value);
                    Some(true)
                }
            },
        }
    };
    let unbind = |b: &mut Bindings, term: Term, fresh: bool| {
        if fresh {
            if let Term::Var(v) = term {
                b[v.0 as usize] = None;
            }
        }
    };

    match (resolve(atom.subject, b), resolve(atom.object, b)) {
        (Some(s), Some(o)) => {
            let t = Triple::new(s, atom.predicate, o);
            if g.contains(t) {
                return f(b, t);
            }
            false
        }
        (Some(s), None) => {
            for &t in g.triples_with_sp(s, atom.predicate) {
                if let Some(fresh) = bind(b, atom.object, t.object) {
                    let stop = f(b, t);
                    unbind(b, atom.object, fresh);
                    if stop {
                        return true;
                    }
                }
            }
            false
        }
        (None, Some(o)) => {
            for &t in g.triples_with_po(atom.predicate, o) {
                if let Some(fresh) = bind(b, atom.subject, t.subject) {
                    let stop = f(b, t);
                    unbind(b, atom.subject, fresh);
                    if stop {
                        return true;
                    }
                }
            }
            false
        }
        (None, None) => {
            for &t in g.triples_with_p(atom.predicate) {
                if let Some(fresh_s) = bind(b, atom.subject, t.subject) {
                    if let Some(fresh_o) = bind(b, atom.object, t.object) {
                        let stop = f(b, t);
                        unbind(b, atom.object, fresh_o);
                        unbind(b, atom.subject, fresh_s);
                        if stop {
                            return true;
                        }
                    } else {
                        unbind(b, atom.subject, fresh_s);
                    }
                }
            }
            false
        }
    }
}

/// Is every atom in `mask` satisfiable simultaneously under `b`? Picks the
/// most constrained remaining atom at each level.
fn exists(atoms: &[Atom], mask: u32, b: &mut Bindings, g: &KnowledgeGraph) -> bool {
    if mask == 0 {
        return true;
    }
    let mut best = usize::MAX;
    let mut best_cost = usize::MAX;
    for (i, atom) in atoms.iter().enumerate() {
        if mask & (1 << i) != 0 {
            let cost = candidate_estimate(atom, b, g);
            if cost == 0 {
                return false;
            }
            if cost < best_cost {
                best_cost = cost;
                best = i;
            }
        }
    }
    for_each_match(&atoms[best], b, g, &mut |b, _| {
        exists(atoms, mask & !(1 << best as u32), b, g)
    })
}

fn full_mask(n: usize) -> u32 {
    debug_assert!(n < 32);
    (1u32 << n) - 1
}

/// Support with an early exit: stops counting once `stop_at` head
/// groundings are confirmed or the remainder cannot reach it.
fn count_support_bounded(rule: &Rule, g: &KnowledgeGraph, stop_at: u64) -> u64 {
    let extent = g.triples_with_p(rule.head.predicate);
    let mask = full_mask(rule.body.len());
    let mut b: Bindings = [None; MAX_VARS];
    let mut n = 0u64;
    for (idx, t) in extent.iter().enumerate() {
        if n >= stop_at {
            break;
        }
        if stop_at != u64::MAX && n + ((extent.len() - idx) as u64) < stop_at {
            break;
        }
        if bind_head(rule, *t, &mut b) {
            if exists(&rule.body, mask, &mut b, g) {
                n += 1;
            }
        }
        unbind_head(rule, &mut b);
    }
    n
}

/// Binds the head atom's terms against a concrete head triple. Returns
/// false on a constant or repeated-variable mismatch.
fn bind_head(rule: &Rule, t: Triple, b: &mut Bindings) -> bool {
    let pairs = [(rule.head.subject, t.subject), (rule.head.object, t.object)];
    for (term, value) in pairs {
        match term {
            Term::Const(c) => {
                if c != value {
                    return false;
                }
            }
            Term::Var(v) => match b[v.0 as usize] {
                Some(bound) => {
                    if bound != value {
                        return false;
                    }
                }
                None => b[v.0 as usize] = Some(value),
            },
        }
    }
    true
}

fn unbind_head(rule: &Rule, b: &mut Bindings) {
    for term in [rule.head.subject, rule.head.object] {
        if let Term::Var(v) = term {
            b[v.0 as usize] = None;
        }
    }
}

pub(crate) fn count_support(rule: &Rule, g: &KnowledgeGraph) -> u64 {
    count_support_bounded(rule, g, u64::MAX)
}

/// Exact test for `support(rule) >= needed` without always paying for a
/// full count.
pub(crate) fn support_at_least(rule: &Rule, g: &KnowledgeGraph, needed: u64) -> bool {
    if needed == 0 {
        return true;
    }
    count_support_bounded(rule, g, needed) >= needed
}

const DANGLING_OUT: u64 = 0;
const DANGLING_IN: u64 = 1;
const CLOSING: u64 = 2;

fn pack_key(kind: u64, a: u8, b: u8, pred: crate::kg::PredicateId) -> u64 {
    kind << 42 | (a as u64) << 38 | (b as u64) << 34 | pred.0 as u64
}

/// Packed identity of a one-atom extension, for [`project_extensions`]:
/// a dangling atom `p(v, fresh)` or `p(fresh, v)` anchored on the existing
/// variable `v`, or a closing atom `p(vs, vo)` between existing variables.
/// `span` is one past the highest variable index of the rule being
/// extended, so fresh variables are exactly those at or beyond it. Returns
/// None for shapes the projection does not cover (instantiated atoms).
pub(crate) fn extension_key(span: usize, atom: &Atom) -> Option<u64> {
    match (atom.subject, atom.object) {
        (Term::Var(s), Term::Var(o)) => {
            match (s.0 as usize >= span, o.0 as usize >= span) {
                (false, true) => Some(pack_key(DANGLING_OUT, s.0, 0, atom.predicate)),
                (true, false) => Some(pack_key(DANGLING_IN, o.0, 0, atom.predicate)),
                (false, false) => Some(pack_key(CLOSING, s.0, o.0, atom.predicate)),
                (true, true) => None,
            }
        }
        _ => None,
    }
}

/// Walks every grounding of `rule` once and counts, for each legal
/// one-atom extension, the head facts that keep at least one witness. The
/// returned map sends [`extension_key`] values to exact child supports;
/// absent keys mean support zero. One pass here answers the admission
/// question for every refinement of the rule, where counting each child
/// separately would rescan the head extent per child.
pub(crate) fn project_extensions(rule: &Rule, g: &KnowledgeGraph) -> HashMap<u64, u64> {
    let vars = rule.variables();
    let mask = full_mask(rule.body.len());
    let extent = g.triples_with_p(rule.head.predicate);
    // value = (head facts counted, last fact that counted); the second
    // field dedups marks within one head fact without a per-fact set
    let mut counts: HashMap<u64, (u64, u64)> = HashMap::new();
    let mark = |counts: &mut HashMap<u64, (u64, u64)>, key: u64, seq: u64| {
        use std::collections::hash_map::Entry;
        match counts.entry(key) {
            Entry::Occupied(mut e) => {
                let v = e.get_mut();
                if v.1 != seq {
                    v.0 += 1;
                    v.1 = seq;
                }
            }
            Entry::Vacant(e) => {
                e.insert((1, seq));
            }
        }
    };

    let mut b: Bindings = [None; MAX_VARS];
    for (seq, t) in extent.iter().enumerate() {
        let seq = seq as u64;
        if bind_head(rule, *t, &mut b) {
            for_all_bindings(&rule.body, mask, &mut b, g, &mut |b| {
                for &v in &vars {
                    let e = b[v.0 as usize].expect("complete binding covers every variable");
                    // spo order groups a subject's triples by predicate
                    let mut last = None;
                    for t in g.triples_with_s(e) {
                        if last != Some(t.predicate) {
                            last = Some(t.predicate);
                            mark(&mut counts, pack_key(DANGLING_OUT, v.0, 0, t.predicate), seq);
                        }
                    }
                    for t in g.triples_with_o(e) {
                        mark(&mut counts, pack_key(DANGLING_IN, v.0, 0, t.predicate), seq);
                    }
                }
                for &vs in &vars {
                    for &vo in &vars {
                        if vs == vo {
                            continue;
                        }
                        let es = b[vs.0 as usize].expect("complete binding");
                        let eo = b[vo.0 as usize].expect("complete binding");
                        for t in g.triples_with_so(es, eo) {
                            mark(&mut counts, pack_key(CLOSING, vs.0, vo.0, t.predicate), seq);
                        }
                    }
                }
            });
        }
        unbind_head(rule, &mut b);
    }
    counts.into_iter().map(|(k, (n, _))| (k, n)).collect()
}

/// Visits every complete binding of `atoms` (the ones in `mask`) extending
/// `b`, most constrained atom first.
fn for_all_bindings<F: FnMut(&Bindings)>(
    atoms: &[Atom],
    mask: u32,
    b: &mut Bindings,
    g: &KnowledgeGraph,
    f: &mut F,
) {
    if mask == 0 {
        f(b);
        return;
    }
    let mut best = usize::MAX;
    let mut best_cost = usize::MAX;
    for (i, atom) in atoms.iter().enumerate() {
        if mask & (1 << i) != 0 {
            let cost = candidate_estimate(atom, b, g);
            if cost == 0 {
                return;
            }
            if cost < best_cost {
                best_cost = cost;
                best = i;
            }
        }
    }
    for_each_match(&atoms[best], b, g, &mut |b, _| {
        for_all_bindings(atoms, mask & !(1 << best as u32), b, g, &mut *f);
        false
    });
}

/// All four measure counts in one body-first enumeration.
pub(crate) fn pair_counts(rule: &Rule, g: &KnowledgeGraph) -> Result<Measures, MinerError> {
    let (hs, ho) = match (rule.head.subject.as_var(), rule.head.object.as_var()) {
        (Some(a), Some(b)) if a != b => (a, b),
        _ => return Err(MinerError::UnsupportedHead),
    };
    for v in [hs, ho] {
        let in_body = rule
            .body
            .iter()
            .any(|a| a.terms().iter().any(|t| t.as_var() == Some(v)));
        if !in_body {
            return Err(MinerError::UnsafeRule);
        }
    }

    // order body atoms so the head variables get bound as early as possible:
    // fewer existential choices made before the pair is known means fewer
    // repeated satisfiability checks on the remainder
    let mut order: Vec<usize> = Vec::with_capacity(rule.body.len());
    let mut picked = vec![false; rule.body.len()];
    let mut covered: Vec<super::Variable> = Vec::new();
    for _ in 0..rule.body.len() {
        let mut best = usize::MAX;
        let mut best_key = (usize::MAX, usize::MAX, usize::MAX);
        for (i, atom) in rule.body.iter().enumerate() {
            if picked[i] {
                continue;
            }
            let vars: Vec<super::Variable> =
                atom.terms().iter().filter_map(|t| t.as_var()).collect();
            let new_head_vars = vars
                .iter()
                .filter(|v| (**v == hs || **v == ho) && !covered.contains(v))
                .count();
            let linked = vars.iter().filter(|v| covered.contains(v)).count();
            // fewer missing head vars first, then better linkage, then a
            // smaller extent
            let key = (
                2 - new_head_vars.min(2),
                2 - linked.min(2),
                g.triples_with_p(atom.predicate).len(),
            );
            if key < best_key {
                best_key = key;
                best = i;
            }
        }
        picked[best] = true;
        for v in rule.body[best].terms().iter().filter_map(|t| t.as_var()) {
            if !covered.contains(&v) {
                covered.push(v);
            }
        }
        order.push(best);
    }
    let ordered: Vec<Atom> = order.iter().map(|&i| rule.body[i]).collect();

    let head_pred = rule.head.predicate;
    let head_facts = g.triples_with_p(head_pred).len() as u64;
    let mut seen: HashSet<u64> = HashSet::new();
    let mut m = Measures { support: 0, head_facts, body_pairs: 0, pca_pairs: 0 };

    struct Walk<'a> {
        atoms: &'a [Atom],
        g: &'a KnowledgeGraph,
        hs: usize,
        ho: usize,
        head_pred: crate::kg::PredicateId,
        seen: &'a mut HashSet<u64>,
        m: &'a mut Measures,
    }

    impl Walk<'_> {
        fn run(&mut self, i: usize, b: &mut Bindings) {
            if let (Some(x), Some(y)) = (b[self.hs], b[self.ho]) {
                let key = (x.0 as u64) << 32 | y.0 as u64;
                if self.seen.contains(&key) {
                    return;
                }
                let rest = full_mask(self.atoms.len()) & !full_mask(i);
                if exists(self.atoms, rest, b, self.g) {
                    self.seen.insert(key);
                    self.m.body_pairs += 1;
                    if !self.g.triples_with_sp(x, self.head_pred).is_empty() {
                        self.m.pca_pairs += 1;
                    }
                    if self.g.contains(Triple::new(x, self.head_pred, y)) {
                        self.m.support += 1;
                    }
                }
                // success or not, everything below this node was explored
                return;
            }
            debug_assert!(i < self.atoms.len(), "safe rule must bind head vars");
            let atom = self.atoms[i];
            for_each_match(&atom, b, self.g, &mut |b, _| {
                // borrow dance: temporarily reborrow self fields
                self.run(i + 1, b);
                false
            });
        }
    }

    let mut b: Bindings = [None; MAX_VARS];
    let mut walk = Walk {
        atoms: &ordered,
        g,
        hs: hs.0 as usize,
        ho: ho.0 as usize,
        head_pred,
        seen: &mut seen,
        m: &mut m,
    };
    walk.run(0, &mut b);
    Ok(m)
}

/// See [`super::groundings`].
pub(crate) fn enumerate_groundings(rule: &Rule, g: &KnowledgeGraph, limit: usize) -> Vec<Grounding> {
    let mut out = Vec::new();
    if limit == 0 {
        return out;
    }
    let mut heads = g.triples_with_p(rule.head.predicate).to_vec();
    heads.sort_unstable();

    let mut witness = vec![Triple::new(EntityId(0), rule.head.predicate, EntityId(0)); rule.body.len()];
    let mut b: Bindings = [None; MAX_VARS];

    fn first_match(
        body: &[Atom],
        i: usize,
        b: &mut Bindings,
        g: &KnowledgeGraph,
        witness: &mut [Triple],
    ) -> bool {
        if i == body.len() {
            return true;
        }
        for_each_match(&body[i], b, g, &mut |b, t| {
            witness[i] = t;
            first_match(body, i + 1, b, g, witness)
        })
    }

    for t in heads {
        if bind_head(rule, t, &mut b) && first_match(&rule.body, 0, &mut b, g, &mut witness) {
            out.push(Grounding { head_triple: t, body_triples: witness.clone() });
        }
        unbind_head(rule, &mut b);
        if out.len() == limit {
            break;
        }
    }
    out
}
