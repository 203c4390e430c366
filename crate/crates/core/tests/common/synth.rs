//! Synthetic graph generators shared by the integration tests.

use std::collections::HashSet;

use kgbench::kg::{EntityId, GraphBuilder, KnowledgeGraph, PredicateId, Triple};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Small random graph with planted regularities so mining has something to
/// find: a blend of uniform noise, a symmetric predicate, a subset
/// (hierarchy) pair, and a composed pair.
pub fn random_graph(seed: u64) -> KnowledgeGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entities = rng.random_range(10..=30usize);
    let predicates = rng.random_range(2..=8usize);
    // The planted arms add up to two extra triples past the check, so the
    // cap leaves room to stay at or under 200 overall.
    let budget = rng.random_range(20..=198usize);
    let mut b = GraphBuilder::new();
    let ent = |i: usize| format!("e{i}");
    let pred = |i: usize| format!("p{i}");

    while b.len() < budget {
        let s = rng.random_range(0..entities);
        let o = rng.random_range(0..entities);
        let p = rng.random_range(0..predicates);
        b.add(&ent(s), &pred(p), &ent(o));
        match p {
            // p0 tends to be symmetric.
            0 if rng.random_bool(0.8) => b.add(&ent(o), &pred(0), &ent(s)),
            // p1 edges usually also hold for p2.
            1 if predicates > 2 && rng.random_bool(0.8) => b.add(&ent(s), &pred(2), &ent(o)),
            // p3 followed by p3 tends to close with p4.
            3 if predicates > 4 && rng.random_bool(0.8) => {
                let via = rng.random_range(0..entities);
                b.add(&ent(o), &pred(3), &ent(via));
                b.add(&ent(s), &pred(4), &ent(via));
            }
            _ => {}
        }
    }
    b.build()
}

struct People {
    counter: u32,
}

impl People {
    fn next(&mut self) -> String {
        let id = self.counter;
        self.counter += 1;
        id.to_string()
    }
}

fn marry(b: &mut GraphBuilder, husband: &str, wife: &str) {
    b.add(husband, "marriedTo", wife);
    b.add(wife, "marriedTo", husband);
}

fn parent_edges(b: &mut GraphBuilder, father: &str, mother: &str, child: &str) {
    b.add(father, "fatherOf", child);
    b.add(mother, "motherOf", child);
}

/// Three-generation family graph in the style of kinship benchmarks.
///
/// One clan is written out by hand and pinned to stable labels so tests can
/// assert exact neighborhoods: entity 139 has brothers 205, 138, 2973 and
/// 2974 (all sibling edges mutual), spouse 206, and child 14; each of 139's
/// brothers is an uncle of 14. Generated clans use labels from 3000 up, so
/// they can never collide with the pinned ones.
pub fn family_graph(seed: u64, clans: usize) -> KnowledgeGraph {
    let mut b = GraphBuilder::new();

    let brothers = ["139", "205", "138", "2973", "2974"];
    for x in brothers {
        for y in brothers {
            if x != y {
                b.add(x, "brotherOf", y);
            }
        }
    }
    marry(&mut b, "139", "206");
    parent_edges(&mut b, "139", "206", "14");
    for uncle in &brothers[1..] {
        b.add(uncle, "uncleOf", "14");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut people = People { counter: 3000 };
    for _ in 0..clans {
        let grandfather = people.next();
        let grandmother = people.next();
        marry(&mut b, &grandfather, &grandmother);

        let sibling_count = rng.random_range(2..=4usize);
        let mut siblings: Vec<(String, bool)> = Vec::new();
        for _ in 0..sibling_count {
            siblings.push((people.next(), rng.random_bool(0.5)));
        }
        for (child, _) in &siblings {
            parent_edges(&mut b, &grandfather, &grandmother, child);
        }
        for (x, x_male) in &siblings {
            for (y, _) in &siblings {
                if x != y {
                    b.add(x, if *x_male { "brotherOf" } else { "sisterOf" }, y);
                }
            }
        }

        for (sibling, male) in &siblings {
            if !rng.random_bool(0.8) {
                continue;
            }
            let spouse = people.next();
            marry(&mut b, sibling, &spouse);
            let (father, mother) = if *male {
                (sibling.clone(), spouse)
            } else {
                (spouse, sibling.clone())
            };
            for _ in 0..rng.random_range(1..=2usize) {
                let child = people.next();
                parent_edges(&mut b, &father, &mother, &child);
                b.add(&grandfather, "grandfatherOf", &child);
                b.add(&grandmother, "grandmotherOf", &child);
                for (other, other_male) in &siblings {
                    if other != sibling {
                        b.add(other, if *other_male { "uncleOf" } else { "auntOf" }, &child);
                    }
                }
            }
        }
    }
    b.build()
}

const FB_TRIPLES: usize = 204_087;
const FB_PREDICATES: u32 = 237;
const FB_ENTITIES: u32 = 14_541;

/// Large benchmark-shaped graph: exactly 204,087 distinct triples over 237
/// predicates and 14,541 entities. Predicates fall into motif groups over
/// disjoint entity bands, which keeps cross-group joins empty. Chain bands
/// stay sparse (about 0.84 draws per entity per predicate) because a
/// planted chain rule's confidence is roughly 0.9 / (1 + density): each
/// draw hands the middle entity an incoming and an outgoing edge together,
/// so spurious paths grow with the density while support does not. Sparse
/// bands also keep chance attachments of long-tail predicates under the
/// head-coverage admission bound.
pub fn fb_scale(seed: u64) -> KnowledgeGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set: HashSet<(u32, u32, u32)> = HashSet::with_capacity(FB_TRIPLES * 2);
    let mut base = 0u32;

    // Composition clusters: rel0..rel23 in triples (p, q, r), where r(x,z)
    // closes most p(x,m), q(m,z) chains.
    for group in 0..8u32 {
        let (p, q, r) = (group * 3, group * 3 + 1, group * 3 + 2);
        let band = 950;
        for _ in 0..800 {
            let x = base + rng.random_range(0..band);
            let m = base + rng.random_range(0..band);
            let z = base + rng.random_range(0..band);
            set.insert((x, p, m));
            set.insert((m, q, z));
            if rng.random_bool(0.9) {
                set.insert((x, r, z));
            }
        }
        base += band;
    }

    // Triangle motifs (classified outside the five named types):
    // rel24..rel35, with p(x,y), q(z,y), r(z,x) usually co-occurring.
    for group in 0..4u32 {
        let (p, q, r) = (24 + group * 3, 25 + group * 3, 26 + group * 3);
        let band = 950;
        for _ in 0..800 {
            let x = base + rng.random_range(0..band);
            let y = base + rng.random_range(0..band);
            let z = base + rng.random_range(0..band);
            set.insert((x, p, y));
            set.insert((z, q, y));
            if rng.random_bool(0.9) {
                set.insert((z, r, x));
            }
        }
        base += band;
    }

    // A handful of symmetric predicates: rel36..rel41.
    for sym in 36..42u32 {
        let band = 260;
        for _ in 0..320 {
            let x = base + rng.random_range(0..band);
            let y = base + rng.random_range(0..band);
            set.insert((x, sym, y));
            if rng.random_bool(0.9) {
                set.insert((y, sym, x));
            }
        }
        base += band;
    }

    // Inverse pairs rel42..rel49, then subsumption pairs rel50..rel57.
    for group in 0..8u32 {
        let (p, q) = (42 + group * 2, 43 + group * 2);
        let band = 195;
        for _ in 0..340 {
            let x = base + rng.random_range(0..band);
            let y = base + rng.random_range(0..band);
            set.insert((x, p, y));
            if rng.random_bool(0.9) {
                if group < 4 {
                    set.insert((y, q, x));
                } else {
                    set.insert((x, q, y));
                }
            }
        }
        base += band;
    }
    assert!(base < FB_ENTITIES, "motif bands exceed the entity budget");
    assert!(set.len() <= FB_TRIPLES, "motif groups overshoot the triple budget");

    // Long tail: sparse noise over the remaining predicates and the whole
    // entity range, topping the set up to the exact triple count. Spread
    // this wide, no accidental rule can reach the mining thresholds.
    while set.len() < FB_TRIPLES {
        let p = rng.random_range(58..FB_PREDICATES);
        let x = rng.random_range(0..FB_ENTITIES);
        let y = rng.random_range(0..FB_ENTITIES);
        set.insert((x, p, y));
    }

    let mut triples: Vec<(u32, u32, u32)> = set.into_iter().collect();
    triples.sort_unstable();

    let mut b = GraphBuilder::new();
    let entities: Vec<EntityId> =
        (0..FB_ENTITIES).map(|i| b.entity(&format!("m{i:05}"))).collect();
    let predicates: Vec<PredicateId> =
        (0..FB_PREDICATES).map(|i| b.predicate(&format!("rel{i:03}"))).collect();
    for (s, p, o) in triples {
        b.add_triple(Triple::new(
            entities[s as usize],
            predicates[p as usize],
            entities[o as usize],
        ));
    }
    b.build()
}
