//! Canonical rule form.
//!
//! Two rules are the same rule when one is a variable renaming and/or body
//! reordering of the other. The canonical key fixes both degrees of
//! freedom: over every ordering of the body, variables are renumbered by
//! first appearance (head first, then body atoms left to right), the rule
//! is serialized to a flat word list, and the lexicographically smallest
//! serialization wins. Orderings are explored with backtracking and
//! pruned as soon as their serialization exceeds the best known prefix,
//! which keeps the common near-symmetric bodies cheap.

use super::{Atom, Rule, Term, MAX_VARS};

const VAR_TAG: u32 = 0;
const CONST_TAG: u32 = 1;
const WORDS_PER_ATOM: usize = 5;

pub(crate) fn canonical_key(rule: &Rule) -> Vec<u32> {
    let mut search = Search {
        body: &rule.body,
        used: vec![false; rule.body.len()],
        rename: [u8::MAX; MAX_VARS],
        next: 0,
        out: Vec::with_capacity((rule.body.len() + 1) * WORDS_PER_ATOM),
        best: None,
    };
    let (words, assigned) = atom_words(&rule.head, &search.rename, search.next);
    search.commit(&words, &assigned);
    search.explore(rule.body.len());
    search.best.expect("at least one body ordering")
}

struct Search<'a> {
    body: &'a [Atom],
    used: Vec<bool>,
    rename: [u8; MAX_VARS],
    next: u8,
    out: Vec<u32>,
    best: Option<Vec<u32>>,
}

impl Search<'_> {
    fn explore(&mut self, remaining: usize) {
        if remaining == 0 {
            if self.best.as_ref().is_none_or(|b| self.out < *b) {
                self.best = Some(self.out.clone());
            }
            return;
        }
        for i in 0..self.body.len() {
            if self.used[i] {
                continue;
            }
            let (words, assigned) = atom_words(&self.body[i], &self.rename, self.next);
            if let Some(best) = &self.best {
                // A larger next atom can only be pruned while the prefix
                // still matches the best key; on a strictly smaller prefix
                // every completion is in the running.
                let offset = self.out.len();
                if best[..offset] == self.out[..]
                    && words.as_slice() > &best[offset..offset + WORDS_PER_ATOM]
                {
                    continue;
                }
            }
            self.used[i] = true;
            self.commit(&words, &assigned);
            self.explore(remaining - 1);
            self.used[i] = false;
            self.out.truncate(self.out.len() - WORDS_PER_ATOM);
            for &(var, _) in &assigned {
                self.rename[var] = u8::MAX;
            }
            self.next -= assigned.len() as u8;
        }
    }

    fn commit(&mut self, words: &[u32; WORDS_PER_ATOM], assigned: &[(usize, u8)]) {
        self.out.extend_from_slice(words);
        for &(var, name) in assigned {
            self.rename[var] = name;
        }
        self.next += assigned.len() as u8;
    }
}

/// Serializes one atom under the current renaming without committing it;
/// fresh variables get tentative names continuing from `next`.
fn atom_words(
    atom: &Atom,
    rename: &[u8; MAX_VARS],
    mut next: u8,
) -> ([u32; WORDS_PER_ATOM], Vec<(usize, u8)>) {
    let mut words = [0u32; WORDS_PER_ATOM];
    let mut assigned: Vec<(usize, u8)> = Vec::new();
    words[0] = atom.predicate.0;
    for (slot, term) in [(1usize, atom.subject), (3, atom.object)] {
        match term {
            Term::Var(v) => {
                let idx = v.0 as usize;
                let name = match rename[idx] {
                    u8::MAX => match assigned.iter().find(|(var, _)| *var == idx) {
                        Some(&(_, name)) => name,
                        None => {
                            let name = next;
                            assigned.push((idx, name));
                            next += 1;
                            name
                        }
                    },
                    name => name,
                };
                words[slot] = VAR_TAG;
                words[slot + 1] = name as u32;
            }
            Term::Const(e) => {
                words[slot] = CONST_TAG;
                words[slot + 1] = e.0;
            }
        }
    }
    (words, assigned)
}
