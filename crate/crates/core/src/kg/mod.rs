//! In-memory knowledge graph store.
//!
//! Entities and predicates are interned to dense u32 ids in first-appearance
//! order, so a graph loaded from the same file always gets the same ids. The
//! triple set is held three times, sorted by (s,p,o), (p,o,s) and (o,s,p);
//! between them the three permutations answer every subject/predicate/object
//! key combination (S, P, O, SP, PO, SO) with a binary-searched slice, which
//! is what the rule miner's join loops hammer on.
//!
//! Graphs are immutable once built. [`KnowledgeGraph::remove`] returns a new
//! graph that shares the vocabulary (ids stay stable across removal, which
//! keeps the complete and incomplete halves of a benchmark aligned), and
//! [`relabel`](crate::kg::relabel) swaps the vocabulary while sharing the
//! triple arrays.

mod io;
mod relabel;

pub use io::{load_graph, load_graph_path, load_names, load_names_path, write_graph, write_label_map};
pub use relabel::{relabel, LabelScheme};

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

#[derive(Error, Debug)]
pub enum KgError {
    #[error("line {0}: expected `subject<TAB>predicate<TAB>object` with non-empty fields")]
    MalformedLine(usize),
    #[error("input contains no triples")]
    EmptyGraph,
    #[error("triple not present in graph: ({0}, {1}, {2})")]
    NotPresent(String, String, String),
    #[error("entity `{0}` has no text label")]
    MissingLabel(String),
    #[error("text label `{0}` would map more than one entity")]
    DuplicateLabel(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Dense handle for an interned entity. Only meaningful for the graph (or a
/// graph sharing its vocabulary) that produced it.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct EntityId(pub u32);

/// Dense handle for an interned predicate.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct PredicateId(pub u32);

impl EntityId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl PredicateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// One fact. Field order gives the canonical (s,p,o) sort via derived `Ord`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Triple {
    pub subject: EntityId,
    pub predicate: PredicateId,
    pub object: EntityId,
}

impl Triple {
    pub fn new(subject: EntityId, predicate: PredicateId, object: EntityId) -> Triple {
        Triple { subject, predicate, object }
    }
}

/// A triple query; `None` positions are wildcards.
#[derive(Clone, Copy, Default, Debug, PartialEq, Eq)]
pub struct TriplePattern {
    pub subject: Option<EntityId>,
    pub predicate: Option<PredicateId>,
    pub object: Option<EntityId>,
}

impl TriplePattern {
    pub fn any() -> TriplePattern {
        TriplePattern::default()
    }

    pub fn with_subject(mut self, s: EntityId) -> TriplePattern {
        self.subject = Some(s);
        self
    }

    pub fn with_predicate(mut self, p: PredicateId) -> TriplePattern {
        self.predicate = Some(p);
        self
    }

    pub fn with_object(mut self, o: EntityId) -> TriplePattern {
        self.object = Some(o);
        self
    }
}

/// Interned label tables, shared between graphs related by removal or
/// relabeling.
#[derive(Default, Debug)]
pub(crate) struct Vocab {
    entity_labels: Vec<String>,
    entity_by_label: HashMap<String, EntityId>,
    entity_names: Vec<Option<String>>,
    predicate_labels: Vec<String>,
    predicate_by_label: HashMap<String, PredicateId>,
}

impl Vocab {
    fn intern_entity(&mut self, label: &str) -> EntityId {
        if let Some(&id) = self.entity_by_label.get(label) {
            return id;
        }
        let id = EntityId(self.entity_labels.len() as u32);
        self.entity_labels.push(label.to_owned());
        self.entity_names.push(None);
        self.entity_by_label.insert(label.to_owned(), id);
        id
    }

    fn intern_predicate(&mut self, label: &str) -> PredicateId {
        if let Some(&id) = self.predicate_by_label.get(label) {
            return id;
        }
        let id = PredicateId(self.predicate_labels.len() as u32);
        self.predicate_labels.push(label.to_owned());
        self.predicate_by_label.insert(label.to_owned(), id);
        id
    }
}

/// Immutable triple store with six indexed access paths.
#[derive(Clone, Debug)]
pub struct KnowledgeGraph {
    vocab: Arc<Vocab>,
    /// All triples ascending by (subject, predicate, object).
    spo: Arc<Vec<Triple>>,
    /// The same triples ascending by (predicate, object, subject).
    pos: Arc<Vec<Triple>>,
    /// The same triples ascending by (object, subject, predicate).
    osp: Arc<Vec<Triple>>,
}

fn pos_key(t: &Triple) -> (PredicateId, EntityId, EntityId) {
    (t.predicate, t.object, t.subject)
}

fn osp_key(t: &Triple) -> (EntityId, EntityId, PredicateId) {
    (t.object, t.subject, t.predicate)
}

/// Subrange of `sorted` whose `key` projection equals `target`; `sorted`
/// must be ascending under `key`.
fn equal_range<'a, K: Ord, F: Fn(&Triple) -> K>(
    sorted: &'a [Triple],
    key: F,
    target: K,
) -> &'a [Triple] {
    let lo = sorted.partition_point(|t| key(t) < target);
    let hi = lo + sorted[lo..].partition_point(|t| key(t) == target);
    &sorted[lo..hi]
}

impl KnowledgeGraph {
    fn from_parts(vocab: Vocab, mut triples: Vec<Triple>) -> KnowledgeGraph {
        triples.sort_unstable();
        triples.dedup();
        let mut pos = triples.clone();
        pos.sort_unstable_by_key(pos_key);
        let mut osp = triples.clone();
        osp.sort_unstable_by_key(osp_key);
        KnowledgeGraph {
            vocab: Arc::new(vocab),
            spo: Arc::new(triples),
            pos: Arc::new(pos),
            osp: Arc::new(osp),
        }
    }

    pub(crate) fn with_vocab(&self, vocab: Vocab) -> KnowledgeGraph {
        KnowledgeGraph {
            vocab: Arc::new(vocab),
            spo: Arc::clone(&self.spo),
            pos: Arc::clone(&self.pos),
            osp: Arc::clone(&self.osp),
        }
    }

    pub(crate) fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn len(&self) -> usize {
        self.spo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spo.is_empty()
    }

    pub fn entity_count(&self) -> usize {
        self.vocab.entity_labels.len()
    }

    pub fn predicate_count(&self) -> usize {
        self.vocab.predicate_labels.len()
    }

    pub fn entity(&self, label: &str) -> Option<EntityId> {
        self.vocab.entity_by_label.get(label).copied()
    }

    pub fn predicate(&self, label: &str) -> Option<PredicateId> {
        self.vocab.predicate_by_label.get(label).copied()
    }

    pub fn entity_label(&self, id: EntityId) -> &str {
        &self.vocab.entity_labels[id.index()]
    }

    /// Optional human-readable display name (see [`KnowledgeGraph::with_names`]).
    pub fn entity_name(&self, id: EntityId) -> Option<&str> {
        self.vocab.entity_names[id.index()].as_deref()
    }

    pub fn predicate_label(&self, id: PredicateId) -> &str {
        &self.vocab.predicate_labels[id.index()]
    }

    pub fn predicates(&self) -> impl Iterator<Item = PredicateId> {
        (0..self.predicate_count() as u32).map(PredicateId)
    }

    pub fn entities(&self) -> impl Iterator<Item = EntityId> {
        (0..self.entity_count() as u32).map(EntityId)
    }

    /// All triples, ascending by (s,p,o).
    pub fn iter(&self) -> impl Iterator<Item = Triple> + '_ {
        self.spo.iter().copied()
    }

    pub fn contains(&self, t: Triple) -> bool {
        self.spo.binary_search(&t).is_ok()
    }

    /// Triples with the given subject, ascending by (s,p,o).
    pub fn triples_with_s(&self, s: EntityId) -> &[Triple] {
        equal_range(&self.spo, |t| t.subject, s)
    }

    /// Triples with the given subject and predicate, ascending by object.
    pub fn triples_with_sp(&self, s: EntityId, p: PredicateId) -> &[Triple] {
        equal_range(&self.spo, |t| (t.subject, t.predicate), (s, p))
    }

    /// Triples with the given predicate. Note: ascending by (object, subject),
    /// not (s,p,o); callers that need canonical order sort the slice.
    pub fn triples_with_p(&self, p: PredicateId) -> &[Triple] {
        equal_range(&self.pos, |t| t.predicate, p)
    }

    /// Triples with the given predicate and object, ascending by subject.
    pub fn triples_with_po(&self, p: PredicateId, o: EntityId) -> &[Triple] {
        equal_range(&self.pos, |t| (t.predicate, t.object), (p, o))
    }

    /// Triples with the given object, ascending by (subject, predicate).
    pub fn triples_with_o(&self, o: EntityId) -> &[Triple] {
        equal_range(&self.osp, |t| t.object, o)
    }

    /// Triples with the given subject and object, ascending by predicate.
    pub fn triples_with_so(&self, s: EntityId, o: EntityId) -> &[Triple] {
        equal_range(&self.osp, |t| (t.object, t.subject), (o, s))
    }

    /// All triples matching `pattern`, ascending by (subject, predicate,
    /// object). Ids that do not occur in the graph simply match nothing.
    pub fn matching(&self, pattern: TriplePattern) -> Vec<Triple> {
        let TriplePattern { subject, predicate, object } = pattern;
        match (subject, predicate, object) {
            (Some(s), Some(p), Some(o)) => {
                let t = Triple::new(s, p, o);
                if self.contains(t) {
                    vec![t]
                } else {
                    vec![]
                }
            }
            (Some(s), Some(p), None) => self.triples_with_sp(s, p).to_vec(),
            (Some(s), None, Some(o)) => self.triples_with_so(s, o).to_vec(),
            (None, Some(p), Some(o)) => self.triples_with_po(p, o).to_vec(),
            (Some(s), None, None) => self.triples_with_s(s).to_vec(),
            (None, None, Some(o)) => self.triples_with_o(o).to_vec(),
            (None, Some(p), None) => {
                let mut out = self.triples_with_p(p).to_vec();
                out.sort_unstable();
                out
            }
            (None, None, None) => self.spo.as_ref().clone(),
        }
    }

    /// New graph without `victims`, sharing this graph's vocabulary (all ids
    /// stay valid). Errors with the first triple that is not present.
    pub fn remove(&self, victims: &[Triple]) -> Result<KnowledgeGraph, KgError> {
        for &v in victims {
            if !self.contains(v) {
                return Err(KgError::NotPresent(
                    self.entity_label(v.subject).to_owned(),
                    self.predicate_label(v.predicate).to_owned(),
                    self.entity_label(v.object).to_owned(),
                ));
            }
        }
        let mut gone: Vec<Triple> = victims.to_vec();
        gone.sort_unstable();
        gone.dedup();
        let keep = |t: &Triple| gone.binary_search(t).is_err();

        let spo: Vec<Triple> = self.spo.iter().copied().filter(keep).collect();
        let pos: Vec<Triple> = self.pos.iter().copied().filter(keep).collect();
        let osp: Vec<Triple> = self.osp.iter().copied().filter(keep).collect();
        Ok(KnowledgeGraph {
            vocab: Arc::clone(&self.vocab),
            spo: Arc::new(spo),
            pos: Arc::new(pos),
            osp: Arc::new(osp),
        })
    }

    /// Attach display names from `(label, name)` pairs. Pairs whose label is
    /// not an entity of this graph are ignored (names files routinely cover
    /// a superset of any one dump).
    pub fn with_names(&self, names: &[(String, String)]) -> KnowledgeGraph {
        let mut vocab = self.clone_vocab();
        for (label, name) in names {
            if let Some(&id) = vocab.entity_by_label.get(label) {
                vocab.entity_names[id.index()] = Some(name.clone());
            }
        }
        self.with_vocab(vocab)
    }

    pub(crate) fn clone_vocab(&self) -> Vocab {
        Vocab {
            entity_labels: self.vocab.entity_labels.clone(),
            entity_by_label: self.vocab.entity_by_label.clone(),
            entity_names: self.vocab.entity_names.clone(),
            predicate_labels: self.vocab.predicate_labels.clone(),
            predicate_by_label: self.vocab.predicate_by_label.clone(),
        }
    }

    /// `(s, p, o)` rendered with labels, for error messages and logs.
    pub fn render_triple(&self, t: Triple) -> String {
        format!(
            "({}, {}, {})",
            self.entity_label(t.subject),
            self.predicate_label(t.predicate),
            self.entity_label(t.object)
        )
    }
}

/// Accumulates labeled triples, then freezes them into a [`KnowledgeGraph`].
#[derive(Default)]
pub struct GraphBuilder {
    vocab: Vocab,
    triples: Vec<Triple>,
}

impl GraphBuilder {
    pub fn new() -> GraphBuilder {
        GraphBuilder::default()
    }

    pub fn entity(&mut self, label: &str) -> EntityId {
        self.vocab.intern_entity(label)
    }

    pub fn predicate(&mut self, label: &str) -> PredicateId {
        self.vocab.intern_predicate(label)
    }

    pub fn set_name(&mut self, id: EntityId, name: &str) {
        self.vocab.entity_names[id.index()] = Some(name.to_owned());
    }

    pub fn add(&mut self, subject: &str, predicate: &str, object: &str) {
        let s = self.vocab.intern_entity(subject);
        let p = self.vocab.intern_predicate(predicate);
        let o = self.vocab.intern_entity(object);
        self.triples.push(Triple::new(s, p, o));
    }

    pub fn add_triple(&mut self, t: Triple) {
        self.triples.push(t);
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Duplicate triples collapse silently; an empty builder yields an empty
    /// graph (only file loading treats that as an error).
    pub fn build(self) -> KnowledgeGraph {
        KnowledgeGraph::from_parts(self.vocab, self.triples)
    }
}
