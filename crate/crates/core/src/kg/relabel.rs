//! Entity relabeling schemes.
//!
//! Benchmarks can expose entities three ways: as fresh opaque indices (the
//! default stance: strip any lexical hints so a system must reason over
//! structure), as the dataset's own identifiers, or as human-readable text
//! names. Relabeling rewrites the vocabulary only; the triple structure is
//! shared untouched, so the result is isomorphic to the input by
//! construction.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{KgError, KnowledgeGraph, Vocab};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LabelScheme {
    /// Seeded random bijection onto `0..n` rendered as decimal strings.
    PrivateId { seed: u64 },
    /// Keep the dataset identifiers as they are (identity mapping).
    EntityId,
    /// Use the attached display names; every entity must have one and no
    /// two entities may share one.
    TextLabel,
}

/// Returns the relabeled graph plus the old-label to new-label mapping in
/// entity-interning order.
pub fn relabel(
    graph: &KnowledgeGraph,
    scheme: LabelScheme,
) -> Result<(KnowledgeGraph, Vec<(String, String)>), KgError> {
    let old = graph.vocab();
    let n = graph.entity_count();
    let new_labels: Vec<String> = match scheme {
        LabelScheme::PrivateId { seed } => {
            let mut ids: Vec<u64> = (0..n as u64).collect();
            ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            ids.into_iter().map(|i| i.to_string()).collect()
        }
        LabelScheme::EntityId => old.entity_labels.clone(),
        LabelScheme::TextLabel => {
            let mut labels = Vec::with_capacity(n);
            for (i, name) in old.entity_names.iter().enumerate() {
                match name {
                    Some(name) => labels.push(name.clone()),
                    None => return Err(KgError::MissingLabel(old.entity_labels[i].clone())),
                }
            }
            labels
        }
    };

    let mut vocab = Vocab {
        entity_labels: new_labels.clone(),
        entity_by_label: Default::default(),
        entity_names: vec![None; n],
        predicate_labels: old.predicate_labels.clone(),
        predicate_by_label: old.predicate_by_label.clone(),
    };
    for (i, label) in new_labels.iter().enumerate() {
        let prev = vocab
            .entity_by_label
            .insert(label.clone(), super::EntityId(i as u32));
        if prev.is_some() {
            // only reachable via TextLabel: the other schemes are
            // bijective by construction
            return Err(KgError::DuplicateLabel(label.clone()));
        }
    }

    let mapping: Vec<(String, String)> = old
        .entity_labels
        .iter()
        .cloned()
        .zip(new_labels)
        .collect();
    Ok((graph.with_vocab(vocab), mapping))
}
