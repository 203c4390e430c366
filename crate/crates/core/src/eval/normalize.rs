//! Raw model output → a set of normalized answer strings.

use std::collections::BTreeSet;

/// Splits a raw prediction string on commas, semicolons, and newlines,
/// trimming each fragment and dropping empty ones. Spaces join the
/// delimiter set only on request: multi-word entity labels would shatter
/// under space splitting, so it is reserved for runs whose labels are
/// single tokens (numeric ids, say).
pub fn parse_predictions(raw: &str, split_spaces: bool) -> Vec<String> {
    raw.split(|c: char| c == ',' || c == ';' || c == '\n' || (split_spaces && c.is_whitespace()))
        .map(str::trim)
        .filter(|fragment| !fragment.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Canonical answer form: lowercase, the literal token `<pad>` deleted,
/// punctuation deleted, the articles a/an/the dropped as standalone words,
/// and whitespace collapsed to single spaces. Idempotent, so sets of
/// normalized strings are fixed points.
pub fn normalize(s: &str) -> String {
    let lowered = s.to_lowercase().replace("<pad>", " ");
    let stripped: String = lowered
        .chars()
        .filter(|c| c.is_alphanumeric() || c.is_whitespace())
        .collect();
    stripped
        .split_whitespace()
        .filter(|word| !matches!(*word, "a" | "an" | "the"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Normalizes every string and drops those that normalize to nothing.
pub fn normalize_set<S: AsRef<str>>(answers: &[S]) -> BTreeSet<String> {
    answers
        .iter()
        .map(|answer| normalize(answer.as_ref()))
        .filter(|answer| !answer.is_empty())
        .collect()
}

/// A model's answer set after splitting and normalization. Duplicate and
/// empty fragments are already gone, so set arithmetic against the gold
/// answers is all that scoring needs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PredictionSet {
    normalized: BTreeSet<String>,
}

impl PredictionSet {
    pub fn from_raw(raw: &str, split_spaces: bool) -> Self {
        let normalized = parse_predictions(raw, split_spaces)
            .iter()
            .map(|fragment| normalize(fragment))
            .filter(|fragment| !fragment.is_empty())
            .collect();
        PredictionSet { normalized }
    }

    pub fn len(&self) -> usize {
        self.normalized.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normalized.is_empty()
    }

    pub fn contains(&self, answer: &str) -> bool {
        self.normalized.contains(answer)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.normalized.iter().map(String::as_str)
    }
}
