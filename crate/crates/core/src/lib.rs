//! kgbench turns a triple-format knowledge graph into a QA benchmark that
//! probes reasoning under incompleteness, and scores KG-RAG systems on it.
//!
//! The pipeline has three stages, each usable on its own:
//!
//! 1. [`miner`] searches the graph for closed Horn rules (AMIE-style breadth
//!    first refinement with support, head coverage, confidence and PCA
//!    confidence thresholds) and [`classify`] sorts them into a small
//!    structural taxonomy.
//! 2. [`bench`] removes rule-inferable triples under constraints that keep
//!    every removed fact re-derivable, asks a generator ([`llm`]) to phrase
//!    one question per removed triple, completes the answer set against the
//!    untouched graph, then balances and splits the question pool.
//! 3. [`eval`] parses raw model output into answer fragments, normalizes
//!    both sides, and reports exact-match set metrics (Hits@Any, Hits@Hard,
//!    precision/recall/F1, and the hard-hit ratio) with per-rule-type
//!    breakdowns.
//!
//! Everything downstream of a seed is deterministic: reruns with the same
//! inputs, seeds, and generator transcript produce byte-identical artifacts.

pub mod bench;
pub mod classify;
pub mod eval;
pub mod kg;
pub mod llm;
pub mod miner;
pub mod ratio;

pub use ratio::Ratio;
