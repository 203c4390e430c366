//! Benchmark construction: constrained removal of inferable triples, one
//! question per removal with a complete answer set, frequency balancing,
//! and an 8:1:1 split, bundled with both graph views and a manifest.
//!
//! All randomness flows from one seed through three independent ChaCha
//! streams (topic direction, balancing, split), so rebuilding with the same
//! inputs and a frozen generator transcript is byte-identical.

mod balance;
mod bundle;
mod plan;
mod question;

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::classify::{classify, RuleType};
use crate::kg::{EntityId, KgError, KnowledgeGraph, PredicateId, Triple};
use crate::llm::{LlmError, QuestionGenerator};
use crate::miner::Rule;
use crate::Ratio;

pub use crate::llm::Direction;
pub use balance::{downsample, split, BalanceConfig};
pub use bundle::{
    read_manifest, read_question_file, read_split_questions, remove_bundle_files, write_bundle,
    DatasetBundle, Manifest, QuestionLine, SplitQuestions,
};
pub use plan::{plan_removals, Removal, RemovalPlan};
pub use question::{complete_answers, generate_question};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("no grounding survives the removal constraints")]
    EmptyPlan,
    #[error("question generation failed for {question_id}: {source}")]
    Generator {
        question_id: String,
        #[source]
        source: LlmError,
    },
    #[error("question for {question_id} failed validation: {reason}")]
    ValidationFailure { question_id: String, reason: String },
    #[error("no answers in the complete graph for this topic and predicate")]
    EmptyAnswerSet,
    #[error("invalid build config: {0}")]
    Config(String),
    #[error(transparent)]
    Kg(#[from] KgError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("bundle: {0}")]
    Bundle(String),
}

/// One benchmark question, fully typed. The exported JSON form renders all
/// entities as labels (see [`QuestionLine`]).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuestionRecord {
    pub id: String,
    pub question: String,
    pub topic_entity: EntityId,
    /// Complete answer set from the pre-removal graph.
    pub answers: BTreeSet<EntityId>,
    pub hard_answer: EntityId,
    pub predicate: PredicateId,
    pub direction: Direction,
    pub rule_type: RuleType,
    pub removed_triple: Triple,
}

#[derive(Debug, Clone)]
pub struct BuildConfig {
    pub per_rule_limit: usize,
    /// Balancing threshold τ; an answer entity keeps at most ⌊τ·|Q|⌋
    /// questions.
    pub tau: Ratio,
    pub seed: u64,
    pub split_ratios: (u32, u32, u32),
    /// Provenance strings recorded in the manifest.
    pub preset: Option<String>,
    pub generator_name: String,
    pub label_scheme: Option<String>,
}

impl Default for BuildConfig {
    fn default() -> BuildConfig {
        BuildConfig {
            per_rule_limit: 30,
            tau: Ratio::new(1, 20),
            seed: 0,
            split_ratios: (8, 1, 1),
            preset: None,
            generator_name: "template".to_owned(),
            label_scheme: None,
        }
    }
}

impl BuildConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.tau.num() == 0 || self.tau.num() > self.tau.den() {
            return Err(BenchError::Config(format!("tau must be in (0, 1], got {}", self.tau)));
        }
        let (a, b, c) = self.split_ratios;
        if a as u64 + b as u64 + c as u64 == 0 {
            return Err(BenchError::Config("split ratios must sum to a positive total".into()));
        }
        Ok(())
    }
}

/// Stream indices for the one-seed-many-streams scheme.
const DIRECTION_STREAM: u64 = 0;
const DOWNSAMPLE_STREAM: u64 = 1;
const SPLIT_STREAM: u64 = 2;

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Runs the whole pipeline: plan removals, delete them, phrase one question
/// per removal, complete answers against the intact graph, balance, split.
pub fn build(
    graph: &KnowledgeGraph,
    rules: &[Rule],
    config: &BuildConfig,
    generator: &dyn QuestionGenerator,
) -> Result<DatasetBundle, BenchError> {
    config.validate()?;
    let plan = plan_removals(graph, rules, config.per_rule_limit, config.seed)?;
    let incomplete = graph.remove(&plan.head_triples())?;
    let rule_types: Vec<RuleType> = rules.iter().map(classify).collect();

    let mut direction_rng = stream_rng(config.seed, DIRECTION_STREAM);
    let mut records = Vec::with_capacity(plan.removals.len());
    for (index, removal) in plan.removals.iter().enumerate() {
        let id = format!("q{index:05}");
        let removed = removal.head_triple;
        let direction = if direction_rng.random::<bool>() {
            Direction::HeadAsTopic
        } else {
            Direction::TailAsTopic
        };
        let (topic, answer) = match direction {
            Direction::HeadAsTopic => (removed.subject, removed.object),
            Direction::TailAsTopic => (removed.object, removed.subject),
        };
        let question = generate_question(graph, &id, removed, direction, generator)?;
        let answers = complete_answers(graph, topic, removed.predicate, direction)?;
        debug_assert!(answers.contains(&answer), "hard answer missing from completion");
        records.push(QuestionRecord {
            id,
            question,
            topic_entity: topic,
            answers,
            hard_answer: answer,
            predicate: removed.predicate,
            direction,
            rule_type: rule_types[removal.rule_index],
            removed_triple: removed,
        });
    }

    let questions_before_balancing = records.len();
    let mut balance_rng = stream_rng(config.seed, DOWNSAMPLE_STREAM);
    let records = balance::downsample_with_rng(&records, config.tau, &mut balance_rng);
    let mut split_rng = stream_rng(config.seed, SPLIT_STREAM);
    let (train, validation, test) =
        balance::split_with_rng(records, config.split_ratios, &mut split_rng);

    let manifest = Manifest::describe(
        config,
        rules.len(),
        plan.removals.len(),
        graph.len(),
        incomplete.len(),
        questions_before_balancing,
        (train.len(), validation.len(), test.len()),
    );
    Ok(DatasetBundle {
        complete: graph.clone(),
        incomplete,
        train,
        validation,
        test,
        manifest,
    })
}
