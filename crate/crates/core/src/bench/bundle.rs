//! On-disk layout of a finished benchmark: two graph exports, three
//! question splits, and a manifest tying the configuration together.

use serde::{Deserialize, Serialize};
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::classify::RuleType;
use crate::kg::{write_graph, KnowledgeGraph};
use crate::llm::Direction;

use super::{BenchError, BuildConfig, QuestionRecord};

/// Everything a build produces, still in memory.
#[derive(Debug, Clone)]
pub struct DatasetBundle {
    pub complete: KnowledgeGraph,
    pub incomplete: KnowledgeGraph,
    pub train: Vec<QuestionRecord>,
    pub validation: Vec<QuestionRecord>,
    pub test: Vec<QuestionRecord>,
    pub manifest: Manifest,
}

impl DatasetBundle {
    /// All questions across the three splits, in split order.
    pub fn questions(&self) -> impl Iterator<Item = &QuestionRecord> {
        self.train.iter().chain(&self.validation).chain(&self.test)
    }
}

/// Reproduction record: every seed, threshold, and count that shaped the
/// bundle, plus the two policies that are fixed rather than configurable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub preset: Option<String>,
    pub generator: String,
    pub label_scheme: Option<String>,
    pub seed: u64,
    pub tau: String,
    pub per_rule_limit: usize,
    pub split_ratios: [u32; 3],
    pub rule_count: usize,
    pub removal_count: usize,
    pub complete_triples: usize,
    pub incomplete_triples: usize,
    pub questions_before_balancing: usize,
    pub question_count: usize,
    pub split_counts: [usize; 3],
    pub direction_policy: String,
    pub generation_policy: String,
}

impl Manifest {
    pub(crate) fn describe(
        config: &BuildConfig,
        rule_count: usize,
        removal_count: usize,
        complete_triples: usize,
        incomplete_triples: usize,
        questions_before_balancing: usize,
        split_counts: (usize, usize, usize),
    ) -> Self {
        let (train, validation, test) = split_counts;
        Manifest {
            preset: config.preset.clone(),
            generator: config.generator_name.clone(),
            label_scheme: config.label_scheme.clone(),
            seed: config.seed,
            tau: config.tau.to_string(),
            per_rule_limit: config.per_rule_limit,
            split_ratios: [
                config.split_ratios.0,
                config.split_ratios.1,
                config.split_ratios.2,
            ],
            rule_count,
            removal_count,
            complete_triples,
            incomplete_triples,
            questions_before_balancing,
            question_count: train + validation + test,
            split_counts: [train, validation, test],
            direction_policy: "topic side chosen by a seeded fair coin per question".to_owned(),
            generation_policy:
                "invalid question text is regenerated once, then replaced by the template"
                    .to_owned(),
        }
    }
}

/// One question as serialized to the split files. Entities appear under
/// their labels so the files stand alone without the graph's id table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionLine {
    pub id: String,
    pub question: String,
    pub topic_entity: String,
    pub answers: Vec<String>,
    pub hard_answer: String,
    pub rule_type: RuleType,
    pub direction: Direction,
    pub removed_triple: [String; 3],
}

impl QuestionRecord {
    pub(crate) fn to_line(&self, graph: &KnowledgeGraph) -> QuestionLine {
        let mut answers: Vec<String> = self
            .answers
            .iter()
            .map(|&a| graph.entity_label(a).to_owned())
            .collect();
        answers.sort();
        QuestionLine {
            id: self.id.clone(),
            question: self.question.clone(),
            topic_entity: graph.entity_label(self.topic_entity).to_owned(),
            answers,
            hard_answer: graph.entity_label(self.hard_answer).to_owned(),
            rule_type: self.rule_type,
            direction: self.direction,
            removed_triple: [
                graph.entity_label(self.removed_triple.subject).to_owned(),
                graph.predicate_label(self.removed_triple.predicate).to_owned(),
                graph.entity_label(self.removed_triple.object).to_owned(),
            ],
        }
    }
}

/// The three question files read back from disk.
#[derive(Debug, Clone)]
pub struct SplitQuestions {
    pub train: Vec<QuestionLine>,
    pub validation: Vec<QuestionLine>,
    pub test: Vec<QuestionLine>,
}

fn bundle_error(path: &Path, message: impl std::fmt::Display) -> BenchError {
    BenchError::Bundle(format!("{}: {message}", path.display()))
}

fn write_graph_file(path: &Path, graph: &KnowledgeGraph) -> Result<(), BenchError> {
    let file = File::create(path).map_err(|e| bundle_error(path, e))?;
    write_graph(graph, BufWriter::new(file)).map_err(|e| bundle_error(path, e))
}

fn write_question_file(
    path: &Path,
    graph: &KnowledgeGraph,
    questions: &[QuestionRecord],
) -> Result<(), BenchError> {
    let file = File::create(path).map_err(|e| bundle_error(path, e))?;
    let mut out = BufWriter::new(file);
    for question in questions {
        let line = serde_json::to_string(&question.to_line(graph))
            .map_err(|e| bundle_error(path, e))?;
        writeln!(out, "{line}").map_err(|e| bundle_error(path, e))?;
    }
    out.flush().map_err(|e| bundle_error(path, e))
}

/// Writes `complete.tsv`, `incomplete.tsv`, the three split files, and
/// `manifest.json` into `dir`, creating it if needed.
pub fn write_bundle(dir: &Path, bundle: &DatasetBundle) -> Result<(), BenchError> {
    fs::create_dir_all(dir).map_err(|e| bundle_error(dir, e))?;
    write_graph_file(&dir.join("complete.tsv"), &bundle.complete)?;
    write_graph_file(&dir.join("incomplete.tsv"), &bundle.incomplete)?;
    write_question_file(&dir.join("train.jsonl"), &bundle.complete, &bundle.train)?;
    write_question_file(&dir.join("validation.jsonl"), &bundle.complete, &bundle.validation)?;
    write_question_file(&dir.join("test.jsonl"), &bundle.complete, &bundle.test)?;
    let manifest_path = dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&bundle.manifest)
        .map_err(|e| bundle_error(&manifest_path, e))?;
    text.push('\n');
    fs::write(&manifest_path, text).map_err(|e| bundle_error(&manifest_path, e))
}

pub fn read_manifest(dir: &Path) -> Result<Manifest, BenchError> {
    let path = dir.join("manifest.json");
    let text = fs::read_to_string(&path).map_err(|e| bundle_error(&path, e))?;
    serde_json::from_str(&text).map_err(|e| bundle_error(&path, e))
}

pub fn read_question_file(path: &Path) -> Result<Vec<QuestionLine>, BenchError> {
    let file = File::open(path).map_err(|e| bundle_error(path, e))?;
    let mut questions = Vec::new();
    for (number, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| bundle_error(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let question: QuestionLine = serde_json::from_str(&line)
            .map_err(|e| bundle_error(path, format_args!("line {}: {e}", number + 1)))?;
        questions.push(question);
    }
    Ok(questions)
}

pub fn read_split_questions(dir: &Path) -> Result<SplitQuestions, BenchError> {
    Ok(SplitQuestions {
        train: read_question_file(&dir.join("train.jsonl"))?,
        validation: read_question_file(&dir.join("validation.jsonl"))?,
        test: read_question_file(&dir.join("test.jsonl"))?,
    })
}

fn split_paths(dir: &Path) -> [PathBuf; 6] {
    [
        dir.join("complete.tsv"),
        dir.join("incomplete.tsv"),
        dir.join("train.jsonl"),
        dir.join("validation.jsonl"),
        dir.join("test.jsonl"),
        dir.join("manifest.json"),
    ]
}

/// Removes any bundle files already present in `dir`, leaving other files
/// alone. Used to avoid shipping a half-written bundle after a failure.
pub fn remove_bundle_files(dir: &Path) -> Result<(), BenchError> {
    for path in split_paths(dir) {
        match fs::remove_file(&path) {
            Ok(()) => {}
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(bundle_error(&path, e)),
        }
    }
    Ok(())
}
