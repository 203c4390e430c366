//! Scoring a model run against a benchmark split.
//!
//! The pipeline mirrors how KG-RAG systems are actually graded: the raw
//! output string for each question is split into candidate answers,
//! normalized, and compared as a set against the normalized gold answers.
//! Only exact matches after normalization count; there is no substring or
//! fuzzy credit, because permissive matching is exactly what inflates
//! reported scores.

mod normalize;
mod score;

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::Path;

use thiserror::Error;

use crate::bench::QuestionLine;

pub use normalize::{normalize, normalize_set, parse_predictions, PredictionSet};
pub use score::{aggregate, score_question, MetricBlock, MetricsReport, PerQuestionScore};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no questions to evaluate")]
    EmptyInput,
    #[error("hard answer `{hard}` is missing from the gold answer set{}",
        .question_id.as_deref().map(|id| format!(" of {id}")).unwrap_or_default())]
    HardNotInGold { question_id: Option<String>, hard: String },
    #[error("predictions reference unknown question ids: {}", .ids.join(", "))]
    UnknownQuestionId { ids: Vec<String> },
    #[error("question {question_id} has more than one prediction row")]
    DuplicatePrediction { question_id: String },
    #[error("line {0}: expected `question_id<TAB>raw prediction text`")]
    MalformedLine(usize),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// The two scoring conventions that are ours rather than forced by the
/// metric definitions, both off by default.
#[derive(Debug, Clone, Default)]
pub struct EvalConfig {
    /// Also split raw predictions on whitespace. Off by default because
    /// multi-word labels would shatter; safe when labels are single tokens.
    pub split_spaces: bool,
    /// Exclude questions with an empty prediction set from the precision
    /// mean instead of counting them as zero.
    pub skip_empty_precision: bool,
}

/// One line of a run file: the question it answers and the model's raw
/// output, verbatim.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawPrediction {
    pub question_id: String,
    pub raw_text: String,
}

/// Reads `question_id<TAB>raw text` lines. Blank lines are skipped; text
/// after the first tab is kept verbatim, tabs and all.
pub fn read_predictions<R: BufRead>(reader: R) -> Result<Vec<RawPrediction>, EvalError> {
    let mut predictions = Vec::new();
    for (number, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (id, raw) = line.split_once('\t').ok_or(EvalError::MalformedLine(number + 1))?;
        let id = id.trim();
        if id.is_empty() {
            return Err(EvalError::MalformedLine(number + 1));
        }
        predictions.push(RawPrediction { question_id: id.to_owned(), raw_text: raw.to_owned() });
    }
    Ok(predictions)
}

pub fn read_predictions_path(path: impl AsRef<Path>) -> Result<Vec<RawPrediction>, EvalError> {
    read_predictions(BufReader::new(File::open(path)?))
}

/// Scores a full run against one benchmark split. Gold answers are taken
/// from the question file as written, so the run must have seen the graph
/// under the same labels the file carries. Questions without a prediction
/// row score zero on every metric; a prediction for an id the split does
/// not contain is an error, as is a second row for the same id.
pub fn evaluate_run(
    questions: &[QuestionLine],
    predictions: &[RawPrediction],
    config: &EvalConfig,
) -> Result<MetricsReport, EvalError> {
    if questions.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let known: HashMap<&str, usize> = questions
        .iter()
        .enumerate()
        .map(|(index, q)| (q.id.as_str(), index))
        .collect();
    let mut by_question: HashMap<usize, &str> = HashMap::new();
    let mut unknown = Vec::new();
    for prediction in predictions {
        match known.get(prediction.question_id.as_str()) {
            None => unknown.push(prediction.question_id.clone()),
            Some(&index) => {
                if by_question.insert(index, prediction.raw_text.as_str()).is_some() {
                    return Err(EvalError::DuplicatePrediction {
                        question_id: prediction.question_id.clone(),
                    });
                }
            }
        }
    }
    if !unknown.is_empty() {
        unknown.sort();
        unknown.dedup();
        return Err(EvalError::UnknownQuestionId { ids: unknown });
    }

    let mut scores = Vec::with_capacity(questions.len());
    let mut rule_types = Vec::with_capacity(questions.len());
    for (index, question) in questions.iter().enumerate() {
        let gold = normalize_set(&question.answers);
        let hard = normalize(&question.hard_answer);
        let prediction = by_question
            .get(&index)
            .map(|raw| PredictionSet::from_raw(raw, config.split_spaces))
            .unwrap_or_default();
        let score = score_question(&prediction, &gold, &hard).map_err(|e| match e {
            EvalError::HardNotInGold { hard, .. } => EvalError::HardNotInGold {
                question_id: Some(question.id.clone()),
                hard,
            },
            other => other,
        })?;
        scores.push(score);
        rule_types.push(question.rule_type);
    }
    aggregate(&scores, &rule_types, config)
}

/// The conventions a report was produced under, spelled out so a score is
/// never quoted without them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conventions {
    pub delimiters: String,
    pub delimiter_rationale: String,
    pub empty_prediction_precision: String,
    pub matching: String,
}

impl Conventions {
    fn describe(config: &EvalConfig) -> Self {
        Conventions {
            delimiters: if config.split_spaces {
                "comma, semicolon, newline, whitespace".to_owned()
            } else {
                "comma, semicolon, newline".to_owned()
            },
            delimiter_rationale: "spaces split answers only on request, since multi-word labels \
                                  would shatter; enable for single-token label runs"
                .to_owned(),
            empty_prediction_precision: if config.skip_empty_precision {
                "excluded from the precision mean".to_owned()
            } else {
                "counted as zero".to_owned()
            },
            matching: "exact match after normalization; no substring credit".to_owned(),
        }
    }
}

/// A scored run ready for export: metrics plus the label scheme and
/// conventions they were computed under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub label_scheme: Option<String>,
    pub conventions: Conventions,
    pub metrics: MetricsReport,
}

impl EvalReport {
    pub fn new(metrics: MetricsReport, config: &EvalConfig, label_scheme: Option<String>) -> Self {
        EvalReport { label_scheme, conventions: Conventions::describe(config), metrics }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    /// Flat two-column rendering for the terminal: corpus metrics first,
    /// then HHR per rule type.
    pub fn summary(&self) -> String {
        let metric = |value: f64| format!("{value:.4}");
        let ratio = |value: Option<f64>| match value {
            Some(v) => format!("{v:.4}"),
            None => "undefined".to_owned(),
        };
        let mut rows = vec![
            ("questions".to_owned(), self.metrics.question_count.to_string()),
            ("hits_any".to_owned(), metric(self.metrics.hits_any)),
            ("precision".to_owned(), metric(self.metrics.precision)),
            ("recall".to_owned(), metric(self.metrics.recall)),
            ("f1".to_owned(), metric(self.metrics.f1)),
            ("hits_hard".to_owned(), metric(self.metrics.hits_hard)),
            ("hhr".to_owned(), ratio(self.metrics.hhr)),
        ];
        for (rule_type, block) in &self.metrics.per_rule_type {
            rows.push((format!("hhr[{rule_type}]"), ratio(block.hhr)));
        }
        let name_width = rows.iter().map(|(name, _)| name.len()).max().unwrap_or(0);
        let value_width = rows.iter().map(|(_, value)| value.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (name, value) in rows {
            out.push_str(&format!("{name:<name_width$}  {value:>value_width$}\n"));
        }
        out
    }
}
