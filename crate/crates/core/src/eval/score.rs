//! Per-question metrics and their corpus-level aggregation.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::classify::RuleType;

use super::{EvalConfig, EvalError, PredictionSet};
use std::collections::BTreeSet;

/// The raw ingredients of one question's contribution to every corpus
/// metric. All ratios live in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct PerQuestionScore {
    pub hit_any: bool,
    pub hit_hard: bool,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub answer_set_size: usize,
    pub prediction_count: usize,
}

/// Corpus means over one group of questions. `hhr` is the fraction of
/// hit-any questions that also hit the hard answer, undefined (`None`)
/// when nothing was hit at all.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricBlock {
    pub question_count: usize,
    pub hits_any: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub hits_hard: f64,
    pub hhr: Option<f64>,
}

impl MetricBlock {
    fn from_scores(scores: &[&PerQuestionScore], config: &EvalConfig) -> MetricBlock {
        let n = scores.len() as f64;
        let hits_any = scores.iter().filter(|s| s.hit_any).count();
        let hits_hard = scores.iter().filter(|s| s.hit_hard).count();
        let precision = if config.skip_empty_precision {
            let kept: Vec<f64> = scores
                .iter()
                .filter(|s| s.prediction_count > 0)
                .map(|s| s.precision)
                .collect();
            if kept.is_empty() { 0.0 } else { kept.iter().sum::<f64>() / kept.len() as f64 }
        } else {
            scores.iter().map(|s| s.precision).sum::<f64>() / n
        };
        MetricBlock {
            question_count: scores.len(),
            hits_any: hits_any as f64 / n,
            precision,
            recall: scores.iter().map(|s| s.recall).sum::<f64>() / n,
            f1: scores.iter().map(|s| s.f1).sum::<f64>() / n,
            hits_hard: hits_hard as f64 / n,
            hhr: if hits_any == 0 { None } else { Some(hits_hard as f64 / hits_any as f64) },
        }
    }
}

/// The full report: corpus metrics plus the same metrics partitioned by
/// the rule type that licensed each question's removed triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub question_count: usize,
    pub hits_any: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub hits_hard: f64,
    pub hhr: Option<f64>,
    pub per_rule_type: BTreeMap<RuleType, MetricBlock>,
}

/// Scores one question. `gold` must already be normalized and must contain
/// the (normalized) hard answer; empty predictions score zero across the
/// board under the stated precision convention.
pub fn score_question(
    prediction: &PredictionSet,
    gold: &BTreeSet<String>,
    hard: &str,
) -> Result<PerQuestionScore, EvalError> {
    if !gold.contains(hard) {
        return Err(EvalError::HardNotInGold { question_id: None, hard: hard.to_owned() });
    }
    let overlap = prediction.iter().filter(|p| gold.contains(*p)).count();
    let predicted = prediction.len();
    let answers = gold.len();
    Ok(PerQuestionScore {
        hit_any: overlap > 0,
        hit_hard: prediction.contains(hard),
        precision: if predicted == 0 { 0.0 } else { overlap as f64 / predicted as f64 },
        recall: overlap as f64 / answers as f64,
        f1: 2.0 * overlap as f64 / (predicted + answers) as f64,
        answer_set_size: answers,
        prediction_count: predicted,
    })
}

/// Unweighted means over all questions, plus a per-rule-type breakdown.
/// `scores` and `rule_types` are parallel: entry i of both describes the
/// same question.
pub fn aggregate(
    scores: &[PerQuestionScore],
    rule_types: &[RuleType],
    config: &EvalConfig,
) -> Result<MetricsReport, EvalError> {
    if scores.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    assert_eq!(scores.len(), rule_types.len(), "one rule type per score");
    let all: Vec<&PerQuestionScore> = scores.iter().collect();
    let overall = MetricBlock::from_scores(&all, config);

    let mut grouped: BTreeMap<RuleType, Vec<&PerQuestionScore>> = BTreeMap::new();
    for (score, &rule_type) in scores.iter().zip(rule_types) {
        grouped.entry(rule_type).or_default().push(score);
    }
    let per_rule_type = grouped
        .into_iter()
        .map(|(rule_type, group)| (rule_type, MetricBlock::from_scores(&group, config)))
        .collect();

    Ok(MetricsReport {
        question_count: overall.question_count,
        hits_any: overall.hits_any,
        precision: overall.precision,
        recall: overall.recall,
        f1: overall.f1,
        hits_hard: overall.hits_hard,
        hhr: overall.hhr,
        per_rule_type,
    })
}
