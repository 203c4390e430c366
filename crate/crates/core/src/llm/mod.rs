//! Question-text generation for removed triples.
//!
//! One prompt template, rendered per removed triple, is sent to a
//! chat-completion endpoint at temperature 0. Every response is recorded in
//! an append-only transcript so a finished run replays byte-identically with
//! no network access. A deterministic template generator covers offline
//! builds and acts as the last-resort fallback when generated text fails
//! validation.

mod transcript;
mod transport;

use std::fmt;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kg::{EntityId, KnowledgeGraph, PredicateId, Triple};

pub use transcript::{GeneratorTranscript, TranscriptEntry};
pub use transport::{
    HttpTransport, OfflineTransport, Transport, TransportFault, API_KEY_ENV, ENDPOINT_ENV,
    MODEL_ENV,
};

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("no label for {0}")]
    MissingLabel(String),
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("rate limited after {attempts} attempts")]
    RateLimited { attempts: u32 },
    #[error("empty completion for request {request_id}")]
    EmptyCompletion { request_id: String },
    #[error("generator not configured: {0}")]
    Configuration(String),
    #[error("transcript: {0}")]
    Transcript(#[from] std::io::Error),
    #[error("transcript line {line}: {message}")]
    TranscriptFormat { line: usize, message: String },
}

/// Which end of the removed triple the question is asked about. The other
/// end is the hard answer.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "head-as-topic")]
    HeadAsTopic,
    #[serde(rename = "tail-as-topic")]
    TailAsTopic,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::HeadAsTopic => "head-as-topic",
            Direction::TailAsTopic => "tail-as-topic",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct PromptRequest {
    pub prompt: String,
    pub model_name: String,
    pub request_id: String,
    temperature: f64,
}

impl PromptRequest {
    pub fn new(
        request_id: impl Into<String>,
        model_name: impl Into<String>,
        prompt: impl Into<String>,
    ) -> PromptRequest {
        PromptRequest {
            prompt: prompt.into(),
            model_name: model_name.into(),
            request_id: request_id.into(),
            temperature: 0.0,
        }
    }

    /// Always exactly 0; generation must be reproducible.
    pub fn temperature(&self) -> f64 {
        self.temperature
    }
}

const PROMPT_TEMPLATE: &str = r#"You are an expert in knowledge graph question generation.

Given:
Removed Triple: ({entity_h}, {predicate_T}, {entity_t})
Question Entity: {topic_entity}
Answer Entity: {answer_entity}

Write a clear, natural-language question that asks for the Answer Entity, using the given predicate and Topic Entity.

Requirements:
- Express the predicate {predicate_T} naturally (paraphrasing allowed, but preserve core meaning; e.g., "wife_of" -> "wife").
- Mention the Topic Entity {topic_entity}.
- The answer should be the Answer Entity {answer_entity}.
- Do not mention the Answer Entity {answer_entity} in the question.
- Do not ask a yes/no question.
- Output only the question as plain text.

Example:
Removed Triple: ("Alice", "wife_of", "Carol")
Question Entity: Carol
Answer Entity: Alice

Output:
Who is Carol's wife?

Now, generate the question for:
Removed Triple: ({entity_h}, {predicate_T}, {entity_t})
Question Entity: {topic_entity}
Answer Entity: {answer_entity}"#;

/// Substitutes each placeholder in one pass; substituted values are never
/// rescanned, so labels containing placeholder text cannot inject.
fn fill(template: &str, slots: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len() + 64);
    let mut rest = template;
    'outer: while let Some(brace) = rest.find('{') {
        out.push_str(&rest[..brace]);
        let tail = &rest[brace..];
        for (name, value) in slots {
            if let Some(after) = tail.strip_prefix(name) {
                out.push_str(value);
                rest = after;
                continue 'outer;
            }
        }
        out.push('{');
        rest = &tail[1..];
    }
    out.push_str(rest);
    out
}

fn entity_label(graph: &KnowledgeGraph, id: EntityId, slot: &str) -> Result<String, LlmError> {
    if id.index() < graph.entity_count() {
        Ok(graph.entity_label(id).to_owned())
    } else {
        Err(LlmError::MissingLabel(format!("{slot} (entity #{})", id.0)))
    }
}

fn predicate_label(graph: &KnowledgeGraph, id: PredicateId) -> Result<String, LlmError> {
    if id.index() < graph.predicate_count() {
        Ok(graph.predicate_label(id).to_owned())
    } else {
        Err(LlmError::MissingLabel(format!("predicate #{}", id.0)))
    }
}

/// Renders the generation prompt for one removed triple. The triple slots
/// are double-quoted, matching the worked example in the template; the
/// topic and answer slots are bare.
pub fn render_prompt(
    removed: Triple,
    topic: EntityId,
    answer: EntityId,
    graph: &KnowledgeGraph,
) -> Result<String, LlmError> {
    let head = format!("\"{}\"", entity_label(graph, removed.subject, "removed triple head")?);
    let predicate = format!("\"{}\"", predicate_label(graph, removed.predicate)?);
    let tail = format!("\"{}\"", entity_label(graph, removed.object, "removed triple tail")?);
    let topic = entity_label(graph, topic, "topic entity")?;
    let answer = entity_label(graph, answer, "answer entity")?;
    Ok(fill(
        PROMPT_TEMPLATE,
        &[
            ("{entity_h}", head.as_str()),
            ("{predicate_T}", predicate.as_str()),
            ("{entity_t}", tail.as_str()),
            ("{topic_entity}", topic.as_str()),
            ("{answer_entity}", answer.as_str()),
        ],
    ))
}

/// Deterministic question text naming only the topic and the predicate.
/// Stilted on purpose: unambiguous, answer-free by construction, and usable
/// with no network. Panics if a label is missing; callers check first.
pub fn template_fallback(
    removed: Triple,
    topic: EntityId,
    direction: Direction,
    graph: &KnowledgeGraph,
) -> String {
    let topic = graph.entity_label(topic);
    let predicate = graph.predicate_label(removed.predicate);
    match direction {
        Direction::HeadAsTopic => format!("Which entity is {topic} the {predicate} of?"),
        Direction::TailAsTopic => format!("Which entity is the {predicate} of {topic}?"),
    }
}

/// True when `label` occurs in `text` as a whole token (no alphanumeric
/// neighbours), case-insensitively.
pub(crate) fn mentions_label(text: &str, label: &str) -> bool {
    let text = text.to_lowercase();
    let label = label.to_lowercase();
    let t = text.as_bytes();
    let l = label.as_bytes();
    if l.is_empty() || t.len() < l.len() {
        return false;
    }
    for start in 0..=t.len() - l.len() {
        if &t[start..start + l.len()] != l {
            continue;
        }
        let left_ok = start == 0 || !t[start - 1].is_ascii_alphanumeric();
        let end = start + l.len();
        let right_ok = end == t.len() || !t[end].is_ascii_alphanumeric();
        if left_ok && right_ok {
            return true;
        }
    }
    false
}

#[derive(Debug, Clone)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> RetryPolicy {
        RetryPolicy { attempts: 3, base_delay: Duration::from_millis(500) }
    }
}

fn first_line(raw: &str) -> String {
    raw.lines().map(str::trim).find(|line| !line.is_empty()).unwrap_or("").to_owned()
}

/// Obtains question text for `request`, replaying from the transcript when
/// the same request id was already answered for the same prompt. Fresh
/// completions are trimmed to their first non-empty line and recorded.
pub fn generate(
    request: &PromptRequest,
    transport: &dyn Transport,
    transcript: &GeneratorTranscript,
) -> Result<String, LlmError> {
    generate_with(request, transport, transcript, &RetryPolicy::default())
}

pub fn generate_with(
    request: &PromptRequest,
    transport: &dyn Transport,
    transcript: &GeneratorTranscript,
    policy: &RetryPolicy,
) -> Result<String, LlmError> {
    if let Some(hit) = transcript.replay(&request.request_id, &request.prompt) {
        return Ok(hit);
    }
    let mut delay = policy.base_delay;
    let mut attempt = 0;
    loop {
        attempt += 1;
        match transport.complete(request) {
            Ok(raw) => {
                let text = first_line(&raw);
                if text.is_empty() {
                    return Err(LlmError::EmptyCompletion {
                        request_id: request.request_id.clone(),
                    });
                }
                transcript.record(&request.request_id, &request.prompt, &text)?;
                return Ok(text);
            }
            Err(fault) => {
                let retriable =
                    matches!(fault, TransportFault::RateLimited | TransportFault::Retriable(_));
                if !retriable || attempt >= policy.attempts {
                    return Err(match fault {
                        TransportFault::RateLimited => LlmError::RateLimited { attempts: attempt },
                        TransportFault::Retriable(message) | TransportFault::Fatal(message) => {
                            LlmError::Transport(message)
                        }
                    });
                }
                thread::sleep(delay);
                delay *= 2;
            }
        }
    }
}

/// Everything needed to phrase one question.
#[derive(Debug, Clone)]
pub struct QuestionSpec {
    pub question_id: String,
    pub removed: Triple,
    pub direction: Direction,
    pub topic: EntityId,
    pub answer: EntityId,
}

pub trait QuestionGenerator: Sync {
    /// Attempt 0 is the first try; attempt 1 repeats the request with a
    /// validation reminder appended and a distinct request id.
    fn question(
        &self,
        graph: &KnowledgeGraph,
        spec: &QuestionSpec,
        attempt: u32,
    ) -> Result<String, LlmError>;
}

/// Offline generator: always the deterministic fallback template.
#[derive(Debug, Default, Clone)]
pub struct TemplateGenerator;

impl QuestionGenerator for TemplateGenerator {
    fn question(
        &self,
        graph: &KnowledgeGraph,
        spec: &QuestionSpec,
        _attempt: u32,
    ) -> Result<String, LlmError> {
        entity_label(graph, spec.topic, "topic entity")?;
        predicate_label(graph, spec.removed.predicate)?;
        Ok(template_fallback(spec.removed, spec.topic, spec.direction, graph))
    }
}

const RETRY_NUDGE: &str = "\nReminder: mention the Topic Entity exactly as written, never mention the Answer Entity, and do not ask a yes/no question.";

/// Chat-completion-backed generator with transcript replay.
pub struct LlmGenerator<T: Transport> {
    transport: T,
    transcript: GeneratorTranscript,
    model_name: String,
    policy: RetryPolicy,
}

impl<T: Transport> LlmGenerator<T> {
    pub fn new(
        transport: T,
        transcript: GeneratorTranscript,
        model_name: impl Into<String>,
    ) -> LlmGenerator<T> {
        LlmGenerator {
            transport,
            transcript,
            model_name: model_name.into(),
            policy: RetryPolicy::default(),
        }
    }

    pub fn with_policy(mut self, policy: RetryPolicy) -> LlmGenerator<T> {
        self.policy = policy;
        self
    }

    pub fn transcript(&self) -> &GeneratorTranscript {
        &self.transcript
    }
}

impl<T: Transport> QuestionGenerator for LlmGenerator<T> {
    fn question(
        &self,
        graph: &KnowledgeGraph,
        spec: &QuestionSpec,
        attempt: u32,
    ) -> Result<String, LlmError> {
        let mut prompt = render_prompt(spec.removed, spec.topic, spec.answer, graph)?;
        if attempt > 0 {
            prompt.push_str(RETRY_NUDGE);
        }
        let request_id = if attempt == 0 {
            spec.question_id.clone()
        } else {
            format!("{}#r{attempt}", spec.question_id)
        };
        let request = PromptRequest::new(request_id, self.model_name.clone(), prompt);
        generate_with(&request, &self.transport, &self.transcript, &self.policy)
    }
}
