//! Question phrasing and answer-set completion for one removed triple.

use std::collections::BTreeSet;

use crate::kg::{EntityId, KnowledgeGraph, PredicateId, Triple};
use crate::llm::{
    mentions_label, template_fallback, Direction, QuestionGenerator, QuestionSpec,
};

use super::BenchError;

/// Openers that make a question answerable with yes or no.
const YES_NO_LEADS: &[&str] = &[
    "is", "are", "was", "were", "am", "do", "does", "did", "has", "have", "had", "can", "could",
    "will", "would", "shall", "should", "may", "might", "must",
];

fn leading_word(text: &str) -> Option<String> {
    let trimmed = text.trim_start_matches(|c: char| !c.is_ascii_alphanumeric());
    let end = trimmed
        .find(|c: char| !c.is_ascii_alphanumeric())
        .unwrap_or(trimmed.len());
    if end == 0 {
        None
    } else {
        Some(trimmed[..end].to_lowercase())
    }
}

/// The three checks a question must pass: it names the topic, it never
/// names the answer, and it does not open as a yes/no question.
pub(crate) fn validate_question(
    text: &str,
    graph: &KnowledgeGraph,
    topic: EntityId,
    answer: EntityId,
) -> Result<(), String> {
    let topic_label = graph.entity_label(topic);
    let answer_label = graph.entity_label(answer);
    if !mentions_label(text, topic_label) {
        return Err(format!("does not mention the topic entity `{topic_label}`"));
    }
    if mentions_label(text, answer_label) {
        return Err(format!("mentions the answer entity `{answer_label}`"));
    }
    match leading_word(text) {
        None => return Err("contains no words".to_owned()),
        Some(word) if YES_NO_LEADS.contains(&word.as_str()) => {
            return Err(format!("opens with `{word}`, inviting a yes/no answer"));
        }
        Some(_) => {}
    }
    Ok(())
}

/// Asks the generator for question text and validates it. An invalid first
/// answer is regenerated once (the generator sees attempt 1 and may nudge
/// its prompt); if that also fails, the deterministic template takes over.
/// Identical consecutive candidates are not re-validated, so a
/// deterministic generator fails fast.
pub fn generate_question(
    graph: &KnowledgeGraph,
    question_id: &str,
    removed: Triple,
    direction: Direction,
    generator: &dyn QuestionGenerator,
) -> Result<String, BenchError> {
    let (topic, answer) = match direction {
        Direction::HeadAsTopic => (removed.subject, removed.object),
        Direction::TailAsTopic => (removed.object, removed.subject),
    };
    let spec = QuestionSpec {
        question_id: question_id.to_owned(),
        removed,
        direction,
        topic,
        answer,
    };
    let mut last_text: Option<String> = None;
    let mut last_reason = String::new();
    for attempt in 0..2 {
        let text = generator.question(graph, &spec, attempt).map_err(|source| {
            BenchError::Generator { question_id: question_id.to_owned(), source }
        })?;
        if last_text.as_deref() == Some(text.as_str()) {
            continue;
        }
        match validate_question(&text, graph, topic, answer) {
            Ok(()) => return Ok(text),
            Err(reason) => {
                last_reason = reason;
                last_text = Some(text);
            }
        }
    }
    let fallback = template_fallback(removed, topic, direction, graph);
    if last_text.as_deref() != Some(fallback.as_str()) {
        match validate_question(&fallback, graph, topic, answer) {
            Ok(()) => return Ok(fallback),
            Err(reason) => last_reason = reason,
        }
    }
    Err(BenchError::ValidationFailure {
        question_id: question_id.to_owned(),
        reason: last_reason,
    })
}

/// Every answer the intact graph holds for this topic and predicate: the
/// objects of `(topic, p, ·)` when the topic is the head, the subjects of
/// `(·, p, topic)` when it is the tail.
pub fn complete_answers(
    complete: &KnowledgeGraph,
    topic: EntityId,
    predicate: PredicateId,
    direction: Direction,
) -> Result<BTreeSet<EntityId>, BenchError> {
    let answers: BTreeSet<EntityId> = match direction {
        Direction::HeadAsTopic => {
            complete.triples_with_sp(topic, predicate).iter().map(|t| t.object).collect()
        }
        Direction::TailAsTopic => {
            complete.triples_with_po(predicate, topic).iter().map(|t| t.subject).collect()
        }
    };
    if answers.is_empty() {
        return Err(BenchError::EmptyAnswerSet);
    }
    Ok(answers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::GraphBuilder;
    use crate::llm::{LlmError, TemplateGenerator};
    use std::sync::Mutex;

    fn family() -> KnowledgeGraph {
        let mut b = GraphBuilder::new();
        for sibling in ["205", "138", "2973", "2974"] {
            b.add("139", "brotherOf", sibling);
        }
        b.add("139", "fatherOf", "14");
        b.add("205", "uncleOf", "14");
        b.build()
    }

    #[test]
    fn completion_reads_the_intact_graph() {
        let graph = family();
        let topic = graph.entity("139").unwrap();
        let brother = graph.predicate("brotherOf").unwrap();
        let answers = complete_answers(&graph, topic, brother, Direction::HeadAsTopic).unwrap();
        let labels: Vec<&str> = answers.iter().map(|&a| graph.entity_label(a)).collect();
        assert_eq!(labels, vec!["205", "138", "2973", "2974"]);

        let tail_topic = graph.entity("14").unwrap();
        let father = graph.predicate("fatherOf").unwrap();
        let answers =
            complete_answers(&graph, tail_topic, father, Direction::TailAsTopic).unwrap();
        assert_eq!(answers.len(), 1);
        assert!(answers.contains(&graph.entity("139").unwrap()));

        assert!(matches!(
            complete_answers(&graph, topic, father, Direction::TailAsTopic),
            Err(BenchError::EmptyAnswerSet)
        ));
    }

    #[test]
    fn validation_checks_topic_answer_and_phrasing() {
        let graph = family();
        let topic = graph.entity("139").unwrap();
        let answer = graph.entity("205").unwrap();
        let check = |text: &str| validate_question(text, &graph, topic, answer);

        assert!(check("Who is 139's brother?").is_ok());
        assert!(check("Which person does 139 count as a brother?").is_ok());
        let err = check("Who is someone's brother?").unwrap_err();
        assert!(err.contains("topic"), "{err}");
        let err = check("Is 139 the brother of 205?").unwrap_err();
        assert!(err.contains("answer"), "{err}");
        let err = check("Is 139 a brother?").unwrap_err();
        assert!(err.contains("yes/no"), "{err}");
        let err = check("???").unwrap_err();
        assert!(err.contains("topic"), "{err}");
    }

    struct Scripted {
        responses: Vec<String>,
        attempts: Mutex<Vec<u32>>,
    }

    impl QuestionGenerator for Scripted {
        fn question(
            &self,
            _graph: &KnowledgeGraph,
            _spec: &QuestionSpec,
            attempt: u32,
        ) -> Result<String, LlmError> {
            self.attempts.lock().unwrap().push(attempt);
            Ok(self.responses[attempt as usize].clone())
        }
    }

    fn removal(graph: &KnowledgeGraph) -> Triple {
        Triple::new(
            graph.entity("139").unwrap(),
            graph.predicate("brotherOf").unwrap(),
            graph.entity("205").unwrap(),
        )
    }

    #[test]
    fn a_valid_first_attempt_is_taken_as_is() {
        let graph = family();
        let generator = Scripted {
            responses: vec!["Who is 139's brother?".into()],
            attempts: Mutex::new(vec![]),
        };
        let text = generate_question(
            &graph,
            "q00000",
            removal(&graph),
            Direction::HeadAsTopic,
            &generator,
        )
        .unwrap();
        assert_eq!(text, "Who is 139's brother?");
        assert_eq!(*generator.attempts.lock().unwrap(), vec![0]);
    }

    #[test]
    fn invalid_attempts_regenerate_once_then_fall_back() {
        let graph = family();
        let generator = Scripted {
            responses: vec![
                "Is 139 a brother?".into(),
                "Certainly! The answer is 205.".into(),
            ],
            attempts: Mutex::new(vec![]),
        };
        let text = generate_question(
            &graph,
            "q00000",
            removal(&graph),
            Direction::HeadAsTopic,
            &generator,
        )
        .unwrap();
        assert_eq!(text, "Which entity is 139 the brotherOf of?");
        assert_eq!(*generator.attempts.lock().unwrap(), vec![0, 1]);
    }

    #[test]
    fn the_template_generator_cannot_dodge_validation() {
        // An entity labelled like the predicate poisons even the fallback:
        // the failure must surface rather than loop.
        let mut b = GraphBuilder::new();
        b.add("139", "205", "205");
        let graph = b.build();
        let removed = Triple::new(
            graph.entity("139").unwrap(),
            graph.predicate("205").unwrap(),
            graph.entity("205").unwrap(),
        );
        let err = generate_question(
            &graph,
            "q00000",
            removed,
            Direction::HeadAsTopic,
            &TemplateGenerator,
        )
        .unwrap_err();
        assert!(matches!(err, BenchError::ValidationFailure { .. }), "got {err:?}");
    }

    struct Failing;

    impl QuestionGenerator for Failing {
        fn question(
            &self,
            _graph: &KnowledgeGraph,
            _spec: &QuestionSpec,
            _attempt: u32,
        ) -> Result<String, LlmError> {
            Err(LlmError::Transport("connection refused".into()))
        }
    }

    #[test]
    fn generator_errors_propagate() {
        let graph = family();
        let err = generate_question(
            &graph,
            "q00000",
            removal(&graph),
            Direction::HeadAsTopic,
            &Failing,
        )
        .unwrap_err();
        assert!(matches!(err, BenchError::Generator { .. }), "got {err:?}");
    }
}
