//! Text form of rules: `B1 & B2 & ... => H`, one rule per line, measures
//! appended as tab-separated columns.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::{Atom, Rule, Term, Variable, MAX_VARS};
use crate::kg::KnowledgeGraph;

#[derive(Error, Debug)]
#[error("rule file line {line}: {message}")]
pub struct RuleParseError {
    pub line: usize,
    pub message: String,
}

/// Renders `rule` with `?a`-style variables, lettered by first appearance
/// scanning the body left to right and the head last.
pub(crate) fn render_rule_atoms(rule: &Rule, graph: &KnowledgeGraph) -> String {
    let mut letters = [None::<char>; MAX_VARS];
    let mut next = b'a';
    let mut render_atom = |atom: &Atom| {
        let mut term = |t: Term| match t {
            Term::Var(v) => {
                let letter = *letters[v.0 as usize].get_or_insert_with(|| {
                    let c = next as char;
                    next += 1;
                    c
                });
                format!("?{letter}")
            }
            Term::Const(e) => format!("\"{}\"", graph.entity_label(e)),
        };
        let subject = term(atom.subject);
        let object = term(atom.object);
        format!("{}({subject},{object})", graph.predicate_label(atom.predicate))
    };
    let body: Vec<String> = rule.body.iter().map(&mut render_atom).collect();
    let head = render_atom(&rule.head);
    if body.is_empty() {
        format!("=> {head}")
    } else {
        format!("{} => {}", body.join(" & "), head)
    }
}

/// One rule-file line: atoms, then support, head coverage, confidence and
/// PCA confidence as tab-separated columns.
///
/// # Panics
///
/// Panics when the rule has no cached measures.
pub fn format_rule(rule: &Rule, graph: &KnowledgeGraph) -> String {
    let m = rule.measures.expect("formatting a rule without measures");
    format!(
        "{}\t{}\t{}\t{}\t{}",
        render_rule_atoms(rule, graph),
        m.support,
        m.head_coverage(),
        m.confidence(),
        m.pca_confidence()
    )
}

/// Writes `# `-prefixed header lines, then one line per rule.
pub fn write_rules<W: Write>(
    mut out: W,
    graph: &KnowledgeGraph,
    rules: &[Rule],
    header: &[String],
) -> io::Result<()> {
    for line in header {
        writeln!(out, "# {line}")?;
    }
    for rule in rules {
        writeln!(out, "{}", format_rule(rule, graph))?;
    }
    Ok(())
}

/// Reads rules back from the text format. Comment (`#`) and blank lines
/// are skipped. The measure columns are accepted but not kept: integer
/// counts cannot be rebuilt from the printed ratios, so parsed rules carry
/// `measures: None` and can be re-measured against a graph.
pub fn parse_rules<R: BufRead>(
    reader: R,
    graph: &KnowledgeGraph,
) -> Result<Vec<Rule>, RuleParseError> {
    let mut rules = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let number = i + 1;
        let fail = |message: String| RuleParseError { line: number, message };
        let text = line.map_err(|e| fail(e.to_string()))?;
        let text = text.trim_end_matches('\r').trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let atoms = text.split('\t').next().unwrap_or_default();
        rules.push(parse_rule_text(atoms, graph).map_err(fail)?);
    }
    Ok(rules)
}

fn parse_rule_text(text: &str, graph: &KnowledgeGraph) -> Result<Rule, String> {
    let (body_text, head_text) = match text.split_once(" => ") {
        Some(parts) => parts,
        None => match text.strip_prefix("=> ") {
            Some(head) => ("", head),
            None => return Err("expected `body => head`".into()),
        },
    };
    let mut vars: Vec<String> = Vec::new();
    let mut body = Vec::new();
    if !body_text.is_empty() {
        for atom_text in body_text.split(" & ") {
            body.push(parse_atom(atom_text, graph, &mut vars)?);
        }
    }
    let head = parse_atom(head_text, graph, &mut vars)?;
    Ok(Rule::new(head, body))
}

fn parse_atom(text: &str, graph: &KnowledgeGraph, vars: &mut Vec<String>) -> Result<Atom, String> {
    let text = text.trim();
    // The first `(` opens the argument list; later ones can only occur
    // inside quoted constants.
    let open = text
        .find('(')
        .ok_or_else(|| format!("malformed atom `{text}`: no argument list"))?;
    let label = &text[..open];
    let inner = text[open + 1..]
        .strip_suffix(')')
        .ok_or_else(|| format!("malformed atom `{text}`: missing `)`"))?;
    let args = split_args(inner).map_err(|e| format!("malformed atom `{text}`: {e}"))?;
    let [subject, object] = args.as_slice() else {
        return Err(format!("atom `{text}` must have exactly two arguments"));
    };
    let predicate = graph
        .predicate(label)
        .ok_or_else(|| format!("unknown predicate `{label}`"))?;
    Ok(Atom::new(
        predicate,
        parse_term(subject, graph, vars)?,
        parse_term(object, graph, vars)?,
    ))
}

fn split_args(inner: &str) -> Result<Vec<String>, String> {
    let mut args = vec![String::new()];
    let mut in_quotes = false;
    for c in inner.chars() {
        match c {
            '"' => {
                in_quotes = !in_quotes;
                args.last_mut().unwrap().push(c);
            }
            ',' if !in_quotes => args.push(String::new()),
            _ => args.last_mut().unwrap().push(c),
        }
    }
    if in_quotes {
        return Err("unterminated quote".into());
    }
    Ok(args)
}

fn parse_term(text: &str, graph: &KnowledgeGraph, vars: &mut Vec<String>) -> Result<Term, String> {
    let text = text.trim();
    if let Some(name) = text.strip_prefix('?') {
        if name.is_empty() {
            return Err("empty variable name".into());
        }
        let index = match vars.iter().position(|v| v == name) {
            Some(i) => i,
            None if vars.len() == MAX_VARS => {
                return Err(format!("more than {MAX_VARS} distinct variables"));
            }
            None => {
                vars.push(name.to_string());
                vars.len() - 1
            }
        };
        return Ok(Term::Var(Variable(index as u8)));
    }
    if let Some(label) = text.strip_prefix('"').and_then(|t| t.strip_suffix('"')) {
        let entity = graph
            .entity(label)
            .ok_or_else(|| format!("unknown entity `{label}`"))?;
        return Ok(Term::Const(entity));
    }
    Err(format!("expected `?var` or a quoted constant, got `{text}`"))
}
