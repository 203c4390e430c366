//! Horn rule mining over a knowledge graph.
//!
//! Rules have the shape `B1 ∧ B2 ∧ ... ⇒ r(X, Y)`: a conjunctive body of
//! binary atoms implying a single head atom. [`mine`] runs a breadth-first
//! refinement search from the length-1 rule `⊤ ⇒ r(X, Y)` of every
//! predicate, growing bodies one atom at a time (dangling atom, closing
//! atom, and optionally instantiated atom operators), pruning by head
//! coverage, and emitting closed rules whose confidence measures clear the
//! configured thresholds and whose PCA confidence strictly beats every
//! previously mined generalization (the skyline criterion).
//!
//! Quality measures follow the standard definitions: support counts
//! distinct head groundings whose body also holds; head coverage divides by
//! the head predicate's fact count; standard confidence divides by the
//! number of distinct head-variable pairs the body can bind; PCA confidence
//! shrinks that denominator to pairs `(x, y)` where `x` has *some* fact
//! under the head predicate, crediting the graph's own incompleteness.
//! All four are kept as integer numerators and denominators, so threshold
//! checks are exact rational comparisons rather than float ones.

mod canonical;
mod counting;
mod refine;
mod search;
mod text;

pub use search::mine;
pub use text::{format_rule, parse_rules, write_rules, RuleParseError};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kg::{EntityId, KnowledgeGraph, PredicateId, Triple};
use crate::ratio::Ratio;

#[derive(Error, Debug, PartialEq, Eq)]
pub enum MinerError {
    #[error("head predicate has no facts in the graph")]
    ZeroHeadFacts,
    #[error("rule body has no groundings in the graph")]
    ZeroBodyGroundings,
    #[error("PCA denominator is zero: no body binding has a head-predicate fact on its subject")]
    ZeroPcaDenominator,
    #[error("rule is not safe: a head variable does not occur in the body")]
    UnsafeRule,
    #[error("head atom must relate two distinct variables")]
    UnsupportedHead,
}

/// A rule variable. Mined rules number variables densely with the head pair
/// first, but any numbering below [`MAX_VARS`] works.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Variable(pub u8);

/// Upper bound on distinct variables per rule (a rule of length L uses at
/// most L + 1).
pub const MAX_VARS: usize = 12;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Term {
    Var(Variable),
    Const(EntityId),
}

impl Term {
    pub fn var(index: u8) -> Term {
        Term::Var(Variable(index))
    }

    pub(crate) fn as_var(self) -> Option<Variable> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }
}

/// One binary atom, `predicate(subject, object)`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Atom {
    pub predicate: PredicateId,
    pub subject: Term,
    pub object: Term,
}

impl Atom {
    pub fn new(predicate: PredicateId, subject: Term, object: Term) -> Atom {
        Atom { predicate, subject, object }
    }

    fn terms(&self) -> [Term; 2] {
        [self.subject, self.object]
    }
}

/// Cached integer counts behind the four quality measures.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Measures {
    /// Distinct head groundings (head-variable pairs) with body and head
    /// both present.
    pub support: u64,
    /// Facts of the head predicate.
    pub head_facts: u64,
    /// Distinct head-variable pairs the body can bind.
    pub body_pairs: u64,
    /// Of those, pairs whose subject has some head-predicate fact.
    pub pca_pairs: u64,
}

impl Measures {
    pub fn head_coverage(&self) -> f64 {
        self.support as f64 / self.head_facts as f64
    }

    pub fn confidence(&self) -> f64 {
        self.support as f64 / self.body_pairs as f64
    }

    pub fn pca_confidence(&self) -> f64 {
        self.support as f64 / self.pca_pairs as f64
    }
}

/// A Horn rule. Equality and hashing ignore the cached measures: a rule is
/// its atoms.
#[derive(Clone, Debug)]
pub struct Rule {
    pub head: Atom,
    pub body: Vec<Atom>,
    /// Filled in by [`mine`]; `None` for hand-built or parsed rules.
    pub measures: Option<Measures>,
}

impl PartialEq for Rule {
    fn eq(&self, other: &Rule) -> bool {
        self.head == other.head && self.body == other.body
    }
}

impl Eq for Rule {}

impl std::hash::Hash for Rule {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.head.hash(state);
        self.body.hash(state);
    }
}

impl Rule {
    pub fn new(head: Atom, body: Vec<Atom>) -> Rule {
        let rule = Rule { head, body, measures: None };
        debug_assert!(rule.variable_span() <= MAX_VARS, "too many variables in rule");
        rule
    }

    /// Number of atoms including the head.
    pub fn len(&self) -> usize {
        self.body.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        std::iter::once(&self.head).chain(self.body.iter())
    }

    /// One past the highest variable index in use.
    fn variable_span(&self) -> usize {
        self.atoms()
            .flat_map(|a| a.terms())
            .filter_map(|t| t.as_var())
            .map(|v| v.0 as usize)
            .max()
            .map_or(0, |m| m + 1)
    }

    /// Distinct variables in ascending index order.
    pub fn variables(&self) -> Vec<Variable> {
        let mut vars: Vec<Variable> = self
            .atoms()
            .flat_map(|a| a.terms())
            .filter_map(|t| t.as_var())
            .collect();
        vars.sort_unstable();
        vars.dedup();
        vars
    }

    /// Canonical byte string, identical for alpha-equivalent rules (any
    /// variable renaming, any body atom order).
    pub fn signature(&self) -> Vec<u32> {
        canonical::canonical_key(self)
    }

    /// Head and body atoms rendered with predicate labels and `?a`-style
    /// variables, e.g. `fatherOf(?a,?b) & uncleOf(?c,?b) => brotherOf(?a,?c)`.
    pub fn render(&self, graph: &KnowledgeGraph) -> String {
        text::render_rule_atoms(self, graph)
    }
}

/// The three structural properties of a rule.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct StructuralChecks {
    /// Every variable occurs in at least two atoms.
    pub closed: bool,
    /// The atoms form one component under shared variables and constants.
    pub connected: bool,
    /// Every head variable occurs somewhere in the body.
    pub safe: bool,
}

pub fn structural_checks(rule: &Rule) -> StructuralChecks {
    let mut occurs = [0u8; MAX_VARS];
    for atom in rule.atoms() {
        let mut in_atom = [false; MAX_VARS];
        for term in atom.terms() {
            if let Some(v) = term.as_var() {
                in_atom[v.0 as usize] = true;
            }
        }
        for (i, present) in in_atom.iter().enumerate() {
            if *present {
                occurs[i] += 1;
            }
        }
    }
    let closed = rule
        .variables()
        .iter()
        .all(|v| occurs[v.0 as usize] >= 2);

    let safe = rule.head.terms().iter().all(|t| match t.as_var() {
        Some(v) => rule
            .body
            .iter()
            .any(|a| a.terms().iter().any(|bt| bt.as_var() == Some(v))),
        None => true,
    });

    // union-find over atoms: connect any two atoms sharing a variable or a
    // constant
    let atoms: Vec<&Atom> = rule.atoms().collect();
    let mut parent: Vec<usize> = (0..atoms.len()).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    for i in 0..atoms.len() {
        for j in i + 1..atoms.len() {
            let shares = atoms[i]
                .terms()
                .iter()
                .any(|t| atoms[j].terms().contains(t));
            if shares {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri] = rj;
            }
        }
    }
    let root = find(&mut parent, 0);
    let connected = (0..atoms.len()).all(|i| find(&mut parent, i) == root);

    StructuralChecks { closed, connected, safe }
}

/// Distinct head groundings whose body is satisfiable: for every fact
/// `r(x, y)` of the head predicate, does some binding of the remaining
/// variables put every body atom in the graph?
pub fn support(rule: &Rule, graph: &KnowledgeGraph) -> u64 {
    counting::count_support(rule, graph)
}

/// support / head-predicate fact count.
pub fn head_coverage(rule: &Rule, graph: &KnowledgeGraph) -> Result<f64, MinerError> {
    let head_facts = graph.triples_with_p(rule.head.predicate).len() as u64;
    if head_facts == 0 {
        return Err(MinerError::ZeroHeadFacts);
    }
    Ok(counting::count_support(rule, graph) as f64 / head_facts as f64)
}

/// support / distinct head-variable pairs bound by the body.
pub fn confidence(rule: &Rule, graph: &KnowledgeGraph) -> Result<f64, MinerError> {
    let m = measures(rule, graph)?;
    if m.body_pairs == 0 {
        return Err(MinerError::ZeroBodyGroundings);
    }
    Ok(m.confidence())
}

/// support / body pairs whose subject has some head-predicate fact (the
/// partial-completeness denominator). Always >= standard confidence.
pub fn pca_confidence(rule: &Rule, graph: &KnowledgeGraph) -> Result<f64, MinerError> {
    let m = measures(rule, graph)?;
    if m.body_pairs == 0 {
        return Err(MinerError::ZeroBodyGroundings);
    }
    if m.pca_pairs == 0 {
        return Err(MinerError::ZeroPcaDenominator);
    }
    Ok(m.pca_confidence())
}

/// All four integer counts in one pass. Requires a head atom over two
/// distinct variables, both of which appear in the body.
pub fn measures(rule: &Rule, graph: &KnowledgeGraph) -> Result<Measures, MinerError> {
    counting::pair_counts(rule, graph)
}

/// One grounding per distinct head triple: the head fact plus one witness
/// triple per body atom, in rule body order. Head triples are visited in
/// ascending (s,p,o) order and the first body match wins (depth-first over
/// body atoms in rule order, candidates in index order), so output is
/// deterministic. At most `limit` groundings are returned.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Grounding {
    pub head_triple: Triple,
    pub body_triples: Vec<Triple>,
}

pub fn groundings(rule: &Rule, graph: &KnowledgeGraph, limit: usize) -> Vec<Grounding> {
    counting::enumerate_groundings(rule, graph, limit)
}

/// Candidate rules one atom longer than `rule`: dangling atoms (one fresh
/// variable joined to an existing one), closing atoms (two existing
/// variables), and, when enabled, instantiated atoms (an existing variable
/// against a constant that occurs under the predicate). Candidates never
/// duplicate an atom already in the rule, and the list is deduplicated
/// modulo variable renaming. Returns nothing when the rule is already at
/// `config.max_length`.
pub fn refine(rule: &Rule, graph: &KnowledgeGraph, config: &MinerConfig) -> Vec<Rule> {
    if rule.len() >= config.max_length {
        return Vec::new();
    }
    refine::refinements(rule, graph, config.allow_instantiated_atoms)
}

/// Mining thresholds and limits.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MinerConfig {
    /// Maximum atoms per rule, head included.
    pub max_length: usize,
    /// Minimum standard confidence for output.
    pub min_confidence: Ratio,
    /// Minimum head coverage for a refinement to enter the queue.
    pub min_head_coverage: Ratio,
    /// Minimum PCA confidence for output.
    pub min_pca_confidence: Ratio,
    /// Whether refinement may ground one argument to a constant.
    pub allow_instantiated_atoms: bool,
    /// Worker threads for candidate evaluation; 0 means all cores.
    pub workers: usize,
}

impl MinerConfig {
    /// Family-style graphs: rules up to 3 atoms.
    pub fn family() -> MinerConfig {
        MinerConfig {
            max_length: 3,
            min_confidence: Ratio::new(3, 10),
            min_head_coverage: Ratio::new(1, 10),
            min_pca_confidence: Ratio::new(4, 10),
            allow_instantiated_atoms: false,
            workers: 0,
        }
    }

    /// FB15k-237-scale graphs: rules up to 4 atoms, same thresholds.
    pub fn fb15k237() -> MinerConfig {
        MinerConfig { max_length: 4, ..MinerConfig::family() }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.max_length < 2 {
            return Err("max_length must be at least 2".into());
        }
        if self.max_length + 1 > MAX_VARS {
            return Err(format!("max_length must be at most {}", MAX_VARS - 1));
        }
        Ok(())
    }
}
