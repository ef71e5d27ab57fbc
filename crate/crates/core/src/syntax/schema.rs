use std::collections::BTreeMap;
use std::fmt;

use super::ast::{Pos, Program};

/// Role of a predicate in the knowledge base.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PredicateKind {
    /// Static classification vocabulary.
    Vocabulary,
    /// Patient history, asserted from answers.
    History,
    /// Derived diagnostic conclusions.
    Derived,
    /// Questionnaire metadata and bookkeeping.
    Questionnaire,
}

pub struct PredicateSpec {
    pub name: &'static str,
    pub arity: usize,
    pub kind: PredicateKind,
}

const fn spec(name: &'static str, arity: usize, kind: PredicateKind) -> PredicateSpec {
    PredicateSpec { name, arity, kind }
}

use PredicateKind::*;

/// The fixed relational schema: eighteen core predicates followed by the
/// questionnaire predicates and the exam-result extension.
pub const SCHEMA: &[PredicateSpec] = &[
    spec("ichdDiagnosis", 2, Vocabulary),
    spec("ichdSymptom", 2, Vocabulary),
    spec("ichdAttribute", 2, Vocabulary),
    spec("mutuallyExclusive", 2, Vocabulary),
    spec("sameAs", 2, Vocabulary),
    spec("isA", 2, Vocabulary),
    spec("symptom", 1, History),
    spec("symAttribute", 2, History),
    spec("minAttacks", 2, History),
    spec("maxAttacks", 2, History),
    spec("minDuration", 2, History),
    spec("maxDuration", 2, History),
    spec("minDaysPerMonth", 2, History),
    spec("maxDaysPerMonth", 2, History),
    spec("reportedCriterion", 1, History),
    spec("diagnosis", 1, Derived),
    spec("criterion", 2, Derived),
    spec("subCriterion", 3, Derived),
    spec("examResult", 2, History),
    spec("topic", 2, Questionnaire),
    spec("criterionDependsOn", 5, Questionnaire),
    spec("possible", 3, Questionnaire),
    spec("relevant", 3, Questionnaire),
    spec("askable", 3, Questionnaire),
];

pub fn lookup(predicate: &str) -> Option<&'static PredicateSpec> {
    SCHEMA.iter().find(|s| s.name == predicate)
}

pub fn kind_of(predicate: &str) -> Option<PredicateKind> {
    lookup(predicate).map(|s| s.kind)
}

/// Predicates holding patient history (answer-derived facts).
pub fn history_predicates() -> impl Iterator<Item = &'static str> {
    SCHEMA.iter().filter(|s| s.kind == History).map(|s| s.name)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub pos: Pos,
    pub message: String,
}

impl Diagnostic {
    pub fn error(pos: Pos, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            pos,
            message: message.into(),
        }
    }

    pub fn warning(pos: Pos, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            pos,
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{level}: {}: {}", self.pos, self.message)
    }
}

/// Checks every atom against the schema. Wrong arity on a schema predicate is
/// an error; an unknown predicate is a warning (once per predicate), and an
/// unknown predicate used with two arities is an error.
pub fn validate_schema(p: &Program) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut unknown: BTreeMap<&str, usize> = BTreeMap::new();
    for (atom, pos) in p.atoms() {
        match lookup(&atom.predicate) {
            Some(spec) if spec.arity != atom.arity() => out.push(Diagnostic::error(
                pos,
                format!(
                    "{} expects {} argument(s), found {} in {atom}",
                    spec.name,
                    spec.arity,
                    atom.arity()
                ),
            )),
            Some(_) => {}
            None => match unknown.get(atom.predicate.as_str()) {
                None => {
                    unknown.insert(&atom.predicate, atom.arity());
                    out.push(Diagnostic::warning(
                        pos,
                        format!("unknown predicate {}/{}", atom.predicate, atom.arity()),
                    ));
                }
                Some(&n) if n != atom.arity() => out.push(Diagnostic::error(
                    pos,
                    format!(
                        "predicate {} used with arity {} and {n}",
                        atom.predicate,
                        atom.arity()
                    ),
                )),
                Some(_) => {}
            },
        }
    }
    out
}
