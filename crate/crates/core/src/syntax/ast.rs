use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};

/// Source position of a statement. Positions never take part in equality,
/// ordering or hashing, so two programs parsed from differently laid out
/// text compare equal when their statements do.
#[derive(Debug, Clone, Copy, Default)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl Pos {
    pub fn new(line: usize, column: usize) -> Self {
        Pos { line, column }
    }
}

impl PartialEq for Pos {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Pos {}

impl PartialOrd for Pos {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pos {
    fn cmp(&self, _: &Self) -> Ordering {
        Ordering::Equal
    }
}

impl Hash for Pos {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    /// Lowercase identifier, may contain dots (`d.1.1`).
    Symbol(String),
    Int(i64),
    /// Double-quoted text; internal whitespace is preserved.
    Text(String),
    Var(String),
}

impl Term {
    pub fn symbol(s: impl Into<String>) -> Self {
        Term::Symbol(s.into())
    }

    pub fn text(s: impl Into<String>) -> Self {
        Term::Text(s.into())
    }

    pub fn var(s: impl Into<String>) -> Self {
        Term::Var(s.into())
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Term::Int(i) => Some(*i),
            _ => None,
        }
    }

    /// The bare value without quoting: symbol name, text content or number.
    pub fn plain(&self) -> String {
        match self {
            Term::Symbol(s) | Term::Text(s) | Term::Var(s) => s.clone(),
            Term::Int(i) => i.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Atom {
            predicate: predicate.into(),
            args,
        }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        !self.args.iter().any(Term::is_var)
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(Term::as_var)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub atom: Atom,
    /// Strong (classical) negation, written `-`.
    pub strong: bool,
    /// Negation as failure, written `not`.
    pub naf: bool,
}

impl Literal {
    pub fn positive(atom: Atom) -> Self {
        Literal {
            atom,
            strong: false,
            naf: false,
        }
    }

    pub fn strong(atom: Atom) -> Self {
        Literal {
            atom,
            strong: true,
            naf: false,
        }
    }

    pub fn with_naf(mut self) -> Self {
        self.naf = true;
        self
    }

    /// Same atom with the strong-negation sign flipped.
    pub fn denied(&self) -> Self {
        Literal {
            atom: self.atom.clone(),
            strong: !self.strong,
            naf: self.naf,
        }
    }

    pub fn predicate(&self) -> &str {
        &self.atom.predicate
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Comparator {
    Lt,
    Le,
    Eq,
    Ne,
    Gt,
    Ge,
}

impl Comparator {
    pub fn holds(self, lhs: i64, rhs: i64) -> bool {
        match self {
            Comparator::Lt => lhs < rhs,
            Comparator::Le => lhs <= rhs,
            Comparator::Eq => lhs == rhs,
            Comparator::Ne => lhs != rhs,
            Comparator::Gt => lhs > rhs,
            Comparator::Ge => lhs >= rhs,
        }
    }

    /// True when the comparison stays true as the counted set grows.
    pub fn is_monotone(self) -> bool {
        matches!(self, Comparator::Gt | Comparator::Ge)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Eq => "=",
            Comparator::Ne => "!=",
            Comparator::Gt => ">",
            Comparator::Ge => ">=",
        }
    }
}

/// `#count{template : conditions} comparator bound`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Aggregate {
    pub template: Vec<Term>,
    pub conditions: Vec<Literal>,
    pub comparator: Comparator,
    pub bound: Term,
}

impl Aggregate {
    pub fn vars(&self) -> BTreeSet<&str> {
        let mut out: BTreeSet<&str> = self.template.iter().filter_map(Term::as_var).collect();
        for c in &self.conditions {
            out.extend(c.atom.vars());
        }
        out.extend(self.bound.as_var());
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BodyElem {
    Literal(Literal),
    Aggregate(Aggregate),
}

impl BodyElem {
    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            BodyElem::Literal(l) => Some(l),
            BodyElem::Aggregate(_) => None,
        }
    }
}

impl From<Literal> for BodyElem {
    fn from(l: Literal) -> Self {
        BodyElem::Literal(l)
    }
}

impl From<Aggregate> for BodyElem {
    fn from(a: Aggregate) -> Self {
        BodyElem::Aggregate(a)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rule {
    pub head: Literal,
    pub body: Vec<BodyElem>,
    pub pos: Pos,
}

impl Rule {
    pub fn new(head: Literal, body: Vec<BodyElem>) -> Self {
        Rule {
            head,
            body,
            pos: Pos::default(),
        }
    }

    pub fn literals(&self) -> impl Iterator<Item = &Literal> {
        self.body.iter().filter_map(BodyElem::as_literal)
    }

    pub fn aggregates(&self) -> impl Iterator<Item = &Aggregate> {
        self.body.iter().filter_map(|b| match b {
            BodyElem::Aggregate(a) => Some(a),
            BodyElem::Literal(_) => None,
        })
    }

    /// Variables bound by positive (non-`not`) body literals.
    pub fn bound_vars(&self) -> BTreeSet<&str> {
        self.literals()
            .filter(|l| !l.naf)
            .flat_map(|l| l.atom.vars())
            .collect()
    }

    pub fn is_ground(&self) -> bool {
        self.head.atom.is_ground()
            && self.body.iter().all(|b| match b {
                BodyElem::Literal(l) => l.atom.is_ground(),
                // Aggregate-local variables may remain.
                BodyElem::Aggregate(a) => !a.bound.is_var(),
            })
    }

    /// Checks the safety condition: every variable of the head, of a `not`
    /// literal, or of an aggregate's bound occurs in a positive body literal;
    /// aggregate-local variables are bound by the aggregate's own positive
    /// conditions and every template variable occurs in the conditions.
    pub fn check_safety(&self) -> Result<(), SafetyViolation> {
        if self.head.naf {
            return Err(SafetyViolation::NafHead);
        }
        let bound = self.bound_vars();
        let unsafe_var = |v: &str| SafetyViolation::UnboundVariable(v.to_string());
        for v in self.head.atom.vars() {
            if !bound.contains(v) {
                return Err(unsafe_var(v));
            }
        }
        for l in self.literals().filter(|l| l.naf) {
            for v in l.atom.vars() {
                if !bound.contains(v) {
                    return Err(unsafe_var(v));
                }
            }
        }
        for a in self.aggregates() {
            if let Some(v) = a.bound.as_var() {
                if !bound.contains(v) {
                    return Err(unsafe_var(v));
                }
            }
            let cond_vars: BTreeSet<&str> =
                a.conditions.iter().flat_map(|c| c.atom.vars()).collect();
            let mut local = bound.clone();
            local.extend(
                a.conditions
                    .iter()
                    .filter(|c| !c.naf)
                    .flat_map(|c| c.atom.vars()),
            );
            for v in a.template.iter().filter_map(Term::as_var) {
                if !cond_vars.contains(v) {
                    return Err(SafetyViolation::TemplateVariable(v.to_string()));
                }
                if !local.contains(v) {
                    return Err(unsafe_var(v));
                }
            }
            for c in a.conditions.iter().filter(|c| c.naf) {
                for v in c.atom.vars() {
                    if !local.contains(v) {
                        return Err(unsafe_var(v));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SafetyViolation {
    NafHead,
    UnboundVariable(String),
    TemplateVariable(String),
}

impl fmt::Display for SafetyViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SafetyViolation::NafHead => write!(f, "rule head carries `not`"),
            SafetyViolation::UnboundVariable(v) => {
                write!(f, "variable {v} does not occur in a positive body literal")
            }
            SafetyViolation::TemplateVariable(v) => {
                write!(f, "aggregate template variable {v} does not occur in its conditions")
            }
        }
    }
}

/// A ground literal without `not`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fact {
    pub literal: Literal,
    pub pos: Pos,
}

impl Fact {
    pub fn new(literal: Literal) -> Self {
        debug_assert!(!literal.naf && literal.atom.is_ground());
        Fact {
            literal,
            pos: Pos::default(),
        }
    }

    pub fn positive(atom: Atom) -> Self {
        Fact::new(Literal::positive(atom))
    }

    pub fn strong(atom: Atom) -> Self {
        Fact::new(Literal::strong(atom))
    }

    pub fn atom(&self) -> &Atom {
        &self.literal.atom
    }
}

#[derive(Debug, Clone, Default)]
pub struct Program {
    pub facts: Vec<Fact>,
    pub rules: Vec<Rule>,
}

impl Program {
    pub fn new() -> Self {
        Program::default()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty() && self.rules.is_empty()
    }

    pub fn extend(&mut self, other: Program) {
        self.facts.extend(other.facts);
        self.rules.extend(other.rules);
    }

    /// Every atom occurring anywhere in the program, with its position.
    pub fn atoms(&self) -> Vec<(&Atom, Pos)> {
        let mut out: Vec<(&Atom, Pos)> = self.facts.iter().map(|f| (f.atom(), f.pos)).collect();
        for r in &self.rules {
            out.push((&r.head.atom, r.pos));
            for b in &r.body {
                match b {
                    BodyElem::Literal(l) => out.push((&l.atom, r.pos)),
                    BodyElem::Aggregate(a) => {
                        out.extend(a.conditions.iter().map(|c| (&c.atom, r.pos)))
                    }
                }
            }
        }
        out
    }

    pub fn predicates(&self) -> BTreeSet<&str> {
        self.atoms()
            .into_iter()
            .map(|(a, _)| a.predicate.as_str())
            .collect()
    }

    /// Sets of facts and rules, ignoring order, duplicates and positions.
    pub fn structurally_eq(&self, other: &Program) -> bool {
        let facts = |p: &Program| p.facts.iter().cloned().collect::<BTreeSet<_>>();
        let rules = |p: &Program| p.rules.iter().cloned().collect::<BTreeSet<_>>();
        facts(self) == facts(other) && rules(self) == rules(other)
    }
}
