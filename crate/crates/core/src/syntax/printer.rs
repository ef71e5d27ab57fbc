use std::fmt::{self, Display, Formatter, Write};

use super::ast::{Aggregate, Atom, BodyElem, Fact, Literal, Program, Rule, Term};

impl Display for Term {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Term::Symbol(s) | Term::Var(s) => f.write_str(s),
            Term::Int(i) => write!(f, "{i}"),
            Term::Text(s) => {
                f.write_char('"')?;
                for c in s.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        c => f.write_char(c)?,
                    }
                }
                f.write_char('"')
            }
        }
    }
}

fn write_list<T: Display>(f: &mut Formatter<'_>, items: &[T]) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{item}")?;
    }
    Ok(())
}

impl Display for Atom {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            f.write_char('(')?;
            write_list(f, &self.args)?;
            f.write_char(')')?;
        }
        Ok(())
    }
}

impl Display for Literal {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        if self.naf {
            f.write_str("not ")?;
        }
        if self.strong {
            f.write_char('-')?;
        }
        write!(f, "{}", self.atom)
    }
}

impl Display for Aggregate {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str("#count{")?;
        write_list(f, &self.template)?;
        f.write_str(" : ")?;
        write_list(f, &self.conditions)?;
        write!(f, "}} {} {}", self.comparator.symbol(), self.bound)
    }
}

impl Display for BodyElem {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            BodyElem::Literal(l) => l.fmt(f),
            BodyElem::Aggregate(a) => a.fmt(f),
        }
    }
}

impl Display for Rule {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            f.write_str(" :- ")?;
            write_list(f, &self.body)?;
        }
        f.write_char('.')
    }
}

impl Display for Fact {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "{}.", self.literal)
    }
}

/// Canonical text: facts, then rules, each sorted by head predicate and then
/// by their rendering, one statement per line. Duplicate statements collapse.
pub fn print_program(p: &Program) -> String {
    let mut facts: Vec<(&str, String)> = p
        .facts
        .iter()
        .map(|f| (f.atom().predicate.as_str(), f.to_string()))
        .collect();
    let mut rules: Vec<(&str, String)> = p
        .rules
        .iter()
        .map(|r| (r.head.atom.predicate.as_str(), r.to_string()))
        .collect();
    facts.sort();
    facts.dedup();
    rules.sort();
    rules.dedup();

    let mut out = String::new();
    for (_, line) in facts.iter().chain(rules.iter()) {
        out.push_str(line);
        out.push('\n');
    }
    out
}
