use std::collections::BTreeMap;
use std::fmt;

use crate::syntax::Atom;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TruthValue {
    True,
    StrongFalse,
    Unknown,
}

impl TruthValue {
    pub fn of_sign(strong: bool) -> Self {
        if strong {
            TruthValue::StrongFalse
        } else {
            TruthValue::True
        }
    }

    pub fn is_determined(self) -> bool {
        self != TruthValue::Unknown
    }
}

impl fmt::Display for TruthValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TruthValue::True => "true",
            TruthValue::StrongFalse => "false",
            TruthValue::Unknown => "unknown",
        })
    }
}

/// Three-valued interpretation. Only determined atoms are stored; every
/// other ground atom is `Unknown`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Model {
    assignment: BTreeMap<Atom, TruthValue>,
}

impl Model {
    pub fn new() -> Self {
        Model::default()
    }

    pub fn get(&self, atom: &Atom) -> TruthValue {
        self.assignment
            .get(atom)
            .copied()
            .unwrap_or(TruthValue::Unknown)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Atom, TruthValue)> {
        self.assignment.iter().map(|(a, &v)| (a, v))
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Atoms of `predicate` holding `polarity`, in atom order.
    pub fn atoms_with(&self, predicate: &str, polarity: TruthValue) -> Vec<&Atom> {
        self.assignment
            .iter()
            .filter(|(a, &v)| a.predicate == predicate && v == polarity)
            .map(|(a, _)| a)
            .collect()
    }

    pub fn restricted_to<'a>(&self, keep: impl Fn(&str) -> bool + 'a) -> Model {
        Model {
            assignment: self
                .assignment
                .iter()
                .filter(|(a, _)| keep(&a.predicate))
                .map(|(a, &v)| (a.clone(), v))
                .collect(),
        }
    }
}

impl FromIterator<(Atom, TruthValue)> for Model {
    fn from_iter<I: IntoIterator<Item = (Atom, TruthValue)>>(iter: I) -> Self {
        Model {
            assignment: iter
                .into_iter()
                .filter(|(_, v)| v.is_determined())
                .collect(),
        }
    }
}

/// Number of distinct ground atoms of `predicate` holding `polarity`.
/// `Unknown` is never stored, so asking for it yields zero.
pub fn count_by_predicate(m: &Model, predicate: &str, polarity: TruthValue) -> usize {
    m.assignment
        .iter()
        .filter(|(a, &v)| v == polarity && a.predicate == predicate)
        .count()
}

/// Compatible plus not-compatible diagnoses.
pub fn determined_count(m: &Model) -> usize {
    count_by_predicate(m, "diagnosis", TruthValue::True)
        + count_by_predicate(m, "diagnosis", TruthValue::StrongFalse)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::Term;

    fn diag(id: &str) -> Atom {
        Atom::new("diagnosis", vec![Term::symbol(id)])
    }

    #[test]
    fn empty_model_counts_zero() {
        let m = Model::new();
        assert_eq!(count_by_predicate(&m, "diagnosis", TruthValue::True), 0);
        assert_eq!(determined_count(&m), 0);
    }

    #[test]
    fn determined_is_sum_of_both_polarities() {
        let m: Model = [
            (diag("d.1.1"), TruthValue::True),
            (diag("d.2"), TruthValue::StrongFalse),
            (Atom::new("symptom", vec![Term::symbol("s4")]), TruthValue::True),
        ]
        .into_iter()
        .collect();
        assert_eq!(count_by_predicate(&m, "diagnosis", TruthValue::True), 1);
        assert_eq!(count_by_predicate(&m, "diagnosis", TruthValue::StrongFalse), 1);
        assert_eq!(determined_count(&m), 2);
    }
}
