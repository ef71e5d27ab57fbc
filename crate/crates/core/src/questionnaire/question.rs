use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::syntax::Term;

/// Question groups. Dependent topics refer to a symptom the patient
/// already reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Topic {
    Symptom,
    Attribute,
    Duration,
    DurationAtMost,
    Frequency,
    FrequencyAtMost,
    Attacks,
    AttacksAtMost,
    Exam,
    ReportedCriterion,
}

impl Topic {
    pub const ALL: [Topic; 10] = [
        Topic::Symptom,
        Topic::Attribute,
        Topic::Duration,
        Topic::DurationAtMost,
        Topic::Frequency,
        Topic::FrequencyAtMost,
        Topic::Attacks,
        Topic::AttacksAtMost,
        Topic::Exam,
        Topic::ReportedCriterion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Topic::Symptom => "symptom",
            Topic::Attribute => "attribute",
            Topic::Duration => "duration",
            Topic::DurationAtMost => "durationAtMost",
            Topic::Frequency => "frequency",
            Topic::FrequencyAtMost => "frequencyAtMost",
            Topic::Attacks => "attacks",
            Topic::AttacksAtMost => "attacksAtMost",
            Topic::Exam => "exam",
            Topic::ReportedCriterion => "reportedCriterion",
        }
    }

    pub fn from_name(name: &str) -> Option<Topic> {
        Topic::ALL.into_iter().find(|t| t.name() == name)
    }

    pub fn is_dependent(self) -> bool {
        !matches!(self, Topic::Symptom | Topic::Exam | Topic::ReportedCriterion)
    }

    /// History predicate asserted by an answer.
    pub fn predicate(self) -> &'static str {
        match self {
            Topic::Symptom => "symptom",
            Topic::Attribute => "symAttribute",
            Topic::Duration => "minDuration",
            Topic::DurationAtMost => "maxDuration",
            Topic::Frequency => "minDaysPerMonth",
            Topic::FrequencyAtMost => "maxDaysPerMonth",
            Topic::Attacks => "minAttacks",
            Topic::AttacksAtMost => "maxAttacks",
            Topic::Exam => "examResult",
            Topic::ReportedCriterion => "reportedCriterion",
        }
    }

    /// Numeric topics as (quantity, is upper bound).
    pub fn numeric(self) -> Option<(Quantity, bool)> {
        match self {
            Topic::Duration => Some((Quantity::Duration, false)),
            Topic::DurationAtMost => Some((Quantity::Duration, true)),
            Topic::Frequency => Some((Quantity::Frequency, false)),
            Topic::FrequencyAtMost => Some((Quantity::Frequency, true)),
            Topic::Attacks => Some((Quantity::Attacks, false)),
            Topic::AttacksAtMost => Some((Quantity::Attacks, true)),
            _ => None,
        }
    }
}

impl fmt::Display for Topic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Quantities bounded by the numeric topics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quantity {
    Duration,
    Frequency,
    Attacks,
}

impl Quantity {
    pub const ALL: [Quantity; 3] = [Quantity::Duration, Quantity::Frequency, Quantity::Attacks];

    pub fn topics(self) -> (Topic, Topic) {
        match self {
            Quantity::Duration => (Topic::Duration, Topic::DurationAtMost),
            Quantity::Frequency => (Topic::Frequency, Topic::FrequencyAtMost),
            Quantity::Attacks => (Topic::Attacks, Topic::AttacksAtMost),
        }
    }
}

/// A binary question `(subject, value, topic)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Question {
    pub subject: Term,
    pub value: Term,
    pub topic: Topic,
}

impl Question {
    pub fn new(subject: Term, value: Term, topic: Topic) -> Self {
        Question {
            subject,
            value,
            topic,
        }
    }
}

impl Ord for Question {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.topic.name(), &self.subject, &self.value).cmp(&(
            other.topic.name(),
            &other.subject,
            &other.value,
        ))
    }
}

impl PartialOrd for Question {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Question {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}, {})", self.topic, self.subject, self.value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnswerKind {
    Real,
    Simulated,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Answer {
    pub question: Question,
    pub polarity: bool,
    pub kind: AnswerKind,
}

impl Answer {
    pub fn real(question: Question, polarity: bool) -> Self {
        Answer {
            question,
            polarity,
            kind: AnswerKind::Real,
        }
    }

    pub fn simulated(question: Question, polarity: bool) -> Self {
        Answer {
            question,
            polarity,
            kind: AnswerKind::Simulated,
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.question, if self.polarity { "yes" } else { "no" })
    }
}

/// Ordered real answers; the only state carried between steps.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct History {
    entries: Vec<Answer>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("question {0} answered twice")]
pub struct DuplicateAnswer(pub Question);

impl History {
    pub fn new() -> Self {
        History::default()
    }

    pub fn from_answers(answers: impl IntoIterator<Item = Answer>) -> Result<Self, DuplicateAnswer> {
        let mut h = History::new();
        for a in answers {
            h.push(a)?;
        }
        Ok(h)
    }

    /// Appends a real answer, rejecting a second answer to the same question.
    pub fn push(&mut self, answer: Answer) -> Result<(), DuplicateAnswer> {
        if self.contains(&answer.question) {
            return Err(DuplicateAnswer(answer.question));
        }
        self.entries.push(Answer {
            kind: AnswerKind::Real,
            ..answer
        });
        Ok(())
    }

    pub fn contains(&self, q: &Question) -> bool {
        self.entries.iter().any(|a| &a.question == q)
    }

    pub fn entries(&self) -> &[Answer] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn truncated(&self, len: usize) -> History {
        History {
            entries: self.entries[..len.min(self.entries.len())].to_vec(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn topic_names_round_trip() {
        for t in Topic::ALL {
            assert_eq!(Topic::from_name(t.name()), Some(t));
        }
        assert_eq!(Topic::from_name("weather"), None);
    }

    #[test]
    fn dependence_matches_topic_kind() {
        assert!(!Topic::Symptom.is_dependent());
        assert!(!Topic::Exam.is_dependent());
        assert!(!Topic::ReportedCriterion.is_dependent());
        assert!(Topic::Attribute.is_dependent());
        assert!(Topic::Duration.is_dependent());
        assert!(Topic::Frequency.is_dependent());
        assert!(Topic::Attacks.is_dependent());
    }

    #[test]
    fn history_rejects_duplicates() {
        let q = Question::new(Term::symbol("s4"), Term::text("headache"), Topic::Symptom);
        let mut h = History::new();
        h.push(Answer::real(q.clone(), true)).unwrap();
        assert_eq!(h.push(Answer::real(q.clone(), false)), Err(DuplicateAnswer(q)));
        assert_eq!(h.len(), 1);
    }

    #[test]
    fn questions_order_by_topic_name_first() {
        let a = Question::new(Term::text("headache"), Term::Int(5), Topic::Attacks);
        let b = Question::new(Term::symbol("s4"), Term::text("headache"), Topic::Symptom);
        let c = Question::new(Term::text("headache"), Term::Int(240), Topic::Duration);
        let mut v = vec![b.clone(), c.clone(), a.clone()];
        v.sort();
        assert_eq!(v, vec![a, c, b]);
    }
}
