use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::question::{Answer, DuplicateAnswer, History, Question, Topic};
use super::Questionnaire;
use crate::syntax::Term;

/// A question value as exchanged with clients: a number or a string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WireValue {
    Int(i64),
    Text(String),
}

impl WireValue {
    pub fn of(t: &Term) -> Self {
        match t {
            Term::Int(v) => WireValue::Int(*v),
            other => WireValue::Text(other.plain()),
        }
    }

    pub fn plain(&self) -> String {
        match self {
            WireValue::Int(v) => v.to_string(),
            WireValue::Text(s) => s.clone(),
        }
    }
}

/// An answered question in client form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerRecord {
    pub subject: String,
    pub value: WireValue,
    pub topic: String,
    pub answer: bool,
}

impl AnswerRecord {
    pub fn of(a: &Answer) -> Self {
        AnswerRecord {
            subject: a.question.subject.plain(),
            value: WireValue::of(&a.question.value),
            topic: a.question.topic.name().to_string(),
            answer: a.polarity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecordError {
    #[error("answer {index}: unknown topic {topic:?}")]
    UnknownTopic { index: usize, topic: String },
    #[error("answer {index}: no question ({subject}, {value}, {topic}) in the knowledge base")]
    UnknownQuestion {
        index: usize,
        subject: String,
        value: String,
        topic: String,
    },
    #[error("answer {index}: {source}")]
    Duplicate { index: usize, source: DuplicateAnswer },
}

impl Questionnaire {
    pub fn question_of(&self, index: usize, r: &AnswerRecord) -> Result<Question, RecordError> {
        let topic = Topic::from_name(&r.topic).ok_or_else(|| RecordError::UnknownTopic {
            index,
            topic: r.topic.clone(),
        })?;
        let value = r.value.plain();
        self.resolve(&r.subject, &value, topic)
            .ok_or_else(|| RecordError::UnknownQuestion {
                index,
                subject: r.subject.clone(),
                value,
                topic: r.topic.clone(),
            })
    }

    /// Builds a history from client records, in order.
    pub fn history_of(&self, records: &[AnswerRecord]) -> Result<History, RecordError> {
        let mut h = History::new();
        for (index, r) in records.iter().enumerate() {
            let q = self.question_of(index, r)?;
            h.push(Answer::real(q, r.answer))
                .map_err(|source| RecordError::Duplicate { index, source })?;
        }
        Ok(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_forms() {
        assert_eq!(WireValue::of(&Term::Int(240)), WireValue::Int(240));
        assert_eq!(WireValue::of(&Term::symbol("loc1")).plain(), "loc1");
        assert_eq!(WireValue::of(&Term::text("headache")).plain(), "headache");
    }

    #[test]
    fn records_round_trip_through_history() {
        let q = Questionnaire::shipped();
        let records = vec![
            AnswerRecord {
                subject: "s4".into(),
                value: WireValue::Text("headache".into()),
                topic: "symptom".into(),
                answer: true,
            },
            AnswerRecord {
                subject: "headache".into(),
                value: WireValue::Int(240),
                topic: "duration".into(),
                answer: false,
            },
        ];
        let h = q.history_of(&records).unwrap();
        let back: Vec<AnswerRecord> = h.entries().iter().map(AnswerRecord::of).collect();
        assert_eq!(back, records);
    }

    #[test]
    fn bad_records_rejected() {
        let q = Questionnaire::shipped();
        let mut r = AnswerRecord {
            subject: "s4".into(),
            value: WireValue::Text("headache".into()),
            topic: "weather".into(),
            answer: true,
        };
        assert!(matches!(q.history_of(&[r.clone()]), Err(RecordError::UnknownTopic { .. })));
        r.topic = "symptom".into();
        assert!(matches!(
            q.history_of(&[r.clone(), r.clone()]),
            Err(RecordError::Duplicate { index: 1, .. })
        ));
        r.subject = "s999".into();
        assert!(matches!(q.history_of(&[r]), Err(RecordError::UnknownQuestion { .. })));
    }
}
