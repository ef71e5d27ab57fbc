use std::collections::{BTreeMap, BTreeSet};

use super::question::{Quantity, Question, Topic};
use crate::knowledge::KnowledgeBase;
use crate::syntax::{Atom, Fact, Term};

/// Numeric thresholds that may appear in answers, per symptom and quantity.
#[derive(Debug, Clone, Default)]
pub(crate) struct NumericDomain {
    values: BTreeMap<(String, Quantity), BTreeSet<i64>>,
}

/// An interval contradiction between numeric answers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct BoundsConflict {
    pub symptom: String,
    pub quantity: Quantity,
}

fn bound_fact(symptom: &str, topic: Topic, value: i64, holds: bool) -> Fact {
    let atom = Atom::new(topic.predicate(), vec![Term::symbol(symptom), Term::Int(value)]);
    if holds {
        Fact::positive(atom)
    } else {
        Fact::strong(atom)
    }
}

impl NumericDomain {
    pub(crate) fn new(kb: &KnowledgeBase, questions: &[Question]) -> Self {
        let mut values: BTreeMap<(String, Quantity), BTreeSet<i64>> = BTreeMap::new();
        for q in questions {
            let (Some((quantity, _)), Some(v)) = (q.topic.numeric(), q.value.as_int()) else {
                continue;
            };
            if let Some(id) = kb.symptom_id(&q.subject.plain()) {
                values.entry((id.to_string(), quantity)).or_default().insert(v);
            }
        }
        NumericDomain { values }
    }

    /// Every bound fact the closure can produce, in both signs.
    pub(crate) fn facts(&self) -> Vec<Fact> {
        let mut out = Vec::new();
        for ((symptom, quantity), values) in &self.values {
            let (min, max) = quantity.topics();
            for &v in values {
                for topic in [min, max] {
                    out.push(bound_fact(symptom, topic, v, true));
                    out.push(bound_fact(symptom, topic, v, false));
                }
            }
        }
        out
    }

    /// Bound facts entailed by numeric answers, given as
    /// `(symptom id, topic, value, polarity)`.
    ///
    /// "At least v" answered yes raises the lower end to v, answered no
    /// lowers the upper end to v - 1; "at most v" works symmetrically.
    /// Every known threshold below the lower end then holds as a minimum and
    /// fails as a maximum beyond it, and conversely for the upper end.
    pub(crate) fn closure<'a>(
        &self,
        answers: impl IntoIterator<Item = (&'a str, Topic, i64, bool)>,
    ) -> Result<Vec<Fact>, BoundsConflict> {
        let mut bounds: BTreeMap<(&str, Quantity), (i64, i64)> = BTreeMap::new();
        for (symptom, topic, v, yes) in answers {
            let Some((quantity, upper)) = topic.numeric() else {
                continue;
            };
            let (lo, hi) = bounds.entry((symptom, quantity)).or_insert((i64::MIN, i64::MAX));
            match (upper, yes) {
                (false, true) => *lo = (*lo).max(v),
                (false, false) => *hi = (*hi).min(v.saturating_sub(1)),
                (true, true) => *hi = (*hi).min(v),
                (true, false) => *lo = (*lo).max(v.saturating_add(1)),
            }
        }
        let mut out = Vec::new();
        for (&(symptom, quantity), &(lo, hi)) in &bounds {
            if lo > hi {
                return Err(BoundsConflict {
                    symptom: symptom.to_string(),
                    quantity,
                });
            }
            let Some(values) = self.values.get(&(symptom.to_string(), quantity)) else {
                continue;
            };
            let (min, max) = quantity.topics();
            for &v in values {
                if v <= lo {
                    out.push(bound_fact(symptom, min, v, true));
                } else if v > hi {
                    out.push(bound_fact(symptom, min, v, false));
                }
                if v >= hi {
                    out.push(bound_fact(symptom, max, v, true));
                } else if v < lo {
                    out.push(bound_fact(symptom, max, v, false));
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn domain(values: &[i64]) -> NumericDomain {
        let mut d = NumericDomain::default();
        d.values
            .insert(("s4".into(), Quantity::Duration), values.iter().copied().collect());
        d
    }

    fn shown(facts: &[Fact]) -> Vec<String> {
        facts.iter().map(|f| f.to_string()).collect()
    }

    #[test]
    fn lower_bound_entails_smaller_minimums() {
        let d = domain(&[30, 240, 4320]);
        let got = d.closure([("s4", Topic::Duration, 240, true)]).unwrap();
        assert_eq!(
            shown(&got),
            vec![
                "minDuration(s4, 30).",
                "-maxDuration(s4, 30).",
                "minDuration(s4, 240).",
            ]
        );
    }

    #[test]
    fn denied_minimum_bounds_from_above() {
        let d = domain(&[30, 240, 4320]);
        let got = d.closure([("s4", Topic::Duration, 240, false)]).unwrap();
        assert_eq!(
            shown(&got),
            vec![
                "-minDuration(s4, 240).",
                "maxDuration(s4, 240).",
                "-minDuration(s4, 4320).",
                "maxDuration(s4, 4320).",
            ]
        );
    }

    #[test]
    fn crossing_bounds_conflict() {
        let d = domain(&[30, 240]);
        let err = d
            .closure([
                ("s4", Topic::Duration, 240, true),
                ("s4", Topic::DurationAtMost, 30, true),
            ])
            .unwrap_err();
        assert_eq!(err.quantity, Quantity::Duration);
    }

    proptest::proptest! {
        #[test]
        fn closure_matches_feasible_values(
            values in proptest::collection::btree_set(0..20i64, 1..6),
            picks in proptest::collection::vec((0..6usize, proptest::bool::ANY, proptest::bool::ANY), 0..5),
        ) {
            let values: Vec<i64> = values.into_iter().collect();
            let d = domain(&values);
            let answers: Vec<(&str, Topic, i64, bool)> = picks
                .iter()
                .map(|&(i, upper, yes)| {
                    let topic = if upper { Topic::DurationAtMost } else { Topic::Duration };
                    ("s4", topic, values[i % values.len()], yes)
                })
                .collect();
            let holds = |x: i64, topic: Topic, v: i64| if topic == Topic::Duration { x >= v } else { x <= v };
            let feasible: Vec<i64> = (-1..=21)
                .filter(|&x| answers.iter().all(|&(_, t, v, yes)| holds(x, t, v) == yes))
                .collect();
            let got = d.closure(answers.iter().copied());
            if feasible.is_empty() {
                proptest::prop_assert!(got.is_err());
                return Ok(());
            }
            let mut want = Vec::new();
            if !answers.is_empty() {
                for &v in &values {
                    for topic in [Topic::Duration, Topic::DurationAtMost] {
                        let sat = feasible.iter().filter(|&&x| holds(x, topic, v)).count();
                        if sat == feasible.len() {
                            want.push(bound_fact("s4", topic, v, true));
                        } else if sat == 0 {
                            want.push(bound_fact("s4", topic, v, false));
                        }
                    }
                }
            }
            let mut got = got.unwrap();
            got.sort();
            want.sort();
            proptest::prop_assert_eq!(got, want);
        }
    }
}
