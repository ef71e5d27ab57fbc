use std::collections::BTreeSet;

use thiserror::Error;

use crate::syntax::{
    parse_program, Aggregate, Atom, BodyElem, Comparator, Literal, Rule, Term,
};

pub(crate) const PROPAGATION_SOURCE: &str = include_str!("../../kb/propagation.kb");

/// Heads for which negative rules are generated.
pub const CRITERION_PREDICATES: [&str; 2] = ["criterion", "subCriterion"];

fn elem_vars(b: &BodyElem) -> BTreeSet<&str> {
    match b {
        BodyElem::Literal(l) => l.atom.vars().collect(),
        BodyElem::Aggregate(a) => a.vars(),
    }
}

fn is_ground(b: &BodyElem) -> bool {
    elem_vars(b).is_empty()
}

/// Derives the rules concluding the strong negation of `r`'s head.
///
/// Each body literal over a `history` predicate yields one rule: the head is
/// strongly negated, that literal has its sign flipped, and the other history
/// literals are dropped except `symptom(X)` whenever `X` is an argument of the
/// flipped literal. Remaining body elements are kept when ground or when they
/// share a variable, directly or through other kept elements, with the head,
/// the flipped literal or a kept `symptom` guard.
///
/// Returns nothing when the head is already negated or not a criterion or
/// subcriterion, when the body uses `not`, or when it has no history literal.
pub fn generate_negative_rules(r: &Rule, history: &BTreeSet<&str>) -> Vec<Rule> {
    if r.head.strong || !CRITERION_PREDICATES.contains(&r.head.predicate()) {
        return Vec::new();
    }
    let naf_free = r.body.iter().all(|b| match b {
        BodyElem::Literal(l) => !l.naf,
        BodyElem::Aggregate(a) => a.conditions.iter().all(|c| !c.naf),
    });
    if !naf_free {
        return Vec::new();
    }
    let is_history = |b: &BodyElem| {
        b.as_literal()
            .is_some_and(|l| history.contains(l.predicate()))
    };

    let mut out = Vec::new();
    for (i, denied) in r.body.iter().enumerate() {
        let Some(lit) = denied.as_literal().filter(|_| is_history(denied)) else {
            continue;
        };
        let mut keep = vec![false; r.body.len()];
        keep[i] = true;
        if lit.predicate() != "symptom" {
            for (j, b) in r.body.iter().enumerate() {
                if let Some(g) = b.as_literal() {
                    if g.predicate() == "symptom"
                        && !g.strong
                        && g.atom.args.first().is_some_and(|x| lit.atom.args.contains(x))
                    {
                        keep[j] = true;
                    }
                }
            }
        }
        let mut anchors: BTreeSet<&str> = r.head.atom.vars().collect();
        for (j, b) in r.body.iter().enumerate() {
            if keep[j] {
                anchors.extend(elem_vars(b));
            }
        }
        loop {
            let mut grew = false;
            for (j, b) in r.body.iter().enumerate() {
                if keep[j] || is_history(b) {
                    continue;
                }
                let vars = elem_vars(b);
                if is_ground(b) || vars.iter().any(|v| anchors.contains(v)) {
                    keep[j] = true;
                    anchors.extend(vars);
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        let body = r
            .body
            .iter()
            .enumerate()
            .filter(|(j, _)| keep[*j])
            .map(|(j, b)| {
                if j == i {
                    BodyElem::Literal(lit.denied())
                } else {
                    b.clone()
                }
            })
            .collect();
        out.push(Rule {
            head: r.head.denied(),
            body,
            pos: r.pos,
        });
    }
    out
}

/// The fixed knowledge-propagation rules: attribute synonymy and exclusion,
/// symptom generalisation and the denial of specialisations.
pub fn propagation_rules() -> Vec<Rule> {
    parse_program(PROPAGATION_SOURCE)
        .expect("propagation rules parse")
        .rules
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("threshold {threshold} outside 1..={count}")]
pub struct ThresholdError {
    pub count: usize,
    pub threshold: usize,
}

/// Rules for a criterion requiring at least `threshold` of its `count`
/// numbered subcriteria. The criterion is false once more than
/// `count - threshold` subcriteria are false.
pub fn build_polythetic_rules(
    diagnosis: &str,
    letter: &str,
    count: usize,
    threshold: usize,
) -> Result<Vec<Rule>, ThresholdError> {
    if threshold < 1 || threshold > count {
        return Err(ThresholdError { count, threshold });
    }
    let criterion = Atom::new(
        "criterion",
        vec![Term::symbol(diagnosis), Term::text(letter)],
    );
    let sub = Atom::new(
        "subCriterion",
        vec![Term::symbol(diagnosis), Term::text(letter), Term::var("X")],
    );
    let rule = |strong: bool, bound: usize| {
        let (head, cond) = if strong {
            (Literal::strong(criterion.clone()), Literal::strong(sub.clone()))
        } else {
            (Literal::positive(criterion.clone()), Literal::positive(sub.clone()))
        };
        Rule::new(
            head,
            vec![BodyElem::Aggregate(Aggregate {
                template: vec![Term::var("X")],
                conditions: vec![cond],
                comparator: Comparator::Ge,
                bound: Term::Int(bound as i64),
            })],
        )
    };
    Ok(vec![
        rule(false, threshold),
        rule(true, count - threshold + 1),
    ])
}
