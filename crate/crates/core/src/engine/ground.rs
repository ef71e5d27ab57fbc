use std::collections::BTreeSet;

use super::matching::{apply, apply_literal, apply_term, solutions, LiteralIndex, Subst};
use crate::syntax::{Aggregate, BodyElem, Literal, Program, Rule};

fn instantiate(rule: &Rule, s: &Subst) -> Rule {
    Rule {
        head: apply_literal(&rule.head, s),
        body: rule
            .body
            .iter()
            .map(|b| match b {
                BodyElem::Literal(l) => BodyElem::Literal(apply_literal(l, s)),
                BodyElem::Aggregate(a) => BodyElem::Aggregate(Aggregate {
                    template: a.template.iter().map(|t| apply_term(t, s)).collect(),
                    conditions: a.conditions.iter().map(|c| apply_literal(c, s)).collect(),
                    comparator: a.comparator,
                    bound: apply_term(&a.bound, s),
                }),
            })
            .collect(),
        pos: rule.pos,
    }
}

/// Ground instances of `p`'s rules restricted to the signed atoms that can
/// possibly be derived, plus that over-approximation itself.
///
/// The over-approximation treats every `not` literal and aggregate as
/// satisfiable, so it contains every atom of every model of `p`.
pub(crate) fn ground_with_possible(p: &Program) -> (Vec<Rule>, LiteralIndex) {
    let mut possible = LiteralIndex::default();
    for f in &p.facts {
        possible.insert(f.atom().clone(), f.literal.strong);
    }
    let mut instances: BTreeSet<Rule> = BTreeSet::new();
    loop {
        let mut changed = false;
        for rule in &p.rules {
            let positive: Vec<&Literal> = rule.literals().filter(|l| !l.naf).collect();
            let mut sols = Vec::new();
            solutions(&positive, &possible, Subst::new(), &mut sols);
            for s in sols {
                let head = apply(&rule.head.atom, &s);
                changed |= possible.insert(head, rule.head.strong);
                instances.insert(instantiate(rule, &s));
            }
        }
        if !changed {
            break;
        }
    }
    (instances.into_iter().collect(), possible)
}

/// Relevant ground instantiation: every global variable is replaced by a
/// constant of the Herbrand universe such that the positive body literals
/// can all be derived. Aggregate-local variables are left for evaluation.
pub fn ground(p: &Program) -> Program {
    let (rules, _) = ground_with_possible(p);
    Program {
        facts: p.facts.clone(),
        rules,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_program, parse_rule};

    #[test]
    fn fact_only_program_is_unchanged() {
        let p = parse_program("symptom(s4).\nminDuration(s4, 240).").unwrap();
        let g = ground(&p);
        assert!(g.structurally_eq(&p));
    }

    #[test]
    fn taxonomy_rule_instance() {
        let p = parse_program(
            "isA(d121, d12).\ndiagnosis(d121).\ndiagnosis(IdSup) :- diagnosis(Id), isA(Id, IdSup).",
        )
        .unwrap();
        let g = ground(&p);
        let expected = parse_rule("diagnosis(d12) :- diagnosis(d121), isA(d121, d12).").unwrap();
        assert!(g.rules.contains(&expected), "{:?}", g.rules);
        assert!(g.rules.iter().all(Rule::is_ground));
    }

    #[test]
    fn naf_does_not_prune_instances() {
        let p = parse_program("d(a).\nc(a).\nr(X) :- d(X), not c(X).").unwrap();
        let g = ground(&p);
        assert_eq!(g.rules.len(), 1);
        assert_eq!(g.rules[0].to_string(), "r(a) :- d(a), not c(a).");
    }

    #[test]
    fn aggregate_locals_survive_grounding() {
        let p = parse_program(
            "k(a).\ns(a, 1).\nok(K) :- k(K), #count{X : s(K, X)} >= 1.",
        )
        .unwrap();
        let g = ground(&p);
        assert_eq!(g.rules[0].to_string(), "ok(a) :- k(a), #count{X : s(a, X)} >= 1.");
    }
}
