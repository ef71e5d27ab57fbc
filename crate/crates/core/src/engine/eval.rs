use super::matching::{aggregate_holds, apply, naf_holds, solutions, LiteralIndex};
use super::model::{Model, TruthValue};
use super::{stratify, EngineError};
use crate::syntax::{Fact, Literal, Program, Rule};

pub(crate) fn check_safe(p: &Program) -> Result<(), EngineError> {
    for r in &p.rules {
        r.check_safety().map_err(|v| EngineError::Unsafe {
            rule: r.to_string(),
            detail: v.to_string(),
        })?;
    }
    Ok(())
}

pub(crate) fn assert_literal(
    index: &mut LiteralIndex,
    atom: crate::syntax::Atom,
    strong: bool,
) -> Result<bool, EngineError> {
    if index.holds_opposite(&atom, strong) {
        return Err(EngineError::Inconsistent { atom });
    }
    Ok(index.insert(atom, strong))
}

fn fire(rule: &Rule, index: &LiteralIndex) -> Vec<crate::syntax::Atom> {
    let positive: Vec<&Literal> = rule.literals().filter(|l| !l.naf).collect();
    let mut sols = Vec::new();
    solutions(&positive, index, Default::default(), &mut sols);
    sols.into_iter()
        .filter(|s| {
            rule.literals()
                .filter(|l| l.naf)
                .all(|l| naf_holds(l, s, index))
                && rule.aggregates().all(|a| aggregate_holds(a, s, index))
        })
        .map(|s| apply(&rule.head.atom, &s))
        .collect()
}

/// Computes the unique model of `p` together with `extra` facts.
///
/// Layers are evaluated bottom-up; within a layer rules are applied until
/// nothing new is derived. A positive body literal holds when its atom has
/// the literal's sign, `not L` when it does not, and a count aggregate when
/// the number of distinct template tuples satisfies the comparison.
/// Deriving both `a` and `-a` is an error naming `a`.
pub fn evaluate(p: &Program, extra: &[Fact]) -> Result<Model, EngineError> {
    check_safe(p)?;
    let strat = stratify(p)?;
    let mut index = LiteralIndex::default();
    for f in p.facts.iter().chain(extra) {
        assert_literal(&mut index, f.atom().clone(), f.literal.strong)?;
    }

    let mut by_layer: Vec<Vec<&Rule>> = vec![Vec::new(); strat.len().max(1)];
    for r in &p.rules {
        by_layer[strat.layer_of(r.head.predicate())].push(r);
    }

    for rules in &by_layer {
        loop {
            let mut changed = false;
            for rule in rules {
                for atom in fire(rule, &index) {
                    changed |= assert_literal(&mut index, atom, rule.head.strong)?;
                }
            }
            if !changed {
                break;
            }
        }
    }

    Ok(index
        .iter()
        .map(|(a, strong)| (a.clone(), TruthValue::of_sign(strong)))
        .collect())
}
