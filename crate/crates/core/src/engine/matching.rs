//! Substitutions and literal matching shared by the evaluator and the grounder.

use std::collections::{HashMap, HashSet};

use crate::syntax::{Aggregate, Atom, Literal, Term};

pub(crate) type Subst = HashMap<String, Term>;

pub(crate) fn apply_term(t: &Term, s: &Subst) -> Term {
    match t {
        Term::Var(v) => s.get(v).cloned().unwrap_or_else(|| t.clone()),
        _ => t.clone(),
    }
}

pub(crate) fn apply(atom: &Atom, s: &Subst) -> Atom {
    Atom {
        predicate: atom.predicate.clone(),
        args: atom.args.iter().map(|t| apply_term(t, s)).collect(),
    }
}

pub(crate) fn apply_literal(l: &Literal, s: &Subst) -> Literal {
    Literal {
        atom: apply(&l.atom, s),
        strong: l.strong,
        naf: l.naf,
    }
}

fn unify(pattern: &Atom, ground: &Atom, s: &Subst) -> Option<Subst> {
    if pattern.predicate != ground.predicate || pattern.args.len() != ground.args.len() {
        return None;
    }
    let mut out: Option<Subst> = None;
    for (p, g) in pattern.args.iter().zip(&ground.args) {
        match p {
            Term::Var(v) => {
                let current = out.as_ref().unwrap_or(s);
                match current.get(v) {
                    Some(bound) if bound != g => return None,
                    Some(_) => {}
                    None => {
                        out.get_or_insert_with(|| s.clone())
                            .insert(v.clone(), g.clone());
                    }
                }
            }
            t if t != g => return None,
            _ => {}
        }
    }
    Some(out.unwrap_or_else(|| s.clone()))
}

/// Set of signed ground atoms indexed by (predicate, sign).
#[derive(Debug, Default, Clone)]
pub(crate) struct LiteralIndex {
    by_key: HashMap<(String, bool), Vec<Atom>>,
    signs: HashMap<Atom, u8>,
}

fn bit(strong: bool) -> u8 {
    if strong {
        2
    } else {
        1
    }
}

impl LiteralIndex {
    /// Inserts a signed atom. Returns whether it was new.
    pub(crate) fn insert(&mut self, atom: Atom, strong: bool) -> bool {
        let entry = self.signs.entry(atom.clone()).or_insert(0);
        if *entry & bit(strong) != 0 {
            return false;
        }
        *entry |= bit(strong);
        self.by_key
            .entry((atom.predicate.clone(), strong))
            .or_default()
            .push(atom);
        true
    }

    pub(crate) fn contains(&self, atom: &Atom, strong: bool) -> bool {
        self.signs.get(atom).is_some_and(|b| b & bit(strong) != 0)
    }

    pub(crate) fn holds_opposite(&self, atom: &Atom, strong: bool) -> bool {
        self.contains(atom, !strong)
    }

    fn candidates(&self, predicate: &str, strong: bool) -> &[Atom] {
        self.by_key
            .get(&(predicate.to_string(), strong))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub(crate) fn iter(&self) -> impl Iterator<Item = (&Atom, bool)> {
        self.by_key
            .iter()
            .flat_map(|((_, strong), atoms)| atoms.iter().map(move |a| (a, *strong)))
    }
}

/// All extensions of `s` making every literal in `lits` hold in `index`.
/// Literals are matched in order; `not` is ignored here.
pub(crate) fn solutions(lits: &[&Literal], index: &LiteralIndex, s: Subst, out: &mut Vec<Subst>) {
    let Some((first, rest)) = lits.split_first() else {
        out.push(s);
        return;
    };
    let atom = apply(&first.atom, &s);
    if atom.is_ground() {
        if index.contains(&atom, first.strong) {
            solutions(rest, index, s, out);
        }
        return;
    }
    for candidate in index.candidates(&atom.predicate, first.strong) {
        if let Some(next) = unify(&atom, candidate, &s) {
            solutions(rest, index, next, out);
        }
    }
}

/// `not L` holds when the signed atom of `L` is absent.
pub(crate) fn naf_holds(l: &Literal, s: &Subst, index: &LiteralIndex) -> bool {
    !index.contains(&apply(&l.atom, s), l.strong)
}

/// Distinct template tuples whose conditions hold under `s`.
pub(crate) fn aggregate_tuples(a: &Aggregate, s: &Subst, index: &LiteralIndex) -> HashSet<Vec<Term>> {
    let positive: Vec<&Literal> = a.conditions.iter().filter(|c| !c.naf).collect();
    let mut sols = Vec::new();
    solutions(&positive, index, s.clone(), &mut sols);
    sols.into_iter()
        .filter(|s2| {
            a.conditions
                .iter()
                .filter(|c| c.naf)
                .all(|c| naf_holds(c, s2, index))
        })
        .map(|s2| a.template.iter().map(|t| apply_term(t, &s2)).collect())
        .collect()
}

pub(crate) fn aggregate_holds(a: &Aggregate, s: &Subst, index: &LiteralIndex) -> bool {
    let Some(bound) = apply_term(&a.bound, s).as_int() else {
        return false;
    };
    let count = aggregate_tuples(a, s, index).len() as i64;
    a.comparator.holds(count, bound)
}
