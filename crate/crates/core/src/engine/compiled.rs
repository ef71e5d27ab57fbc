//! Ground propagation over a precompiled program.
//!
//! The program is grounded once against its facts plus a domain of facts
//! that may later be supplied. Evaluation then only counts satisfied body
//! literals per ground rule, layer by layer, which is linear in the size of
//! the ground program.

use std::collections::HashMap;

use super::eval::check_safe;
use super::ground::ground_with_possible;
use super::matching::{apply_term, solutions, Subst};
use super::model::{Model, TruthValue};
use super::{stratify, EngineError};
use crate::syntax::{Atom, Comparator, Fact, Literal, Program};

/// Signed atom id: `atom << 1 | strong`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Lit(u32);

impl Lit {
    fn new(atom: u32, strong: bool) -> Self {
        Lit(atom << 1 | u32::from(strong))
    }

    fn atom(self) -> usize {
        (self.0 >> 1) as usize
    }

    fn value(self) -> i8 {
        if self.0 & 1 == 1 {
            -1
        } else {
            1
        }
    }
}

#[derive(Debug, Clone)]
struct GroundRule {
    head: Lit,
    /// Positive literals from lower layers, checked once per layer.
    settled: Vec<Lit>,
    /// Positive literals of the rule's own layer, counted as they appear.
    pending: Vec<Lit>,
    naf: Vec<Lit>,
    aggregates: Vec<u32>,
    layer: u32,
}

#[derive(Debug, Clone)]
struct Element {
    tuple: u32,
    settled: Vec<Lit>,
    pending: Vec<Lit>,
    naf: Vec<Lit>,
}

#[derive(Debug, Clone)]
struct GroundAggregate {
    elements: Vec<Element>,
    tuples: u32,
    comparator: Comparator,
    bound: i64,
    layer: u32,
    /// Rules using this aggregate; one entry per occurrence.
    users: Vec<u32>,
}

#[derive(Debug, Clone, Copy)]
enum Watch {
    Rule(u32),
    Element(u32, u32),
}

#[derive(Debug, Clone)]
pub struct CompiledProgram {
    atoms: Vec<Atom>,
    ids: HashMap<Atom, u32>,
    by_predicate: HashMap<String, Vec<u32>>,
    facts: Vec<Lit>,
    rules: Vec<GroundRule>,
    aggregates: Vec<GroundAggregate>,
    layers: Vec<(Vec<u32>, Vec<u32>)>,
    watches: HashMap<u32, Vec<Watch>>,
}

struct Interner<'a> {
    atoms: &'a mut Vec<Atom>,
    ids: &'a mut HashMap<Atom, u32>,
}

impl Interner<'_> {
    fn id(&mut self, atom: &Atom) -> u32 {
        if let Some(&id) = self.ids.get(atom) {
            return id;
        }
        let id = self.atoms.len() as u32;
        self.atoms.push(atom.clone());
        self.ids.insert(atom.clone(), id);
        id
    }

    fn lit(&mut self, l: &Literal) -> Lit {
        Lit::new(self.id(&l.atom), l.strong)
    }
}

impl CompiledProgram {
    /// Grounds `p` so that any subset of `domain` can later be passed to
    /// [`CompiledProgram::evaluate`].
    pub fn compile(p: &Program, domain: &[Fact]) -> Result<Self, EngineError> {
        check_safe(p)?;
        let strat = stratify(p)?;
        let mut widened = p.clone();
        widened.facts.extend(domain.iter().cloned());
        let (ground_rules, possible) = ground_with_possible(&widened);

        let mut atoms = Vec::new();
        let mut ids = HashMap::new();
        let mut interner = Interner {
            atoms: &mut atoms,
            ids: &mut ids,
        };
        let facts: Vec<Lit> = p.facts.iter().map(|f| interner.lit(&f.literal)).collect();
        for f in domain {
            interner.lit(&f.literal);
        }

        let layer_count = strat.len().max(1);
        let mut rules = Vec::new();
        let mut aggregates: Vec<GroundAggregate> = Vec::new();
        for rule in &ground_rules {
            let layer = strat.layer_of(rule.head.predicate()) as u32;
            let same = |l: &Literal| strat.layer_of(l.predicate()) as u32 == layer;
            let mut g = GroundRule {
                head: interner.lit(&rule.head),
                settled: Vec::new(),
                pending: Vec::new(),
                naf: Vec::new(),
                aggregates: Vec::new(),
                layer,
            };
            for l in rule.literals() {
                let lit = interner.lit(l);
                if l.naf {
                    g.naf.push(lit);
                } else if same(l) {
                    g.pending.push(lit);
                } else {
                    g.settled.push(lit);
                }
            }
            let mut feasible = true;
            for a in rule.aggregates() {
                let Some(bound) = a.bound.as_int() else {
                    feasible = false;
                    break;
                };
                let positive: Vec<&Literal> = a.conditions.iter().filter(|c| !c.naf).collect();
                let mut sols = Vec::new();
                solutions(&positive, &possible, Subst::new(), &mut sols);
                let mut tuple_ids: HashMap<Vec<crate::syntax::Term>, u32> = HashMap::new();
                let mut elements = Vec::new();
                for s in sols {
                    let tuple: Vec<_> = a.template.iter().map(|t| apply_term(t, &s)).collect();
                    let next = tuple_ids.len() as u32;
                    let tuple = *tuple_ids.entry(tuple).or_insert(next);
                    let mut e = Element {
                        tuple,
                        settled: Vec::new(),
                        pending: Vec::new(),
                        naf: Vec::new(),
                    };
                    for c in &a.conditions {
                        let lit = interner.lit(&super::matching::apply_literal(c, &s));
                        if c.naf {
                            e.naf.push(lit);
                        } else if same(c) {
                            e.pending.push(lit);
                        } else {
                            e.settled.push(lit);
                        }
                    }
                    elements.push(e);
                }
                g.aggregates.push(aggregates.len() as u32);
                aggregates.push(GroundAggregate {
                    elements,
                    tuples: tuple_ids.len() as u32,
                    comparator: a.comparator,
                    bound,
                    layer,
                    users: Vec::new(),
                });
            }
            if feasible {
                rules.push(g);
            } else {
                aggregates.truncate(aggregates.len() - g.aggregates.len());
            }
        }

        let mut layers = vec![(Vec::new(), Vec::new()); layer_count];
        let mut watches: HashMap<u32, Vec<Watch>> = HashMap::new();
        for (i, r) in rules.iter().enumerate() {
            layers[r.layer as usize].0.push(i as u32);
            for l in &r.pending {
                watches.entry(l.0).or_default().push(Watch::Rule(i as u32));
            }
            for &a in &r.aggregates {
                aggregates[a as usize].users.push(i as u32);
            }
        }
        for (i, a) in aggregates.iter().enumerate() {
            layers[a.layer as usize].1.push(i as u32);
            for (j, e) in a.elements.iter().enumerate() {
                for l in &e.pending {
                    watches
                        .entry(l.0)
                        .or_default()
                        .push(Watch::Element(i as u32, j as u32));
                }
            }
        }

        let mut by_predicate: HashMap<String, Vec<u32>> = HashMap::new();
        for (i, a) in atoms.iter().enumerate() {
            by_predicate
                .entry(a.predicate.clone())
                .or_default()
                .push(i as u32);
        }
        for v in by_predicate.values_mut() {
            v.sort_by(|&x, &y| atoms[x as usize].cmp(&atoms[y as usize]));
        }

        Ok(CompiledProgram {
            atoms,
            ids,
            by_predicate,
            facts,
            rules,
            aggregates,
            layers,
            watches,
        })
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    pub fn contains_atom(&self, atom: &Atom) -> bool {
        self.ids.contains_key(atom)
    }

    /// Evaluates the program with `extra` facts, all of which must belong to
    /// the domain given at compile time.
    pub fn evaluate(&self, extra: &[Fact]) -> Result<GroundModel<'_>, EngineError> {
        let mut extra_lits = Vec::with_capacity(extra.len());
        for f in extra {
            let id = self
                .ids
                .get(f.atom())
                .ok_or_else(|| EngineError::OutsideDomain {
                    atom: f.atom().clone(),
                })?;
            extra_lits.push(Lit::new(*id, f.literal.strong));
        }
        let mut run = Run::new(self);
        for &l in self.facts.iter().chain(&extra_lits) {
            run.set(l)?;
        }
        run.queue.clear();
        for layer in 0..self.layers.len() {
            run.layer(layer as u32)?;
        }
        Ok(GroundModel {
            program: self,
            values: run.values,
        })
    }
}

struct Run<'a> {
    program: &'a CompiledProgram,
    values: Vec<i8>,
    rule_missing: Vec<u32>,
    rule_alive: Vec<bool>,
    element_missing: Vec<Vec<u32>>,
    hit: Vec<Vec<bool>>,
    count: Vec<u32>,
    satisfied: Vec<bool>,
    queue: Vec<Lit>,
}

impl<'a> Run<'a> {
    fn new(program: &'a CompiledProgram) -> Self {
        Run {
            program,
            values: vec![0; program.atoms.len()],
            rule_missing: vec![0; program.rules.len()],
            rule_alive: vec![false; program.rules.len()],
            element_missing: program
                .aggregates
                .iter()
                .map(|a| vec![0; a.elements.len()])
                .collect(),
            hit: program
                .aggregates
                .iter()
                .map(|a| vec![false; a.tuples as usize])
                .collect(),
            count: vec![0; program.aggregates.len()],
            satisfied: vec![false; program.aggregates.len()],
            queue: Vec::new(),
        }
    }

    fn holds(&self, l: Lit) -> bool {
        self.values[l.atom()] == l.value()
    }

    fn set(&mut self, l: Lit) -> Result<(), EngineError> {
        let v = &mut self.values[l.atom()];
        if *v == 0 {
            *v = l.value();
            self.queue.push(l);
            Ok(())
        } else if *v == l.value() {
            Ok(())
        } else {
            Err(EngineError::Inconsistent {
                atom: self.program.atoms[l.atom()].clone(),
            })
        }
    }

    fn layer(&mut self, layer: u32) -> Result<(), EngineError> {
        let program = self.program;
        let (rule_ids, aggregate_ids) = &program.layers[layer as usize];

        // Initialise every counter of the layer before deriving anything, so
        // that each satisfied literal is counted exactly once.
        for &a in aggregate_ids {
            let agg = &program.aggregates[a as usize];
            for (j, e) in agg.elements.iter().enumerate() {
                let alive = e.settled.iter().all(|&l| self.holds(l))
                    && !e.naf.iter().any(|&l| self.holds(l));
                let missing = if alive {
                    e.pending.iter().filter(|&&l| !self.holds(l)).count() as u32
                } else {
                    u32::MAX
                };
                self.element_missing[a as usize][j] = missing;
                if missing == 0 {
                    self.hit_tuple(a, e.tuple);
                }
            }
            self.satisfied[a as usize] =
                agg.comparator.holds(self.count[a as usize] as i64, agg.bound);
        }
        let mut ready = Vec::new();
        for &r in rule_ids {
            let rule = &program.rules[r as usize];
            let alive = rule.settled.iter().all(|&l| self.holds(l))
                && !rule.naf.iter().any(|&l| self.holds(l))
                && rule
                    .aggregates
                    .iter()
                    .all(|&a| program.aggregates[a as usize].comparator.is_monotone()
                        || self.satisfied[a as usize]);
            self.rule_alive[r as usize] = alive;
            let missing = rule.pending.iter().filter(|&&l| !self.holds(l)).count()
                + rule
                    .aggregates
                    .iter()
                    .filter(|&&a| !self.satisfied[a as usize])
                    .count();
            self.rule_missing[r as usize] = missing as u32;
            if alive && missing == 0 {
                ready.push(rule.head);
            }
        }
        self.queue.clear();
        for head in ready {
            self.set(head)?;
        }

        while let Some(l) = self.queue.pop() {
            let Some(watchers) = program.watches.get(&l.0) else {
                continue;
            };
            for &w in watchers {
                match w {
                    Watch::Rule(r) => {
                        if program.rules[r as usize].layer == layer {
                            self.tick_rule(r)?;
                        }
                    }
                    Watch::Element(a, j) => {
                        if program.aggregates[a as usize].layer != layer {
                            continue;
                        }
                        let m = &mut self.element_missing[a as usize][j as usize];
                        if *m == u32::MAX || *m == 0 {
                            continue;
                        }
                        *m -= 1;
                        if *m == 0 {
                            let tuple = program.aggregates[a as usize].elements[j as usize].tuple;
                            if self.hit_tuple(a, tuple) {
                                self.check_aggregate(a)?;
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Marks a tuple as counted; returns whether it was new.
    fn hit_tuple(&mut self, a: u32, tuple: u32) -> bool {
        let h = &mut self.hit[a as usize][tuple as usize];
        if *h {
            return false;
        }
        *h = true;
        self.count[a as usize] += 1;
        true
    }

    fn check_aggregate(&mut self, a: u32) -> Result<(), EngineError> {
        let agg = &self.program.aggregates[a as usize];
        if self.satisfied[a as usize] || !agg.comparator.holds(self.count[a as usize] as i64, agg.bound)
        {
            return Ok(());
        }
        self.satisfied[a as usize] = true;
        for &r in &agg.users {
            self.tick_rule(r)?;
        }
        Ok(())
    }

    fn tick_rule(&mut self, r: u32) -> Result<(), EngineError> {
        let m = &mut self.rule_missing[r as usize];
        if *m == 0 {
            return Ok(());
        }
        *m -= 1;
        if *m == 0 && self.rule_alive[r as usize] {
            self.set(self.program.rules[r as usize].head)?;
        }
        Ok(())
    }
}

/// Result of [`CompiledProgram::evaluate`]; values are indexed by atom id.
#[derive(Debug, Clone)]
pub struct GroundModel<'a> {
    program: &'a CompiledProgram,
    values: Vec<i8>,
}

fn truth(v: i8) -> TruthValue {
    match v {
        1 => TruthValue::True,
        -1 => TruthValue::StrongFalse,
        _ => TruthValue::Unknown,
    }
}

impl GroundModel<'_> {
    pub fn get(&self, atom: &Atom) -> TruthValue {
        self.program
            .ids
            .get(atom)
            .map(|&id| truth(self.values[id as usize]))
            .unwrap_or(TruthValue::Unknown)
    }

    /// Determined atoms of `predicate`, in atom order.
    pub fn atoms_of(&self, predicate: &str) -> impl Iterator<Item = (&Atom, TruthValue)> {
        self.program
            .by_predicate
            .get(predicate)
            .into_iter()
            .flatten()
            .map(|&id| (&self.program.atoms[id as usize], truth(self.values[id as usize])))
            .filter(|(_, v)| v.is_determined())
    }

    pub fn count(&self, predicate: &str, polarity: TruthValue) -> usize {
        self.atoms_of(predicate).filter(|(_, v)| *v == polarity).count()
    }

    pub fn to_model(&self) -> Model {
        self.program
            .atoms
            .iter()
            .zip(&self.values)
            .map(|(a, &v)| (a.clone(), truth(v)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::evaluate;
    use crate::syntax::parse_program;

    fn both(src: &str, extra: &str) -> (Model, Model) {
        let p = parse_program(src).unwrap();
        let extra = parse_program(extra).unwrap().facts;
        let compiled = CompiledProgram::compile(&p, &extra).unwrap();
        (
            evaluate(&p, &extra).unwrap(),
            compiled.evaluate(&extra).unwrap().to_model(),
        )
    }

    #[test]
    fn agrees_on_recursion() {
        let (a, b) = both(
            "isA(c, b).\nisA(b, a).\nd(S) :- d(I), isA(I, S).\n-d(I) :- -d(S), isA(I, S).",
            "d(c).",
        );
        assert_eq!(a, b);
        assert_eq!(a.len(), 5);
    }

    #[test]
    fn agrees_on_monotone_aggregate_in_layer() {
        let (a, b) = both(
            "k(x).\np(1) :- q(1).\np(2) :- q(2).\np(3) :- q(3).\nok(K) :- k(K), #count{X : p(X)} >= 2.\n-ok(K) :- k(K), #count{X : -p(X)} >= 2.",
            "q(1).\nq(3).",
        );
        assert_eq!(a, b);
        assert_eq!(a.get(&Atom::new("ok", vec![crate::syntax::Term::symbol("x")])), TruthValue::True);
    }

    #[test]
    fn agrees_on_negation() {
        let (a, b) = both("d(a).\nd(b).\nr(X) :- d(X), not c(X).\nc(X) :- e(X).", "e(a).");
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_fact_outside_domain() {
        let p = parse_program("p(X) :- q(X).").unwrap();
        let compiled = CompiledProgram::compile(&p, &[]).unwrap();
        let extra = parse_program("q(1).").unwrap().facts;
        assert!(matches!(
            compiled.evaluate(&extra),
            Err(EngineError::OutsideDomain { .. })
        ));
    }

    #[test]
    fn detects_inconsistency() {
        let p = parse_program("p(X) :- q(X).\n-p(X) :- r(X).").unwrap();
        let domain = parse_program("q(1).\nr(1).").unwrap().facts;
        let compiled = CompiledProgram::compile(&p, &domain).unwrap();
        assert!(compiled.evaluate(&domain[..1]).is_ok());
        assert!(matches!(
            compiled.evaluate(&domain),
            Err(EngineError::Inconsistent { .. })
        ));
    }
}
