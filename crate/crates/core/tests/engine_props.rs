use std::collections::BTreeSet;

use proptest::prelude::*;

use ichd_core::engine::{
    evaluate, ground, stratify, CompiledProgram, EngineError, Model, TruthValue,
};
use ichd_core::syntax::{parse_program, print_program, Atom, Fact, ParseError, Program, Term};

const CONSTS: [&str; 3] = ["a", "b", "c"];
const PREDS: usize = 4;

/// A literal over predicates `p0..p3`; `arg` is a constant index or the
/// variable `X` when `None`.
#[derive(Debug, Clone)]
struct Lit {
    pred: usize,
    strong: bool,
    naf: bool,
    arg: Option<usize>,
}

impl Lit {
    fn render(&self) -> String {
        format!(
            "{}{}p{}({})",
            if self.naf { "not " } else { "" },
            if self.strong { "-" } else { "" },
            self.pred,
            self.arg.map_or("X", |c| CONSTS[c])
        )
    }
}

#[derive(Debug, Clone)]
struct GenRule {
    head: Lit,
    body: Vec<Lit>,
}

impl GenRule {
    fn render(&self) -> String {
        let body: Vec<String> = self.body.iter().map(Lit::render).collect();
        format!("{} :- {}.", self.head.render(), body.join(", "))
    }
}

/// Rules whose bodies only mention predicates up to the head's, with `not`
/// restricted to strictly lower predicates, so every program is stratified.
fn rule(allow_naf: bool) -> impl Strategy<Value = GenRule> {
    (0..PREDS).prop_flat_map(move |h| {
        let anchor = (0..=h, any::<bool>()).prop_map(|(pred, strong)| Lit {
            pred,
            strong,
            naf: false,
            arg: None,
        });
        let other = (0..=h, any::<bool>(), any::<bool>(), prop::option::of(0..CONSTS.len()))
            .prop_map(move |(pred, strong, naf, arg)| Lit {
                pred,
                strong,
                naf: allow_naf && naf && pred < h,
                arg,
            });
        let head = (any::<bool>(), prop::option::of(0..CONSTS.len())).prop_map(move |(strong, arg)| Lit {
            pred: h,
            strong,
            naf: false,
            arg,
        });
        (head, anchor, prop::collection::vec(other, 0..3)).prop_map(|(head, anchor, rest)| {
            let mut body = vec![anchor];
            body.extend(rest);
            GenRule { head, body }
        })
    })
}

fn fact_text() -> impl Strategy<Value = (usize, usize, bool)> {
    (0..PREDS, 0..CONSTS.len(), prop::bool::weighted(0.3))
}

fn render_fact(&(pred, c, strong): &(usize, usize, bool)) -> String {
    format!("{}p{pred}({}).", if strong { "-" } else { "" }, CONSTS[c])
}

fn program_of(rules: &[GenRule]) -> Program {
    let text: Vec<String> = rules.iter().map(GenRule::render).collect();
    parse_program(&text.join("\n")).expect("generated rules parse")
}

fn facts_of(facts: &[(usize, usize, bool)]) -> Vec<Fact> {
    let text: Vec<String> = facts.iter().map(render_fact).collect();
    parse_program(&text.join("\n")).expect("generated facts parse").facts
}

/// Equal models, or both runs rejecting the input as inconsistent.
fn same_outcome(a: Result<Model, EngineError>, b: Result<Model, EngineError>) -> Result<(), TestCaseError> {
    match (a, b) {
        (Ok(x), Ok(y)) => prop_assert_eq!(x, y),
        (Err(EngineError::Inconsistent { .. }), Err(EngineError::Inconsistent { .. })) => {}
        (x, y) => prop_assert!(false, "outcomes differ: {:?} vs {:?}", x, y),
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn print_parse_round_trip(rules in prop::collection::vec(rule(true), 0..6), facts in prop::collection::vec(fact_text(), 0..6)) {
        let mut p = program_of(&rules);
        p.facts = facts_of(&facts);
        let text = print_program(&p);
        let back = parse_program(&text).unwrap();
        prop_assert_eq!(print_program(&back), text);
        prop_assert!(back.structurally_eq(&p));
    }

    #[test]
    fn ground_program_has_same_model(rules in prop::collection::vec(rule(true), 1..6), facts in prop::collection::vec(fact_text(), 0..8)) {
        let mut p = program_of(&rules);
        p.facts = facts_of(&facts);
        same_outcome(evaluate(&ground(&p), &[]), evaluate(&p, &[]))?;
    }

    #[test]
    fn compiled_program_has_same_model(
        rules in prop::collection::vec(rule(true), 1..6),
        facts in prop::collection::vec(fact_text(), 0..8),
        mask in any::<u8>(),
    ) {
        let p = program_of(&rules);
        let domain = facts_of(&facts);
        let extra: Vec<Fact> = domain
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, f)| f.clone())
            .collect();
        let compiled = CompiledProgram::compile(&p, &domain).unwrap();
        same_outcome(compiled.evaluate(&extra).map(|m| m.to_model()), evaluate(&p, &extra))?;
    }

    #[test]
    fn evaluation_ignores_statement_order(rules in prop::collection::vec(rule(true), 1..6), facts in prop::collection::vec(fact_text(), 0..8)) {
        let p = program_of(&rules);
        let mut reversed = p.clone();
        reversed.rules.reverse();
        let extra = facts_of(&facts);
        let mut extra_reversed = extra.clone();
        extra_reversed.reverse();
        same_outcome(evaluate(&p, &extra), evaluate(&p, &extra))?;
        same_outcome(evaluate(&reversed, &extra_reversed), evaluate(&p, &extra))?;
    }

    #[test]
    fn complementary_facts_are_inconsistent(rules in prop::collection::vec(rule(true), 0..5), pred in 0..PREDS, c in 0..CONSTS.len()) {
        let p = program_of(&rules);
        let extra = facts_of(&[(pred, c, false), (pred, c, true)]);
        let inconsistent = matches!(evaluate(&p, &extra), Err(EngineError::Inconsistent { .. }));
        prop_assert!(inconsistent);
    }

    #[test]
    fn lower_layers_ignore_higher_rules(rules in prop::collection::vec(rule(true), 1..7), facts in prop::collection::vec(fact_text(), 0..8)) {
        let p = program_of(&rules);
        let extra = facts_of(&facts);
        let strata = stratify(&p).unwrap();
        let Ok(full) = evaluate(&p, &extra) else { return Ok(()) };
        for k in 0..strata.len() {
            let mut lower = p.clone();
            lower.rules.retain(|r| strata.layer_of(r.head.predicate()) <= k);
            let keep = |pred: &str| strata.layer_of(pred) <= k;
            let partial = evaluate(&lower, &extra).unwrap();
            prop_assert_eq!(partial.restricted_to(keep), full.restricted_to(keep));
        }
    }

    #[test]
    fn naf_free_programs_are_monotone(
        rules in prop::collection::vec(rule(false), 1..6),
        facts in prop::collection::vec(fact_text(), 0..8),
        mask in any::<u8>(),
    ) {
        let p = program_of(&rules);
        let more = facts_of(&facts);
        let fewer: Vec<Fact> = more
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, f)| f.clone())
            .collect();
        if let (Ok(small), Ok(large)) = (evaluate(&p, &fewer), evaluate(&p, &more)) {
            for (atom, v) in small.iter() {
                prop_assert_eq!(large.get(atom), v, "{} changed", atom);
            }
        }
    }
}

/// Ground positive programs over eight atoms `p{i / 2}(a|b)`.
fn positive_program() -> impl Strategy<Value = (Vec<(usize, Vec<usize>)>, u8)> {
    let rule = (0..8usize, prop::collection::vec(0..8usize, 1..4));
    (prop::collection::vec(rule, 0..8), any::<u8>())
}

fn atom_name(i: usize) -> String {
    format!("p{}({})", i / 2, CONSTS[i % 2])
}

/// The least set containing the facts and closed under the rules, found by
/// checking every subset of the eight atoms.
fn brute_force_minimal(rules: &[(usize, Vec<usize>)], facts: u8) -> BTreeSet<String> {
    let closed = |s: u16| {
        (s as u8) & facts == facts
            && rules
                .iter()
                .all(|(h, body)| !body.iter().all(|b| s & (1 << b) != 0) || s & (1 << h) != 0)
    };
    let models: Vec<u16> = (0u16..256).filter(|&s| closed(s)).collect();
    let minimal: Vec<u16> = models
        .iter()
        .copied()
        .filter(|&m| !models.iter().any(|&o| o != m && o & m == o))
        .collect();
    assert_eq!(minimal.len(), 1, "positive programs have one minimal model");
    (0..8).filter(|i| minimal[0] & (1 << i) != 0).map(atom_name).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn positive_programs_reach_minimal_model((rules, facts) in positive_program()) {
        let mut text: Vec<String> = rules
            .iter()
            .map(|(h, body)| {
                let body: Vec<String> = body.iter().map(|&b| atom_name(b)).collect();
                format!("{} :- {}.", atom_name(*h), body.join(", "))
            })
            .collect();
        text.extend((0..8).filter(|i| facts & (1 << i) != 0).map(|i| format!("{}.", atom_name(i))));
        let p = parse_program(&text.join("\n")).unwrap();
        let m = evaluate(&p, &[]).unwrap();
        let got: BTreeSet<String> = m
            .iter()
            .filter(|(_, v)| *v == TruthValue::True)
            .map(|(a, _)| a.to_string())
            .collect();
        prop_assert_eq!(got, brute_force_minimal(&rules, facts));
    }

    #[test]
    fn count_aggregates_match_enumeration(
        items in prop::collection::vec(0..3u8, 6),
        tags in any::<u8>(),
        bound in 0..7i64,
        cmp in 0..6usize,
    ) {
        let ops = [">=", ">", "<=", "<", "=", "!="];
        let mut text = vec![
            format!("hit(a) :- #count{{X : item(X)}} {} {bound}.", ops[cmp]),
            format!("miss(a) :- #count{{X : -item(X)}} >= {bound}."),
            format!("tagged(a) :- #count{{X : item(X), tag(X)}} {} {bound}.", ops[cmp]),
        ];
        for (k, &state) in items.iter().enumerate() {
            match state {
                1 => text.push(format!("item({k}).")),
                2 => text.push(format!("-item({k}).")),
                _ => {}
            }
            if tags & (1 << k) != 0 {
                text.push(format!("tag({k})."));
            }
        }
        let p = parse_program(&text.join("\n")).unwrap();
        let m = evaluate(&p, &[]).unwrap();
        let holds = |n: i64| match cmp {
            0 => n >= bound,
            1 => n > bound,
            2 => n <= bound,
            3 => n < bound,
            4 => n == bound,
            _ => n != bound,
        };
        let yes = items.iter().filter(|&&s| s == 1).count() as i64;
        let no = items.iter().filter(|&&s| s == 2).count() as i64;
        let both = items
            .iter()
            .enumerate()
            .filter(|(k, &s)| s == 1 && tags & (1 << k) != 0)
            .count() as i64;
        let value = |pred: &str| m.get(&Atom::new(pred, vec![Term::symbol("a")]));
        let expect = |b: bool| if b { TruthValue::True } else { TruthValue::Unknown };
        prop_assert_eq!(value("hit"), expect(holds(yes)));
        prop_assert_eq!(value("miss"), expect(no >= bound));
        prop_assert_eq!(value("tagged"), expect(holds(both)));
    }

    #[test]
    fn unsafe_rules_are_rejected(
        head in 0..4usize,
        body in prop::collection::vec((0..4usize, any::<bool>()), 0..4),
    ) {
        let terms = ["X", "Y", "Z", "a"];
        let mut bound = BTreeSet::new();
        let mut needed = BTreeSet::from([terms[head]]);
        let mut lits = vec!["q(a)".to_string()];
        for &(t, naf) in &body {
            if naf {
                needed.insert(terms[t]);
                lits.push(format!("not r({})", terms[t]));
            } else {
                bound.insert(terms[t]);
                lits.push(format!("r({})", terms[t]));
            }
        }
        let text = format!("p({}) :- {}.", terms[head], lits.join(", "));
        let safe = needed.iter().all(|v| *v == "a" || bound.contains(v));
        match parse_program(&text) {
            Ok(_) => prop_assert!(safe, "accepted unsafe {}", text),
            Err(ParseError::Unsafe { .. }) => prop_assert!(!safe, "rejected safe {}", text),
            Err(e) => prop_assert!(false, "{}: {}", text, e),
        }
    }
}
