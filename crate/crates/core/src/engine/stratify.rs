use std::collections::{BTreeMap, BTreeSet};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use super::EngineError;
use crate::syntax::{BodyElem, Program};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Edge {
    /// Head depends positively: same layer or above.
    Positive,
    /// Head depends through `not` or a non-monotone aggregate: strictly above.
    Strict,
}

/// Ordered partition of predicates into evaluation layers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stratification {
    layers: Vec<BTreeSet<String>>,
    index: BTreeMap<String, usize>,
}

impl Stratification {
    pub fn layers(&self) -> &[BTreeSet<String>] {
        &self.layers
    }

    /// Layer of a predicate; predicates the program never mentions sit at 0.
    pub fn layer_of(&self, predicate: &str) -> usize {
        self.index.get(predicate).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }
}

fn dependencies(p: &Program) -> Vec<(String, String, Edge)> {
    let mut edges = Vec::new();
    for rule in &p.rules {
        let head = rule.head.predicate();
        for b in &rule.body {
            match b {
                BodyElem::Literal(l) => {
                    let kind = if l.naf { Edge::Strict } else { Edge::Positive };
                    edges.push((l.predicate().to_string(), head.to_string(), kind));
                }
                BodyElem::Aggregate(a) => {
                    for c in &a.conditions {
                        let kind = if a.comparator.is_monotone() && !c.naf {
                            Edge::Positive
                        } else {
                            Edge::Strict
                        };
                        edges.push((c.predicate().to_string(), head.to_string(), kind));
                    }
                }
            }
        }
    }
    edges
}

/// Partitions predicates so that `not` and non-monotone aggregate
/// dependencies point strictly downwards. Strong negation adds no edge of
/// its own: `p` and `-p` share a predicate and a layer.
pub fn stratify(p: &Program) -> Result<Stratification, EngineError> {
    let mut graph: DiGraph<String, Edge> = DiGraph::new();
    let mut nodes: BTreeMap<String, NodeIndex> = BTreeMap::new();
    let mut node = |g: &mut DiGraph<String, Edge>, name: &str| {
        *nodes
            .entry(name.to_string())
            .or_insert_with(|| g.add_node(name.to_string()))
    };
    for pred in p.predicates() {
        node(&mut graph, pred);
    }
    let edges = dependencies(p);
    for (from, to, kind) in &edges {
        let a = node(&mut graph, from);
        let b = node(&mut graph, to);
        graph.add_edge(a, b, *kind);
    }

    for scc in tarjan_scc(&graph) {
        let members: BTreeSet<NodeIndex> = scc.iter().copied().collect();
        for &n in &scc {
            for e in graph.edges(n) {
                use petgraph::visit::EdgeRef;
                if *e.weight() == Edge::Strict && members.contains(&e.target()) {
                    let mut cycle: Vec<String> = scc.iter().map(|&i| graph[i].clone()).collect();
                    cycle.sort();
                    return Err(EngineError::NotStratified { cycle });
                }
            }
        }
    }

    // Longest path where strict edges weigh one; terminates because every
    // cycle consists of positive edges only.
    let mut level: BTreeMap<&str, usize> = graph
        .node_indices()
        .map(|n| (graph[n].as_str(), 0))
        .collect();
    loop {
        let mut changed = false;
        for (from, to, kind) in &edges {
            let want = level[from.as_str()] + usize::from(*kind == Edge::Strict);
            if want > level[to.as_str()] {
                level.insert(to.as_str(), want);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let used: BTreeSet<usize> = level.values().copied().collect();
    let compact: BTreeMap<usize, usize> = used.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let mut layers = vec![BTreeSet::new(); compact.len()];
    let mut index = BTreeMap::new();
    for (pred, l) in level {
        let l = compact[&l];
        layers[l].insert(pred.to_string());
        index.insert(pred.to_string(), l);
    }
    Ok(Stratification { layers, index })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_program;

    #[test]
    fn self_negation_is_not_stratified() {
        let p = parse_program("a :- not a.").unwrap();
        let err = stratify(&p).unwrap_err();
        assert_eq!(
            err,
            EngineError::NotStratified {
                cycle: vec!["a".into()]
            }
        );
    }

    #[test]
    fn even_cycle_through_negation_rejected() {
        let p = parse_program("a(X) :- b(X), not c(X).\nc(X) :- b(X), not a(X).").unwrap();
        assert!(matches!(
            stratify(&p),
            Err(EngineError::NotStratified { .. })
        ));
    }

    #[test]
    fn positive_recursion_single_layer() {
        let p = parse_program(
            "diagnosis(S) :- diagnosis(I), isA(I, S).\n-diagnosis(I) :- -diagnosis(S), isA(I, S).",
        )
        .unwrap();
        let s = stratify(&p).unwrap();
        assert_eq!(s.layer_of("diagnosis"), s.layer_of("isA"));
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn naf_lifts_head_above_body() {
        let p = parse_program(
            "relevant(X) :- dep(D, X), not criterion(D), isA(D, S), diagnosis(S).\ncriterion(D) :- dep(D, X), symptom(X).",
        )
        .unwrap();
        let s = stratify(&p).unwrap();
        assert!(s.layer_of("relevant") > s.layer_of("criterion"));
        assert!(s.layer_of("relevant") >= s.layer_of("diagnosis"));
    }

    #[test]
    fn non_monotone_aggregate_is_strict() {
        let p = parse_program("n(C) :- size(C), #count{X : p(X)} = C.\np(X) :- q(X).").unwrap();
        let s = stratify(&p).unwrap();
        assert!(s.layer_of("n") > s.layer_of("p"));
        let p = parse_program("ok(a) :- #count{X : p(X)} >= 1.\np(X) :- q(X), ok(X).").unwrap();
        let s = stratify(&p).unwrap();
        assert_eq!(s.layer_of("ok"), s.layer_of("p"));
    }
}
