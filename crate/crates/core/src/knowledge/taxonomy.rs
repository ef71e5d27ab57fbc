use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

/// Orders dotted identifiers segment by segment, numbers numerically, so
/// that `d.4.2` precedes `d.4.10`.
pub fn compare_ids(a: &str, b: &str) -> Ordering {
    let mut xs = a.split('.');
    let mut ys = b.split('.');
    loop {
        match (xs.next(), ys.next()) {
            (None, None) => return Ordering::Equal,
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some(x), Some(y)) => {
                let ord = match (x.parse::<u64>(), y.parse::<u64>()) {
                    (Ok(m), Ok(n)) => m.cmp(&n),
                    (Ok(_), Err(_)) => Ordering::Less,
                    (Err(_), Ok(_)) => Ordering::Greater,
                    (Err(_), Err(_)) => x.cmp(y),
                };
                if ord != Ordering::Equal {
                    return ord;
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TaxonomyNode {
    pub id: String,
    pub name: String,
    pub parent: Option<String>,
    pub children: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TaxonomyError {
    Cycle(Vec<String>),
    MultipleParents { id: String, parents: Vec<String> },
}

/// Diagnosis hierarchy: a forest over diagnosis ids.
#[derive(Debug, Clone, Default)]
pub struct Taxonomy {
    nodes: BTreeMap<String, TaxonomyNode>,
    order: Vec<String>,
}

impl Taxonomy {
    /// Builds the forest from `(id, name)` pairs and `(child, parent)` edges
    /// whose ids are all known.
    pub fn build(
        names: &BTreeMap<String, String>,
        edges: &[(String, String)],
    ) -> Result<Self, TaxonomyError> {
        let mut parents: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for (child, parent) in edges {
            parents.entry(child).or_default().insert(parent);
        }
        for (id, ps) in &parents {
            if ps.len() > 1 {
                return Err(TaxonomyError::MultipleParents {
                    id: id.to_string(),
                    parents: ps.iter().map(|p| p.to_string()).collect(),
                });
            }
        }
        let parent_of = |id: &str| parents.get(id).and_then(|ps| ps.iter().next().copied());

        for start in names.keys() {
            let mut seen = vec![start.as_str()];
            let mut cur = start.as_str();
            while let Some(p) = parent_of(cur) {
                if let Some(i) = seen.iter().position(|&s| s == p) {
                    let mut cycle: Vec<String> = seen[i..].iter().map(|s| s.to_string()).collect();
                    cycle.sort_by(|a, b| compare_ids(a, b));
                    return Err(TaxonomyError::Cycle(cycle));
                }
                seen.push(p);
                cur = p;
            }
        }

        let mut nodes: BTreeMap<String, TaxonomyNode> = names
            .iter()
            .map(|(id, name)| {
                let node = TaxonomyNode {
                    id: id.clone(),
                    name: name.clone(),
                    parent: parent_of(id).map(str::to_string),
                    children: Vec::new(),
                };
                (id.clone(), node)
            })
            .collect();
        for (child, parent) in edges {
            let children = &mut nodes.get_mut(parent).expect("known parent").children;
            if !children.contains(child) {
                children.push(child.clone());
            }
        }
        for n in nodes.values_mut() {
            n.children.sort_by(|a, b| compare_ids(a, b));
        }

        let mut roots: Vec<&String> = nodes
            .values()
            .filter(|n| n.parent.is_none())
            .map(|n| &n.id)
            .collect();
        roots.sort_by(|a, b| compare_ids(a, b));
        let mut order = Vec::with_capacity(nodes.len());
        let mut stack: Vec<&String> = roots.into_iter().rev().collect();
        while let Some(id) = stack.pop() {
            order.push(id.clone());
            stack.extend(nodes[id].children.iter().rev());
        }
        Ok(Taxonomy { nodes, order })
    }

    pub fn get(&self, id: &str) -> Option<&TaxonomyNode> {
        self.nodes.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.nodes.contains_key(id)
    }

    /// Nodes in depth-first order, children sorted by id.
    pub fn iter(&self) -> impl Iterator<Item = &TaxonomyNode> {
        self.order.iter().map(|id| &self.nodes[id])
    }

    pub fn roots(&self) -> impl Iterator<Item = &TaxonomyNode> {
        self.iter().filter(|n| n.parent.is_none())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn ancestors(&self, id: &str) -> Vec<&str> {
        let mut out = Vec::new();
        let mut cur = self.nodes.get(id);
        while let Some(p) = cur.and_then(|n| n.parent.as_deref()) {
            out.push(p);
            cur = self.nodes.get(p);
        }
        out
    }

    pub fn descendants(&self, id: &str) -> Vec<&str> {
        let mut out = Vec::new();
        let mut stack: Vec<&str> = vec![id];
        while let Some(cur) = stack.pop() {
            if let Some(n) = self.nodes.get(cur) {
                for c in &n.children {
                    out.push(c.as_str());
                    stack.push(c);
                }
            }
        }
        out.sort_by(|a, b| compare_ids(a, b));
        out
    }

    pub fn depth(&self, id: &str) -> usize {
        self.ancestors(id).len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(ids: &[&str]) -> BTreeMap<String, String> {
        ids.iter().map(|i| (i.to_string(), format!("name of {i}"))).collect()
    }

    fn edges(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn numeric_segment_order() {
        let mut ids = vec!["d.4.10", "d.4.1", "d.4.2", "d.1", "d.root"];
        ids.sort_by(|a, b| compare_ids(a, b));
        assert_eq!(ids, vec!["d.1", "d.4.1", "d.4.2", "d.4.10", "d.root"]);
    }

    #[test]
    fn preorder_and_links() {
        let t = Taxonomy::build(
            &names(&["r", "d.1", "d.1.1", "d.1.2", "d.2"]),
            &edges(&[("d.1", "r"), ("d.2", "r"), ("d.1.2", "d.1"), ("d.1.1", "d.1")]),
        )
        .unwrap();
        let order: Vec<&str> = t.iter().map(|n| n.id.as_str()).collect();
        assert_eq!(order, vec!["r", "d.1", "d.1.1", "d.1.2", "d.2"]);
        assert_eq!(t.ancestors("d.1.2"), vec!["d.1", "r"]);
        assert_eq!(t.descendants("d.1"), vec!["d.1.1", "d.1.2"]);
        assert_eq!(t.roots().count(), 1);
    }

    #[test]
    fn cycle_is_reported() {
        let err = Taxonomy::build(&names(&["d.a", "d.b"]), &edges(&[("d.a", "d.b"), ("d.b", "d.a")]))
            .unwrap_err();
        assert_eq!(err, TaxonomyError::Cycle(vec!["d.a".into(), "d.b".into()]));
    }

    #[test]
    fn two_parents_rejected() {
        let err = Taxonomy::build(
            &names(&["a", "b", "c"]),
            &edges(&[("c", "a"), ("c", "b")]),
        )
        .unwrap_err();
        assert!(matches!(err, TaxonomyError::MultipleParents { .. }));
    }
}
