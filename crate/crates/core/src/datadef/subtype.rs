//! Subtype graph: an edge `a -> b` records that every `a` is a `b`.
//! Strongly connected components are equivalence classes; reachability
//! between components answers subtype queries.

use std::collections::{BTreeMap, BTreeSet};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::value::Symbol;

#[derive(Clone, Debug, Default)]
pub struct SubtypeGraph {
    graph: DiGraph<Symbol, ()>,
    index: BTreeMap<Symbol, NodeIndex>,
    component: BTreeMap<Symbol, usize>,
    /// Members of each component, sorted.
    members: Vec<Vec<Symbol>>,
    /// Components reachable from each component, itself included.
    reach: Vec<BTreeSet<usize>>,
}

impl SubtypeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    fn node(&mut self, name: &Symbol) -> NodeIndex {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.graph.add_node(name.clone());
        self.index.insert(name.clone(), i);
        i
    }

    pub fn add_vertex(&mut self, name: &Symbol) {
        if !self.index.contains_key(name) {
            self.node(name);
            self.recompute();
        }
    }

    pub fn add_edge(&mut self, sub: &Symbol, sup: &Symbol) {
        let a = self.node(sub);
        let b = self.node(sup);
        if a != b && self.graph.find_edge(a, b).is_none() {
            self.graph.add_edge(a, b, ());
        }
        self.recompute();
    }

    fn recompute(&mut self) {
        // tarjan_scc yields components in reverse topological order, so every
        // successor component is finished before its predecessors.
        let sccs = tarjan_scc(&self.graph);
        let mut comp_of = vec![0usize; self.graph.node_count()];
        for (c, nodes) in sccs.iter().enumerate() {
            for n in nodes {
                comp_of[n.index()] = c;
            }
        }
        let mut reach: Vec<BTreeSet<usize>> = Vec::with_capacity(sccs.len());
        for (c, nodes) in sccs.iter().enumerate() {
            let mut r = BTreeSet::from([c]);
            for n in nodes {
                for succ in self.graph.neighbors(*n) {
                    let d = comp_of[succ.index()];
                    if d != c {
                        r.extend(reach[d].iter().copied());
                    }
                }
            }
            reach.push(r);
        }
        self.members = sccs
            .iter()
            .map(|nodes| {
                let mut m: Vec<Symbol> = nodes.iter().map(|n| self.graph[*n].clone()).collect();
                m.sort();
                m
            })
            .collect();
        self.component = self
            .index
            .iter()
            .map(|(s, i)| (s.clone(), comp_of[i.index()]))
            .collect();
        self.reach = reach;
    }

    pub fn contains(&self, name: &Symbol) -> bool {
        self.index.contains_key(name)
    }

    /// Whether `sub` is known to be contained in `sup`. Every type is
    /// contained in `all`.
    pub fn is_subtype(&self, sub: &Symbol, sup: &Symbol) -> bool {
        if sub == sup || sup.as_str() == "all" {
            return true;
        }
        match (self.component.get(sub), self.component.get(sup)) {
            (Some(a), Some(b)) => self.reach[*a].contains(b),
            _ => false,
        }
    }

    pub fn equivalent(&self, a: &Symbol, b: &Symbol) -> bool {
        a == b || matches!((self.component.get(a), self.component.get(b)), (Some(x), Some(y)) if x == y)
    }

    /// Lexicographically least member of the component of `name`.
    pub fn representative(&self, name: &Symbol) -> Symbol {
        match self.component.get(name) {
            Some(c) => self.members[*c][0].clone(),
            None => name.clone(),
        }
    }

    /// Components with more than one member.
    pub fn nontrivial_components(&self) -> Vec<Vec<Symbol>> {
        let mut out: Vec<Vec<Symbol>> = self.members.iter().filter(|m| m.len() > 1).cloned().collect();
        out.sort();
        out
    }

    pub fn edges(&self) -> Vec<(Symbol, Symbol)> {
        let mut out: Vec<(Symbol, Symbol)> = self
            .graph
            .edge_indices()
            .filter_map(|e| self.graph.edge_endpoints(e))
            .map(|(a, b)| (self.graph[a].clone(), self.graph[b].clone()))
            .collect();
        out.sort();
        out
    }

    /// Every known supertype of `name` (excluding itself).
    pub fn supertypes(&self, name: &Symbol) -> Vec<Symbol> {
        let mut out: Vec<Symbol> = self
            .index
            .keys()
            .filter(|s| *s != name && self.is_subtype(name, s))
            .cloned()
            .collect();
        out.sort();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> Symbol {
        Symbol::new(x)
    }

    #[test]
    fn chain_closure() {
        let mut g = SubtypeGraph::new();
        g.add_edge(&s("pos"), &s("nat"));
        g.add_edge(&s("nat"), &s("integer"));
        g.add_edge(&s("integer"), &s("rational"));
        assert!(g.is_subtype(&s("pos"), &s("rational")));
        assert!(!g.is_subtype(&s("rational"), &s("pos")));
        assert!(g.is_subtype(&s("string"), &s("all")));
        assert_eq!(g.supertypes(&s("nat")), [s("integer"), s("rational")]);
    }

    #[test]
    fn two_cycle_collapses() {
        let mut g = SubtypeGraph::new();
        g.add_edge(&s("b"), &s("a"));
        g.add_edge(&s("a"), &s("b"));
        g.add_edge(&s("a"), &s("c"));
        assert!(g.equivalent(&s("a"), &s("b")));
        assert_eq!(g.representative(&s("b")), s("a"));
        assert!(g.is_subtype(&s("b"), &s("c")));
        assert_eq!(g.nontrivial_components(), vec![vec![s("a"), s("b")]]);
    }

    #[test]
    fn reflexive_edge_is_noop() {
        let mut g = SubtypeGraph::new();
        g.add_edge(&s("t1"), &s("t1"));
        assert!(g.edges().is_empty());
        assert!(g.is_subtype(&s("t1"), &s("t1")));
    }
}
