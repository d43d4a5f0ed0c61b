//! Undirected graphs, chordal extensions, maximal cliques and the running
//! intersection property.

mod chordal;
mod rip;

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use chordal::{
    chordal_cliques, extend, extend_max, extend_md, extend_mf, is_chordal, is_subset, maximal_cliques, EliminationOrder,
    Extension,
};
pub use rip::{check_rip, rip_order};

/// A simple undirected graph on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<BTreeSet<usize>>,
}

/// JSON exchange form: `{"n": 3, "edges": [[0, 1], [1, 2]]}` with optional
/// vertex labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Self { adj: vec![BTreeSet::new(); n] }
    }

    /// # Panics
    ///
    /// On a self-loop or an out-of-range endpoint.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Self::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    /// Complete graph on `n` vertices.
    pub fn complete(n: usize) -> Self {
        let mut g = Self::new(n);
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge(u, v);
            }
        }
        g
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    /// Adds `{u, v}`; returns whether the edge is new.
    ///
    /// # Panics
    ///
    /// On a self-loop or an out-of-range endpoint.
    pub fn add_edge(&mut self, u: usize, v: usize) -> bool {
        assert!(u != v, "self-loop at {u}");
        assert!(u < self.n() && v < self.n(), "edge ({u}, {v}) out of range");
        self.adj[v].insert(u);
        self.adj[u].insert(v)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(&v)
    }

    pub fn neighbors(&self, v: usize) -> &BTreeSet<usize> {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, nb) in self.adj.iter().enumerate() {
            out.extend(nb.range(u + 1..).map(|&v| (u, v)));
        }
        out
    }

    /// Edges of `self` that are missing from `base`.
    pub fn added_edges(&self, base: &Graph) -> Vec<(usize, usize)> {
        self.edges().into_iter().filter(|&(u, v)| !base.has_edge(u, v)).collect()
    }

    /// True when every pair of `vertices` is adjacent.
    pub fn is_clique(&self, vertices: &[usize]) -> bool {
        vertices
            .iter()
            .enumerate()
            .all(|(i, &u)| vertices[i + 1..].iter().all(|&v| self.has_edge(u, v)))
    }

    /// Connected components, each sorted, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n()];
        let mut out = Vec::new();
        for s in 0..self.n() {
            if seen[s] {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut i = 0;
            while i < comp.len() {
                let v = comp[i];
                i += 1;
                for &u in &self.adj[v] {
                    if !seen[u] {
                        seen[u] = true;
                        comp.push(u);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson { n: self.n(), edges: self.edges().into_iter().map(|(u, v)| [u, v]).collect(), labels: None }
    }

    pub fn from_json(json: &GraphJson) -> Result<Self> {
        let mut g = Self::new(json.n);
        for &[u, v] in &json.edges {
            if u >= json.n || v >= json.n {
                return Err(Error::InvalidGraph(format!("edge ({u}, {v}) out of range for n = {}", json.n)));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
            }
            g.add_edge(u, v);
        }
        if let Some(labels) = &json.labels {
            if labels.len() != json.n {
                return Err(Error::InvalidGraph(format!("{} labels for {} vertices", labels.len(), json.n)));
            }
        }
        Ok(g)
    }

    /// Graphviz rendering. Each clique is drawn as a colored cluster of
    /// vertices; edges in `highlight` are drawn dashed (e.g. fill edges).
    pub fn to_dot(&self, labels: &[String], cliques: &[Vec<usize>], highlight: &[(usize, usize)]) -> String {
        const COLORS: [&str; 8] =
            ["#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00", "#a65628", "#f781bf", "#999999"];
        let name = |v: usize| labels.get(v).cloned().unwrap_or_else(|| format!("v{v}"));
        let mut out = String::from("graph G {\n  node [shape=circle];\n");
        for v in 0..self.n() {
            let _ = writeln!(out, "  n{v} [label=\"{}\"];", name(v));
        }
        for (i, c) in cliques.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let _ = writeln!(out, "  subgraph cluster_{i} {{");
            let _ = writeln!(out, "    label=\"clique {}\"; color=\"{color}\";", i + 1);
            for &v in c {
                let _ = writeln!(out, "    n{v};");
            }
            out.push_str("  }\n");
        }
        for (u, v) in self.edges() {
            let dashed = highlight.contains(&(u, v)) || highlight.contains(&(v, u));
            let style = if dashed { " [style=dashed]" } else { "" };
            let _ = writeln!(out, "  n{u} -- n{v}{style};");
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_and_counted() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 0), (2, 3)]);
        assert_eq!(g.edge_count(), 2);
        assert!(g.has_edge(1, 0));
        assert_eq!(g.components(), vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let g = Graph::from_edges(3, &[(0, 2), (1, 2)]);
        let back = Graph::from_json(&g.to_json()).unwrap();
        assert_eq!(g, back);
        let bad = GraphJson { n: 2, edges: vec![[0, 2]], labels: None };
        assert!(Graph::from_json(&bad).is_err());
    }
}
