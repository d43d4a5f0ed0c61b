use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::Graph;
use crate::error::{Error, Result};

/// An elimination order: `sequence[k]` is the `k`-th eliminated vertex and
/// `position[v]` is the step at which `v` is eliminated.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EliminationOrder {
    pub sequence: Vec<usize>,
    pub position: Vec<usize>,
}

impl EliminationOrder {
    /// # Panics
    ///
    /// If `sequence` is not a permutation of `0..sequence.len()`.
    pub fn from_sequence(sequence: Vec<usize>) -> Self {
        let mut position = vec![usize::MAX; sequence.len()];
        for (k, &v) in sequence.iter().enumerate() {
            assert!(v < sequence.len() && position[v] == usize::MAX, "not a permutation");
            position[v] = k;
        }
        Self { sequence, position }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_sequence((0..n).collect())
    }
}

/// Chordal extension strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Extension {
    /// Greedy minimum degree.
    MinDegree,
    /// Greedy minimum fill-in.
    MinFill,
    /// Complete every connected component (block closure).
    Max,
}

#[derive(Clone, Copy)]
enum Pivot {
    Degree,
    Fill,
}

fn fill_in(h: &[BTreeSet<usize>], v: usize) -> usize {
    let nb: Vec<usize> = h[v].iter().copied().collect();
    let mut missing = 0;
    for (i, &a) in nb.iter().enumerate() {
        missing += nb[i + 1..].iter().filter(|&&b| !h[a].contains(&b)).count();
    }
    missing
}

// The elimination game. Stops early and returns `None` once the chosen pivot
// would need fill while `zero_fill_only` is set.
fn eliminate(g: &Graph, pivot: Pivot, zero_fill_only: bool) -> Option<(Graph, EliminationOrder)> {
    let n = g.n();
    let mut h: Vec<BTreeSet<usize>> = (0..n).map(|v| g.neighbors(v).clone()).collect();
    let mut alive = vec![true; n];
    let mut out = g.clone();
    let mut sequence = Vec::with_capacity(n);
    for _ in 0..n {
        let score = |v: usize| match pivot {
            Pivot::Degree => h[v].len(),
            Pivot::Fill => fill_in(&h, v),
        };
        let v = (0..n)
            .filter(|&v| alive[v])
            .min_by_key(|&v| (score(v), v))
            .expect("a vertex remains");
        let nb: Vec<usize> = h[v].iter().copied().collect();
        if zero_fill_only && fill_in(&h, v) > 0 {
            return None;
        }
        for (i, &a) in nb.iter().enumerate() {
            for &b in &nb[i + 1..] {
                if h[a].insert(b) {
                    h[b].insert(a);
                    out.add_edge(a, b);
                }
            }
        }
        for &u in &nb {
            h[u].remove(&v);
        }
        h[v].clear();
        alive[v] = false;
        sequence.push(v);
    }
    Some((out, EliminationOrder::from_sequence(sequence)))
}

/// Minimum-degree chordal extension.
///
/// Repeatedly eliminates the vertex of smallest degree in the working graph
/// (lowest index on ties), completing its remaining neighborhood. Returns the
/// chordal supergraph and the elimination order, which is a perfect
/// elimination order of the result.
pub fn extend_md(g: &Graph) -> (Graph, EliminationOrder) {
    eliminate(g, Pivot::Degree, false).expect("unrestricted elimination completes")
}

/// Minimum-fill chordal extension; the pivot minimizes the number of missing
/// edges among its remaining neighbors (lowest index on ties).
pub fn extend_mf(g: &Graph) -> (Graph, EliminationOrder) {
    eliminate(g, Pivot::Fill, false).expect("unrestricted elimination completes")
}

/// Maximal chordal extension: each connected component becomes complete.
pub fn extend_max(g: &Graph) -> Graph {
    let mut out = g.clone();
    for comp in g.components() {
        for (i, &u) in comp.iter().enumerate() {
            for &v in &comp[i + 1..] {
                out.add_edge(u, v);
            }
        }
    }
    out
}

/// Chordality test.
///
/// A graph is chordal iff it admits a perfect elimination order. Minimum fill
/// always finds a simplicial vertex when one exists, and eliminating a
/// simplicial vertex keeps the rest chordal, so a zero-fill minimum-fill run
/// succeeds exactly on chordal graphs.
pub fn is_chordal(g: &Graph) -> bool {
    eliminate(g, Pivot::Fill, true).is_some()
}

/// Runs the requested extension and returns the chordal graph with an
/// elimination order (`None` for [`Extension::Max`]).
pub fn extend(g: &Graph, ext: Extension) -> (Graph, Option<EliminationOrder>) {
    match ext {
        Extension::MinDegree => {
            let (h, pi) = extend_md(g);
            (h, Some(pi))
        }
        Extension::MinFill => {
            let (h, pi) = extend_mf(g);
            (h, Some(pi))
        }
        Extension::Max => (extend_max(g), None),
    }
}

/// Maximal cliques of a chordal graph from a perfect elimination order.
///
/// For each vertex `v` the candidate `{v} ∪ {later neighbors of v}` is
/// formed; candidates are visited by descending size (ties: lexicographic
/// vertex list) and kept unless contained in an already kept clique. Each
/// clique is returned sorted.
pub fn maximal_cliques(g: &Graph, pi: &EliminationOrder) -> Result<Vec<Vec<usize>>> {
    if pi.sequence.len() != g.n() {
        return Err(Error::InvalidGraph(format!(
            "elimination order has {} vertices, graph has {}",
            pi.sequence.len(),
            g.n()
        )));
    }
    let mut candidates = Vec::with_capacity(g.n());
    for v in 0..g.n() {
        let mut c: Vec<usize> = g.neighbors(v).iter().copied().filter(|&u| pi.position[u] > pi.position[v]).collect();
        if !g.is_clique(&c) {
            return Err(Error::NotChordal { vertex: v });
        }
        c.push(v);
        c.sort_unstable();
        candidates.push(c);
    }
    candidates.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    let mut kept: Vec<Vec<usize>> = Vec::new();
    for c in candidates {
        if !kept.iter().any(|k| is_subset(&c, k)) {
            kept.push(c);
        }
    }
    Ok(kept)
}

/// Extends `g` and returns the chordal graph with its maximal cliques.
pub fn chordal_cliques(g: &Graph, ext: Extension) -> (Graph, Vec<Vec<usize>>) {
    let (h, pi) = extend(g, ext);
    let cliques = match pi {
        Some(pi) => maximal_cliques(&h, &pi).expect("elimination order is perfect for its own fill graph"),
        None => {
            let mut comps = h.components();
            comps.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
            comps
        }
    };
    (h, cliques)
}

/// Sorted-slice inclusion test.
pub fn is_subset(a: &[usize], b: &[usize]) -> bool {
    let mut j = 0;
    for &x in a {
        while j < b.len() && b[j] < x {
            j += 1;
        }
        if j == b.len() || b[j] != x {
            return false;
        }
        j += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> Graph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::from_edges(n, &edges)
    }

    #[test]
    fn small_cases() {
        assert!(is_chordal(&Graph::complete(5)));
        assert!(!is_chordal(&cycle(4)));
        assert!(is_chordal(&cycle(3)));
        let (h, _) = extend_mf(&cycle(4));
        assert_eq!(h.edge_count(), 5);
        assert_eq!(extend_max(&Graph::from_edges(3, &[(0, 1), (1, 2)])), Graph::complete(3));
    }

    #[test]
    fn path_needs_no_fill() {
        let p5 = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
        let (h, pi) = extend_md(&p5);
        assert_eq!(h, p5);
        assert!(pi.sequence[0] == 0 || pi.sequence[0] == 4);
    }

    #[test]
    fn cliques_of_complete_and_path() {
        let k4 = Graph::complete(4);
        let (h, pi) = extend_md(&k4);
        assert_eq!(maximal_cliques(&h, &pi).unwrap(), vec![vec![0, 1, 2, 3]]);
        let p4 = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        let (h, pi) = extend_md(&p4);
        assert_eq!(maximal_cliques(&h, &pi).unwrap(), vec![vec![0, 1], vec![1, 2], vec![2, 3]]);
    }

    #[test]
    fn non_perfect_order_is_rejected() {
        let c4 = cycle(4);
        assert!(matches!(
            maximal_cliques(&c4, &EliminationOrder::identity(4)),
            Err(Error::NotChordal { .. })
        ));
    }

    #[test]
    fn subset() {
        assert!(is_subset(&[1, 3], &[0, 1, 2, 3]));
        assert!(!is_subset(&[1, 4], &[0, 1, 2, 3]));
        assert!(is_subset(&[], &[0]));
    }
}
