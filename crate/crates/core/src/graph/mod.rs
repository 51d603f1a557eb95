//! Simple undirected graphs with a fixed edge order, plus the orderings,
//! parity structures and orientations the certificate constructions need.

mod format;
mod order;
mod orient;
mod parity;

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};

pub use format::{parse_graph, GraphFormat};
pub use order::{connected_positive_ordering, degeneracy, degeneracy_ordering, VertexOrdering};
pub use orient::{bounded_outdegree_orientation, canonical_orientation, Orientation, OutdegreeResult};
pub use parity::{bipartition_or_odd_cycle, parity_path, Parity, ParityStructure, Walk};

/// A simple undirected graph on vertices `0..n`.
///
/// The edge list order is part of the value: edge `i` is `edges()[i]`, and
/// every index function, matrix row and certificate refers to edges by
/// that position. Each pair is stored with the smaller endpoint first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    incident: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph keeping the given edge order.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut seen = HashMap::new();
        let mut list = Vec::new();
        let mut incident = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) has an endpoint outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("loop at vertex {u}")));
            }
            let pair = (u.min(v), u.max(v));
            if seen.insert(pair, list.len()).is_some() {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge ({}, {})",
                    pair.0, pair.1
                )));
            }
            incident[pair.0].push(list.len());
            incident[pair.1].push(list.len());
            list.push(pair);
        }
        Ok(Graph {
            n,
            edges: list,
            incident,
        })
    }

    /// Builds a graph with edges sorted lexicographically.
    pub fn from_sorted_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut list: Vec<_> = edges.into_iter().map(|(u, v)| (u.min(v), u.max(v))).collect();
        list.sort_unstable();
        Graph::new(n, list)
    }

    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            edges: Vec::new(),
            incident: vec![Vec::new(); n],
        }
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        Graph::new(n, edges).expect("complete graph is simple")
    }

    pub fn path(n: usize) -> Self {
        Graph::new(n, (1..n).map(|i| (i - 1, i))).expect("path is simple")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "cycles need at least three vertices");
        Graph::from_sorted_edges(n, (0..n).map(|i| (i, (i + 1) % n))).expect("cycle is simple")
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    /// Edge ids incident to `v`, ascending.
    pub fn incident_edges(&self, v: usize) -> &[usize] {
        &self.incident[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incident[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.incident.iter().map(Vec::len).collect()
    }

    pub fn other_end(&self, e: usize, v: usize) -> usize {
        let (a, b) = self.edges[e];
        if a == v {
            b
        } else {
            debug_assert_eq!(b, v);
            a
        }
    }

    /// Neighbours of `v` in ascending order.
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.incident[v].iter().map(|&e| self.other_end(e, v)).collect();
        out.sort_unstable();
        out
    }

    pub fn find_edge(&self, u: usize, v: usize) -> Option<usize> {
        if u >= self.n || v >= self.n {
            return None;
        }
        let (a, b) = (u.min(v), u.max(v));
        let (short, other) = if self.incident[a].len() <= self.incident[b].len() {
            (a, b)
        } else {
            (b, a)
        };
        self.incident[short]
            .iter()
            .copied()
            .find(|&e| self.other_end(e, short) == other)
    }

    pub fn is_adjacent(&self, u: usize, v: usize) -> bool {
        self.find_edge(u, v).is_some()
    }

    /// Connected components as sorted vertex lists, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &e in &self.incident[u] {
                    let w = self.other_end(e, u);
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// The null graph counts as connected here; so does `K_1`.
    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    pub fn is_bipartite(&self) -> bool {
        let mut color: Vec<Option<bool>> = vec![None; self.n];
        for s in 0..self.n {
            if color[s].is_some() {
                continue;
            }
            color[s] = Some(false);
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                let cu = color[u].unwrap();
                for &e in &self.incident[u] {
                    let w = self.other_end(e, u);
                    match color[w] {
                        None => {
                            color[w] = Some(!cu);
                            queue.push_back(w);
                        }
                        Some(cw) if cw == cu => return false,
                        _ => {}
                    }
                }
            }
        }
        true
    }

    /// Removes a vertex set. Returns the remaining graph, the new index of
    /// every old vertex (`None` when removed), and the old id of every
    /// surviving edge. Surviving vertices and edges keep their relative order.
    pub fn remove_vertices(&self, removed: &[usize]) -> (Graph, Vec<Option<usize>>, Vec<usize>) {
        let mut gone = vec![false; self.n];
        for &v in removed {
            gone[v] = true;
        }
        let mut map = vec![None; self.n];
        let mut next = 0;
        for v in 0..self.n {
            if !gone[v] {
                map[v] = Some(next);
                next += 1;
            }
        }
        let mut kept = Vec::new();
        let mut edges = Vec::new();
        for (i, &(u, v)) in self.edges.iter().enumerate() {
            if let (Some(a), Some(b)) = (map[u], map[v]) {
                kept.push(i);
                edges.push((a, b));
            }
        }
        let g = Graph::new(next, edges).expect("subgraph of a simple graph is simple");
        (g, map, kept)
    }

    /// Removes an edge set, keeping all vertices. Returns the graph and the
    /// old id of every surviving edge.
    pub fn remove_edges(&self, removed: &[usize]) -> (Graph, Vec<usize>) {
        let mut gone = vec![false; self.edges.len()];
        for &e in removed {
            gone[e] = true;
        }
        let kept: Vec<usize> = (0..self.edges.len()).filter(|&e| !gone[e]).collect();
        let g = Graph::new(self.n, kept.iter().map(|&e| self.edges[e]))
            .expect("subgraph of a simple graph is simple");
        (g, kept)
    }

    /// Attaches `counts[v]` new degree-one vertices to each vertex `v`.
    ///
    /// The original graph is an induced prefix of the result: old vertices
    /// and edges keep their indices. New vertices are numbered by anchor,
    /// ascending; `leaf_anchor[i]` is the anchor of vertex `n + i`.
    pub fn add_leaves(&self, counts: &[usize]) -> Result<LeafAugmented> {
        if counts.len() != self.n {
            return Err(Error::InvalidParameter(format!(
                "leaf counts cover {} vertices, graph has {}",
                counts.len(),
                self.n
            )));
        }
        let mut edges = self.edges.clone();
        let mut leaf_anchor = Vec::new();
        let mut next = self.n;
        for (v, &c) in counts.iter().enumerate() {
            for _ in 0..c {
                edges.push((v, next));
                leaf_anchor.push(v);
                next += 1;
            }
        }
        Ok(LeafAugmented {
            graph: Graph::new(next, edges)?,
            base_vertices: self.n,
            base_edges: self.edges.len(),
            leaf_anchor,
        })
    }

    /// Lexicographically smallest non-adjacent pair `(u, v)`, `u < v`, with
    /// `d(u) + d(v) < k`.
    pub fn find_light_pair(&self, k: usize) -> Option<(usize, usize)> {
        let deg = self.degrees();
        for u in 0..self.n {
            for v in u + 1..self.n {
                if deg[u] + deg[v] < k && !self.is_adjacent(u, v) {
                    return Some((u, v));
                }
            }
        }
        None
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.edges.len());
        for (u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }
}

/// Result of [`Graph::add_leaves`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeafAugmented {
    pub graph: Graph,
    pub base_vertices: usize,
    pub base_edges: usize,
    pub leaf_anchor: Vec<usize>,
}

impl LeafAugmented {
    pub fn leaves(&self) -> std::ops::Range<usize> {
        self.base_vertices..self.graph.vertex_count()
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        v >= self.base_vertices
    }

    pub fn anchor(&self, leaf: usize) -> usize {
        self.leaf_anchor[leaf - self.base_vertices]
    }

    /// Edge id of the pendant edge of `leaf`.
    pub fn leaf_edge(&self, leaf: usize) -> usize {
        self.base_edges + (leaf - self.base_vertices)
    }

    /// Number of added leaves on each base vertex.
    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.base_vertices];
        for &a in &self.leaf_anchor {
            c[a] += 1;
        }
        c
    }
}
