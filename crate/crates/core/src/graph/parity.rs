use std::collections::VecDeque;

use super::Graph;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(len: usize) -> Self {
        if len.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Alternating vertex/edge sequence. For a path, `vertices.len() ==
/// edges.len() + 1`; for a closed walk the two lengths agree and edge `i`
/// joins `vertices[i]` to `vertices[(i + 1) % len]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Walk {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

impl Walk {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn parity(&self) -> Parity {
        Parity::of(self.edges.len())
    }

    /// Checks that consecutive vertices are joined by the listed edges.
    pub fn is_valid_in(&self, g: &Graph, closed: bool) -> bool {
        let k = self.vertices.len();
        if closed {
            if k != self.edges.len() || k < 3 {
                return false;
            }
        } else if k != self.edges.len() + 1 {
            return false;
        }
        let mut sorted = self.vertices.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != k {
            return false;
        }
        self.edges.iter().enumerate().all(|(i, &e)| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % k];
            e < g.edge_count() && g.find_edge(a, b) == Some(e)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParityStructure {
    /// `side[v]` is `false` or `true`; every edge crosses.
    Bipartition { side: Vec<bool> },
    /// Odd cycle `(u_0, e_0, u_1, ..., u_{2q}, e_{2q}, u_0)`.
    OddCycle(Walk),
}

fn bfs_tree(g: &Graph, root: usize) -> (Vec<usize>, Vec<Option<usize>>) {
    let n = g.vertex_count();
    let mut depth = vec![usize::MAX; n];
    let mut parent_edge = vec![None; n];
    depth[root] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &e in g.incident_edges(u) {
            let w = g.other_end(e, u);
            if depth[w] == usize::MAX {
                depth[w] = depth[u] + 1;
                parent_edge[w] = Some(e);
                queue.push_back(w);
            }
        }
    }
    (depth, parent_edge)
}

/// Either a proper 2-colouring or an odd cycle with distinct vertices.
pub fn bipartition_or_odd_cycle(g: &Graph) -> Result<ParityStructure> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let n = g.vertex_count();
    if n == 0 {
        return Ok(ParityStructure::Bipartition { side: Vec::new() });
    }
    let (depth, parent_edge) = bfs_tree(g, 0);
    let clash = g
        .edges()
        .iter()
        .position(|&(a, b)| depth[a] % 2 == depth[b] % 2);
    let Some(e) = clash else {
        return Ok(ParityStructure::Bipartition {
            side: depth.iter().map(|d| d % 2 == 1).collect(),
        });
    };
    // Climb both endpoints to their lowest common ancestor.
    let (a, b) = g.edge(e);
    let mut left = vec![a];
    let mut left_edges = Vec::new();
    let mut right = vec![b];
    let mut right_edges = Vec::new();
    let (mut x, mut y) = (a, b);
    while x != y {
        let px = parent_edge[x].expect("non-root has a parent");
        let py = parent_edge[y].expect("non-root has a parent");
        x = g.other_end(px, x);
        y = g.other_end(py, y);
        left_edges.push(px);
        right_edges.push(py);
        left.push(x);
        right.push(y);
    }
    // cycle: lca .. a (reversed left), then b .. up to just before lca
    let mut vertices: Vec<usize> = left.iter().rev().copied().collect();
    let mut edges: Vec<usize> = left_edges.iter().rev().copied().collect();
    edges.push(e);
    vertices.extend(right[..right.len() - 1].iter().copied());
    edges.extend(right_edges.iter().copied());
    let walk = Walk { vertices, edges };
    debug_assert!(walk.is_valid_in(g, true) && walk.len() % 2 == 1);
    Ok(ParityStructure::OddCycle(walk))
}

/// A shortest path from `x` to `y` with its length parity.
pub fn parity_path(g: &Graph, x: usize, y: usize) -> Result<(Walk, Parity)> {
    if x == y {
        return Err(Error::SameVertex { x, y });
    }
    let n = g.vertex_count();
    if x >= n || y >= n {
        return Err(Error::InvalidParameter(format!("vertex out of range 0..{n}")));
    }
    let (depth, parent_edge) = bfs_tree(g, x);
    if depth[y] == usize::MAX {
        return Err(Error::Disconnected);
    }
    let mut vertices = vec![y];
    let mut edges = Vec::new();
    let mut w = y;
    while w != x {
        let e = parent_edge[w].expect("reached vertex has a parent");
        w = g.other_end(e, w);
        edges.push(e);
        vertices.push(w);
    }
    vertices.reverse();
    edges.reverse();
    let walk = Walk { vertices, edges };
    let parity = walk.parity();
    Ok((walk, parity))
}
