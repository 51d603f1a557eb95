use std::collections::VecDeque;

use super::Graph;
use crate::error::{Error, Result};

/// One `(tail, head)` arc per edge, position-aligned with the graph's edges.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Orientation {
    arcs: Vec<(usize, usize)>,
}

impl Orientation {
    pub fn new(g: &Graph, arcs: Vec<(usize, usize)>) -> Result<Self> {
        if arcs.len() != g.edge_count() {
            return Err(Error::OrientationMismatch(format!(
                "{} arcs for {} edges",
                arcs.len(),
                g.edge_count()
            )));
        }
        for (e, &(t, h)) in arcs.iter().enumerate() {
            if (t.min(h), t.max(h)) != g.edge(e) || t == h {
                return Err(Error::OrientationMismatch(format!(
                    "arc {e} = ({t}, {h}) does not orient edge {:?}",
                    g.edge(e)
                )));
            }
        }
        Ok(Orientation { arcs })
    }

    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }

    pub fn arc(&self, e: usize) -> (usize, usize) {
        self.arcs[e]
    }

    pub fn tail(&self, e: usize) -> usize {
        self.arcs[e].0
    }

    pub fn head(&self, e: usize) -> usize {
        self.arcs[e].1
    }

    pub fn edge_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn out_degrees(&self, n: usize) -> Vec<usize> {
        let mut out = vec![0; n];
        for &(t, _) in &self.arcs {
            out[t] += 1;
        }
        out
    }

    pub fn reversed(&self) -> Orientation {
        Orientation {
            arcs: self.arcs.iter().map(|&(t, h)| (h, t)).collect(),
        }
    }

    pub fn flip(&mut self, e: usize) {
        let (t, h) = self.arcs[e];
        self.arcs[e] = (h, t);
    }

    /// Kahn's algorithm; `None` when the orientation has a directed cycle.
    pub fn topological_order(&self, n: usize) -> Option<Vec<usize>> {
        let mut indeg = vec![0; n];
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(t, h) in &self.arcs {
            indeg[h] += 1;
            out[t].push(h);
        }
        let mut ready: std::collections::BTreeSet<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &w in &out[v] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    ready.insert(w);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    pub fn is_acyclic(&self, n: usize) -> bool {
        self.topological_order(n).is_some()
    }
}

/// Every edge oriented from its smaller to its larger endpoint.
pub fn canonical_orientation(g: &Graph) -> Orientation {
    Orientation {
        arcs: g.edges().to_vec(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OutdegreeResult {
    Feasible(Orientation),
    /// Vertex set `H` with `|E(H)| > k |V(H)|`.
    Infeasible { witness: Vec<usize>, edges: usize },
}

/// Orientation with every out-degree at most `k`, by path reversal from
/// the canonical orientation.
pub fn bounded_outdegree_orientation(g: &Graph, k: usize) -> OutdegreeResult {
    let n = g.vertex_count();
    let mut orient = canonical_orientation(g);
    let mut outdeg = orient.out_degrees(n);
    while let Some(v) = (0..n).find(|&v| outdeg[v] > k) {
        // BFS along out-arcs from v for a vertex with spare capacity.
        let mut parent_arc: Vec<Option<usize>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[v] = true;
        let mut queue = VecDeque::from([v]);
        let mut reach = vec![v];
        let mut target = None;
        'bfs: while let Some(u) = queue.pop_front() {
            for &e in g.incident_edges(u) {
                if orient.tail(e) != u {
                    continue;
                }
                let w = orient.head(e);
                if seen[w] {
                    continue;
                }
                seen[w] = true;
                parent_arc[w] = Some(e);
                reach.push(w);
                if outdeg[w] < k {
                    target = Some(w);
                    break 'bfs;
                }
                queue.push_back(w);
            }
        }
        match target {
            Some(t) => {
                let mut w = t;
                while w != v {
                    let e = parent_arc[w].expect("BFS tree arc");
                    let tail = orient.tail(e);
                    orient.flip(e);
                    w = tail;
                }
                outdeg[v] -= 1;
                outdeg[t] += 1;
            }
            None => {
                reach.sort_unstable();
                let inside: Vec<bool> = (0..n).map(|x| reach.binary_search(&x).is_ok()).collect();
                let edges = g.edges().iter().filter(|&&(a, b)| inside[a] && inside[b]).count();
                return OutdegreeResult::Infeasible { witness: reach, edges };
            }
        }
    }
    OutdegreeResult::Feasible(orient)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_small() {
        assert_eq!(canonical_orientation(&Graph::complete(2)).arcs(), &[(0, 1)]);
        assert_eq!(canonical_orientation(&Graph::path(3)).arcs(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn cycle_with_k1() {
        let g = Graph::cycle(4);
        match bounded_outdegree_orientation(&g, 1) {
            OutdegreeResult::Feasible(o) => {
                assert_eq!(o.out_degrees(4), vec![1, 1, 1, 1]);
                assert!(!o.is_acyclic(4));
            }
            other => panic!("expected feasible, got {other:?}"),
        }
    }

    #[test]
    fn k4_bounds() {
        let g = Graph::complete(4);
        match bounded_outdegree_orientation(&g, 2) {
            OutdegreeResult::Feasible(o) => assert!(o.out_degrees(4).iter().all(|&d| d <= 2)),
            other => panic!("expected feasible, got {other:?}"),
        }
        match bounded_outdegree_orientation(&g, 1) {
            OutdegreeResult::Infeasible { witness, edges } => {
                assert_eq!(witness, vec![0, 1, 2, 3]);
                assert_eq!(edges, 6);
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn orientation_validation() {
        let g = Graph::path(3);
        assert!(Orientation::new(&g, vec![(1, 0), (2, 1)]).is_ok());
        assert!(Orientation::new(&g, vec![(0, 2), (1, 2)]).is_err());
        assert!(Orientation::new(&g, vec![(0, 1)]).is_err());
    }
}
