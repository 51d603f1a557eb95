use std::collections::BTreeSet;

use super::Graph;
use crate::error::{Error, Result};

/// A permutation `v_1, ..., v_n` of the vertices together with the back
/// degree of every position: the number of neighbours placed earlier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexOrdering {
    order: Vec<usize>,
    position: Vec<usize>,
    back_degree: Vec<usize>,
}

impl VertexOrdering {
    pub fn new(g: &Graph, order: Vec<usize>) -> Result<Self> {
        let n = g.vertex_count();
        if order.len() != n {
            return Err(Error::InvalidOrdering(format!(
                "ordering has {} entries, graph has {n} vertices",
                order.len()
            )));
        }
        let mut position = vec![usize::MAX; n];
        for (i, &v) in order.iter().enumerate() {
            if v >= n || position[v] != usize::MAX {
                return Err(Error::InvalidOrdering(format!("vertex {v} repeated or out of range")));
            }
            position[v] = i;
        }
        let back_degree = order
            .iter()
            .enumerate()
            .map(|(i, &v)| g.neighbors(v).iter().filter(|&&w| position[w] < i).count())
            .collect();
        Ok(VertexOrdering {
            order,
            position,
            back_degree,
        })
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Back degree per position.
    pub fn back_degrees(&self) -> &[usize] {
        &self.back_degree
    }

    pub fn position(&self, v: usize) -> usize {
        self.position[v]
    }

    /// Back degree of vertex `v`.
    pub fn back_degree_of(&self, v: usize) -> usize {
        self.back_degree[self.position[v]]
    }

    pub fn max_back_degree(&self) -> usize {
        self.back_degree.iter().copied().max().unwrap_or(0)
    }

    /// Recomputes the back degrees from `g` and compares.
    pub fn is_consistent_with(&self, g: &Graph) -> bool {
        VertexOrdering::new(g, self.order.clone()).is_ok_and(|o| o == *self)
    }
}

/// Min-degree peeling, reversed. Ties go to the smallest vertex index.
/// Returns the degeneracy and an ordering whose back degrees are at most it.
pub fn degeneracy_ordering(g: &Graph) -> (usize, VertexOrdering) {
    let n = g.vertex_count();
    let mut deg = g.degrees();
    let mut removed = vec![false; n];
    let mut queue: BTreeSet<(usize, usize)> = (0..n).map(|v| (deg[v], v)).collect();
    let mut peeled = Vec::with_capacity(n);
    let mut d = 0;
    while let Some((dv, v)) = queue.pop_first() {
        d = d.max(dv);
        removed[v] = true;
        peeled.push(v);
        for w in g.neighbors(v) {
            if !removed[w] {
                queue.remove(&(deg[w], w));
                deg[w] -= 1;
                queue.insert((deg[w], w));
            }
        }
    }
    peeled.reverse();
    let ordering = VertexOrdering::new(g, peeled).expect("peeling visits every vertex once");
    debug_assert!(ordering.max_back_degree() <= d);
    (d, ordering)
}

pub fn degeneracy(g: &Graph) -> usize {
    degeneracy_ordering(g).0
}

/// An ordering with `d^-(v_1) = 0` and `1 <= d^-(v_i) <= d` for `i >= 2`.
///
/// Starts from the degeneracy ordering and moves every later vertex without
/// a back neighbour to just after its earliest-placed neighbour until no
/// such vertex remains.
pub fn connected_positive_ordering(g: &Graph, d: usize) -> Result<VertexOrdering> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let (deg, start) = degeneracy_ordering(g);
    if deg > d {
        return Err(Error::InvalidParameter(format!(
            "graph has degeneracy {deg}, which exceeds d = {d}"
        )));
    }
    let n = g.vertex_count();
    let mut order = start.order().to_vec();
    let budget = n * n + 1;
    let mut moves = 0;
    loop {
        let mut pos = vec![0; n];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        let violator = (1..n).find(|&i| g.neighbors(order[i]).iter().all(|&w| pos[w] > i));
        let Some(i) = violator else { break };
        moves += 1;
        if moves > budget {
            return Err(Error::internal("ordering repair did not stabilise"));
        }
        let v = order[i];
        let anchor = g
            .neighbors(v)
            .into_iter()
            .min_by_key(|&w| pos[w])
            .ok_or_else(|| Error::internal("connected graph has an isolated vertex"))?;
        order.remove(i);
        let at = order.iter().position(|&w| w == anchor).expect("anchor present");
        order.insert(at + 1, v);
    }
    let ordering = VertexOrdering::new(g, order)?;
    let ok = ordering
        .back_degrees()
        .iter()
        .enumerate()
        .all(|(i, &b)| if i == 0 { b == 0 } else { (1..=d).contains(&b) });
    if !ok {
        return Err(Error::internal(format!(
            "repaired ordering violates 1 <= back degree <= {d}: {:?}",
            ordering.back_degrees()
        )));
    }
    Ok(ordering)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_graph_degeneracy() {
        let (d, o) = degeneracy_ordering(&Graph::complete(3));
        assert_eq!(d, 2);
        assert_eq!(o.back_degrees(), &[0, 1, 2]);
    }

    #[test]
    fn path_degeneracy() {
        let (d, o) = degeneracy_ordering(&Graph::path(3));
        assert_eq!(d, 1);
        assert_eq!(o.back_degrees(), &[0, 1, 1]);
    }

    #[test]
    fn k4_minus_edge() {
        let g = Graph::new(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)]).unwrap();
        assert_eq!(degeneracy(&g), 2);
        assert_eq!(degeneracy(&Graph::complete(4)), 3);
        assert_eq!(degeneracy(&Graph::empty(3)), 0);
    }

    #[test]
    fn positive_ordering_examples() {
        let o = connected_positive_ordering(&Graph::path(3), 1).unwrap();
        assert_eq!(o.back_degrees(), &[0, 1, 1]);
        let o = connected_positive_ordering(&Graph::cycle(4), 2).unwrap();
        assert_eq!(o.back_degrees(), &[0, 1, 1, 2]);
        assert_eq!(
            connected_positive_ordering(&Graph::new(3, [(0, 1)]).unwrap(), 2),
            Err(Error::Disconnected)
        );
        assert!(matches!(
            connected_positive_ordering(&Graph::complete(4), 2),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn ordering_validation() {
        let g = Graph::path(3);
        assert!(VertexOrdering::new(&g, vec![0, 0, 1]).is_err());
        assert!(VertexOrdering::new(&g, vec![0, 1]).is_err());
        let o = VertexOrdering::new(&g, vec![1, 0, 2]).unwrap();
        assert_eq!(o.back_degrees(), &[0, 1, 1]);
        assert!(o.is_consistent_with(&g));
        assert!(!o.is_consistent_with(&Graph::complete(3)));
    }
}
