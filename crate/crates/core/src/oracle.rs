//! Brute-force references: symbolic expansion of the edge-difference
//! product, definition-level permanents, and graph/list generators.
//!
//! Nothing here goes through the difference matrix or the Ryser kernel.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{IndexFunction, IntMatrix};
use crate::error::{Error, Result};
use crate::graph::{degeneracy, Graph, Orientation, VertexOrdering};
use crate::solver::ListAssignment;

pub const SYMBOLIC_EDGE_CAP: usize = 8;
pub const NAIVE_DIM_CAP: usize = 8;

/// Sparse polynomial in the variables `x_z`, `z` in `V ∪ E`. Exponent
/// vectors list vertices first, then edges.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MultiIndexPoly {
    vars: usize,
    terms: BTreeMap<Vec<u32>, i64>,
}

impl MultiIndexPoly {
    pub fn constant(vars: usize, c: i64) -> Self {
        let mut terms = BTreeMap::new();
        if c != 0 {
            terms.insert(vec![0; vars], c);
        }
        MultiIndexPoly { vars, terms }
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, i64> {
        &self.terms
    }

    pub fn coefficient(&self, exponents: &[u32]) -> i64 {
        self.terms.get(exponents).copied().unwrap_or(0)
    }

    /// Multiplies by the linear form `sum_k coeffs[k] x_k`.
    fn mul_linear(&self, coeffs: &[i64]) -> Self {
        let mut out: BTreeMap<Vec<u32>, i64> = BTreeMap::new();
        for (exp, &c) in &self.terms {
            for (k, &a) in coeffs.iter().enumerate() {
                if a == 0 {
                    continue;
                }
                let mut e = exp.clone();
                e[k] += 1;
                let slot = out.entry(e).or_insert(0);
                *slot = slot.checked_add(c.checked_mul(a).expect("coefficient overflow")).expect("coefficient overflow");
            }
        }
        out.retain(|_, c| *c != 0);
        MultiIndexPoly {
            vars: self.vars,
            terms: out,
        }
    }
}

/// Expands `prod over arcs (S(head) - S(tail))` with
/// `S(w) = x_w + sum_{e at w} x_e`.
pub fn symbolic_polynomial(g: &Graph, d: &Orientation) -> Result<MultiIndexPoly> {
    let (n, m) = (g.vertex_count(), g.edge_count());
    if m > SYMBOLIC_EDGE_CAP {
        return Err(Error::InvalidParameter(format!(
            "symbolic expansion capped at {SYMBOLIC_EDGE_CAP} edges, graph has {m}"
        )));
    }
    if d.edge_count() != m {
        return Err(Error::OrientationMismatch("arc count differs".into()));
    }
    let vars = n + m;
    let total_at = |w: usize| {
        let mut lin = vec![0i64; vars];
        lin[w] += 1;
        for (f, &(a, b)) in g.edges().iter().enumerate() {
            if a == w || b == w {
                lin[n + f] += 1;
            }
        }
        lin
    };
    let mut poly = MultiIndexPoly::constant(vars, 1);
    for &(tail, head) in d.arcs() {
        let h = total_at(head);
        let t = total_at(tail);
        let form: Vec<i64> = h.iter().zip(&t).map(|(a, b)| a - b).collect();
        poly = poly.mul_linear(&form);
    }
    Ok(poly)
}

/// Coefficient of `prod x_z^eta(z)`; zero for monomials of the wrong degree.
pub fn symbolic_coefficient(g: &Graph, d: &Orientation, eta: &IndexFunction) -> Result<i64> {
    eta.check_shape(g)?;
    let poly = symbolic_polynomial(g, d)?;
    let exps: Vec<u32> = eta.vertices.iter().chain(&eta.edges).copied().collect();
    Ok(poly.coefficient(&exps))
}

/// `exps` laid out vertices first, then edges.
pub fn exponents(eta: &IndexFunction) -> Vec<u32> {
    eta.vertices.iter().chain(&eta.edges).copied().collect()
}

/// Sum over all `n!` permutations.
pub fn permanent_naive(m: &IntMatrix) -> Result<BigInt> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    if n > NAIVE_DIM_CAP {
        return Err(Error::DimensionCap {
            dim: n,
            cap: NAIVE_DIM_CAP,
        });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = BigInt::zero();
    loop {
        let mut prod = BigInt::one();
        for (i, &j) in perm.iter().enumerate() {
            prod *= m.get(i, j);
        }
        total += prod;
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(total)
}

fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let Some(i) = (0..p.len() - 1).rev().find(|&i| p[i] < p[i + 1]) else {
        return false;
    };
    let j = (i + 1..p.len()).rev().find(|&j| p[j] > p[i]).expect("successor exists");
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

/// All labeled graphs on `n` vertices, edge set `mask` over the pairs
/// `(0,1), (0,2), ..., (n-2,n-1)` in lexicographic order, starting at
/// `start`.
pub fn labeled_graphs_from(n: usize, start: u64) -> impl Iterator<Item = Graph> {
    assert!(n <= 7, "labeled enumeration is limited to 7 vertices");
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let count = 1u64 << pairs.len();
    (start..count).map(move |mask| {
        let edges = pairs
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, &p)| p);
        Graph::new(n, edges).expect("labeled graph is simple")
    })
}

pub fn enumerate_labeled_graphs<P>(n: usize, predicate: P) -> impl Iterator<Item = Graph>
where
    P: Fn(&Graph) -> bool,
{
    labeled_graphs_from(n, 0).filter(move |g| predicate(g))
}

pub fn is_connected(g: &Graph) -> bool {
    g.is_connected()
}

pub fn is_non_bipartite(g: &Graph) -> bool {
    !g.is_bipartite()
}

pub fn has_degeneracy_at_most(d: usize) -> impl Fn(&Graph) -> bool {
    move |g| degeneracy(g) <= d
}

/// How many back neighbours each new vertex receives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackDegree {
    /// Uniform in `0..=min(i, d)`.
    AtMost,
    /// Uniform in `1..=min(i, d)`; the graph is connected.
    Positive,
    /// Exactly `min(i, d)`.
    Exact,
}

/// Random graph where vertex `i` picks its back neighbours among `0..i`.
/// The identity ordering witnesses `d`-degeneracy.
pub fn gen_d_degenerate(n: usize, d: usize, mode: BackDegree, seed: u64) -> (Graph, VertexOrdering) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 1..n {
        let cap = i.min(d);
        let k = match mode {
            BackDegree::AtMost => rng.gen_range(0..=cap),
            BackDegree::Positive => rng.gen_range(1.min(cap)..=cap),
            BackDegree::Exact => cap,
        };
        for j in sample(&mut rng, i, k).into_iter() {
            edges.push((j, i));
        }
    }
    let g = Graph::from_sorted_edges(n, edges).expect("generated graph is simple");
    let ordering = VertexOrdering::new(&g, (0..n).collect()).expect("identity ordering");
    (g, ordering)
}

/// Random orientation of a random graph with every out-degree at most `k`:
/// each vertex picks up to `k` out-neighbours, skipping pairs already used.
/// With `acyclic`, out-neighbours are drawn from lower indices only.
pub fn gen_bounded_orientation(n: usize, k: usize, max_edges: usize, acyclic: bool, seed: u64) -> (Graph, Orientation) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut arcs: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
    for v in 0..n {
        let pool = if acyclic { v } else { n.saturating_sub(1) };
        let want = rng.gen_range(0..=k.min(pool));
        let mut others: Vec<usize> = (0..n).filter(|&w| w != v && (!acyclic || w < v)).collect();
        for _ in 0..want {
            if others.is_empty() || arcs.len() >= max_edges {
                break;
            }
            let w = others.swap_remove(rng.gen_range(0..others.len()));
            arcs.entry((v.min(w), v.max(w))).or_insert((v, w));
        }
    }
    let g = Graph::new(n, arcs.keys().copied()).expect("simple");
    let d = Orientation::new(&g, arcs.values().copied().collect()).expect("aligned");
    (g, d)
}

/// Lists of size `eta(z) + 1` drawn without repetition from
/// `[-bound, bound]`.
pub fn random_lists(g: &Graph, eta: &IndexFunction, bound: u64, seed: u64) -> Result<ListAssignment> {
    eta.check_shape(g)?;
    let universe = 2 * bound as usize + 1;
    let need = eta.max_vertex().max(eta.max_edge()) as usize + 1;
    if need > universe {
        return Err(Error::InvalidParameter(format!(
            "universe of {universe} integers cannot hold lists of size {need}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |size: usize| -> Vec<BigRational> {
        sample(&mut rng, universe, size)
            .into_iter()
            .map(|k| BigRational::from_integer(BigInt::from(k as i64 - bound as i64)))
            .collect()
    };
    let vertices = eta.vertices.iter().map(|&c| draw(c as usize + 1)).collect();
    let edges = eta.edges.iter().map(|&c| draw(c as usize + 1)).collect();
    ListAssignment::new(vertices, edges)
}

/// Lists of fixed sizes per vertex and per edge.
pub fn random_uniform_lists(g: &Graph, vertex_size: u32, edge_size: u32, bound: u64, seed: u64) -> Result<ListAssignment> {
    let eta = IndexFunction {
        vertices: vec![vertex_size.saturating_sub(1); g.vertex_count()],
        edges: vec![edge_size.saturating_sub(1); g.edge_count()],
    };
    random_lists(g, &eta, bound, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::canonical_orientation;

    #[test]
    fn k2_polynomial() {
        let g = Graph::complete(2);
        let p = symbolic_polynomial(&g, &canonical_orientation(&g)).unwrap();
        // x_{v1} - x_{v0}
        assert_eq!(p.terms().len(), 2);
        assert_eq!(p.coefficient(&[0, 1, 0]), 1);
        assert_eq!(p.coefficient(&[1, 0, 0]), -1);
    }

    #[test]
    fn p3_polynomial() {
        let g = Graph::path(3);
        let p = symbolic_polynomial(&g, &canonical_orientation(&g)).unwrap();
        // (x_{v1} - x_{v0} + x_{e2}) (x_{v2} - x_{v1} - x_{e1}), vars v0 v1 v2 e1 e2
        assert_eq!(p.coefficient(&[0, 0, 0, 1, 1]), -1);
        assert_eq!(p.coefficient(&[0, 2, 0, 0, 0]), -1);
        assert_eq!(p.coefficient(&[1, 1, 0, 0, 0]), 1);
        assert_eq!(p.coefficient(&[0, 0, 1, 0, 1]), 1);
        assert_eq!(p.terms().len(), 9);
    }

    #[test]
    fn coefficients() {
        let p3 = Graph::path(3);
        let d = canonical_orientation(&p3);
        assert_eq!(symbolic_coefficient(&p3, &d, &IndexFunction::all_edges(&p3)).unwrap(), -1);
        let k3 = Graph::complete(3);
        let d3 = canonical_orientation(&k3);
        assert_eq!(symbolic_coefficient(&k3, &d3, &IndexFunction::all_edges(&k3)).unwrap(), 0);
        let wrong_degree = IndexFunction {
            vertices: vec![1, 0, 0],
            edges: vec![0, 0],
        };
        assert_eq!(symbolic_coefficient(&p3, &d, &wrong_degree).unwrap(), 0);
    }

    #[test]
    fn naive_permanent() {
        let m = IntMatrix::from_rows(vec![vec![2]]).unwrap();
        assert_eq!(permanent_naive(&m).unwrap(), BigInt::from(2));
        let m = IntMatrix::from_rows(vec![vec![1, 2], vec![3, 4]]).unwrap();
        assert_eq!(permanent_naive(&m).unwrap(), BigInt::from(10));
        assert!(permanent_naive(&IntMatrix::zeros(9, 9)).is_err());
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_labeled_graphs(3, is_connected).count(), 4);
        assert_eq!(enumerate_labeled_graphs(4, is_connected).count(), 38);
        assert_eq!(enumerate_labeled_graphs(4, |_| false).count(), 0);
        let triangle_pendant = Graph::new(4, [(0, 1), (0, 2), (1, 2), (2, 3)]).unwrap();
        let pred = |g: &Graph| is_connected(g) && is_non_bipartite(g) && has_degeneracy_at_most(2)(g);
        assert!(enumerate_labeled_graphs(4, pred).any(|g| g == triangle_pendant));
        assert_eq!(labeled_graphs_from(3, 6).count(), 2);
    }

    #[test]
    fn generators_deterministic() {
        let (g, o) = gen_d_degenerate(9, 1, BackDegree::AtMost, 5);
        assert!(o.max_back_degree() <= 1);
        assert_eq!(g.edge_count() + g.components().len(), g.vertex_count());
        let (g2, o2) = gen_d_degenerate(9, 2, BackDegree::Exact, 11);
        assert_eq!(o2.back_degrees(), &[0, 1, 2, 2, 2, 2, 2, 2, 2]);
        assert_eq!(gen_d_degenerate(9, 2, BackDegree::Exact, 11).0, g2);
        let (g3, _) = gen_d_degenerate(8, 3, BackDegree::Positive, 1);
        assert!(g3.is_connected());
        let (g4, d4) = gen_bounded_orientation(7, 2, 100, false, 3);
        assert!(d4.out_degrees(7).iter().all(|&x| x <= 2));
        assert_eq!(gen_bounded_orientation(7, 2, 100, false, 3).0, g4);
        let (_, d5) = gen_bounded_orientation(8, 3, 100, true, 9);
        assert!(d5.is_acyclic(8));
    }

    #[test]
    fn list_generator() {
        let g = Graph::path(3);
        let eta = IndexFunction {
            vertices: vec![0, 0, 0],
            edges: vec![2, 1],
        };
        let l = random_lists(&g, &eta, 10, 4).unwrap();
        assert!(l.vertices().iter().all(|x| x.len() == 1));
        assert_eq!(l.edges()[0].len(), 3);
        assert_eq!(l.edges()[1].len(), 2);
        assert_eq!(random_lists(&g, &eta, 10, 4).unwrap(), l);
        assert!(random_lists(&g, &eta, 0, 4).is_err());
    }
}
