//! List assignments, total weightings, and a backtracking search for a
//! proper weighting inside given lists.

use std::ops::{AddAssign, SubAssign};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{IndexFunction, Item};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Parses `"p/q"`, `"p"`, or a JSON integer.
pub fn parse_rational(raw: &str) -> Result<BigRational> {
    let text = raw.trim();
    let bad = || Error::InvalidLists(format!("bad rational {raw:?}"));
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

pub fn format_rational(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawValue {
    Text(String),
    Int(i64),
}

impl RawValue {
    fn parse(&self) -> Result<BigRational> {
        match self {
            RawValue::Text(s) => parse_rational(s),
            RawValue::Int(i) => Ok(BigRational::from_integer(BigInt::from(*i))),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLists {
    vertices: Vec<Vec<RawValue>>,
    edges: Vec<Vec<RawValue>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeighting {
    vertices: Vec<RawValue>,
    edges: Vec<RawValue>,
}

#[derive(Serialize)]
struct ListsOut {
    vertices: Vec<Vec<String>>,
    edges: Vec<Vec<String>>,
}

#[derive(Serialize)]
struct WeightingOut {
    vertices: Vec<String>,
    edges: Vec<String>,
}

/// A nonempty, sorted, duplicate-free list per vertex and per edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ListAssignment {
    vertices: Vec<Vec<BigRational>>,
    edges: Vec<Vec<BigRational>>,
}

fn normalize(kind: &str, idx: usize, mut list: Vec<BigRational>) -> Result<Vec<BigRational>> {
    if list.is_empty() {
        return Err(Error::InvalidLists(format!("{kind} {idx} has an empty list")));
    }
    list.sort();
    if list.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidLists(format!("{kind} {idx} has a repeated value")));
    }
    Ok(list)
}

impl ListAssignment {
    pub fn new(vertices: Vec<Vec<BigRational>>, edges: Vec<Vec<BigRational>>) -> Result<Self> {
        let vertices = vertices
            .into_iter()
            .enumerate()
            .map(|(i, l)| normalize("vertex", i, l))
            .collect::<Result<_>>()?;
        let edges = edges
            .into_iter()
            .enumerate()
            .map(|(i, l)| normalize("edge", i, l))
            .collect::<Result<_>>()?;
        Ok(ListAssignment { vertices, edges })
    }

    /// Integer lists, convenient in tests.
    pub fn from_integers(vertices: &[&[i64]], edges: &[&[i64]]) -> Result<Self> {
        let conv = |ls: &[&[i64]]| -> Vec<Vec<BigRational>> {
            ls.iter()
                .map(|l| l.iter().map(|&x| BigRational::from_integer(x.into())).collect())
                .collect()
        };
        ListAssignment::new(conv(vertices), conv(edges))
    }

    pub fn vertices(&self) -> &[Vec<BigRational>] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Vec<BigRational>] {
        &self.edges
    }

    pub fn list(&self, z: Item) -> &[BigRational] {
        match z {
            Item::Vertex(v) => &self.vertices[v],
            Item::Edge(e) => &self.edges[e],
        }
    }

    pub fn check_shape(&self, g: &Graph) -> Result<()> {
        if self.vertices.len() != g.vertex_count() || self.edges.len() != g.edge_count() {
            return Err(Error::InvalidLists(format!(
                "lists cover {} vertices and {} edges, graph has {} and {}",
                self.vertices.len(),
                self.edges.len(),
                g.vertex_count(),
                g.edge_count()
            )));
        }
        Ok(())
    }

    /// Number of assignments in the product of all lists, saturating.
    pub fn product_size(&self) -> u128 {
        self.vertices
            .iter()
            .chain(&self.edges)
            .fold(1u128, |acc, l| acc.saturating_mul(l.len() as u128))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawLists =
            serde_json::from_str(text).map_err(|e| Error::InvalidLists(format!("list JSON: {e}")))?;
        let conv = |ls: Vec<Vec<RawValue>>| -> Result<Vec<Vec<BigRational>>> {
            ls.iter().map(|l| l.iter().map(RawValue::parse).collect()).collect()
        };
        ListAssignment::new(conv(raw.vertices)?, conv(raw.edges)?)
    }

    pub fn to_json(&self) -> String {
        let conv = |ls: &[Vec<BigRational>]| ls.iter().map(|l| l.iter().map(format_rational).collect()).collect();
        serde_json::to_string(&ListsOut {
            vertices: conv(&self.vertices),
            edges: conv(&self.edges),
        })
        .expect("lists serialize")
    }
}

/// A value on every vertex and every edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Weighting {
    pub vertices: Vec<BigRational>,
    pub edges: Vec<BigRational>,
}

impl Weighting {
    pub fn from_integers(vertices: &[i64], edges: &[i64]) -> Self {
        let conv = |xs: &[i64]| xs.iter().map(|&x| BigRational::from_integer(x.into())).collect();
        Weighting {
            vertices: conv(vertices),
            edges: conv(edges),
        }
    }

    pub fn check_shape(&self, g: &Graph) -> Result<()> {
        if self.vertices.len() != g.vertex_count() || self.edges.len() != g.edge_count() {
            return Err(Error::InvalidLists(format!(
                "weighting covers {} vertices and {} edges, graph has {} and {}",
                self.vertices.len(),
                self.edges.len(),
                g.vertex_count(),
                g.edge_count()
            )));
        }
        Ok(())
    }

    /// Whether every value lies in its list.
    pub fn respects(&self, lists: &ListAssignment) -> bool {
        self.vertices.len() == lists.vertices.len()
            && self.edges.len() == lists.edges.len()
            && self.vertices.iter().zip(&lists.vertices).all(|(x, l)| l.binary_search(x).is_ok())
            && self.edges.iter().zip(&lists.edges).all(|(x, l)| l.binary_search(x).is_ok())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawWeighting =
            serde_json::from_str(text).map_err(|e| Error::InvalidLists(format!("weighting JSON: {e}")))?;
        Ok(Weighting {
            vertices: raw.vertices.iter().map(RawValue::parse).collect::<Result<_>>()?,
            edges: raw.edges.iter().map(RawValue::parse).collect::<Result<_>>()?,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&WeightingOut {
            vertices: self.vertices.iter().map(format_rational).collect(),
            edges: self.edges.iter().map(format_rational).collect(),
        })
        .expect("weighting serializes")
    }
}

/// `phi(v)` plus the weights of the edges at `v`.
pub fn vertex_sum(g: &Graph, phi: &Weighting, v: usize) -> BigRational {
    g.incident_edges(v)
        .iter()
        .fold(phi.vertices[v].clone(), |acc, &e| acc + &phi.edges[e])
}

/// Edges whose endpoints receive equal sums; empty iff `phi` is proper.
pub fn improper_edges(g: &Graph, phi: &Weighting) -> Vec<usize> {
    let sums: Vec<BigRational> = (0..g.vertex_count()).map(|v| vertex_sum(g, phi, v)).collect();
    g.edges()
        .iter()
        .enumerate()
        .filter(|(_, &(u, v))| sums[u] == sums[v])
        .map(|(e, _)| e)
        .collect()
}

pub fn verify_proper(g: &Graph, phi: &Weighting) -> bool {
    improper_edges(g, phi).is_empty()
}

/// Search order: vertices in DFS preorder, each followed by its incident
/// edges not yet placed.
fn variable_order(g: &Graph) -> Vec<Item> {
    let n = g.vertex_count();
    let mut seen = vec![false; n];
    let mut placed = vec![false; g.edge_count()];
    let mut order = Vec::with_capacity(n + g.edge_count());
    for root in 0..n {
        if seen[root] {
            continue;
        }
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            order.push(Item::Vertex(v));
            for &e in g.incident_edges(v) {
                if !placed[e] {
                    placed[e] = true;
                    order.push(Item::Edge(e));
                }
            }
            for &w in g.neighbors(v).iter().rev() {
                if !seen[w] {
                    stack.push(w);
                }
            }
        }
    }
    order
}

trait Scalar: Clone + Eq + Zero + for<'a> AddAssign<&'a Self> + for<'a> SubAssign<&'a Self> {}
impl Scalar for i128 {}
impl Scalar for BigInt {}

struct Search<'g, T> {
    g: &'g Graph,
    order: Vec<Item>,
    values: Vec<Vec<T>>,
    checks: Vec<Vec<usize>>,
    sums: Vec<T>,
    choice: Vec<usize>,
}

impl<T: Scalar> Search<'_, T> {
    fn touched(&self, z: Item) -> (usize, Option<usize>) {
        match z {
            Item::Vertex(v) => (v, None),
            Item::Edge(e) => {
                let (a, b) = self.g.edge(e);
                (a, Some(b))
            }
        }
    }

    fn run(&mut self, pos: usize) -> bool {
        if pos == self.order.len() {
            return true;
        }
        let (a, b) = self.touched(self.order[pos]);
        for k in 0..self.values[pos].len() {
            let x = self.values[pos][k].clone();
            self.sums[a] += &x;
            if let Some(b) = b {
                self.sums[b] += &x;
            }
            let ok = self.checks[pos].iter().all(|&e| {
                let (u, v) = self.g.edge(e);
                self.sums[u] != self.sums[v]
            });
            if ok {
                self.choice[pos] = k;
                if self.run(pos + 1) {
                    return true;
                }
            }
            self.sums[a] -= &x;
            if let Some(b) = b {
                self.sums[b] -= &x;
            }
        }
        false
    }
}

/// First proper weighting in lexicographic list order, or `None` when the
/// product of the lists holds none.
pub fn find_weighting(g: &Graph, lists: &ListAssignment) -> Result<Option<Weighting>> {
    lists.check_shape(g)?;
    let order = variable_order(g);
    let mut rank = vec![0usize; order.len()];
    let slot = |z: Item| match z {
        Item::Vertex(v) => v,
        Item::Edge(e) => g.vertex_count() + e,
    };
    for (pos, &z) in order.iter().enumerate() {
        rank[slot(z)] = pos;
    }
    // Edge uv is decided once u, v and all edges at either end are fixed.
    let mut checks = vec![Vec::new(); order.len()];
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        let last = [u, v]
            .iter()
            .flat_map(|&w| std::iter::once(slot(Item::Vertex(w))).chain(g.incident_edges(w).iter().map(|&f| slot(Item::Edge(f)))))
            .map(|s| rank[s])
            .max()
            .expect("edge has endpoints");
        checks[last].push(e);
    }

    let lists_in_order: Vec<&[BigRational]> = order.iter().map(|&z| lists.list(z)).collect();
    let denom = lists_in_order
        .iter()
        .flat_map(|l| l.iter())
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let scaled: Vec<Vec<BigInt>> = lists_in_order
        .iter()
        .map(|l| l.iter().map(|x| x.numer() * (&denom / x.denom())).collect())
        .collect();

    // i128 is safe when every sum of at most n + m scaled values fits.
    let bound = BigInt::from(i128::MAX) / BigInt::from(order.len() as u64 + 1);
    let small = scaled.iter().flatten().all(|x| x.magnitude() <= bound.magnitude());
    let found = if small {
        let values = scaled
            .iter()
            .map(|l| l.iter().map(|x| x.to_i128().expect("bounded")).collect())
            .collect();
        search::<i128>(g, &order, values, checks)
    } else {
        search::<BigInt>(g, &order, scaled, checks)
    };
    Ok(found.map(|choice| {
        let mut phi = Weighting {
            vertices: vec![BigRational::zero(); g.vertex_count()],
            edges: vec![BigRational::zero(); g.edge_count()],
        };
        for (pos, &z) in order.iter().enumerate() {
            let x = lists_in_order[pos][choice[pos]].clone();
            match z {
                Item::Vertex(v) => phi.vertices[v] = x,
                Item::Edge(e) => phi.edges[e] = x,
            }
        }
        phi
    }))
}

fn search<T: Scalar>(g: &Graph, order: &[Item], values: Vec<Vec<T>>, checks: Vec<Vec<usize>>) -> Option<Vec<usize>> {
    let mut s = Search {
        g,
        order: order.to_vec(),
        values,
        checks,
        sums: vec![T::zero(); g.vertex_count()],
        choice: vec![0; order.len()],
    };
    s.run(0).then_some(s.choice)
}

/// As [`find_weighting`] for lists backed by a non-singular index function:
/// every list must have at least `eta(z) + 1` values, and an empty search
/// is an internal error.
pub fn find_certified_weighting(g: &Graph, lists: &ListAssignment, eta: &IndexFunction) -> Result<Weighting> {
    lists.check_shape(g)?;
    eta.check_shape(g)?;
    for v in 0..g.vertex_count() {
        check_size(lists, eta, Item::Vertex(v))?;
    }
    for e in 0..g.edge_count() {
        check_size(lists, eta, Item::Edge(e))?;
    }
    let phi = find_weighting(g, lists)?
        .ok_or_else(|| Error::internal("lists sized by a non-singular index function admit no proper weighting"))?;
    if !verify_proper(g, &phi) {
        return Err(Error::internal("search returned an improper weighting"));
    }
    Ok(phi)
}

fn check_size(lists: &ListAssignment, eta: &IndexFunction, z: Item) -> Result<()> {
    let need = eta.get(z) as usize + 1;
    let have = lists.list(z).len();
    if have < need {
        return Err(Error::InvalidLists(format!("{z} has {have} values, the certificate needs {need}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn sums() {
        let k2 = Graph::complete(2);
        let phi = Weighting::from_integers(&[0, 0], &[1]);
        assert_eq!(vertex_sum(&k2, &phi, 0), r(1, 1));
        let iso = Graph::empty(1);
        assert_eq!(vertex_sum(&iso, &Weighting::from_integers(&[7], &[]), 0), r(7, 1));
        let p3 = Graph::path(3);
        assert_eq!(vertex_sum(&p3, &Weighting::from_integers(&[0, 0, 0], &[1, 1]), 1), r(2, 1));
    }

    #[test]
    fn properness() {
        let p3 = Graph::path(3);
        assert!(verify_proper(&p3, &Weighting::from_integers(&[0, 0, 0], &[1, 1])));
        let k2 = Graph::complete(2);
        assert_eq!(improper_edges(&k2, &Weighting::from_integers(&[3, 3], &[5])), vec![0]);
    }

    #[test]
    fn p3_search() {
        let p3 = Graph::path(3);
        let lists = ListAssignment::from_integers(&[&[0], &[0], &[0]], &[&[0, 1], &[0, 1]]).unwrap();
        let phi = find_weighting(&p3, &lists).unwrap().unwrap();
        assert_eq!(phi, Weighting::from_integers(&[0, 0, 0], &[1, 1]));
    }

    #[test]
    fn k2_forced_equal() {
        let k2 = Graph::complete(2);
        let lists = ListAssignment::from_integers(&[&[0], &[0]], &[&[1, 2, 3]]).unwrap();
        assert_eq!(find_weighting(&k2, &lists).unwrap(), None);
        let eta = IndexFunction::all_edges(&k2);
        assert!(matches!(find_certified_weighting(&k2, &lists, &eta), Err(Error::Internal(_))));
    }

    #[test]
    fn rational_values() {
        let k2 = Graph::complete(2);
        let lists = ListAssignment::new(vec![vec![r(1, 2)], vec![r(1, 3), r(1, 2)]], vec![vec![r(5, 7)]]).unwrap();
        let phi = find_weighting(&k2, &lists).unwrap().unwrap();
        assert_eq!(phi.vertices[1], r(1, 3));
    }

    #[test]
    fn huge_values_take_bigint_path() {
        let k2 = Graph::complete(2);
        let big = BigRational::from_integer(BigInt::from(i128::MAX) * 4);
        let lists = ListAssignment::new(vec![vec![big.clone()], vec![big.clone(), r(0, 1)]], vec![vec![big]]).unwrap();
        let phi = find_weighting(&k2, &lists).unwrap().unwrap();
        assert!(verify_proper(&k2, &phi));
        assert_eq!(phi.vertices[1], r(0, 1));
    }

    #[test]
    fn list_validation() {
        assert!(ListAssignment::from_integers(&[&[]], &[]).is_err());
        assert!(ListAssignment::from_integers(&[&[1, 1]], &[]).is_err());
        let l = ListAssignment::from_integers(&[&[3, -1]], &[]).unwrap();
        assert_eq!(l.vertices()[0], vec![r(-1, 1), r(3, 1)]);
        let lists = ListAssignment::from_integers(&[&[0]], &[]).unwrap();
        assert!(find_weighting(&Graph::complete(2), &lists).is_err());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"vertices":[["1/2", 3]],"edges":[]}"#;
        let l = ListAssignment::from_json(text).unwrap();
        assert_eq!(l.to_json(), r#"{"vertices":[["1/2","3/1"]],"edges":[]}"#);
        assert_eq!(ListAssignment::from_json(&l.to_json()).unwrap(), l);
        let phi = Weighting::from_integers(&[0, -2], &[1]);
        assert_eq!(Weighting::from_json(&phi.to_json()).unwrap(), phi);
        assert!(ListAssignment::from_json(r#"{"vertices":[["1/0"]],"edges":[]}"#).is_err());
        assert!(ListAssignment::from_json("{").is_err());
    }
}
