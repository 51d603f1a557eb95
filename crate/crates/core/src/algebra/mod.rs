//! The edge/vertex difference matrix, index functions, permanents and
//! multilinear column resolution.

mod matrix;
mod permanent;
mod resolve;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{canonical_orientation, Graph, Orientation};

pub use matrix::IntMatrix;
pub use permanent::{
    is_prime, permanent_exact, permanent_mod, PermanentKernel, DEFAULT_MAX_DIM, MAX_DIM_ENV,
};
pub use resolve::{resolve_nonzero_selection, resolve_nonzero_selection_rows, Resolution};

/// A vertex or an edge; the column labels of the difference matrix.
///
/// The derived order is the canonical column order: vertices ascending,
/// then edges ascending.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Item {
    Vertex(usize),
    Edge(usize),
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Item::Vertex(v) => write!(f, "v{v}"),
            Item::Edge(e) => write!(f, "e{e}"),
        }
    }
}

/// Non-negative counts on every vertex and edge of a fixed graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndexFunction {
    pub vertices: Vec<u32>,
    pub edges: Vec<u32>,
}

impl IndexFunction {
    pub fn zeros(n: usize, m: usize) -> Self {
        IndexFunction {
            vertices: vec![0; n],
            edges: vec![0; m],
        }
    }

    pub fn for_graph(g: &Graph) -> Self {
        IndexFunction::zeros(g.vertex_count(), g.edge_count())
    }

    /// `eta(e) = 1` on every edge, zero on vertices.
    pub fn all_edges(g: &Graph) -> Self {
        IndexFunction {
            vertices: vec![0; g.vertex_count()],
            edges: vec![1; g.edge_count()],
        }
    }

    pub fn get(&self, z: Item) -> u32 {
        match z {
            Item::Vertex(v) => self.vertices[v],
            Item::Edge(e) => self.edges[e],
        }
    }

    pub fn get_mut(&mut self, z: Item) -> &mut u32 {
        match z {
            Item::Vertex(v) => &mut self.vertices[v],
            Item::Edge(e) => &mut self.edges[e],
        }
    }

    pub fn total(&self) -> u64 {
        self.vertices.iter().chain(&self.edges).map(|&x| x as u64).sum()
    }

    pub fn matches(&self, g: &Graph) -> bool {
        self.vertices.len() == g.vertex_count() && self.edges.len() == g.edge_count()
    }

    pub fn check_shape(&self, g: &Graph) -> Result<()> {
        if self.matches(g) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                vertices: self.vertices.len(),
                edges: self.edges.len(),
                n: g.vertex_count(),
                m: g.edge_count(),
            })
        }
    }

    /// Valid when the total equals the edge count.
    pub fn is_valid(&self) -> bool {
        self.total() == self.edges.len() as u64
    }

    /// Pointwise `self <= other`.
    pub fn le(&self, other: &IndexFunction) -> bool {
        self.vertices.len() == other.vertices.len()
            && self.edges.len() == other.edges.len()
            && self.vertices.iter().zip(&other.vertices).all(|(a, b)| a <= b)
            && self.edges.iter().zip(&other.edges).all(|(a, b)| a <= b)
    }

    /// Items with nonzero count in canonical order.
    pub fn support(&self) -> impl Iterator<Item = (Item, u32)> + '_ {
        let vs = self
            .vertices
            .iter()
            .enumerate()
            .map(|(v, &c)| (Item::Vertex(v), c));
        let es = self.edges.iter().enumerate().map(|(e, &c)| (Item::Edge(e), c));
        vs.chain(es).filter(|&(_, c)| c > 0)
    }

    pub fn max_vertex(&self) -> u32 {
        self.vertices.iter().copied().max().unwrap_or(0)
    }

    pub fn max_edge(&self) -> u32 {
        self.edges.iter().copied().max().unwrap_or(0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("index function serialises")
    }
}

/// Rows indexed by edges, columns by vertices then edges; the linear forms
/// `(head total) - (tail total)` of the oriented edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffMatrix {
    n: usize,
    m: usize,
    entries: Vec<i8>,
}

impl DiffMatrix {
    pub fn build(g: &Graph, orientation: &Orientation) -> Result<Self> {
        let (n, m) = (g.vertex_count(), g.edge_count());
        if orientation.edge_count() != m {
            return Err(Error::OrientationMismatch(format!(
                "{} arcs for {m} edges",
                orientation.edge_count()
            )));
        }
        let width = n + m;
        let mut entries = vec![0i8; m * width];
        for e in 0..m {
            let (tail, head) = orientation.arc(e);
            if (tail.min(head), tail.max(head)) != g.edge(e) {
                return Err(Error::OrientationMismatch(format!(
                    "arc {e} = ({tail}, {head}) does not orient edge {:?}",
                    g.edge(e)
                )));
            }
            let row = &mut entries[e * width..(e + 1) * width];
            row[head] = 1;
            row[tail] = -1;
            for &f in g.incident_edges(head) {
                if f != e {
                    row[n + f] = 1;
                }
            }
            for &f in g.incident_edges(tail) {
                if f != e {
                    row[n + f] = -1;
                }
            }
        }
        let a = DiffMatrix { n, m, entries };
        for e in 0..m {
            let (u, v) = g.edge(e);
            if a.column(Item::Edge(e)) != add(&a.column(Item::Vertex(u)), &a.column(Item::Vertex(v))) {
                return Err(Error::internal(format!("column identity fails at edge {e}")));
            }
        }
        Ok(a)
    }

    /// With the canonical (smaller to larger) orientation.
    pub fn canonical(g: &Graph) -> Self {
        DiffMatrix::build(g, &canonical_orientation(g)).expect("canonical orientation fits")
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.m
    }

    fn col_index(&self, z: Item) -> Result<usize> {
        match z {
            Item::Vertex(v) if v < self.n => Ok(v),
            Item::Edge(e) if e < self.m => Ok(self.n + e),
            other => Err(Error::UnknownSymbol(other.to_string())),
        }
    }

    pub fn contains(&self, z: Item) -> bool {
        self.col_index(z).is_ok()
    }

    pub fn entry(&self, row: usize, z: Item) -> i64 {
        let c = self.col_index(z).expect("symbol in range");
        self.entries[row * (self.n + self.m) + c] as i64
    }

    pub fn column(&self, z: Item) -> Vec<i64> {
        (0..self.m).map(|r| self.entry(r, z)).collect()
    }

    pub fn row(&self, e: usize) -> &[i8] {
        let w = self.n + self.m;
        &self.entries[e * w..(e + 1) * w]
    }

    /// Number of nonzero entries in row `e`.
    pub fn row_support(&self, e: usize) -> usize {
        self.row(e).iter().filter(|&&x| x != 0).count()
    }

    /// `A_G(eta)`: every column `z` repeated `eta(z)` times, canonical order.
    pub fn assemble(&self, eta: &IndexFunction) -> Result<IntMatrix> {
        let rows: Vec<usize> = (0..self.m).collect();
        self.assemble_rows(eta, &rows)
    }

    /// As [`DiffMatrix::assemble`] restricted to a row subset; the result
    /// must still be square.
    pub fn assemble_rows(&self, eta: &IndexFunction, rows: &[usize]) -> Result<IntMatrix> {
        if eta.vertices.len() != self.n || eta.edges.len() != self.m {
            return Err(Error::ShapeMismatch {
                vertices: eta.vertices.len(),
                edges: eta.edges.len(),
                n: self.n,
                m: self.m,
            });
        }
        if eta.total() != rows.len() as u64 {
            return Err(Error::InvalidIndexFunction {
                total: eta.total(),
                expected: rows.len() as u64,
            });
        }
        let k = rows.len();
        let mut out = IntMatrix::zeros(k, k);
        let mut col = 0;
        for (z, count) in eta.support() {
            let c = self.col_index(z)?;
            for _ in 0..count {
                for (i, &r) in rows.iter().enumerate() {
                    out.set(i, col, self.entries[r * (self.n + self.m) + c] as i64);
                }
                col += 1;
            }
        }
        Ok(out)
    }

    pub fn evaluate_column(&self, expr: &ColumnExpr) -> Result<Vec<i64>> {
        let mut out = vec![0i64; self.m];
        for (&z, &c) in expr.terms() {
            let idx = self.col_index(z)?;
            for (r, slot) in out.iter_mut().enumerate() {
                *slot += c * self.entries[r * (self.n + self.m) + idx] as i64;
            }
        }
        Ok(out)
    }
}

fn add(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Formal integer combination of difference-matrix columns.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ColumnExpr {
    terms: BTreeMap<Item, i64>,
}

impl ColumnExpr {
    pub fn zero() -> Self {
        ColumnExpr::default()
    }

    pub fn single(z: Item) -> Self {
        ColumnExpr::term(z, 1)
    }

    pub fn term(z: Item, coeff: i64) -> Self {
        let mut e = ColumnExpr::zero();
        e.add_term(z, coeff);
        e
    }

    pub fn add_term(&mut self, z: Item, coeff: i64) {
        let slot = self.terms.entry(z).or_insert(0);
        *slot += coeff;
        if *slot == 0 {
            self.terms.remove(&z);
        }
    }

    pub fn terms(&self) -> &BTreeMap<Item, i64> {
        &self.terms
    }

    pub fn coeff(&self, z: Item) -> i64 {
        self.terms.get(&z).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// A single base column with coefficient one.
    pub fn is_base(&self) -> bool {
        self.terms.len() == 1 && self.terms.values().all(|&c| c == 1)
    }

    pub fn scaled(&self, k: i64) -> ColumnExpr {
        let mut out = ColumnExpr::zero();
        for (&z, &c) in &self.terms {
            out.add_term(z, c * k);
        }
        out
    }

    pub fn plus(&self, other: &ColumnExpr) -> ColumnExpr {
        let mut out = self.clone();
        for (&z, &c) in &other.terms {
            out.add_term(z, c);
        }
        out
    }

    pub fn minus(&self, other: &ColumnExpr) -> ColumnExpr {
        self.plus(&other.scaled(-1))
    }

    pub fn uses_only_edges(&self) -> bool {
        self.terms.keys().all(|z| matches!(z, Item::Edge(_)))
    }
}

impl fmt::Display for ColumnExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (z, &c)) in self.terms.iter().enumerate() {
            let sign = if c < 0 { "-" } else if i > 0 { "+" } else { "" };
            let mag = c.abs();
            if i > 0 {
                f.write_str(" ")?;
            }
            if mag == 1 {
                write!(f, "{sign}{z}")?;
            } else {
                write!(f, "{sign}{mag}{z}")?;
            }
        }
        Ok(())
    }
}

/// A square matrix whose columns are written as combinations of
/// difference-matrix columns. The expressions, not their values, define
/// the usage function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenMatrix {
    n: usize,
    m: usize,
    columns: Vec<ColumnExpr>,
}

impl GenMatrix {
    pub fn new(n: usize, m: usize, columns: Vec<ColumnExpr>) -> Self {
        GenMatrix { n, m, columns }
    }

    /// Base columns of `A_G(eta)` in canonical order.
    pub fn from_index_function(eta: &IndexFunction) -> Self {
        let mut columns = Vec::new();
        for (z, c) in eta.support() {
            for _ in 0..c {
                columns.push(ColumnExpr::single(z));
            }
        }
        GenMatrix::new(eta.vertices.len(), eta.edges.len(), columns)
    }

    pub fn columns(&self) -> &[ColumnExpr] {
        &self.columns
    }

    pub fn columns_mut(&mut self) -> &mut Vec<ColumnExpr> {
        &mut self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn push(&mut self, col: ColumnExpr) {
        self.columns.push(col);
    }

    /// Number of columns whose expression carries each item.
    pub fn usage(&self) -> IndexFunction {
        let mut eta = IndexFunction::zeros(self.n, self.m);
        for col in &self.columns {
            for &z in col.terms().keys() {
                *eta.get_mut(z) += 1;
            }
        }
        eta
    }

    pub fn evaluate(&self, a: &DiffMatrix) -> Result<IntMatrix> {
        let rows: Vec<usize> = (0..a.edge_count()).collect();
        self.evaluate_rows(a, &rows)
    }

    pub fn evaluate_rows(&self, a: &DiffMatrix, rows: &[usize]) -> Result<IntMatrix> {
        let mut out = IntMatrix::zeros(rows.len(), self.columns.len());
        for (j, col) in self.columns.iter().enumerate() {
            let v = a.evaluate_column(col)?;
            for (i, &r) in rows.iter().enumerate() {
                out.set(i, j, v[r]);
            }
        }
        Ok(out)
    }
}

/// `per(A_G(eta))` under the canonical orientation, and whether the
/// coefficient of the matching monomial is nonzero.
pub fn coefficient_status(g: &Graph, eta: &IndexFunction) -> Result<(num_bigint::BigInt, bool)> {
    coefficient_status_with(&PermanentKernel::default(), g, eta)
}

pub fn coefficient_status_with(
    kernel: &PermanentKernel,
    g: &Graph,
    eta: &IndexFunction,
) -> Result<(num_bigint::BigInt, bool)> {
    eta.check_shape(g)?;
    if !eta.is_valid() {
        return Err(Error::InvalidIndexFunction {
            total: eta.total(),
            expected: g.edge_count() as u64,
        });
    }
    let a = DiffMatrix::canonical(g);
    let per = kernel.exact(&a.assemble(eta)?)?;
    let nonzero = per != num_bigint::BigInt::from(0);
    Ok((per, nonzero))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Orientation;
    use num_bigint::BigInt;

    #[test]
    fn k2_row() {
        let g = Graph::complete(2);
        let a = DiffMatrix::canonical(&g);
        assert_eq!(a.row(0), &[-1, 1, 0]);
    }

    #[test]
    fn p3_rows() {
        let g = Graph::path(3);
        let a = DiffMatrix::canonical(&g);
        assert_eq!(a.row(0), &[-1, 1, 0, 0, 1]);
        assert_eq!(a.row(1), &[0, -1, 1, -1, 0]);
    }

    #[test]
    fn row_support_matches_degrees() {
        let g = Graph::new(5, [(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (1, 4)]).unwrap();
        let a = DiffMatrix::canonical(&g);
        for e in 0..g.edge_count() {
            let (u, v) = g.edge(e);
            assert_eq!(a.row_support(e), g.degree(u) + g.degree(v));
            assert_eq!(a.entry(e, Item::Edge(e)), 0);
        }
    }

    #[test]
    fn orientation_mismatch() {
        let g = Graph::path(3);
        let other = Orientation::new(&Graph::path(2), vec![(0, 1)]).unwrap();
        assert!(DiffMatrix::build(&g, &other).is_err());
    }

    #[test]
    fn assemble_examples() {
        let g = Graph::path(3);
        let a = DiffMatrix::canonical(&g);
        let eta = IndexFunction {
            vertices: vec![0, 0, 0],
            edges: vec![1, 1],
        };
        let m = a.assemble(&eta).unwrap();
        assert_eq!(m.to_rows(), vec![vec![0, 1], vec![-1, 0]]);

        let k2 = Graph::complete(2);
        let eta = IndexFunction {
            vertices: vec![1, 0],
            edges: vec![0],
        };
        assert_eq!(DiffMatrix::canonical(&k2).assemble(&eta).unwrap().to_rows(), vec![vec![-1]]);

        let bad = IndexFunction {
            vertices: vec![1, 0, 0],
            edges: vec![1, 1],
        };
        assert!(matches!(a.assemble(&bad), Err(Error::InvalidIndexFunction { .. })));
    }

    #[test]
    fn evaluate_examples() {
        let g = Graph::complete(3);
        let a = DiffMatrix::canonical(&g);
        for e in 0..3 {
            let (u, v) = g.edge(e);
            let expr = ColumnExpr::single(Item::Edge(e))
                .minus(&ColumnExpr::single(Item::Vertex(u)))
                .minus(&ColumnExpr::single(Item::Vertex(v)));
            assert_eq!(a.evaluate_column(&expr).unwrap(), vec![0; 3]);
        }
        assert_eq!(a.evaluate_column(&ColumnExpr::zero()).unwrap(), vec![0; 3]);
        assert!(matches!(
            a.evaluate_column(&ColumnExpr::single(Item::Vertex(9))),
            Err(Error::UnknownSymbol(_))
        ));
    }

    #[test]
    fn usage_counts_expressions() {
        let g = Graph::complete(3);
        let edges = IndexFunction::all_edges(&g);
        let gm = GenMatrix::from_index_function(&edges);
        assert_eq!(gm.usage(), edges);
        let mut gm = GenMatrix::new(3, 3, vec![]);
        gm.push(ColumnExpr::single(Item::Vertex(0)).plus(&ColumnExpr::single(Item::Vertex(2))));
        let u = gm.usage();
        assert_eq!(u.vertices, vec![1, 0, 1]);
        let gm = GenMatrix::new(
            3,
            3,
            vec![
                ColumnExpr::term(Item::Vertex(1), 2),
                ColumnExpr::term(Item::Vertex(2), 2),
                ColumnExpr::term(Item::Vertex(2), 2),
            ],
        );
        assert_eq!(gm.usage().vertices, vec![0, 1, 2]);
    }

    #[test]
    fn coefficient_examples() {
        let p3 = Graph::path(3);
        let eta = IndexFunction::all_edges(&p3);
        assert_eq!(coefficient_status(&p3, &eta).unwrap(), (BigInt::from(-1), true));
        let k3 = Graph::complete(3);
        assert_eq!(
            coefficient_status(&k3, &IndexFunction::all_edges(&k3)).unwrap(),
            (BigInt::from(0), false)
        );
        // a leaf column only touches its own edge row; using it twice
        // leaves another row empty
        let eta = IndexFunction {
            vertices: vec![2, 0, 0],
            edges: vec![0, 0],
        };
        assert!(!coefficient_status(&p3, &eta).unwrap().1);
    }

    #[test]
    fn index_function_json() {
        let eta = IndexFunction {
            vertices: vec![1, 0],
            edges: vec![2],
        };
        assert_eq!(eta.to_json(), r#"{"vertices":[1,0],"edges":[2]}"#);
    }
}
