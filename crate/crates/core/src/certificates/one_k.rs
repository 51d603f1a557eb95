use std::collections::VecDeque;

use num_bigint::BigInt;
use num_traits::One;

use super::{check_expr, env_kernel, CertResult, Certificate, CertifyError, Method, Trace};
use crate::algebra::{is_prime, resolve_nonzero_selection_rows, ColumnExpr, DiffMatrix, GenMatrix, Item, PermanentKernel};
use crate::error::{Error, Result};
use crate::graph::{bipartition_or_odd_cycle, degeneracy_ordering, parity_path, Graph, ParityStructure, VertexOrdering, Walk};

/// `2 A(v)` as an edge-only combination for every vertex, built once from
/// an odd cycle.
#[derive(Debug, Clone)]
pub struct VertexDoubler {
    exprs: Vec<ColumnExpr>,
}

impl VertexDoubler {
    pub fn new(g: &Graph, cycle: &Walk) -> Result<Self> {
        if !cycle.is_valid_in(g, true) || cycle.len().is_multiple_of(2) {
            return Err(Error::InvalidParameter("expected an odd cycle of the graph".into()));
        }
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        let n = g.vertex_count();
        let len = cycle.len();
        let mut exprs: Vec<Option<ColumnExpr>> = vec![None; n];
        let mut queue = VecDeque::new();
        for (r, &u) in cycle.vertices.iter().enumerate() {
            let mut expr = ColumnExpr::zero();
            for j in 0..len {
                let sign = if j % 2 == 0 { 1 } else { -1 };
                expr.add_term(Item::Edge(cycle.edges[(r + j) % len]), sign);
            }
            exprs[u] = Some(expr);
            queue.push_back(u);
        }
        // 2A(w) = 2A(e) - 2A(x) for the BFS parent x of w, joined by e.
        while let Some(x) = queue.pop_front() {
            for &e in g.incident_edges(x) {
                let w = g.other_end(e, x);
                if exprs[w].is_none() {
                    let parent = exprs[x].as_ref().expect("parent settled");
                    exprs[w] = Some(ColumnExpr::term(Item::Edge(e), 2).minus(parent));
                    queue.push_back(w);
                }
            }
        }
        Ok(VertexDoubler {
            exprs: exprs.into_iter().map(|e| e.expect("connected")).collect(),
        })
    }

    pub fn get(&self, v: usize) -> &ColumnExpr {
        &self.exprs[v]
    }
}

/// Edge-only expression equal to `2 A(v)`.
pub fn double_vertex_as_edges(g: &Graph, v: usize, odd_cycle: &Walk) -> Result<ColumnExpr> {
    if v >= g.vertex_count() {
        return Err(Error::InvalidParameter(format!("vertex {v} out of range")));
    }
    let expr = VertexDoubler::new(g, odd_cycle)?.get(v).clone();
    check_expr(&DiffMatrix::canonical(g), &expr, &ColumnExpr::term(Item::Vertex(v), 2))?;
    Ok(expr)
}

/// Alternating edge sum along a shortest path, equal to `A(x) + s A(y)`
/// with `s = +1` for odd paths and `-1` for even ones. Returns the
/// expression and `s`.
pub fn pair_as_edges(g: &Graph, x: usize, y: usize) -> Result<(ColumnExpr, i64)> {
    let (path, _) = parity_path(g, x, y)?;
    let mut expr = ColumnExpr::zero();
    for (i, &e) in path.edges.iter().enumerate() {
        expr.add_term(Item::Edge(e), if i % 2 == 0 { 1 } else { -1 });
    }
    let sign = if path.len() % 2 == 1 { 1 } else { -1 };
    Ok((expr, sign))
}

/// The square matrix of edge-column combinations behind a `(1, k)`
/// certificate, before resolution.
#[derive(Debug, Clone)]
pub struct OneKPlan {
    pub method: Method,
    pub ordering: VertexOrdering,
    pub light_pair: Option<(usize, usize)>,
    pub matrix: GenMatrix,
    /// Predicted `|per(matrix)|`.
    pub magnitude: BigInt,
}

fn factorial(k: usize) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * i)
}

/// Builds the combination matrix for a connected `d`-degenerate graph.
pub fn one_k_plan(g: &Graph, k: u64, d: usize) -> CertResult<OneKPlan> {
    if !is_prime(k) {
        return Err(Error::NotPrime(k).into());
    }
    if k <= d as u64 {
        return Err(Error::InvalidParameter(format!("k = {k} must exceed d = {d}")).into());
    }
    if !g.is_connected() {
        return Err(CertifyError::hypothesis("connected", format!("{} components", g.components().len())));
    }
    let (degen, _) = degeneracy_ordering(g);
    if degen > d {
        return Err(CertifyError::hypothesis(
            "d-degenerate",
            format!("degeneracy is {degen}, d = {d}"),
        ));
    }
    let a = DiffMatrix::canonical(g);
    match bipartition_or_odd_cycle(g)? {
        ParityStructure::OddCycle(cycle) => {
            let (_, ordering) = degeneracy_ordering(g);
            let doubler = VertexDoubler::new(g, &cycle)?;
            let mut matrix = GenMatrix::new(g.vertex_count(), g.edge_count(), Vec::new());
            let mut magnitude = BigInt::one() << g.edge_count();
            for (&v, &back) in ordering.order().iter().zip(ordering.back_degrees()) {
                let expr = doubler.get(v);
                check_expr(&a, expr, &ColumnExpr::term(Item::Vertex(v), 2))?;
                for _ in 0..back {
                    matrix.push(expr.clone());
                }
                magnitude *= factorial(back);
            }
            Ok(OneKPlan {
                method: Method::OneKNonbipartite,
                ordering,
                light_pair: None,
                matrix,
                magnitude,
            })
        }
        ParityStructure::Bipartition { .. } => {
            let Some((u, v)) = g.find_light_pair(k as usize) else {
                return Err(CertifyError::hypothesis(
                    "light pair",
                    format!("bipartite with no non-adjacent pair of degree sum below {k}"),
                ));
            };
            let (rest, map, _) = g.remove_vertices(&[u, v]);
            let mut back_map = vec![0; rest.vertex_count()];
            for (old, new) in map.iter().enumerate() {
                if let Some(new) = new {
                    back_map[*new] = old;
                }
            }
            let (_, inner) = degeneracy_ordering(&rest);
            let mut order: Vec<usize> = inner.order().iter().map(|&w| back_map[w]).collect();
            order.extend([u, v]);
            let ordering = VertexOrdering::new(g, order)?;
            let mut matrix = GenMatrix::new(g.vertex_count(), g.edge_count(), Vec::new());
            let mut magnitude = BigInt::one();
            let mut push_pair = |x: usize, copies: usize| -> Result<()> {
                let (expr, sign) = pair_as_edges(g, x, v)?;
                let target = ColumnExpr::single(Item::Vertex(x)).plus(&ColumnExpr::term(Item::Vertex(v), sign));
                check_expr(&a, &expr, &target)?;
                for _ in 0..copies {
                    matrix.push(expr.clone());
                }
                magnitude *= factorial(copies);
                Ok(())
            };
            let n = g.vertex_count();
            for i in 0..n - 2 {
                push_pair(ordering.order()[i], ordering.back_degrees()[i])?;
            }
            push_pair(u, g.degree(u) + g.degree(v))?;
            Ok(OneKPlan {
                method: Method::OneKBipartite,
                ordering,
                light_pair: Some((u, v)),
                matrix,
                magnitude,
            })
        }
    }
}

/// `(1, k)` certificate: zero on vertices, at most `k - 1` on edges.
pub fn certify_1k(g: &Graph, k: u64, d: usize) -> CertResult<Certificate> {
    certify_1k_with(&env_kernel()?, g, k, d)
}

pub fn certify_1k_with(kernel: &PermanentKernel, g: &Graph, k: u64, d: usize) -> CertResult<Certificate> {
    if g.edge_count() == 0 {
        if !is_prime(k) {
            return Err(Error::NotPrime(k).into());
        }
        if g.vertex_count() > 1 {
            return Err(CertifyError::hypothesis("connected", format!("{} components", g.vertex_count())));
        }
        let mut trace = Trace::default();
        trace.push("trivial", "single vertex");
        return Ok(Certificate::seal(kernel, g, Method::OneKNonbipartite, k, crate::algebra::IndexFunction::for_graph(g), trace)?);
    }
    let plan = one_k_plan(g, k, d)?;
    let a = DiffMatrix::canonical(g);
    let mut trace = Trace::default();
    trace.push("ordering", format!("{:?} back degrees {:?}", plan.ordering.order(), plan.ordering.back_degrees()));
    if let Some((u, v)) = plan.light_pair {
        trace.push("light-pair", format!("v{u} v{v}, degree sum {}", g.degree(u) + g.degree(v)));
    }
    let mut last: Option<&ColumnExpr> = None;
    for col in plan.matrix.columns() {
        if last != Some(col) {
            trace.push("column", col.to_string());
        }
        last = Some(col);
    }
    let rows: Vec<usize> = (0..g.edge_count()).collect();
    let residue = kernel.modular(&plan.matrix.evaluate(&a)?, k)?;
    trace.push("permanent", format!("per = {residue} mod {k}, |per| = {}", plan.magnitude));
    if residue == 0 {
        return Err(Error::internal("combination matrix vanishes modulo k").into());
    }
    let res = resolve_nonzero_selection_rows(kernel, &a, &plan.matrix, &rows, k)?;
    let picks: Vec<String> = res.choices.iter().map(|(z, c)| format!("{c}{z}")).collect();
    trace.push("resolve", picks.join(" "));
    Ok(Certificate::seal(kernel, g, plan.method, k, res.eta, trace)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::permanent_exact;
    use crate::certificates::verify_certificate;

    fn triangle_with_tail() -> Graph {
        Graph::new(5, [(0, 1), (0, 2), (1, 2), (2, 3), (3, 4)]).unwrap()
    }

    #[test]
    fn doubling_on_triangle() {
        let g = Graph::complete(3);
        let ParityStructure::OddCycle(c) = bipartition_or_odd_cycle(&g).unwrap() else {
            panic!("triangle is not bipartite");
        };
        for v in 0..3 {
            let expr = double_vertex_as_edges(&g, v, &c).unwrap();
            assert!(expr.uses_only_edges());
            assert_eq!(expr.terms().len(), 3);
            assert!(expr.terms().values().all(|c| c.abs() == 1));
        }
    }

    #[test]
    fn doubling_off_cycle() {
        let g = triangle_with_tail();
        let ParityStructure::OddCycle(c) = bipartition_or_odd_cycle(&g).unwrap() else {
            panic!("has a triangle");
        };
        let expr = double_vertex_as_edges(&g, 4, &c).unwrap();
        assert_eq!(expr.coeff(Item::Edge(4)).abs(), 2);
        assert_eq!(expr.coeff(Item::Edge(3)).abs(), 2);
        for e in 0..3 {
            assert_eq!(expr.coeff(Item::Edge(e)).abs(), 1);
        }
        let d = VertexDoubler::new(&g, &c).unwrap();
        assert_eq!(d.get(4), &expr);
        assert!(VertexDoubler::new(&Graph::path(3), &c).is_err());
    }

    #[test]
    fn pairs() {
        let a2 = DiffMatrix::canonical(&Graph::complete(2));
        let (expr, sign) = pair_as_edges(&Graph::complete(2), 0, 1).unwrap();
        assert_eq!((expr.clone(), sign), (ColumnExpr::single(Item::Edge(0)), 1));
        let target = ColumnExpr::single(Item::Vertex(0)).plus(&ColumnExpr::single(Item::Vertex(1)));
        check_expr(&a2, &expr, &target).unwrap();

        let p3 = Graph::path(3);
        let (expr, sign) = pair_as_edges(&p3, 0, 2).unwrap();
        assert_eq!(sign, -1);
        let target = ColumnExpr::single(Item::Vertex(0)).minus(&ColumnExpr::single(Item::Vertex(2)));
        check_expr(&DiffMatrix::canonical(&p3), &expr, &target).unwrap();

        let c6 = Graph::cycle(6);
        let (expr, sign) = pair_as_edges(&c6, 0, 3).unwrap();
        assert_eq!((expr.terms().len(), sign), (3, 1));
        assert!(pair_as_edges(&c6, 2, 2).is_err());
    }

    #[test]
    fn k3_certificate() {
        let g = Graph::complete(3);
        let plan = one_k_plan(&g, 3, 2).unwrap();
        assert_eq!(plan.magnitude, BigInt::from(16));
        let per = permanent_exact(&plan.matrix.evaluate(&DiffMatrix::canonical(&g)).unwrap()).unwrap();
        assert_eq!(per.magnitude(), plan.magnitude.magnitude());
        let c = certify_1k(&g, 3, 2).unwrap();
        assert_eq!(c.method, Method::OneKNonbipartite);
        assert_eq!(c.eta.total(), 3);
        assert_eq!(c.residue, 1);
        assert!(c.eta.vertices.iter().all(|&x| x == 0));
        assert!(verify_certificate(&g, &c).is_valid());
    }

    #[test]
    fn bipartite_certificates() {
        let p3 = Graph::path(3);
        let plan = one_k_plan(&p3, 3, 2).unwrap();
        assert_eq!(plan.light_pair, Some((0, 2)));
        let c = certify_1k(&p3, 3, 2).unwrap();
        assert_eq!(c.method, Method::OneKBipartite);

        let c4 = Graph::cycle(4);
        let plan = one_k_plan(&c4, 5, 2).unwrap();
        let per = permanent_exact(&plan.matrix.evaluate(&DiffMatrix::canonical(&c4)).unwrap()).unwrap();
        assert_eq!(per.magnitude(), plan.magnitude.magnitude());
        assert!(certify_1k(&c4, 5, 2).is_ok());
    }

    #[test]
    fn hypotheses() {
        assert!(matches!(certify_1k(&Graph::complete(3), 4, 2), Err(CertifyError::Error(Error::NotPrime(4)))));
        assert!(matches!(certify_1k(&Graph::complete(3), 2, 2), Err(CertifyError::Error(_))));
        assert!(matches!(
            certify_1k(&Graph::complete(2), 3, 2),
            Err(CertifyError::NotCertified { .. })
        ));
        assert!(matches!(
            certify_1k(&Graph::complete(4), 3, 2),
            Err(CertifyError::NotCertified { .. })
        ));
        assert!(matches!(certify_1k(&Graph::empty(2), 3, 2), Err(CertifyError::NotCertified { .. })));
        let c = certify_1k(&Graph::empty(1), 3, 2).unwrap();
        assert_eq!(c.residue, 1);
    }
}
