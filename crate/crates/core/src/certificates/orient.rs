use super::{choose_prime, env_kernel, CertResult, Certificate, CertifyError, Method, Trace};
use crate::algebra::{resolve_nonzero_selection_rows, ColumnExpr, DiffMatrix, GenMatrix, IndexFunction, Item, PermanentKernel};
use crate::error::{Error, Result};
use crate::graph::{bounded_outdegree_orientation, degeneracy_ordering, Graph, Orientation, OutdegreeResult};

/// Certificate with `eta(v) <= d^+_D(v)` and `eta(e) <= 1`.
///
/// An acyclic `D` gives `eta(v) = d^+(v)`, zero on edges, directly. A
/// cyclic one starts from the acyclic orientation towards earlier vertices
/// of a degeneracy ordering and rewrites a tail column `A(u)` as
/// `A(e) - A(v)` for each arc `(u, v)` that `D` reverses.
pub fn certify_orientation(g: &Graph, d: &Orientation) -> CertResult<Certificate> {
    certify_orientation_with(&env_kernel()?, g, d)
}

pub fn certify_orientation_with(kernel: &PermanentKernel, g: &Graph, d: &Orientation) -> CertResult<Certificate> {
    let n = g.vertex_count();
    let m = g.edge_count();
    // Validates the orientation against the graph.
    let d = Orientation::new(g, d.arcs().to_vec())?;
    let out = d.out_degrees(n);
    let max_out = out.iter().copied().max().unwrap_or(0);
    let mut trace = Trace::default();
    trace.push("out-degrees", format!("{out:?}"));
    if d.is_acyclic(n) {
        let p = choose_prime(max_out.max(1) as u64)?;
        let eta = IndexFunction {
            vertices: out.iter().map(|&x| x as u32).collect(),
            edges: vec![0; m],
        };
        trace.push("acyclic", format!("eta(v) = d+(v), p = {p}"));
        return Ok(Certificate::seal(kernel, g, Method::Orientation, p, eta, trace)?);
    }

    let (_, ordering) = degeneracy_ordering(g);
    let reference: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .map(|&(a, b)| {
            if ordering.position(a) > ordering.position(b) {
                (a, b)
            } else {
                (b, a)
            }
        })
        .collect();
    let ref_out = ordering.max_back_degree();
    let p = choose_prime(max_out.max(ref_out).max(1) as u64)?;
    trace.push("reference", format!("arcs towards earlier vertices of {:?}, p = {p}", ordering.order()));

    let a = DiffMatrix::canonical(g);
    let mut base = IndexFunction::for_graph(g);
    for &(tail, _) in &reference {
        base.vertices[tail] += 1;
    }
    let mut extra = Vec::new();
    for (e, (&(tail, head), &(dt, _))) in reference.iter().zip(d.arcs()).enumerate() {
        if dt == tail {
            continue;
        }
        let expr = ColumnExpr::single(Item::Edge(e)).minus(&ColumnExpr::single(Item::Vertex(head)));
        super::check_expr(&a, &expr, &ColumnExpr::single(Item::Vertex(tail)))?;
        base.vertices[tail] -= 1;
        trace.push("rewrite", format!("v{tail} = {expr}"));
        extra.push(expr);
    }
    let mut gen = GenMatrix::from_index_function(&base);
    for expr in extra {
        gen.push(expr);
    }
    let usage = gen.usage();
    if (0..n).any(|v| usage.vertices[v] as usize > out[v]) || usage.max_edge() > 1 {
        return Err(Error::internal("reversal rewrites exceed the out-degree bounds").into());
    }
    let rows: Vec<usize> = (0..m).collect();
    let res = resolve_nonzero_selection_rows(kernel, &a, &gen, &rows, p)?;
    let picks: Vec<String> = res.choices.iter().map(|(z, c)| format!("{c}{z}")).collect();
    trace.push("resolve", picks.join(" "));
    Ok(Certificate::seal(kernel, g, Method::Orientation, p, res.eta, trace)?)
}

/// `(k+1, 2)` certificate from an orientation with out-degrees at most `k`.
pub fn certify_k2_mad(g: &Graph, k: usize) -> CertResult<Certificate> {
    certify_k2_mad_with(&env_kernel()?, g, k)
}

pub fn certify_k2_mad_with(kernel: &PermanentKernel, g: &Graph, k: usize) -> CertResult<Certificate> {
    if k == 0 && g.edge_count() > 0 {
        return Err(CertifyError::hypothesis("mad <= 2k", "k = 0 with at least one edge"));
    }
    match bounded_outdegree_orientation(g, k) {
        OutdegreeResult::Infeasible { witness, edges } => Err(CertifyError::hypothesis(
            "mad <= 2k",
            format!("vertices {witness:?} span {edges} edges > {k} * {}", witness.len()),
        )),
        OutdegreeResult::Feasible(d) => {
            let mut cert = certify_orientation_with(kernel, g, &d)?;
            if cert.eta.max_vertex() as usize > k {
                return Err(Error::internal("orientation certificate exceeds k on a vertex").into());
            }
            cert.method = Method::MadK2;
            cert.trace.insert(
                0,
                super::TraceStep {
                    step: 0,
                    kind: "orientation".into(),
                    detail: format!("{:?}", d.arcs()),
                },
            );
            for (i, s) in cert.trace.iter_mut().enumerate() {
                s.step = i;
            }
            Ok(reseal(kernel, g, cert)?)
        }
    }
}

fn reseal(kernel: &PermanentKernel, g: &Graph, c: Certificate) -> Result<Certificate> {
    let mut trace = Trace::default();
    for s in &c.trace {
        trace.push(&s.kind, s.detail.clone());
    }
    Certificate::seal(kernel, g, c.method, c.p, c.eta, trace)
}
