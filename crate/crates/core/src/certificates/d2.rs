use super::{check_expr, env_kernel, CertResult, Certificate, CertifyError, Method, Trace};
use crate::algebra::{
    is_prime, resolve_nonzero_selection_rows, ColumnExpr, DiffMatrix, GenMatrix, IndexFunction, Item, PermanentKernel,
};
use crate::error::{Error, Result};
use crate::graph::{connected_positive_ordering, degeneracy, Graph};

/// The comb-plus structure traced by the walk: a path `w_1 .. w_p` in the
/// original graph, one removed pendant edge per path vertex, and possibly
/// a closing edge from `w_p` back to `w_s`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CombPlus {
    pub path: Vec<usize>,
    /// Edge ids in the augmented graph, one per path vertex.
    pub pendant_edges: Vec<usize>,
    /// `e_j = w_j w_{j+1}`, and the closing edge last when closed.
    pub path_edges: Vec<usize>,
    /// Zero-based position of `w_s` when the walk closed.
    pub attach: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalkEnd {
    /// The first row expansion picked the start vertex itself.
    StartVertex,
    /// A later expansion picked the current vertex column.
    PathVertex,
    /// The walk reached a vertex with spare capacity.
    LowVertex,
    /// The walk closed; resolved through a branch at path edge `e_j`.
    ClosedViaPathEdge,
    /// The walk closed and the cycle rewrite finished it.
    Cycle,
    /// Single vertex, nothing to do.
    Trivial,
}

struct Walker<'k> {
    kernel: &'k PermanentKernel,
    big: Graph,
    base_n: usize,
    base_m: usize,
    a: DiffMatrix,
    p: u64,
    d: u32,
    active: Vec<bool>,
    counts: IndexFunction,
    extra: Vec<ColumnExpr>,
    trace: Trace,
}

impl Walker<'_> {
    fn rows(&self) -> Vec<usize> {
        (0..self.active.len()).filter(|&r| self.active[r]).collect()
    }

    fn residue_of(&self, counts: &IndexFunction, rows: &[usize]) -> Result<u64> {
        self.kernel.modular(&self.a.assemble_rows(counts, rows)?, self.p)
    }

    fn residue(&self) -> Result<u64> {
        self.residue_of(&self.counts, &self.rows())
    }

    fn is_leaf_edge(&self, e: usize) -> bool {
        e >= self.base_m
    }

    /// Smallest pendant edge at `w` whose row is still present.
    fn pendant_at(&self, w: usize) -> Option<usize> {
        self.big
            .incident_edges(w)
            .iter()
            .copied()
            .filter(|&e| self.is_leaf_edge(e) && self.active[e])
            .min()
    }

    /// Replaces one copy of base column `z` by `expr`.
    fn rewrite(&mut self, z: Item, expr: ColumnExpr) -> Result<()> {
        if self.counts.get(z) == 0 {
            return Err(Error::internal(format!("no copy of {z} left to rewrite")));
        }
        check_expr(&self.a, &expr, &ColumnExpr::single(z))?;
        *self.counts.get_mut(z) -= 1;
        self.trace.push("rewrite", format!("{z} = {expr}"));
        self.extra.push(expr);
        Ok(())
    }

    /// `A(w_1) = A(e_1) - A(e_2) + ... + (-1)^len A(end)`.
    fn telescope(edges: &[usize], end: usize) -> ColumnExpr {
        let mut expr = ColumnExpr::zero();
        for (j, &e) in edges.iter().enumerate() {
            expr.add_term(Item::Edge(e), if j % 2 == 0 { 1 } else { -1 });
        }
        expr.add_term(Item::Vertex(end), if edges.len().is_multiple_of(2) { 1 } else { -1 });
        expr
    }

    /// Finishes a closed walk on the cycle `c` with `f[j] = c_j c_{j+1}`;
    /// `c_0` carries `d` columns and every cycle edge none.
    fn cycle_case(&mut self, c: &[usize], f: &[usize]) -> Result<()> {
        let len = c.len();
        if len < 3 || f.len() != len {
            return Err(Error::internal("degenerate cycle in the comb"));
        }
        let before = self.residue()?;
        *self.counts.get_mut(Item::Vertex(c[1])) -= 1;
        *self.counts.get_mut(Item::Edge(f[0])) += 1;
        let after = self.residue()?;
        self.trace.push(
            "swap",
            format!("v{} -> e{}: residue {before} -> {after}", c[1], f[0]),
        );
        if after != before {
            return Err(Error::internal("cycle swap changed the residue"));
        }
        for j in 1..len - 1 {
            let expr = ColumnExpr::single(Item::Edge(f[j])).minus(&ColumnExpr::single(Item::Vertex(c[j])));
            self.rewrite(Item::Vertex(c[j + 1]), expr)?;
        }
        let expr = ColumnExpr::single(Item::Edge(f[len - 1])).minus(&ColumnExpr::single(Item::Vertex(c[len - 1])));
        self.rewrite(Item::Vertex(c[0]), expr)
    }

    /// Resolves the combination matrix, then deletes the remaining pendant
    /// rows one at a time by row expansion.
    fn finish(&mut self) -> Result<IndexFunction> {
        let mut gen = GenMatrix::from_index_function(&self.counts);
        for expr in &self.extra {
            gen.push(expr.clone());
        }
        let usage = gen.usage();
        let d = self.d;
        let over = (0..self.big.vertex_count()).find(|&v| {
            let c = usage.vertices[v];
            if v < self.base_n { c > d - 1 } else { c > 0 }
        });
        let over_e = (0..self.big.edge_count()).find(|&e| {
            let c = usage.edges[e];
            if e < self.base_m { c > 1 } else { c > 0 }
        });
        if over.is_some() || over_e.is_some() {
            return Err(Error::internal("walk produced a usage function outside the bounds"));
        }
        let mut rows = self.rows();
        let res = resolve_nonzero_selection_rows(self.kernel, &self.a, &gen, &rows, self.p)?;
        let picks: Vec<String> = res.choices.iter().map(|(z, c)| format!("{c}{z}")).collect();
        self.trace.push("resolve", picks.join(" "));
        let mut eta = res.eta;
        while let Some(pos) = rows.iter().position(|&r| self.is_leaf_edge(r)) {
            let r = rows.remove(pos);
            let support: Vec<Item> = eta.support().map(|(z, _)| z).collect();
            let mut chosen = None;
            for z in support {
                if self.a.entry(r, z) == 0 {
                    continue;
                }
                let mut trial = eta.clone();
                *trial.get_mut(z) -= 1;
                if self.residue_of(&trial, &rows)? != 0 {
                    chosen = Some((z, trial));
                    break;
                }
            }
            let (z, trial) = chosen.ok_or_else(|| Error::internal(format!("row e{r} has no nonzero expansion term")))?;
            self.trace.push("restrict", format!("row e{r}, column {z}"));
            eta = trial;
        }
        Ok(IndexFunction {
            vertices: eta.vertices[..self.base_n].to_vec(),
            edges: eta.edges[..self.base_m].to_vec(),
        })
    }
}

/// `(d, 2)` certificate for a connected `d`-degenerate graph with `d + 1`
/// prime: at most `d - 1` on vertices and at most one on edges.
pub fn certify_d2(g: &Graph, d: usize) -> CertResult<Certificate> {
    certify_d2_traced(&env_kernel()?, g, d).map(|(c, _, _)| c)
}

pub fn certify_d2_traced(
    kernel: &PermanentKernel,
    g: &Graph,
    d: usize,
) -> CertResult<(Certificate, CombPlus, WalkEnd)> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("d = {d}; the (d,2) construction needs d >= 2")).into());
    }
    let p = d as u64 + 1;
    if !is_prime(p) {
        return Err(Error::NotPrime(p).into());
    }
    if !g.is_connected() {
        return Err(CertifyError::hypothesis("connected", format!("{} components", g.components().len())));
    }
    let degen = degeneracy(g);
    if degen > d {
        return Err(CertifyError::hypothesis("d-degenerate", format!("degeneracy is {degen}, d = {d}")));
    }
    let n = g.vertex_count();
    if n == 1 {
        let mut trace = Trace::default();
        trace.push("trivial", "single vertex");
        let cert = Certificate::seal(kernel, g, Method::DegenerateD2, p, IndexFunction::for_graph(g), trace)?;
        return Ok((cert, CombPlus::default(), WalkEnd::Trivial));
    }
    let ordering = connected_positive_ordering(g, d)?;
    let mut counts = vec![0usize; n];
    for (&v, &b) in ordering.order().iter().zip(ordering.back_degrees()) {
        counts[v] = d - b;
    }
    let aug = g.add_leaves(&counts)?;
    let big = aug.graph.clone();
    let mut eta = IndexFunction::for_graph(&big);
    for (slot, &c) in eta.vertices.iter_mut().zip(&counts) {
        *slot = c as u32;
    }
    for e in 0..g.edge_count() {
        eta.edges[e] = 1;
    }
    let mut w = Walker {
        kernel,
        a: DiffMatrix::canonical(&big),
        active: vec![true; big.edge_count()],
        base_n: n,
        base_m: g.edge_count(),
        big,
        p,
        d: d as u32,
        counts: eta,
        extra: Vec::new(),
        trace: Trace::default(),
    };
    w.trace.push("ordering", format!("{:?} back degrees {:?}", ordering.order(), ordering.back_degrees()));
    let r0 = w.residue()?;
    w.trace.push("start", format!("per(A_G'(eta)) = {r0} mod {p}"));
    if r0 == 0 {
        return Err(Error::internal("leaf-augmented permanent vanishes").into());
    }

    let start = ordering.order()[0];
    let mut comb = CombPlus {
        path: vec![start],
        ..CombPlus::default()
    };
    let mut on_path = vec![None; n];
    on_path[start] = Some(0);
    let end = loop {
        if comb.path.len() > n {
            return Err(Error::internal("walk exceeded the vertex count").into());
        }
        let cur = *comb.path.last().expect("nonempty path");
        let pendant = w
            .pendant_at(cur)
            .ok_or_else(|| Error::internal(format!("v{cur} has no pendant edge left")))?;
        w.active[pendant] = false;
        comb.pendant_edges.push(pendant);
        let rows = w.rows();
        let mut candidates = vec![Item::Vertex(cur)];
        let mut at_cur: Vec<usize> = g.incident_edges(cur).to_vec();
        at_cur.sort_unstable();
        candidates.extend(at_cur.into_iter().map(Item::Edge));
        let mut picked = None;
        for z in candidates {
            if w.counts.get(z) == 0 || w.a.entry(pendant, z) == 0 {
                continue;
            }
            let mut trial = w.counts.clone();
            *trial.get_mut(z) -= 1;
            let minor = w.residue_of(&trial, &rows)?;
            if minor != 0 {
                w.trace.push("expand", format!("row e{pendant}, column {z}, minor {minor}"));
                picked = Some((z, trial));
                break;
            }
        }
        let (z, trial) = picked.ok_or_else(|| Error::internal(format!("row e{pendant} has no nonzero expansion term")))?;
        w.counts = trial;
        match z {
            Item::Vertex(_) if comb.path.len() == 1 => break WalkEnd::StartVertex,
            Item::Vertex(_) => {
                let expr = Walker::telescope(&comb.path_edges, cur);
                w.rewrite(Item::Vertex(start), expr)?;
                break WalkEnd::PathVertex;
            }
            Item::Edge(f) => {
                let x = g.other_end(f, cur);
                comb.path_edges.push(f);
                if let Some(s) = on_path[x] {
                    comb.attach = Some(s);
                    break close(&mut w, &comb, s)?;
                }
                if w.counts.vertices[x] + 2 <= d as u32 {
                    let expr = Walker::telescope(&comb.path_edges, x);
                    w.rewrite(Item::Vertex(start), expr)?;
                    comb.path.push(x);
                    break WalkEnd::LowVertex;
                }
                on_path[x] = Some(comb.path.len());
                comb.path.push(x);
            }
        }
    };
    w.trace.push("walk", format!("path {:?}, closing at {:?}", comb.path, comb.attach));
    let eta_g = w.finish()?;
    let cert = Certificate::seal(kernel, g, Method::DegenerateD2, p, eta_g, w.trace)?;
    Ok((cert, comb, end))
}

/// Closure at zero-based path position `s`.
fn close(w: &mut Walker<'_>, comb: &CombPlus, s: usize) -> Result<WalkEnd> {
    let start = comb.path[0];
    if s > 0 {
        // One copy of A(w_1) expands into e_1 .. e_{s-1} and w_s.
        let mut branch_edges: Vec<usize> = comb.path_edges[..s].to_vec();
        branch_edges.sort_unstable();
        for e in branch_edges {
            let mut trial = w.counts.clone();
            trial.vertices[start] -= 1;
            trial.edges[e] += 1;
            if w.residue_of(&trial, &w.rows())? != 0 {
                w.trace.push("branch", format!("v{start} -> e{e}"));
                w.counts = trial;
                return Ok(WalkEnd::ClosedViaPathEdge);
            }
        }
        let ws = comb.path[s];
        let mut trial = w.counts.clone();
        trial.vertices[start] -= 1;
        trial.vertices[ws] += 1;
        if w.residue_of(&trial, &w.rows())? == 0 {
            return Err(Error::internal("every branch of the path expression vanishes"));
        }
        w.trace.push("branch", format!("v{start} -> v{ws}"));
        w.counts = trial;
    }
    let c = comb.path[s..].to_vec();
    let f = comb.path_edges[s..].to_vec();
    w.cycle_case(&c, &f)?;
    Ok(WalkEnd::Cycle)
}
