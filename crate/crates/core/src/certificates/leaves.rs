use super::{env_kernel, CertResult, Certificate, CertifyError, Method, Trace, PRUNE_LEAF_CAP};
use crate::algebra::{is_prime, DiffMatrix, IndexFunction, PermanentKernel};
use crate::error::{Error, Result};
use crate::graph::{degeneracy_ordering, Graph, LeafAugmented, VertexOrdering};

/// One step of the column-replacement cascade.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayStep {
    /// Vertex whose back edges were swapped for its own column.
    pub vertex: usize,
    pub residue: u64,
    /// Every vertex handled so far carries exactly `d` columns.
    pub copies_ok: bool,
}

#[derive(Debug, Clone)]
pub struct AlmostCertificate {
    pub augmented: LeafAugmented,
    pub ordering: VertexOrdering,
    pub eta: IndexFunction,
    /// Certificate for the augmented graph.
    pub certificate: Certificate,
    /// Residues of `M_1, ..., M_n`; `M_0` is the certificate residue.
    pub replay: Vec<ReplayStep>,
    /// `per(M_n) mod (d+1)`.
    pub terminal: u64,
}

fn check_prime_modulus(d: usize) -> Result<u64> {
    if d == 0 {
        return Err(Error::InvalidParameter("d must be at least 1".into()));
    }
    let p = d as u64 + 1;
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    Ok(p)
}

fn checked_ordering(g: &Graph, d: usize, ordering: Option<&VertexOrdering>) -> CertResult<VertexOrdering> {
    let ordering = match ordering {
        Some(o) => {
            if !o.is_consistent_with(g) {
                return Err(Error::InvalidOrdering("ordering does not belong to this graph".into()).into());
            }
            o.clone()
        }
        None => degeneracy_ordering(g).1,
    };
    if ordering.max_back_degree() > d {
        return Err(CertifyError::hypothesis(
            "d-degenerate",
            format!("back degree {} exceeds d = {d}", ordering.max_back_degree()),
        ));
    }
    Ok(ordering)
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

/// Leaf-augmented certificate: `d - d^-(v)` leaves on each vertex, the
/// vertex carries that many columns, every original edge one.
pub fn certify_almost_12(g: &Graph, d: usize, ordering: Option<&VertexOrdering>) -> CertResult<AlmostCertificate> {
    certify_almost_12_with(&env_kernel()?, g, d, ordering)
}

pub fn certify_almost_12_with(
    kernel: &PermanentKernel,
    g: &Graph,
    d: usize,
    ordering: Option<&VertexOrdering>,
) -> CertResult<AlmostCertificate> {
    let p = check_prime_modulus(d)?;
    let ordering = checked_ordering(g, d, ordering)?;
    let n = g.vertex_count();
    let mut counts = vec![0usize; n];
    for (&v, &b) in ordering.order().iter().zip(ordering.back_degrees()) {
        counts[v] = d - b;
    }
    let aug = g.add_leaves(&counts)?;
    let big = &aug.graph;
    let mut eta = IndexFunction::for_graph(big);
    for (slot, &c) in eta.vertices.iter_mut().zip(&counts) {
        *slot = c as u32;
    }
    for e in 0..g.edge_count() {
        eta.edges[e] = 1;
    }
    let a = DiffMatrix::canonical(big);
    let r0 = kernel.modular(&a.assemble(&eta)?, p)?;
    let mut trace = Trace::default();
    trace.push("ordering", format!("{:?} back degrees {:?}", ordering.order(), ordering.back_degrees()));
    trace.push("leaves", format!("counts {counts:?}, {} vertices, {} edges", big.vertex_count(), big.edge_count()));
    trace.push("replay", format!("M_0 residue {r0}"));

    let mut cur = eta.clone();
    let mut replay = Vec::with_capacity(n);
    let mut prev = r0;
    for (i, &v) in ordering.order().iter().enumerate() {
        let mut moved = false;
        for &e in g.incident_edges(v) {
            if ordering.position(g.other_end(e, v)) < i {
                cur.edges[e] -= 1;
                cur.vertices[v] += 1;
                moved = true;
            }
        }
        let residue = if moved { kernel.modular(&a.assemble(&cur)?, p)? } else { prev };
        prev = residue;
        let copies_ok = ordering.order()[..=i].iter().all(|&w| cur.vertices[w] as usize == d);
        trace.push("replay", format!("M_{} after v{v}: residue {residue}", i + 1));
        if residue != r0 || !copies_ok {
            return Err(Error::internal(format!("replay step {} breaks the cascade", i + 1)).into());
        }
        replay.push(ReplayStep {
            vertex: v,
            residue,
            copies_ok,
        });
    }
    let terminal = replay.last().map_or(r0, |s| s.residue);
    let fact = (1..=d as u64).fold(1 % p, |acc, i| acc * i % p);
    let expect = pow_mod(fact, n as u64, p);
    if terminal != expect && terminal != (p - expect) % p {
        return Err(Error::internal("terminal permanent is not (d!)^n up to sign").into());
    }
    trace.push("terminal", format!("(d!)^n = {expect} mod {p}, per(M_n) = {terminal}"));
    let certificate = Certificate::seal_with_residue(big, Method::LeafAugmented, p, eta.clone(), trace, r0)?;
    Ok(AlmostCertificate {
        augmented: aug,
        ordering,
        eta,
        certificate,
        replay,
        terminal,
    })
}

#[derive(Debug, Clone)]
pub struct PruneOutcome {
    /// Removed leaves, in the numbering of the input graph.
    pub removed: Vec<usize>,
    pub graph: Graph,
    /// Input vertex to output vertex.
    pub vertex_map: Vec<Option<usize>>,
    pub certificate: Certificate,
}

/// Index function determined by a leaf set: zero on edges touching it,
/// one elsewhere, and each vertex counts its neighbours in the set.
fn leaf_eta(g: &Graph, in_x: &[bool]) -> IndexFunction {
    let mut eta = IndexFunction::for_graph(g);
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        if in_x[u] || in_x[v] {
            let anchor = if in_x[u] { v } else { u };
            eta.vertices[anchor] += 1;
        } else {
            eta.edges[e] = 1;
        }
    }
    eta
}

/// Removes leaves until the all-edges index function is nonsingular
/// modulo `p`, searching the expansion branches in lexicographic order.
pub fn prune_leaves(g: &Graph, eta: &IndexFunction, leaves: &[usize], p: u64) -> Result<PruneOutcome> {
    prune_leaves_with(&env_kernel()?, g, eta, leaves, p)
}

pub fn prune_leaves_with(
    kernel: &PermanentKernel,
    g: &Graph,
    eta: &IndexFunction,
    leaves: &[usize],
    p: u64,
) -> Result<PruneOutcome> {
    prune(kernel, g, eta, leaves, p, false)
}

fn prune(
    kernel: &PermanentKernel,
    g: &Graph,
    eta: &IndexFunction,
    leaves: &[usize],
    p: u64,
    eta_nonzero_known: bool,
) -> Result<PruneOutcome> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    eta.check_shape(g)?;
    let mut x: Vec<usize> = leaves.to_vec();
    x.sort_unstable();
    x.dedup();
    if x.len() > PRUNE_LEAF_CAP {
        return Err(Error::InvalidParameter(format!(
            "{} leaves exceed the pruning cap {PRUNE_LEAF_CAP}",
            x.len()
        )));
    }
    let n = g.vertex_count();
    let mut in_x = vec![false; n];
    for &l in &x {
        if l >= n || g.degree(l) != 1 {
            return Err(Error::InvalidParameter(format!("vertex {l} is not a leaf")));
        }
        in_x[l] = true;
    }
    if x.iter().any(|&l| in_x[g.neighbors(l)[0]]) {
        return Err(Error::InvalidParameter("two leaves of the set are adjacent".into()));
    }
    if *eta != leaf_eta(g, &in_x) {
        return Err(Error::InvalidParameter("index function does not match the leaf set".into()));
    }
    if !eta_nonzero_known && kernel.modular(&DiffMatrix::canonical(g).assemble(eta)?, p)? == 0 {
        return Err(Error::VanishingPermanent(p));
    }

    let mut trace = Trace::default();
    let mut cur = g.clone();
    let mut orig_of: Vec<usize> = (0..n).collect();
    let mut removed = Vec::new();
    let residue = loop {
        let a = DiffMatrix::canonical(&cur);
        let b = kernel.modular(&a.assemble(&IndexFunction::all_edges(&cur))?, p)?;
        let cur_x: Vec<usize> = (0..cur.vertex_count()).filter(|&v| in_x[orig_of[v]]).collect();
        trace.push("prune", format!("per(B) = {b} mod {p} with {} candidate leaves", cur_x.len()));
        if b != 0 {
            break b;
        }
        let mut flags = vec![false; cur.vertex_count()];
        for &l in &cur_x {
            flags[l] = true;
        }
        let base = leaf_eta(&cur, &flags);
        let k = cur_x.len();
        let mut chosen = None;
        // First vector entry is the most significant bit.
        for mask in 1u64..(1u64 << k) {
            let mut trial = base.clone();
            for (idx, &l) in cur_x.iter().enumerate() {
                if mask >> (k - 1 - idx) & 1 == 1 {
                    trial.vertices[l] = 1;
                    trial.vertices[cur.neighbors(l)[0]] -= 1;
                }
            }
            if kernel.modular(&a.assemble(&trial)?, p)? != 0 {
                chosen = Some(mask);
                break;
            }
        }
        let mask = chosen.ok_or_else(|| Error::internal("every expansion branch vanishes although per(B) does"))?;
        let z: Vec<usize> = (0..k).filter(|idx| mask >> (k - 1 - idx) & 1 == 1).map(|idx| cur_x[idx]).collect();
        let z_orig: Vec<usize> = z.iter().map(|&l| orig_of[l]).collect();
        trace.push("remove", format!("{z_orig:?}"));
        for &l in &z {
            in_x[orig_of[l]] = false;
        }
        removed.extend(z_orig);
        let (next, map, _) = cur.remove_vertices(&z);
        let mut next_orig = vec![0; next.vertex_count()];
        for (old, new) in map.iter().enumerate() {
            if let Some(new) = new {
                next_orig[*new] = orig_of[old];
            }
        }
        cur = next;
        orig_of = next_orig;
    };
    removed.sort_unstable();
    let mut vertex_map = vec![None; n];
    for (new, &old) in orig_of.iter().enumerate() {
        vertex_map[old] = Some(new);
    }
    let eta = IndexFunction::all_edges(&cur);
    let certificate = Certificate::seal_with_residue(&cur, Method::LeafPruned, p, eta, trace, residue)?;
    Ok(PruneOutcome {
        removed,
        graph: cur,
        vertex_map,
        certificate,
    })
}

#[derive(Debug, Clone)]
pub struct SupergraphCertificate {
    pub almost: AlmostCertificate,
    /// Leaves removed from the augmented graph.
    pub removed: Vec<usize>,
    /// The certified supergraph; the input graph is its prefix.
    pub graph: Graph,
    /// Leaves kept on each original vertex.
    pub added: Vec<usize>,
    pub certificate: Certificate,
}

/// A `(1, 2)` certificate for a supergraph obtained by adding at most
/// `d - d^-(v)` leaves to each vertex.
pub fn certify_12_supergraph(g: &Graph, d: usize, ordering: Option<&VertexOrdering>) -> CertResult<SupergraphCertificate> {
    certify_12_supergraph_with(&env_kernel()?, g, d, ordering)
}

pub fn certify_12_supergraph_with(
    kernel: &PermanentKernel,
    g: &Graph,
    d: usize,
    ordering: Option<&VertexOrdering>,
) -> CertResult<SupergraphCertificate> {
    let almost = certify_almost_12_with(kernel, g, d, ordering)?;
    let big = &almost.augmented.graph;
    let leaves: Vec<usize> = almost.augmented.leaves().collect();
    let p = almost.certificate.p;
    let pruned = prune(kernel, big, &almost.eta, &leaves, p, true)?;
    let mut added = vec![0usize; g.vertex_count()];
    for leaf in almost.augmented.leaves() {
        if pruned.vertex_map[leaf].is_some() {
            added[almost.augmented.anchor(leaf)] += 1;
        }
    }
    Ok(SupergraphCertificate {
        removed: pruned.removed,
        graph: pruned.graph,
        added,
        certificate: pruned.certificate,
        almost,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificates::verify_certificate;

    #[test]
    fn k2_leaf_augmented() {
        let g = Graph::complete(2);
        let ord = VertexOrdering::new(&g, vec![0, 1]).unwrap();
        let r = certify_almost_12(&g, 1, Some(&ord)).unwrap();
        assert_eq!(r.augmented.graph.edges(), &[(0, 1), (0, 2)]);
        assert_eq!(r.eta.vertices, vec![1, 0, 0]);
        assert_eq!(r.eta.edges, vec![1, 0]);
        let m = DiffMatrix::canonical(&r.augmented.graph).assemble(&r.eta).unwrap();
        assert_eq!(m.to_rows(), vec![vec![-1, 0], vec![-1, -1]]);
        assert_eq!(r.certificate.residue, 1);
        assert!(r.replay.iter().all(|s| s.copies_ok && s.residue == 1));
        assert!(verify_certificate(&r.augmented.graph, &r.certificate).is_valid());
    }

    #[test]
    fn k2_supergraph_is_p3() {
        let g = Graph::complete(2);
        let ord = VertexOrdering::new(&g, vec![0, 1]).unwrap();
        let s = certify_12_supergraph(&g, 1, Some(&ord)).unwrap();
        assert!(s.removed.is_empty());
        assert_eq!(s.graph.edge_count(), 2);
        assert_eq!(s.graph.edges(), &[(0, 1), (0, 2)]);
        assert_eq!(s.added, vec![1, 0]);
        assert_eq!(s.certificate.method, Method::LeafPruned);
        assert!(verify_certificate(&s.graph, &s.certificate).is_valid());
    }

    #[test]
    fn composite_modulus_rejected() {
        assert!(matches!(
            certify_almost_12(&Graph::complete(4), 3, None),
            Err(CertifyError::Error(Error::NotPrime(4)))
        ));
        assert!(matches!(
            certify_almost_12(&Graph::complete(4), 2, None),
            Err(CertifyError::NotCertified { .. })
        ));
    }

    #[test]
    fn star_pruning() {
        // Star with centre 0 and leaves 1, 2, 3 plus a tail 0-4-5.
        let g = Graph::new(6, [(0, 1), (0, 2), (0, 3), (0, 4), (4, 5)]).unwrap();
        let x = [1, 2, 3];
        let mut in_x = vec![false; 6];
        for &l in &x {
            in_x[l] = true;
        }
        let eta = leaf_eta(&g, &in_x);
        assert_eq!(eta.vertices[0], 3);
        let kernel = PermanentKernel::default();
        match prune_leaves_with(&kernel, &g, &eta, &x, 2) {
            Ok(out) => {
                assert!(out.removed.len() <= x.len());
                assert!(out.removed.iter().all(|l| x.contains(l)));
                assert!(verify_certificate(&out.graph, &out.certificate).is_valid());
            }
            Err(Error::VanishingPermanent(_)) => {}
            Err(e) => panic!("{e}"),
        }
        assert!(prune_leaves_with(&kernel, &g, &IndexFunction::all_edges(&g), &x, 2).is_err());
    }
}
