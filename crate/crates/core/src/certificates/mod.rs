//! Certificate construction and replay.
//!
//! Every constructor returns a [`Certificate`] whose index function has a
//! permanent that is nonzero modulo the recorded prime. Failed graph
//! hypotheses come back as [`CertifyError::NotCertified`]; bad parameters
//! and broken invariants as [`CertifyError::Error`].

mod d2;
mod leaves;
mod one_k;
mod orient;

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::algebra::{is_prime, ColumnExpr, DiffMatrix, IndexFunction, PermanentKernel};
use crate::error::{Error, Result};
use crate::graph::Graph;

pub use d2::{certify_d2, certify_d2_traced, CombPlus, WalkEnd};
pub use leaves::{
    certify_12_supergraph, certify_12_supergraph_with, certify_almost_12, certify_almost_12_with, prune_leaves,
    prune_leaves_with, AlmostCertificate, PruneOutcome, ReplayStep, SupergraphCertificate,
};
pub use one_k::{
    certify_1k, certify_1k_with, double_vertex_as_edges, one_k_plan, pair_as_edges, OneKPlan, VertexDoubler,
};
pub use orient::{certify_k2_mad, certify_k2_mad_with, certify_orientation, certify_orientation_with};

pub const SCHEMA_VERSION: u32 = 1;
pub const PRIME_TABLE_LIMIT: u64 = 10_000;
/// Largest leaf set `prune_leaves` will search over.
pub const PRUNE_LEAF_CAP: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CertifyError {
    #[error("not certified: {hypothesis} does not hold ({witness})")]
    NotCertified { hypothesis: String, witness: String },
    #[error(transparent)]
    Error(#[from] Error),
}

impl CertifyError {
    pub(crate) fn hypothesis(hypothesis: &str, witness: impl Into<String>) -> Self {
        CertifyError::NotCertified {
            hypothesis: hypothesis.into(),
            witness: witness.into(),
        }
    }
}

pub type CertResult<T> = std::result::Result<T, CertifyError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    OneKNonbipartite,
    OneKBipartite,
    LeafAugmented,
    LeafPruned,
    DegenerateD2,
    Orientation,
    MadK2,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::OneKNonbipartite => "one-k-nonbipartite",
            Method::OneKBipartite => "one-k-bipartite",
            Method::LeafAugmented => "leaf-augmented",
            Method::LeafPruned => "leaf-pruned",
            Method::DegenerateD2 => "degenerate-d2",
            Method::Orientation => "orientation",
            Method::MadK2 => "mad-k2",
        }
    }

    /// Largest vertex and edge counts a certificate of this method may
    /// carry under modulus `p`, and whether edges must be exactly one.
    fn bounds(self, p: u64) -> (u64, u64, bool) {
        match self {
            Method::OneKNonbipartite | Method::OneKBipartite => (0, p - 1, false),
            Method::LeafAugmented => (p - 1, 1, false),
            Method::LeafPruned => (0, 1, true),
            Method::DegenerateD2 => (p.saturating_sub(2), 1, false),
            Method::Orientation | Method::MadK2 => (p - 1, 1, false),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `(n, m, FNV-1a-64 of the canonical edge list)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fingerprint {
    pub n: usize,
    pub m: usize,
    pub hash: String,
}

impl Fingerprint {
    pub fn of(g: &Graph) -> Self {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h = OFFSET;
        for &(u, v) in g.edges() {
            for byte in (u as u64).to_le_bytes().into_iter().chain((v as u64).to_le_bytes()) {
                h ^= byte as u64;
                h = h.wrapping_mul(PRIME);
            }
        }
        Fingerprint {
            n: g.vertex_count(),
            m: g.edge_count(),
            hash: format!("{h:016x}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub step: usize,
    pub kind: String,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace(Vec<TraceStep>);

impl Trace {
    pub fn push(&mut self, kind: &str, detail: impl Into<String>) {
        let step = self.0.len();
        self.0.push(TraceStep {
            step,
            kind: kind.into(),
            detail: detail.into(),
        });
    }

    pub fn steps(&self) -> &[TraceStep] {
        &self.0
    }

    pub fn into_steps(self) -> Vec<TraceStep> {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub schema: u32,
    pub graph: Fingerprint,
    pub method: Method,
    pub p: u64,
    pub residue: u64,
    pub eta: IndexFunction,
    pub trace: Vec<TraceStep>,
}

impl Certificate {
    /// Computes the residue and checks the method bounds; a zero residue or
    /// a bound violation is an internal error.
    pub fn seal(
        kernel: &PermanentKernel,
        g: &Graph,
        method: Method,
        p: u64,
        eta: IndexFunction,
        trace: Trace,
    ) -> Result<Certificate> {
        eta.check_shape(g)?;
        let residue = kernel.modular(&DiffMatrix::canonical(g).assemble(&eta)?, p)?;
        Certificate::seal_with_residue(g, method, p, eta, trace, residue)
    }

    /// As [`Certificate::seal`] with a residue the caller already computed.
    pub(crate) fn seal_with_residue(
        g: &Graph,
        method: Method,
        p: u64,
        eta: IndexFunction,
        trace: Trace,
        residue: u64,
    ) -> Result<Certificate> {
        let cert = Certificate {
            schema: SCHEMA_VERSION,
            graph: Fingerprint::of(g),
            method,
            p,
            residue,
            eta,
            trace: trace.into_steps(),
        };
        let reason = match static_check(g, &cert) {
            Some(reason) => reason,
            None if residue == 0 => Reason::ZeroResidue,
            None => return Ok(cert),
        };
        Err(Error::internal(format!("fresh {method} certificate rejected: {reason}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(text: &str) -> Result<Certificate> {
        let cert: Certificate = serde_json::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("certificate JSON: {e}")))?;
        if cert.schema != SCHEMA_VERSION {
            return Err(Error::InvalidParameter(format!("unsupported certificate schema {}", cert.schema)));
        }
        Ok(cert)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reason {
    FingerprintMismatch,
    ShapeMismatch,
    InvalidIndexFunction,
    NotPrime,
    ResidueMismatch { recorded: u64, actual: u64 },
    ZeroResidue,
    BoundViolation(String),
    Unverifiable(String),
}

impl Reason {
    pub fn code(&self) -> &'static str {
        match self {
            Reason::FingerprintMismatch => "fingerprint-mismatch",
            Reason::ShapeMismatch => "shape-mismatch",
            Reason::InvalidIndexFunction => "invalid",
            Reason::NotPrime => "not-prime",
            Reason::ResidueMismatch { .. } => "residue-mismatch",
            Reason::ZeroResidue => "zero-residue",
            Reason::BoundViolation(_) => "bound-violation",
            Reason::Unverifiable(_) => "unverifiable",
        }
    }
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reason::ResidueMismatch { recorded, actual } => {
                write!(f, "residue-mismatch: recorded {recorded}, recomputed {actual}")
            }
            Reason::BoundViolation(s) | Reason::Unverifiable(s) => write!(f, "{}: {s}", self.code()),
            _ => f.write_str(self.code()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    Invalid(Reason),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }
}

/// Replays a certificate from scratch; the trace is not consulted.
pub fn verify_certificate(g: &Graph, c: &Certificate) -> Verdict {
    match PermanentKernel::from_env() {
        Ok(k) => verify_with(&k, g, c),
        Err(e) => Verdict::Invalid(Reason::Unverifiable(e.to_string())),
    }
}

/// Everything except the permanent.
fn static_check(g: &Graph, c: &Certificate) -> Option<Reason> {
    if c.graph != Fingerprint::of(g) {
        return Some(Reason::FingerprintMismatch);
    }
    if !c.eta.matches(g) {
        return Some(Reason::ShapeMismatch);
    }
    if !c.eta.is_valid() {
        return Some(Reason::InvalidIndexFunction);
    }
    if !is_prime(c.p) || c.p >= 1 << 31 {
        return Some(Reason::NotPrime);
    }
    let (vmax, emax, exact_edges) = c.method.bounds(c.p);
    if let Some(v) = (0..g.vertex_count()).find(|&v| c.eta.vertices[v] as u64 > vmax) {
        return Some(Reason::BoundViolation(format!(
            "eta(v{v}) = {} exceeds {vmax} for {}",
            c.eta.vertices[v], c.method
        )));
    }
    if let Some(e) = (0..g.edge_count())
        .find(|&e| c.eta.edges[e] as u64 > emax || (exact_edges && c.eta.edges[e] as u64 != emax))
    {
        return Some(Reason::BoundViolation(format!(
            "eta(e{e}) = {} out of range for {}",
            c.eta.edges[e], c.method
        )));
    }
    None
}

pub fn verify_with(kernel: &PermanentKernel, g: &Graph, c: &Certificate) -> Verdict {
    if let Some(reason) = static_check(g, c) {
        return Verdict::Invalid(reason);
    }
    let actual = match DiffMatrix::canonical(g)
        .assemble(&c.eta)
        .and_then(|m| kernel.modular(&m, c.p))
    {
        Ok(r) => r,
        Err(e) => return Verdict::Invalid(Reason::Unverifiable(e.to_string())),
    };
    if actual != c.residue {
        return Verdict::Invalid(Reason::ResidueMismatch {
            recorded: c.residue,
            actual,
        });
    }
    if actual == 0 {
        return Verdict::Invalid(Reason::ZeroResidue);
    }
    Verdict::Valid
}

fn prime_table() -> &'static [u64] {
    static TABLE: OnceLock<Vec<u64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = PRIME_TABLE_LIMIT as usize;
        let mut sieve = vec![true; n + 1];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2;
        while i * i <= n {
            if sieve[i] {
                for j in (i * i..=n).step_by(i) {
                    sieve[j] = false;
                }
            }
            i += 1;
        }
        (0..=n).filter(|&i| sieve[i]).map(|i| i as u64).collect()
    })
}

/// Smallest tabulated prime strictly greater than `d`.
pub fn choose_prime(d: u64) -> Result<u64> {
    if d == 0 {
        return Err(Error::InvalidParameter("choose_prime needs d >= 1".into()));
    }
    let table = prime_table();
    let idx = table.partition_point(|&p| p <= d);
    table.get(idx).copied().ok_or(Error::PrimeTableExceeded(d))
}

/// Numeric check that `expr` evaluates to the same column as `target`.
pub(crate) fn check_expr(a: &DiffMatrix, expr: &ColumnExpr, target: &ColumnExpr) -> Result<()> {
    if a.evaluate_column(expr)? != a.evaluate_column(target)? {
        return Err(Error::internal(format!("column identity {expr} = {target} fails")));
    }
    Ok(())
}

/// Kernel from the environment cap.
pub(crate) fn env_kernel() -> Result<PermanentKernel> {
    PermanentKernel::from_env()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes() {
        assert_eq!(choose_prime(2).unwrap(), 3);
        assert_eq!(choose_prime(3).unwrap(), 5);
        assert_eq!(choose_prime(5).unwrap(), 7);
        assert_eq!(choose_prime(1).unwrap(), 2);
        assert_eq!(choose_prime(9_972).unwrap(), 9_973);
        assert_eq!(choose_prime(9_973), Err(Error::PrimeTableExceeded(9_973)));
        assert!(choose_prime(0).is_err());
    }

    #[test]
    fn fingerprint_depends_on_edges() {
        let a = Fingerprint::of(&Graph::path(3));
        let b = Fingerprint::of(&Graph::new(3, [(0, 1), (0, 2)]).unwrap());
        assert_eq!((a.n, a.m), (3, 2));
        assert_ne!(a.hash, b.hash);
        assert_eq!(a.hash.len(), 16);
        assert_eq!(Fingerprint::of(&Graph::empty(2)).hash, "cbf29ce484222325");
    }

    #[test]
    fn json_field_order() {
        let g = Graph::path(3);
        let mut t = Trace::default();
        t.push("note", "p3");
        let c = Certificate::seal(&PermanentKernel::default(), &g, Method::LeafPruned, 2, IndexFunction::all_edges(&g), t)
            .unwrap();
        let text = serde_json::to_string(&c).unwrap();
        let keys = ["\"schema\"", "\"graph\"", "\"method\"", "\"p\"", "\"residue\"", "\"eta\"", "\"trace\""];
        let pos: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        assert!(text.contains("\"method\":\"leaf-pruned\""));
        assert_eq!(Certificate::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn verifier_rejections() {
        let g = Graph::path(3);
        let kernel = PermanentKernel::default();
        let c = Certificate::seal(&kernel, &g, Method::LeafPruned, 3, IndexFunction::all_edges(&g), Trace::default())
            .unwrap();
        assert_eq!(c.residue, 2);
        assert!(verify_certificate(&g, &c).is_valid());

        let mut bad = c.clone();
        bad.residue = 1;
        assert_eq!(verify_certificate(&g, &bad), Verdict::Invalid(Reason::ResidueMismatch { recorded: 1, actual: 2 }));

        let mut bad = c.clone();
        bad.eta.edges[0] = 2;
        assert!(!verify_certificate(&g, &bad).is_valid());

        let mut bad = c.clone();
        bad.p = 4;
        assert_eq!(verify_certificate(&g, &bad), Verdict::Invalid(Reason::NotPrime));

        let other = Graph::new(3, [(0, 1), (0, 2)]).unwrap();
        assert_eq!(verify_certificate(&other, &c), Verdict::Invalid(Reason::FingerprintMismatch));

        let k3 = Graph::complete(3);
        let zero = Certificate {
            graph: Fingerprint::of(&k3),
            eta: IndexFunction::all_edges(&k3),
            residue: 0,
            ..c
        };
        assert_eq!(verify_certificate(&k3, &zero), Verdict::Invalid(Reason::ZeroResidue));
    }
}
