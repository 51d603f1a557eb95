//! Command-line front end. [`run`] never panics on bad input; it maps
//! outcomes onto exit codes 0 (success), 2 (honest negative) and 1 (error).

use std::fmt::Write as _;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::algebra::{IntMatrix, PermanentKernel};
use crate::certificates::{
    certify_12_supergraph_with, certify_1k_with, certify_almost_12_with, certify_d2_traced, certify_k2_mad_with,
    certify_orientation_with, verify_with, CertifyError, Certificate, Verdict,
};
use crate::error::Error;
use crate::graph::{canonical_orientation, parse_graph, Graph, GraphFormat, Orientation};
use crate::oracle::{enumerate_labeled_graphs, gen_d_degenerate, BackDegree};
use crate::solver::{find_certified_weighting, find_weighting, improper_edges, ListAssignment, Weighting};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NEGATIVE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "twchoose", version, about = "Certificates and solvers for list total weightings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a certificate for a graph.
    Certify(CertifyArgs),
    /// Find a proper weighting from lists, guided by a certificate.
    Solve(SolveArgs),
    /// Re-check a certificate or a weighting.
    Verify(VerifyArgs),
    /// Permanent of an integer matrix.
    Permanent(PermanentArgs),
    /// Certify every graph of an enumeration or a random sample; CSV out.
    Batch(BatchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Graph6,
    Edgelist,
}

impl From<FormatArg> for GraphFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Graph6 => GraphFormat::Graph6,
            FormatArg::Edgelist => GraphFormat::EdgeList,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    #[value(name = "1k")]
    OneK,
    Almost12,
    Prune12,
    D2,
    Orient,
    K2mad,
}

impl MethodArg {
    fn name(self) -> &'static str {
        match self {
            MethodArg::OneK => "1k",
            MethodArg::Almost12 => "almost12",
            MethodArg::Prune12 => "prune12",
            MethodArg::D2 => "d2",
            MethodArg::Orient => "orient",
            MethodArg::K2mad => "k2mad",
        }
    }
}

#[derive(Debug, Args)]
struct GraphInput {
    /// Graph file, or `-` for standard input.
    graph: String,
    #[arg(long, value_enum, default_value = "edgelist")]
    format: FormatArg,
}

#[derive(Debug, Args)]
struct MethodParams {
    #[arg(long, value_enum)]
    method: MethodArg,
    #[arg(short = 'k')]
    k: Option<usize>,
    #[arg(short = 'd')]
    d: Option<usize>,
    /// Largest matrix the permanent kernel accepts; overrides TWCHOOSE_MAX_DIM.
    #[arg(long)]
    max_dim: Option<usize>,
}

#[derive(Debug, Args)]
struct CertifyArgs {
    #[command(flatten)]
    input: GraphInput,
    #[command(flatten)]
    params: MethodParams,
    /// Arc list `tail head`, one per line; canonical orientation if absent.
    #[arg(long)]
    orientation: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the graph a supergraph method certified.
    #[arg(long)]
    graph_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    input: GraphInput,
    #[arg(long)]
    cert: PathBuf,
    #[arg(long)]
    lists: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    max_dim: Option<usize>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    input: GraphInput,
    #[arg(long, conflicts_with = "weighting", required_unless_present = "weighting")]
    cert: Option<PathBuf>,
    #[arg(long)]
    weighting: Option<PathBuf>,
    /// Also check that the weighting picks from these lists.
    #[arg(long, requires = "weighting")]
    lists: Option<PathBuf>,
    #[arg(long)]
    max_dim: Option<usize>,
}

#[derive(Debug, Args)]
struct PermanentArgs {
    /// Matrix file, or `-` for standard input.
    #[arg(default_value = "-")]
    matrix: String,
    /// Reduce modulo this prime.
    #[arg(short = 'p')]
    p: Option<u64>,
    #[arg(long)]
    max_dim: Option<usize>,
}

#[derive(Debug, Args)]
struct BatchArgs {
    /// All labeled graphs on N vertices.
    #[arg(long, conflicts_with = "random")]
    enumerate: Option<usize>,
    #[arg(long, requires = "enumerate")]
    connected: bool,
    #[arg(long, requires = "enumerate")]
    non_bipartite: bool,
    #[arg(long, requires = "enumerate")]
    max_degeneracy: Option<usize>,
    /// COUNT random connected graphs with positive back degrees.
    #[arg(long, requires_all = ["n", "gen_d"], required_unless_present = "enumerate")]
    random: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// Maximum back degree of the random generator.
    #[arg(long)]
    gen_d: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    params: MethodParams,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// CSV destination; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON lines with one certificate per certified graph.
    #[arg(long)]
    certs_out: Option<PathBuf>,
    /// Fill the wall_ms column; it is left empty otherwise so output stays reproducible.
    #[arg(long)]
    timing: bool,
}

#[derive(Debug)]
enum Failure {
    Negative(String),
    Error(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e.to_string())
    }
}

impl From<CertifyError> for Failure {
    fn from(e: CertifyError) -> Self {
        match e {
            CertifyError::NotCertified { .. } => Failure::Negative(e.to_string()),
            CertifyError::Error(e) => Failure::Error(e.to_string()),
        }
    }
}

type CliResult = std::result::Result<(), Failure>;

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let outcome = match cli.command {
        Command::Certify(a) => cmd_certify(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Permanent(a) => cmd_permanent(a),
        Command::Batch(a) => cmd_batch(a),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(Failure::Negative(msg)) => {
            eprintln!("{msg}");
            EXIT_NEGATIVE
        }
        Err(Failure::Error(msg)) => {
            eprintln!("error: {msg}");
            EXIT_ERROR
        }
    }
}

fn read_input(path: &str) -> Result<String, Failure> {
    if path == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::Error(format!("standard input: {e}")))?;
        Ok(s)
    } else {
        read_file(Path::new(path))
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Error(format!("{}: {e}", path.display())))
}

fn write_output(path: Option<&Path>, text: &str) -> CliResult {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Error(format!("{}: {e}", p.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::Error(format!("standard output: {e}")))
        }
    }
}

fn with_newline(mut s: String) -> String {
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

fn load_graph(input: &GraphInput) -> Result<Graph, Failure> {
    let text = read_input(&input.graph)?;
    Ok(parse_graph(&text, input.format.into())?)
}

fn kernel(max_dim: Option<usize>) -> Result<PermanentKernel, Failure> {
    Ok(match max_dim {
        Some(cap) => PermanentKernel::new(cap)?,
        None => PermanentKernel::from_env()?,
    })
}

fn required(value: Option<usize>, flag: &str, method: MethodArg) -> Result<usize, Failure> {
    value.ok_or_else(|| Failure::Error(format!("method {} needs {flag}", method.name())))
}

fn parse_orientation(g: &Graph, text: &str) -> Result<Orientation, Failure> {
    let mut arcs: Vec<Option<(usize, usize)>> = vec![None; g.edge_count()];
    for (ln, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let nums: Vec<usize> = line
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| Failure::Error(format!("orientation line {}: expected two vertex ids", ln + 1)))?;
        let [t, h] = nums[..] else {
            return Err(Failure::Error(format!("orientation line {}: expected two vertex ids", ln + 1)));
        };
        let e = (t < g.vertex_count() && h < g.vertex_count())
            .then(|| g.find_edge(t, h))
            .flatten()
            .ok_or_else(|| Failure::Error(format!("orientation line {}: ({t}, {h}) is not an edge", ln + 1)))?;
        if arcs[e].replace((t, h)).is_some() {
            return Err(Failure::Error(format!("orientation line {}: edge oriented twice", ln + 1)));
        }
    }
    let arcs: Option<Vec<_>> = arcs.into_iter().collect();
    let arcs = arcs.ok_or_else(|| Failure::Error("orientation does not cover every edge".into()))?;
    Ok(Orientation::new(g, arcs)?)
}

/// A certificate plus the graph it certifies when that differs from the input.
fn certify_graph(
    kernel: &PermanentKernel,
    g: &Graph,
    params: &MethodParams,
    orientation: Option<&Orientation>,
) -> Result<(Certificate, Option<Graph>), Failure> {
    let method = params.method;
    Ok(match method {
        MethodArg::OneK => {
            let k = required(params.k, "-k", method)?;
            let d = required(params.d, "-d", method)?;
            (certify_1k_with(kernel, g, k as u64, d)?, None)
        }
        MethodArg::Almost12 => {
            let d = required(params.d, "-d", method)?;
            let a = certify_almost_12_with(kernel, g, d, None)?;
            (a.certificate, Some(a.augmented.graph))
        }
        MethodArg::Prune12 => {
            let d = required(params.d, "-d", method)?;
            let s = certify_12_supergraph_with(kernel, g, d, None)?;
            (s.certificate, Some(s.graph))
        }
        MethodArg::D2 => {
            let d = required(params.d, "-d", method)?;
            (certify_d2_traced(kernel, g, d)?.0, None)
        }
        MethodArg::Orient => {
            let canonical;
            let o = match orientation {
                Some(o) => o,
                None => {
                    canonical = canonical_orientation(g);
                    &canonical
                }
            };
            (certify_orientation_with(kernel, g, o)?, None)
        }
        MethodArg::K2mad => {
            let k = required(params.k, "-k", method)?;
            (certify_k2_mad_with(kernel, g, k)?, None)
        }
    })
}

fn cmd_certify(a: CertifyArgs) -> CliResult {
    let kernel = kernel(a.params.max_dim)?;
    let g = load_graph(&a.input)?;
    let orientation = match &a.orientation {
        Some(path) => {
            if a.params.method != MethodArg::Orient {
                return Err(Failure::Error("--orientation applies to --method orient only".into()));
            }
            Some(parse_orientation(&g, &read_file(path)?)?)
        }
        None => None,
    };
    let (cert, certified_graph) = certify_graph(&kernel, &g, &a.params, orientation.as_ref())?;
    if let Some(path) = &a.graph_out {
        let target = certified_graph.as_ref().unwrap_or(&g);
        write_output(Some(path), &with_newline(target.to_edge_list()))?;
    }
    write_output(a.out.as_deref(), &with_newline(cert.to_json()))
}

fn verdict_of(kernel: &PermanentKernel, g: &Graph, cert: &Certificate) -> CliResult {
    match verify_with(kernel, g, cert) {
        Verdict::Valid => Ok(()),
        Verdict::Invalid(reason) => Err(Failure::Error(format!("certificate rejected: {reason}"))),
    }
}

fn cmd_solve(a: SolveArgs) -> CliResult {
    let kernel = kernel(a.max_dim)?;
    let g = load_graph(&a.input)?;
    let cert = Certificate::from_json(&read_file(&a.cert)?)?;
    verdict_of(&kernel, &g, &cert)?;
    let lists = ListAssignment::from_json(&read_file(&a.lists)?)?;
    lists.check_shape(&g)?;
    let sized = (0..g.vertex_count()).all(|v| lists.vertices()[v].len() > cert.eta.vertices[v] as usize)
        && (0..g.edge_count()).all(|e| lists.edges()[e].len() > cert.eta.edges[e] as usize);
    let phi = if sized {
        find_certified_weighting(&g, &lists, &cert.eta)?
    } else {
        eprintln!("lists are smaller than the certificate requires; searching without a guarantee");
        find_weighting(&g, &lists)?.ok_or_else(|| Failure::Negative("no proper weighting in these lists".into()))?
    };
    if !improper_edges(&g, &phi).is_empty() || !phi.respects(&lists) {
        return Err(Failure::Error("solver produced an invalid weighting".into()));
    }
    write_output(a.out.as_deref(), &with_newline(phi.to_json()))
}

fn cmd_verify(a: VerifyArgs) -> CliResult {
    let kernel = kernel(a.max_dim)?;
    let g = load_graph(&a.input)?;
    if let Some(path) = &a.cert {
        let cert = Certificate::from_json(&read_file(path)?)?;
        return match verify_with(&kernel, &g, &cert) {
            Verdict::Valid => {
                println!("valid: {} certificate, residue {} mod {}", cert.method, cert.residue, cert.p);
                Ok(())
            }
            Verdict::Invalid(reason) => Err(Failure::Negative(format!("invalid: {reason}"))),
        };
    }
    let Some(path) = &a.weighting else {
        return Err(Failure::Error("nothing to verify".into()));
    };
    let phi = Weighting::from_json(&read_file(path)?)?;
    phi.check_shape(&g)?;
    if let Some(lp) = &a.lists {
        let lists = ListAssignment::from_json(&read_file(lp)?)?;
        lists.check_shape(&g)?;
        if !phi.respects(&lists) {
            return Err(Failure::Negative("invalid: weighting leaves the lists".into()));
        }
    }
    let bad = improper_edges(&g, &phi);
    if bad.is_empty() {
        println!("valid: proper weighting");
        Ok(())
    } else {
        let shown: Vec<String> = bad.iter().map(|&e| format!("{:?}", g.edge(e))).collect();
        Err(Failure::Negative(format!("invalid: equal sums across {}", shown.join(", "))))
    }
}

fn cmd_permanent(a: PermanentArgs) -> CliResult {
    let kernel = kernel(a.max_dim)?;
    let m = IntMatrix::parse(&read_input(&a.matrix)?)?;
    let text = match a.p {
        Some(p) => kernel.modular(&m, p)?.to_string(),
        None => kernel.exact(&m)?.to_string(),
    };
    write_output(None, &with_newline(text))
}

struct BatchRow {
    graph6: String,
    n: usize,
    m: usize,
    status: &'static str,
    cert: Option<Certificate>,
    wall_ms: f64,
}

fn cmd_batch(a: BatchArgs) -> CliResult {
    let kernel = kernel(a.params.max_dim)?;
    if a.jobs == 0 {
        return Err(Failure::Error("--jobs must be at least 1".into()));
    }
    let graphs: Vec<Graph> = match (a.enumerate, a.random) {
        (Some(n), _) => {
            if n > 7 {
                return Err(Failure::Error("--enumerate supports at most 7 vertices".into()));
            }
            let (connected, non_bip, max_deg) = (a.connected, a.non_bipartite, a.max_degeneracy);
            enumerate_labeled_graphs(n, move |g| {
                (!connected || g.is_connected())
                    && (!non_bip || !g.is_bipartite())
                    && max_deg.is_none_or(|d| crate::graph::degeneracy(g) <= d)
            })
            .collect()
        }
        (None, Some(count)) => {
            let (n, d) = (a.n.unwrap_or(0), a.gen_d.unwrap_or(0));
            (0..count as u64)
                .map(|i| gen_d_degenerate(n, d, BackDegree::Positive, a.seed.wrapping_add(i)).0)
                .collect()
        }
        (None, None) => return Err(Failure::Error("batch needs --enumerate or --random".into())),
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs)
        .build()
        .map_err(|e| Failure::Error(format!("thread pool: {e}")))?;
    let rows: Vec<BatchRow> = pool.install(|| {
        graphs
            .par_iter()
            .map(|g| {
                let start = Instant::now();
                let outcome = certify_graph(&kernel, g, &a.params, None);
                let wall_ms = start.elapsed().as_secs_f64() * 1e3;
                let (status, cert) = match outcome {
                    Ok((c, _)) => ("yes", Some(c)),
                    Err(Failure::Negative(_)) => ("no", None),
                    Err(Failure::Error(_)) => ("error", None),
                };
                BatchRow {
                    graph6: g.to_graph6(),
                    n: g.vertex_count(),
                    m: g.edge_count(),
                    status,
                    cert,
                    wall_ms,
                }
            })
            .collect()
    });

    let mut csv = String::from("id,graph6,n,m,method,certified,residue,wall_ms\n");
    let mut jsonl = String::new();
    for (id, r) in rows.iter().enumerate() {
        let residue = r.cert.as_ref().map(|c| c.residue.to_string()).unwrap_or_default();
        let wall = if a.timing { format!("{:.3}", r.wall_ms) } else { String::new() };
        let _ = writeln!(
            csv,
            "{id},{},{},{},{},{},{residue},{wall}",
            csv_field(&r.graph6),
            r.n,
            r.m,
            a.params.method.name(),
            r.status
        );
        if let Some(c) = &r.cert {
            let line = serde_json::json!({ "id": id, "graph6": r.graph6, "certificate": c });
            let _ = writeln!(jsonl, "{line}");
        }
    }
    if let Some(path) = &a.certs_out {
        write_output(Some(path), &jsonl)?;
    }
    write_output(a.out.as_deref(), &csv)
}

/// graph6 may contain `,` or `"`.
fn csv_field(s: &str) -> String {
    if s.contains([',', '"']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
