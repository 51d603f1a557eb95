use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use tempfile::TempDir;

const K3: &str = "3 3\n0 1\n1 2\n0 2\n";
const K4: &str = "4 6\n0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n";
const P3: &str = "3 2\n0 1\n1 2\n";

fn twchoose(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twchoose")).args(args).output().unwrap()
}

fn with_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_twchoose"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn file(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn certify_k3_one_k() {
    let dir = TempDir::new().unwrap();
    let g = file(&dir, "k3.txt", K3);
    let out = twchoose(&["certify", s(&g), "--method", "1k", "-k", "3", "-d", "2"]);
    assert_eq!(code(&out), 0);
    let cert: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(cert["residue"], 1);
    assert_eq!(cert["p"], 3);
    assert_eq!(cert["method"], "one-k-nonbipartite");
}

#[test]
fn certify_from_stdin_graph6() {
    let out = with_stdin(&["certify", "-", "--format", "graph6", "--method", "d2", "-d", "2"], "Bw\n");
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("degenerate-d2"));
}

#[test]
fn certify_exit_codes() {
    let dir = TempDir::new().unwrap();
    let k3 = file(&dir, "k3.txt", K3);
    let k4 = file(&dir, "k4.txt", K4);
    assert_eq!(code(&twchoose(&["certify", s(&k3), "--method", "1k", "-k", "4", "-d", "2"])), 1);
    let neg = twchoose(&["certify", s(&k4), "--method", "k2mad", "-k", "1"]);
    assert_eq!(code(&neg), 2);
    let msg = String::from_utf8(neg.stderr).unwrap();
    assert!(msg.contains("6 edges"), "{msg}");
    assert_eq!(code(&twchoose(&["certify", s(&k3), "--method", "1k", "-k", "3"])), 1);
    assert_eq!(code(&twchoose(&["certify", s(&k3), "--method", "nope"])), 1);
    let bad = file(&dir, "bad.txt", "3 1\n0 7\n");
    assert_eq!(code(&twchoose(&["certify", s(&bad), "--method", "d2", "-d", "2"])), 1);
    assert_eq!(code(&twchoose(&["certify", s(&k3), "--method", "d2", "-d", "2", "--max-dim", "0"])), 1);
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(code(&twchoose(&["--help"])), 0);
    assert_eq!(code(&twchoose(&["--version"])), 0);
    assert_eq!(code(&twchoose(&[])), 1);
}

#[test]
fn explicit_orientation() {
    let dir = TempDir::new().unwrap();
    let g = file(&dir, "k3.txt", K3);
    let o = file(&dir, "o.txt", "0 1\n1 2\n2 0\n");
    let out = twchoose(&["certify", s(&g), "--method", "orient", "--orientation", s(&o)]);
    assert_eq!(code(&out), 0);
    let cert: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(cert["method"], "orientation");
    let partial = file(&dir, "p.txt", "0 1\n");
    assert_eq!(code(&twchoose(&["certify", s(&g), "--method", "orient", "--orientation", s(&partial)])), 1);
}

#[test]
fn solve_and_verify_p3() {
    let dir = TempDir::new().unwrap();
    let g = file(&dir, "p3.txt", P3);
    let cert = dir.path().join("cert.json");
    let sup = dir.path().join("sup.txt");
    let out = twchoose(&[
        "certify", s(&g), "--method", "prune12", "-d", "1", "--out", s(&cert), "--graph-out", s(&sup),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(std::fs::read_to_string(&sup).unwrap(), P3);

    let lists = file(&dir, "lists.json", r#"{"vertices":[[0],[0],[0]],"edges":[[0,1],[0,1]]}"#);
    let w = dir.path().join("w.json");
    let out = twchoose(&["solve", s(&g), "--cert", s(&cert), "--lists", s(&lists), "--out", s(&w)]);
    assert_eq!(code(&out), 0);
    let phi: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&w).unwrap()).unwrap();
    assert_eq!(phi["edges"], serde_json::json!(["1/1", "1/1"]));

    assert_eq!(code(&twchoose(&["verify", s(&g), "--cert", s(&cert)])), 0);
    assert_eq!(code(&twchoose(&["verify", s(&g), "--weighting", s(&w), "--lists", s(&lists)])), 0);
    let flat = file(&dir, "flat.json", r#"{"vertices":[0,0,0],"edges":[1,2]}"#);
    assert_eq!(code(&twchoose(&["verify", s(&g), "--weighting", s(&flat)])), 0);
    let same = file(&dir, "same.json", r#"{"vertices":[0,0,0],"edges":["1/2","0"]}"#);
    assert_eq!(code(&twchoose(&["verify", s(&g), "--weighting", s(&same)])), 2);
    assert_eq!(code(&twchoose(&["verify", s(&g), "--cert", s(&dir.path().join("missing.json"))])), 1);

    let single = file(&dir, "single.json", r#"{"vertices":[[0],[0],[0]],"edges":[[0],[0]]}"#);
    assert_eq!(code(&twchoose(&["solve", s(&g), "--cert", s(&cert), "--lists", s(&single)])), 2);
}

#[test]
fn perturbed_certificates_are_rejected() {
    let dir = TempDir::new().unwrap();
    let g = file(&dir, "k3.txt", K3);
    let out = twchoose(&["certify", s(&g), "--method", "1k", "-k", "3", "-d", "2"]);
    let mut cert: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let eta_edges = cert["eta"]["edges"].as_array().unwrap().clone();
    // Move one unit of eta from an edge onto a vertex.
    let e = eta_edges.iter().position(|x| x.as_u64().unwrap() > 0).unwrap();
    cert["eta"]["edges"][e] = (eta_edges[e].as_u64().unwrap() - 1).into();
    cert["eta"]["vertices"][0] = 1.into();
    let bad = file(&dir, "bad.json", &cert.to_string());
    assert_eq!(code(&twchoose(&["verify", s(&g), "--cert", s(&bad)])), 2);
    let lists = file(&dir, "l.json", r#"{"vertices":[[0],[0],[0]],"edges":[[1,2,3],[1,2,3],[1,2,3]]}"#);
    assert_eq!(code(&twchoose(&["solve", s(&g), "--cert", s(&bad), "--lists", s(&lists)])), 1);
    let garbage = file(&dir, "garbage.json", "{\"schema\": 1}");
    assert_eq!(code(&twchoose(&["solve", s(&g), "--cert", s(&garbage), "--lists", s(&lists)])), 1);
}

#[test]
fn permanent_subcommand() {
    let out = with_stdin(&["permanent"], "1 1\n1 1\n");
    assert_eq!(stdout(&out).trim(), "2");
    let out = with_stdin(&["permanent", "-", "-p", "3"], "2 1\n1 2\n");
    assert_eq!(stdout(&out).trim(), "2");
    let out = with_stdin(&["permanent", "-", "-p", "4"], "1\n");
    assert_eq!(code(&out), 1);
    let out = with_stdin(&["permanent"], "1 2\n3\n");
    assert_eq!(code(&out), 1);
}

fn certified_column(csv: &str) -> Vec<String> {
    csv.lines().skip(1).map(|l| l.rsplit(',').nth(2).unwrap().to_string()).collect()
}

#[test]
fn batch_sweeps_certify_everything() {
    let out = twchoose(&[
        "batch", "--enumerate", "5", "--connected", "--non-bipartite", "--max-degeneracy", "2", "--method", "1k",
        "-k", "3", "-d", "2", "--jobs", "2",
    ]);
    assert_eq!(code(&out), 0);
    let col = certified_column(&stdout(&out));
    assert!(!col.is_empty());
    assert!(col.iter().all(|c| c == "yes"));

    let out = twchoose(&[
        "batch", "--enumerate", "4", "--connected", "--max-degeneracy", "2", "--method", "d2", "-d", "2",
    ]);
    let col = certified_column(&stdout(&out));
    assert_eq!(col.len(), 37);
    assert!(col.iter().all(|c| c == "yes"));
}

#[test]
fn empty_batch_is_header_only() {
    let out = twchoose(&["batch", "--enumerate", "2", "--non-bipartite", "--method", "d2", "-d", "2"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "id,graph6,n,m,method,certified,residue,wall_ms\n");
}

#[test]
fn batch_timing_column() {
    let out = twchoose(&["batch", "--random", "3", "--n", "5", "--gen-d", "2", "--method", "d2", "-d", "2", "--timing"]);
    let text = stdout(&out);
    assert!(text.lines().skip(1).all(|l| !l.ends_with(',')));
    let out = twchoose(&["batch", "--random", "3", "--n", "5", "--gen-d", "2", "--method", "d2", "-d", "2"]);
    assert!(stdout(&out).lines().skip(1).all(|l| l.ends_with(',')));
}
