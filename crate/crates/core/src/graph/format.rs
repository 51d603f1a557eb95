use std::fmt;
use std::str::FromStr;

use super::Graph;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GraphFormat {
    Graph6,
    EdgeList,
}

impl FromStr for GraphFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "graph6" | "g6" => Ok(GraphFormat::Graph6),
            "edgelist" | "edges" => Ok(GraphFormat::EdgeList),
            other => Err(Error::InvalidParameter(format!("unknown graph format {other:?}"))),
        }
    }
}

impl fmt::Display for GraphFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphFormat::Graph6 => "graph6",
            GraphFormat::EdgeList => "edgelist",
        })
    }
}

/// Parses a graph; the resulting edge list is sorted lexicographically.
pub fn parse_graph(text: &str, format: GraphFormat) -> Result<Graph> {
    match format {
        GraphFormat::Graph6 => parse_graph6(text),
        GraphFormat::EdgeList => parse_edge_list(text),
    }
}

fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, 0, "missing header line \"n m\""))?;
    let (n, m) = parse_pair(hline, header)?;

    let mut edges = Vec::with_capacity(m);
    for (line, body) in lines.by_ref() {
        if edges.len() == m {
            return Err(Error::parse(line, 0, format!("more than the declared {m} edges")));
        }
        let (u, v) = parse_pair(line, body)?;
        if u >= n || v >= n {
            return Err(Error::parse(
                line,
                0,
                format!("edge ({u}, {v}) has an endpoint outside 0..{n}"),
            ));
        }
        edges.push((u, v));
    }
    if edges.len() != m {
        return Err(Error::parse(
            text.lines().count().max(1),
            0,
            format!("declared {m} edges, found {}", edges.len()),
        ));
    }
    Graph::from_sorted_edges(n, edges)
}

fn parse_pair(line: usize, body: &str) -> Result<(usize, usize)> {
    let mut fields = Vec::new();
    let mut offset = 0;
    for tok in body.split_whitespace() {
        let at = body[offset..].find(tok).map_or(offset, |p| p + offset);
        offset = at + tok.len();
        let value = tok.parse::<usize>().map_err(|_| {
            Error::parse(line, at, format!("expected a non-negative integer, got {tok:?}"))
        })?;
        fields.push(value);
    }
    match fields.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(Error::parse(
            line,
            0,
            format!("expected two integers, found {}", fields.len()),
        )),
    }
}

fn parse_graph6(text: &str) -> Result<Graph> {
    let body = text.trim();
    let body = body.strip_prefix(">>graph6<<").unwrap_or(body);
    let header_len = if text.trim().starts_with(">>graph6<<") { 10 } else { 0 };
    let bytes = body.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        if !(63..=126).contains(&b) {
            return Err(Error::parse(1, header_len + i, format!("byte {b:#04x} outside the graph6 range")));
        }
    }
    let (n, mut pos) = decode_size(bytes).ok_or_else(|| Error::parse(1, header_len, "truncated vertex count"))?;
    let pairs = n * n.saturating_sub(1) / 2;
    let need = pairs.div_ceil(6);
    if bytes.len() - pos != need {
        return Err(Error::parse(
            1,
            header_len + pos,
            format!("expected {need} adjacency bytes for {n} vertices, found {}", bytes.len() - pos),
        ));
    }
    let mut edges = Vec::new();
    let mut bit = 0usize;
    for j in 1..n {
        for i in 0..j {
            let byte = bytes[pos + bit / 6] - 63;
            if (byte >> (5 - bit % 6)) & 1 == 1 {
                edges.push((i, j));
            }
            bit += 1;
        }
    }
    pos += need;
    debug_assert_eq!(pos, bytes.len());
    Graph::from_sorted_edges(n, edges)
}

fn decode_size(bytes: &[u8]) -> Option<(usize, usize)> {
    let first = *bytes.first()?;
    if first < 126 {
        return Some(((first - 63) as usize, 1));
    }
    let (start, count) = if bytes.get(1) == Some(&126) { (2, 6) } else { (1, 3) };
    let chunk = bytes.get(start..start + count)?;
    let n = chunk.iter().fold(0usize, |acc, &b| (acc << 6) | (b - 63) as usize);
    Some((n, start + count))
}

/// Encodes a graph in graph6 (no header, no trailing newline).
pub fn to_graph6(g: &Graph) -> String {
    let n = g.vertex_count();
    let mut out: Vec<u8> = Vec::new();
    if n < 63 {
        out.push(n as u8 + 63);
    } else if n < 258_048 {
        out.push(126);
        for shift in [12, 6, 0] {
            out.push(((n >> shift) & 63) as u8 + 63);
        }
    } else {
        out.extend([126, 126]);
        for shift in [30, 24, 18, 12, 6, 0] {
            out.push(((n >> shift) & 63) as u8 + 63);
        }
    }
    let mut bits = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for j in 1..n {
        for i in 0..j {
            bits.push(g.is_adjacent(i, j));
        }
    }
    for chunk in bits.chunks(6) {
        let mut byte = 0u8;
        for (k, &b) in chunk.iter().enumerate() {
            if b {
                byte |= 1 << (5 - k);
            }
        }
        out.push(byte + 63);
    }
    String::from_utf8(out).expect("graph6 bytes are ASCII")
}

impl Graph {
    pub fn to_graph6(&self) -> String {
        to_graph6(self)
    }
}
