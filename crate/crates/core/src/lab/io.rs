//! Graph and permutation exchange formats.
//!
//! JSON: `{"m": 1, "s": 6, "edges": [[0, 1], …]}`; `s` may be null.
//! Edge list: a header `p conc <inputs> <outputs> <edges>` followed by one
//! `in out` pair per line. Blank lines and lines starting with `c` are
//! skipped.

use std::fmt::Write as _;

use serde::Deserialize;
use serde_json::json;

use super::{BipartiteGraph, Permutation};
use crate::error::{Error, Result};

/// Largest `m` accepted from external input.
pub const MAX_IMPORT_M: u32 = 1 << 20;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphJson {
    m: u32,
    #[serde(default)]
    s: Option<u32>,
    edges: Vec<[u32; 2]>,
}

fn json_error(e: serde_json::Error) -> Error {
    Error::parse(e.line(), e.column(), e.to_string())
}

fn check_m(m: u32) -> Result<()> {
    if m == 0 || m > MAX_IMPORT_M {
        return Err(Error::invalid(format!(
            "m = {m} outside [1, {MAX_IMPORT_M}]"
        )));
    }
    Ok(())
}

pub fn parse_graph_json(text: &str) -> Result<BipartiteGraph> {
    let raw: GraphJson = serde_json::from_str(text).map_err(json_error)?;
    check_m(raw.m)?;
    BipartiteGraph::new(
        raw.m,
        raw.s,
        raw.edges.into_iter().map(|[a, b]| (a, b)).collect(),
    )
}

/// Accepts a bare array or `{"mapping": [...]}`.
pub fn parse_permutation_json(text: &str) -> Result<Permutation> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Bare(Vec<u32>),
        Wrapped { mapping: Vec<u32> },
    }
    let raw: Raw = serde_json::from_str(text).map_err(json_error)?;
    let mapping = match raw {
        Raw::Bare(v) | Raw::Wrapped { mapping: v } => v,
    };
    Permutation::new(mapping)
}

fn field<T: std::str::FromStr>(tok: Option<(usize, &str)>, line: usize, what: &str) -> Result<T> {
    let (col, s) = tok.ok_or_else(|| Error::parse(line, 1, format!("missing {what}")))?;
    s.parse()
        .map_err(|_| Error::parse(line, col + 1, format!("invalid {what} `{s}`")))
}

/// Whitespace-separated tokens with their byte offsets.
fn tokens(line: &str) -> impl Iterator<Item = (usize, &str)> {
    line.split_ascii_whitespace()
        .map(move |t| (t.as_ptr() as usize - line.as_ptr() as usize, t))
}

pub fn parse_edge_list(text: &str) -> Result<BipartiteGraph> {
    let mut header: Option<(u32, u64)> = None;
    let mut edges = Vec::new();
    let mut last_line = 0;
    for (idx, line) in text.lines().enumerate() {
        let n = idx + 1;
        last_line = n;
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        let mut toks = tokens(line);
        match header {
            None => {
                let (col, p) = toks.next().expect("nonempty line");
                if p != "p" {
                    return Err(Error::parse(n, col + 1, "expected header `p conc I O N`"));
                }
                let (col, kind) = toks
                    .next()
                    .ok_or_else(|| Error::parse(n, 1, "missing format"))?;
                if kind != "conc" {
                    return Err(Error::parse(n, col + 1, format!("unknown format `{kind}`")));
                }
                let inputs: u64 = field(toks.next(), n, "input count")?;
                let outputs: u64 = field(toks.next(), n, "output count")?;
                let count: u64 = field(toks.next(), n, "edge count")?;
                if let Some((col, t)) = toks.next() {
                    return Err(Error::parse(n, col + 1, format!("trailing token `{t}`")));
                }
                if inputs == 0 || !inputs.is_multiple_of(6) || outputs * 6 != inputs * 4 {
                    return Err(Error::parse(
                        n,
                        1,
                        format!("sides {inputs} × {outputs} are not 6m × 4m"),
                    ));
                }
                let m = u32::try_from(inputs / 6)
                    .ok()
                    .filter(|&m| m <= MAX_IMPORT_M)
                    .ok_or_else(|| Error::parse(n, 1, "m too large"))?;
                header = Some((m, count));
            }
            Some((m, _)) => {
                let a: u32 = field(toks.next(), n, "input")?;
                let b: u32 = field(toks.next(), n, "output")?;
                if let Some((col, t)) = toks.next() {
                    return Err(Error::parse(n, col + 1, format!("trailing token `{t}`")));
                }
                if a >= 6 * m || b >= 4 * m {
                    return Err(Error::parse(n, 1, format!("edge ({a}, {b}) out of range")));
                }
                edges.push((a, b));
            }
        }
    }
    let (m, count) = header.ok_or_else(|| Error::parse(last_line.max(1), 1, "missing header"))?;
    if edges.len() as u64 != count {
        return Err(Error::parse(
            last_line.max(1),
            1,
            format!("header announces {count} edges, found {}", edges.len()),
        ));
    }
    BipartiteGraph::new(m, None, edges)
}

impl BipartiteGraph {
    pub fn to_json(&self) -> serde_json::Value {
        let edges: Vec<[u32; 2]> = self.edges().iter().map(|&(a, b)| [a, b]).collect();
        json!({ "m": self.m, "s": self.s, "edges": edges })
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = format!(
            "p conc {} {} {}\n",
            self.num_inputs(),
            self.num_outputs(),
            self.edges().len()
        );
        for (a, b) in self.edges() {
            let _ = writeln!(out, "{a} {b}");
        }
        out
    }
}
