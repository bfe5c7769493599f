//! DIMACS edge and CNF formats.
//!
//! k-partite graphs carry their partition in a comment header:
//! `c kpartite {"n": 2, "k": 3, "map": [[1, 1], [1, 2], ...]}` mapping each
//! vertex (in order) to a 1-based `(class, index)`. Without `map`, vertex
//! `v` is `(⌊(v-1)/n⌋ + 1, (v-1) mod n + 1)`.

use crate::cost::{Cnf, Graph, KPartiteGraph, Vertex};
use crate::error::{Error, Result};
use serde::Deserialize;
use std::fmt::Write;

#[derive(Clone, Debug, Deserialize)]
struct KPartiteHeader {
    n: usize,
    k: usize,
    #[serde(default)]
    map: Option<Vec<(usize, usize)>>,
}

#[derive(Clone, Debug)]
pub struct DimacsGraph {
    pub vertices: usize,
    /// 0-based endpoints.
    pub edges: Vec<(usize, usize)>,
    /// `(n, k, class/index of each vertex)`, 0-based.
    pub partition: Option<(usize, usize, Vec<Vertex>)>,
}

impl DimacsGraph {
    pub fn to_graph(&self) -> Result<Graph> {
        Graph::new(self.vertices, self.edges.iter().copied())
    }

    pub fn to_kpartite(&self) -> Result<KPartiteGraph> {
        let (n, k, map) =
            self.partition.as_ref().ok_or_else(|| Error::Parse("graph has no `c kpartite` header".into()))?;
        KPartiteGraph::new(*n, *k, self.edges.iter().map(|&(u, v)| (map[u], map[v])))
    }
}

fn parse_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("line {}: {msg}", line + 1))
}

pub fn parse_graph(text: &str) -> Result<DimacsGraph> {
    let mut header: Option<KPartiteHeader> = None;
    let mut problem: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        match it.next() {
            Some("c") => {
                let rest = line[1..].trim_start();
                if let Some(json) = rest.strip_prefix("kpartite") {
                    header = Some(serde_json::from_str(json).map_err(|e| parse_err(no, e))?);
                }
            }
            Some("p") => {
                if problem.is_some() {
                    return Err(parse_err(no, "duplicate problem line"));
                }
                let kind = it.next();
                if kind != Some("edge") && kind != Some("col") {
                    return Err(parse_err(no, "expected `p edge N M`"));
                }
                let nums: Vec<usize> = it
                    .map(|t| t.parse().map_err(|_| parse_err(no, format!("bad count `{t}`"))))
                    .collect::<Result<_>>()?;
                if nums.len() != 2 {
                    return Err(parse_err(no, "expected `p edge N M`"));
                }
                problem = Some((nums[0], nums[1]));
            }
            Some("e") => {
                let (vertices, _) = problem.ok_or_else(|| parse_err(no, "edge before problem line"))?;
                let ends: Vec<usize> = it
                    .map(|t| t.parse().map_err(|_| parse_err(no, format!("bad vertex `{t}`"))))
                    .collect::<Result<_>>()?;
                if ends.len() != 2 {
                    return Err(parse_err(no, "expected `e u v`"));
                }
                for &v in &ends {
                    if v == 0 || v > vertices {
                        return Err(parse_err(no, format!("vertex {v} outside 1..={vertices}")));
                    }
                }
                edges.push((ends[0] - 1, ends[1] - 1));
            }
            Some(other) => return Err(parse_err(no, format!("unknown line type `{other}`"))),
            None => {}
        }
    }
    let (vertices, declared) = problem.ok_or_else(|| Error::Parse("missing `p edge` line".into()))?;
    if declared != edges.len() {
        return Err(Error::Parse(format!("header declares {declared} edges, found {}", edges.len())));
    }
    let partition = header
        .map(|h| {
            let map: Vec<Vertex> = match h.map {
                Some(m) => {
                    if m.len() != vertices {
                        return Err(Error::Parse(format!(
                            "kpartite map has {} entries for {vertices} vertices",
                            m.len()
                        )));
                    }
                    m.iter()
                        .map(|&(c, i)| {
                            if c == 0 || i == 0 || c > h.k || i > h.n {
                                return Err(Error::Parse(format!("kpartite map entry ({c}, {i}) out of range")));
                            }
                            Ok(Vertex::new(c - 1, i - 1))
                        })
                        .collect::<Result<_>>()?
                }
                None => {
                    if vertices != h.n * h.k {
                        return Err(Error::Parse(format!("{vertices} vertices but n·k = {}; supply a map", h.n * h.k)));
                    }
                    (0..vertices).map(|v| Vertex::new(v / h.n, v % h.n)).collect()
                }
            };
            Ok((h.n, h.k, map))
        })
        .transpose()?;
    Ok(DimacsGraph { vertices, edges, partition })
}

/// Writes a k-partite graph with the default vertex numbering.
pub fn write_kpartite(g: &KPartiteGraph) -> String {
    let n = g.n();
    let mut out = format!("c kpartite {{\"n\":{},\"k\":{}}}\np edge {} {}\n", n, g.k(), n * g.k(), g.edges().len());
    for (a, b) in g.edges() {
        let _ = writeln!(out, "e {} {}", a.class * n + a.index + 1, b.class * n + b.index + 1);
    }
    out
}

pub fn write_graph(g: &Graph) -> String {
    let mut out = format!("p edge {} {}\n", g.vertices(), g.edges().len());
    for (a, b) in g.edges() {
        let _ = writeln!(out, "e {} {}", a + 1, b + 1);
    }
    out
}

pub fn parse_cnf(text: &str) -> Result<Cnf> {
    let mut problem: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<i32> = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if let Some(rest) = line.strip_prefix('p') {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            if parts.len() != 3 || parts[0] != "cnf" {
                return Err(parse_err(no, "expected `p cnf V C`"));
            }
            let v = parts[1].parse().map_err(|_| parse_err(no, "bad variable count"))?;
            let c = parts[2].parse().map_err(|_| parse_err(no, "bad clause count"))?;
            problem = Some((v, c));
            continue;
        }
        if problem.is_none() {
            return Err(parse_err(no, "clause before problem line"));
        }
        for tok in line.split_whitespace() {
            let lit: i32 = tok.parse().map_err(|_| parse_err(no, format!("bad literal `{tok}`")))?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                current.push(lit);
            }
        }
    }
    if !current.is_empty() {
        clauses.push(current);
    }
    let (vars, declared) = problem.ok_or_else(|| Error::Parse("missing `p cnf` line".into()))?;
    if declared != clauses.len() {
        return Err(Error::Parse(format!("header declares {declared} clauses, found {}", clauses.len())));
    }
    Cnf::new(vars, clauses)
}

pub fn write_cnf(cnf: &Cnf) -> String {
    let mut out = format!("p cnf {} {}\n", cnf.num_vars(), cnf.clauses().len());
    for c in cnf.clauses() {
        for l in c {
            let _ = write!(out, "{l} ");
        }
        out.push_str("0\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kpartite_round_trip() {
        let g = KPartiteGraph::complete(2, 3).unwrap();
        let parsed = parse_graph(&write_kpartite(&g)).unwrap().to_kpartite().unwrap();
        assert_eq!(parsed.edges().len(), g.edges().len());
        let mapped = "c kpartite {\"n\":1,\"k\":2,\"map\":[[2,1],[1,1]]}\np edge 2 1\ne 1 2\n";
        let h = parse_graph(mapped).unwrap().to_kpartite().unwrap();
        assert!(h.has_edge(Vertex::new(0, 0), Vertex::new(1, 0)));
    }

    #[test]
    fn within_class_edge_is_rejected() {
        let text = "c kpartite {\"n\":2,\"k\":2}\np edge 4 1\ne 1 2\n";
        assert!(matches!(parse_graph(text).unwrap().to_kpartite(), Err(Error::EdgeWithinClass { .. })));
    }

    #[test]
    fn graph_errors() {
        assert!(parse_graph("e 1 2\n").is_err());
        assert!(parse_graph("p edge 2 1\ne 1 3\n").is_err());
        assert!(parse_graph("p edge 2 2\ne 1 2\n").is_err());
        assert!(parse_graph("p edge 3 1\ne 1 2\n").unwrap().to_kpartite().is_err());
    }

    #[test]
    fn cnf_parsing() {
        let cnf = parse_cnf("c demo\np cnf 3 2\n1 -2 0\n2 3\n0\n").unwrap();
        assert_eq!(cnf.clauses(), &[vec![1, -2], vec![2, 3]]);
        assert_eq!(parse_cnf(&write_cnf(&cnf)).unwrap(), cnf);
        let wide = parse_cnf("p cnf 3 1\n1 2 3 0\n").unwrap();
        assert!(matches!(wide.check_two_sat(), Err(Error::ClauseWidth { .. })));
        assert!(parse_cnf("p cnf 2 1\n1 5 0\n").is_err());
        assert!(parse_cnf("p cnf 2 2\n1 0\n").is_err());
    }
}
