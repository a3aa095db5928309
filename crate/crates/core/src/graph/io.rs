//! DIMACS and JSON graph formats.

use std::fmt::Write;

use super::Graph;
use crate::error::{CoposError, Result};

fn parse_err(line: usize, msg: impl std::fmt::Display) -> CoposError {
    CoposError::Parse(format!("line {line}: {msg}"))
}

/// Parses DIMACS edge format: `c` comment lines, one `p edge n m` header and
/// 1-indexed `e i j` lines. The declared edge count is checked.
pub fn parse_dimacs(text: &str) -> Result<Graph> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("p") => {
                if header.is_some() {
                    return Err(parse_err(lineno, "duplicate problem line"));
                }
                let kind = toks.next().unwrap_or("");
                if kind != "edge" && kind != "col" {
                    return Err(parse_err(lineno, format!("unsupported problem type {kind:?}")));
                }
                let n = num(toks.next(), lineno)?;
                let m = num(toks.next(), lineno)?;
                header = Some((n, m));
            }
            Some("e") => {
                let (n, _) = header.ok_or_else(|| parse_err(lineno, "edge before problem line"))?;
                let a = num(toks.next(), lineno)?;
                let b = num(toks.next(), lineno)?;
                if a == 0 || b == 0 || a > n || b > n {
                    return Err(parse_err(lineno, format!("vertex out of range 1..={n}")));
                }
                edges.push((a - 1, b - 1));
            }
            Some(tok) => return Err(parse_err(lineno, format!("unknown line type {tok:?}"))),
            None => {}
        }
    }
    let (n, m) = header.ok_or_else(|| CoposError::Parse("missing problem line".into()))?;
    if edges.len() != m {
        return Err(CoposError::Parse(format!(
            "header declares {m} edges, found {}",
            edges.len()
        )));
    }
    Graph::new(n, edges)
}

fn num(tok: Option<&str>, line: usize) -> Result<usize> {
    let tok = tok.ok_or_else(|| parse_err(line, "missing field"))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("expected a non-negative integer, got {tok:?}")))
}

/// Emits DIMACS edge format (1-indexed).
pub fn to_dimacs(g: &Graph) -> String {
    let mut out = String::new();
    if let Some(name) = g.name() {
        let _ = writeln!(out, "c {name}");
    }
    let _ = writeln!(out, "p edge {} {}", g.n(), g.edge_count());
    for &(a, b) in g.edges() {
        let _ = writeln!(out, "e {} {}", a + 1, b + 1);
    }
    out
}

/// Parses either the JSON form `{"n":…, "edges":[[i,j],…]}` (0-indexed) or
/// DIMACS, chosen by the first non-blank character.
pub fn parse_graph(text: &str) -> Result<Graph> {
    if text.trim_start().starts_with('{') {
        Ok(serde_json::from_str(text)?)
    } else {
        parse_dimacs(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Family;

    #[test]
    fn dimacs_roundtrip() {
        let g = Family::Icosahedron.build().unwrap();
        let back = parse_dimacs(&to_dimacs(&g)).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn parses_comments_and_detects_json() {
        let text = "c five cycle\np edge 5 5\ne 1 2\ne 2 3\ne 3 4\ne 4 5\ne 5 1\n";
        let g = parse_graph(text).unwrap();
        assert_eq!(g, Family::Cycle(5).build().unwrap());
        let json = r#"{"n":3,"edges":[[0,1]]}"#;
        assert_eq!(parse_graph(json).unwrap().edge_count(), 1);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_dimacs("e 1 2\n").is_err());
        assert!(parse_dimacs("p edge 2 1\ne 1 3\n").is_err());
        assert!(parse_dimacs("p edge 2 2\ne 1 2\n").is_err());
        assert!(parse_dimacs("p edge 2 1\ne 1 1\n").is_err());
        assert!(parse_graph(r#"{"n":2,"edges":[[0,2]]}"#).is_err());
    }
}
