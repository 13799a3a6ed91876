//! Plain-text edge lists.
//!
//! ```text
//! # comment
//! p=5
//! 0 -> 2
//! 1 -- 2
//! ```
//!
//! The header gives the node count; each following line is a directed
//! (`->`) or undirected (`--`) edge. Blank lines and `#` comments are
//! skipped.

use std::fmt::Write as _;

use crate::error::ParseError;
use crate::graph::{Dag, Pdag};

pub fn parse_pdag(text: &str) -> Result<Pdag, ParseError> {
    let mut graph: Option<Pdag> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let syntax = |msg: &str| ParseError::Syntax {
            line: line_no,
            msg: msg.to_string(),
        };
        let Some(g) = graph.as_mut() else {
            let rest = line
                .strip_prefix("p=")
                .or_else(|| line.strip_prefix("p ="))
                .ok_or(ParseError::MissingHeader)?;
            let p: usize = rest.trim().parse().map_err(|_| syntax("bad node count"))?;
            graph = Some(Pdag::new(p));
            continue;
        };
        let (lhs, rhs, directed) = if let Some((a, b)) = line.split_once("->") {
            (a, b, true)
        } else if let Some((a, b)) = line.split_once("--") {
            (a, b, false)
        } else {
            return Err(syntax("expected `u -> v` or `u -- v`"));
        };
        let u: usize = lhs.trim().parse().map_err(|_| syntax("bad node id"))?;
        let v: usize = rhs.trim().parse().map_err(|_| syntax("bad node id"))?;
        if directed {
            g.add_directed(u, v)?;
        } else {
            g.add_undirected(u, v)?;
        }
    }
    graph.ok_or(ParseError::MissingHeader)
}

pub fn parse_dag(text: &str) -> Result<Dag, ParseError> {
    Ok(parse_pdag(text)?.to_dag()?)
}

pub fn write_pdag(g: &Pdag) -> String {
    let mut out = format!("p={}\n", g.num_nodes());
    for (u, v) in g.directed_edges() {
        let _ = writeln!(out, "{u} -> {v}");
    }
    for (u, v) in g.undirected_edges() {
        let _ = writeln!(out, "{u} -- {v}");
    }
    out
}

pub fn write_dag(g: &Dag) -> String {
    write_pdag(&g.to_pdag())
}
