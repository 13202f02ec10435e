//! Plain-text arc lists: `src dst [weight]` per line, 0-based, `#` comments.
//!
//! A `# nodes N` comment fixes the node count so trailing isolated nodes
//! survive a round trip; without it the count is one past the largest index.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use netcascade_core::graph::{Arc, BuildReport, WeightedDigraph};

use crate::error::{CliError, CliResult};
use crate::fmt::fmt_real;

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedGraph {
    pub graph: WeightedDigraph,
    pub report: BuildReport,
}

impl LoadedGraph {
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.report.merged_arcs > 0 {
            out.push(format!("{} duplicate arc(s) merged by summing weights", self.report.merged_arcs));
        }
        if self.report.self_loops > 0 {
            out.push(format!("{} self-loop(s) kept", self.report.self_loops));
        }
        out
    }
}

pub fn parse_edge_list(text: &str) -> CliResult<LoadedGraph> {
    let mut arcs = Vec::new();
    let mut declared: Option<usize> = None;
    let mut max_index: Option<usize> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let (body, comment) = match raw.find('#') {
            Some(at) => (&raw[..at], Some(&raw[at + 1..])),
            None => (raw, None),
        };
        if let Some(c) = comment {
            let mut words = c.split_whitespace();
            if words.next() == Some("nodes") {
                let n = words
                    .next()
                    .and_then(|w| w.parse::<usize>().ok())
                    .ok_or_else(|| CliError::parse(line, raw.find("nodes").unwrap_or(0) + 1, "`# nodes` needs a count"))?;
                if declared.replace(n).is_some() {
                    return Err(CliError::parse(line, 1, "node count declared twice"));
                }
            }
        }
        let fields = fields_with_columns(body);
        if fields.is_empty() {
            continue;
        }
        if fields.len() > 3 || fields.len() < 2 {
            return Err(CliError::parse(line, fields[0].0, "expected `src dst [weight]`"));
        }
        let index = |(col, s): (usize, &str)| {
            s.parse::<usize>().map_err(|_| CliError::parse(line, col, format!("`{s}` is not a node index")))
        };
        let src = index(fields[0])?;
        let dst = index(fields[1])?;
        let weight = match fields.get(2) {
            Some(&(col, s)) => {
                let w = s.parse::<f64>().map_err(|_| CliError::parse(line, col, format!("`{s}` is not a number")))?;
                if !(w.is_finite() && w >= 0.0) {
                    return Err(CliError::parse(line, col, "weight must be finite and nonnegative"));
                }
                w
            }
            None => 1.0,
        };
        max_index = Some(max_index.unwrap_or(0).max(src).max(dst));
        arcs.push(Arc::new(src, dst, weight));
    }
    let needed = max_index.map_or(0, |m| m + 1);
    let n = match declared {
        Some(n) if n < needed => {
            return Err(CliError::domain("nodes", None, format!("declared {n} nodes but arcs use index {}", needed - 1)))
        }
        Some(n) => n,
        None => needed,
    };
    if n == 0 {
        return Err(CliError::domain("nodes", None, "graph has no nodes"));
    }
    let (graph, report) = WeightedDigraph::from_arcs_with_report(n, arcs)?;
    Ok(LoadedGraph { graph, report })
}

fn fields_with_columns(s: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in s.char_indices() {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(b)) => {
                out.push((b + 1, &s[b..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(b) = start {
        out.push((b + 1, &s[b..]));
    }
    out
}

pub fn read_edge_list(path: &Path) -> CliResult<LoadedGraph> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_edge_list(&text)
}

/// Writes every arc with its weight in shortest round-trip form.
pub fn write_edge_list(g: &WeightedDigraph) -> String {
    let mut out = String::with_capacity(16 * g.arc_count() + 16);
    let _ = writeln!(out, "# nodes {}", g.node_count());
    for a in g.arcs() {
        let _ = writeln!(out, "{} {} {}", a.src, a.dst, fmt_real(a.weight));
    }
    out
}
