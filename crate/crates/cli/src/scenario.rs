//! Line-oriented `key = value` scenario files.
//!
//! ```text
//! # early-pandemic norms
//! label = pandemic
//! w = 1
//! b = 8
//! alpha = 0.7
//! q = 0.6
//! d = 5
//! ```
//!
//! `#` starts a comment anywhere on a line. Schedules are comma-separated
//! reals: `alpha_schedule` and `q_schedule` hold `d − 1` entries (hops
//! 2..=d), `response` holds `d`. `graph` is an edge-list path, relative to
//! the scenario file, and needs `seed_node`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use netcascade_core::analytic::DepthSchedule;
use netcascade_core::graph::SeedSpec;
use netcascade_core::{Error as CoreError, ModelParams};

use crate::edgelist::{read_edge_list, LoadedGraph};
use crate::error::{CliError, CliResult};
use crate::fmt::fmt_real;

pub const KEYS: [&str; 11] =
    ["label", "w", "b", "alpha", "q", "d", "alpha_schedule", "q_schedule", "response", "graph", "seed_node"];

pub const DEFAULT_LABEL: &str = "scenario";

#[derive(Debug, Clone, PartialEq)]
pub struct GraphRef {
    pub path: String,
    pub seed_node: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub label: String,
    pub params: ModelParams,
    pub alpha_schedule: Option<Vec<f64>>,
    pub q_schedule: Option<Vec<f64>>,
    pub response: Option<Vec<f64>>,
    pub graph: Option<GraphRef>,
}

impl ScenarioSpec {
    pub fn new(label: impl Into<String>, params: ModelParams) -> Self {
        Self { label: label.into(), params, alpha_schedule: None, q_schedule: None, response: None, graph: None }
    }

    pub fn validate(&self) -> CliResult<()> {
        check_text("label", &self.label)?;
        let d = self.params.d() as usize;
        for (key, sched, len) in [
            ("alpha_schedule", &self.alpha_schedule, d - 1),
            ("q_schedule", &self.q_schedule, d - 1),
            ("response", &self.response, d),
        ] {
            if let Some(v) = sched {
                if v.len() != len {
                    return Err(CliError::domain(key, None, format!("has {} entries, depth {d} needs {len}", v.len())));
                }
            }
        }
        self.schedule().map_err(|e| core_to_domain(e, &HashMap::new()))?;
        if let Some(g) = &self.graph {
            check_text("graph", &g.path)?;
        }
        Ok(())
    }

    pub fn has_schedule(&self) -> bool {
        self.alpha_schedule.is_some() || self.q_schedule.is_some() || self.response.is_some()
    }

    /// The depth-varying schedule, with missing parts filled from the
    /// homogeneous `α` and `q`.
    pub fn schedule(&self) -> netcascade_core::Result<Option<DepthSchedule>> {
        if !self.has_schedule() {
            return Ok(None);
        }
        let n = self.params.d() as usize - 1;
        let alpha = self.alpha_schedule.clone().unwrap_or_else(|| vec![self.params.alpha(); n]);
        let q = self.q_schedule.clone().unwrap_or_else(|| vec![self.params.q(); n]);
        DepthSchedule::new(alpha, q, self.response.clone()).map(Some)
    }

    pub fn graph_path(&self, base: Option<&Path>) -> Option<PathBuf> {
        let g = self.graph.as_ref()?;
        let p = PathBuf::from(&g.path);
        Some(match base {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p,
        })
    }

    /// Loads the referenced graph and checks the seed node against it.
    pub fn load_graph(&self, base: Option<&Path>) -> CliResult<Option<(LoadedGraph, SeedSpec)>> {
        let (Some(path), Some(g)) = (self.graph_path(base), &self.graph) else {
            return Ok(None);
        };
        let loaded = read_edge_list(&path)?;
        let seed = SeedSpec::new(g.seed_node, &loaded.graph)
            .map_err(|e| CliError::domain("seed_node", None, e.to_string()))?;
        Ok(Some((loaded, seed)))
    }
}

fn check_text(key: &str, s: &str) -> CliResult<()> {
    if s.is_empty() || s.trim() != s || s.contains(['#', '\n', '\r']) {
        return Err(CliError::domain(key, None, "must be nonempty, without surrounding spaces, `#` or line breaks"));
    }
    Ok(())
}

struct Entry<'a> {
    line: usize,
    column: usize,
    value: &'a str,
}

pub fn parse_scenario(text: &str) -> CliResult<ScenarioSpec> {
    let mut entries: HashMap<&str, Entry> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("");
        if body.trim().is_empty() {
            continue;
        }
        let key_col = body.len() - body.trim_start().len() + 1;
        let Some(eq) = body.find('=') else {
            return Err(CliError::parse(line, key_col, "expected `key = value`"));
        };
        let key = body[..eq].trim();
        if key.is_empty() {
            return Err(CliError::parse(line, eq + 1, "missing key before `=`"));
        }
        let Some(&key) = KEYS.iter().find(|&&k| k == key) else {
            return Err(CliError::parse(line, key_col, format!("unknown key `{key}`")));
        };
        let rest = &body[eq + 1..];
        let value = rest.trim();
        let column = eq + 2 + (rest.len() - rest.trim_start().len());
        if let Some(prev) = entries.get(key) {
            return Err(CliError::parse(line, key_col, format!("`{key}` already set on line {}", prev.line)));
        }
        entries.insert(key, Entry { line, column, value });
    }
    let lines: HashMap<&str, usize> = entries.iter().map(|(k, e)| (*k, e.line)).collect();

    let real = |key: &str| -> CliResult<Option<f64>> {
        let Some(e) = entries.get(key) else { return Ok(None) };
        parse_real(e.value, e.line, e.column).map(Some)
    };
    let required = |key: &str| -> CliResult<f64> {
        real(key)?.ok_or_else(|| CliError::domain(key, None, "required key is missing"))
    };
    let w = real("w")?.unwrap_or(1.0);
    let b = required("b")?;
    let alpha = required("alpha")?;
    let q = required("q")?;
    let d = match entries.get("d") {
        None => return Err(CliError::domain("d", None, "required key is missing")),
        Some(e) => match e.value.parse::<u32>() {
            Ok(d) => d,
            Err(_) => {
                parse_real(e.value, e.line, e.column)?;
                return Err(CliError::domain("d", Some(e.line), format!("`{}` is not an integer >= 1", e.value)));
            }
        },
    };
    let params = ModelParams::new(w, b, alpha, q, d).map_err(|e| core_to_domain(e, &lines))?;

    let list = |key: &str| -> CliResult<Option<Vec<f64>>> {
        let Some(e) = entries.get(key) else { return Ok(None) };
        if e.value.is_empty() {
            return Ok(Some(Vec::new()));
        }
        let mut out = Vec::new();
        let mut offset = 0;
        for part in e.value.split(',') {
            let lead = part.len() - part.trim_start().len();
            out.push(parse_real(part.trim(), e.line, e.column + offset + lead)?);
            offset += part.len() + 1;
        }
        Ok(Some(out))
    };

    let label = match entries.get("label") {
        Some(e) if e.value.is_empty() => return Err(CliError::parse(e.line, e.column, "empty label")),
        Some(e) => e.value.to_string(),
        None => DEFAULT_LABEL.to_string(),
    };
    let mut spec = ScenarioSpec {
        label,
        params,
        alpha_schedule: list("alpha_schedule")?,
        q_schedule: list("q_schedule")?,
        response: list("response")?,
        graph: None,
    };
    match (entries.get("graph"), entries.get("seed_node")) {
        (None, None) => {}
        (Some(g), Some(s)) => {
            if g.value.is_empty() {
                return Err(CliError::parse(g.line, g.column, "empty graph path"));
            }
            let seed_node = s
                .value
                .parse::<usize>()
                .map_err(|_| CliError::domain("seed_node", Some(s.line), format!("`{}` is not a node index", s.value)))?;
            spec.graph = Some(GraphRef { path: g.value.to_string(), seed_node });
        }
        (Some(g), None) => return Err(CliError::domain("seed_node", Some(g.line), "required when `graph` is set")),
        (None, Some(s)) => return Err(CliError::domain("graph", Some(s.line), "required when `seed_node` is set")),
    }
    spec.validate().map_err(|e| match e {
        CliError::Domain { key, line: None, message } => {
            let line = lines.get(key.as_str()).copied();
            CliError::Domain { key, line, message }
        }
        other => other,
    })?;
    Ok(spec)
}

fn parse_real(s: &str, line: usize, column: usize) -> CliResult<f64> {
    s.parse::<f64>().map_err(|_| CliError::parse(line, column, format!("`{s}` is not a number")))
}

fn core_to_domain(e: CoreError, lines: &HashMap<&str, usize>) -> CliError {
    match e {
        CoreError::InvalidParameter { name, value, expected } => {
            CliError::domain(name, lines.get(name).copied(), format!("{value} is not {expected}"))
        }
        other => CliError::Core(other),
    }
}

/// Canonical text for `spec`; `parse_scenario` inverts it exactly.
pub fn write_scenario(spec: &ScenarioSpec) -> String {
    let p = &spec.params;
    let mut out = String::new();
    let _ = writeln!(out, "label = {}", spec.label);
    let _ = writeln!(out, "w = {}", fmt_real(p.w()));
    let _ = writeln!(out, "b = {}", fmt_real(p.b()));
    let _ = writeln!(out, "alpha = {}", fmt_real(p.alpha()));
    let _ = writeln!(out, "q = {}", fmt_real(p.q()));
    let _ = writeln!(out, "d = {}", p.d());
    for (key, v) in [("alpha_schedule", &spec.alpha_schedule), ("q_schedule", &spec.q_schedule), ("response", &spec.response)] {
        if let Some(v) = v {
            let joined: Vec<String> = v.iter().map(|&x| fmt_real(x)).collect();
            let _ = writeln!(out, "{key} = {}", joined.join(", "));
        }
    }
    if let Some(g) = &spec.graph {
        let _ = writeln!(out, "graph = {}", g.path);
        let _ = writeln!(out, "seed_node = {}", g.seed_node);
    }
    out
}
