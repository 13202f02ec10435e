//! Single-scenario analysis and the lever report.

use std::fmt::Write as _;

use netcascade_core::analytic::{
    capture_share_first_k, depth_cap_for_budget, dyadic_baseline, geometric_sum, hop_breakdown,
    infinite_horizon_multiplier, network_multiplier, solve_critical_lever, total_responsibility,
    total_with_schedules, CriticalLever, DepthCap, HopBreakdown,
};
use netcascade_core::graph::{graph_total, neumann_convergent, NeumannCheck, SeedSpec, WeightedDigraph};
use netcascade_core::params::classify_regime;
use netcascade_core::{Error as CoreError, Horizon, ModelParams, OverflowReport, Regime, RegimeClass};

use crate::error::CliResult;
use crate::fmt::{fmt_real, fmt_sig6};
use crate::scenario::ScenarioSpec;

/// Hop tables are only built up to this depth.
pub const HOP_TABLE_MAX: u32 = 1000;
const HOP_ROWS_SHOWN: usize = 25;

pub const SHARE_DEPTHS: [u32; 3] = [1, 3, 5];

pub const ANALYZE_HEADER: [&str; 14] =
    ["label", "w", "b", "alpha", "q", "d", "r", "regime", "T", "M", "overflow", "T_dyad", "M_inf", "T_inf"];

type Value = Result<f64, OverflowReport>;

fn overflow_only(r: netcascade_core::Result<f64>) -> CliResult<Value> {
    match r {
        Ok(v) => Ok(Ok(v)),
        Err(CoreError::Overflow(o)) => Ok(Err(o)),
        Err(e) => Err(e.into()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphSummary {
    pub nodes: usize,
    pub arcs: usize,
    pub seed_node: usize,
    pub walk_total: Value,
    pub neumann: NeumannCheck,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub label: String,
    pub params: ModelParams,
    pub ratio: f64,
    pub regime: RegimeClass,
    pub total: Value,
    pub multiplier: Value,
    pub dyadic: f64,
    /// `None` when the infinite horizon diverges.
    pub m_inf: Option<f64>,
    pub hops: Option<HopBreakdown>,
    pub shares: Vec<(u32, f64)>,
    pub scheduled_total: Option<Value>,
    pub graph: Option<GraphSummary>,
}

pub fn run_scenario(spec: &ScenarioSpec, graph: Option<(&WeightedDigraph, SeedSpec)>, tol: f64) -> CliResult<Analysis> {
    let p = spec.params;
    let r = p.ratio();
    let regime = classify_regime(r, tol)?;
    let total = overflow_only(total_responsibility(&p))?;
    let multiplier = overflow_only(network_multiplier(&p))?;
    let m_inf = match infinite_horizon_multiplier(r) {
        Ok(m) => Some(m),
        Err(CoreError::DivergentHorizon { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let hops = if p.d() <= HOP_TABLE_MAX { hop_breakdown(&p).ok() } else { None };
    let mut shares = Vec::new();
    for k in SHARE_DEPTHS.into_iter().filter(|&k| k <= p.d()) {
        if let Ok(s) = capture_share_first_k(r, Horizon::Finite(p.d()), k) {
            shares.push((k, s));
        }
    }
    let scheduled_total = match spec.schedule()? {
        Some(sched) => Some(overflow_only(total_with_schedules(p.w(), p.b(), p.d(), &sched))?),
        None => None,
    };
    let graph = match graph {
        Some((g, seed)) => Some(GraphSummary {
            nodes: g.node_count(),
            arcs: g.arc_count(),
            seed_node: seed.seed_node,
            walk_total: overflow_only(graph_total(p.w(), p.alpha(), p.q(), g, seed, p.d()))?,
            neumann: neumann_convergent(p.alpha(), p.q(), g, tol)?,
        }),
        None => None,
    };
    Ok(Analysis {
        label: spec.label.clone(),
        params: p,
        ratio: r.value(),
        regime,
        total,
        multiplier,
        dyadic: dyadic_baseline(&p),
        m_inf,
        hops,
        shares,
        scheduled_total,
        graph,
    })
}

fn overflow_cell(o: &OverflowReport) -> String {
    fmt_real(o.d_log_r.unwrap_or(o.log_abs_total))
}

fn value_sig6(v: &Value) -> String {
    match v {
        Ok(x) => fmt_sig6(*x),
        Err(o) => format!("overflow (ln|value| = {})", fmt_sig6(o.log_abs_total)),
    }
}

/// The leading `label..d` CSV cells shared by several reports.
pub fn param_cells(label: &str, p: &ModelParams) -> Vec<String> {
    vec![label.to_string(), fmt_real(p.w()), fmt_real(p.b()), fmt_real(p.alpha()), fmt_real(p.q()), p.d().to_string()]
}

impl Analysis {
    pub fn overflowed(&self) -> bool {
        self.total.is_err()
    }

    pub fn csv_record(&self) -> Vec<String> {
        let mut row = param_cells(&self.label, &self.params);
        row.push(fmt_real(self.ratio));
        row.push(self.regime.regime.as_str().to_string());
        match (&self.total, &self.multiplier) {
            (Ok(t), Ok(m)) => row.extend([fmt_real(*t), fmt_real(*m), String::new()]),
            (Ok(t), Err(o)) => row.extend([fmt_real(*t), String::new(), overflow_cell(o)]),
            (Err(o), m) => row.extend([String::new(), m.map(fmt_real).unwrap_or_default(), overflow_cell(o)]),
        }
        row.push(fmt_real(self.dyadic));
        match self.m_inf {
            Some(m) => row.extend([fmt_real(m), fmt_real(self.dyadic * m)]),
            None => row.extend([String::new(), String::new()]),
        }
        row
    }

    pub fn render(&self) -> String {
        let p = &self.params;
        let mut out = String::new();
        let _ = writeln!(out, "scenario  {}", self.label);
        let _ = writeln!(
            out,
            "params    w={} b={} alpha={} q={} d={}",
            fmt_sig6(p.w()),
            fmt_sig6(p.b()),
            fmt_sig6(p.alpha()),
            fmt_sig6(p.q()),
            p.d()
        );
        let _ = writeln!(
            out,
            "r         {}  ({}, tolerance {})",
            fmt_sig6(self.ratio),
            self.regime.regime,
            fmt_sig6(self.regime.tolerance_used)
        );
        let _ = writeln!(out, "T         {}", value_sig6(&self.total));
        let _ = writeln!(out, "M         {}", value_sig6(&self.multiplier));
        let _ = writeln!(out, "T_dyad    {}", fmt_sig6(self.dyadic));
        match self.m_inf {
            Some(m) => {
                let _ = writeln!(out, "M_inf     {}  (T_inf = {})", fmt_sig6(m), fmt_sig6(self.dyadic * m));
            }
            None => {
                let _ = writeln!(out, "M_inf     diverges (r >= 1): only a depth cap bounds the total");
            }
        }
        if !self.shares.is_empty() {
            let cells: Vec<String> =
                self.shares.iter().map(|(k, s)| format!("first {k}: {}", fmt_sig6(*s))).collect();
            let _ = writeln!(out, "shares    {}", cells.join("  "));
        }
        if let Some(t) = &self.scheduled_total {
            let _ = writeln!(out, "T_sched   {}", value_sig6(t));
        }
        if let Some(g) = &self.graph {
            let _ = writeln!(out, "graph     {} nodes, {} arcs, seed {}", g.nodes, g.arcs, g.seed_node);
            let _ = writeln!(out, "  walk total    {}", value_sig6(&g.walk_total));
            let _ = writeln!(
                out,
                "  rho(A)        {}{}",
                fmt_sig6(g.neumann.spectral.rho),
                if g.neumann.spectral.converged { "" } else { " (not converged)" }
            );
            let _ = writeln!(
                out,
                "  margin aq*rho {}  ({})",
                fmt_sig6(g.neumann.margin),
                if g.neumann.convergent { "walk series converges" } else { "walk series diverges" }
            );
        }
        match &self.hops {
            Some(h) => {
                let _ = writeln!(out, "\n{:>5}  {:>14}  {:>14}  {:>14}", "hop", "agents", "impact", "layer total");
                let rows = &h.per_depth;
                let shown: Vec<usize> = if rows.len() <= HOP_ROWS_SHOWN {
                    (0..rows.len()).collect()
                } else {
                    (0..HOP_ROWS_SHOWN - 3).chain(rows.len() - 3..rows.len()).collect()
                };
                let mut prev = None;
                for i in shown {
                    if prev.is_some_and(|p| p + 1 != i) {
                        let _ = writeln!(out, "{:>5}", "...");
                    }
                    let rec = &rows[i];
                    let _ = writeln!(
                        out,
                        "{:>5}  {:>14}  {:>14}  {:>14}",
                        rec.k,
                        fmt_sig6(rec.expected_count),
                        fmt_sig6(rec.per_agent_impact),
                        fmt_sig6(rec.layer_total)
                    );
                    prev = Some(i);
                }
            }
            None => {
                let _ = writeln!(out, "\n(hop table omitted: depth above {HOP_TABLE_MAX} or layers overflow)");
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LeverStatus {
    AlreadySubcritical,
    /// Value putting `r` exactly at 1, others held fixed.
    Critical(f64),
    Infeasible { value: f64, range: &'static str },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeverLine {
    pub name: &'static str,
    pub current: f64,
    pub status: LeverStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeverReport {
    pub label: String,
    pub params: ModelParams,
    pub ratio: f64,
    pub regime: Regime,
    pub levers: Vec<LeverLine>,
    pub budget: Option<(f64, DepthCap)>,
}

pub const LEVER_HEADER: [&str; 6] = ["label", "lever", "current", "target", "status", "budget"];

pub fn lever_report(spec: &ScenarioSpec, budget: Option<f64>, tol: f64) -> CliResult<LeverReport> {
    let p = spec.params;
    let r = p.ratio();
    let regime = classify_regime(r, tol)?.regime;
    let (b, alpha, q) = (p.b(), p.alpha(), p.q());
    let mut levers = Vec::new();
    for (lever, current) in [
        (CriticalLever::Branching { alpha, q }, b),
        (CriticalLever::Attenuation { b, q }, alpha),
        (CriticalLever::Compliance { b, alpha }, q),
    ] {
        let status = if regime == Regime::Subcritical {
            LeverStatus::AlreadySubcritical
        } else {
            match solve_critical_lever(lever) {
                Ok(v) => LeverStatus::Critical(v),
                Err(CoreError::InfeasibleLever { value, range, .. }) => LeverStatus::Infeasible { value, range },
                Err(e) => return Err(e.into()),
            }
        };
        levers.push(LeverLine { name: lever.name(), current, status });
    }
    let budget = match budget {
        Some(m) => Some((m, depth_cap_for_budget(r, m)?)),
        None => None,
    };
    Ok(LeverReport { label: spec.label.clone(), params: p, ratio: r.value(), regime, levers, budget })
}

impl LeverReport {
    pub fn csv_records(&self) -> Vec<Vec<String>> {
        let mut rows = Vec::new();
        for l in &self.levers {
            let (target, status) = match l.status {
                LeverStatus::AlreadySubcritical => (String::new(), "already subcritical"),
                LeverStatus::Critical(v) => (fmt_real(v), "critical"),
                LeverStatus::Infeasible { value, .. } => (fmt_real(value), "infeasible"),
            };
            rows.push(vec![self.label.clone(), l.name.into(), fmt_real(l.current), target, status.into(), String::new()]);
        }
        if let Some((m, cap)) = self.budget {
            let (target, status) = match cap {
                DepthCap::Cap(d) => (d.to_string(), "cap"),
                DepthCap::Unbounded => (String::new(), "unbounded"),
                DepthCap::Infeasible => (String::new(), "infeasible"),
            };
            rows.push(vec![
                self.label.clone(),
                "d".into(),
                self.params.d().to_string(),
                target,
                status.into(),
                fmt_real(m),
            ]);
        }
        rows
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "levers for {} (r = {}, {})", self.label, fmt_sig6(self.ratio), self.regime);
        let _ = writeln!(out, "{:<7}{:>12}  value for r = 1", "lever", "current");
        for l in &self.levers {
            let status = match l.status {
                LeverStatus::AlreadySubcritical => "already subcritical".to_string(),
                LeverStatus::Critical(v) => fmt_sig6(v),
                LeverStatus::Infeasible { value, range } => {
                    format!("infeasible ({} outside {range})", fmt_sig6(value))
                }
            };
            let _ = writeln!(out, "{:<7}{:>12}  {}", l.name, fmt_sig6(l.current), status);
        }
        if let Some((m, cap)) = self.budget {
            let line = match cap {
                DepthCap::Cap(d) => {
                    let md = geometric_sum(self.ratio, d).map(fmt_sig6).unwrap_or_else(|_| "overflow".into());
                    format!("d* = {d} (M_{d} = {md})")
                }
                DepthCap::Unbounded => "no cap needed: M_inf is within budget".into(),
                DepthCap::Infeasible => "infeasible: even the dyadic layer (M = 1) exceeds it".into(),
            };
            let _ = writeln!(out, "depth cap for M <= {}: {line}", fmt_sig6(m));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::scenario::parse_scenario;
    use netcascade_core::DEFAULT_CRITICAL_TOLERANCE as TOL;

    fn preset(name: &str) -> ScenarioSpec {
        parse_scenario(presets::find(name).unwrap().text).unwrap()
    }

    #[test]
    fn worked_example_row() {
        let a = run_scenario(&preset("worked-example"), None, TOL).unwrap();
        assert_eq!(a.total, Ok(2031.171875));
        assert_eq!(a.multiplier, Ok(406.234375));
        assert_eq!(a.regime.regime, Regime::Supercritical);
        assert_eq!(a.m_inf, None);
        let row = a.csv_record();
        assert_eq!(row[..10], ["worked-example", "1", "5", "0.5", "1", "7", "2.5", "supercritical", "2031.171875", "406.234375"]);
        assert_eq!(row[10..], ["", "5", "", ""]);
        assert_eq!(a.hops.as_ref().unwrap().per_depth.len(), 7);
        assert_eq!(a.shares.len(), 3);
    }

    #[test]
    fn friction_is_exact() {
        let a = run_scenario(&preset("vaccination-friction"), None, TOL).unwrap();
        assert_eq!(a.ratio, 0.6);
        assert_eq!(a.m_inf, Some(2.5));
        assert_eq!(a.csv_record()[12..], ["2.5", "12.5"]);
        assert!(a.render().contains("subcritical"));
    }

    #[test]
    fn overflow_goes_to_its_column() {
        let spec = ScenarioSpec::new("huge", ModelParams::new(1.0, 1e6, 1.0, 1.0, 100).unwrap());
        let a = run_scenario(&spec, None, TOL).unwrap();
        assert!(a.overflowed());
        let row = a.csv_record();
        assert_eq!(row[8], "");
        let dlr: f64 = row[10].parse().unwrap();
        assert!((dlr - 100.0 * 1e6f64.ln()).abs() < 1e-9);
        assert!(a.hops.is_none());
    }

    #[test]
    fn pandemic_levers() {
        let rep = lever_report(&preset("pandemic"), Some(10.0), TOL).unwrap();
        let target = |i: usize| match rep.levers[i].status {
            LeverStatus::Critical(v) => v,
            other => panic!("{other:?}"),
        };
        assert!((target(0) - 1.0 / 0.42).abs() < 1e-12);
        assert!((target(1) - 1.0 / 4.8).abs() < 1e-12);
        assert!((target(2) - 1.0 / 5.6).abs() < 1e-12);
        assert_eq!(rep.budget, Some((10.0, DepthCap::Cap(2))));
        assert!(rep.render().contains("d* = 2 (M_2 = 4.36)"));
        assert_eq!(rep.csv_records().len(), 4);
    }

    #[test]
    fn subcritical_levers() {
        let rep = lever_report(&preset("vaccination-friction"), None, TOL).unwrap();
        assert!(rep.levers.iter().all(|l| l.status == LeverStatus::AlreadySubcritical));
        assert!(rep.csv_records().iter().all(|r| r[4] == "already subcritical"));
    }

    #[test]
    fn infeasible_lever_reported() {
        // inside the critical band but just below 1: alpha would have to exceed 1
        let spec = ScenarioSpec::new("x", ModelParams::new(1.0, 1.0, 1.0, 1.0 - 5e-10, 3).unwrap());
        let rep = lever_report(&spec, None, TOL).unwrap();
        assert_eq!(rep.regime, Regime::Critical);
        assert!(matches!(rep.levers[1].status, LeverStatus::Infeasible { value, range: "(0, 1]" } if value > 1.0));
        assert!(matches!(rep.levers[2].status, LeverStatus::Critical(v) if v == 1.0));
        assert!(rep.render().contains("infeasible"));
    }
}
