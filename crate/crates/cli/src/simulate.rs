//! Monte Carlo runs of a scenario, parallel over trials.
//!
//! Trials are realised on the rayon pool a chunk at a time and folded into
//! the accumulator in trial order. Every trial owns its random stream, so
//! the summary is bit-identical to a sequential run for any thread count.

use std::fmt::Write as _;
use std::ops::Range;

use netcascade_core::analytic::total_responsibility;
use netcascade_core::graph::{graph_total, SeedSpec, WeightedDigraph};
use netcascade_core::sim::{
    branching_trial, compare_to_analytic, Comparison, GraphCascade, SimAccumulator, SimConfig, SimResult,
    TrialOutcome,
};
use rayon::prelude::*;

use crate::error::CliResult;
use crate::fmt::{fmt_real, fmt_sig6};
use crate::scenario::ScenarioSpec;

pub const SIM_HEADER: [&str; 13] = [
    "label", "model", "trials", "seed", "cap", "mean", "std_error", "ci_low", "ci_high", "analytic", "z",
    "consistent", "truncated",
];

/// Bounds the outcomes held in memory at once (each carries `d` counts).
fn chunk_len(d: u32) -> u64 {
    ((1u64 << 22) / (u64::from(d) + 1)).clamp(64, 1 << 16)
}

fn fold_chunks(cfg: &SimConfig, d: u32, mut run: impl FnMut(Range<u64>) -> Vec<TrialOutcome>) -> SimResult {
    let step = chunk_len(d);
    let mut acc = SimAccumulator::new(d);
    let mut start = 0;
    while start < cfg.trials {
        let end = cfg.trials.min(start + step);
        for o in run(start..end) {
            acc.push(&o);
        }
        start = end;
    }
    acc.finish(cfg.confidence_z)
}

pub fn parallel_branching(spec: &ScenarioSpec, cfg: &SimConfig) -> CliResult<SimResult> {
    cfg.validate()?;
    let p = spec.params;
    Ok(fold_chunks(cfg, p.d(), |r| r.into_par_iter().map(|t| branching_trial(&p, cfg, t)).collect()))
}

pub fn parallel_graph_cascade(
    spec: &ScenarioSpec,
    g: &WeightedDigraph,
    seed: SeedSpec,
    cfg: &SimConfig,
) -> CliResult<SimResult> {
    cfg.validate()?;
    let p = spec.params;
    let cascade = GraphCascade::new(g, p.w(), p.alpha(), p.q(), seed, p.d())?;
    Ok(fold_chunks(cfg, p.d(), |r| {
        r.into_par_iter().map_init(|| cascade.scratch(), |scratch, t| cascade.trial(cfg, t, scratch)).collect()
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub label: String,
    pub config: SimConfig,
    pub on_graph: bool,
    pub result: SimResult,
    pub analytic: f64,
    pub comparison: Comparison,
}

impl SimReport {
    /// Truncated trials bias the mean low, so the verdict is void.
    pub fn reliable(&self) -> bool {
        self.result.trials_truncated == 0
    }

    fn model(&self) -> &'static str {
        if self.on_graph {
            "independent-cascade"
        } else {
            "branching"
        }
    }

    pub fn csv_record(&self) -> Vec<String> {
        let r = &self.result;
        let verdict = if !self.reliable() {
            "unreliable"
        } else if self.comparison.consistent {
            "yes"
        } else {
            "no"
        };
        vec![
            self.label.clone(),
            self.model().into(),
            r.trials.to_string(),
            self.config.master_seed.to_string(),
            self.config.max_nodes_per_trial.to_string(),
            fmt_real(r.mean),
            fmt_real(r.std_error),
            fmt_real(r.ci_low),
            fmt_real(r.ci_high),
            fmt_real(self.analytic),
            fmt_real(self.comparison.z_score),
            verdict.into(),
            r.trials_truncated.to_string(),
        ]
    }

    pub fn render(&self) -> String {
        let r = &self.result;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "simulation  {} ({}, {} trials, seed {})",
            self.label,
            self.model(),
            r.trials,
            self.config.master_seed
        );
        let _ = writeln!(
            out,
            "mean        {}  (se {}, {} CI [{}, {}])",
            fmt_sig6(r.mean),
            fmt_sig6(r.std_error),
            fmt_sig6(self.config.confidence_z),
            fmt_sig6(r.ci_low),
            fmt_sig6(r.ci_high)
        );
        let reference = if self.on_graph { "walk sum" } else { "closed form" };
        let _ = writeln!(out, "analytic    {}  ({reference})", fmt_sig6(self.analytic));
        let verdict = if self.comparison.deterministic {
            if self.comparison.consistent { "consistent (exact match, zero spread)" } else { "inconsistent (zero spread, values differ)" }
        } else if self.comparison.consistent {
            "consistent (|z| <= 4)"
        } else {
            "inconsistent (|z| > 4)"
        };
        let _ = writeln!(out, "z           {}  {verdict}", fmt_sig6(self.comparison.z_score));
        if self.on_graph {
            let _ = writeln!(out, "            the walk sum counts revisits, so on cyclic graphs the cascade sits at or below it");
        }
        if !self.reliable() {
            let _ = writeln!(
                out,
                "UNRELIABLE  {} of {} trials hit the cap of {} agents; the mean is biased low",
                r.trials_truncated, r.trials, self.config.max_nodes_per_trial
            );
        }
        let _ = writeln!(out, "\n{:>5}  {:>14}  {:>14}", "hop", "mean reached", "std error");
        for (k, (m, se)) in r.per_depth_mean_counts.iter().zip(&r.per_depth_std_error).enumerate().take(50) {
            let _ = writeln!(out, "{:>5}  {:>14}  {:>14}", k + 1, fmt_sig6(*m), fmt_sig6(*se));
        }
        out
    }
}

pub fn simulate_command(
    spec: &ScenarioSpec,
    graph: Option<(&WeightedDigraph, SeedSpec)>,
    cfg: &SimConfig,
) -> CliResult<SimReport> {
    let p = spec.params;
    let (result, analytic) = match graph {
        Some((g, seed)) => {
            let analytic = graph_total(p.w(), p.alpha(), p.q(), g, seed, p.d())?;
            (parallel_graph_cascade(spec, g, seed, cfg)?, analytic)
        }
        None => (parallel_branching(spec, cfg)?, total_responsibility(&p)?),
    };
    let comparison = compare_to_analytic(&result, analytic);
    Ok(SimReport { label: spec.label.clone(), config: *cfg, on_graph: graph.is_some(), result, analytic, comparison })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::scenario::parse_scenario;
    use netcascade_core::graph::{generate_graph, GraphFamily};
    use netcascade_core::sim::{simulate_branching, simulate_graph_cascade};

    fn preset(name: &str) -> ScenarioSpec {
        parse_scenario(presets::find(name).unwrap().text).unwrap()
    }

    #[test]
    fn parallel_matches_sequential_bitwise() {
        let spec = preset("subcritical");
        let cfg = SimConfig::new(20_000, 7);
        assert_eq!(parallel_branching(&spec, &cfg).unwrap(), simulate_branching(&spec.params, &cfg).unwrap());

        let g = generate_graph(GraphFamily::ErdosRenyi { n: 200, p_edge: 0.03, rng_seed: 1 }).unwrap();
        let seed = SeedSpec::new(0, &g).unwrap();
        let cfg = SimConfig::new(3_000, 11);
        let p = spec.params;
        let seq = simulate_graph_cascade(&g, p.w(), p.alpha(), p.q(), seed, p.d(), &cfg).unwrap();
        assert_eq!(parallel_graph_cascade(&spec, &g, seed, &cfg).unwrap(), seq);
    }

    #[test]
    fn chunking_does_not_matter() {
        // d large enough that trials span several chunks
        let spec = ScenarioSpec::new("deep", netcascade_core::ModelParams::new(1.0, 1.0, 0.9, 0.9, 400).unwrap());
        let cfg = SimConfig::new(30_000, 3);
        assert!(chunk_len(400) < 30_000);
        assert_eq!(parallel_branching(&spec, &cfg).unwrap(), simulate_branching(&spec.params, &cfg).unwrap());
    }

    #[test]
    fn deterministic_tree() {
        let rep = simulate_command(&preset("deterministic-tree"), None, &SimConfig::new(500, 1)).unwrap();
        assert_eq!(rep.result.mean, 14.0);
        assert!(rep.comparison.deterministic && rep.comparison.consistent);
        assert_eq!(rep.csv_record()[11], "yes");
    }

    #[test]
    fn truncation_marks_unreliable() {
        let rep = simulate_command(&preset("runaway"), None, &SimConfig::new(20, 5).with_cap(1000)).unwrap();
        assert_eq!(rep.result.trials_truncated, 20);
        assert!(!rep.reliable());
        assert!(rep.render().contains("UNRELIABLE"));
        assert_eq!(rep.csv_record()[11], "unreliable");
    }
}
