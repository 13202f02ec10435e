//! The `graph` subcommand: walk-sum layers on an explicit network next to
//! the homogeneous tree they generalise.

use std::fmt::Write as _;

use netcascade_core::analytic::hop_breakdown;
use netcascade_core::graph::{graph_layer_weights, SeedSpec, WeightedDigraph};

use crate::error::CliResult;
use crate::fmt::{fmt_real, fmt_sig6};
use crate::report::{run_scenario, Analysis};
use crate::scenario::ScenarioSpec;

pub const LAYER_HEADER: [&str; 5] = ["k", "walks", "impact", "layer_total", "tree_layer_total"];

#[derive(Debug, Clone, PartialEq)]
pub struct GraphLayer {
    pub k: u32,
    /// `‖A^k e_s‖₁`, the weighted number of length-`k` walks from the seed.
    pub walks: f64,
    /// `w (αq)^{k−1}`: per-walk impact with the compliance gate applied.
    pub impact: f64,
    pub layer_total: f64,
    /// Same layer of the homogeneous `b`-ary model, when representable.
    pub tree_layer_total: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphReport {
    pub analysis: Analysis,
    pub layers: Vec<GraphLayer>,
}

pub fn graph_command(spec: &ScenarioSpec, g: &WeightedDigraph, seed: SeedSpec, tol: f64) -> CliResult<GraphReport> {
    let analysis = run_scenario(spec, Some((g, seed)), tol)?;
    let p = spec.params;
    let walks = graph_layer_weights(g, seed, p.d());
    let tree = hop_breakdown(&p).ok();
    let mut impact = p.w();
    let mut layers = Vec::with_capacity(walks.len());
    for (i, &wk) in walks.iter().enumerate() {
        if i > 0 {
            impact *= p.alpha() * p.q();
        }
        layers.push(GraphLayer {
            k: i as u32 + 1,
            walks: wk,
            impact,
            layer_total: wk * impact,
            tree_layer_total: tree.as_ref().map(|t| t.per_depth[i].layer_total),
        });
    }
    Ok(GraphReport { analysis, layers })
}

impl GraphReport {
    pub fn csv_records(&self) -> Vec<Vec<String>> {
        self.layers
            .iter()
            .map(|l| {
                vec![
                    l.k.to_string(),
                    fmt_real(l.walks),
                    fmt_real(l.impact),
                    fmt_real(l.layer_total),
                    l.tree_layer_total.map(fmt_real).unwrap_or_default(),
                ]
            })
            .collect()
    }

    pub fn render(&self) -> String {
        let mut out = self.analysis.render();
        let _ = writeln!(out, "\n{:>5}  {:>14}  {:>14}  {:>14}  {:>14}", "hop", "walks", "impact", "layer total", "tree layer");
        for l in self.layers.iter().take(50) {
            let _ = writeln!(
                out,
                "{:>5}  {:>14}  {:>14}  {:>14}  {:>14}",
                l.k,
                fmt_sig6(l.walks),
                fmt_sig6(l.impact),
                fmt_sig6(l.layer_total),
                l.tree_layer_total.map(fmt_sig6).unwrap_or_else(|| "-".into())
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use netcascade_core::graph::{generate_graph, GraphFamily};
    use netcascade_core::ModelParams;

    #[test]
    fn tree_layers_match_closed_form() {
        let g = generate_graph(GraphFamily::BAryTree { b: 3, depth: 4 }).unwrap();
        let spec = ScenarioSpec::new("t", ModelParams::new(2.0, 3.0, 0.5, 0.8, 4).unwrap());
        let rep = graph_command(&spec, &g, SeedSpec::new(0, &g).unwrap(), 1e-9).unwrap();
        // on the tree every hop reaches b^k nodes, the q gate sits in `impact`
        for l in &rep.layers {
            let tree = l.tree_layer_total.unwrap();
            assert!((l.layer_total - tree).abs() <= 1e-12 * tree, "{l:?}");
        }
        assert_eq!(rep.csv_records().len(), 4);
        assert!(rep.analysis.graph.as_ref().unwrap().neumann.convergent);
    }
}
