//! Weighted adjacency generalisation of the branching model.
//!
//! Arcs point from the influencing agent to the influenced one. The graph
//! is stored in compressed sparse rows, so pushing a vector along all arcs
//! costs `O(arcs)` and always visits arcs in the same order.

mod generate;
mod spectral;
mod walk;

use alloc::vec::Vec;

pub use generate::{generate_graph, GraphFamily};
pub use spectral::{neumann_convergent, spectral_radius, NeumannCheck, SpectralEstimate};
pub use walk::{graph_layer_weights, graph_total};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub src: usize,
    pub dst: usize,
    pub weight: f64,
}

impl Arc {
    pub fn new(src: usize, dst: usize, weight: f64) -> Self {
        Self { src, dst, weight }
    }

    pub fn unit(src: usize, dst: usize) -> Self {
        Self::new(src, dst, 1.0)
    }
}

/// What [`WeightedDigraph::from_arcs_with_report`] had to fix up.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildReport {
    /// Arcs folded into an earlier arc with the same endpoints.
    pub merged_arcs: usize,
    pub self_loops: usize,
}

/// The initiating agent's node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedSpec {
    pub seed_node: usize,
}

impl SeedSpec {
    pub fn new(seed_node: usize, g: &WeightedDigraph) -> Result<Self> {
        if seed_node < g.node_count() {
            Ok(Self { seed_node })
        } else {
            Err(Error::NodeOutOfRange { node: seed_node, n: g.node_count() })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDigraph {
    n: usize,
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
}

impl WeightedDigraph {
    pub fn from_arcs<I: IntoIterator<Item = Arc>>(n: usize, arcs: I) -> Result<Self> {
        Self::from_arcs_with_report(n, arcs).map(|(g, _)| g)
    }

    /// Builds the graph, summing the weights of repeated `(src, dst)` pairs.
    pub fn from_arcs_with_report<I: IntoIterator<Item = Arc>>(n: usize, arcs: I) -> Result<(Self, BuildReport)> {
        let mut arcs: Vec<Arc> = arcs.into_iter().collect();
        for a in &arcs {
            if a.src >= n {
                return Err(Error::NodeOutOfRange { node: a.src, n });
            }
            if a.dst >= n {
                return Err(Error::NodeOutOfRange { node: a.dst, n });
            }
            if !(a.weight.is_finite() && a.weight >= 0.0) {
                return Err(Error::InvalidGraph("arc weights must be finite and nonnegative"));
            }
        }
        // stable sort keeps input order among duplicates, so merged sums are reproducible
        arcs.sort_by_key(|a| (a.src, a.dst));

        let mut report = BuildReport::default();
        let mut offsets = alloc::vec![0usize; n + 1];
        let mut targets = Vec::with_capacity(arcs.len());
        let mut weights: Vec<f64> = Vec::with_capacity(arcs.len());
        let mut last: Option<(usize, usize)> = None;
        for a in &arcs {
            if last == Some((a.src, a.dst)) {
                *weights.last_mut().expect("previous arc") += a.weight;
                report.merged_arcs += 1;
                continue;
            }
            if a.src == a.dst {
                report.self_loops += 1;
            }
            offsets[a.src + 1] += 1;
            targets.push(a.dst);
            weights.push(a.weight);
            last = Some((a.src, a.dst));
        }
        for v in 0..n {
            offsets[v + 1] += offsets[v];
        }
        Ok((Self { n, offsets, targets, weights }, report))
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn arc_count(&self) -> usize {
        self.targets.len()
    }

    pub fn successors(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[v]..self.offsets[v + 1];
        self.targets[range.clone()].iter().copied().zip(self.weights[range].iter().copied())
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn out_weight(&self, v: usize) -> f64 {
        self.successors(v).map(|(_, w)| w).sum()
    }

    /// Arcs in `(src, dst)` order.
    pub fn arcs(&self) -> impl Iterator<Item = Arc> + '_ {
        (0..self.n).flat_map(move |src| self.successors(src).map(move |(dst, weight)| Arc { src, dst, weight }))
    }

    pub fn self_loop_count(&self) -> usize {
        self.arcs().filter(|a| a.src == a.dst).count()
    }

    pub fn is_unit_weight(&self) -> bool {
        self.weights.iter().all(|&w| w == 1.0)
    }

    /// `y[dst] = Σ_src weight(src→dst) · x[src]`: mass flowing one hop along
    /// every arc.
    pub fn push_forward(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        y.iter_mut().for_each(|v| *v = 0.0);
        for (src, &mass) in x.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for (dst, w) in self.successors(src) {
                y[dst] += w * mass;
            }
        }
    }
}
