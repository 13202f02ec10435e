use alloc::vec::Vec;

use super::{Arc, WeightedDigraph};
use crate::error::{check, Error, Result};
use crate::rng::{below, bernoulli, seeded};

/// Generators refuse to build graphs larger than this.
const MAX_NODES: usize = 1 << 26;

/// Synthetic graph families. All emit unit weights; undirected families
/// emit both arc directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphFamily {
    /// Complete `b`-ary tree, arcs parent → child, root is node 0 and the
    /// children of `v` are `b·v + 1 ..= b·v + b`.
    BAryTree { b: u32, depth: u32 },
    /// `G(n, p)`: each unordered pair independently with probability `p_edge`.
    ErdosRenyi { n: usize, p_edge: f64, rng_seed: u64 },
    /// Preferential attachment from a complete core of `m_attach + 1` nodes.
    BarabasiAlbert { n: usize, m_attach: usize, rng_seed: u64 },
    Complete { n: usize },
    /// Ring on `n ≥ 3` nodes.
    Cycle { n: usize },
    /// Hub 0 joined to `leaves` leaf nodes.
    Star { leaves: usize },
}

pub fn generate_graph(family: GraphFamily) -> Result<WeightedDigraph> {
    match family {
        GraphFamily::BAryTree { b, depth } => b_ary_tree(b, depth),
        GraphFamily::ErdosRenyi { n, p_edge, rng_seed } => erdos_renyi(n, p_edge, rng_seed),
        GraphFamily::BarabasiAlbert { n, m_attach, rng_seed } => barabasi_albert(n, m_attach, rng_seed),
        GraphFamily::Complete { n } => {
            check_nodes(n)?;
            let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
            undirected(n, edges)
        }
        GraphFamily::Cycle { n } => {
            check(n >= 3, "n", n as f64, "at least 3 nodes for a cycle")?;
            check_nodes(n)?;
            undirected(n, (0..n).map(|i| (i, (i + 1) % n)))
        }
        GraphFamily::Star { leaves } => {
            check_nodes(leaves + 1)?;
            undirected(leaves + 1, (1..=leaves).map(|leaf| (0, leaf)))
        }
    }
}

fn check_nodes(n: usize) -> Result<()> {
    check(n >= 1, "n", n as f64, "at least one node")?;
    check(n <= MAX_NODES, "n", n as f64, "at most 2^26 nodes")
}

fn undirected<I: IntoIterator<Item = (usize, usize)>>(n: usize, edges: I) -> Result<WeightedDigraph> {
    let arcs = edges.into_iter().flat_map(|(i, j)| [Arc::unit(i, j), Arc::unit(j, i)]);
    WeightedDigraph::from_arcs(n, arcs)
}

fn b_ary_tree(b: u32, depth: u32) -> Result<WeightedDigraph> {
    check(b >= 1, "b", f64::from(b), "an integer >= 1")?;
    let b = b as usize;
    let mut n: usize = 1;
    let mut layer: usize = 1;
    for _ in 0..depth {
        layer = layer.checked_mul(b).ok_or(Error::InvalidGraph("tree too large"))?;
        n = n.checked_add(layer).ok_or(Error::InvalidGraph("tree too large"))?;
        if n > MAX_NODES {
            return Err(Error::InvalidGraph("tree too large"));
        }
    }
    let arcs = (1..n).map(|child| Arc::unit((child - 1) / b, child));
    WeightedDigraph::from_arcs(n, arcs)
}

fn erdos_renyi(n: usize, p_edge: f64, seed: u64) -> Result<WeightedDigraph> {
    check_nodes(n)?;
    check((0.0..=1.0).contains(&p_edge), "p_edge", p_edge, "a probability in [0, 1]")?;
    let mut rng = seeded(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if bernoulli(&mut rng, p_edge) {
                edges.push((i, j));
            }
        }
    }
    undirected(n, edges)
}

fn barabasi_albert(n: usize, m: usize, seed: u64) -> Result<WeightedDigraph> {
    check_nodes(n)?;
    check(m >= 1 && m < n, "m_attach", m as f64, "an integer in [1, n)")?;
    let mut rng = seeded(seed);
    let mut edges = Vec::new();
    // every edge contributes both endpoints, so sampling uniformly from this
    // list picks a node with probability proportional to its degree
    let mut endpoints = Vec::new();
    for i in 0..=m {
        for j in i + 1..=m {
            edges.push((i, j));
            endpoints.extend([i, j]);
        }
    }
    let mut chosen = Vec::with_capacity(m);
    for v in m + 1..n {
        chosen.clear();
        while chosen.len() < m {
            let t = endpoints[below(&mut rng, endpoints.len())];
            if !chosen.contains(&t) {
                chosen.push(t);
            }
        }
        for &t in &chosen {
            edges.push((t, v));
            endpoints.extend([t, v]);
        }
    }
    undirected(n, edges)
}
