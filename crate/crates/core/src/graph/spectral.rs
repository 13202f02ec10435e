use alloc::vec::Vec;

use super::WeightedDigraph;
use crate::error::{check, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralEstimate {
    pub rho: f64,
    /// Power-iteration steps summed over all strongly connected components.
    pub iterations: usize,
    pub converged: bool,
    pub tolerance: f64,
}

/// Perron root of the adjacency operator.
///
/// The spectral radius of a nonnegative matrix is the largest spectral
/// radius of its strongly connected components, so each nontrivial component
/// is iterated separately. Within a component the matrix is irreducible and
/// `A + I` is primitive, which makes power iteration converge even on
/// periodic (bipartite) structure; the unit shift is removed on return.
/// Acyclic graphs have no nontrivial component and give exactly 0.
pub fn spectral_radius(g: &WeightedDigraph, tol: f64, max_iter: usize) -> Result<SpectralEstimate> {
    check(g.node_count() >= 1, "n", 0.0, "a nonempty graph")?;
    check(tol.is_finite() && tol > 0.0, "tol", tol, "a finite positive real")?;
    let components = strongly_connected_components(g);
    let mut local = alloc::vec![usize::MAX; g.node_count()];
    let mut rho: f64 = 0.0;
    let mut iterations = 0;
    let mut converged = true;
    for comp in &components {
        let (r, it, ok) = if comp.len() == 1 {
            let v = comp[0];
            let loop_weight = g.successors(v).filter(|&(d, _)| d == v).map(|(_, w)| w).sum::<f64>();
            (loop_weight, 0, true)
        } else {
            component_power_iteration(g, comp, &mut local, tol, max_iter)
        };
        rho = rho.max(r);
        iterations += it;
        converged &= ok;
    }
    let estimate = SpectralEstimate { rho, iterations, converged, tolerance: tol };
    if converged {
        Ok(estimate)
    } else {
        Err(Error::NotConverged { estimate: rho, iterations })
    }
}

fn component_power_iteration(
    g: &WeightedDigraph,
    comp: &[usize],
    local: &mut [usize],
    tol: f64,
    max_iter: usize,
) -> (f64, usize, bool) {
    for (i, &v) in comp.iter().enumerate() {
        local[v] = i;
    }
    let m = comp.len();
    let mut x = alloc::vec![1.0 / m as f64; m];
    let mut y = alloc::vec![0.0; m];
    let mut lambda_prev = f64::NAN;
    let mut lambda = 0.0;
    let mut ok = false;
    let mut it = 0;
    while it < max_iter {
        it += 1;
        y.copy_from_slice(&x);
        for (i, &v) in comp.iter().enumerate() {
            for (dst, w) in g.successors(v) {
                let j = local[dst];
                if j != usize::MAX {
                    y[j] += w * x[i];
                }
            }
        }
        // x sums to one, so the L1 norm of y is the Rayleigh-type estimate
        lambda = y.iter().sum::<f64>();
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / lambda;
        }
        if (lambda - lambda_prev).abs() <= tol * lambda {
            ok = true;
            break;
        }
        lambda_prev = lambda;
    }
    for &v in comp {
        local[v] = usize::MAX;
    }
    ((lambda - 1.0).max(0.0), it, ok)
}

/// Tarjan's algorithm with an explicit call stack.
pub(super) fn strongly_connected_components(g: &WeightedDigraph) -> Vec<Vec<usize>> {
    const UNSET: usize = usize::MAX;
    let n = g.node_count();
    let mut index = alloc::vec![UNSET; n];
    let mut low = alloc::vec![0usize; n];
    let mut on_stack = alloc::vec![false; n];
    let mut stack = Vec::new();
    let mut calls: Vec<(usize, usize)> = Vec::new();
    let mut next = 0;
    let mut out = Vec::new();

    for root in 0..n {
        if index[root] != UNSET {
            continue;
        }
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        calls.push((root, g.offsets[root]));
        while let Some(&mut (v, ref mut pos)) = calls.last_mut() {
            if *pos < g.offsets[v + 1] {
                let w = g.targets[*pos];
                *pos += 1;
                if index[w] == UNSET {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    calls.push((w, g.offsets[w]));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                calls.pop();
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let u = stack.pop().expect("tarjan stack");
                        on_stack[u] = false;
                        comp.push(u);
                        if u == v {
                            break;
                        }
                    }
                    out.push(comp);
                }
                if let Some(&(parent, _)) = calls.last() {
                    low[parent] = low[parent].min(low[v]);
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeumannCheck {
    /// `α·q·ρ(A)`.
    pub margin: f64,
    pub convergent: bool,
    pub spectral: SpectralEstimate,
}

/// Whether `Σ_j (αqA)^j` converges: `αq·ρ(A) < 1 − tol`.
pub fn neumann_convergent(alpha: f64, q: f64, g: &WeightedDigraph, tol: f64) -> Result<NeumannCheck> {
    check(alpha > 0.0 && alpha <= 1.0, "alpha", alpha, "a real in (0, 1]")?;
    check((0.0..=1.0).contains(&q), "q", q, "a real in [0, 1]")?;
    check(tol.is_finite() && tol >= 0.0, "tol", tol, "a finite real >= 0")?;
    let spectral = spectral_radius(g, 1e-10, 10_000)?;
    let margin = alpha * q * spectral.rho;
    Ok(NeumannCheck { margin, convergent: margin < 1.0 - tol, spectral })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use crate::graph::{generate_graph, Arc, GraphFamily};

    fn rho(g: &WeightedDigraph) -> f64 {
        spectral_radius(g, 1e-10, 10_000).unwrap().rho
    }

    #[test]
    fn complete_star_and_empty() {
        assert!((rho(&generate_graph(GraphFamily::Complete { n: 4 }).unwrap()) - 3.0).abs() < 1e-8);
        assert!((rho(&generate_graph(GraphFamily::Star { leaves: 4 }).unwrap()) - 2.0).abs() < 1e-8);
        let single = WeightedDigraph::from_arcs(1, []).unwrap();
        assert_eq!(rho(&single), 0.0);
    }

    #[test]
    fn bipartite_cycle_needs_the_shift() {
        let g = generate_graph(GraphFamily::Cycle { n: 8 }).unwrap();
        let est = spectral_radius(&g, 1e-10, 10_000).unwrap();
        assert!(est.converged);
        assert!((est.rho - 2.0).abs() < 1e-8);
    }

    #[test]
    fn acyclic_is_zero_and_weights_scale() {
        let tree = generate_graph(GraphFamily::BAryTree { b: 3, depth: 4 }).unwrap();
        assert_eq!(rho(&tree), 0.0);
        let scaled = WeightedDigraph::from_arcs(2, [Arc::new(0, 1, 4.0), Arc::new(1, 0, 1.0)]).unwrap();
        assert!((rho(&scaled) - 2.0).abs() < 1e-8);
        let looped = WeightedDigraph::from_arcs(2, [Arc::new(0, 0, 0.7), Arc::unit(0, 1)]).unwrap();
        assert!((rho(&looped) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn components_found() {
        // two 2-cycles joined by a one-way arc, plus an isolated node
        let g = WeightedDigraph::from_arcs(5, [Arc::unit(0, 1), Arc::unit(1, 0), Arc::unit(1, 2), Arc::unit(2, 3), Arc::unit(3, 2)]).unwrap();
        let mut comps = strongly_connected_components(&g);
        comps.iter_mut().for_each(|c| c.sort());
        comps.sort();
        assert_eq!(comps, [vec![0, 1], vec![2, 3], vec![4]]);
    }

    #[test]
    fn neumann_examples() {
        let k4 = generate_graph(GraphFamily::Complete { n: 4 }).unwrap();
        let c = neumann_convergent(0.5, 0.5, &k4, 0.0).unwrap();
        assert!(c.convergent);
        assert!((c.margin - 0.75).abs() < 1e-8);
        let c = neumann_convergent(1.0, 1.0, &k4, 0.0).unwrap();
        assert!(!c.convergent);
        let empty = WeightedDigraph::from_arcs(3, []).unwrap();
        assert!(neumann_convergent(1.0, 1.0, &empty, 0.0).unwrap().convergent);
    }

    #[test]
    fn not_converged_is_reported() {
        let g = generate_graph(GraphFamily::Cycle { n: 50 }).unwrap();
        // uniform start is already the Perron vector of a ring; perturb with a chord
        let arcs: Vec<Arc> = g.arcs().chain([Arc::new(0, 25, 0.3)]).collect();
        let g = WeightedDigraph::from_arcs(50, arcs).unwrap();
        assert!(matches!(spectral_radius(&g, 1e-14, 3), Err(Error::NotConverged { iterations: 3, .. })));
    }
}
