use alloc::vec::Vec;

use libm::{exp, fabs, log};

use super::{SeedSpec, WeightedDigraph};
use crate::error::{check, Error, OverflowReport, Result};
use crate::params::invalid_depth;
use crate::sum::KahanSum;

/// `‖A^k e_s‖₁` for `k = 1..=d`: total weight of length-`k` walks leaving the
/// seed. Each layer is returned as `(mantissa, log_scale)` with the vector
/// renormalised every hop, so deep supercritical graphs cannot overflow.
fn scaled_layers(g: &WeightedDigraph, seed: SeedSpec, d: u32) -> Vec<(f64, f64)> {
    let n = g.node_count();
    let mut x = alloc::vec![0.0; n];
    let mut y = alloc::vec![0.0; n];
    x[seed.seed_node] = 1.0;
    let mut log_scale = 0.0;
    let mut out = Vec::with_capacity(d as usize);
    for _ in 0..d {
        g.push_forward(&x, &mut y);
        let mut norm = KahanSum::default();
        y.iter().for_each(|&v| norm.add(v));
        let norm = norm.value();
        out.push((norm, log_scale));
        if norm == 0.0 {
            break;
        }
        if !(1e-100..=1e100).contains(&norm) {
            y.iter_mut().for_each(|v| *v /= norm);
            log_scale += log(norm);
        }
        core::mem::swap(&mut x, &mut y);
    }
    out
}

/// `‖A^k e_s‖₁` for `k = 1..=d` in plain floating point (may be infinite).
pub fn graph_layer_weights(g: &WeightedDigraph, seed: SeedSpec, d: u32) -> Vec<f64> {
    let mut layers: Vec<f64> = scaled_layers(g, seed, d).into_iter().map(|(m, s)| m * exp(s)).collect();
    layers.resize(d as usize, 0.0);
    layers
}

/// Walk-sum generalisation of the total:
/// `w Σ_{k=1}^{d} (αq)^{k−1} ‖A^k e_s‖₁`.
///
/// Every length-`k` walk from the seed counts, so revisits through cycles
/// accumulate weight. On the out-degree-`b` tree this is exactly the
/// closed-form total.
pub fn graph_total(w: f64, alpha: f64, q: f64, g: &WeightedDigraph, seed: SeedSpec, d: u32) -> Result<f64> {
    check(w.is_finite(), "w", w, "a finite real")?;
    check(alpha > 0.0 && alpha <= 1.0, "alpha", alpha, "a real in (0, 1]")?;
    check((0.0..=1.0).contains(&q), "q", q, "a real in [0, 1]")?;
    if d == 0 {
        return Err(invalid_depth());
    }
    SeedSpec::new(seed.seed_node, g)?;
    if w == 0.0 {
        return Ok(0.0);
    }
    let layers = scaled_layers(g, seed, d);
    let discount = alpha * q;

    let mut acc = KahanSum::default();
    let mut coeff = 1.0;
    for (k, &(mantissa, log_scale)) in layers.iter().enumerate() {
        if k > 0 {
            coeff *= discount;
        }
        if coeff == 0.0 {
            break;
        }
        acc.add(coeff * mantissa * exp(log_scale));
    }
    let total = w * acc.value();
    if total.is_finite() {
        return Ok(total);
    }

    let ln_discount = log(discount);
    let logs: Vec<f64> = layers
        .iter()
        .enumerate()
        .filter(|(_, &(m, _))| m > 0.0)
        .map(|(k, &(m, s))| k as f64 * ln_discount + log(m) + s)
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut s = KahanSum::default();
    logs.iter().for_each(|l| s.add(exp(l - max)));
    Err(Error::Overflow(OverflowReport {
        d_log_r: None,
        log_abs_total: log(fabs(w)) + max + log(s.value()),
        negative: w < 0.0,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::total_responsibility;
    use crate::graph::{generate_graph, Arc, GraphFamily};
    use crate::params::ModelParams;

    fn seed0() -> SeedSpec {
        SeedSpec { seed_node: 0 }
    }

    /// Counts walks by explicit enumeration of every walk of length `k`.
    fn brute_force_walk_total(g: &WeightedDigraph, seed: usize, w: f64, discount: f64, d: u32) -> f64 {
        fn walks(g: &WeightedDigraph, v: usize, left: u32, weight: f64, per_len: &mut [f64], len: usize) {
            if left == 0 {
                return;
            }
            for (dst, aw) in g.successors(v) {
                per_len[len] += weight * aw;
                walks(g, dst, left - 1, weight * aw, per_len, len + 1);
            }
        }
        let mut per_len = alloc::vec![0.0; d as usize];
        walks(g, seed, d, 1.0, &mut per_len, 0);
        per_len.iter().enumerate().map(|(k, c)| w * discount.powi(k as i32) * c).sum()
    }

    #[test]
    fn tree_reproduces_worked_example() {
        let g = generate_graph(GraphFamily::BAryTree { b: 5, depth: 7 }).unwrap();
        let t = graph_total(1.0, 0.5, 1.0, &g, seed0(), 7).unwrap();
        assert!(((t - 2031.171875) / 2031.171875).abs() < 1e-9);
    }

    #[test]
    fn triangle_walks() {
        let g = generate_graph(GraphFamily::Complete { n: 3 }).unwrap();
        let t = graph_total(1.0, 0.5, 0.5, &g, seed0(), 2).unwrap();
        assert_eq!(t, 3.0);
        assert_eq!(brute_force_walk_total(&g, 0, 1.0, 0.25, 2), 3.0);
        for d in 1..6 {
            let t = graph_total(2.0, 0.9, 0.7, &g, seed0(), d).unwrap();
            let bf = brute_force_walk_total(&g, 0, 2.0, 0.63, d);
            assert!(((t - bf) / bf).abs() < 1e-12);
        }
    }

    #[test]
    fn depth_one_is_out_weight() {
        let g = WeightedDigraph::from_arcs(4, [Arc::new(2, 0, 0.5), Arc::new(2, 3, 2.0), Arc::unit(0, 1)]).unwrap();
        let seed = SeedSpec::new(2, &g).unwrap();
        assert_eq!(graph_total(3.0, 0.2, 0.9, &g, seed, 1).unwrap(), 3.0 * 2.5);
    }

    #[test]
    fn tree_equivalence_grid() {
        for b in [2u32, 3, 5] {
            for depth in 3..=7 {
                let g = generate_graph(GraphFamily::BAryTree { b, depth }).unwrap();
                let t = graph_total(1.0, 0.8, 0.6, &g, seed0(), depth).unwrap();
                let p = ModelParams::new(1.0, f64::from(b), 0.8, 0.6, depth).unwrap();
                let closed = total_responsibility(&p).unwrap();
                assert!(((t - closed) / closed).abs() < 1e-9, "b={b} depth={depth}");
            }
        }
    }

    #[test]
    fn deep_complete_graph_overflows_with_log_magnitude() {
        let g = generate_graph(GraphFamily::Complete { n: 50 }).unwrap();
        // layer k has 49^k walks; with discount 1 the sum is dominated by 49^d
        match graph_total(1.0, 1.0, 1.0, &g, seed0(), 400) {
            Err(Error::Overflow(rep)) => {
                let expected = 400.0 * 49f64.ln() + (49.0f64 / 48.0).ln();
                assert!((rep.log_abs_total - expected).abs() < 1e-6, "{}", rep.log_abs_total);
            }
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn layer_weights_pad_to_depth() {
        let g = generate_graph(GraphFamily::BAryTree { b: 2, depth: 2 }).unwrap();
        assert_eq!(graph_layer_weights(&g, seed0(), 4), [2.0, 4.0, 0.0, 0.0]);
    }
}
