use std::collections::VecDeque;

use netcascade_core::analytic::{hop_breakdown, total_responsibility};
use netcascade_core::graph::{generate_graph, graph_total, GraphFamily, SeedSpec, WeightedDigraph};
use netcascade_core::sim::{compare_to_analytic, simulate_branching, simulate_graph_cascade, SimConfig};
use netcascade_core::ModelParams;

/// Exact independent-cascade expectation by enumerating every live/dead
/// outcome of the arcs not leaving the seed (those are always live).
fn brute_force_ic(g: &WeightedDigraph, seed: usize, w: f64, alpha: f64, q: f64, d: u32) -> f64 {
    let arcs: Vec<_> = g.arcs().collect();
    let optional: Vec<usize> = (0..arcs.len()).filter(|&i| arcs[i].src != seed).collect();
    assert!(optional.len() <= 16, "too many arcs to enumerate");
    let mut expected = 0.0;
    for mask in 0u32..(1 << optional.len()) {
        let mut live = vec![false; arcs.len()];
        let mut prob = 1.0;
        for (bit, &i) in optional.iter().enumerate() {
            let on = mask & (1 << bit) != 0;
            live[i] = on;
            prob *= if on { q } else { 1.0 - q };
        }
        for (i, a) in arcs.iter().enumerate() {
            if a.src == seed {
                live[i] = true;
            }
        }
        let mut dist = vec![u32::MAX; g.node_count()];
        dist[seed] = 0;
        let mut queue = VecDeque::from([seed]);
        while let Some(v) = queue.pop_front() {
            if dist[v] == d {
                continue;
            }
            for (i, a) in arcs.iter().enumerate() {
                if a.src == v && live[i] && dist[a.dst] == u32::MAX {
                    dist[a.dst] = dist[v] + 1;
                    queue.push_back(a.dst);
                }
            }
        }
        let total: f64 = dist
            .iter()
            .filter(|&&k| k != 0 && k != u32::MAX)
            .map(|&k| w * alpha.powi(k as i32 - 1))
            .sum();
        expected += prob * total;
    }
    expected
}

#[test]
fn branching_mean_is_unbiased_across_regimes() {
    let grid = [
        (1.0, 2.0, 0.5, 0.5, 6),
        (1.0, 3.0, 0.3, 0.6, 8),
        (2.0, 1.5, 0.9, 0.4, 10),
        (-1.0, 4.0, 0.2, 0.5, 7),
        (1.0, 2.5, 0.5, 0.3, 12),
        (1.0, 2.0, 1.0, 0.5, 6),
        (1.0, 4.0, 0.5, 0.5, 6),
        (0.5, 3.0, 1.0, 1.0 / 3.0, 8),
        (1.0, 2.0, 0.8, 1.0, 4),
        (1.0, 3.0, 0.9, 0.8, 4),
        (1.0, 5.0, 0.6, 0.7, 3),
        (1.0, 2.7, 0.7, 0.9, 5),
    ];
    for (i, &(w, b, a, q, d)) in grid.iter().enumerate() {
        let p = ModelParams::new(w, b, a, q, d).unwrap();
        let res = simulate_branching(&p, &SimConfig::new(20_000, 100 + i as u64)).unwrap();
        let cmp = compare_to_analytic(&res, total_responsibility(&p).unwrap());
        assert!(cmp.consistent, "set {i}: z = {}", cmp.z_score);
        assert_eq!(res.trials_truncated, 0);
    }
}

#[test]
fn per_depth_counts_match_expected_layer_sizes() {
    let p = ModelParams::new(1.0, 2.5, 0.7, 0.6, 6).unwrap();
    let res = simulate_branching(&p, &SimConfig::new(40_000, 77)).unwrap();
    let hb = hop_breakdown(&p).unwrap();
    for (k, rec) in hb.per_depth.iter().enumerate() {
        let diff = (res.per_depth_mean_counts[k] - rec.expected_count).abs();
        assert!(diff <= 4.0 * res.per_depth_std_error[k], "depth {}: {diff}", k + 1);
    }
}

#[test]
fn identical_seeds_give_identical_results() {
    let p = ModelParams::new(1.0, 2.3, 0.6, 0.7, 7).unwrap();
    let cfg = SimConfig::new(3000, 9);
    assert_eq!(simulate_branching(&p, &cfg).unwrap(), simulate_branching(&p, &cfg).unwrap());
    let other = simulate_branching(&p, &SimConfig::new(3000, 10)).unwrap();
    assert_ne!(simulate_branching(&p, &cfg).unwrap().mean, other.mean);
}

#[test]
fn activate_once_never_exceeds_walk_sum() {
    let cases = [
        (generate_graph(GraphFamily::Complete { n: 3 }).unwrap(), 0.5, 0.5, 2),
        (generate_graph(GraphFamily::Cycle { n: 4 }).unwrap(), 0.8, 0.6, 3),
        (generate_graph(GraphFamily::ErdosRenyi { n: 50, p_edge: 0.1, rng_seed: 5 }).unwrap(), 0.7, 0.5, 4),
    ];
    for (i, (g, alpha, q, d)) in cases.iter().enumerate() {
        let seed = SeedSpec::new(0, g).unwrap();
        let walk = graph_total(1.0, *alpha, *q, g, seed, *d).unwrap();
        let res = simulate_graph_cascade(g, 1.0, *alpha, *q, seed, *d, &SimConfig::new(50_000, 31 + i as u64)).unwrap();
        assert!(res.mean <= walk + 4.0 * res.std_error, "case {i}: {} > {walk}", res.mean);
        if g.arc_count() <= 16 {
            let exact = brute_force_ic(g, 0, 1.0, *alpha, *q, *d);
            assert!(exact <= walk);
            assert!(compare_to_analytic(&res, exact).consistent, "case {i}: mean {} exact {exact}", res.mean);
        }
    }
}

#[test]
fn triangle_exact_expectation() {
    // both neighbours are reached at hop 1, so nothing is left for hop 2
    let g = generate_graph(GraphFamily::Complete { n: 3 }).unwrap();
    assert_eq!(brute_force_ic(&g, 0, 1.0, 0.5, 0.5, 2), 2.0);
}

#[test]
fn cycle_free_graphs_agree_exactly_with_walk_sum() {
    for (b, depth) in [(2u32, 3u32), (3, 4), (5, 3)] {
        let g = generate_graph(GraphFamily::BAryTree { b, depth }).unwrap();
        let seed = SeedSpec::new(0, &g).unwrap();
        let res = simulate_graph_cascade(&g, 1.0, 0.6, 1.0, seed, depth, &SimConfig::new(20, 1)).unwrap();
        let walk = graph_total(1.0, 0.6, 1.0, &g, seed, depth).unwrap();
        assert_eq!(res.std_error, 0.0);
        assert!(compare_to_analytic(&res, walk).consistent);
    }
}
