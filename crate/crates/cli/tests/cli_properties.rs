use std::fs;
use std::process::Command;

use netcascade::report::{lever_report, LeverStatus};
use netcascade::scenario::{parse_scenario, write_scenario, GraphRef, ScenarioSpec};
use netcascade::simulate::parallel_branching;
use netcascade::sweep::{sweep_grid, SweepSpec};
use netcascade::{load_scenario, presets};
use netcascade_core::analytic::DepthCap;
use netcascade_core::sim::{simulate_branching, SimConfig};
use netcascade_core::ModelParams;
use proptest::prelude::*;

fn preset(name: &str) -> ScenarioSpec {
    parse_scenario(presets::find(name).unwrap().text).unwrap()
}

fn sweep_text(spec: &SweepSpec) -> String {
    let mut buf = Vec::new();
    sweep_grid(spec, 1e-9, &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

fn spec_strategy() -> impl Strategy<Value = ScenarioSpec> {
    let finite = prop_oneof![-1e6..1e6f64, any::<f64>().prop_filter("finite", |x| x.is_finite())];
    let params = (finite, 1.0..1e3f64, 1e-9..=1.0f64, 0.0..=1.0f64, 1u32..40)
        .prop_map(|(w, b, a, q, d)| ModelParams::new(w, b, a, q, d).unwrap());
    let label = "[A-Za-z0-9_]([A-Za-z0-9_ .:-]{0,20}[A-Za-z0-9_])?";
    let graph = proptest::option::of(("[a-z]{1,8}(/[a-z0-9]{1,8}){0,2}\\.txt", 0usize..100_000));
    (label, params, graph).prop_flat_map(|(label, params, graph)| {
        let n = params.d() as usize;
        let sched = |len: usize, lo: f64| proptest::option::of(proptest::collection::vec(lo..=1.0f64, len));
        let response = proptest::option::of(proptest::collection::vec(1e-12..1e3f64, n)).prop_map(|r| {
            r.map(|mut v| {
                v.sort_by(|a, b| b.partial_cmp(a).unwrap());
                v
            })
        });
        (sched(n - 1, 1e-9), sched(n - 1, 0.0), response).prop_map(move |(a, q, resp)| ScenarioSpec {
            label: label.clone(),
            params,
            alpha_schedule: a,
            q_schedule: q,
            response: resp,
            graph: graph.clone().map(|(path, seed_node)| GraphRef { path, seed_node }),
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn scenario_round_trip(spec in spec_strategy()) {
        spec.validate().unwrap();
        let text = write_scenario(&spec);
        prop_assert_eq!(parse_scenario(&text).unwrap(), spec);
    }

    #[test]
    fn dyadic_axis_gives_w_times_b(w in -1e3..1e3f64, b in 1.0..50.0f64, a in 0.01..=1.0f64, q in 0.0..=1.0f64, d in 1u32..30) {
        let base = ScenarioSpec::new("x", ModelParams::new(w, b, a, q, d).unwrap());
        let text = sweep_text(&SweepSpec::new(base, vec!["d=1".parse().unwrap()]));
        let row = &rows(&text)[0];
        prop_assert_eq!(row[8].parse::<f64>().unwrap(), w * b);
    }
}

#[test]
fn q_axis_flips_regime_at_one() {
    let base = ScenarioSpec::new("flip", ModelParams::new(1.0, 5.0, 0.5, 0.5, 4).unwrap());
    let text = sweep_text(&SweepSpec::new(base, vec!["q=0:1:11".parse().unwrap()]));
    let rows = rows(&text);
    assert_eq!(rows.len(), 11);
    for (i, row) in rows.iter().enumerate() {
        // oracle: r from the grid value directly, classified by hand
        let q = i as f64 / 10.0;
        let r = 5.0 * 0.5 * q;
        let want = if (r - 1.0).abs() <= 1e-9 {
            "critical"
        } else if r < 1.0 {
            "subcritical"
        } else {
            "supercritical"
        };
        assert_eq!(row[7], want, "q = {q}");
        assert!((row[6].parse::<f64>().unwrap() - r).abs() < 1e-12);
    }
    assert_eq!(rows[3][7], "subcritical");
    assert_eq!(rows[4][7], "critical");
    assert_eq!(rows[5][7], "supercritical");
}

#[test]
fn pandemic_grid() {
    let text = sweep_text(&SweepSpec::new(preset("pandemic"), vec!["b=4,8".parse().unwrap(), "q=0.3,0.6".parse().unwrap()]));
    assert_eq!(text.lines().next().unwrap(), "label,w,b,alpha,q,d,r,regime,T,M,overflow");
    let rows = rows(&text);
    assert_eq!(rows.len(), 4);
    let bq: Vec<(&str, &str)> = rows.iter().map(|r| (r[2].as_str(), r[4].as_str())).collect();
    assert_eq!(bq, [("4", "0.3"), ("4", "0.6"), ("8", "0.3"), ("8", "0.6")]);
    // literal layer sum for the (8, 0.6) row
    let t: f64 = (1..=5).map(|k| 8f64.powi(k) * 0.6f64.powi(k - 1) * 0.7f64.powi(k - 1)).sum();
    assert!((rows[3][8].parse::<f64>().unwrap() - t).abs() < 1e-9 * t);
    assert!((t - 1448.30).abs() < 0.01);
}

#[test]
fn sweep_independent_of_thread_count() {
    let spec = SweepSpec::new(
        preset("vaccination"),
        vec!["b=1:20:40".parse().unwrap(), "alpha=0.05:1:30".parse().unwrap(), "d=1,2,7,50,400".parse().unwrap()],
    );
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| sweep_text(&spec))
    };
    let one = run(1);
    assert_eq!(one.lines().count(), 1 + 40 * 30 * 5);
    assert_eq!(one, run(7));
    assert_eq!(one, sweep_text(&spec));
}

#[test]
fn simulation_independent_of_thread_count() {
    let spec = preset("subcritical");
    let cfg = SimConfig::new(50_000, 42);
    let seq = simulate_branching(&spec.params, &cfg).unwrap();
    for threads in [1, 3, 8] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        assert_eq!(pool.install(|| parallel_branching(&spec, &cfg)).unwrap(), seq);
    }
}

#[test]
fn lever_targets_restore_criticality() {
    let spec = preset("pandemic");
    let rep = lever_report(&spec, Some(10.0), 1e-9).unwrap();
    let p = spec.params;
    let targets: Vec<f64> = rep
        .levers
        .iter()
        .map(|l| match l.status {
            LeverStatus::Critical(v) => v,
            other => panic!("{other:?}"),
        })
        .collect();
    // oracle: substitute back and check b·α·q = 1
    assert!((targets[0] * p.alpha() * p.q() - 1.0).abs() < 1e-12);
    assert!((p.b() * targets[1] * p.q() - 1.0).abs() < 1e-12);
    assert!((p.b() * p.alpha() * targets[2] - 1.0).abs() < 1e-12);
    assert!((targets[0] - 2.381).abs() < 1e-3);
    assert!((targets[1] - 0.20833).abs() < 1e-5);
    assert!((targets[2] - 0.17857).abs() < 1e-5);
    // partial sums of 3.36: 1, 4.36, 15.6496
    assert_eq!(rep.budget.unwrap().1, DepthCap::Cap(2));
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_netcascade"))
}

#[test]
fn scenario_graph_resolves_relative_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["gen-graph", "tree", "--b", "5", "--depth", "7", "-o"])
        .arg(dir.path().join("tree.txt"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let scn = dir.path().join("worked.scn");
    fs::write(&scn, format!("{}graph = tree.txt\nseed_node = 0\n", presets::find("worked-example").unwrap().text)).unwrap();
    let (spec, base) = load_scenario(scn.to_str().unwrap()).unwrap();
    assert_eq!(spec.graph_path(base.as_deref()).unwrap(), dir.path().join("tree.txt"));

    let out = bin().arg("analyze").arg(&scn).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("walk total    2031.17"), "{text}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.scn");
    fs::write(&bad, "b = 2\nalpha = 1.5\nq = 0.5\nd = 3\n").unwrap();
    let code = |args: &[&str]| bin().args(args).output().unwrap().status.code().unwrap();
    assert_eq!(code(&["analyze", "preset:pandemic"]), 0);
    assert_eq!(code(&["analyze", bad.to_str().unwrap()]), 1);
    assert_eq!(code(&["analyze", dir.path().join("missing.scn").to_str().unwrap()]), 3);
    assert_eq!(code(&["sir", "--beta", "3", "--gamma", "0.1", "--population", "1000", "--i0", "1", "--step", "5"]), 2);
    assert_eq!(code(&["sweep", "preset:pandemic", "--axis", "q=0.5,2"]), 1);
    assert_eq!(code(&["graph", "preset:pandemic", "--graph-file", "/nonexistent/g.txt", "--seed-node", "0"]), 3);

    let huge = dir.path().join("huge.scn");
    fs::write(&huge, "b = 1e6\nalpha = 1\nq = 1\nd = 100\n").unwrap();
    let out = bin().args(["analyze", huge.to_str().unwrap(), "--csv", "-"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stdout).unwrap().lines().nth(1).unwrap().contains(",,1381.55"));
}

#[test]
fn simulate_truncation_through_binary() {
    let out = bin().args(["simulate", "preset:runaway", "--trials", "10", "--seed", "3", "--cap", "1000", "--csv", "-"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[11], "unreliable");
    assert_eq!(row[12], "10");
}
