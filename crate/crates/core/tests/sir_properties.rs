use netcascade_core::sir::{final_size_residual, integrate_sir, SirParams};

fn scenario(r0: f64) -> SirParams {
    SirParams::outbreak(0.1 * r0, 0.1, 1000.0, 1.0).unwrap()
}

fn end_state(p: &SirParams, t_max: f64, step: f64) -> [f64; 3] {
    integrate_sir(p, t_max, step).unwrap().last()
}

fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn conservation_holds_for_small_steps() {
    for r0 in [0.5, 0.9, 1.5, 3.0, 8.0] {
        let traj = integrate_sir(&scenario(r0), 200.0, 0.01).unwrap();
        let drift = (0..traj.len())
            .map(|k| ((traj.s[k] + traj.i[k] + traj.r[k]) - 1000.0).abs() / 1000.0)
            .fold(0.0, f64::max);
        assert!(drift < 1e-6);
        assert!(traj.s.windows(2).all(|w| w[1] <= w[0]));
        assert!(traj.r.windows(2).all(|w| w[1] >= w[0]));
    }
}

#[test]
fn rk4_is_fourth_order() {
    let p = scenario(3.0);
    let (t_max, h) = (60.0, 0.5);
    let reference = end_state(&p, t_max, h / 16.0);
    let coarse = distance(end_state(&p, t_max, h), reference);
    let fine = distance(end_state(&p, t_max, h / 2.0), reference);
    let factor = coarse / fine;
    assert!((12.0..=20.0).contains(&factor), "factor {factor}");
}

#[test]
fn early_growth_sign_follows_threshold() {
    let step = 0.01;
    for r0 in [0.5, 0.9, 1.5, 3.0] {
        let p = scenario(r0);
        let traj = integrate_sir(&p, step * 10.0, step).unwrap();
        let grew = traj.i[10] > p.i0();
        assert_eq!(grew, r0 * p.s0() / p.population() > 1.0, "R0 = {r0}");
    }
}

#[test]
fn final_size_relation_holds() {
    let p = scenario(3.0);
    let [s_end, _, _] = end_state(&p, 200.0, 0.01);
    assert!(final_size_residual(&p, s_end).abs() < 1e-3);
    // the approximate form with s0 ≈ N
    let frac = s_end / 1000.0;
    assert!((frac - (-3.0 * (1.0 - frac)).exp()).abs() < 1e-3);
}
