use lane_emden::dynamics::lower_critical_amplitude;
use lane_emden::invariants::angular_momentum;
use lane_emden::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn homogeneous_equilibrium_over_fifty_units() {
    let p = ProblemParams::new(5, 1, 2.0).unwrap();
    let amp = p.constants().homogeneous_amplitude().unwrap();
    assert!((amp - 2.0).abs() < 1e-15);
    let tr = integrate_radial(&p, &[amp], &[0.0], [0.0, 50.0], 1e-3).unwrap();
    let worst = tr.states.iter().map(|s| (s.v[0] - amp).abs().max(s.dv[0].abs())).fold(0.0, f64::max);
    assert!(worst < 1e-12, "{worst}");
}

#[test]
fn forward_then_backward_returns_to_the_start() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    // The damped subcritical flow amplifies errors like e^(μt) when reversed.
    let cases = [
        (ProblemParams::critical(4, 2).unwrap(), 50.0),
        (ProblemParams::critical(3, 3).unwrap(), 50.0),
        (ProblemParams::new(5, 2, 2.0).unwrap(), 5.0),
    ];
    for (p, span) in cases {
        let m = p.m;
        let amp = p.constants().homogeneous_amplitude().unwrap();
        let v0: Vec<f64> = (0..m).map(|_| amp * rng.random_range(0.3..0.6)).collect();
        let dv0: Vec<f64> = (0..m).map(|_| rng.random_range(-0.05..0.05)).collect();
        let fwd = integrate_radial(&p, &v0, &dv0, [0.0, span], 1e-3).unwrap();
        let back = integrate_radial_from(&p, fwd.last(), 0.0, 1e-3).unwrap();
        let end = back.last();
        assert!(end.t.abs() < 1e-12);
        let err = max_diff(&end.v, &v0).max(max_diff(&end.dv, &dv0));
        assert!(err < 1e-9, "{p:?}: {err}");
    }
}

#[test]
fn consecutive_states_agree_with_restepping() {
    // One step versus two half steps from the same state differ by O(h^5).
    let p = ProblemParams::critical(4, 2).unwrap();
    let tr = integrate_radial(&p, &[1.0, 0.0], &[0.0, 0.1], [0.0, 5.0], 1e-2).unwrap();
    let mut ratios = Vec::new();
    for k in [10, 200, 450] {
        let s = &tr.states[k];
        let gap = |h: f64| {
            let one = integrate_radial_from(&p, s, s.t + h, h).unwrap();
            let two = integrate_radial_from(&p, s, s.t + h, 0.5 * h).unwrap();
            max_diff(&one.last().v, &two.last().v).max(max_diff(&one.last().dv, &two.last().dv))
        };
        let again = integrate_radial_from(&p, s, s.t + 1e-2, 1e-2).unwrap();
        assert_eq!((&again.last().v, &again.last().dv), (&tr.states[k + 1].v, &tr.states[k + 1].dv));
        ratios.push(gap(0.2) / gap(0.1));
    }
    for r in ratios {
        assert!(r > 24.0 && r < 40.0, "local error ratio {r}");
    }
}

#[test]
fn runs_are_bit_reproducible() {
    let p = ProblemParams::critical(4, 2).unwrap();
    let a = integrate_radial(&p, &[1.0, 0.0], &[0.0, 0.1], [0.0, 10.0], 1e-3).unwrap();
    let b = integrate_radial(&p, &[1.0, 0.0], &[0.0, 0.1], [0.0, 10.0], 1e-3).unwrap();
    assert!(a.states.iter().zip(&b.states).all(|(x, y)| {
        x.v.iter().chain(&x.dv).zip(y.v.iter().chain(&y.dv)).all(|(p, q)| p.to_bits() == q.to_bits())
    }));
}

#[test]
fn angular_momentum_example() {
    let p = ProblemParams::critical(4, 2).unwrap();
    let tr = integrate_radial(&p, &[1.0, 0.0], &[0.0, 0.1], [0.0, 50.0], 1e-3).unwrap();
    let k0 = angular_momentum(tr.first()).get(0, 1);
    assert_eq!(k0, 0.1);
    let worst = tr.states.iter().map(|s| (angular_momentum(s).get(0, 1) - k0).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-12);
    let r = kappa_of(&tr).unwrap();
    assert!((r.kappa_star + 0.01).abs() < 1e-12);
}

#[test]
fn lower_critical_runs_approach_the_singular_amplitude() {
    assert!((lower_critical_amplitude(3) - 0.5f64.sqrt()).abs() < 1e-15);
    assert_eq!(lower_critical_amplitude(4), 2.0);
    for (n, phi0) in [(4, 2.0), (3, 0.7)] {
        let tr = integrate_lower_critical(n, 1, &[phi0], &[0.0], [10.0, 200.0], 1e-3).unwrap();
        let end = tr.last().v[0];
        let target = lower_critical_amplitude(n);
        assert!((end - target).abs() < 0.1 * target, "n={n}: {end}");
    }
    let zero = integrate_lower_critical(4, 2, &[0.0, 0.0], &[0.0, 0.0], [10.0, 20.0], 1e-3).unwrap();
    assert!(zero.states.iter().all(|s| s.v.iter().chain(&s.dv).all(|c| *c == 0.0)));
    assert!(matches!(
        integrate_lower_critical(4, 1, &[2.0], &[0.0], [1.2, 5.0], 1e-3),
        Err(Error::Configuration(_))
    ));
}

#[test]
fn trajectory_serializes_states() {
    let p = ProblemParams::critical(4, 1).unwrap();
    let tr = integrate_radial(&p, &[1.0], &[0.0], [0.0, 1.0], 0.5).unwrap();
    let json = serde_json::to_value(tr.last()).unwrap();
    assert_eq!(json["t"], 1.0);
    assert!(json["v"].is_array() && json["dv"].is_array());
}
