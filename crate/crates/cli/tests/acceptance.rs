//! End-to-end acceptance checks, one PASS/FAIL line per criterion.

use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::Instant;

use lane_emden::dynamics::lower_critical_amplitude;
use lane_emden::extended::critical_drift_extended;
use lane_emden::families::check_admissible;
use lane_emden::invariants::{energy_series, lower_critical_terminal_energy, psi_state};
use lane_emden::*;
use lane_emden_cli::{execute, parse_config};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = std::result::Result<String, String>;

/// Every `(κ, κ*)` measured along the way, for the bounds audit.
#[derive(Default)]
struct Audit {
    pairs: Vec<(String, usize, f64, f64)>,
}

impl Audit {
    fn record(&mut self, label: impl Into<String>, n: usize, kappa: f64, kappa_star: f64) {
        self.pairs.push((label.into(), n, kappa, kappa_star));
    }
}

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn quad(n: usize) -> SphereQuadrature {
    build_sphere_quadrature(n, if n >= 6 { 8 } else { 16 }).unwrap()
}

fn conservation_run(h: f64) -> RadialTrajectory {
    let p = ProblemParams::new(4, 2, 3.0).unwrap();
    integrate_radial(&p, &[1.0, 0.0], &[0.0, 0.1], [0.0, 50.0], h).unwrap()
}

fn conservation(audit: &mut Audit) -> Outcome {
    let start = Instant::now();
    let coarse = drift_series(&conservation_run(1e-3)).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let fine = drift_series(&conservation_run(5e-4)).unwrap();
    let f64_drifts = [coarse.psi_drift(), coarse.psi_star_drift(), coarse.k_drift()];
    let fine_drifts = [fine.psi_drift(), fine.psi_star_drift(), fine.k_drift()];

    // In f64 both step sizes sit at the rounding floor, so the convergence
    // order is read off the same scheme in double-double arithmetic.
    let p = ProblemParams::new(4, 2, 3.0).unwrap();
    let dd = |h| critical_drift_extended(&p, &[1.0, 0.0], &[0.0, 0.1], [0.0, 50.0], h).unwrap();
    let (a, b) = (dd(1e-3), dd(5e-4));
    let ratios = [a.psi / b.psi, a.psi_star / b.psi_star, a.k / b.k];

    let r = kappa_of(&conservation_run(1e-3)).unwrap();
    audit.record("conservation run", 4, r.kappa, r.kappa_star);
    let ok = f64_drifts.iter().chain(&fine_drifts).all(|d| *d < 1e-8) && ratios.iter().all(|q| *q >= 8.0) && elapsed < 5.0;
    check(
        ok,
        format!(
            "drifts (psi, psi*, k) = {:.1e}, {:.1e}, {:.1e}; halving ratios {:.1}, {:.1}, {:.1}; run {elapsed:.2} s",
            f64_drifts[0], f64_drifts[1], f64_drifts[2], ratios[0], ratios[1], ratios[2]
        ),
    )
}

fn second_invariant() -> Outcome {
    let r = kappa_of(&conservation_run(1e-3)).unwrap();
    let residual = r.identity_residual().abs();
    check(residual < 1e-8, format!("kappa* = {:.12}, |kappa* + sum k^2| = {residual:.1e}", r.kappa_star))
}

fn spiral_round_trip(audit: &mut Audit) -> Outcome {
    let s = spiral(4, 0.0, -0.01, 0.0, 20.0, 1e-3).unwrap();
    let r = kappa_of(&s.trajectory).unwrap();
    audit.record("spiral (0, -0.01)", 4, r.kappa, r.kappa_star);
    let inv_err = r.kappa.abs().max((r.kappa_star + 0.01).abs());
    let residual = s.trajectory.sampled_residual();
    let band = fowler_roots(4, 0.0, -0.01).unwrap().oscillatory().unwrap();
    let rho: Vec<f64> = s.rho.states.iter().map(|st| st.v[0]).collect();
    let lo = rho.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = rho.iter().copied().fold(0.0, f64::max);
    let band_err = (lo - band.rho_min).abs().max((hi - band.rho_max).abs());
    let ref_err = (band.rho_min - 0.3204).abs().max((band.rho_max - 1.41244).abs());
    check(
        inv_err < 1e-7 && residual < 1e-6 && band_err < 1e-4 && ref_err < 1e-4,
        format!(
            "invariant error {inv_err:.1e}, residual {residual:.1e}, band [{:.7}, {:.7}], measured [{lo:.7}, {hi:.7}]",
            band.rho_min, band.rho_max
        ),
    )
}

fn closed_form_values(audit: &mut Audit) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for n in [3usize, 4, 6] {
        let expected = -(2.0 / n as f64) * (0.5 * (n as f64 - 2.0)).powi(n as i32);
        let u = critical_homogeneous(n, 1, &[1.0]).unwrap();
        let c = u.params().constants();
        let q = quad(n);
        for r in [0.1, 0.5, 2.0] {
            let kappa = phi_surface(&u, r, &c, &q).unwrap();
            let kappa_star = phi_star_surface(&u, r, kappa, &c, &q).unwrap();
            audit.record(format!("critical homogeneous n={n}"), n, kappa, kappa_star);
            worst = worst.max((kappa - expected).abs()).max(kappa_star.abs());
        }
        detail.push(format!("n={n}: {expected:.6}"));
    }
    let p = ProblemParams::new(5, 1, 2.0).unwrap();
    let u = homogeneous_singular(&p, &[1.0]).unwrap();
    let q = quad(5);
    for r in [0.01, 0.3, 1.0, 10.0] {
        worst = worst.max((phi_surface(&u, r, &p.constants(), &q).unwrap() + 8.0 / 3.0).abs());
    }
    check(worst < 1e-9, format!("kappa {}; Phi = -8/3 at n=5; max error {worst:.1e}", detail.join(", ")))
}

fn bubble_regularity(audit: &mut Audit) -> Outcome {
    let b = bubble(4, 1, &[0.5, 0.0, 0.0, 0.0], 1.0, &[1.0]).unwrap();
    let c = b.params().constants();
    let q = quad(4);
    let mut worst: f64 = 0.0;
    for r in [0.1, 0.2, 0.3] {
        let phi = phi_surface(&b, r, &c, &q).unwrap();
        let star = phi_star_surface(&b, r, phi, &c, &q).unwrap();
        audit.record(format!("bubble at r={r}"), 4, phi, star);
        worst = worst.max(phi.abs()).max(star.abs());
    }
    let config = parse_config(argv("residual-check --n 4 --family bubble --center 0.5,0,0,0 --points 100")).unwrap();
    let out = execute(&config).unwrap();
    let doc: Value = serde_json::from_slice(&out.primary).unwrap();
    let residual = doc["result"]["max_relative"].as_f64().unwrap();
    check(worst < 1e-7 && residual < 1e-5, format!("max |Phi|, |Phi*| = {worst:.1e}; max relative residual {residual:.1e}"))
}

fn scaling_relations() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let sub = ProblemParams::new(5, 1, 2.0).unwrap();
    let families: Vec<(&str, FieldRef, Option<f64>)> = vec![
        ("bubble", Arc::new(bubble(4, 2, &[0.5, 0.0, 0.0, 0.0], 1.0, &[0.6, 0.8]).unwrap()), Some(0.0)),
        ("critical homogeneous", Arc::new(critical_homogeneous(4, 2, &[0.6, 0.8]).unwrap()), Some(-0.5)),
        ("homogeneous", Arc::new(homogeneous_singular(&sub, &[1.0]).unwrap()), None),
    ];
    let mut worst_phi: f64 = 0.0;
    let mut worst_star: f64 = 0.0;
    for (_, u, kappa) in &families {
        let p = u.params();
        let c = p.constants();
        let q = quad(p.n);
        for _ in 0..20 {
            let (r, s) = (rng.random_range(0.2..3.0), rng.random_range(0.05..0.4));
            let ur = rescaled(u.clone(), r).unwrap();
            let a = phi_surface(u.as_ref(), r * s, &c, &q).unwrap();
            let b = phi_surface(ur.as_ref(), s, &c, &q).unwrap();
            worst_phi = worst_phi.max((a - b).abs());
            if let Some(kappa) = kappa {
                let a = phi_star_surface(u.as_ref(), r * s, *kappa, &c, &q).unwrap();
                let b = phi_star_surface(ur.as_ref(), s, *kappa, &c, &q).unwrap();
                worst_star = worst_star.max((a - b).abs());
            }
        }
    }
    check(
        worst_phi < 1e-9 && worst_star < 1e-9,
        format!("60 pairs on 3 families: max |dPhi| = {worst_phi:.1e}, max |dPhi*| = {worst_star:.1e}"),
    )
}

fn subcritical_monotonicity() -> Outcome {
    let p = ProblemParams::new(5, 1, 2.0).unwrap();
    let c = p.constants();
    let v0 = 1.1 * c.lambda.powf(1.0 / (p.alpha - 1.0));
    let tr = integrate_radial(&p, &[v0], &[0.0], [0.0, 30.0], 1e-3).unwrap();
    let psi: Vec<f64> = tr.states.iter().map(|s| psi_state(&c, s)).collect();
    let worst_rise = psi.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let h = tr.h;
    let (mut err, mut scale): (f64, f64) = (0.0, 0.0);
    for k in 2..psi.len() - 2 {
        let fd = (psi[k - 2] - 8.0 * psi[k - 1] + 8.0 * psi[k + 1] - psi[k + 2]) / (12.0 * h);
        let exact = -2.0 * c.mu * tr.states[k].dv.iter().map(|x| x * x).sum::<f64>();
        err = err.max((fd - exact).abs());
        scale = scale.max(exact.abs());
    }
    check(
        worst_rise <= 1e-10 && err / scale < 1e-6,
        format!("v0 = {v0:.4}; largest step increase {worst_rise:.1e}; rate error {:.1e} relative", err / scale),
    )
}

fn lower_critical_energy() -> Outcome {
    let n = 4;
    let tr = integrate_lower_critical(n, 1, &[2.0], &[0.0], [10.0, 200.0], 1e-3).unwrap();
    let e = energy_series(&tr).unwrap();
    let worst_rise = e.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let target = lower_critical_terminal_energy(n);
    let e_end = *e.last().unwrap();
    let phi_end = lane_emden::field::norm(&tr.last().v);
    let amp = lower_critical_amplitude(n);
    check(
        worst_rise <= 1e-10 && ((e_end - target) / target).abs() < 0.05 && ((phi_end - amp) / amp).abs() < 0.1,
        format!("largest step increase {worst_rise:.1e}; E(200) = {e_end:.4} vs {target:.4}; |phi(200)| = {phi_end:.4} vs {amp}"),
    )
}

/// The twenty closed-form inputs with the tag each must receive.
fn synthetic_suite() -> Vec<(String, FieldRef, Tag)> {
    let mut out: Vec<(String, FieldRef, Tag)> = Vec::new();
    let bubbles: [(usize, usize, Vec<f64>, f64, Vec<f64>); 5] = [
        (3, 1, vec![0.0, 0.0, 0.0], 1.0, vec![1.0]),
        (3, 2, vec![0.3, -0.2, 0.1], 0.5, vec![0.6, 0.8]),
        (4, 1, vec![0.5, 0.0, 0.0, 0.0], 1.0, vec![1.0]),
        (4, 2, vec![0.0, 0.2, 0.0, -0.1], 2.0, vec![0.8, 0.6]),
        (4, 3, vec![0.0; 4], 0.7, vec![0.0, 0.6, 0.8]),
    ];
    for (n, m, z, r, e) in bubbles {
        out.push((format!("bubble n={n} r={r}"), Arc::new(bubble(n, m, &z, r, &e).unwrap()), Tag::Removable));
    }
    for (n, alpha) in [(5, 2.0), (3, 4.0), (4, 2.5), (6, 1.8), (5, 2.2)] {
        let p = ProblemParams::new(n, 2, alpha).unwrap();
        let u = homogeneous_singular(&p, &[0.6, 0.8]).unwrap();
        out.push((format!("homogeneous n={n} alpha={alpha}"), Arc::new(u), Tag::SubcriticalSingular));
    }
    for (n, m) in [(3, 1), (4, 2), (5, 1), (6, 1), (4, 3)] {
        let mut e = vec![0.0; m];
        e[m - 1] = 1.0;
        let u = critical_homogeneous(n, m, &e).unwrap();
        out.push((format!("critical homogeneous n={n} m={m}"), Arc::new(u), Tag::CriticalHomogeneous));
    }
    for (n, kappa, kappa_star) in [(4, 0.0, -0.01), (4, -0.2, -0.03), (4, -0.45, -0.01), (4, 0.1, -0.05), (3, 0.0, -0.01)] {
        let s = spiral(n, kappa, kappa_star, 0.0, 12.0, 1e-3).unwrap();
        out.push((format!("spiral n={n} ({kappa}, {kappa_star})"), s.field().unwrap(), Tag::CriticalOscillatory));
    }
    out
}

fn classification_suite(audit: &mut Audit) -> Outcome {
    let suite = synthetic_suite();
    let mut wrong = Vec::new();
    for (label, u, want) in &suite {
        let p = u.params();
        let q = quad(p.n);
        let got = classify_field(u.as_ref(), &q, DEFAULT_TOL).map(|c| c.tag);
        if got.as_ref() != Ok(want) {
            wrong.push(format!("{label}: {got:?}"));
        }
        if p.regime() == Regime::Critical {
            let c = p.constants();
            let r0 = lane_emden::classify::probe_radius(u.as_ref());
            let kappa = phi_surface(u.as_ref(), r0, &c, &q).unwrap();
            let kappa_star = phi_star_surface(u.as_ref(), r0, kappa, &c, &q).unwrap();
            audit.record(label.clone(), p.n, kappa, kappa_star);
        }
    }
    let correct = suite.len() - wrong.len();
    check(wrong.is_empty(), format!("{correct}/{} correct {}", suite.len(), wrong.join("; ")))
}

fn bounds_audit(audit: &Audit) -> Outcome {
    let violations: Vec<String> = audit
        .pairs
        .iter()
        .filter(|(_, n, k, ks)| check_admissible(*n, *k, *ks, 1e-8).is_err())
        .map(|(label, _, k, ks)| format!("{label}: ({k}, {ks})"))
        .collect();

    // The a priori bound concerns singular solutions on the punctured space.
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let sub = ProblemParams::new(5, 2, 2.0).unwrap();
    let singular: Vec<FieldRef> = vec![
        Arc::new(homogeneous_singular(&sub, &[0.6, 0.8]).unwrap()),
        Arc::new(critical_homogeneous(4, 2, &[0.6, 0.8]).unwrap()),
        Arc::new(critical_homogeneous(3, 1, &[1.0]).unwrap()),
        spiral(4, 0.0, -0.01, 0.0, 12.0, 1e-3).unwrap().field().unwrap(),
        spiral(4, -0.45, -0.01, 0.0, 12.0, 1e-3).unwrap().field().unwrap(),
    ];
    let mut samples = 0;
    let mut worst: f64 = 0.0;
    for u in &singular {
        let p = u.params();
        let bound = p.constants().a_priori_constant();
        let degree = 2.0 / (p.alpha - 1.0);
        for _ in 0..200 {
            let r = 10f64.powf(rng.random_range(-4.5..-0.1));
            let mut x: Vec<f64> = (0..p.n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let len = lane_emden::field::norm(&x);
            x.iter_mut().for_each(|c| *c *= r / len);
            if !u.contains(&x) {
                continue;
            }
            let value = u.value(&x).unwrap();
            let limit = bound * r.powf(-degree);
            worst = value.iter().fold(worst, |w, c| w.max(c / limit));
            samples += 1;
        }
    }
    check(
        violations.is_empty() && worst <= 1.0,
        format!(
            "{} invariant pairs, {} violations {}; {samples} singular samples, max u_i / bound = {worst:.4}",
            audit.pairs.len(),
            violations.len(),
            violations.join("; ")
        ),
    )
}

fn argv(s: &str) -> Vec<String> {
    std::iter::once("lane-emden".to_string()).chain(s.split_whitespace().map(String::from)).collect()
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_lane-emden"))
            .args(["simulate", "--n", "4", "--alpha", "3", "--m", "2", "--v0", "1,0", "--dv0", "0,0.1", "--span", "50"])
            .arg("--out")
            .arg(&path)
            .stderr(std::process::Stdio::null())
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(path).unwrap()
    };
    let (a, b) = (run("a.csv"), run("b.csv"));
    check(a == b && !a.is_empty(), format!("{} bytes, identical: {}", a.len(), a == b))
}

fn main() -> ExitCode {
    let mut audit = Audit::default();
    let start = Instant::now();
    let mut failed = 0;
    let mut report = |id: usize, name: &str, outcome: Outcome| {
        let (status, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{status} {id:>2} {name}: {detail}");
    };
    report(1, "conservation", conservation(&mut audit));
    report(2, "second-invariant identity", second_invariant());
    report(3, "spiral round trip", spiral_round_trip(&mut audit));
    report(4, "closed-form invariants", closed_form_values(&mut audit));
    report(5, "bubble regularity", bubble_regularity(&mut audit));
    report(6, "scaling relations", scaling_relations());
    report(7, "subcritical monotonicity", subcritical_monotonicity());
    report(8, "lower-critical energy", lower_critical_energy());
    report(9, "classification suite", classification_suite(&mut audit));
    report(10, "bounds audit", bounds_audit(&audit));
    report(11, "determinism", determinism());
    println!("acceptance: {} failed, {:.1} s", failed, start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
