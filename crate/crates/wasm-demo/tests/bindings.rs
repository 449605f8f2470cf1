use lane_emden_wasm::{classify, constants, spiral_orbit};

#[test]
fn constants_at_the_critical_exponent() {
    let v = constants(4, 2, 3.0).unwrap();
    assert_eq!(v["regime"], "Critical");
    assert_eq!(v["constants"]["lambda"], 1.0);
    assert_eq!(v["a_priori_constant"].as_f64().unwrap(), 2.0);
    assert!(constants(2, 1, 3.0).is_err());
}

#[test]
fn spiral_orbit_stays_in_its_band() {
    let v = spiral_orbit(4, 0.0, -0.01, 10.0, 200).unwrap();
    let (lo, hi) = (v["rho_min"].as_f64().unwrap(), v["rho_max"].as_f64().unwrap());
    assert!((lo - 0.3204216).abs() < 1e-6 && (hi - 1.4124358).abs() < 1e-6);
    let rho = v["rho"].as_array().unwrap();
    assert!((190..=210).contains(&rho.len()));
    for (r, (a, b)) in rho.iter().zip(v["v1"].as_array().unwrap().iter().zip(v["v2"].as_array().unwrap())) {
        let (r, a, b) = (r.as_f64().unwrap(), a.as_f64().unwrap(), b.as_f64().unwrap());
        assert!(r >= lo - 1e-9 && r <= hi + 1e-9);
        assert!((a.hypot(b) - r).abs() < 1e-12);
    }
    assert!(spiral_orbit(4, 0.0, 0.01, 10.0, 200).is_err());
}

#[test]
fn classify_tags() {
    assert_eq!(classify(4, 0.0, 0.0, 1e-6).unwrap()["tag"], "Removable");
    assert_eq!(classify(4, -0.5, 0.0, 1e-6).unwrap()["tag"], "CriticalHomogeneous");
    let osc = classify(4, 0.0, -0.01, 1e-6).unwrap();
    assert_eq!(osc["tag"], "CriticalOscillatory");
    assert!((osc["band"][1].as_f64().unwrap() - 1.4124358).abs() < 1e-6);
    assert!(classify(4, -0.6, 0.0, 1e-6).is_err());
}
