use std::process::Command;

use lane_emden_cli::{config, execute, parse_config};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lane-emden"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn result_of(stdout: &str) -> Value {
    let v: Value = serde_json::from_str(stdout).unwrap();
    v["result"].clone()
}

fn argv(s: &str) -> Vec<String> {
    std::iter::once("lane-emden".to_string()).chain(s.split_whitespace().map(String::from)).collect()
}

#[test]
fn parse_examples() {
    let c = parse_config(argv("constants --n 5 --alpha 2")).unwrap();
    match &c.command {
        config::Command::Constants(p) => assert_eq!((p.n, p.m, p.alpha), (5, 1, Some(2.0))),
        other => panic!("{other:?}"),
    }
    let c = parse_config(argv("simulate --n 4 --alpha 3 --m 2 --v0 1,0 --dv0 0,0.1 --span 50")).unwrap();
    match &c.command {
        config::Command::Simulate(a) => {
            assert_eq!(a.v0, vec![1.0, 0.0]);
            assert_eq!(a.dv0, vec![0.0, 0.1]);
            assert_eq!((a.span, a.h), (50.0, 1e-3));
        }
        other => panic!("{other:?}"),
    }
    let e = parse_config(argv("simulate --alpha 9 --n 3 --v0 1 --span 1")).unwrap_err();
    assert_eq!((e.code.as_str(), e.exit), ("usage", 2));
    // Defaults: critical exponent, tol 1e-6, quadrature order 16.
    let c = parse_config(argv("classify --n 4 --kappa 0 --kappa-star -0.01")).unwrap();
    match &c.command {
        config::Command::Classify(a) => {
            assert_eq!(a.params.alpha, Some(3.0));
            assert_eq!((a.tol, a.order), (1e-6, 16));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["--bogus"][..],
        &["simulate", "--n", "4", "--span", "1"],
        &["simulate", "--n", "four", "--v0", "1", "--span", "1"],
        &["simulate", "--n", "4", "--m", "2", "--v0", "1", "--span", "1"],
        &["classify", "--n", "4"],
        &["classify", "--n", "4", "--kappa", "0"],
        &[],
    ] {
        let (code, _, err) = run(args);
        assert_eq!(code, 2, "{args:?}");
        let v: Value = serde_json::from_str(err.trim()).unwrap();
        assert_eq!(v["code"], "usage");
        assert!(v.get("message").is_some() && v.get("context").is_some());
    }
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("residual-check"));
}

#[test]
fn numeric_failures_exit_with_one() {
    let (code, out, err) = run(&["simulate", "--n", "4", "--v0", "100", "--span", "5"]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    let v: Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(v["code"], "divergence");
    assert_eq!(v["context"]["last_state"][0], 100.0);
    let (code, _, err) = run(&["classify", "--n", "4", "--kappa", "-0.6", "--kappa-star", "0"]);
    assert_eq!(code, 1);
    assert!(err.contains("inadmissible"));
}

#[test]
fn constants_and_classify_outputs() {
    let (code, out, _) = run(&["constants", "--n", "4", "--alpha", "3"]);
    assert_eq!(code, 0);
    let r = result_of(&out);
    assert_eq!((r["lambda"].as_f64(), r["mu"].as_f64()), (Some(1.0), Some(0.0)));
    let (_, out, _) = run(&["classify", "--kappa", "0", "--kappa-star", "0", "--n", "4"]);
    assert_eq!(result_of(&out)["tag"], "Removable");
    let (_, out, _) = run(&["classify", "--n", "4", "--alpha", "2", "--terminal-energy", "-2.6666666666666665"]);
    let r = result_of(&out);
    assert_eq!(r["tag"], "LowerCriticalSingular");
    assert_eq!(r["log_exponent"].as_f64(), Some(-1.0));
    let (_, out, _) = run(&["classify", "--n", "4", "--m", "2", "--family", "spiral", "--kappa", "0", "--kappa-star", "-0.01"]);
    assert_eq!(result_of(&out)["tag"], "CriticalOscillatory");
}

#[test]
fn invariants_on_the_spiral() {
    let dir = tempfile::tempdir().unwrap();
    let drift = dir.path().join("drift.csv");
    let out = dir.path().join("report.json");
    let (code, stdout, _) = run(&[
        "invariants", "--n", "4", "--m", "2", "--kappa", "0", "--kappa-star", "-0.01", "--span", "20",
        "--out", out.to_str().unwrap(), "--drift-csv", drift.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let r = result_of(&std::fs::read_to_string(&out).unwrap());
    assert!(r["kappa"].as_f64().unwrap().abs() < 1e-7);
    assert!((r["kappa_star"].as_f64().unwrap() + 0.01).abs() < 1e-7);
    assert!(r["k_drift"].as_f64().unwrap() < 1e-8);
    let csv = std::fs::read_to_string(&drift).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# {"));
    assert_eq!(lines.next().unwrap(), "t,psi,psi_star,k_1_2");
    assert_eq!(lines.count(), 20001);
}

#[test]
fn every_output_starts_with_a_header() {
    let (_, out, _) = run(&["family", "--n", "4", "--family", "bubble", "--samples", "5"]);
    let first = out.lines().next().unwrap();
    let h: Value = serde_json::from_str(first.trim_start_matches("# ")).unwrap();
    assert_eq!(h["regime"], "Critical");
    assert_eq!(h["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(h["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(out.lines().nth(1).unwrap(), "r,x_1,x_2,x_3,x_4,u_1");
    assert_eq!(out.lines().count(), 7);
    // 17 significant digits in every cell.
    let cell = out.lines().nth(2).unwrap().split(',').next().unwrap();
    assert_eq!(cell, "1.0000000000000000e-2");
}

#[test]
fn json_config_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, r#"{"command":"simulate","n":4,"m":2,"v0":[1,0],"dv0":[0,0.1],"span":2}"#).unwrap();
    let (a_code, a, _) = run(&["--config", path.to_str().unwrap()]);
    let (b_code, b, _) = run(&["simulate", "--n", "4", "--m", "2", "--v0", "1,0", "--dv0", "0,0.1", "--span", "2"]);
    assert_eq!((a_code, b_code), (0, 0));
    assert_eq!(a, b);

    std::fs::write(&path, r#"{"command":"simulate","n":4,"v0":[1],"span":2,"stepsize":1}"#).unwrap();
    let (code, _, err) = run(&["--config", path.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("stepsize"));
    std::fs::write(&path, r#"{"command":"simulate","n":"4","v0":[1],"span":2}"#).unwrap();
    assert_eq!(run(&["--config", path.to_str().unwrap()]).0, 2);
}

#[test]
fn sweep_is_ordered_and_independent_of_jobs() {
    let args = "sweep --n 4 --grid kappa --kappa-range -0.5,0.2,8 --kappa-star-range -0.1,0,6";
    let one = parse_config(argv(&format!("{args} --jobs 1"))).unwrap();
    let many = parse_config(argv(&format!("{args} --jobs 4"))).unwrap();
    let a = execute(&one).unwrap().primary;
    let b = execute(&many).unwrap().primary;
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let rows: Vec<Value> = text.lines().skip(1).map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 48);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row["index"], i);
        assert!(row.get("tag").is_some() || row.get("error").is_some());
    }
    // (-0.5, 0) is the homogeneous corner; (0, 0) is removable.
    assert_eq!(rows[5]["tag"], "CriticalHomogeneous");
    assert_eq!(rows[35]["tag"], "Removable");
    assert_eq!(rows[0]["error"]["code"], "inadmissible");

    let alpha = parse_config(argv("sweep --n 5 --grid alpha --alpha-range 1.2,2.4,7")).unwrap();
    let text = String::from_utf8(execute(&alpha).unwrap().primary).unwrap();
    let rows: Vec<Value> = text.lines().skip(1).map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows[0]["regime"], "BelowSerrin");
    assert_eq!(rows[4]["regime"], "Intermediate");
    assert_eq!(rows[6]["error"]["code"], "range");
}

#[test]
fn residual_check_reports_small_residuals() {
    for args in [
        "residual-check --n 4 --family bubble --center 0.5,0,0,0",
        "residual-check --n 5 --alpha 2 --family homogeneous",
        "residual-check --n 4 --m 2 --family spiral --kappa 0 --kappa-star -0.01 --r-min 0.001",
    ] {
        let c = parse_config(argv(args)).unwrap();
        let out = execute(&c).unwrap();
        let r = result_of(std::str::from_utf8(&out.primary).unwrap());
        assert!(r["max_relative"].as_f64().unwrap() < 1e-5, "{args}: {r}");
    }
}

#[test]
fn identical_configs_give_identical_bytes() {
    let args = "simulate --n 4 --m 2 --v0 1,0 --dv0 0,0.1 --span 5";
    let a = execute(&parse_config(argv(args)).unwrap()).unwrap();
    let b = execute(&parse_config(argv(args)).unwrap()).unwrap();
    assert_eq!(a.primary, b.primary);
    let other = execute(&parse_config(argv("simulate --n 4 --m 2 --v0 1,0 --dv0 0,0.2 --span 5")).unwrap()).unwrap();
    assert_ne!(a.primary.split(|b| *b == b'\n').next(), other.primary.split(|b| *b == b'\n').next());
}
