//! Command execution. Every command renders its artifacts to bytes first, so
//! identical configurations give identical output regardless of destination.

use std::sync::Arc;

use lane_emden::classify::classify_field;
use lane_emden::families::{first_axis, fowler_roots};
use lane_emden::field::norm;
use lane_emden::invariants::pair_labels;
use lane_emden::transforms::relative_residual;
use lane_emden::{
    bubble, build_sphere_quadrature, classify_by_regime, classify_critical, critical_homogeneous, drift_series,
    homogeneous_singular, integrate_lower_critical, integrate_radial, kappa_of, spiral, Domain, Error, Evidence,
    FieldRef, FowlerOutcome, ProblemParams, RadialTrajectory, Regime,
};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{
    ClassifyArgs, Command, FamilyArgs, FamilyKind, FamilySpec, GridKind, InvariantsArgs, ResidualArgs, RunConfig,
    SimulateArgs, SweepArgs, SystemKind, DEFAULT_H,
};
use crate::error::CliError;
use crate::output::{json_document, json_lines, Csv};

/// Rendered outputs of one run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Artifacts {
    /// Goes to `--out`, or standard output.
    pub primary: Vec<u8>,
    /// Goes to `--drift-csv` when given.
    pub drift_csv: Option<Vec<u8>>,
    pub warnings: Vec<String>,
}

pub fn execute(config: &RunConfig) -> Result<Artifacts, CliError> {
    let name = config.command.name();
    let wrap = |e: Error| CliError::numeric(e, name);
    match &config.command {
        Command::Constants(_) => constants(config),
        Command::Family(a) => family(config, a).map_err(wrap),
        Command::Simulate(a) => simulate(config, a).map_err(wrap),
        Command::Invariants(a) => invariants(config, a).map_err(wrap),
        Command::Classify(a) => classify(config, a).map_err(wrap),
        Command::Sweep(a) => sweep(config, a),
        Command::ResidualCheck(a) => residual_check(config, a).map_err(wrap),
    }
}

fn constants(config: &RunConfig) -> Result<Artifacts, CliError> {
    let p = config.params();
    let c = p.constants();
    let result = json!({
        "n": p.n,
        "m": p.m,
        "alpha": p.alpha,
        "regime": p.regime(),
        "lambda": c.lambda,
        "mu": c.mu,
        "lambda_bar": c.lambda_bar,
        "serrin_exponent": c.serrin_exponent,
        "sobolev_exponent": c.sobolev_exponent,
        "ball_volume": c.ball_volume,
        "sphere_area": c.sphere_area,
        "a_priori_constant": c.a_priori_constant(),
    });
    Ok(Artifacts { primary: json_document(config, &result), ..Default::default() })
}

/// Builds the closed-form field selected by `spec`.
pub fn build_field(
    params: &ProblemParams,
    spec: &FamilySpec,
    kappa: Option<f64>,
    kappa_star: Option<f64>,
) -> lane_emden::Result<FieldRef> {
    let (n, m) = (params.n, params.m);
    let direction = spec.direction.clone().unwrap_or_else(|| first_axis(m));
    let need_critical = || {
        if params.regime() == Regime::Critical {
            Ok(())
        } else {
            Err(Error::Regime(format!("this family needs the critical exponent, got alpha = {}", params.alpha)))
        }
    };
    match spec.family.expect("validated") {
        FamilyKind::Bubble => {
            need_critical()?;
            let center = spec.center.clone().unwrap_or_else(|| vec![0.0; n]);
            Ok(Arc::new(bubble(n, m, &center, spec.scale, &direction)?))
        }
        FamilyKind::Homogeneous => Ok(Arc::new(homogeneous_singular(params, &direction)?)),
        FamilyKind::CriticalHomogeneous => {
            need_critical()?;
            Ok(Arc::new(critical_homogeneous(n, m, &direction)?))
        }
        FamilyKind::Spiral => {
            need_critical()?;
            if m != 2 {
                return Err(Error::Configuration("spirals have m = 2 components".into()));
            }
            let s = spiral(n, kappa.expect("validated"), kappa_star.expect("validated"), 0.0, spec.spiral_span, DEFAULT_H)?;
            s.field()
        }
    }
}

fn family(config: &RunConfig, a: &FamilyArgs) -> lane_emden::Result<Artifacts> {
    let p = config.params();
    let u = build_field(&p, &a.field, a.kappa, a.kappa_star)?;
    let ray = a.ray.clone().unwrap_or_else(|| first_axis(p.n));
    let len = norm(&ray);
    if len == 0.0 {
        return Err(Error::Validation("sampling ray must be nonzero".into()));
    }
    let mut columns = vec!["r".to_string()];
    columns.extend((1..=p.n).map(|i| format!("x_{i}")));
    columns.extend((1..=p.m).map(|i| format!("u_{i}")));
    let mut csv = Csv::new(config, &columns);
    let ratio = (a.r_max / a.r_min).ln() / (a.samples - 1) as f64;
    for k in 0..a.samples {
        let r = a.r_min * (ratio * k as f64).exp();
        let x: Vec<f64> = ray.iter().map(|c| r * c / len).collect();
        let value = u.value(&x)?;
        let row: Vec<f64> = std::iter::once(r).chain(x.iter().copied()).chain(value).collect();
        csv.row(&row);
    }
    Ok(Artifacts { primary: csv.into_bytes(), ..Default::default() })
}

fn trajectory_csv(config: &RunConfig, tr: &RadialTrajectory) -> Vec<u8> {
    let m = tr.components();
    let mut columns = vec!["t".to_string()];
    columns.extend((1..=m).map(|i| format!("v_{i}")));
    columns.extend((1..=m).map(|i| format!("dv_{i}")));
    let mut csv = Csv::new(config, &columns);
    let mut row = Vec::with_capacity(2 * m + 1);
    for s in &tr.states {
        row.clear();
        row.push(s.t);
        row.extend(&s.v);
        row.extend(&s.dv);
        csv.row(&row);
    }
    csv.into_bytes()
}

fn negative_warning(tr: &RadialTrajectory) -> Vec<String> {
    tr.negative_component
        .iter()
        .map(|e| format!("component {} reached {} at t = {}", e.component + 1, e.value, e.t))
        .collect()
}

pub fn run_simulation(config: &RunConfig, a: &SimulateArgs) -> lane_emden::Result<RadialTrajectory> {
    let p = config.params();
    let span = [a.t0, a.t0 + a.span];
    match a.system {
        SystemKind::Cylindrical => integrate_radial(&p, &a.v0, &a.dv0, span, a.h),
        SystemKind::LowerCritical => {
            if p.regime() != Regime::Serrin {
                return Err(Error::Regime("the lower-critical system needs alpha = n/(n-2)".into()));
            }
            integrate_lower_critical(p.n, p.m, &a.v0, &a.dv0, span, a.h)
        }
    }
}

fn simulate(config: &RunConfig, a: &SimulateArgs) -> lane_emden::Result<Artifacts> {
    let tr = run_simulation(config, a)?;
    Ok(Artifacts { primary: trajectory_csv(config, &tr), drift_csv: None, warnings: negative_warning(&tr) })
}

fn invariants(config: &RunConfig, a: &InvariantsArgs) -> lane_emden::Result<Artifacts> {
    let p = config.params();
    let span = [a.t0, a.t0 + a.span];
    let (tr, source) = match (&a.v0, a.kappa, a.kappa_star) {
        (Some(v0), _, _) => {
            let dv0 = a.dv0.clone().unwrap_or_else(|| vec![0.0; p.m]);
            (Arc::new(integrate_radial(&p, v0, &dv0, span, a.h)?), "initial-state")
        }
        (None, Some(kappa), Some(kappa_star)) => {
            if p.regime() != Regime::Critical {
                return Err(Error::Regime("spirals need the critical exponent".into()));
            }
            (spiral(p.n, kappa, kappa_star, a.t0, a.span, a.h)?.trajectory, "spiral")
        }
        _ => unreachable!("validated"),
    };
    let report = kappa_of(&tr)?;
    let admissible = report.check_bounds(p.n, 1e-8).is_ok();
    let mut result = serde_json::to_value(&report).expect("serializable");
    result["identity_residual"] = json!(report.identity_residual());
    result["admissible"] = json!(admissible);
    result["source"] = json!(source);

    let series = drift_series(&tr)?;
    let labels = pair_labels(p.m);
    let mut columns = vec!["t".to_string(), "psi".into(), "psi_star".into()];
    columns.extend(labels.iter().cloned());
    let mut csv = Csv::new(config, &columns);
    let mut row = Vec::with_capacity(columns.len());
    for i in 0..series.t.len() {
        row.clear();
        row.extend([series.t[i], series.psi[i], series.psi_star[i]]);
        row.extend(series.k[i].upper());
        csv.row(&row);
    }
    Ok(Artifacts { primary: json_document(config, &result), drift_csv: Some(csv.into_bytes()), warnings: negative_warning(&tr) })
}

fn classify(config: &RunConfig, a: &ClassifyArgs) -> lane_emden::Result<Artifacts> {
    let p = config.params();
    let class = if a.field.family.is_some() {
        let u = build_field(&p, &a.field, a.kappa, a.kappa_star)?;
        let q = build_sphere_quadrature(p.n, a.order)?;
        classify_field(u.as_ref(), &q, a.tol)?
    } else {
        let evidence = if let (Some(kappa), Some(kappa_star)) = (a.kappa, a.kappa_star) {
            Evidence::Invariants { kappa, kappa_star }
        } else if let Some(value) = a.phi_limit {
            Evidence::PhiLimit { value }
        } else if let Some(value) = a.amplitude {
            Evidence::Amplitude { value }
        } else {
            Evidence::TerminalEnergy { value: a.terminal_energy.expect("validated") }
        };
        classify_by_regime(&p, evidence, a.tol)?
    };
    Ok(Artifacts { primary: json_document(config, &class), ..Default::default() })
}

fn grid(range: &[f64]) -> Vec<f64> {
    let (lo, hi, count) = (range[0], range[1], range[2] as usize);
    if count == 1 {
        return vec![lo];
    }
    (0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect()
}

fn error_value(e: &Error) -> Value {
    json!({ "code": e.code(), "message": e.to_string() })
}

fn kappa_cell(n: usize, kappa: f64, kappa_star: f64, tol: f64) -> Value {
    let mut row = json!({ "kappa": kappa, "kappa_star": kappa_star });
    match classify_critical(kappa, kappa_star, n, tol) {
        Ok(class) => {
            let record = serde_json::to_value(class).expect("serializable");
            for (k, v) in record.as_object().expect("object") {
                row[k] = v.clone();
            }
            if let Ok(FowlerOutcome::Oscillatory(d)) = fowler_roots(n, kappa, kappa_star) {
                row["rho_min"] = json!(d.rho_min);
                row["rho_max"] = json!(d.rho_max);
                row["period"] = json!(d.period);
            }
        }
        Err(e) => row["error"] = error_value(&e),
    }
    row
}

fn alpha_cell(n: usize, m: usize, alpha: f64) -> Value {
    match ProblemParams::new(n, m, alpha) {
        Ok(p) => {
            let c = p.constants();
            json!({
                "alpha": alpha,
                "regime": p.regime(),
                "lambda": c.lambda,
                "mu": c.mu,
                "lambda_bar": c.lambda_bar,
                "homogeneous_amplitude": c.homogeneous_amplitude(),
            })
        }
        Err(e) => json!({ "alpha": alpha, "error": error_value(&e) }),
    }
}

fn sweep(config: &RunConfig, a: &SweepArgs) -> Result<Artifacts, CliError> {
    let p = config.params();
    let cells: Vec<Box<dyn Fn() -> Value + Send + Sync>> = match a.grid {
        GridKind::Kappa => {
            let ks = grid(a.kappa_range.as_deref().expect("validated"));
            let kss = grid(a.kappa_star_range.as_deref().expect("validated"));
            let (n, tol) = (p.n, a.tol);
            ks.iter()
                .flat_map(|&k| kss.iter().map(move |&ks| (k, ks)))
                .map(|(k, ks)| Box::new(move || kappa_cell(n, k, ks, tol)) as Box<dyn Fn() -> Value + Send + Sync>)
                .collect()
        }
        GridKind::Alpha => {
            let (n, m) = (p.n, p.m);
            grid(a.alpha_range.as_deref().expect("validated"))
                .into_iter()
                .map(|al| Box::new(move || alpha_cell(n, m, al)) as Box<dyn Fn() -> Value + Send + Sync>)
                .collect()
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = config.jobs {
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(|e| CliError::usage(format!("cannot start {:?} workers: {e}", config.jobs)))?;
    // Indexed collect keeps grid order whatever the completion order.
    let rows: Vec<Value> = pool.install(|| {
        cells
            .par_iter()
            .enumerate()
            .map(|(i, cell)| {
                let mut row = json!({ "index": i });
                for (k, v) in cell().as_object().expect("object") {
                    row[k] = v.clone();
                }
                row
            })
            .collect()
    });
    Ok(Artifacts { primary: json_lines(config, &rows), ..Default::default() })
}

fn sample_point(rng: &mut ChaCha8Rng, n: usize, r_min: f64, r_max: f64) -> Vec<f64> {
    let dir = loop {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let len = norm(&x);
        if len > 0.1 && len <= 1.0 {
            break x.into_iter().map(|c| c / len).collect::<Vec<f64>>();
        }
    };
    let r = r_min * (rng.random_range(0.0..1.0) * (r_max / r_min).ln()).exp();
    dir.into_iter().map(|c| r * c).collect()
}

fn residual_check(config: &RunConfig, a: &ResidualArgs) -> lane_emden::Result<Artifacts> {
    let p = config.params();
    let u = build_field(&p, &a.field, a.kappa, a.kappa_star)?;
    let (mut r_min, mut r_max) = (a.r_min, a.r_max);
    // The stencil scales with the distance to the singular point, so a
    // margin proportional to the radius keeps it inside annular domains.
    let margin = 1.0 + 3.0 * a.fd_step;
    if let Domain::Punctured { inner, outer, .. } = u.domain() {
        r_min = r_min.max(inner * margin);
        r_max = r_max.min(outer / margin);
        if !(r_max > r_min) {
            return Err(Error::Domain(format!("no room for the stencil between radii {inner} and {outer}")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut worst: f64 = 0.0;
    let mut sum = 0.0;
    let mut worst_point = Vec::new();
    for _ in 0..a.points {
        let x = sample_point(&mut rng, p.n, r_min, r_max);
        let r = relative_residual(u.as_ref(), &x, a.fd_step * u.length_scale(&x))?;
        sum += r;
        if r >= worst {
            worst = r;
            worst_point = x;
        }
    }
    let result = json!({
        "field": u.name(),
        "points": a.points,
        "max_relative": worst,
        "mean_relative": sum / a.points as f64,
        "worst_point": worst_point,
        "r_min": r_min,
        "r_max": r_max,
    });
    Ok(Artifacts { primary: json_document(config, &result), ..Default::default() })
}
