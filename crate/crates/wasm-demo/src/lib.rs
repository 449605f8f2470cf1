//! Browser bindings for three lane-emden operations. Each returns a JSON
//! string; the plain functions are usable natively and are what the tests call.

use lane_emden::{classify_critical, spiral, FowlerOutcome, ProblemParams, Result};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Derived constants and the regime for `(n, m, α)`.
pub fn constants(n: usize, m: usize, alpha: f64) -> Result<Value> {
    let p = ProblemParams::new(n, m, alpha)?;
    Ok(json!({ "regime": p.regime(), "constants": p.constants(), "a_priori_constant": p.constants().a_priori_constant() }))
}

/// The two-component spiral with invariants `(κ, κ*)`, thinned to about `samples` points.
pub fn spiral_orbit(n: usize, kappa: f64, kappa_star: f64, span: f64, samples: usize) -> Result<Value> {
    let h = 1e-3;
    let s = spiral(n, kappa, kappa_star, 0.0, span, h)?;
    let stride = (s.trajectory.states.len() / samples.max(2)).max(1);
    let mut t = Vec::new();
    let mut v1 = Vec::new();
    let mut v2 = Vec::new();
    let mut rho = Vec::new();
    for (st, r) in s.trajectory.states.iter().zip(&s.rho.states).step_by(stride) {
        t.push(st.t);
        v1.push(st.v[0]);
        v2.push(st.v[1]);
        rho.push(r.v[0]);
    }
    Ok(json!({
        "rho_min": s.data.rho_min,
        "rho_max": s.data.rho_max,
        "period": s.data.period,
        "t": t,
        "v1": v1,
        "v2": v2,
        "rho": rho,
    }))
}

/// Tag and asymptotic law for measured critical invariants, plus the Fowler band when there is one.
pub fn classify(n: usize, kappa: f64, kappa_star: f64, tol: f64) -> Result<Value> {
    let class = classify_critical(kappa, kappa_star, n, tol)?;
    let mut out = serde_json::to_value(class).expect("serializable");
    if let Ok(FowlerOutcome::Oscillatory(d)) = lane_emden::fowler_roots(n, kappa, kappa_star) {
        out["band"] = json!([d.rho_min, d.rho_max]);
        out["period"] = json!(d.period);
    }
    Ok(out)
}

fn to_js(r: Result<Value>) -> std::result::Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = constants)]
pub fn constants_js(n: usize, m: usize, alpha: f64) -> std::result::Result<String, JsError> {
    to_js(constants(n, m, alpha))
}

#[wasm_bindgen(js_name = spiralOrbit)]
pub fn spiral_orbit_js(n: usize, kappa: f64, kappa_star: f64, span: f64, samples: usize) -> std::result::Result<String, JsError> {
    to_js(spiral_orbit(n, kappa, kappa_star, span, samples))
}

#[wasm_bindgen(js_name = classify)]
pub fn classify_js(n: usize, kappa: f64, kappa_star: f64, tol: f64) -> std::result::Result<String, JsError> {
    to_js(classify(n, kappa, kappa_star, tol))
}
