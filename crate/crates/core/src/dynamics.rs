//! Fixed-step RK4 integration of the radial reductions.
//!
//! Three second-order systems share the machinery:
//!
//! * the cylindrical system `v'' = -μ v' + λ v - |v|^(α-1) v`,
//! * the lower-critical system in the log-corrected variable `φ`,
//! * the scalar Fowler equation `ρ'' = (n-2)²/4 ρ - ρ^((n+2)/(n-2)) - κ*/ρ³`.
//!
//! The grid is uniform and every run is deterministic: identical inputs give
//! bit-identical trajectories.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{norm, norm_pow};
use crate::extended::Real;
use crate::params::{a_priori_constant, ProblemParams, Regime};

pub const DEFAULT_STEP: f64 = 1e-3;
/// Multiplier on the a priori amplitude beyond which a run is declared divergent.
pub const GUARD_FACTOR: f64 = 10.0;
/// Components below `-NEGATIVE_TOL` raise the sign warning.
pub const NEGATIVE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum System {
    Cylindrical { lambda: f64, mu: f64, alpha: f64 },
    LowerCritical { n: usize },
    Fowler { n: usize, kappa_star: f64 },
}

impl System {
    pub fn cylindrical(params: &ProblemParams) -> Self {
        let c = params.constants();
        System::Cylindrical { lambda: c.lambda, mu: c.mu, alpha: params.alpha }
    }

    /// Second derivative prescribed by the system at `(t, v, dv)`.
    pub fn acceleration(&self, t: f64, v: &[f64], dv: &[f64], out: &mut [f64]) {
        match *self {
            System::Cylindrical { lambda, mu, alpha } => {
                let nl = norm_pow(norm(v), alpha - 1.0);
                for i in 0..v.len() {
                    out[i] = -mu * dv[i] + lambda * v[i] - nl * v[i];
                }
            }
            System::LowerCritical { n } => {
                let nm2 = n as f64 - 2.0;
                let damping = nm2 * (1.0 - 1.0 / t);
                let linear = nm2 / (2.0 * t) * (nm2 - n as f64 / (2.0 * t));
                let nl = norm_pow(norm(v), 2.0 / nm2) / t;
                for i in 0..v.len() {
                    out[i] = -damping * dv[i] + linear * v[i] - nl * v[i];
                }
            }
            System::Fowler { n, kappa_star } => {
                let nm2 = n as f64 - 2.0;
                let rho = v[0];
                out[0] = 0.25 * nm2 * nm2 * rho
                    - rho.abs().powf((n as f64 + 2.0) / nm2) * rho.signum()
                    - kappa_star / (rho * rho * rho);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialState {
    pub t: f64,
    pub v: Vec<f64>,
    pub dv: Vec<f64>,
}

/// First time a component dropped below `-NEGATIVE_TOL`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NegativeExcursion {
    pub t: f64,
    pub component: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialTrajectory {
    pub params: ProblemParams,
    pub system: System,
    /// Signed step; negative for backward runs.
    pub h: f64,
    pub states: Vec<RadialState>,
    pub negative_component: Option<NegativeExcursion>,
}

impl RadialTrajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn t_start(&self) -> f64 {
        self.states[0].t
    }

    pub fn t_end(&self) -> f64 {
        self.states[self.states.len() - 1].t
    }

    pub fn first(&self) -> &RadialState {
        &self.states[0]
    }

    pub fn last(&self) -> &RadialState {
        &self.states[self.states.len() - 1]
    }

    pub fn components(&self) -> usize {
        self.states[0].v.len()
    }

    pub fn acceleration(&self, s: &RadialState) -> Vec<f64> {
        let mut out = vec![0.0; s.v.len()];
        self.system.acceleration(s.t, &s.v, &s.dv, &mut out);
        out
    }

    pub fn contains_time(&self, t: f64) -> bool {
        let (lo, hi) = ordered(self.t_start(), self.t_end());
        t >= lo - 1e-12 && t <= hi + 1e-12
    }

    /// State at `t` by cubic Hermite interpolation, using the stored
    /// derivatives and the system's accelerations at the bracketing nodes.
    pub fn state_at(&self, t: f64) -> Result<RadialState> {
        if !self.contains_time(t) {
            return Err(Error::Range(format!(
                "t = {t} outside the trajectory span [{}, {}]",
                self.t_start().min(self.t_end()),
                self.t_start().max(self.t_end())
            )));
        }
        let pos = (t - self.t_start()) / self.h;
        let last = self.states.len() - 1;
        let k = (pos.floor().max(0.0) as usize).min(last.saturating_sub(1));
        let s = pos - k as f64;
        if last == 0 || s.abs() < 1e-14 {
            return Ok(self.states[k].clone());
        }
        if (s - 1.0).abs() < 1e-14 {
            return Ok(self.states[k + 1].clone());
        }
        let a = &self.states[k];
        let b = &self.states[k + 1];
        let acc_a = self.acceleration(a);
        let acc_b = self.acceleration(b);
        let h = self.h;
        let (h00, h10, h01, h11) = hermite(s);
        let m = a.v.len();
        let mut v = vec![0.0; m];
        let mut dv = vec![0.0; m];
        for i in 0..m {
            v[i] = h00 * a.v[i] + h10 * h * a.dv[i] + h01 * b.v[i] + h11 * h * b.dv[i];
            dv[i] = h00 * a.dv[i] + h10 * h * acc_a[i] + h01 * b.dv[i] + h11 * h * acc_b[i];
        }
        Ok(RadialState { t, v, dv })
    }

    /// Max-norm residual of the sampled `v` against the system, with `v''`
    /// taken from a 4th-order five-point difference of the samples.
    pub fn sampled_residual(&self) -> f64 {
        let h = self.h;
        let mut worst: f64 = 0.0;
        let mut acc = vec![0.0; self.components()];
        for k in 2..self.states.len().saturating_sub(2) {
            let s = &self.states[k];
            self.system.acceleration(s.t, &s.v, &s.dv, &mut acc);
            for i in 0..acc.len() {
                let fd = (-self.states[k - 2].v[i] + 16.0 * self.states[k - 1].v[i] - 30.0 * s.v[i]
                    + 16.0 * self.states[k + 1].v[i]
                    - self.states[k + 2].v[i])
                    / (12.0 * h * h);
                worst = worst.max((fd - acc[i]).abs());
            }
        }
        worst
    }
}

fn ordered(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn hermite(s: f64) -> (f64, f64, f64, f64) {
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0, s3 - 2.0 * s2 + s, -2.0 * s3 + 3.0 * s2, s3 - s2)
}

/// One classical RK4 step for `y' = f(t, y)`.
pub(crate) fn rk4_step<R: Real>(
    f: &impl Fn(R, &[R], &mut [R]),
    t: R,
    y: &mut [R],
    h: R,
    work: &mut Rk4Work<R>,
) {
    let n = y.len();
    let half = R::from_f64(0.5) * h;
    let two = R::from_f64(2.0);
    let Rk4Work { k1, k2, k3, k4, tmp } = work;
    f(t, y, k1);
    for i in 0..n {
        tmp[i] = y[i] + half * k1[i];
    }
    f(t + half, tmp, k2);
    for i in 0..n {
        tmp[i] = y[i] + half * k2[i];
    }
    f(t + half, tmp, k3);
    for i in 0..n {
        tmp[i] = y[i] + h * k3[i];
    }
    f(t + h, tmp, k4);
    let sixth = h / R::from_f64(6.0);
    for i in 0..n {
        y[i] += sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i]);
    }
}

pub(crate) struct Rk4Work<R> {
    k1: Vec<R>,
    k2: Vec<R>,
    k3: Vec<R>,
    k4: Vec<R>,
    tmp: Vec<R>,
}

impl<R: Real> Rk4Work<R> {
    pub(crate) fn new(n: usize) -> Self {
        let z = vec![R::from_f64(0.0); n];
        Self { k1: z.clone(), k2: z.clone(), k3: z.clone(), k4: z.clone(), tmp: z }
    }
}

/// Number of steps of size `h` covering `span`, rejecting spans that are not
/// (nearly) an integer multiple of the step.
fn step_count(span: f64, h: f64) -> Result<usize> {
    let steps = (span / h).round();
    if steps < 1.0 {
        return Err(Error::Configuration(format!("span {span} is shorter than the step {h}")));
    }
    if ((steps * h) - span).abs() > 1e-9 * span.max(1.0) {
        return Err(Error::Configuration(format!("span {span} is not a multiple of the step {h}")));
    }
    Ok(steps as usize)
}

/// Integrates `system` from `start` to `t_end` (either direction) with step `|h|`.
pub fn integrate_system(
    params: ProblemParams,
    system: System,
    start: &RadialState,
    t_end: f64,
    h: f64,
    guard: Option<f64>,
) -> Result<RadialTrajectory> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Configuration(format!("step must be positive, got {h}")));
    }
    let m = start.v.len();
    if start.dv.len() != m {
        return Err(Error::Validation("v and dv have different lengths".into()));
    }
    if start.v.iter().chain(&start.dv).any(|c| !c.is_finite()) || !start.t.is_finite() {
        return Err(Error::Validation("initial state is not finite".into()));
    }
    let span = t_end - start.t;
    let sign = if span >= 0.0 { 1.0 } else { -1.0 };
    let steps = step_count(span.abs(), h)?;
    let step = sign * h;

    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let (v, dv) = y.split_at(m);
        let (dv_out, acc_out) = dy.split_at_mut(m);
        dv_out.copy_from_slice(dv);
        system.acceleration(t, v, dv, acc_out);
    };

    let mut y: Vec<f64> = start.v.iter().chain(&start.dv).copied().collect();
    let mut work = Rk4Work::new(2 * m);
    let mut states = Vec::with_capacity(steps + 1);
    states.push(start.clone());
    let mut negative = first_negative(start.t, &start.v);
    for k in 0..steps {
        let t = start.t + k as f64 * step;
        rk4_step(&rhs, t, &mut y, step, &mut work);
        let t_next = start.t + (k + 1) as f64 * step;
        let v_norm = norm(&y[..m]);
        let bad = y.iter().any(|c| !c.is_finite());
        if let Some(g) = guard {
            if bad || v_norm > g {
                let last = states.last().expect("nonempty");
                return Err(Error::Divergence {
                    t: t_next,
                    norm: v_norm,
                    guard: g,
                    last_state: last.v.iter().chain(&last.dv).copied().collect(),
                });
            }
        } else if bad {
            return Err(Error::Numeric(format!("state became non-finite at t = {t_next}")));
        }
        if negative.is_none() {
            negative = first_negative(t_next, &y[..m]);
        }
        states.push(RadialState { t: t_next, v: y[..m].to_vec(), dv: y[m..].to_vec() });
    }
    Ok(RadialTrajectory { params, system, h: step, states, negative_component: negative })
}

fn first_negative(t: f64, v: &[f64]) -> Option<NegativeExcursion> {
    v.iter()
        .enumerate()
        .find(|(_, c)| **c < -NEGATIVE_TOL)
        .map(|(i, c)| NegativeExcursion { t, component: i, value: *c })
}

/// Blowup guard `10 ((α-1)/(2n))^(-1/(α-1))` on `|v|`.
pub fn divergence_guard(params: &ProblemParams) -> f64 {
    GUARD_FACTOR * a_priori_constant(params)
}

/// RK4 on the radial cylindrical system over `[t0, t1]`.
pub fn integrate_radial(
    params: &ProblemParams,
    v0: &[f64],
    dv0: &[f64],
    t_span: [f64; 2],
    h: f64,
) -> Result<RadialTrajectory> {
    if v0.len() != params.m || dv0.len() != params.m {
        return Err(Error::Validation(format!(
            "initial data must have m = {} components",
            params.m
        )));
    }
    if !(t_span[1] > t_span[0]) {
        return Err(Error::Configuration(format!("empty time span [{}, {}]", t_span[0], t_span[1])));
    }
    let start = RadialState { t: t_span[0], v: v0.to_vec(), dv: dv0.to_vec() };
    integrate_radial_from(params, &start, t_span[1], h)
}

/// Continues a cylindrical trajectory from an arbitrary state, forward or backward.
pub fn integrate_radial_from(
    params: &ProblemParams,
    start: &RadialState,
    t_end: f64,
    h: f64,
) -> Result<RadialTrajectory> {
    integrate_system(*params, System::cylindrical(params), start, t_end, h, Some(divergence_guard(params)))
}

/// Start-time threshold `(2n-3)/(2n-4)` above which the lower-critical energy is monotone.
pub fn lower_critical_threshold(n: usize) -> f64 {
    (2.0 * n as f64 - 3.0) / (2.0 * n as f64 - 4.0)
}

/// RK4 on the radial lower-critical system for `φ`, starting at `t_span[0]`.
pub fn integrate_lower_critical(
    n: usize,
    m: usize,
    phi0: &[f64],
    dphi0: &[f64],
    t_span: [f64; 2],
    h: f64,
) -> Result<RadialTrajectory> {
    let params = ProblemParams::serrin(n, m)?;
    debug_assert_eq!(params.regime(), Regime::Serrin);
    let threshold = lower_critical_threshold(n);
    if !(t_span[0] > threshold) {
        return Err(Error::Configuration(format!(
            "start time {} must exceed (2n-3)/(2n-4) = {threshold}",
            t_span[0]
        )));
    }
    if !(t_span[1] > t_span[0]) {
        return Err(Error::Configuration(format!("empty time span [{}, {}]", t_span[0], t_span[1])));
    }
    if phi0.len() != m || dphi0.len() != m {
        return Err(Error::Validation(format!("initial data must have m = {m} components")));
    }
    let start = RadialState { t: t_span[0], v: phi0.to_vec(), dv: dphi0.to_vec() };
    integrate_system(
        params,
        System::LowerCritical { n },
        &start,
        t_span[1],
        h,
        Some(divergence_guard(&params)),
    )
}

/// `((n-2)²/2)^((n-2)/2)`, the amplitude of the singular lower-critical branch.
pub fn lower_critical_amplitude(n: usize) -> f64 {
    let nm2 = n as f64 - 2.0;
    (0.5 * nm2 * nm2).powf(0.5 * nm2)
}
