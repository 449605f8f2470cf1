//! Explicit solution families and the Fowler orbit machinery.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dynamics::{integrate_system, rk4_step, RadialState, RadialTrajectory, Rk4Work, System};
use crate::error::{Error, Result};
use crate::field::{distance, norm, Domain, Field, FieldRef};
use crate::params::{kappa_floor, kappa_star_floor, sobolev_exponent, ProblemParams, Regime};
use crate::quadrature::gauss_chebyshev;

fn check_direction(e: &[f64], m: usize) -> Result<()> {
    if e.len() != m {
        return Err(Error::Validation(format!("direction has {} components, expected {m}", e.len())));
    }
    if e.iter().any(|c| *c < 0.0 || !c.is_finite()) {
        return Err(Error::Validation(format!("direction {e:?} is not nonnegative")));
    }
    if (norm(e) - 1.0).abs() > 1e-12 {
        return Err(Error::Validation(format!("direction {e:?} is not a unit vector")));
    }
    Ok(())
}

/// Unit vector along the first axis of `R^m`.
pub fn first_axis(m: usize) -> Vec<f64> {
    let mut e = vec![0.0; m];
    e[0] = 1.0;
    e
}

/// Aubin–Talenti bubble `(n(n-2))^((n-2)/4) (r/(r² + |x-z|²))^((n-2)/2) e`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bubble {
    params: ProblemParams,
    center: Vec<f64>,
    scale: f64,
    direction: Vec<f64>,
    amplitude: f64,
}

pub fn bubble(n: usize, m: usize, z: &[f64], r: f64, e: &[f64]) -> Result<Bubble> {
    let params = ProblemParams::critical(n, m)?;
    check_direction(e, m)?;
    if z.len() != n {
        return Err(Error::Validation(format!("bubble center must have {n} coordinates")));
    }
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::Validation(format!("bubble scale must be nonnegative, got {r}")));
    }
    let nf = n as f64;
    Ok(Bubble {
        params,
        center: z.to_vec(),
        scale: r,
        direction: e.to_vec(),
        amplitude: (nf * (nf - 2.0)).powf(0.25 * (nf - 2.0)),
    })
}

impl Bubble {
    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Scalar profile and `s = r² + |x-z|²`.
    fn profile(&self, x: &[f64]) -> (f64, f64) {
        let d2: f64 = x.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum();
        let s = self.scale * self.scale + d2;
        if self.scale == 0.0 {
            return (0.0, s);
        }
        let p = 0.5 * (self.params.n as f64 - 2.0);
        (self.amplitude * (self.scale / s).powf(p), s)
    }
}

impl Field for Bubble {
    fn params(&self) -> ProblemParams {
        self.params
    }

    fn domain(&self) -> Domain {
        Domain::WholeSpace
    }

    fn is_radial(&self) -> bool {
        self.scale == 0.0 || self.center.iter().all(|c| *c == 0.0)
    }

    fn regular_at_origin(&self) -> bool {
        true
    }

    fn name(&self) -> String {
        format!("bubble(z={:?}, r={})", self.center, self.scale)
    }

    fn eval_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let (b, _) = self.profile(x);
        self.direction.iter().map(|e| b * e).collect()
    }

    fn gradient_unchecked(&self, x: &[f64]) -> Option<Vec<Vec<f64>>> {
        let (b, s) = self.profile(x);
        let p = 0.5 * (self.params.n as f64 - 2.0);
        let grad: Vec<f64> = x.iter().zip(&self.center).map(|(a, c)| -2.0 * p * b * (a - c) / s).collect();
        Some(self.direction.iter().map(|e| grad.iter().map(|g| e * g).collect()).collect())
    }

    fn laplacian_unchecked(&self, x: &[f64]) -> Option<Vec<f64>> {
        let (b, s) = self.profile(x);
        if b == 0.0 {
            return Some(vec![0.0; self.params.m]);
        }
        let nf = self.params.n as f64;
        let p = 0.5 * (nf - 2.0);
        let d2 = s - self.scale * self.scale;
        let lap = -2.0 * p * b * (nf / s - 2.0 * (p + 1.0) * d2 / (s * s));
        Some(self.direction.iter().map(|e| lap * e).collect())
    }

    fn has_analytic_gradient(&self) -> bool {
        true
    }

    fn has_analytic_laplacian(&self) -> bool {
        true
    }

    fn length_scale(&self, x: &[f64]) -> f64 {
        (self.scale * self.scale + distance(x, &self.center).powi(2)).sqrt().min(1.0)
    }
}

/// `A |x|^(-d) e` on the punctured space.
#[derive(Debug, Clone, PartialEq)]
pub struct Homogeneous {
    params: ProblemParams,
    amplitude: f64,
    degree: f64,
    direction: Vec<f64>,
    label: &'static str,
}

impl Homogeneous {
    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// `d` in `|x|^(-d)`.
    pub fn degree(&self) -> f64 {
        self.degree
    }
}

/// `λ^(1/(α-1)) |x|^(-2/(α-1)) e`, requiring `λ > 0`.
pub fn homogeneous_singular(params: &ProblemParams, e: &[f64]) -> Result<Homogeneous> {
    check_direction(e, params.m)?;
    let c = params.constants();
    let amplitude = c.homogeneous_amplitude().ok_or_else(|| {
        Error::Regime(format!(
            "homogeneous singular solution needs alpha > n/(n-2) (lambda = {} <= 0)",
            c.lambda
        ))
    })?;
    Ok(Homogeneous {
        params: *params,
        amplitude,
        degree: params.scaling_degree(),
        direction: e.to_vec(),
        label: "homogeneous_singular",
    })
}

/// `((n-2)/2)^((n-2)/2) |x|^(-(n-2)/2) e` at the critical exponent.
pub fn critical_homogeneous(n: usize, m: usize, e: &[f64]) -> Result<Homogeneous> {
    let params = ProblemParams::critical(n, m)?;
    check_direction(e, m)?;
    let half = 0.5 * (n as f64 - 2.0);
    Ok(Homogeneous {
        params,
        amplitude: half.powf(half),
        degree: half,
        direction: e.to_vec(),
        label: "critical_homogeneous",
    })
}

impl Field for Homogeneous {
    fn params(&self) -> ProblemParams {
        self.params
    }

    fn domain(&self) -> Domain {
        Domain::punctured_space(self.params.n)
    }

    fn is_radial(&self) -> bool {
        true
    }

    fn name(&self) -> String {
        self.label.into()
    }

    fn eval_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let r = norm(x);
        let s = self.amplitude * r.powf(-self.degree);
        self.direction.iter().map(|e| s * e).collect()
    }

    fn gradient_unchecked(&self, x: &[f64]) -> Option<Vec<Vec<f64>>> {
        let r = norm(x);
        let k = -self.degree * self.amplitude * r.powf(-self.degree - 2.0);
        Some(self.direction.iter().map(|e| x.iter().map(|xj| k * e * xj).collect()).collect())
    }

    fn laplacian_unchecked(&self, x: &[f64]) -> Option<Vec<f64>> {
        let r = norm(x);
        let nf = self.params.n as f64;
        let d = self.degree;
        let lap = self.amplitude * d * (d - nf + 2.0) * r.powf(-d - 2.0);
        Some(self.direction.iter().map(|e| lap * e).collect())
    }

    fn has_analytic_gradient(&self) -> bool {
        true
    }

    fn has_analytic_laplacian(&self) -> bool {
        true
    }
}

/// The radial field `u(x) = |x|^(-2/(α-1)) v(-log|x|)` of a cylindrical trajectory.
#[derive(Debug, Clone)]
pub struct RadialField {
    trajectory: Arc<RadialTrajectory>,
    t_min: f64,
    t_max: f64,
}

pub fn radial_field(trajectory: Arc<RadialTrajectory>) -> Result<RadialField> {
    if !matches!(trajectory.system, System::Cylindrical { .. }) {
        return Err(Error::Capability("radial fields come from cylindrical trajectories only".into()));
    }
    let (t_min, t_max) = {
        let (a, b) = (trajectory.t_start(), trajectory.t_end());
        (a.min(b), a.max(b))
    };
    Ok(RadialField { trajectory, t_min, t_max })
}

impl RadialField {
    pub fn trajectory(&self) -> &RadialTrajectory {
        &self.trajectory
    }

    /// Radii `e^(-t_max) < |x| < e^(-t_min)` covered by the trajectory.
    pub fn radius_range(&self) -> (f64, f64) {
        ((-self.t_max).exp(), (-self.t_min).exp())
    }

    fn state(&self, x: &[f64]) -> RadialState {
        let t = (-norm(x).ln()).clamp(self.t_min, self.t_max);
        self.trajectory.state_at(t).expect("time clamped into span")
    }
}

impl Field for RadialField {
    fn params(&self) -> ProblemParams {
        self.trajectory.params
    }

    fn domain(&self) -> Domain {
        let (lo, hi) = self.radius_range();
        Domain::annulus(self.params().n, lo, hi)
    }

    fn contains(&self, x: &[f64]) -> bool {
        let r = norm(x);
        let (lo, hi) = self.radius_range();
        r >= lo && r <= hi && r > 0.0
    }

    fn is_radial(&self) -> bool {
        true
    }

    fn name(&self) -> String {
        "radial_trajectory_field".into()
    }

    fn eval_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let w = norm(x).powf(-self.params().scaling_degree());
        self.state(x).v.into_iter().map(|v| w * v).collect()
    }

    fn gradient_unchecked(&self, x: &[f64]) -> Option<Vec<Vec<f64>>> {
        let r = norm(x);
        let a = self.params().scaling_degree();
        let s = self.state(x);
        let w = r.powf(-a - 1.0);
        Some(
            s.v.iter()
                .zip(&s.dv)
                .map(|(v, dv)| {
                    let dr = -w * (a * v + dv);
                    x.iter().map(|xj| dr * xj / r).collect()
                })
                .collect(),
        )
    }

    fn has_analytic_gradient(&self) -> bool {
        true
    }
}

/// `Q(ρ) = (n-2)²/4 ρ² - (n-2)/n ρ^(2n/(n-2)) + κ + κ*/ρ²`.
pub fn fowler_q(n: usize, kappa: f64, kappa_star: f64, rho: f64) -> f64 {
    let nf = n as f64;
    let nm2 = nf - 2.0;
    0.25 * nm2 * nm2 * rho * rho - nm2 / nf * rho.powf(2.0 * nf / nm2) + kappa + kappa_star / (rho * rho)
}

/// `ρ² Q(ρ)`, smooth down to `ρ = 0`.
pub fn fowler_q_scaled(n: usize, kappa: f64, kappa_star: f64, rho: f64) -> f64 {
    let nf = n as f64;
    let nm2 = nf - 2.0;
    let r2 = rho * rho;
    0.25 * nm2 * nm2 * r2 * r2 - nm2 / nf * rho.powf(2.0 * nf / nm2 + 2.0) + kappa * r2 + kappa_star
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FowlerData {
    pub n: usize,
    pub kappa: f64,
    pub kappa_star: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub period: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FowlerOutcome {
    Oscillatory(FowlerData),
    /// No band of positive `Q`; `double_root` is set when `Q` only touches zero.
    NoOscillation { double_root: Option<f64> },
}

impl FowlerOutcome {
    pub fn oscillatory(self) -> Option<FowlerData> {
        match self {
            FowlerOutcome::Oscillatory(d) => Some(d),
            FowlerOutcome::NoOscillation { .. } => None,
        }
    }
}

pub const ROOT_SCAN_POINTS: usize = 10_000;
pub const ROOT_SCAN_FLOOR: f64 = 1e-6;
pub const ROOT_TOL: f64 = 1e-13;
pub const MAX_BISECTIONS: usize = 200;
pub const DOUBLE_ROOT_GAP: f64 = 1e-8;
pub const PERIOD_NODES: usize = 64;
/// Slack on the admissibility bounds of `(κ, κ*)`.
pub const ADMISSIBLE_SLACK: f64 = 1e-12;

/// Checks `(κ, κ*)` against the lower bounds of both invariants and `κ* <= 0`.
pub fn check_admissible(n: usize, kappa: f64, kappa_star: f64, slack: f64) -> Result<()> {
    let floor = kappa_floor(n);
    if !(kappa.is_finite() && kappa_star.is_finite()) {
        return Err(Error::Range("invariants must be finite".into()));
    }
    if kappa < floor - slack {
        return Err(Error::Range(format!("kappa = {kappa} below its lower bound {floor}")));
    }
    if kappa_star > slack {
        return Err(Error::Range(format!("kappa_star = {kappa_star} must be nonpositive")));
    }
    let star_floor = kappa_star_floor(n, kappa);
    if kappa_star < star_floor - slack {
        return Err(Error::Range(format!(
            "kappa_star = {kappa_star} below its lower bound {star_floor} for kappa = {kappa}"
        )));
    }
    Ok(())
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut f_lo = f(lo);
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= ROOT_TOL {
            return Ok(mid);
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Numeric(format!("root bisection did not converge in {MAX_BISECTIONS} steps")))
}

/// Radius beyond which `ρ² Q(ρ) < 0`.
fn root_cap(n: usize, kappa: f64, kappa_star: f64) -> f64 {
    let nf = n as f64;
    let mut cap = 2.0 * (0.25 * nf * (nf - 2.0)).powf(0.25 * (nf - 2.0));
    for _ in 0..64 {
        if fowler_q_scaled(n, kappa, kappa_star, cap) < 0.0 {
            break;
        }
        cap *= 2.0;
    }
    cap
}

/// Brackets and bisects the positive roots of `ρ² Q(ρ)`, then computes the
/// period `2 ∫ dρ / sqrt(Q)` of the orbit oscillating between the first band.
pub fn fowler_roots(n: usize, kappa: f64, kappa_star: f64) -> Result<FowlerOutcome> {
    check_admissible(n, kappa, kappa_star, ADMISSIBLE_SLACK)?;
    let p = |rho: f64| fowler_q_scaled(n, kappa, kappa_star, rho);
    let cap = root_cap(n, kappa, kappa_star);
    let ratio = (cap / ROOT_SCAN_FLOOR).powf(1.0 / (ROOT_SCAN_POINTS - 1) as f64);
    let grid: Vec<f64> = (0..ROOT_SCAN_POINTS).map(|i| ROOT_SCAN_FLOOR * ratio.powi(i as i32)).collect();
    let values: Vec<f64> = grid.iter().map(|&r| p(r)).collect();

    let mut rising = None;
    let mut band = None;
    for i in 0..grid.len() - 1 {
        let (a, b) = (values[i], values[i + 1]);
        if a < 0.0 && b >= 0.0 && rising.is_none() {
            rising = Some(bisect(p, grid[i], grid[i + 1])?);
        } else if a > 0.0 && b <= 0.0 {
            if let Some(lo) = rising {
                band = Some((lo, bisect(p, grid[i], grid[i + 1])?));
                break;
            }
        }
    }

    match band {
        Some((lo, hi)) if hi - lo > DOUBLE_ROOT_GAP => {
            let period = fowler_period(n, kappa, kappa_star, lo, hi, PERIOD_NODES);
            if !period.is_finite() {
                return Err(Error::Numeric("Fowler period quadrature is not finite".into()));
            }
            Ok(FowlerOutcome::Oscillatory(FowlerData {
                n,
                kappa,
                kappa_star,
                rho_min: lo,
                rho_max: hi,
                period,
            }))
        }
        Some((lo, hi)) => Ok(FowlerOutcome::NoOscillation { double_root: Some(0.5 * (lo + hi)) }),
        None => Ok(FowlerOutcome::NoOscillation { double_root: touching_root(&grid, &values, &p) }),
    }
}

/// A nonpositive local maximum of `ρ² Q` within rounding of zero.
fn touching_root(grid: &[f64], values: &[f64], p: &impl Fn(f64) -> f64) -> Option<f64> {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    for i in 1..grid.len() - 1 {
        if values[i] >= values[i - 1] && values[i] >= values[i + 1] && values[i] <= 0.0 {
            // Golden-section refinement of the maximum.
            let (mut a, mut b) = (grid[i - 1], grid[i + 1]);
            let g = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..200 {
                if b - a < ROOT_TOL {
                    break;
                }
                let c = b - g * (b - a);
                let d = a + g * (b - a);
                if p(c) > p(d) {
                    b = d;
                } else {
                    a = c;
                }
            }
            let x = 0.5 * (a + b);
            if p(x).abs() <= 1e-12 * scale {
                return Some(x);
            }
        }
    }
    None
}

/// `2 ∫_a^b dρ / sqrt(Q(ρ))` by Gauss–Chebyshev after factoring out `(ρ-a)(b-ρ)`.
pub fn fowler_period(n: usize, kappa: f64, kappa_star: f64, rho_min: f64, rho_max: f64, nodes: usize) -> f64 {
    let mid = 0.5 * (rho_min + rho_max);
    let half = 0.5 * (rho_max - rho_min);
    let rule = gauss_chebyshev(nodes);
    2.0 * rule.integrate(|x| {
        let rho = mid + half * x;
        let reduced = fowler_q(n, kappa, kappa_star, rho) / ((rho - rho_min) * (rho_max - rho));
        1.0 / reduced.sqrt()
    })
}

/// Integrates `ρ'' = (n-2)²/4 ρ - ρ^((n+2)/(n-2)) - κ*/ρ³` from the inner turning point.
pub fn fowler_orbit(data: &FowlerData, t0: f64, span: f64, h: f64) -> Result<RadialTrajectory> {
    if h > data.period / 100.0 {
        return Err(Error::Configuration(format!(
            "step {h} exceeds period/100 = {}",
            data.period / 100.0
        )));
    }
    let params = ProblemParams::critical(data.n, 1)?;
    let start = RadialState { t: t0, v: vec![data.rho_min], dv: vec![0.0] };
    integrate_system(params, System::Fowler { n: data.n, kappa_star: data.kappa_star }, &start, t0 + span, h, None)
}

/// Turning point of a scalar orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurningPoint {
    pub t: f64,
    pub rho: f64,
    pub is_minimum: bool,
}

/// Zeros of `ρ'` located by bisection on the Hermite interpolant.
pub fn turning_points(orbit: &RadialTrajectory) -> Vec<TurningPoint> {
    let mut out = Vec::new();
    let first = orbit.first();
    if first.dv[0] == 0.0 {
        let acc = orbit.acceleration(first)[0];
        out.push(TurningPoint { t: first.t, rho: first.v[0], is_minimum: acc > 0.0 });
    }
    for w in orbit.states.windows(2) {
        let (a, b) = (w[0].dv[0], w[1].dv[0]);
        if a * b < 0.0 {
            let (mut lo, mut hi) = (w[0].t, w[1].t);
            let dv = |t: f64| orbit.state_at(t).map(|s| s.dv[0]).unwrap_or(0.0);
            let f_lo_neg = a < 0.0;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if (dv(mid) < 0.0) == f_lo_neg {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let t = 0.5 * (lo + hi);
            let rho = orbit.state_at(t).map(|s| s.v[0]).unwrap_or(f64::NAN);
            out.push(TurningPoint { t, rho, is_minimum: a < 0.0 });
        }
    }
    out
}

/// Two-component solution `ρ(t) (cos Θ(t), sin Θ(t))`, `Θ' = sqrt(-κ*)/ρ²`.
#[derive(Debug, Clone)]
pub struct Spiral {
    pub data: FowlerData,
    /// Cylindrical trajectory of `(v, v')` with `m = 2`.
    pub trajectory: Arc<RadialTrajectory>,
    /// Scalar orbit `ρ(t)` on the same grid.
    pub rho: RadialTrajectory,
    /// Accumulated angle `Θ(t)` on the same grid.
    pub angle: Vec<f64>,
}

pub fn spiral(n: usize, kappa: f64, kappa_star: f64, t0: f64, span: f64, h: f64) -> Result<Spiral> {
    if !(kappa_star < 0.0) {
        return Err(Error::Range(format!("spiral needs kappa_star < 0, got {kappa_star}")));
    }
    let data = fowler_roots(n, kappa, kappa_star)?.oscillatory().ok_or_else(|| {
        Error::Range(format!("no oscillating Fowler orbit for kappa = {kappa}, kappa_star = {kappa_star}"))
    })?;
    if h > data.period / 100.0 {
        return Err(Error::Configuration(format!("step {h} exceeds period/100 = {}", data.period / 100.0)));
    }
    if !(span > 0.0) {
        return Err(Error::Configuration(format!("spiral span must be positive, got {span}")));
    }
    let steps = (span / h).round() as usize;
    let omega = (-kappa_star).sqrt();
    let fowler = System::Fowler { n, kappa_star };
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let mut acc = [0.0];
        fowler.acceleration(t, &y[..1], &y[1..2], &mut acc);
        dy[0] = y[1];
        dy[1] = acc[0];
        dy[2] = omega / (y[0] * y[0]);
    };
    let mut y = [data.rho_min, 0.0, 0.0];
    let mut work = Rk4Work::new(3);
    let mut rho_states = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut angle = Vec::with_capacity(steps + 1);
    let mut push = |t: f64, y: &[f64; 3]| {
        let (c, s) = (y[2].cos(), y[2].sin());
        let w = omega / y[0];
        states.push(RadialState {
            t,
            v: vec![y[0] * c, y[0] * s],
            dv: vec![y[1] * c - w * s, y[1] * s + w * c],
        });
        rho_states.push(RadialState { t, v: vec![y[0]], dv: vec![y[1]] });
        angle.push(y[2]);
    };
    push(t0, &y);
    for k in 0..steps {
        rk4_step(&rhs, t0 + k as f64 * h, &mut y, h, &mut work);
        if y.iter().any(|c| !c.is_finite()) || y[0] <= 0.0 {
            return Err(Error::Numeric(format!("spiral orbit lost positivity at step {k}")));
        }
        push(t0 + (k + 1) as f64 * h, &y);
    }
    let params = ProblemParams::critical(n, 2)?;
    let negative = states.iter().find_map(|s| {
        s.v.iter().enumerate().find(|(_, c)| **c < -crate::dynamics::NEGATIVE_TOL).map(|(i, c)| {
            crate::dynamics::NegativeExcursion { t: s.t, component: i, value: *c }
        })
    });
    let trajectory = RadialTrajectory { params, system: System::cylindrical(&params), h, states, negative_component: negative };
    let rho = RadialTrajectory {
        params: ProblemParams::critical(n, 1)?,
        system: fowler,
        h,
        states: rho_states,
        negative_component: None,
    };
    Ok(Spiral { data, trajectory: Arc::new(trajectory), rho, angle })
}

impl Spiral {
    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        Ok(self.trajectory.state_at(t)?.v)
    }

    pub fn field(&self) -> Result<FieldRef> {
        Ok(Arc::new(radial_field(self.trajectory.clone())?))
    }
}

/// Ensures a field sits at the critical exponent.
pub fn require_critical(p: &ProblemParams) -> Result<()> {
    if p.regime() != Regime::Critical {
        return Err(Error::Regime(format!(
            "expected the critical exponent {}, got alpha = {}",
            sobolev_exponent(p.n),
            p.alpha
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bubble_values() {
        let b = bubble(4, 1, &[0.0; 4], 1.0, &[1.0]).unwrap();
        assert!((b.value(&[0.0; 4]).unwrap()[0] - 8f64.sqrt()).abs() < 1e-14);
        let b3 = bubble(3, 1, &[0.0; 3], 1.0, &[1.0]).unwrap();
        assert!((b3.value(&[0.0; 3]).unwrap()[0] - 3f64.powf(0.25)).abs() < 1e-14);
        let zero = bubble(4, 2, &[0.0; 4], 0.0, &[0.6, 0.8]).unwrap();
        assert_eq!(zero.value(&[0.0; 4]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(zero.value(&[1.0, 0.0, 0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn direction_validation() {
        assert!(matches!(bubble(4, 2, &[0.0; 4], 1.0, &[1.0, 1.0]), Err(Error::Validation(_))));
        assert!(matches!(bubble(4, 2, &[0.0; 4], 1.0, &[-0.6, 0.8]), Err(Error::Validation(_))));
        assert!(matches!(critical_homogeneous(3, 1, &[0.5]), Err(Error::Validation(_))));
    }

    #[test]
    fn homogeneous_amplitudes() {
        let p = ProblemParams::new(5, 1, 2.0).unwrap();
        let u = homogeneous_singular(&p, &[1.0]).unwrap();
        assert!((u.amplitude() - 2.0).abs() < 1e-14);
        assert!((u.degree() - 2.0).abs() < 1e-15);
        let p4 = ProblemParams::critical(4, 1).unwrap();
        let u4 = homogeneous_singular(&p4, &[1.0]).unwrap();
        let c4 = critical_homogeneous(4, 1, &[1.0]).unwrap();
        assert!((u4.amplitude() - 1.0).abs() < 1e-15);
        assert_eq!(u4.degree(), c4.degree());
        assert!((critical_homogeneous(3, 1, &[1.0]).unwrap().amplitude() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((critical_homogeneous(6, 1, &[1.0]).unwrap().amplitude() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn homogeneous_needs_positive_lambda() {
        let p = ProblemParams::serrin(4, 1).unwrap();
        assert!(matches!(homogeneous_singular(&p, &[1.0]), Err(Error::Regime(_))));
        let p = ProblemParams::new(5, 1, 1.5).unwrap();
        assert!(matches!(homogeneous_singular(&p, &[1.0]), Err(Error::Regime(_))));
    }

    #[test]
    fn homogeneous_singular_at_origin() {
        let u = critical_homogeneous(4, 1, &[1.0]).unwrap();
        assert!(matches!(u.value(&[0.0; 4]), Err(Error::SingularPoint(_))));
    }

    #[test]
    fn fowler_boundary_pair_is_a_double_root() {
        match fowler_roots(4, -0.5, 0.0).unwrap() {
            FowlerOutcome::NoOscillation { double_root: Some(r) } => assert!((r - 1.0).abs() < 1e-6, "{r}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn fowler_regular_separatrix() {
        assert!(matches!(fowler_roots(4, 0.0, 0.0).unwrap(), FowlerOutcome::NoOscillation { .. }));
    }

    #[test]
    fn fowler_rejects_inadmissible() {
        assert!(matches!(fowler_roots(4, -0.6, 0.0), Err(Error::Range(_))));
        assert!(matches!(fowler_roots(4, 0.0, 0.1), Err(Error::Range(_))));
        assert!(matches!(fowler_roots(4, -0.4, -0.2), Err(Error::Range(_))));
    }

    #[test]
    fn spiral_needs_negative_kappa_star() {
        assert!(matches!(spiral(4, -0.3, 0.0, 0.0, 1.0, 1e-3), Err(Error::Range(_))));
    }

    #[test]
    fn fowler_orbit_step_guard() {
        let d = fowler_roots(4, 0.0, -0.01).unwrap().oscillatory().unwrap();
        assert!(matches!(fowler_orbit(&d, 0.0, 10.0, d.period / 50.0), Err(Error::Configuration(_))));
    }
}
