//! Energy functionals and conserved quantities.
//!
//! Trajectory functionals (`Ψ`, `Ψ*`, `k_ij`, `E`) act on radial states;
//! surface functionals (`Φ`, `Φ*`) integrate a field over spheres `∂B_r`
//! with a [`SphereQuadrature`].

use serde::{Deserialize, Serialize};

use crate::dynamics::{RadialState, RadialTrajectory, System};
use crate::error::{Error, Result};
use crate::families::check_admissible;
use crate::field::{dot, norm, norm_pow, Field};
use crate::params::{DerivedConstants, ProblemParams, Regime};
use crate::quadrature::SphereQuadrature;

/// Smallest radius of the `Φ*` tail integrals.
pub const TAIL_FLOOR: f64 = 1e-4;
/// Refined floor used to check convergence of the tails.
pub const TAIL_FLOOR_REFINED: f64 = 1e-5;
/// Largest admissible change of `Φ*` between the two floors.
pub const TAIL_TOL: f64 = 1e-8;

fn require_critical(p: &ProblemParams, what: &str) -> Result<()> {
    if p.regime() != Regime::Critical {
        return Err(Error::Regime(format!("{what} is defined at the critical exponent only (alpha = {})", p.alpha)));
    }
    Ok(())
}

fn state(traj: &RadialTrajectory, t: f64) -> Result<RadialState> {
    if !traj.contains_time(t) {
        return Err(Error::Range(format!(
            "t = {t} outside the trajectory span [{}, {}]",
            traj.t_start().min(traj.t_end()),
            traj.t_start().max(traj.t_end())
        )));
    }
    traj.state_at(t)
}

/// `Ψ = |v'|² - λ|v|² + 2/(α+1) |v|^(α+1)` on a radial state.
pub fn psi_state(c: &DerivedConstants, s: &RadialState) -> f64 {
    let a = c.params.alpha;
    let r = norm(&s.v);
    dot(&s.dv, &s.dv) - c.lambda * r * r + 2.0 / (a + 1.0) * norm_pow(r, a + 1.0)
}

pub fn psi(traj: &RadialTrajectory, t: f64) -> Result<f64> {
    Ok(psi_state(&traj.params.constants(), &state(traj, t)?))
}

/// `Ψ* = g'²/4 - (n-2)²/4 g² - κ g + (n-2)/n g^((2n-2)/(n-2))` with `g = |v|²`.
pub fn psi_star_state(n: usize, kappa: f64, s: &RadialState) -> f64 {
    let nf = n as f64;
    let nm2 = nf - 2.0;
    let g = dot(&s.v, &s.v);
    let dg = 2.0 * dot(&s.v, &s.dv);
    0.25 * dg * dg - 0.25 * nm2 * nm2 * g * g - kappa * g + nm2 / nf * norm_pow(g, (2.0 * nf - 2.0) / nm2)
}

pub fn psi_star(traj: &RadialTrajectory, t: f64, kappa: f64) -> Result<f64> {
    require_critical(&traj.params, "psi_star")?;
    Ok(psi_star_state(traj.params.n, kappa, &state(traj, t)?))
}

/// Antisymmetric `m × m` matrix stored by its strict upper triangle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AntiSymmetric {
    m: usize,
    upper: Vec<f64>,
}

impl AntiSymmetric {
    pub fn zeros(m: usize) -> Self {
        Self { m, upper: vec![0.0; m * m.saturating_sub(1) / 2] }
    }

    fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.m);
        i * (2 * self.m - i - 1) / 2 + (j - i - 1)
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Less => self.upper[self.index(i, j)],
            Greater => -self.upper[self.index(j, i)],
            Equal => 0.0,
        }
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        assert!(i != j, "diagonal of an antisymmetric matrix is zero");
        if i < j {
            let k = self.index(i, j);
            self.upper[k] = value;
        } else {
            let k = self.index(j, i);
            self.upper[k] = -value;
        }
    }

    /// Entries `k_ij` with `i < j`, row-major.
    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.m).map(|i| (0..self.m).map(|j| self.get(i, j)).collect()).collect()
    }

    /// `Σ_(i<j) k_ij²`.
    pub fn sum_squares(&self) -> f64 {
        self.upper.iter().map(|k| k * k).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.upper.iter().zip(&other.upper).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// `k_ij = v_i v_j' - v_j v_i'`.
pub fn angular_momentum(s: &RadialState) -> AntiSymmetric {
    let m = s.v.len();
    let mut k = AntiSymmetric::zeros(m);
    for i in 0..m {
        for j in i + 1..m {
            k.set(i, j, s.v[i] * s.dv[j] - s.v[j] * s.dv[i]);
        }
    }
    k
}

pub fn angular_momenta(traj: &RadialTrajectory) -> Vec<AntiSymmetric> {
    traj.states.iter().map(angular_momentum).collect()
}

/// Label `k_ij` (1-based) for each stored entry.
pub fn pair_labels(m: usize) -> Vec<String> {
    let mut out = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            out.push(format!("k_{}_{}", i + 1, j + 1));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub kappa: f64,
    pub kappa_star: f64,
    pub k: AntiSymmetric,
    pub kappa_drift: f64,
    pub kstar_drift: f64,
    pub k_drift: f64,
}

impl InvariantReport {
    /// `κ* + Σ_(i<j) k_ij²`, zero for exact radial solutions.
    pub fn identity_residual(&self) -> f64 {
        self.kappa_star + self.k.sum_squares()
    }

    /// Checks the lower bounds on `κ`, `κ*` and `κ* <= 0` with slack `tol`.
    pub fn check_bounds(&self, n: usize, tol: f64) -> Result<()> {
        check_admissible(n, self.kappa, self.kappa_star, tol).map_err(|e| Error::Inadmissible(e.to_string()))
    }
}

/// Pointwise series of the conserved quantities on the trajectory grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftSeries {
    pub t: Vec<f64>,
    pub psi: Vec<f64>,
    pub psi_star: Vec<f64>,
    pub k: Vec<AntiSymmetric>,
}

impl DriftSeries {
    fn max_drift(values: &[f64]) -> f64 {
        values.iter().fold(0.0, |m, v| m.max((v - values[0]).abs()))
    }

    pub fn psi_drift(&self) -> f64 {
        Self::max_drift(&self.psi)
    }

    pub fn psi_star_drift(&self) -> f64 {
        Self::max_drift(&self.psi_star)
    }

    pub fn k_drift(&self) -> f64 {
        self.k.iter().fold(0.0, |m, k| m.max(k.max_abs_diff(&self.k[0])))
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// `Ψ`, `Ψ*` (with `κ` the trajectory mean of `Ψ`) and `k` at every grid point.
pub fn drift_series(traj: &RadialTrajectory) -> Result<DriftSeries> {
    require_critical(&traj.params, "drift series")?;
    if !matches!(traj.system, System::Cylindrical { .. }) {
        return Err(Error::Capability("drift series needs a cylindrical trajectory".into()));
    }
    let c = traj.params.constants();
    let psi: Vec<f64> = traj.states.iter().map(|s| psi_state(&c, s)).collect();
    let kappa = mean(psi.iter().copied());
    let psi_star = traj.states.iter().map(|s| psi_star_state(traj.params.n, kappa, s)).collect();
    Ok(DriftSeries { t: traj.states.iter().map(|s| s.t).collect(), psi, psi_star, k: angular_momenta(traj) })
}

pub fn kappa_of(traj: &RadialTrajectory) -> Result<InvariantReport> {
    if (traj.t_end() - traj.t_start()).abs() < 1.0 {
        return Err(Error::Configuration("invariants need a trajectory spanning at least one time unit".into()));
    }
    let series = drift_series(traj)?;
    let m = traj.components();
    let mut k = AntiSymmetric::zeros(m);
    for idx in 0..k.upper.len() {
        k.upper[idx] = mean(series.k.iter().map(|s| s.upper[idx]));
    }
    Ok(InvariantReport {
        kappa: mean(series.psi.iter().copied()),
        kappa_star: mean(series.psi_star.iter().copied()),
        k,
        kappa_drift: series.psi_drift(),
        kstar_drift: series.psi_star_drift(),
        k_drift: series.k_drift(),
    })
}

/// Largest violation of `|v'|² - (d|v|/dt)² = Σ k_ij² / |v|²` over samples with `|v| > floor`.
pub fn discrepancy_residual(traj: &RadialTrajectory, floor: f64) -> f64 {
    traj.states
        .iter()
        .filter(|s| norm(&s.v) > floor)
        .map(|s| {
            let r = norm(&s.v);
            let dr = dot(&s.v, &s.dv) / r;
            let lhs = dot(&s.dv, &s.dv) - dr * dr;
            (lhs - angular_momentum(s).sum_squares() / (r * r)).abs()
        })
        .fold(0.0, f64::max)
}

/// Largest violation of `(d|v|/dt)² = Q(|v|)` over the samples.
pub fn radial_closure_residual(traj: &RadialTrajectory, kappa: f64, kappa_star: f64) -> f64 {
    let n = traj.params.n;
    traj.states
        .iter()
        .map(|s| {
            let r = norm(&s.v);
            let dr = dot(&s.v, &s.dv) / r;
            (dr * dr - crate::families::fowler_q(n, kappa, kappa_star, r)).abs()
        })
        .fold(0.0, f64::max)
}

fn require_lower_critical(traj: &RadialTrajectory) -> Result<usize> {
    match traj.system {
        System::LowerCritical { n } => Ok(n),
        _ => Err(Error::Capability("energy E is defined on lower-critical trajectories only".into())),
    }
}

/// `E = t|φ'|² + (n-2)/(n-1) |φ|^((2n-2)/(n-2)) - (n-2)/2 (n-2-n/(2t)) |φ|²`.
pub fn energy_state(n: usize, s: &RadialState) -> f64 {
    let nf = n as f64;
    let nm2 = nf - 2.0;
    let t = s.t;
    let r = norm(&s.v);
    t * dot(&s.dv, &s.dv) + nm2 / (nf - 1.0) * norm_pow(r, (2.0 * nf - 2.0) / nm2)
        - 0.5 * nm2 * (nm2 - nf / (2.0 * t)) * r * r
}

/// Closed-form `dE/dt = -((2n-4)t - 2n + 3)|φ'|² - n(n-2)/(4t²) |φ|²`.
pub fn energy_rate_state(n: usize, s: &RadialState) -> f64 {
    let nf = n as f64;
    let t = s.t;
    -((2.0 * nf - 4.0) * t - 2.0 * nf + 3.0) * dot(&s.dv, &s.dv) - nf * (nf - 2.0) / (4.0 * t * t) * dot(&s.v, &s.v)
}

pub fn energy_e(traj: &RadialTrajectory, t: f64) -> Result<f64> {
    let n = require_lower_critical(traj)?;
    Ok(energy_state(n, &state(traj, t)?))
}

pub fn energy_e_rate(traj: &RadialTrajectory, t: f64) -> Result<f64> {
    let n = require_lower_critical(traj)?;
    Ok(energy_rate_state(n, &state(traj, t)?))
}

pub fn energy_series(traj: &RadialTrajectory) -> Result<Vec<f64>> {
    let n = require_lower_critical(traj)?;
    Ok(traj.states.iter().map(|s| energy_state(n, s)).collect())
}

/// Terminal level `E(∞) = -(1/(n-1)) ((n-2)²/2)^(n-1)` of the singular branch.
pub fn lower_critical_terminal_energy(n: usize) -> f64 {
    let nm2 = n as f64 - 2.0;
    -(0.5 * nm2 * nm2).powi(n as i32 - 1) / (n as f64 - 1.0)
}

/// Spherical means on `∂B_r`, each normalized by `n ω_n r^(n-1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct SphereMeans {
    /// `|∂_ν u - (2/((α-1)r)) u|²` with `ν` pointing to the origin.
    balanced: f64,
    tangential: f64,
    power: f64,
    square: f64,
    /// `u · (∂_ν u - (n-2)/(2r) u)`.
    flux: f64,
    /// `|u|^(2n/(n-2))`.
    critical_power: f64,
}

fn sphere_means(u: &dyn Field, r: f64, q: &SphereQuadrature) -> Result<SphereMeans> {
    let p = u.params();
    if q.dim() != p.n {
        return Err(Error::Validation(format!("quadrature is on S^{}, field lives in R^{}", q.dim() - 1, p.n)));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Range(format!("sphere radius must be positive, got {r}")));
    }
    let nf = p.n as f64;
    let a = p.scaling_degree();
    let crit = 2.0 * nf / (nf - 2.0);
    let mut acc = [0.0f64; 6];
    let mut total = 0.0;
    let mut x = vec![0.0; p.n];
    for (i, (theta, w)) in q.iter().enumerate() {
        for (xj, tj) in x.iter_mut().zip(theta) {
            *xj = r * tj;
        }
        let value = u.value(&x)?;
        let grad = u.gradient(&x)?;
        let mut terms = [0.0f64; 6];
        for (ui, row) in value.iter().zip(&grad) {
            let dr = dot(row, theta);
            let dnu = -dr;
            let full = dot(row, row);
            terms[0] += (dnu - a / r * ui).powi(2);
            terms[1] += full - dr * dr;
            terms[4] += ui * (dnu - 0.5 * (nf - 2.0) / r * ui);
        }
        let mag = norm(&value);
        terms[2] = norm_pow(mag, p.alpha + 1.0);
        terms[3] = mag * mag;
        terms[5] = norm_pow(mag, crit);
        if terms.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite { index: i });
        }
        for k in 0..6 {
            acc[k] += w * terms[k];
        }
        total += w;
    }
    let s = |k: usize| acc[k] / total;
    Ok(SphereMeans {
        balanced: s(0),
        // Roundoff can leave |∇u|² - (∂_r u)² slightly negative.
        tangential: s(1).max(0.0),
        power: s(2),
        square: s(3),
        flux: s(4),
        critical_power: s(5),
    })
}

/// `Φ(r, u)`: the balanced-energy functional on `∂B_r`.
pub fn phi_surface(u: &dyn Field, r: f64, c: &DerivedConstants, q: &SphereQuadrature) -> Result<f64> {
    let a = c.params.alpha;
    let nf = c.params.n as f64;
    let m = sphere_means(u, r, q)?;
    // r^(μ+1) ∫_{∂B_r} = nω_n r^(μ+n) ⟨·⟩.
    let outer = r.powf(c.mu + nf);
    Ok(outer * (m.balanced - m.tangential) + 2.0 / (a + 1.0) * outer * m.power
        - c.lambda * r.powf(c.mu + nf - 2.0) * m.square)
}

/// `f(r)` and `r ḟ(r)` of the `Φ*` functional.
fn f_and_rfdot(m: &SphereMeans, r: f64, n: usize) -> (f64, f64) {
    let w = r.powi(n as i32 - 2);
    (w * m.square, -2.0 * r * w * m.flux)
}

/// Integrand of the two `Φ*` tails in `s = log ρ`.
fn tail_integrand(u: &dyn Field, rho: f64, q: &SphereQuadrature) -> Result<f64> {
    let n = u.params().n;
    let nf = n as f64;
    let m = sphere_means(u, rho, q)?;
    let (f, rfdot) = f_and_rfdot(&m, rho, n);
    let rn = rho.powi(n as i32);
    let tangential = rn * m.tangential;
    let power = rn * m.critical_power - norm_pow(f, nf / (nf - 2.0));
    Ok((-2.0 * tangential + (2.0 * nf - 2.0) / nf * power) * rfdot)
}

fn simpson(f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64, tol: f64) -> Result<f64> {
    fn step(
        f: &dyn Fn(f64) -> Result<f64>,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> Result<f64> {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm)?, f(rm)?);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol.max(1e-11 * (left + right).abs()) {
            return Ok(left + right + delta / 15.0);
        }
        Ok(step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
            + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
    }
    let (fa, fb, fm) = (f(a)?, f(b)?, f(0.5 * (a + b))?);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 20)
}

/// Adaptive Simpson over `log ρ ∈ [log floor, log r]`, one panel per decade.
fn tail_integral(u: &dyn Field, r: f64, floor: f64, q: &SphereQuadrature) -> Result<f64> {
    if r <= floor {
        return Ok(0.0);
    }
    let g = |s: f64| tail_integrand(u, s.exp(), q);
    let (lo, hi) = (floor.ln(), r.ln());
    let panels = ((hi - lo) / std::f64::consts::LN_10).ceil().max(1.0) as usize;
    let width = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let a = lo + k as f64 * width;
        total += simpson(&g, a, a + width, 1e-13)?;
    }
    Ok(total)
}

/// `Φ*(r, u)` together with its tail diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiStar {
    pub value: f64,
    /// Sum of the two `∫_0^r` tails (zero on the radial path).
    pub tail: f64,
    /// Change of the value when the tail floor is refined.
    pub floor_discrepancy: f64,
    pub converged: bool,
}

/// Evaluates `Φ*`; radial fields use the closed form, fields regular at the
/// origin add the two tail integrals truncated at [`TAIL_FLOOR_REFINED`].
pub fn phi_star_report(u: &dyn Field, r: f64, kappa: f64, c: &DerivedConstants, q: &SphereQuadrature) -> Result<PhiStar> {
    require_critical(&c.params, "phi_star")?;
    let n = c.params.n;
    let nf = n as f64;
    let m = sphere_means(u, r, q)?;
    let (f, rfdot) = f_and_rfdot(&m, r, n);
    let local = 0.25 * rfdot * rfdot - 0.25 * (nf - 2.0).powi(2) * f * f - kappa * f
        + (nf - 2.0) / nf * norm_pow(f, (2.0 * nf - 2.0) / (nf - 2.0));
    if u.is_radial() {
        return Ok(PhiStar { value: local, tail: 0.0, floor_discrepancy: 0.0, converged: true });
    }
    if !u.regular_at_origin() {
        return Err(Error::Capability(format!(
            "phi_star needs a field that is radial or regular at the origin, got {}",
            u.name()
        )));
    }
    let coarse = tail_integral(u, r, TAIL_FLOOR, q)?;
    let fine = coarse + tail_integral(u, TAIL_FLOOR, TAIL_FLOOR_REFINED, q)?;
    let discrepancy = (fine - coarse).abs();
    Ok(PhiStar { value: local + fine, tail: fine, floor_discrepancy: discrepancy, converged: discrepancy <= TAIL_TOL })
}

pub fn phi_star_surface(u: &dyn Field, r: f64, kappa: f64, c: &DerivedConstants, q: &SphereQuadrature) -> Result<f64> {
    let report = phi_star_report(u, r, kappa, c, q)?;
    if !report.converged {
        return Err(Error::Numeric(format!(
            "phi_star tails unconverged: floor refinement changed the value by {}",
            report.floor_discrepancy
        )));
    }
    Ok(report.value)
}
