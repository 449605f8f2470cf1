//! Cylindrical (Emden–Fowler) coordinates, the lower-critical log-corrected
//! variant, Kelvin inversion and the invariance scaling `u_r`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{distance, norm, norm_pow, richardson_laplacian, Domain, Field, FieldRef};
use crate::params::{serrin_exponent, DerivedConstants, ProblemParams};

/// Default finite-difference step for residual checks.
pub const DEFAULT_FD_STEP: f64 = 1e-2;

/// A point `(t, θ)` of the cylinder `R × S^(n-1)`, with `x = e^(-t) θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderPoint {
    pub t: f64,
    pub theta: Vec<f64>,
}

impl CylinderPoint {
    pub fn new(t: f64, theta: Vec<f64>) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::Validation(format!("cylinder time t = {t} is not finite")));
        }
        let len = norm(&theta);
        if (len - 1.0).abs() > 1e-14 {
            return Err(Error::Validation(format!("theta has norm {len}, expected 1")));
        }
        Ok(Self { t, theta })
    }

    /// Cylinder coordinates of a nonzero point.
    pub fn from_point(x: &[f64]) -> Result<Self> {
        let r = norm(x);
        if r == 0.0 {
            return Err(Error::SingularPoint("the origin has no cylinder coordinates".into()));
        }
        // Renormalize to keep |θ| = 1 to the last bit.
        let mut theta: Vec<f64> = x.iter().map(|c| c / r).collect();
        let s = norm(&theta);
        theta.iter_mut().for_each(|c| *c /= s);
        Ok(Self { t: -r.ln(), theta })
    }

    pub fn to_point(&self) -> Vec<f64> {
        let r = (-self.t).exp();
        self.theta.iter().map(|c| r * c).collect()
    }
}

/// `v(t, θ) = |x|^(2/(α-1)) u(x)` at `x = e^(-t) θ`.
pub fn to_cylindrical(u: &dyn Field, p: &CylinderPoint, c: &DerivedConstants) -> Result<Vec<f64>> {
    let x = p.to_point();
    let value = u.value(&x)?;
    let weight = (c.params.scaling_degree() * -p.t).exp();
    Ok(value.into_iter().map(|v| weight * v).collect())
}

/// `u(x) = |x|^(-2/(α-1)) v(-log|x|, x/|x|)`.
pub fn from_cylindrical(
    v: impl Fn(&CylinderPoint) -> Vec<f64>,
    x: &[f64],
    c: &DerivedConstants,
) -> Result<Vec<f64>> {
    let p = CylinderPoint::from_point(x)?;
    let weight = (c.params.scaling_degree() * p.t).exp();
    Ok(v(&p).into_iter().map(|c| weight * c).collect())
}

/// `φ(t, θ) = |x|^(n-2) (-log|x|)^((n-2)/2) u(x)` for the Serrin exponent.
pub fn lower_critical_to_phi(u: &dyn Field, p: &CylinderPoint) -> Result<Vec<f64>> {
    check_serrin(u.params())?;
    if p.t <= 0.0 {
        return Err(Error::Domain(format!(
            "lower-critical transform needs t = -log|x| > 0, got t = {}",
            p.t
        )));
    }
    let nm2 = u.params().n as f64 - 2.0;
    let x = p.to_point();
    let value = u.value(&x)?;
    let weight = (-nm2 * p.t).exp() * p.t.powf(0.5 * nm2);
    Ok(value.into_iter().map(|v| weight * v).collect())
}

/// Inverse of [`lower_critical_to_phi`]: `u(x) = |x|^(2-n) (-log|x|)^((2-n)/2) φ`.
pub fn lower_critical_from_phi(
    phi: impl Fn(&CylinderPoint) -> Vec<f64>,
    x: &[f64],
) -> Result<Vec<f64>> {
    let p = CylinderPoint::from_point(x)?;
    if p.t <= 0.0 {
        return Err(Error::Domain(format!("|x| = {} must be below 1", (-p.t).exp())));
    }
    let nm2 = x.len() as f64 - 2.0;
    let weight = (nm2 * p.t).exp() * p.t.powf(-0.5 * nm2);
    Ok(phi(&p).into_iter().map(|c| weight * c).collect())
}

fn check_serrin(params: ProblemParams) -> Result<()> {
    let s = serrin_exponent(params.n);
    if (params.alpha - s).abs() > crate::params::REGIME_TOL {
        return Err(Error::Regime(format!(
            "lower-critical transform needs alpha = n/(n-2) = {s}, got {}",
            params.alpha
        )));
    }
    Ok(())
}

/// Kelvin transform `u*(y) = (r/|y-z|)^(n-2) u(z + r²(y-z)/|y-z|²)`.
pub struct Kelvin {
    inner: FieldRef,
    center: Vec<f64>,
    radius: f64,
}

pub fn kelvin(u: FieldRef, z: &[f64], r: f64) -> Result<Kelvin> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Range(format!("Kelvin radius must be positive, got {r}")));
    }
    if z.len() != u.params().n {
        return Err(Error::Validation("Kelvin center has the wrong dimension".into()));
    }
    Ok(Kelvin { inner: u, center: z.to_vec(), radius: r })
}

impl Kelvin {
    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    fn reflect(&self, y: &[f64]) -> Option<Vec<f64>> {
        let d2: f64 = y.iter().zip(&self.center).map(|(a, b)| (a - b) * (a - b)).sum();
        if d2 == 0.0 {
            return None;
        }
        let s = self.radius * self.radius / d2;
        Some(y.iter().zip(&self.center).map(|(a, b)| b + s * (a - b)).collect())
    }

    /// Weight `(r/|y-z|)^((α-1)μ)` in the equation satisfied by `u*`.
    pub fn equation_weight(&self, y: &[f64]) -> f64 {
        let c = self.inner.params().constants();
        (self.radius / distance(y, &self.center)).powf((c.alpha() - 1.0) * c.mu)
    }
}

impl Field for Kelvin {
    fn params(&self) -> ProblemParams {
        self.inner.params()
    }

    fn domain(&self) -> Domain {
        Domain::Transformed(format!("Kelvin image of {} about {:?}", self.inner.name(), self.center))
    }

    fn contains(&self, y: &[f64]) -> bool {
        match self.reflect(y) {
            Some(x) => self.inner.contains(&x),
            None => false,
        }
    }

    fn check(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.params().n {
            return Err(Error::Validation("point has the wrong dimension".into()));
        }
        if distance(y, &self.center) == 0.0 {
            return Err(Error::SingularPoint("Kelvin transform evaluated at its center".into()));
        }
        if !self.contains(y) {
            return Err(Error::Domain(format!("{y:?} maps outside the domain of {}", self.inner.name())));
        }
        Ok(())
    }

    fn is_radial(&self) -> bool {
        self.center.iter().all(|c| *c == 0.0) && self.inner.is_radial()
    }

    fn regular_at_origin(&self) -> bool {
        self.center.iter().any(|c| *c != 0.0)
            && matches!(self.inner.domain(), Domain::WholeSpace)
            && self.inner.regular_at_origin()
    }

    fn name(&self) -> String {
        format!("kelvin({}, r={})", self.inner.name(), self.radius)
    }

    fn eval_unchecked(&self, y: &[f64]) -> Vec<f64> {
        let n = self.params().n as f64;
        let x = match self.reflect(y) {
            Some(x) => x,
            None => return vec![f64::INFINITY; self.params().m],
        };
        let w = (self.radius / distance(y, &self.center)).powf(n - 2.0);
        self.inner.eval_unchecked(&x).into_iter().map(|v| w * v).collect()
    }

    fn length_scale(&self, y: &[f64]) -> f64 {
        let d = distance(y, &self.center);
        match self.reflect(y) {
            Some(x) => (d * d / (self.radius * self.radius) * self.inner.length_scale(&x)).min(d).min(1.0),
            None => 1.0,
        }
    }
}

/// The scaling `u_r(x) = r^(2/(α-1)) u(rx)` that preserves the equation.
pub struct Rescaled {
    inner: FieldRef,
    factor: f64,
    scale: f64,
}

pub fn rescale(u: FieldRef, r: f64) -> Result<Rescaled> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Range(format!("scaling parameter must be positive, got {r}")));
    }
    let factor = r.powf(u.params().scaling_degree());
    Ok(Rescaled { inner: u, factor, scale: r })
}

impl Rescaled {
    fn inner_point(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|c| self.scale * c).collect()
    }
}

impl Field for Rescaled {
    fn params(&self) -> ProblemParams {
        self.inner.params()
    }

    fn domain(&self) -> Domain {
        match self.inner.domain() {
            Domain::Punctured { center, inner, outer } => Domain::Punctured {
                center: center.iter().map(|c| c / self.scale).collect(),
                inner: inner / self.scale,
                outer: outer / self.scale,
            },
            Domain::WholeSpace => Domain::WholeSpace,
            Domain::Transformed(s) => Domain::Transformed(format!("{s} scaled by 1/{}", self.scale)),
        }
    }

    fn contains(&self, x: &[f64]) -> bool {
        self.inner.contains(&self.inner_point(x))
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.params().n {
            return Err(Error::Validation("point has the wrong dimension".into()));
        }
        self.inner.check(&self.inner_point(x))
    }

    fn is_radial(&self) -> bool {
        self.inner.is_radial()
    }

    fn regular_at_origin(&self) -> bool {
        self.inner.regular_at_origin()
    }

    fn name(&self) -> String {
        format!("rescale({}, {})", self.inner.name(), self.scale)
    }

    fn eval_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let y = self.inner_point(x);
        self.inner.eval_unchecked(&y).into_iter().map(|v| self.factor * v).collect()
    }

    fn gradient_unchecked(&self, x: &[f64]) -> Option<Vec<Vec<f64>>> {
        let y = self.inner_point(x);
        let k = self.factor * self.scale;
        self.inner
            .gradient_unchecked(&y)
            .map(|g| g.into_iter().map(|row| row.into_iter().map(|v| k * v).collect()).collect())
    }

    fn laplacian_unchecked(&self, x: &[f64]) -> Option<Vec<f64>> {
        let y = self.inner_point(x);
        let k = self.factor * self.scale * self.scale;
        self.inner.laplacian_unchecked(&y).map(|l| l.into_iter().map(|v| k * v).collect())
    }

    fn has_analytic_gradient(&self) -> bool {
        self.inner.has_analytic_gradient()
    }

    fn has_analytic_laplacian(&self) -> bool {
        self.inner.has_analytic_laplacian()
    }

    fn length_scale(&self, x: &[f64]) -> f64 {
        self.inner.length_scale(&self.inner_point(x)) / self.scale
    }
}

/// Convenience wrapper returning a shareable handle.
pub fn rescaled(u: FieldRef, r: f64) -> Result<FieldRef> {
    Ok(Arc::new(rescale(u, r)?))
}

/// `-Δ_h u(x) - |u(x)|^(α-1) u(x)` with a Richardson-extrapolated 4th-order Laplacian.
pub fn residual(u: &dyn Field, x: &[f64], h: f64) -> Result<Vec<f64>> {
    residual_weighted(u, x, h, 1.0)
}

/// Residual of the weighted equation `-Δu* = (r/|y-z|)^((α-1)μ) |u*|^(α-1) u*`.
pub fn kelvin_residual(k: &Kelvin, y: &[f64], h: f64) -> Result<Vec<f64>> {
    residual_weighted(k, y, h, k.equation_weight(y))
}

fn residual_weighted(u: &dyn Field, x: &[f64], h: f64, weight: f64) -> Result<Vec<f64>> {
    if !(h > 0.0) {
        return Err(Error::Range(format!("finite-difference step must be positive, got {h}")));
    }
    let value = u.value(x)?;
    let lap = richardson_laplacian(u, x, h)?;
    let a = u.params().alpha;
    let nl = weight * norm_pow(norm(&value), a - 1.0);
    Ok(lap.iter().zip(&value).map(|(l, v)| -l - nl * v).collect())
}

/// `|residual| / |u|^α`, falling back to the absolute residual where `u = 0`.
pub fn relative_residual(u: &dyn Field, x: &[f64], h: f64) -> Result<f64> {
    let r = norm(&residual(u, x, h)?);
    let scale = norm_pow(norm(&u.value(x)?), u.params().alpha);
    Ok(if scale > 0.0 { r / scale } else { r })
}

pub fn relative_kelvin_residual(k: &Kelvin, y: &[f64], h: f64) -> Result<f64> {
    let r = norm(&kelvin_residual(k, y, h)?);
    let scale = k.equation_weight(y) * norm_pow(norm(&k.value(y)?), k.params().alpha);
    Ok(if scale > 0.0 { r / scale } else { r })
}
