//! Vector fields `u : Ω ⊂ R^n → R^m` with optional closed-form derivatives.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::params::ProblemParams;

pub type FieldRef = Arc<dyn Field>;

/// Where a field is defined.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    WholeSpace,
    /// `{ x : inner < |x - center| < outer }`, with the center always excluded.
    Punctured { center: Vec<f64>, inner: f64, outer: f64 },
    /// Image of another domain under a transform; membership is decided by the field.
    Transformed(String),
}

impl Domain {
    pub fn punctured_space(n: usize) -> Self {
        Domain::Punctured { center: vec![0.0; n], inner: 0.0, outer: f64::INFINITY }
    }

    pub fn punctured_ball(n: usize, radius: f64) -> Self {
        Domain::Punctured { center: vec![0.0; n], inner: 0.0, outer: radius }
    }

    pub fn annulus(n: usize, inner: f64, outer: f64) -> Self {
        Domain::Punctured { center: vec![0.0; n], inner, outer }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Domain::WholeSpace => x.iter().all(|v| v.is_finite()),
            Domain::Punctured { center, inner, outer } => {
                let d = distance(x, center);
                d > 0.0 && d > *inner && d < *outer
            }
            Domain::Transformed(_) => true,
        }
    }

    /// The excluded point, if the domain has one.
    pub fn singular_point(&self) -> Option<&[f64]> {
        match self {
            Domain::Punctured { center, .. } => Some(center),
            _ => None,
        }
    }
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `|v|^p` with the convention `0^p = 0`; evaluated as `exp(p ln|v|)`.
pub fn norm_pow(norm: f64, p: f64) -> f64 {
    if norm == 0.0 {
        0.0
    } else {
        (p * norm.ln()).exp()
    }
}

/// A closed-form or interpolated solution candidate of `-Δu = |u|^(α-1) u`.
///
/// Implementors supply the unchecked evaluation; [`Field::value`] and
/// [`Field::gradient`] add the domain checks every caller relies on.
pub trait Field: Send + Sync {
    /// Dimension, component count and the exponent this field is meant to solve.
    fn params(&self) -> ProblemParams;

    fn domain(&self) -> Domain;

    fn contains(&self, x: &[f64]) -> bool {
        self.domain().contains(x)
    }

    /// Rotational symmetry about the origin: `u(x)` depends on `|x|` only.
    fn is_radial(&self) -> bool {
        false
    }

    /// Bounded (indeed smooth) in a neighbourhood of the origin.
    fn regular_at_origin(&self) -> bool {
        false
    }

    fn name(&self) -> String;

    fn eval_unchecked(&self, x: &[f64]) -> Vec<f64>;

    /// Closed-form Jacobian, `m` rows of length `n`.
    fn gradient_unchecked(&self, _x: &[f64]) -> Option<Vec<Vec<f64>>> {
        None
    }

    fn laplacian_unchecked(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }

    fn has_analytic_gradient(&self) -> bool {
        false
    }

    fn has_analytic_laplacian(&self) -> bool {
        false
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        let n = self.params().n;
        if x.len() != n {
            return Err(Error::Validation(format!("point has {} coordinates, expected {n}", x.len())));
        }
        if self.contains(x) {
            return Ok(());
        }
        match self.domain().singular_point() {
            Some(c) if distance(x, c) == 0.0 => {
                Err(Error::SingularPoint(format!("{} evaluated at its singular point", self.name())))
            }
            _ => Err(Error::Domain(format!("{:?} is outside the domain of {}", x, self.name()))),
        }
    }

    fn value(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        let v = self.eval_unchecked(x);
        if v.iter().any(|c| !c.is_finite()) {
            return Err(Error::Numeric(format!("{} is not finite at {:?}", self.name(), x)));
        }
        Ok(v)
    }

    /// Jacobian: closed form when available, otherwise 4th-order central differences.
    fn gradient(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check(x)?;
        if let Some(g) = self.gradient_unchecked(x) {
            return Ok(g);
        }
        let h = 1e-3 * self.length_scale(x);
        fd_gradient(self, x, h)
    }

    fn laplacian(&self, x: &[f64]) -> Option<Result<Vec<f64>>> {
        if let Err(e) = self.check(x) {
            return Some(Err(e));
        }
        self.laplacian_unchecked(x).map(Ok)
    }

    /// Distance scale over which the field varies near `x`; sets finite-difference steps.
    fn length_scale(&self, x: &[f64]) -> f64 {
        match self.domain() {
            Domain::Punctured { center, .. } => distance(x, &center).min(1.0),
            _ => 1.0,
        }
    }
}

/// 4th-order central-difference Jacobian; every stencil point must lie in the domain.
pub fn fd_gradient<F: Field + ?Sized>(u: &F, x: &[f64], h: f64) -> Result<Vec<Vec<f64>>> {
    let p = u.params();
    let mut jac = vec![vec![0.0; p.n]; p.m];
    let mut y = x.to_vec();
    for j in 0..p.n {
        let mut sample = |offset: f64| -> Result<Vec<f64>> {
            y[j] = x[j] + offset;
            let r = u.check(&y).map(|_| u.eval_unchecked(&y));
            y[j] = x[j];
            r
        };
        let fm2 = sample(-2.0 * h)?;
        let fm1 = sample(-h)?;
        let fp1 = sample(h)?;
        let fp2 = sample(2.0 * h)?;
        for i in 0..p.m {
            jac[i][j] = (fm2[i] - 8.0 * fm1[i] + 8.0 * fp1[i] - fp2[i]) / (12.0 * h);
        }
    }
    Ok(jac)
}

/// 4th-order central-difference Laplacian on the `2h` cross stencil.
pub fn fd_laplacian<F: Field + ?Sized>(u: &F, x: &[f64], h: f64) -> Result<Vec<f64>> {
    let p = u.params();
    let center = u.value(x)?;
    let mut lap = vec![0.0; p.m];
    let mut y = x.to_vec();
    for j in 0..p.n {
        let mut acc = vec![0.0; p.m];
        for (offset, coef) in [(-2.0, -1.0), (-1.0, 16.0), (1.0, 16.0), (2.0, -1.0)] {
            y[j] = x[j] + offset * h;
            if !u.contains(&y) {
                return Err(Error::Domain(format!(
                    "finite-difference stencil of radius {} leaves the domain of {} at {:?}",
                    2.0 * h,
                    u.name(),
                    x
                )));
            }
            let f = u.eval_unchecked(&y);
            for i in 0..p.m {
                acc[i] += coef * f[i];
            }
        }
        y[j] = x[j];
        for i in 0..p.m {
            lap[i] += (acc[i] - 30.0 * center[i]) / (12.0 * h * h);
        }
    }
    Ok(lap)
}

/// Eliminates the leading `h^4` error term of [`fd_laplacian`] with one halving.
pub fn richardson_laplacian<F: Field + ?Sized>(u: &F, x: &[f64], h: f64) -> Result<Vec<f64>> {
    let coarse = fd_laplacian(u, x, h)?;
    let fine = fd_laplacian(u, x, 0.5 * h)?;
    Ok(coarse.iter().zip(&fine).map(|(c, f)| (16.0 * f - c) / 15.0).collect())
}

/// The zero field on the whole space.
#[derive(Debug, Clone, Copy)]
pub struct ZeroField {
    pub params: ProblemParams,
}

impl Field for ZeroField {
    fn params(&self) -> ProblemParams {
        self.params
    }

    fn domain(&self) -> Domain {
        Domain::WholeSpace
    }

    fn is_radial(&self) -> bool {
        true
    }

    fn regular_at_origin(&self) -> bool {
        true
    }

    fn name(&self) -> String {
        "zero".into()
    }

    fn eval_unchecked(&self, _x: &[f64]) -> Vec<f64> {
        vec![0.0; self.params.m]
    }

    fn gradient_unchecked(&self, _x: &[f64]) -> Option<Vec<Vec<f64>>> {
        Some(vec![vec![0.0; self.params.n]; self.params.m])
    }

    fn laplacian_unchecked(&self, _x: &[f64]) -> Option<Vec<f64>> {
        Some(vec![0.0; self.params.m])
    }

    fn has_analytic_gradient(&self) -> bool {
        true
    }

    fn has_analytic_laplacian(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn punctured_domain_membership() {
        let d = Domain::punctured_ball(3, 1.0);
        assert!(d.contains(&[0.5, 0.0, 0.0]));
        assert!(!d.contains(&[0.0, 0.0, 0.0]));
        assert!(!d.contains(&[1.0, 0.0, 0.0]));
        let a = Domain::annulus(3, 0.2, 1.0);
        assert!(!a.contains(&[0.1, 0.0, 0.0]));
    }

    #[test]
    fn norm_pow_zero_convention() {
        assert_eq!(norm_pow(0.0, 2.5), 0.0);
        assert!((norm_pow(2.0, 3.0) - 8.0).abs() < 1e-14);
    }

    #[test]
    fn zero_field_errors_only_on_bad_points() {
        let z = ZeroField { params: ProblemParams::critical(3, 2).unwrap() };
        assert_eq!(z.value(&[0.0, 0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        assert!(matches!(z.value(&[0.0, 0.0]), Err(Error::Validation(_))));
        let lap = fd_laplacian(&z, &[0.1, 0.2, 0.3], 1e-2).unwrap();
        assert_eq!(lap, vec![0.0, 0.0]);
    }
}
