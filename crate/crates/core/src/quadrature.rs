//! Product Gauss rules on the unit sphere `S^(n-1)` and the one-dimensional
//! rules they are built from.
//!
//! A point of `S^(d-1)` is written `θ = (x, sqrt(1-x²) ω)` with `ω ∈ S^(d-2)`,
//! so that `dσ_(d-1) = (1-x²)^((d-3)/2) dx dσ_(d-2)`. The `x` factor is
//! integrated by Gauss–Gegenbauer with that weight and the recursion bottoms
//! out at the circle, where the trapezoidal rule is spectrally exact.

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::params::sphere_area;

pub const DEFAULT_ORDER: usize = 16;
pub const MAX_DIMENSION: usize = 6;

/// Nodes and weights of a one-dimensional rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule1d {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule1d {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Gauss rule for the weight `(1-x²)^gamma` on `[-1, 1]` (Golub–Welsch).
///
/// Exact for polynomials of degree `2 * points - 1`.
pub fn gauss_gegenbauer(points: usize, gamma_exp: f64) -> Rule1d {
    assert!(points >= 1 && gamma_exp > -1.0);
    // Gegenbauer parameter of the monic recurrence p_{k+1} = x p_k - b_k p_{k-1}.
    let lam = gamma_exp + 0.5;
    let mut jacobi = DMatrix::<f64>::zeros(points, points);
    for k in 1..points {
        let kf = k as f64;
        let b = kf * (kf + 2.0 * lam - 1.0) / (4.0 * (kf + lam) * (kf + lam - 1.0));
        jacobi[(k, k - 1)] = b.sqrt();
        jacobi[(k - 1, k)] = b.sqrt();
    }
    let mass = std::f64::consts::PI.sqrt() * gamma(gamma_exp + 1.0) / gamma(gamma_exp + 1.5);
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..points)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mass * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Symmetrize: the weight is even, so nodes come in ± pairs.
    for i in 0..points / 2 {
        let j = points - 1 - i;
        let x = 0.5 * (pairs[j].0 - pairs[i].0);
        let w = 0.5 * (pairs[i].1 + pairs[j].1);
        pairs[i] = (-x, w);
        pairs[j] = (x, w);
    }
    if points % 2 == 1 {
        pairs[points / 2].0 = 0.0;
    }
    Rule1d {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

pub fn gauss_legendre(points: usize) -> Rule1d {
    gauss_gegenbauer(points, 0.0)
}

/// Gauss–Chebyshev rule of the first kind: `∫ f(x) / sqrt(1-x²) dx ≈ Σ w_k f(x_k)`.
pub fn gauss_chebyshev(points: usize) -> Rule1d {
    let w = std::f64::consts::PI / points as f64;
    let nodes = (1..=points)
        .map(|k| ((2 * k - 1) as f64 * std::f64::consts::PI / (2 * points) as f64).cos())
        .collect();
    Rule1d { nodes, weights: vec![w; points] }
}

/// Product quadrature on `S^(n-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereQuadrature {
    n: usize,
    order: usize,
    /// Row-major `len × n` node coordinates.
    coords: Vec<f64>,
    weights: Vec<f64>,
}

impl SphereQuadrature {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.coords[i * self.n..(i + 1) * self.n]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.coords.chunks_exact(self.n).zip(self.weights.iter().copied())
    }

    /// Degree up to which polynomials restricted to the sphere are integrated exactly.
    pub fn exact_degree(&self) -> usize {
        self.order - 1
    }
}

/// Builds the product rule on `S^(n-1)` with `order` points per angle.
///
/// The node count is `order^(n-1)`.
pub fn build_sphere_quadrature(n: usize, order: usize) -> Result<SphereQuadrature> {
    if n > MAX_DIMENSION {
        return Err(Error::Capability(format!(
            "sphere quadrature supports n <= {MAX_DIMENSION}, got n = {n}"
        )));
    }
    if n < 3 {
        return Err(Error::Range(format!("sphere quadrature needs n >= 3, got {n}")));
    }
    if order < 2 {
        return Err(Error::Range(format!("quadrature order must be >= 2, got {order}")));
    }
    let (coords, weights) = sphere_rule(n, order);
    Ok(SphereQuadrature { n, order, coords, weights })
}

fn sphere_rule(d: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    if d == 2 {
        let step = 2.0 * std::f64::consts::PI / order as f64;
        let mut coords = Vec::with_capacity(2 * order);
        for k in 0..order {
            let phi = k as f64 * step;
            coords.push(phi.cos());
            coords.push(phi.sin());
        }
        return (coords, vec![step; order]);
    }
    let polar = gauss_gegenbauer(order, 0.5 * (d as f64 - 3.0));
    let (sub_coords, sub_weights) = sphere_rule(d - 1, order);
    let sub_len = sub_weights.len();
    let mut coords = Vec::with_capacity(order * sub_len * d);
    let mut weights = Vec::with_capacity(order * sub_len);
    for (&x, &wx) in polar.nodes.iter().zip(&polar.weights) {
        let s = (1.0 - x * x).sqrt();
        for (omega, &wo) in sub_coords.chunks_exact(d - 1).zip(&sub_weights) {
            coords.push(x);
            coords.extend(omega.iter().map(|o| s * o));
            weights.push(wx * wo);
        }
    }
    (coords, weights)
}

/// `Σ w_i f(θ_i)`, failing on the first non-finite integrand value.
pub fn integrate_sphere(q: &SphereQuadrature, f: impl Fn(&[f64]) -> f64) -> Result<f64> {
    let mut acc = 0.0;
    for (i, (node, w)) in q.iter().enumerate() {
        let value = f(node);
        if !value.is_finite() {
            return Err(Error::NonFinite { index: i });
        }
        acc += w * value;
    }
    Ok(acc)
}

/// Area check helper: `Σ w_i - n ω_n`.
pub fn area_defect(q: &SphereQuadrature) -> f64 {
    q.weights.iter().sum::<f64>() - sphere_area(q.n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_matches_known_nodes() {
        let r = gauss_legendre(3);
        assert!((r.nodes[2] - (0.6f64).sqrt()).abs() < 1e-15);
        assert!((r.weights[1] - 8.0 / 9.0).abs() < 1e-14);
        assert_eq!(r.nodes[1], 0.0);
    }

    #[test]
    fn gegenbauer_integrates_weighted_polynomials() {
        // ∫ x^4 (1-x^2)^(3/2) dx = B(5/2, 5/2) = 3π/128
        let r = gauss_gegenbauer(4, 1.5);
        let v = r.integrate(|x| x.powi(4));
        assert!((v - 3.0 * std::f64::consts::PI / 128.0).abs() < 1e-14, "{v}");
    }

    #[test]
    fn chebyshev_integrates_weighted_polynomials() {
        // ∫ x^2 / sqrt(1-x^2) dx = π/2
        let r = gauss_chebyshev(8);
        assert!((r.integrate(|x| x * x) - std::f64::consts::PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn areas() {
        for (n, area) in [(3, 4.0 * std::f64::consts::PI), (4, 2.0 * std::f64::consts::PI.powi(2))] {
            let q = build_sphere_quadrature(n, 16).unwrap();
            assert!((q.weights().iter().sum::<f64>() - area).abs() < 1e-10);
            assert!(area_defect(&q).abs() < 1e-10);
        }
    }

    #[test]
    fn node_count_and_norms() {
        let q = build_sphere_quadrature(5, 5).unwrap();
        assert_eq!(q.len(), 5usize.pow(4));
        for (node, w) in q.iter() {
            let norm: f64 = node.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-14);
            assert!(w > 0.0);
        }
    }

    #[test]
    fn capability_and_range_errors() {
        assert!(matches!(build_sphere_quadrature(7, 4), Err(Error::Capability(_))));
        assert!(matches!(build_sphere_quadrature(3, 1), Err(Error::Range(_))));
    }

    #[test]
    fn integrate_reports_non_finite_node() {
        let q = build_sphere_quadrature(3, 4).unwrap();
        let err = integrate_sphere(&q, |x| if x[0] > 0.5 { f64::NAN } else { 1.0 }).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
    }

    #[test]
    fn coordinate_moments() {
        let q3 = build_sphere_quadrature(3, 16).unwrap();
        let v = integrate_sphere(&q3, |x| x[0] * x[0]).unwrap();
        assert!((v - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-10);
        let q4 = build_sphere_quadrature(4, 16).unwrap();
        let v = integrate_sphere(&q4, |x| x[0] * x[0]).unwrap();
        assert!((v - std::f64::consts::PI.powi(2) / 2.0).abs() < 1e-10);
        let odd = integrate_sphere(&q4, |x| x[1] * x[2] * x[2]).unwrap();
        assert!(odd.abs() < 1e-10);
        assert!((integrate_sphere(&q4, |_| 1.0).unwrap() - sphere_area(4)).abs() < 1e-10);
    }
}
