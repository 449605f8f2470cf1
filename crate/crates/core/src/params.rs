//! Problem parameters and the constants derived from them.
//!
//! Every formula in the crate is written in terms of the dimension `n`, the
//! component count `m` and the exponent `alpha`, through the cylindrical
//! coefficients
//!
//! ```text
//! lambda = 2/(alpha-1) * (n - 2 - 2/(alpha-1)),   mu = 4/(alpha-1) - n + 2
//! ```
//!
//! and the singular energy level `lambda_bar = (alpha-1)/(alpha+1) * lambda^((alpha+1)/(alpha-1))`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Absolute tolerance on `alpha` when deciding whether it sits on a regime boundary.
pub const REGIME_TOL: f64 = 1e-12;

/// Dimension, number of components and exponent of `-Δu = |u|^(α-1) u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub n: usize,
    pub m: usize,
    pub alpha: f64,
}

impl ProblemParams {
    /// Validates the parameter box `n >= 3`, `m >= 1`, `1 < alpha <= (n+2)/(n-2)`.
    ///
    /// An `alpha` within [`REGIME_TOL`] of the Serrin or Sobolev exponent is
    /// snapped onto it so that downstream constants vanish exactly.
    pub fn new(n: usize, m: usize, alpha: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::Range(format!("dimension n = {n} must be at least 3")));
        }
        if m < 1 {
            return Err(Error::Range("component count m must be at least 1".into()));
        }
        if !alpha.is_finite() {
            return Err(Error::Range(format!("exponent alpha = {alpha} is not finite")));
        }
        let sobolev = sobolev_exponent(n);
        let serrin = serrin_exponent(n);
        if alpha <= 1.0 || alpha > sobolev + REGIME_TOL {
            return Err(Error::Range(format!(
                "exponent alpha = {alpha} outside (1, {sobolev}] for n = {n}"
            )));
        }
        let alpha = if (alpha - sobolev).abs() <= REGIME_TOL {
            sobolev
        } else if (alpha - serrin).abs() <= REGIME_TOL {
            serrin
        } else {
            alpha
        };
        Ok(Self { n, m, alpha })
    }

    /// Parameters at the upper critical exponent `(n+2)/(n-2)`.
    pub fn critical(n: usize, m: usize) -> Result<Self> {
        Self::new(n, m, sobolev_exponent(n))
    }

    /// Parameters at the lower critical (Serrin) exponent `n/(n-2)`.
    pub fn serrin(n: usize, m: usize) -> Result<Self> {
        Self::new(n, m, serrin_exponent(n))
    }

    pub fn regime(&self) -> Regime {
        regime_of(self)
    }

    /// Scaling degree `2/(alpha-1)` of the cylindrical transform.
    pub fn scaling_degree(&self) -> f64 {
        2.0 / (self.alpha - 1.0)
    }

    pub fn constants(&self) -> DerivedConstants {
        derive_constants(self)
    }
}

pub fn sobolev_exponent(n: usize) -> f64 {
    (n as f64 + 2.0) / (n as f64 - 2.0)
}

pub fn serrin_exponent(n: usize) -> f64 {
    n as f64 / (n as f64 - 2.0)
}

/// Volume `ω_n` of the unit ball in `R^n`.
pub fn ball_volume(n: usize) -> f64 {
    let half = n as f64 / 2.0;
    std::f64::consts::PI.powf(half) / gamma(half + 1.0)
}

/// Area `n ω_n` of the unit sphere `S^(n-1)`.
pub fn sphere_area(n: usize) -> f64 {
    n as f64 * ball_volume(n)
}

/// Exponent regime of `alpha` relative to `n/(n-2)` and `(n+2)/(n-2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// `1 < alpha < n/(n-2)`
    BelowSerrin,
    /// `alpha = n/(n-2)`
    Serrin,
    /// `n/(n-2) < alpha < (n+2)/(n-2)`
    Intermediate,
    /// `alpha = (n+2)/(n-2)`
    Critical,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::BelowSerrin => "BelowSerrin",
            Regime::Serrin => "Serrin",
            Regime::Intermediate => "Intermediate",
            Regime::Critical => "Critical",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Classifies `alpha` by comparing `alpha (n-2)` against the integers `n` and
/// `n+2`, so the boundaries themselves carry no rounding.
pub fn regime_of(params: &ProblemParams) -> Regime {
    let d = params.n as f64 - 2.0;
    let scaled = params.alpha * d;
    let tol = REGIME_TOL * d;
    let upper = params.n as f64 + 2.0;
    let lower = params.n as f64;
    if (scaled - upper).abs() <= tol {
        Regime::Critical
    } else if (scaled - lower).abs() <= tol {
        Regime::Serrin
    } else if scaled < lower {
        Regime::BelowSerrin
    } else {
        Regime::Intermediate
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub params: ProblemParams,
    pub lambda: f64,
    pub mu: f64,
    /// Only defined when `lambda >= 0`.
    pub lambda_bar: Option<f64>,
    pub serrin_exponent: f64,
    pub sobolev_exponent: f64,
    pub ball_volume: f64,
    pub sphere_area: f64,
}

pub fn derive_constants(params: &ProblemParams) -> DerivedConstants {
    let n = params.n as f64;
    let a = params.alpha;
    let degree = 2.0 / (a - 1.0);
    let (lambda, mu) = match regime_of(params) {
        Regime::Critical => (0.25 * (n - 2.0) * (n - 2.0), 0.0),
        Regime::Serrin => (0.0, n - 2.0),
        _ => (degree * (n - 2.0 - degree), 2.0 * degree - n + 2.0),
    };
    let lambda_bar = if lambda >= 0.0 {
        Some((a - 1.0) / (a + 1.0) * lambda.powf((a + 1.0) / (a - 1.0)))
    } else {
        None
    };
    let ball = ball_volume(params.n);
    DerivedConstants {
        params: *params,
        lambda,
        mu,
        lambda_bar,
        serrin_exponent: serrin_exponent(params.n),
        sobolev_exponent: sobolev_exponent(params.n),
        ball_volume: ball,
        sphere_area: n * ball,
    }
}

impl DerivedConstants {
    pub fn alpha(&self) -> f64 {
        self.params.alpha
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn m(&self) -> usize {
        self.params.m
    }

    /// Amplitude `lambda^(1/(alpha-1))` of the homogeneous singular solution.
    pub fn homogeneous_amplitude(&self) -> Option<f64> {
        (self.lambda > 0.0).then(|| self.lambda.powf(1.0 / (self.alpha() - 1.0)))
    }

    /// Constant `((alpha-1)/(2n))^(-1/(alpha-1))` of the a priori bound
    /// `u_i(x) <= C |x|^(-2/(alpha-1))` for singular solutions on the punctured space.
    pub fn a_priori_constant(&self) -> f64 {
        a_priori_constant(&self.params)
    }
}

pub fn a_priori_constant(params: &ProblemParams) -> f64 {
    let a = params.alpha;
    ((a - 1.0) / (2.0 * params.n as f64)).powf(-1.0 / (a - 1.0))
}

/// Lower bound `-(2/n) ((n-2)/2)^n` of the first Pohozaev invariant.
pub fn kappa_floor(n: usize) -> f64 {
    let nf = n as f64;
    -(2.0 / nf) * (0.5 * (nf - 2.0)).powi(n as i32)
}

/// Lower bound `-((2/n)((n-2)/2)^n + kappa) ((n-2)/2)^(n-2)` of the second invariant.
pub fn kappa_star_floor(n: usize, kappa: f64) -> f64 {
    let nf = n as f64;
    -(kappa - kappa_floor(n)) * (0.5 * (nf - 2.0)).powi(n as i32 - 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critical_exponent_has_zero_mu() {
        let c = derive_constants(&ProblemParams::new(4, 2, 3.0).unwrap());
        assert_eq!(c.lambda, 1.0);
        assert_eq!(c.mu, 0.0);
    }

    #[test]
    fn intermediate_five_two() {
        let c = derive_constants(&ProblemParams::new(5, 1, 2.0).unwrap());
        assert!((c.lambda - 2.0).abs() < 1e-15);
        assert!((c.mu - 1.0).abs() < 1e-15);
        assert!((c.lambda_bar.unwrap() - 8.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn serrin_has_zero_lambda() {
        let c = derive_constants(&ProblemParams::new(4, 1, 2.0).unwrap());
        assert_eq!(c.lambda, 0.0);
        assert_eq!(c.lambda_bar, Some(0.0));
        let c5 = derive_constants(&ProblemParams::serrin(5, 1).unwrap());
        assert_eq!(c5.lambda, 0.0);
    }

    #[test]
    fn below_serrin_lambda_negative_without_lambda_bar() {
        let c = derive_constants(&ProblemParams::new(5, 1, 1.2).unwrap());
        assert!(c.lambda < 0.0);
        assert!(c.lambda_bar.is_none());
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(matches!(ProblemParams::new(3, 1, 9.0), Err(Error::Range(_))));
        assert!(matches!(ProblemParams::new(3, 1, 1.0), Err(Error::Range(_))));
        assert!(matches!(ProblemParams::new(2, 1, 1.5), Err(Error::Range(_))));
        assert!(matches!(ProblemParams::new(3, 0, 2.0), Err(Error::Range(_))));
        assert!(matches!(ProblemParams::new(3, 1, f64::NAN), Err(Error::Range(_))));
    }

    #[test]
    fn regime_examples() {
        let r = |n, a| regime_of(&ProblemParams::new(n, 1, a).unwrap());
        assert_eq!(r(3, 5.0), Regime::Critical);
        assert_eq!(r(4, 2.5), Regime::Intermediate);
        assert_eq!(r(5, 1.2), Regime::BelowSerrin);
        assert_eq!(r(4, 2.0), Regime::Serrin);
        assert_eq!(r(5, 7.0 / 3.0), Regime::Critical);
    }

    #[test]
    fn sphere_area_is_n_times_ball_volume() {
        for n in 3..=9 {
            assert!((sphere_area(n) - n as f64 * ball_volume(n)).abs() < 1e-14);
        }
        assert!((sphere_area(3) - 4.0 * std::f64::consts::PI).abs() < 1e-13);
        assert!((sphere_area(4) - 2.0 * std::f64::consts::PI.powi(2)).abs() < 1e-13);
    }

    #[test]
    fn kappa_floors() {
        assert!((kappa_floor(4) + 0.5).abs() < 1e-15);
        assert!((kappa_floor(3) + 1.0 / 12.0).abs() < 1e-15);
        assert!((kappa_floor(6) + 64.0 / 3.0).abs() < 1e-13);
        assert!(kappa_star_floor(4, kappa_floor(4)).abs() < 1e-15);
        assert!((kappa_star_floor(4, 0.0) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn a_priori_constant_n4_critical() {
        let p = ProblemParams::critical(4, 1).unwrap();
        assert!((a_priori_constant(&p) - 2.0).abs() < 1e-14);
    }
}
