//! Singular solutions of the vector Lane–Emden system `-Δu = |u|^(α-1) u`.
//!
//! The crate builds the explicit solution families (bubbles, homogeneous
//! singular solutions, Fowler spirals), integrates the radial cylindrical
//! dynamics, evaluates the Pohozaev-type invariants `κ` and `κ*`, and maps
//! measured invariants onto the classification of isolated singularities.
//!
//! ```
//! use lane_emden::{classify_critical, ProblemParams, Tag, DEFAULT_TOL};
//!
//! let p = ProblemParams::critical(4, 2).unwrap();
//! assert_eq!(p.constants().lambda, 1.0);
//! let class = classify_critical(-0.5, 0.0, 4, DEFAULT_TOL).unwrap();
//! assert_eq!(class.tag, Tag::CriticalHomogeneous);
//! ```

pub mod classify;
pub mod dynamics;
pub mod error;
pub mod extended;
pub mod families;
pub mod field;
pub mod invariants;
pub mod params;
pub mod quadrature;
pub mod transforms;

pub use classify::{
    classify_by_regime, classify_critical, classify_field, classify_subcritical, AsymptoticLaw, Evidence,
    SingularityClass, Tag, DEFAULT_TOL,
};
pub use dynamics::{
    integrate_lower_critical, integrate_radial, integrate_radial_from, RadialState, RadialTrajectory, System,
    DEFAULT_STEP,
};
pub use error::{Error, Result};
pub use families::{
    bubble, critical_homogeneous, fowler_orbit, fowler_roots, homogeneous_singular, radial_field, spiral, Bubble,
    FowlerData, FowlerOutcome, Homogeneous, RadialField, Spiral,
};
pub use field::{Domain, Field, FieldRef};
pub use invariants::{
    angular_momenta, drift_series, energy_e, energy_e_rate, kappa_of, phi_star_surface, phi_surface, psi, psi_star,
    AntiSymmetric, DriftSeries, InvariantReport,
};
pub use params::{derive_constants, regime_of, DerivedConstants, ProblemParams, Regime};
pub use quadrature::{build_sphere_quadrature, SphereQuadrature};
pub use transforms::{kelvin, rescale, rescaled, Kelvin, Rescaled};
