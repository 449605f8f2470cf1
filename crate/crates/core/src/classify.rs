//! Singularity taxonomy at the origin and the asymptotic laws attached to it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::{check_admissible, fowler_roots, FowlerOutcome};
use crate::field::{norm, Domain, Field};
use crate::invariants::{lower_critical_terminal_energy, phi_star_surface, phi_surface};
use crate::params::{kappa_floor, ProblemParams, Regime};
use crate::quadrature::SphereQuadrature;

pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tag {
    Trivial,
    Removable,
    SubcriticalSingular,
    CriticalOscillatory,
    CriticalHomogeneous,
    WeakSingular,
    LowerCriticalSingular,
}

/// `|u(x)| ~ c |x|^p (-log|x|)^q` as `x → 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticLaw {
    pub exponent: f64,
    /// `None` when only two-sided bounds exist.
    pub constant: Option<f64>,
    pub log_exponent: f64,
    pub solution_dependent: bool,
    /// Two-sided bounds `c <= |u| |x|^(-p) <= C` when known.
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl AsymptoticLaw {
    fn exact(exponent: f64, constant: f64, log_exponent: f64) -> Self {
        Self { exponent, constant: Some(constant), log_exponent, solution_dependent: false, lower: None, upper: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "ClassRecord", into = "ClassRecord")]
pub struct SingularityClass {
    pub tag: Tag,
    pub law: Option<AsymptoticLaw>,
}

/// Flat JSON form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct ClassRecord {
    tag: Tag,
    exponent: Option<f64>,
    constant: Option<f64>,
    log_exponent: Option<f64>,
    solution_dependent: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    upper: Option<f64>,
}

impl From<SingularityClass> for ClassRecord {
    fn from(c: SingularityClass) -> Self {
        let law = c.law;
        ClassRecord {
            tag: c.tag,
            exponent: law.map(|l| l.exponent),
            constant: law.and_then(|l| l.constant),
            log_exponent: law.map(|l| l.log_exponent),
            solution_dependent: law.is_some_and(|l| l.solution_dependent),
            lower: law.and_then(|l| l.lower),
            upper: law.and_then(|l| l.upper),
        }
    }
}

impl From<ClassRecord> for SingularityClass {
    fn from(r: ClassRecord) -> Self {
        let law = r.exponent.map(|exponent| AsymptoticLaw {
            exponent,
            constant: r.constant,
            log_exponent: r.log_exponent.unwrap_or(0.0),
            solution_dependent: r.solution_dependent,
            lower: r.lower,
            upper: r.upper,
        });
        SingularityClass { tag: r.tag, law }
    }
}

impl SingularityClass {
    fn bare(tag: Tag) -> Self {
        Self { tag, law: None }
    }

    fn with_law(tag: Tag, law: AsymptoticLaw) -> Self {
        Self { tag, law: Some(law) }
    }
}

/// Critical exponent: decide from the two Pohozaev invariants.
pub fn classify_critical(kappa: f64, kappa_star: f64, n: usize, tol: f64) -> Result<SingularityClass> {
    if n < 3 {
        return Err(Error::Range(format!("dimension must be >= 3, got {n}")));
    }
    check_admissible(n, kappa, kappa_star, tol).map_err(|e| match e {
        Error::Range(msg) => Error::Inadmissible(msg),
        other => other,
    })?;
    let half = 0.5 * (n as f64 - 2.0);
    if kappa.abs() <= tol && kappa_star.abs() <= tol {
        return Ok(SingularityClass::bare(Tag::Removable));
    }
    if (kappa - kappa_floor(n)).abs() <= tol && kappa_star.abs() <= tol {
        return Ok(SingularityClass::with_law(Tag::CriticalHomogeneous, AsymptoticLaw::exact(-half, half.powf(half), 0.0)));
    }
    let band = fowler_roots(n, kappa.max(kappa_floor(n)), kappa_star.min(0.0))
        .ok()
        .and_then(FowlerOutcome::oscillatory)
        .map(|d| (d.rho_min, d.rho_max));
    Ok(SingularityClass::with_law(
        Tag::CriticalOscillatory,
        AsymptoticLaw {
            exponent: -half,
            constant: None,
            log_exponent: 0.0,
            solution_dependent: true,
            lower: band.map(|b| b.0),
            upper: band.map(|b| b.1),
        },
    ))
}

fn require_regime(params: &ProblemParams, regime: Regime) -> Result<()> {
    if params.regime() != regime {
        return Err(Error::Regime(format!(
            "expected the {} regime, got {} (alpha = {})",
            regime.name(),
            params.regime().name(),
            params.alpha
        )));
    }
    Ok(())
}

/// Intermediate exponents: decide from the limit `Φ(0+)`.
pub fn classify_subcritical(phi_limit: f64, params: &ProblemParams, tol: f64) -> Result<SingularityClass> {
    require_regime(params, Regime::Intermediate)?;
    let c = params.constants();
    let lambda_bar = c.lambda_bar.expect("lambda_bar is defined in the intermediate regime");
    if phi_limit.abs() <= tol {
        return Ok(SingularityClass::bare(Tag::Removable));
    }
    if (phi_limit + lambda_bar).abs() <= tol {
        let amplitude = c.homogeneous_amplitude().expect("lambda > 0 in the intermediate regime");
        return Ok(SingularityClass::with_law(
            Tag::SubcriticalSingular,
            AsymptoticLaw::exact(-params.scaling_degree(), amplitude, 0.0),
        ));
    }
    Err(Error::Inconsistent(format!(
        "Phi(0+) = {phi_limit} is neither 0 nor -lambda_bar = {}",
        -lambda_bar
    )))
}

/// Measurements that decide the class in each regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    Invariants { kappa: f64, kappa_star: f64 },
    PhiLimit { value: f64 },
    /// Amplitude `c` of `|u| ≈ c |x|^(2-n)`.
    Amplitude { value: f64 },
    TerminalEnergy { value: f64 },
}

pub fn classify_by_regime(params: &ProblemParams, evidence: Evidence, tol: f64) -> Result<SingularityClass> {
    let n = params.n;
    let nm2 = n as f64 - 2.0;
    match (params.regime(), evidence) {
        (Regime::Critical, Evidence::Invariants { kappa, kappa_star }) => classify_critical(kappa, kappa_star, n, tol),
        (Regime::Intermediate, Evidence::PhiLimit { value }) => classify_subcritical(value, params, tol),
        (Regime::BelowSerrin, Evidence::Amplitude { value }) => {
            if value.abs() <= tol {
                return Ok(SingularityClass::bare(Tag::Removable));
            }
            if value < 0.0 {
                return Err(Error::Inconsistent(format!("amplitude {value} is negative")));
            }
            Ok(SingularityClass::with_law(
                Tag::WeakSingular,
                AsymptoticLaw {
                    exponent: -nm2,
                    constant: Some(value),
                    log_exponent: 0.0,
                    solution_dependent: true,
                    lower: None,
                    upper: None,
                },
            ))
        }
        (Regime::Serrin, Evidence::TerminalEnergy { value }) => {
            if value.abs() <= tol {
                return Ok(SingularityClass::bare(Tag::Removable));
            }
            let target = lower_critical_terminal_energy(n);
            if (value - target).abs() <= tol {
                return Ok(SingularityClass::with_law(
                    Tag::LowerCriticalSingular,
                    AsymptoticLaw::exact(-nm2, (0.5 * nm2 * nm2).powf(0.5 * nm2), -0.5 * nm2),
                ));
            }
            Err(Error::Inconsistent(format!("terminal energy {value} is neither 0 nor {target}")))
        }
        (regime, evidence) => Err(Error::Configuration(format!(
            "evidence {evidence:?} does not apply to the {} regime",
            regime.name()
        ))),
    }
}

/// Least-squares fit `log|u| = log c + p log|x|`; returns `(p, c)`.
pub fn fit_power_law(samples: &[(f64, f64)]) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> =
        samples.iter().filter(|(r, u)| *r > 0.0 && *u > 0.0).map(|(r, u)| (r.ln(), u.ln())).collect();
    if pts.len() < 2 {
        return Err(Error::Numeric("power-law fit needs two positive samples".into()));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Numeric("power-law fit needs distinct radii".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, (my - slope * mx).exp()))
}

/// Amplitude `c` of `|u| ≈ c |x|^p` with the exponent held fixed: the
/// geometric mean of `|u| |x|^(-p)`.
pub fn fixed_exponent_amplitude(samples: &[(f64, f64)], exponent: f64) -> Result<f64> {
    let logs: Vec<f64> =
        samples.iter().filter(|(r, u)| *r > 0.0 && *u > 0.0).map(|(r, u)| u.ln() - exponent * r.ln()).collect();
    if logs.is_empty() {
        return Err(Error::Numeric("amplitude fit needs a positive sample".into()));
    }
    Ok((logs.iter().sum::<f64>() / logs.len() as f64).exp())
}

/// A radius well inside the field's domain for surface measurements.
pub fn probe_radius(u: &dyn Field) -> f64 {
    match u.domain() {
        Domain::Punctured { inner, outer, .. } => {
            if outer.is_finite() && inner > 0.0 {
                (inner * outer).sqrt()
            } else if outer.is_finite() {
                0.5 * outer.min(1.0)
            } else if inner > 0.0 {
                2.0 * inner.max(0.5)
            } else {
                0.5
            }
        }
        _ => 0.2,
    }
}

fn ray_samples(u: &dyn Field, radii: &[f64]) -> Result<Vec<(f64, f64)>> {
    let n = u.params().n;
    let mut out = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut x = vec![0.0; n];
        x[0] = r;
        out.push((r, norm(&u.value(&x)?)));
    }
    Ok(out)
}

/// Measures the regime-appropriate evidence on `u` and classifies it.
pub fn classify_field(u: &dyn Field, q: &SphereQuadrature, tol: f64) -> Result<SingularityClass> {
    let params = u.params();
    let r0 = probe_radius(u);
    let probe = ray_samples(u, &[r0, 0.5 * r0, 0.25 * r0])?;
    if probe.iter().all(|(_, v)| *v == 0.0) {
        let c = params.constants();
        if phi_surface(u, r0, &c, q)?.abs() == 0.0 {
            return Ok(SingularityClass::bare(Tag::Trivial));
        }
    }
    let c = params.constants();
    match params.regime() {
        Regime::Critical => {
            let kappa = phi_surface(u, r0, &c, q)?;
            let kappa_star = phi_star_surface(u, r0, kappa, &c, q)?;
            classify_critical(kappa, kappa_star, params.n, tol)
        }
        Regime::Intermediate => {
            // Φ is monotone in r; take the innermost of a few probes.
            let inner = match u.domain() {
                Domain::Punctured { inner, .. } => inner,
                _ => 0.0,
            };
            let r = (0..4).map(|k| r0 * 10f64.powi(-k)).filter(|r| *r > inner * 1.01).next_back().unwrap_or(r0);
            classify_subcritical(phi_surface(u, r, &c, q)?, &params, tol)
        }
        Regime::BelowSerrin => {
            let radii: Vec<f64> = (0..11).map(|k| 0.1 * r0 * 10f64.powf(k as f64 / 10.0)).collect();
            let samples = ray_samples(u, &radii)?;
            let amplitude = fixed_exponent_amplitude(&samples, 2.0 - params.n as f64)?;
            classify_by_regime(&params, Evidence::Amplitude { value: amplitude }, tol)
        }
        Regime::Serrin => Err(Error::Capability(
            "Serrin-exponent fields are classified from the terminal energy of a lower-critical run".into(),
        )),
    }
}
