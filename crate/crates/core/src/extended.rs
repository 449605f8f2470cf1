//! Double-double arithmetic and an extended-precision replay of the RK4 runs.
//!
//! At `h = 1e-3` the RK4 drift of the conserved quantities is far below the
//! `f64` rounding level, so its order in `h` can only be observed with more
//! bits. The replay uses the same [`rk4_step`](crate::dynamics) code with a
//! ~106-bit scalar; it is limited to exponents where `|v|^(α-1)` is a
//! polynomial in `v`.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use crate::dynamics::{rk4_step, Rk4Work};
use crate::error::{Error, Result};
use crate::params::{ProblemParams, Regime};

/// Scalar type the RK4 step is generic over.
pub trait Real:
    Copy
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
{
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;

    fn abs(self) -> Self {
        if self < Self::from_f64(0.0) {
            -self
        } else {
            self
        }
    }

    fn powi(self, k: u32) -> Self {
        let mut out = Self::from_f64(1.0);
        for _ in 0..k {
            out = out * self;
        }
        out
    }
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }

    fn to_f64(self) -> f64 {
        self
    }
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub const fn new(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    /// `p / q` rounded to double-double.
    pub fn ratio(p: i64, q: i64) -> Self {
        Self::new(p as f64) / Self::new(q as f64)
    }
}

impl Add for DoubleDouble {
    type Output = Self;

    fn add(self, b: Self) -> Self {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Self { hi, lo }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;

    fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;

    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;

    fn mul(self, b: Self) -> Self {
        let (p, e) = two_prod(self.hi, b.hi);
        let (hi, lo) = quick_two_sum(p, e + (self.hi * b.lo + self.lo * b.hi));
        Self { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;

    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        let r = self - b * Self::new(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * Self::new(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + Self::new(q3)
    }
}

impl AddAssign for DoubleDouble {
    fn add_assign(&mut self, b: Self) {
        *self = *self + b;
    }
}

impl Real for DoubleDouble {
    fn from_f64(x: f64) -> Self {
        Self::new(x)
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} + {:e}", self.hi, self.lo)
    }
}

/// Max drifts of `Ψ`, `Ψ*` and the `k_ij` over a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drifts {
    pub psi: f64,
    pub psi_star: f64,
    pub k: f64,
}

type Dd = DoubleDouble;

fn dot(a: &[Dd], b: &[Dd]) -> Dd {
    a.iter().zip(b).fold(Dd::default(), |s, (x, y)| s + *x * *y)
}

/// `(α - 1)/2` when it is a positive integer.
fn half_power(params: &ProblemParams) -> Option<u32> {
    let k = 0.5 * (params.alpha - 1.0);
    (k >= 1.0 && k.fract() == 0.0).then_some(k as u32)
}

/// Integrates the critical cylindrical system in double-double arithmetic and
/// returns the drifts of the conserved quantities, measured against `t0`.
///
/// Only `n = 3` and `n = 4` qualify: the critical exponents 5 and 3 make every
/// quantity a polynomial in `(v, v')`.
pub fn critical_drift_extended(
    params: &ProblemParams,
    v0: &[f64],
    dv0: &[f64],
    t_span: [f64; 2],
    h: f64,
) -> Result<Drifts> {
    if params.regime() != Regime::Critical {
        return Err(Error::Regime("extended-precision replay needs the critical exponent".into()));
    }
    let k_pow = half_power(params)
        .ok_or_else(|| Error::Capability(format!("|v|^(alpha-1) is not polynomial for alpha = {}", params.alpha)))?;
    let n = params.n as i64;
    let m = params.m;
    if v0.len() != m || dv0.len() != m {
        return Err(Error::Validation(format!("initial data must have m = {m} components")));
    }
    if !(h > 0.0 && t_span[1] > t_span[0]) {
        return Err(Error::Configuration("need h > 0 and t1 > t0".into()));
    }
    let steps = ((t_span[1] - t_span[0]) / h).round() as usize;
    // λ = ((n-2)/2)² and μ = 0 at the critical exponent.
    let lambda = Dd::ratio((n - 2) * (n - 2), 4);
    let rhs = |_t: Dd, y: &[Dd], dy: &mut [Dd]| {
        let (v, dv) = y.split_at(m);
        let nl = dot(v, v).powi(k_pow);
        for i in 0..m {
            dy[i] = dv[i];
            dy[m + i] = lambda * v[i] - nl * v[i];
        }
    };

    let psi_coef = Dd::ratio(2, 2 * k_pow as i64 + 2);
    let star_quad = Dd::ratio((n - 2) * (n - 2), 4);
    let star_pow_coef = Dd::ratio(n - 2, n);
    let star_pow = ((2 * n - 2) / (n - 2)) as u32;
    let quarter = Dd::ratio(1, 4);
    let two = Dd::new(2.0);
    let measures = |y: &[Dd], kappa: Dd| -> (Dd, Dd, Vec<Dd>) {
        let (v, dv) = y.split_at(m);
        let g = dot(v, v);
        let psi = dot(dv, dv) - lambda * g + psi_coef * g.powi(k_pow + 1);
        let dg = two * dot(v, dv);
        let star = quarter * dg * dg - star_quad * g * g - kappa * g + star_pow_coef * g.powi(star_pow);
        let mut k = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                k.push(v[i] * dv[j] - v[j] * dv[i]);
            }
        }
        (psi, star, k)
    };

    let mut y: Vec<Dd> = v0.iter().chain(dv0).map(|x| Dd::new(*x)).collect();
    let (psi0, _, k0) = measures(&y, Dd::default());
    let kappa = psi0;
    let (_, star0, _) = measures(&y, kappa);
    let mut out = Drifts { psi: 0.0, psi_star: 0.0, k: 0.0 };
    let mut work = Rk4Work::new(2 * m);
    let t0 = Dd::new(t_span[0]);
    let hd = Dd::new(h);
    for step in 0..steps {
        let t = t0 + Dd::new(step as f64) * hd;
        rk4_step(&rhs, t, &mut y, hd, &mut work);
        let (psi, star, k) = measures(&y, kappa);
        out.psi = out.psi.max((psi - psi0).abs().to_f64());
        out.psi_star = out.psi_star.max((star - star0).abs().to_f64());
        for (a, b) in k.iter().zip(&k0) {
            out.k = out.k.max((*a - *b).abs().to_f64());
        }
    }
    Ok(out)
}
