//! The real-line model `u = b u^p + u0`: threshold constant, roots and the
//! radii that drive the cone compression/expansion argument.

use serde::Serialize;
use thiserror::Error;

/// |b u0^{p-1} - c_p| at or below this counts as tangency.
pub const THRESHOLD_TOL: f64 = 1e-10;

/// Minimum slack required in each radii inequality.
pub const RADII_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertificateError {
    #[error("invalid coefficients: {0}")]
    Invalid(String),
    #[error("threshold violated: b*|u0|^(p-1) = {lhs} >= c_p = {c_p}")]
    ThresholdViolated { lhs: f64, c_p: f64 },
    #[error("at threshold: b*|u0|^(p-1) = {lhs} equals c_p = {c_p} within tolerance")]
    AtThreshold { lhs: f64, c_p: f64 },
    #[error("zero forcing: u = 0 is itself a solution and no inner radius exists")]
    ZeroForcing,
}

/// c_p = ((p-1)^{(1-p)/p} + (p-1)^{1/p})^{-p}.
pub fn critical_constant(p: f64) -> Result<f64, CertificateError> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(CertificateError::Invalid(format!("power p = {p} must exceed 1")));
    }
    let q = p - 1.0;
    let sum = q.powf((1.0 - p) / p) + q.powf(1.0 / p);
    Ok(sum.powf(-p))
}

/// `u = b u^p + u0` on the nonnegative half-line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalarProblem {
    pub b: f64,
    pub u0: f64,
    pub p: f64,
}

/// How the threshold comparison came out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Below,
    Threshold,
    Above,
}

impl ScalarProblem {
    pub fn new(b: f64, u0: f64, p: f64) -> Result<Self, CertificateError> {
        if !(b > 0.0) || !b.is_finite() {
            return Err(CertificateError::Invalid(format!("b = {b} must be positive")));
        }
        if !(u0 >= 0.0) || !u0.is_finite() {
            return Err(CertificateError::Invalid(format!("u0 = {u0} must be nonnegative")));
        }
        critical_constant(p)?;
        Ok(Self { b, u0, p })
    }

    /// b u0^{p-1}, the quantity compared against c_p.
    pub fn lhs(&self) -> f64 {
        self.b * self.u0.powf(self.p - 1.0)
    }

    pub fn regime(&self) -> Regime {
        let c = critical_constant(self.p).expect("validated on construction");
        let lhs = self.lhs();
        if (lhs - c).abs() <= THRESHOLD_TOL {
            Regime::Threshold
        } else if lhs < c {
            Regime::Below
        } else {
            Regime::Above
        }
    }

    /// b u^p + u0 - u
    pub fn defect(&self, u: f64) -> f64 {
        self.b * u.powf(self.p) + self.u0 - u
    }

    /// Minimizer of b u^{p-1} + u0/u, i.e. (u0 / (b (p-1)))^{1/p}.
    pub fn ratio_minimizer(&self) -> f64 {
        (self.u0 / (self.b * (self.p - 1.0))).powf(1.0 / self.p)
    }

    pub fn roots(&self) -> Vec<f64> {
        scalar_roots(self)
    }
}

/// All nonnegative roots of `u = b u^p + u0`, sorted.
///
/// At tangency (within [`THRESHOLD_TOL`]) the double root is reported once.
pub fn scalar_roots(prob: &ScalarProblem) -> Vec<f64> {
    let ScalarProblem { b, u0, p } = *prob;
    if u0 == 0.0 {
        return vec![0.0, b.powf(-1.0 / (p - 1.0))];
    }
    match prob.regime() {
        Regime::Above => Vec::new(),
        Regime::Threshold => vec![prob.ratio_minimizer()],
        Regime::Below => {
            let star = prob.ratio_minimizer();
            let f = |u: f64| prob.defect(u);
            let df = |u: f64| b * p * u.powf(p - 1.0) - 1.0;
            let lower = bracketed_root(f, df, 0.0, star);
            let mut hi = 2.0 * star;
            while f(hi) <= 0.0 {
                hi *= 2.0;
            }
            let upper = bracketed_root(f, df, star, hi);
            vec![lower, upper]
        }
    }
}

/// Bisection to relative width 1e-14 followed by a guarded Newton polish.
/// `f` must change sign on `[lo, hi]`.
pub(crate) fn bracketed_root<F, D>(f: F, df: D, mut lo: f64, mut hi: f64) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let flo = f(lo);
    let lo_sign = flo > 0.0;
    for _ in 0..2000 {
        if hi - lo <= 1e-14 * hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) > 0.0) == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    let mut fx = f(x).abs();
    for _ in 0..6 {
        let d = df(x);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let cand = x - f(x) / d;
        if !(cand >= lo && cand <= hi) {
            break;
        }
        let fc = f(cand).abs();
        if fc < fx {
            x = cand;
            fx = fc;
        } else {
            break;
        }
    }
    x
}

/// Nested radii ρ1 < ρ2 < ρ3 for compression on the ρ2-sphere and expansion
/// on the ρ1- and ρ3-spheres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Radii {
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
}

/// Deterministic radii for coefficients `a <= b`, forcing size `u0_norm`.
pub fn radii_certificate(a_coef: f64, b_coef: f64, u0_norm: f64, p: f64) -> Result<Radii, CertificateError> {
    if !(a_coef > 0.0) || !(b_coef > 0.0) || !a_coef.is_finite() || !b_coef.is_finite() {
        return Err(CertificateError::Invalid(format!("coefficients a = {a_coef}, b = {b_coef} must be positive")));
    }
    if a_coef > b_coef {
        return Err(CertificateError::Invalid(format!("coercivity a = {a_coef} exceeds growth b = {b_coef}")));
    }
    if !(u0_norm >= 0.0) || !u0_norm.is_finite() {
        return Err(CertificateError::Invalid(format!("|u0| = {u0_norm} must be nonnegative")));
    }
    let c_p = critical_constant(p)?;
    if u0_norm == 0.0 {
        return Err(CertificateError::ZeroForcing);
    }
    let prob = ScalarProblem { b: b_coef, u0: u0_norm, p };
    let lhs = prob.lhs();
    match prob.regime() {
        Regime::Above => return Err(CertificateError::ThresholdViolated { lhs, c_p }),
        Regime::Threshold => return Err(CertificateError::AtThreshold { lhs, c_p }),
        Regime::Below => {}
    }

    let rho2 = prob.ratio_minimizer();

    // b ρ^p + ρ = u0 has a unique positive root below u0
    let inner = |r: f64| b_coef * r.powf(p) + r - u0_norm;
    let inner_d = |r: f64| b_coef * p * r.powf(p - 1.0) + 1.0;
    let rho1 = 0.5 * bracketed_root(inner, inner_d, 0.0, u0_norm);

    // a ρ^p - ρ = u0 has a unique positive root
    let outer = |r: f64| a_coef * r.powf(p) - r - u0_norm;
    let outer_d = |r: f64| a_coef * p * r.powf(p - 1.0) - 1.0;
    let mut hi = 1.0f64.max(u0_norm);
    while outer(hi) <= 0.0 {
        hi *= 2.0;
    }
    let lo = (1.0 / (a_coef * p)).powf(1.0 / (p - 1.0)).min(hi);
    let root_a = bracketed_root(outer, outer_d, lo, hi);
    let rho3 = (2.0 * rho2).max(2.0 * root_a);

    let radii = Radii { rho1, rho2, rho3 };
    let slack = radii_slack(&radii, a_coef, b_coef, u0_norm, p);
    if slack.iter().any(|&s| s < RADII_MARGIN) {
        return Err(CertificateError::AtThreshold { lhs, c_p });
    }
    Ok(radii)
}

/// Slack in the three defining inequalities: `[u0 - bρ1^p - ρ1, ρ2 - u0 - bρ2^p,
/// aρ3^p - ρ3 - u0]`, each normalized by the radius involved.
pub fn radii_slack(r: &Radii, a_coef: f64, b_coef: f64, u0_norm: f64, p: f64) -> [f64; 3] {
    [
        (u0_norm - b_coef * r.rho1.powf(p) - r.rho1) / r.rho1.max(1.0),
        (r.rho2 - u0_norm - b_coef * r.rho2.powf(p)) / r.rho2.max(1.0),
        (a_coef * r.rho3.powf(p) - r.rho3 - u0_norm) / r.rho3.max(1.0),
    ]
}
