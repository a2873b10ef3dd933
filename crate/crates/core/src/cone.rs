//! The cone of nonnegative, symmetric, unimodal grid functions whose
//! infimum over U = (-a, a) is at least γ times their supremum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::greenop::GreenOperator;
use crate::grid::{GridFunction, SharedGrid};
use crate::par::{map_indices, Execution};

/// Which shape constraints enter membership.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeKind {
    /// Nonnegative, symmetric, unimodal, ratio condition.
    SymmetricUnimodal,
    /// Nonnegative and ratio condition only (general Hammerstein setting).
    RatioOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeSpec {
    pub a_half: f64,
    pub gamma: f64,
    /// Relative tolerance (multiplies the sup norm).
    pub tol: f64,
    pub kind: ConeKind,
}

impl ConeSpec {
    pub fn new(a_half: f64, gamma: f64, tol: f64) -> Result<Self> {
        if !(a_half > 0.0 && a_half < 1.0) {
            return domain(format!("half-width {a_half} outside (0, 1)"));
        }
        if !(gamma > 0.0 && gamma <= 1.0) {
            return domain(format!("ratio constant {gamma} outside (0, 1]"));
        }
        if !(tol >= 0.0) {
            return domain(format!("tolerance {tol} must be nonnegative"));
        }
        Ok(Self { a_half, gamma, tol, kind: ConeKind::SymmetricUnimodal })
    }

    pub fn with_kind(mut self, kind: ConeKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }
}

/// Per-property verdicts and the worst violation of each, relative to the
/// sup norm (zero when the property holds exactly).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Membership {
    pub nonneg: bool,
    pub symmetric: bool,
    pub unimodal: bool,
    pub ratio_ok: bool,
    pub member: bool,
    pub worst_negative: f64,
    pub worst_asymmetry: f64,
    pub worst_monotonicity: f64,
    pub worst_ratio: f64,
}

/// Checks every cone property of `u` within `spec.tol * |u|`.
pub fn check_membership(u: &GridFunction, spec: &ConeSpec) -> Result<Membership> {
    let grid = u.grid();
    if !grid.is_symmetric() {
        return Err(Error::Grid("cone membership needs a grid symmetric about 0".into()));
    }
    let s = u.sup_norm();
    if s == 0.0 {
        return Ok(Membership {
            nonneg: true,
            symmetric: true,
            unimodal: true,
            ratio_ok: true,
            member: true,
            worst_negative: 0.0,
            worst_asymmetry: 0.0,
            worst_monotonicity: 0.0,
            worst_ratio: 0.0,
        });
    }
    let v = u.values();
    let x = grid.nodes();
    let n = v.len();

    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let worst_negative = (-min).max(0.0) / s;

    let worst_asymmetry = (0..n / 2).map(|i| (v[i] - v[n - 1 - i]).abs()).fold(0.0, f64::max) / s;

    let mut worst_monotonicity = 0.0f64;
    for i in 0..n - 1 {
        let diff = v[i + 1] - v[i];
        let violation = if x[i + 1] <= 0.0 { -diff } else { diff };
        worst_monotonicity = worst_monotonicity.max(violation);
    }
    worst_monotonicity /= s;

    let inner_min = x
        .iter()
        .zip(v)
        .filter(|(&xi, _)| xi.abs() <= spec.a_half)
        .map(|(_, &vi)| vi)
        .fold(f64::INFINITY, f64::min);
    let worst_ratio = ((spec.gamma * max - inner_min) / s).max(0.0);

    let nonneg = worst_negative <= spec.tol;
    let symmetric = worst_asymmetry <= spec.tol;
    let unimodal = worst_monotonicity <= spec.tol;
    let ratio_ok = worst_ratio <= spec.tol;
    let shape = match spec.kind {
        ConeKind::SymmetricUnimodal => symmetric && unimodal,
        ConeKind::RatioOnly => true,
    };
    Ok(Membership {
        nonneg,
        symmetric,
        unimodal,
        ratio_ok,
        member: nonneg && ratio_ok && shape,
        worst_negative,
        worst_asymmetry,
        worst_monotonicity,
        worst_ratio,
    })
}

/// Largest profile exponent β with (1 - a^2)^β >= γ, capped at 3.
fn max_profile_exponent(spec: &ConeSpec, alpha: f64) -> f64 {
    let limit = spec.gamma.ln() / (1.0 - spec.a_half * spec.a_half).ln();
    limit.min(3.0).max(0.5 * alpha)
}

/// `count` cone members of sup norm `rho`: random convex mixtures of
/// (1 - x^2)^β with β in [α/2, β_max], rescaled. Deterministic in `seed`.
pub fn sample_cone(
    grid: &SharedGrid,
    spec: &ConeSpec,
    alpha: f64,
    rho: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<GridFunction>> {
    if !(rho > 0.0) || !rho.is_finite() {
        return domain(format!("sample radius {rho} must be positive"));
    }
    let lo = 0.5 * alpha;
    let hi = max_profile_exponent(spec, alpha);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let parts = rng.gen_range(1..=3);
        let mix: Vec<(f64, f64)> = (0..parts)
            .map(|_| {
                let beta = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
                (rng.gen_range(0.05..1.0), beta)
            })
            .collect();
        let raw: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|&x| {
                let base = (1.0 - x) * (1.0 + x);
                mix.iter().map(|&(c, b)| c * base.powf(b)).sum()
            })
            .collect();
        let peak = raw.iter().copied().fold(0.0, f64::max);
        let values = raw.into_iter().map(|v| rho * (v / peak)).collect();
        out.push(GridFunction::new(grid.clone(), values)?);
    }
    Ok(out)
}

/// One sample whose image left the cone.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvarianceViolation {
    pub index: usize,
    pub membership: Membership,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub count: usize,
    pub p: f64,
    pub spec: ConeSpec,
    pub inputs_in_cone: usize,
    pub violations: Vec<InvarianceViolation>,
    pub worst_negative: f64,
    pub worst_asymmetry: f64,
    pub worst_monotonicity: f64,
    pub worst_ratio: f64,
}

impl InvarianceReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Applies B(u) = G(u^p) to `count` cone samples and checks each image.
pub fn verify_invariance(
    op: &GreenOperator,
    p: f64,
    spec: &ConeSpec,
    count: usize,
    seed: u64,
    exec: Execution,
) -> Result<InvarianceReport> {
    if !(p > 1.0) {
        return domain(format!("power p = {p} must exceed 1"));
    }
    let grid = op.grid();
    let samples = sample_cone(grid, spec, op.kernel().alpha(), 1.0, count, seed)?;
    let checks = map_indices(exec, samples.len(), |i| -> Result<(bool, Membership)> {
        let input = check_membership(&samples[i], spec)?.member;
        let image = GridFunction::new(grid.clone(), op.apply_power(samples[i].values(), p))?;
        Ok((input, check_membership(&image, spec)?))
    });
    let mut report = InvarianceReport {
        count,
        p,
        spec: *spec,
        inputs_in_cone: 0,
        violations: Vec::new(),
        worst_negative: 0.0,
        worst_asymmetry: 0.0,
        worst_monotonicity: 0.0,
        worst_ratio: 0.0,
    };
    for (index, c) in checks.into_iter().enumerate() {
        let (input, m) = c?;
        report.inputs_in_cone += input as usize;
        report.worst_negative = report.worst_negative.max(m.worst_negative);
        report.worst_asymmetry = report.worst_asymmetry.max(m.worst_asymmetry);
        report.worst_monotonicity = report.worst_monotonicity.max(m.worst_monotonicity);
        report.worst_ratio = report.worst_ratio.max(m.worst_ratio);
        if !m.member {
            report.violations.push(InvarianceViolation { index, membership: m });
        }
    }
    Ok(report)
}
