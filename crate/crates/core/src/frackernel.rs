//! Explicit kernels of the fractional Laplacian on the unit ball: Green
//! function, Poisson kernel, normalization constants and a principal-value
//! evaluator of (-Δ)^{α/2} for functions sampled on a grid.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::grid::GridFunction;
use crate::quadrature::GaussLegendre;
use crate::special::gamma_fn;

/// Range of α accepted by the one-dimensional solver path.
pub const SOLVER_ALPHA_RANGE: (f64, f64) = (1.05, 1.95);

/// Dimension and order of the operator, with the constants that depend on them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawKernelParams", into = "RawKernelParams")]
pub struct KernelParams {
    d: usize,
    alpha: f64,
    green_const: f64,
    poisson_const: f64,
    pv_const: f64,
}

#[derive(Serialize, Deserialize)]
struct RawKernelParams {
    d: usize,
    alpha: f64,
}

impl TryFrom<RawKernelParams> for KernelParams {
    type Error = Error;
    fn try_from(raw: RawKernelParams) -> Result<Self> {
        KernelParams::new(raw.d, raw.alpha)
    }
}

impl From<KernelParams> for RawKernelParams {
    fn from(kp: KernelParams) -> Self {
        RawKernelParams { d: kp.d, alpha: kp.alpha }
    }
}

impl KernelParams {
    /// Any dimension `d >= 1` and `alpha` in (0, 2).
    pub fn new(d: usize, alpha: f64) -> Result<Self> {
        if d == 0 {
            return domain("dimension must be at least 1");
        }
        if !(alpha > 0.0 && alpha < 2.0) {
            return domain(format!("alpha = {alpha} outside (0, 2)"));
        }
        let df = d as f64;
        let green_const = gamma_fn(df / 2.0)? / (2f64.powf(alpha) * PI.powf(df / 2.0) * gamma_fn(alpha / 2.0)?.powi(2));
        let poisson_const = gamma_fn(df / 2.0)? * PI.powf(-df / 2.0 - 1.0) * (PI * alpha / 2.0).sin();
        let pv_const = norm_const(d, -alpha)?;
        Ok(Self { d, alpha, green_const, poisson_const, pv_const })
    }

    /// d = 1 and alpha in [1.05, 1.95], as required by the Green operator and solver.
    pub fn for_solver(alpha: f64) -> Result<Self> {
        let (lo, hi) = SOLVER_ALPHA_RANGE;
        if !(alpha >= lo && alpha <= hi) {
            return domain(format!("alpha = {alpha} outside the solver range [{lo}, {hi}]"));
        }
        Self::new(1, alpha)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// c^d_α = Γ(d/2) / (2^α π^{d/2} Γ(α/2)^2)
    pub fn green_const(&self) -> f64 {
        self.green_const
    }

    /// C^d_α = Γ(d/2) π^{-d/2-1} sin(πα/2)
    pub fn poisson_const(&self) -> f64 {
        self.poisson_const
    }

    /// c_{d,-α}, the constant in front of the principal value.
    pub fn pv_const(&self) -> f64 {
        self.pv_const
    }

    pub(crate) fn require_solver_range(&self) -> Result<()> {
        let (lo, hi) = SOLVER_ALPHA_RANGE;
        if self.d != 1 || self.alpha < lo || self.alpha > hi {
            return domain(format!(
                "solver path needs d = 1 and alpha in [{lo}, {hi}], got d = {}, alpha = {}",
                self.d, self.alpha
            ));
        }
        Ok(())
    }
}

/// c_{d,γ} = Γ((d-γ)/2) / (2^γ π^{d/2} |Γ(γ/2)|).
pub fn norm_const(d: usize, gamma: f64) -> Result<f64> {
    let df = d as f64;
    let num = gamma_fn((df - gamma) / 2.0)?;
    let den = 2f64.powf(gamma) * PI.powf(df / 2.0) * gamma_fn(gamma / 2.0)?.abs();
    Ok(num / den)
}

/// Closed form of G_{B(0,1)} 1 at the origin:
/// Γ(d/2) / (2^α Γ(1 + α/2) Γ((d + α)/2)). The torsion function is this
/// constant times (1 - |x|^2)^{α/2}.
pub fn torsion_constant(kp: &KernelParams) -> f64 {
    let d = kp.d as f64;
    let a = kp.alpha;
    gamma_fn(d / 2.0).unwrap()
        / (2f64.powf(a) * gamma_fn(1.0 + a / 2.0).unwrap() * gamma_fn((d + a) / 2.0).unwrap())
}

fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// w(x, y) = (1 - |x|^2)(1 - |y|^2) / |x - y|^2; `+∞` on the diagonal,
/// 0 when either point lies on or outside the unit sphere.
pub fn w_factor(x: &[f64], y: &[f64]) -> f64 {
    let px = 1.0 - norm_sq(x);
    let py = 1.0 - norm_sq(y);
    if px <= 0.0 || py <= 0.0 {
        return 0.0;
    }
    let r = dist(x, y);
    if r == 0.0 {
        return f64::INFINITY;
    }
    px * py / (r * r)
}

const SERIES_SPLIT: f64 = 0.5;
const TAIL_SPLIT: f64 = 2.0;
const MAX_TERMS: usize = 400;

/// ∫_0^w r^{a-1} (1 + r)^{-h} dr with a = α/2 and h = d/2.
///
/// Binomial series on [0, 1/2], a 20-point Gauss–Legendre panel on [1/2, 2]
/// and the expansion in 1/r on [2, w].
pub fn inner_integral(w: f64, a: f64, h: f64) -> f64 {
    if !(w > 0.0) {
        return 0.0;
    }
    let mut s = head_series(w.min(SERIES_SPLIT), a, h);
    if w > SERIES_SPLIT {
        s += middle_panel(w.min(TAIL_SPLIT), a, h);
    }
    if w > TAIL_SPLIT {
        s += tail_series(w, a, h, false);
    }
    s
}

/// I(w) - w^e/e with e = a - h > 0, valid for w > 2 (including w = ∞).
fn inner_integral_rest(w: f64, a: f64, h: f64) -> f64 {
    head_series(SERIES_SPLIT, a, h) + middle_panel(TAIL_SPLIT, a, h) + tail_series(w, a, h, true)
}

fn head_series(m: f64, a: f64, h: f64) -> f64 {
    // Σ binom(-h, k) m^{k+a} / (k + a)
    let mut coef = 1.0;
    let mut pw = m.powf(a);
    let mut sum = 0.0;
    for k in 0..MAX_TERMS {
        let term = coef * pw / (k as f64 + a);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() && k > 2 {
            break;
        }
        coef *= (-h - k as f64) / (k as f64 + 1.0);
        pw *= m;
    }
    sum
}

fn middle_panel(hi: f64, a: f64, h: f64) -> f64 {
    GaussLegendre::cached(20).integrate(|r| r.powf(a - 1.0) * (1.0 + r).powf(-h), SERIES_SPLIT, hi)
}

fn tail_series(w: f64, a: f64, h: f64, drop_lead: bool) -> f64 {
    // (1 + r)^{-h} = Σ binom(-h, k) r^{-h-k} for r > 1
    let log_ratio = (w / TAIL_SPLIT).ln();
    let mut coef = 1.0;
    let mut sum = 0.0;
    for k in 0..MAX_TERMS {
        let e = a - h - k as f64;
        let base = TAIL_SPLIT.powf(e);
        let piece = if k == 0 && drop_lead {
            -base / e
        } else if e == 0.0 {
            log_ratio
        } else {
            base * (e * log_ratio).exp_m1() / e
        };
        let term = coef * piece;
        sum += term;
        if k > 2 && term.abs() <= 1e-17 * sum.abs().max(1e-300) {
            break;
        }
        coef *= (-h - k as f64) / (k as f64 + 1.0);
    }
    sum
}

/// Green function of the interval (-1, 1) for (-Δ)^{α/2} (d must be 1).
///
/// For α > 1 the kernel is continuous on the diagonal: the leading growth of
/// the inner integral is split off and combined analytically with the
/// |x - y|^{α-1} prefactor. For α <= 1 the diagonal value is `+∞`.
pub fn green_interval(x: f64, y: f64, kp: &KernelParams) -> f64 {
    debug_assert_eq!(kp.d, 1);
    if x.abs() >= 1.0 || y.abs() >= 1.0 {
        return 0.0;
    }
    let alpha = kp.alpha;
    let a = 0.5 * alpha;
    let px = (1.0 - x) * (1.0 + x);
    let py = (1.0 - y) * (1.0 + y);
    let r = (x - y).abs();
    if alpha > 1.0 {
        let s = a - 0.5;
        let lead = (px * py).powf(s) / s;
        if r == 0.0 {
            return kp.green_const * lead;
        }
        let w = px * py / (r * r);
        if w > TAIL_SPLIT {
            return kp.green_const * (lead + r.powf(alpha - 1.0) * inner_integral_rest(w, a, 0.5));
        }
        kp.green_const * r.powf(alpha - 1.0) * inner_integral(w, a, 0.5)
    } else {
        if r == 0.0 {
            return f64::INFINITY;
        }
        let w = px * py / (r * r);
        kp.green_const * r.powf(alpha - 1.0) * inner_integral(w, a, 0.5)
    }
}

/// Green function of the unit ball B(0, 1) ⊂ R^d.
pub fn green_ball(x: &[f64], y: &[f64], kp: &KernelParams) -> Result<f64> {
    if x.len() != kp.d || y.len() != kp.d {
        return domain(format!("points must have dimension {}", kp.d));
    }
    if kp.d == 1 {
        return Ok(green_interval(x[0], y[0], kp));
    }
    let px = 1.0 - norm_sq(x);
    let py = 1.0 - norm_sq(y);
    if px <= 0.0 || py <= 0.0 {
        return Ok(0.0);
    }
    let r = dist(x, y);
    if r == 0.0 {
        return Ok(f64::INFINITY);
    }
    let w = px * py / (r * r);
    Ok(kp.green_const * r.powf(kp.alpha - kp.d as f64) * inner_integral(w, 0.5 * kp.alpha, 0.5 * kp.d as f64))
}

/// Green function of the ball B(center, radius) in d = 1, by scaling.
pub fn green_shifted(x: f64, y: f64, center: f64, radius: f64, kp: &KernelParams) -> f64 {
    radius.powf(kp.alpha - 1.0) * green_interval((x - center) / radius, (y - center) / radius, kp)
}

/// Poisson kernel of the ball B(0, r): defined for |x| < r < |y|.
pub fn poisson_ball(x: &[f64], y: &[f64], r: f64, kp: &KernelParams) -> Result<f64> {
    if x.len() != kp.d || y.len() != kp.d {
        return domain(format!("points must have dimension {}", kp.d));
    }
    if !(r > 0.0) {
        return domain(format!("radius {r} must be positive"));
    }
    let nx = norm_sq(x);
    let ny = norm_sq(y);
    let r2 = r * r;
    if nx >= r2 {
        return domain("poisson kernel needs |x| < r");
    }
    if ny <= r2 {
        return domain("poisson kernel needs |y| > r");
    }
    let half = 0.5 * kp.alpha;
    Ok(kp.poisson_const * (r2 - nx).powf(half) / ((ny - r2).powf(half) * dist(x, y).powi(kp.d as i32)))
}

/// Discretization of the principal value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PVConfig {
    /// Inner cutoff; `None` means `eps_factor` times the local node spacing.
    pub epsilon: Option<f64>,
    pub eps_factor: f64,
    /// Degree of the local interpolant.
    pub order: usize,
}

impl Default for PVConfig {
    fn default() -> Self {
        Self { epsilon: None, eps_factor: 4.0, order: 3 }
    }
}

/// (-Δ)^{α/2} u at an interior point, for `u` extended by zero outside [-1, 1].
///
/// The integral is split at |y - x| = ε: outside, the piecewise local
/// interpolant is integrated panel by panel; inside, the even Taylor term
/// -u''(x) ε^{2-α} / (2 - α) replaces the singular part.
pub fn frac_laplacian_pv(u: &GridFunction, x: f64, kp: &KernelParams, cfg: &PVConfig) -> Result<f64> {
    if kp.d != 1 {
        return domain("principal value evaluator is one-dimensional");
    }
    if cfg.order == 0 {
        return domain("interpolant order must be at least 1");
    }
    let grid = u.grid();
    let vals = u.values();
    let h = grid.local_spacing(x);
    let eps = cfg.epsilon.unwrap_or(cfg.eps_factor * h);
    if !(eps > 0.0) {
        return domain("cutoff must be positive");
    }
    if !(x.abs() < 1.0) || 1.0 - x.abs() < 2.0 * h || x.abs() + eps >= 1.0 {
        return domain(format!("x = {x} too close to the boundary for cutoff {eps:e}"));
    }
    let alpha = kp.alpha;
    let nodes = grid.nodes();
    let k = grid.locate(x);
    let (ux, d2) = if nodes[k] == x && k > 0 {
        let (v0, _, l) = grid.local_poly(vals, k - 1, cfg.order, x);
        let (v1, _, r) = grid.local_poly(vals, k, cfg.order, x);
        (0.5 * (v0 + v1), 0.5 * (l + r))
    } else {
        let (v, _, dd) = grid.local_poly(vals, k, cfg.order, x);
        (v, dd)
    };

    let rule = GaussLegendre::cached(10);
    let (wlo, whi) = (x - eps, x + eps);
    let mut far = 0.0;
    for i in 0..grid.len() - 1 {
        let (lo, hi) = (nodes[i], nodes[i + 1]);
        let mut piece = |a: f64, b: f64| {
            if b > a {
                far += rule.integrate(|y| grid.local_poly(vals, i, cfg.order, y).0 * (x - y).abs().powf(-1.0 - alpha), a, b);
            }
        };
        piece(lo, hi.min(wlo));
        piece(lo.max(whi), hi);
    }
    let near = -d2 * eps.powf(2.0 - alpha) / (2.0 - alpha);
    Ok(kp.pv_const * (ux * 2.0 * eps.powf(-alpha) / alpha - far + near))
}
