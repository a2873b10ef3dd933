//! Gauss–Legendre rules, adaptive panel integration and geometric grading.

use std::sync::OnceLock;

/// Gauss–Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

const MAX_CACHED: usize = 64;
static CACHE: [OnceLock<GaussLegendre>; MAX_CACHED + 1] = [const { OnceLock::new() }; MAX_CACHED + 1];

impl GaussLegendre {
    /// Builds the `m`-point rule by Newton iteration on P_m.
    pub fn new(m: usize) -> Self {
        assert!(m >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        let half = m.div_ceil(2);
        for i in 0..half {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(m, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[m - 1 - i] = x;
            weights[i] = w;
            weights[m - 1 - i] = w;
        }
        if m % 2 == 1 {
            nodes[m / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Shared rule for small orders; built once per process.
    pub fn cached(m: usize) -> &'static GaussLegendre {
        assert!(m <= MAX_CACHED, "cached rules go up to {MAX_CACHED} nodes");
        CACHE[m].get_or_init(|| GaussLegendre::new(m))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(c + h * x);
        }
        s * h
    }

    /// Calls `visit(y, weight)` for every mapped node on [a, b].
    pub fn for_each_point<F: FnMut(f64, f64)>(&self, a: f64, b: f64, mut visit: F) {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            visit(c + h * x, w * h);
        }
    }
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if m == 0 {
        return (1.0, 0.0);
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

const MAX_PANELS: usize = 100_000;

/// Adaptive Gauss–Legendre integration by panel bisection.
///
/// A panel is accepted when the `order`-point rule and the sum over its two
/// halves agree to `max(rel_tol * |whole|, abs_tol)` scaled by the panel's share
/// of the interval.
pub fn adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    order: usize,
) -> Integral {
    let rule = GaussLegendre::cached(order);
    let total_len = (b - a).abs();
    if total_len == 0.0 {
        return Integral { value: 0.0, error: 0.0 };
    }
    let whole = rule.integrate(&mut f, a, b);
    let mut stack = vec![(a, b, whole, 0u32)];
    let mut value = 0.0;
    let mut error = 0.0;
    let scale = whole.abs();
    let mut budget = MAX_PANELS;
    while let Some((lo, hi, est, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = rule.integrate(&mut f, lo, mid);
        let right = rule.integrate(&mut f, mid, hi);
        let refined = left + right;
        let diff = (refined - est).abs();
        let share = (hi - lo).abs() / total_len;
        let allowed = (rel_tol * scale.max(refined.abs())).max(abs_tol) * share;
        let roundoff = 8.0 * f64::EPSILON * (left.abs() + right.abs());
        budget = budget.saturating_sub(1);
        if diff <= allowed || diff <= roundoff || depth >= 48 || budget == 0 {
            value += refined;
            error += diff;
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    Integral { value, error }
}

/// Adaptive integration over a list of breakpoints.
pub fn adaptive_over<F: FnMut(f64) -> f64>(
    mut f: F,
    breaks: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    order: usize,
) -> Integral {
    let mut out = Integral { value: 0.0, error: 0.0 };
    for w in breaks.windows(2) {
        let part = adaptive(&mut f, w[0], w[1], rel_tol, abs_tol, order);
        out.value += part.value;
        out.error += part.error;
    }
    out
}

/// Panels on `[lo, hi]` geometrically graded toward the flagged ends.
///
/// Each graded panel is `ratio` times the size of its neighbour; grading stops
/// once a panel is shorter than `min_width`. With both ends flagged the interval
/// is split at its midpoint and each half graded toward its own end.
pub fn graded_panels(
    lo: f64,
    hi: f64,
    toward_lo: bool,
    toward_hi: bool,
    ratio: f64,
    min_width: f64,
) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    if hi <= lo {
        return out;
    }
    match (toward_lo, toward_hi) {
        (false, false) => out.push((lo, hi)),
        (true, false) => grade_toward_start(lo, hi, ratio, min_width, &mut out),
        (false, true) => {
            let mut tmp = Vec::new();
            grade_toward_start(-hi, -lo, ratio, min_width, &mut tmp);
            out.extend(tmp.into_iter().rev().map(|(a, b)| (-b, -a)));
        }
        (true, true) => {
            let mid = 0.5 * (lo + hi);
            out.extend(graded_panels(lo, mid, true, false, ratio, min_width));
            out.extend(graded_panels(mid, hi, false, true, ratio, min_width));
        }
    }
    out
}

fn grade_toward_start(lo: f64, hi: f64, ratio: f64, min_width: f64, out: &mut Vec<(f64, f64)>) {
    let len = hi - lo;
    let mut edges = vec![hi];
    let mut width = len;
    loop {
        width *= ratio;
        if width < min_width {
            break;
        }
        edges.push(lo + width);
    }
    edges.push(lo);
    edges.reverse();
    out.extend(edges.windows(2).map(|w| (w[0], w[1])));
}

/// Splits every panel into equal pieces no longer than `max_width(center)`.
pub fn subdivide<F: Fn(f64) -> f64>(panels: &[(f64, f64)], max_width: F) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(panels.len());
    for &(a, b) in panels {
        let cap = max_width(0.5 * (a + b));
        let pieces = ((b - a) / cap).ceil().max(1.0) as usize;
        let h = (b - a) / pieces as f64;
        for k in 0..pieces {
            let lo = a + h * k as f64;
            let hi = if k + 1 == pieces { b } else { a + h * (k + 1) as f64 };
            out.push((lo, hi));
        }
    }
    out
}
