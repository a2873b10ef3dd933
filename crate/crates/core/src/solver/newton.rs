use nalgebra::{DMatrix, DVector};

use super::{in_cone, sup, Branch, Problem, SolveResult, SolveStatus, SolverConfig, TRACE_LIMIT};
use crate::error::{domain, Error, Result};
use crate::grid::GridFunction;
use crate::scalar_model::{bracketed_root, Radii};

/// Sup norm of the Newton start: max(ρ2, root of a ρ^p - ρ = u0), i.e. ρ3/2
/// whenever the certificate holds. Defined beyond the threshold as well.
pub fn second_guess_radius(a: f64, b: f64, u0: f64, p: f64) -> Result<f64> {
    if !(a > 0.0) || !(b > 0.0) || !(u0 >= 0.0) || !(p > 1.0) {
        return domain(format!("invalid coefficients a = {a}, b = {b}, u0 = {u0}, p = {p}"));
    }
    let rho2 = (u0 / (b * (p - 1.0))).powf(1.0 / p);
    let f = |r: f64| a * r.powf(p) - r - u0;
    let df = |r: f64| a * p * r.powf(p - 1.0) - 1.0;
    let mut hi = 1.0f64.max(u0);
    while f(hi) <= 0.0 {
        hi *= 2.0;
    }
    let lo = (1.0 / (a * p)).powf(1.0 / (p - 1.0)).min(hi);
    Ok(rho2.max(bracketed_root(f, df, lo, hi)))
}

/// RMS norm, so deflation strength does not depend on the node count.
fn rms(v: &[f64]) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
}

/// Deflation factor Π (1/|u - u_k|^2 + 1) over the known solutions.
fn deflation(u: &[f64], known: &[&GridFunction]) -> f64 {
    known
        .iter()
        .map(|k| {
            let e: Vec<f64> = u.iter().zip(k.values()).map(|(a, b)| a - b).collect();
            let d2 = rms(&e).powi(2);
            1.0 / d2 + 1.0
        })
        .product()
}

/// Gradient of ln m for the RMS norm.
fn deflation_log_gradient(u: &[f64], known: &[&GridFunction]) -> Vec<f64> {
    let n = u.len() as f64;
    let mut g = vec![0.0; u.len()];
    for k in known {
        let e: Vec<f64> = u.iter().zip(k.values()).map(|(a, b)| a - b).collect();
        let d2 = rms(&e).powi(2);
        let scale = -2.0 / (n * d2 * (1.0 + d2));
        for (gi, ei) in g.iter_mut().zip(&e) {
            *gi += scale * ei;
        }
    }
    g
}

/// I - G diag(p u_+^{p-1})
pub(crate) fn jacobian(pb: &Problem, u: &[f64]) -> DMatrix<f64> {
    let a = pb.op.matrix();
    let n = u.len();
    let d: Vec<f64> = u.iter().map(|&v| pb.p * v.max(0.0).powf(pb.p - 1.0)).collect();
    DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } - a[(i, j)] * d[j])
}

/// Deflated Newton for F(u) = u - G(u_+^p) - u0 away from every solution in
/// `known`, starting from `start`.
pub(crate) fn deflated_newton(
    pb: &Problem,
    start: Vec<f64>,
    known: &[&GridFunction],
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, usize, Vec<f64>)> {
    let mut u = start;
    let mut f = pb.defect(&u);
    let mut trace = Vec::new();
    let merit = |u: &[f64], f: &[f64]| deflation(u, known) * rms(f);
    for it in 1..=cfg.max_newton {
        let lu = jacobian(pb, &u).lu();
        let rhs = DVector::from_iterator(f.len(), f.iter().map(|v| -v));
        let delta_f = lu.solve(&rhs).ok_or_else(|| Error::Singular("Newton Jacobian".into()))?;
        let g = deflation_log_gradient(&u, known);
        let gd: f64 = g.iter().zip(delta_f.iter()).map(|(a, b)| a * b).sum();
        let tau = if (1.0 - gd).abs() > 1e-12 { 1.0 / (1.0 - gd) } else { 1.0 };
        let delta: Vec<f64> = delta_f.iter().map(|v| tau * v).collect();

        let phi = merit(&u, &f);
        let mut lambda = 1.0;
        let (mut trial, mut ft);
        loop {
            trial = u.iter().zip(&delta).map(|(a, b)| a + lambda * b).collect::<Vec<_>>();
            ft = pb.defect(&trial);
            let ok = ft.iter().all(|v| v.is_finite()) && merit(&trial, &ft) <= (1.0 - 1e-4 * lambda) * phi;
            if ok || lambda < 1e-6 {
                break;
            }
            lambda *= 0.5;
        }
        if !ft.iter().all(|v| v.is_finite()) {
            return Err(Error::NoConvergence { iterations: it, last_step: f64::INFINITY });
        }
        let step = lambda * sup(&delta);
        if trace.len() < TRACE_LIMIT {
            trace.push(step);
        }
        u = trial;
        f = ft;
        if step <= cfg.step_tol && sup(&f) <= cfg.fp_tol {
            return Ok((u, it, trace));
        }
    }
    Err(Error::NoConvergence { iterations: cfg.max_newton, last_step: trace.last().copied().unwrap_or(f64::NAN) })
}

/// Starts tried after the first one fails, on a geometric ladder toward ρ2.
pub const START_LADDER: usize = 6;

/// Second solution by deflated Newton from the minimal one rescaled to
/// `guess_radius` (ρ3/2 for a certified instance). If that start does not
/// converge, smaller radii on a geometric ladder down to ρ2 (or 1.5 |known|
/// without radii) are tried in turn.
///
/// With radii available, the result must lie outside the ρ2-ball and at
/// distance more than (ρ2 - ρ1)/2 from `known`; otherwise it must be farther
/// than 10 `step_tol` and larger in sup norm.
pub fn newton_second(
    pb: &Problem,
    known: &SolveResult,
    guess_radius: f64,
    radii: Option<&Radii>,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    if !known.converged() {
        return domain("second branch needs a converged minimal solution");
    }
    let s = known.u.sup_norm();
    if s == 0.0 {
        return domain("minimal solution is zero; nothing to rescale");
    }
    if !(guess_radius > 0.0) || !guess_radius.is_finite() {
        return domain(format!("start radius {guess_radius} must be positive"));
    }
    let floor = radii.map_or(1.5 * s, |r| r.rho2).min(guess_radius);
    let mut last_err = None;
    for k in 0..=START_LADDER {
        let radius = guess_radius * (floor / guess_radius).powf(k as f64 / START_LADDER as f64);
        let start = known.u.values().iter().map(|v| v * radius / s).collect();
        match deflated_newton(pb, start, &[&known.u], cfg) {
            Ok((u, iterations, trace)) => {
                let u = GridFunction::new(pb.op.grid().clone(), u)?;
                let distance = u.distance(&known.u);
                let distinct = match radii {
                    Some(r) => distance > 0.5 * (r.rho2 - r.rho1) && u.sup_norm() > r.rho2,
                    None => distance > 10.0 * cfg.step_tol && u.sup_norm() > s,
                };
                if !distinct {
                    last_err = Some(Error::Collapse { distance });
                    continue;
                }
                let fixed_point_residual = pb.fixed_point_residual(u.values());
                let in_cone = in_cone(&u, &pb.cone)?;
                return Ok(SolveResult {
                    branch: Branch::Second,
                    status: SolveStatus::Converged,
                    sup_norm: u.sup_norm(),
                    fixed_point_residual,
                    strong_residual: None,
                    iterations,
                    in_cone,
                    monotone_violation: 0.0,
                    start_radius: Some(radius),
                    trace,
                    u,
                });
            }
            Err(e @ (Error::NoConvergence { .. } | Error::Singular(_))) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.expect("at least one start tried"))
}
