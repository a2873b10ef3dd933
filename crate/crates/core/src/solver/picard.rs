use super::{in_cone, sup, Branch, Problem, SolveResult, SolveStatus, SolverConfig, TRACE_LIMIT};
use crate::error::Result;
use crate::grid::GridFunction;

/// Monotone iteration u_{k+1} = G(u_k^p) + u0 from u = 0.
///
/// Divergence (sup norm above `bound`, or non-finite values) and an exhausted
/// iteration budget are reported through the status, not as errors.
pub fn picard_minimal(pb: &Problem, bound: f64, cfg: &SolverConfig) -> Result<SolveResult> {
    let grid = pb.op.grid().clone();
    let n = grid.len();
    let mut u = vec![0.0; n];
    let mut trace = Vec::new();
    let mut monotone_violation = 0.0f64;
    let mut status = SolveStatus::MaxIter;
    let mut iterations = 0;
    for k in 1..=cfg.max_picard {
        iterations = k;
        let bu = pb.op.apply_power(&u, pb.p);
        let next: Vec<f64> = bu.iter().zip(pb.u0.values()).map(|(a, b)| a + b).collect();
        let mut step = 0.0f64;
        for (a, b) in next.iter().zip(&u) {
            step = step.max((a - b).abs());
            monotone_violation = monotone_violation.max(b - a);
        }
        if trace.len() < TRACE_LIMIT {
            trace.push(step);
        }
        if next.iter().any(|v| !v.is_finite()) || sup(&next) > bound {
            status = SolveStatus::Diverged;
            // keep the last finite iterate for diagnostics
            if next.iter().all(|v| v.is_finite()) {
                u = next;
            }
            break;
        }
        u = next;
        if step < cfg.fp_tol {
            status = SolveStatus::Converged;
            break;
        }
    }
    let fixed_point_residual = pb.fixed_point_residual(&u);
    let u = GridFunction::new(grid, u)?;
    let in_cone = in_cone(&u, &pb.cone)?;
    Ok(SolveResult {
        branch: Branch::Minimal,
        status,
        sup_norm: u.sup_norm(),
        fixed_point_residual,
        strong_residual: None,
        iterations,
        in_cone,
        monotone_violation,
        start_radius: None,
        trace,
        u,
    })
}
