//! Two-solution solver: certificate, monotone iteration for the minimal
//! solution, deflated Newton for the second one, sphere probes, strong
//! residuals and a fold sweep in the forcing amplitude.

mod certify;
mod newton;
mod picard;
mod probe;
mod sweep;

pub use certify::{amplitude_for_fraction, certify, CertificateReport, CertificateStatus};
pub use newton::{newton_second, second_guess_radius};
pub use picard::picard_minimal;
pub use probe::{krasnoselskii_probe, ProbeResult};
pub use sweep::{fold_sweep, BranchModel, BranchPoint, OperatorModel, ScalarModel, SweepConfig, SweepRecord};

use serde::{Deserialize, Serialize};

use crate::cone::{check_membership, ConeSpec};
use crate::error::{domain, Error, Result};
use crate::frackernel::{frac_laplacian_pv, PVConfig};
use crate::greenop::GreenOperator;
use crate::grid::GridFunction;

/// Interior points where the strong residual is measured.
pub const PROBE_POINTS: [f64; 5] = [-0.5, -0.25, 0.0, 0.25, 0.5];

/// Step norms kept in a [`SolveResult`] trace.
pub const TRACE_LIMIT: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Sup-norm tolerance on the fixed-point step / residual.
    pub fp_tol: f64,
    /// Sup-norm tolerance on the final Newton step.
    pub step_tol: f64,
    pub max_picard: usize,
    pub max_newton: usize,
    /// Picard is declared divergent above this sup norm when no certificate
    /// radius is available.
    pub blowup: f64,
    pub pv: PVConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            fp_tol: 1e-9,
            step_tol: 1e-10,
            max_picard: 100_000,
            max_newton: 60,
            blowup: 1e8,
            pv: PVConfig::default(),
        }
    }
}

/// u = G(u^p) + G h on a fixed operator, with the cone used for diagnostics.
#[derive(Debug, Clone)]
pub struct Problem<'a> {
    pub op: &'a GreenOperator,
    pub h: GridFunction,
    pub u0: GridFunction,
    pub p: f64,
    pub cone: ConeSpec,
}

impl<'a> Problem<'a> {
    pub fn new(op: &'a GreenOperator, h: GridFunction, p: f64, cone: ConeSpec) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return domain(format!("power p = {p} must exceed 1"));
        }
        op.kernel().require_solver_range()?;
        let u0 = op.apply(&h)?;
        Ok(Self { op, h, u0, p, cone })
    }

    /// Same problem with forcing λ h.
    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            op: self.op,
            h: self.h.scaled(lambda),
            u0: self.u0.scaled(lambda),
            p: self.p,
            cone: self.cone,
        }
    }

    /// u - G(u_+^p) - u0
    pub fn defect(&self, u: &[f64]) -> Vec<f64> {
        let bu = self.op.apply_power(u, self.p);
        u.iter().zip(&bu).zip(self.u0.values()).map(|((a, b), c)| a - b - c).collect()
    }

    pub fn fixed_point_residual(&self, u: &[f64]) -> f64 {
        sup(&self.defect(u))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Minimal,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    /// Sup norm left the admissible ball.
    Diverged,
    MaxIter,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveResult {
    #[serde(skip)]
    pub u: GridFunction,
    pub branch: Branch,
    pub status: SolveStatus,
    pub sup_norm: f64,
    pub fixed_point_residual: f64,
    pub strong_residual: Option<f64>,
    pub iterations: usize,
    pub in_cone: bool,
    /// Largest pointwise decrease between consecutive Picard iterates.
    pub monotone_violation: f64,
    /// Sup norm of the Newton start that converged.
    pub start_radius: Option<f64>,
    pub trace: Vec<f64>,
}

impl SolveResult {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

pub(crate) fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub(crate) fn in_cone(u: &GridFunction, cone: &ConeSpec) -> Result<bool> {
    Ok(check_membership(u, cone)?.member)
}

/// max over [`PROBE_POINTS`] of |(-Δ)^{α/2}u - u^p - h|.
pub fn residual_strong(pb: &Problem, u: &GridFunction, pv: &PVConfig) -> Result<f64> {
    if u.grid() != pb.op.grid() && **u.grid() != **pb.op.grid() {
        return Err(Error::Grid("solution lives on a different grid".into()));
    }
    let mut worst = 0.0f64;
    for &x in &PROBE_POINTS {
        let lap = frac_laplacian_pv(u, x, pb.op.kernel(), pv)?;
        let r = lap - u.eval(x).max(0.0).powf(pb.p) - pb.h.eval(x);
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

/// Fills in `strong_residual` on a converged result.
pub fn attach_strong_residual(pb: &Problem, result: &mut SolveResult, pv: &PVConfig) -> Result<()> {
    result.strong_residual = Some(residual_strong(pb, &result.u, pv)?);
    Ok(())
}
