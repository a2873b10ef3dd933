use serde::Serialize;

use super::certify::certify_unchecked;
use super::newton::{deflated_newton, newton_second, second_guess_radius};
use super::picard::picard_minimal;
use super::{Problem, SolverConfig};
use crate::error::{domain, Error, Result};
use crate::greenop::operator_norm_b;
use crate::grid::GridFunction;
use crate::par::{map_indices, Execution};
use crate::scalar_model::{bracketed_root, critical_constant, ScalarProblem};

/// Outcome of one forcing amplitude.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchPoint {
    pub lambda: f64,
    pub lhs: f64,
    pub certified: bool,
    pub minimal: Option<f64>,
    pub second: Option<f64>,
    /// Sup norms of further solutions found by a second deflation.
    pub extra: Vec<f64>,
    pub note: Option<String>,
}

impl BranchPoint {
    pub fn two_found(&self) -> bool {
        self.minimal.is_some() && self.second.is_some()
    }
}

/// A family of problems indexed by the forcing amplitude λ.
pub trait BranchModel: Sync {
    /// Largest λ passing b (λ |u0|)^{p-1} < c_p.
    fn lambda_cert(&self) -> f64;
    fn evaluate(&self, lambda: f64) -> BranchPoint;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub steps: usize,
    /// Relative width at which fold bisection stops.
    pub rel_width: f64,
    pub exec: Execution,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub lambda_cert: f64,
    pub fold_estimate: Option<f64>,
    pub fold_bracket: Option<[f64; 2]>,
    pub note: Option<String>,
    /// Grid points and bisection points, sorted by λ.
    pub points: Vec<BranchPoint>,
}

/// Evaluates `model` on an even λ grid (concurrently) and bisects the first
/// transition from "two solutions" to "fewer".
pub fn fold_sweep<M: BranchModel>(model: &M, cfg: &SweepConfig) -> Result<SweepRecord> {
    let SweepConfig { lambda_lo: lo, lambda_hi: hi, steps, rel_width, exec } = *cfg;
    if !(lo > 0.0) || !(hi > lo) || !hi.is_finite() {
        return domain(format!("empty or invalid amplitude range [{lo}, {hi}]"));
    }
    if steps < 2 {
        return domain("a sweep needs at least two amplitudes");
    }
    if !(rel_width > 0.0) {
        return domain("bisection width must be positive");
    }
    let lambdas: Vec<f64> = (0..steps).map(|k| lo + (hi - lo) * k as f64 / (steps - 1) as f64).collect();
    let mut points = map_indices(exec, steps, |k| model.evaluate(lambdas[k]));

    let prefix = points.iter().take_while(|pt| pt.two_found()).count();
    let mut record = SweepRecord {
        lambda_cert: model.lambda_cert(),
        fold_estimate: None,
        fold_bracket: None,
        note: None,
        points: Vec::new(),
    };
    if prefix == 0 {
        record.note = Some("no amplitude in range has two solutions".into());
    } else if prefix == steps {
        record.note = Some("two solutions at every amplitude; fold lies above the range".into());
    } else {
        let (mut a, mut b) = (lambdas[prefix - 1], lambdas[prefix]);
        while b - a > rel_width * b {
            let mid = 0.5 * (a + b);
            let pt = model.evaluate(mid);
            if pt.two_found() {
                a = mid;
            } else {
                b = mid;
            }
            points.push(pt);
        }
        record.fold_estimate = Some(a);
        record.fold_bracket = Some([a, b]);
    }
    points.sort_by(|x, y| x.lambda.total_cmp(&y.lambda));
    record.points = points;
    Ok(record)
}

/// The scalar model u = b u^p + λ u0: solutions are the sign changes of the
/// defect around its minimizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarModel {
    pub b: f64,
    pub u0: f64,
    pub p: f64,
}

impl BranchModel for ScalarModel {
    fn lambda_cert(&self) -> f64 {
        let c = critical_constant(self.p).expect("validated power");
        (c / self.b).powf(1.0 / (self.p - 1.0)) / self.u0
    }

    fn evaluate(&self, lambda: f64) -> BranchPoint {
        let (b, p) = (self.b, self.p);
        let u0 = lambda * self.u0;
        let lhs = b * u0.powf(p - 1.0);
        let c = critical_constant(p).expect("validated power");
        let mut pt = BranchPoint {
            lambda,
            lhs,
            certified: lhs < c,
            minimal: None,
            second: None,
            extra: Vec::new(),
            note: None,
        };
        let prob = ScalarProblem { b, u0, p };
        let star = prob.ratio_minimizer();
        let f = |u: f64| prob.defect(u);
        if !(f(star) < 0.0) {
            pt.note = Some("defect nonnegative at its minimizer".into());
            return pt;
        }
        let df = |u: f64| b * p * u.powf(p - 1.0) - 1.0;
        pt.minimal = Some(bracketed_root(f, df, 0.0, star));
        let mut hi = 2.0 * star;
        while f(hi) <= 0.0 {
            hi *= 2.0;
        }
        pt.second = Some(bracketed_root(f, df, star, hi));
        pt
    }
}

/// The discretized boundary value problem with forcing λ h_base.
#[derive(Debug, Clone)]
pub struct OperatorModel<'a> {
    pub base: Problem<'a>,
    pub cfg: SolverConfig,
}

impl<'a> OperatorModel<'a> {
    pub fn new(base: Problem<'a>, cfg: SolverConfig) -> Result<Self> {
        if base.u0.sup_norm() == 0.0 {
            return domain("sweep needs a nonzero forcing profile");
        }
        Ok(Self { base, cfg })
    }

    fn try_evaluate(&self, lambda: f64, pt: &mut BranchPoint) -> Result<()> {
        let pb = self.base.scaled(lambda);
        let cert = certify_unchecked(&pb)?;
        pt.lhs = cert.lhs;
        pt.certified = cert.pass;
        let bound = cert.radii.map_or(self.cfg.blowup, |r| r.rho2);
        let minimal = picard_minimal(&pb, bound, &self.cfg)?;
        if !minimal.converged() {
            pt.note = Some(format!("picard {:?} after {} iterations", minimal.status, minimal.iterations));
            return Ok(());
        }
        pt.minimal = Some(minimal.sup_norm);
        let guess = second_guess_radius(cert.a_coerc, cert.b, cert.u0_sup, pb.p)?;
        let second = match newton_second(&pb, &minimal, guess, cert.radii.as_ref(), &self.cfg) {
            Ok(s) => s,
            Err(e) => {
                pt.note = Some(format!("newton: {e}"));
                return Ok(());
            }
        };
        pt.second = Some(second.sup_norm);
        // look once more, further out, with both known solutions deflated
        let start: Vec<f64> = second.u.values().iter().map(|v| 2.0 * v).collect();
        if let Ok((u, _, _)) = deflated_newton(&pb, start, &[&minimal.u, &second.u], &self.cfg) {
            let u = GridFunction::new(pb.op.grid().clone(), u)?;
            let gap = u.distance(&minimal.u).min(u.distance(&second.u));
            if gap > 1e3 * self.cfg.step_tol {
                pt.extra.push(u.sup_norm());
            }
        }
        Ok(())
    }
}

impl BranchModel for OperatorModel<'_> {
    fn lambda_cert(&self) -> f64 {
        let b = operator_norm_b(self.base.op);
        let c = critical_constant(self.base.p).expect("validated power");
        (c / b).powf(1.0 / (self.base.p - 1.0)) / self.base.u0.sup_norm()
    }

    fn evaluate(&self, lambda: f64) -> BranchPoint {
        let mut pt = BranchPoint {
            lambda,
            lhs: f64::NAN,
            certified: false,
            minimal: None,
            second: None,
            extra: Vec::new(),
            note: None,
        };
        if let Err(e) = self.try_evaluate(lambda, &mut pt) {
            pt.minimal = None;
            pt.second = None;
            pt.note = Some(match e {
                Error::NoConvergence { .. } => format!("no convergence: {e}"),
                e => e.to_string(),
            });
        }
        pt
    }
}
