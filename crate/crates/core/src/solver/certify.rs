use serde::Serialize;

use super::Problem;
use crate::cone::{check_membership, ConeKind};
use crate::error::{domain, Error, Result};
use crate::greenop::{coercivity_from_gamma, operator_norm_b};
use crate::scalar_model::{critical_constant, radii_certificate, CertificateError, Radii};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateStatus {
    Pass,
    ThresholdViolated,
    AtThreshold,
    /// h = 0: u = 0 solves the problem and the radii are undefined.
    Degenerate,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub b: f64,
    pub a_coerc: f64,
    pub c_p: f64,
    pub u0_sup: f64,
    pub lhs: f64,
    pub margin: f64,
    pub pass: bool,
    pub degenerate: bool,
    pub status: CertificateStatus,
    pub radii: Option<Radii>,
}

/// Checks the forcing hypothesis and evaluates b |u0|^{p-1} < c_p.
pub fn certify(pb: &Problem) -> Result<CertificateReport> {
    let shape = pb.cone.with_kind(ConeKind::SymmetricUnimodal);
    let m = check_membership(&pb.h, &shape)?;
    if !(m.nonneg && m.symmetric && m.unimodal) {
        return Err(Error::Hypothesis(format!(
            "forcing must be nonnegative, symmetric and unimodal (negative {:e}, asymmetry {:e}, monotonicity {:e})",
            m.worst_negative, m.worst_asymmetry, m.worst_monotonicity
        )));
    }
    certify_unchecked(pb)
}

pub(crate) fn certify_unchecked(pb: &Problem) -> Result<CertificateReport> {
    let kp = pb.op.kernel();
    let b = operator_norm_b(pb.op);
    let a_coerc = coercivity_from_gamma(pb.cone.gamma, pb.cone.a_half, pb.p, kp)?;
    let c_p = critical_constant(pb.p).map_err(|e| Error::Domain(e.to_string()))?;
    let u0_sup = pb.u0.sup_norm();
    let lhs = b * u0_sup.powf(pb.p - 1.0);
    let mut report = CertificateReport {
        b,
        a_coerc,
        c_p,
        u0_sup,
        lhs,
        margin: c_p - lhs,
        pass: false,
        degenerate: false,
        status: CertificateStatus::ThresholdViolated,
        radii: None,
    };
    match radii_certificate(a_coerc, b, u0_sup, pb.p) {
        Ok(r) => {
            report.pass = true;
            report.status = CertificateStatus::Pass;
            report.radii = Some(r);
        }
        Err(CertificateError::ZeroForcing) => {
            report.degenerate = true;
            report.status = CertificateStatus::Degenerate;
        }
        Err(CertificateError::AtThreshold { .. }) => report.status = CertificateStatus::AtThreshold,
        Err(CertificateError::ThresholdViolated { .. }) => {}
        Err(CertificateError::Invalid(msg)) => return Err(Error::Domain(msg)),
    }
    Ok(report)
}

/// Amplitude ε such that forcing ε h lands at lhs = fraction · c_p.
pub fn amplitude_for_fraction(pb: &Problem, fraction: f64) -> Result<f64> {
    if !(fraction > 0.0) || !fraction.is_finite() {
        return domain(format!("fraction {fraction} must be positive"));
    }
    let s = pb.u0.sup_norm();
    if s == 0.0 {
        return domain("zero forcing profile cannot be scaled to a target");
    }
    let b = operator_norm_b(pb.op);
    let c_p = critical_constant(pb.p).map_err(|e| Error::Domain(e.to_string()))?;
    Ok((fraction * c_p / b).powf(1.0 / (pb.p - 1.0)) / s)
}
