use serde::Serialize;

use super::Problem;
use crate::cone::sample_cone;
use crate::error::Result;
use crate::par::{map_indices, Execution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeResult {
    pub rho: f64,
    pub count: usize,
    pub min_t: f64,
    pub max_t: f64,
}

/// Extremes of |T u| = |G u^p + u0| over `count` cone samples with |u| = ρ.
pub fn krasnoselskii_probe(pb: &Problem, rho: f64, count: usize, seed: u64, exec: Execution) -> Result<ProbeResult> {
    let samples = sample_cone(pb.op.grid(), &pb.cone, pb.op.kernel().alpha(), rho, count, seed)?;
    let norms = map_indices(exec, samples.len(), |i| {
        let bu = pb.op.apply_power(samples[i].values(), pb.p);
        bu.iter().zip(pb.u0.values()).fold(0.0f64, |m, (a, b)| m.max((a + b).abs()))
    });
    Ok(ProbeResult {
        rho,
        count,
        min_t: norms.iter().copied().fold(f64::INFINITY, f64::min),
        max_t: norms.iter().copied().fold(0.0, f64::max),
    })
}
