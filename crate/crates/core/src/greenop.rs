//! Nyström discretization of the Green operator of (-1, 1) and the constants
//! it determines: growth `b`, kernel ratio `γ_U` and coercivity `a`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::frackernel::{green_interval, torsion_constant, KernelParams};
use crate::grid::{GridFunction, SharedGrid};
use crate::par::{map_indices, Execution};
use crate::quadrature::{adaptive, graded_panels, subdivide, GaussLegendre};

/// Quadrature layout for one matrix row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblyConfig {
    /// Geometric ratio between neighbouring graded panels.
    pub grading: f64,
    /// Grading stops below this panel width.
    pub min_width: f64,
    /// Gauss–Legendre points per panel.
    pub order: usize,
    /// Panels span at most this many local node spacings.
    pub spacings_per_panel: f64,
}

impl Default for AssemblyConfig {
    fn default() -> Self {
        Self { grading: 0.2, min_width: 1e-13, order: 16, spacings_per_panel: 3.0 }
    }
}

/// The matrix `A` with `(A f)_i ≈ ∫ G(x_i, y) f(y) dy`, where `f` is the
/// global polynomial interpolant of its node values.
#[derive(Debug, Clone)]
pub struct GreenOperator {
    grid: SharedGrid,
    kp: KernelParams,
    matrix: DMatrix<f64>,
    quadrature_error: f64,
}

impl GreenOperator {
    pub fn assemble(grid: SharedGrid, kp: KernelParams) -> Result<Self> {
        Self::assemble_with(grid, kp, Execution::default(), &AssemblyConfig::default())
    }

    pub fn assemble_with(grid: SharedGrid, kp: KernelParams, exec: Execution, cfg: &AssemblyConfig) -> Result<Self> {
        kp.require_solver_range()?;
        if !grid.is_chebyshev() {
            return domain("the Green operator needs a Chebyshev grid");
        }
        let n = grid.len();
        let mid = n / 2;
        let rows = map_indices(exec, mid + 1, |i| {
            if i == 0 {
                vec![0.0; n]
            } else {
                row_weights(&grid, &kp, grid.nodes()[i], cfg)
            }
        });
        let mut matrix = DMatrix::zeros(n, n);
        for (i, row) in rows.iter().enumerate() {
            for j in 0..n {
                matrix[(i, j)] = row[j];
                matrix[(n - 1 - i, n - 1 - j)] = row[j];
            }
        }
        for j in 0..mid {
            let v = 0.5 * (matrix[(mid, j)] + matrix[(mid, n - 1 - j)]);
            matrix[(mid, j)] = v;
            matrix[(mid, n - 1 - j)] = v;
        }

        let c = torsion_constant(&kp);
        let ones = DVector::from_element(n, 1.0);
        let torsion = &matrix * ones;
        let quadrature_error = grid
            .nodes()
            .iter()
            .zip(torsion.iter())
            .map(|(&x, &t)| (t - c * ((1.0 - x) * (1.0 + x)).powf(0.5 * kp.alpha())).abs() / c)
            .fold(0.0, f64::max);
        Ok(Self { grid, kp, matrix, quadrature_error })
    }

    pub fn grid(&self) -> &SharedGrid {
        &self.grid
    }

    pub fn kernel(&self) -> &KernelParams {
        &self.kp
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Relative sup-norm error of `A 1` against the closed-form torsion function.
    pub fn quadrature_error(&self) -> f64 {
        self.quadrature_error
    }

    pub fn apply_values(&self, f: &[f64]) -> Vec<f64> {
        let v = DVector::from_column_slice(f);
        (&self.matrix * v).iter().copied().collect()
    }

    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        if f.grid() != &self.grid && **f.grid() != *self.grid {
            return domain("grid function lives on a different grid");
        }
        GridFunction::new(self.grid.clone(), self.apply_values(f.values()))
    }

    /// B(u) = G(u_+^p)
    pub fn apply_power(&self, u: &[f64], p: f64) -> Vec<f64> {
        let up: Vec<f64> = u.iter().map(|&v| v.max(0.0).powf(p)).collect();
        self.apply_values(&up)
    }

    /// Best constant in |G u^p| <= b |u|^p over the cone: `max_i (A 1)_i`,
    /// attained by the constant function.
    pub fn growth_constant(&self) -> f64 {
        let n = self.grid.len();
        (0..n).map(|i| self.matrix.row(i).sum()).fold(f64::NEG_INFINITY, f64::max)
    }
}

fn row_weights(grid: &SharedGrid, kp: &KernelParams, x: f64, cfg: &AssemblyConfig) -> Vec<f64> {
    let n = grid.len();
    let mut panels = graded_panels(-1.0, x, true, true, cfg.grading, cfg.min_width);
    panels.extend(graded_panels(x, 1.0, true, true, cfg.grading, cfg.min_width));
    let panels = subdivide(&panels, |y| cfg.spacings_per_panel * grid.local_spacing(y));
    let rule = GaussLegendre::cached(cfg.order);
    let mut row = vec![0.0; n];
    let mut basis = vec![0.0; n];
    for (a, b) in panels {
        rule.for_each_point(a, b, |y, w| {
            let g = green_interval(x, y, kp);
            if g == 0.0 {
                return;
            }
            grid.lagrange_row(y, &mut basis);
            let s = w * g;
            for (r, l) in row.iter_mut().zip(&basis) {
                *r += s * l;
            }
        });
    }
    row
}

/// Convenience: assemble the operator and apply it once.
pub fn apply_green(f: &GridFunction, kp: &KernelParams) -> Result<GridFunction> {
    GreenOperator::assemble(f.grid().clone(), *kp)?.apply(f)
}

/// b = (G 1)(0) for the operator on the given grid.
pub fn operator_norm_b(op: &GreenOperator) -> f64 {
    op.growth_constant()
}

/// ∫_lo^hi G(x, y) dy by adaptive Gauss–Legendre on panels graded toward
/// the diagonal and toward ±1.
pub fn green_integral(x: f64, lo: f64, hi: f64, kp: &KernelParams) -> f64 {
    let mut breaks = vec![lo];
    if x > lo && x < hi {
        breaks.push(x);
    }
    breaks.push(hi);
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let sing_a = a == x || a <= -1.0;
        let sing_b = b == x || b >= 1.0;
        for (pa, pb) in graded_panels(a, b, sing_a, sing_b, 0.2, 1e-14) {
            total += adaptive(|y| green_interval(x, y, kp), pa, pb, 1e-13, 1e-17, 16).value;
        }
    }
    total
}

/// Sampling used to estimate γ_U.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaUConfig {
    /// Uniform points on [-a, a] (odd, so that 0 and ±a are included).
    pub x_points: usize,
    /// Interior Chebyshev points for y.
    pub y_points: usize,
    /// Extra points 1 - 10^{-k}, k = 1..=levels, graded toward ±1.
    pub boundary_levels: usize,
}

impl Default for GammaUConfig {
    fn default() -> Self {
        Self { x_points: 81, y_points: 401, boundary_levels: 10 }
    }
}

impl GammaUConfig {
    /// Doubles both sample grids.
    pub fn refined(&self) -> Self {
        Self {
            x_points: 2 * self.x_points - 1,
            y_points: 2 * self.y_points - 1,
            boundary_levels: self.boundary_levels + 2,
        }
    }
}

/// Estimate of the largest γ with inf_{x∈U} G(x,y) >= γ G(0,y) for all y,
/// U = (-a_half, a_half): the minimum of the ratio over the sample grids.
pub fn gamma_u(a_half: f64, kp: &KernelParams, cfg: &GammaUConfig) -> Result<f64> {
    gamma_u_with(a_half, kp, cfg, Execution::default())
}

pub fn gamma_u_with(a_half: f64, kp: &KernelParams, cfg: &GammaUConfig, exec: Execution) -> Result<f64> {
    kp.require_solver_range()?;
    if !(a_half > 0.0 && a_half < 1.0) {
        return domain(format!("half-width {a_half} outside (0, 1)"));
    }
    if cfg.x_points < 3 || cfg.y_points < 3 {
        return domain("gamma_U sample grids too small");
    }
    let mx = cfg.x_points;
    let xs: Vec<f64> = (0..mx).map(|k| a_half * (2.0 * k as f64 / (mx - 1) as f64 - 1.0)).collect();
    // G(x, y) = G(-x, -y) and the x-set is symmetric, so y >= 0 suffices
    let mut ys: Vec<f64> = (0..cfg.y_points)
        .map(|k| (std::f64::consts::PI * k as f64 / (2 * (cfg.y_points - 1)) as f64).sin())
        .filter(|&y| y < 1.0)
        .collect();
    ys.extend(xs.iter().copied().filter(|&x| x >= 0.0));
    ys.extend((1..=cfg.boundary_levels).map(|k| 1.0 - 10f64.powi(-(k as i32))));
    ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ys.dedup();
    let ratios = map_indices(exec, ys.len(), |j| {
        let y = ys[j];
        let g0 = green_interval(0.0, y, kp);
        xs.iter().map(|&x| green_interval(x, y, kp)).fold(f64::INFINITY, f64::min) / g0
    });
    Ok(ratios.into_iter().fold(f64::INFINITY, f64::min).min(1.0))
}

/// a = γ_U^p ∫_{-a}^{a} G(0, y) dy with γ_U from [`gamma_u`].
pub fn coercivity_a(a_half: f64, p: f64, kp: &KernelParams) -> Result<f64> {
    let g = gamma_u(a_half, kp, &GammaUConfig::default())?;
    coercivity_from_gamma(g, a_half, p, kp)
}

pub fn coercivity_from_gamma(gamma: f64, a_half: f64, p: f64, kp: &KernelParams) -> Result<f64> {
    if !(p > 1.0) {
        return domain(format!("power p = {p} must exceed 1"));
    }
    if !(a_half > 0.0 && a_half < 1.0) {
        return domain(format!("half-width {a_half} outside (0, 1)"));
    }
    Ok(gamma.powf(p) * 2.0 * green_integral(0.0, 0.0, a_half, kp))
}
