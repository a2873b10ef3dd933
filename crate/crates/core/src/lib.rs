//! Numerical laboratory for the superlinear fractional Dirichlet problem
//!
//! ```text
//! (-Δ)^{α/2} u = u^p + h   on (-1, 1),     u = 0 outside,
//! ```
//!
//! recast as the Hammerstein fixed-point problem `u = G(u^p) + G h` on a cone
//! of nonnegative, symmetric, unimodal functions. The crate evaluates the
//! explicit kernels, computes the growth/coercivity constants that enter the
//! two-solution certificate `b |u0|^{p-1} < c_p`, and solves for both
//! solutions (monotone iteration for the minimal one, deflated Newton for the
//! second).
//!
//! Index-parallel work (kernel matrix rows, cone batteries, parameter sweeps)
//! runs on rayon when the `parallel` feature is enabled (the default) and
//! sequentially otherwise; results are identical either way.


pub mod cone;
pub mod error;
pub mod frackernel;
pub mod greenop;
pub mod grid;
pub mod par;
pub mod quadrature;
pub mod lemmas;
pub mod scalar_model;
pub mod solver;

pub mod special;


pub use cone::{check_membership, sample_cone, verify_invariance, ConeKind, ConeSpec, Membership};
pub use error::{Error, Result};
pub use frackernel::{
    frac_laplacian_pv, green_ball, green_interval, norm_const, poisson_ball, w_factor, KernelParams, PVConfig,
};
pub use greenop::{apply_green, coercivity_a, gamma_u, gamma_u_with, GammaUConfig, GreenOperator};
pub use grid::{make_grid, Grid, GridFunction, SharedGrid};
pub use par::Execution;
pub use scalar_model::{critical_constant, radii_certificate, scalar_roots, CertificateError, Radii, ScalarProblem};
pub use special::gamma_fn;
