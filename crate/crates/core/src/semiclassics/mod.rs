//! Semiclassical approximation of the Lax-pair solution: turning points, the
//! μ, ξ, d and a functions, the WKB matrix, Airy parametrices near the turning
//! points, and the piecewise solution Ψ⁰ with its jump and symmetry checks.

mod checks;
mod frame;
mod functions;
mod turning;

pub use checks::{
    boundary_jump_norms, gap_jump_norms, phase_identity_check, phase_identity_contour, reflection_check,
    stokes_constants, tau_path_check, xi_quadrature, GapSample, JumpKind, JumpSample, PhaseResidual, StokesData,
};
pub use frame::{Ellipse, SemiFrame, TurningPoints, DEFAULT_ELLIPSE_RATIO};
pub use functions::{
    a0_matrix, a_from_matrix, a_func, d_func, gamma_lambda, lambda_n0, mu, nu, nu_squared, one_sided,
    one_sided_matrix, psi_wkb, t0_matrix, xi,
};
pub use turning::{
    classify, gauge_w, phi_model, psi0, psi0_in_region, w_change, w_change_with_derivative, Edge, Region,
    SideHint, Vertical,
};

use crate::numerics::NumericsError;
use crate::ortho::OrthoError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SemiError {
    #[error("point {0} lies on a cut; a side must be given")]
    OnCut(String),
    #[error("point {0} is within the guard radius of a turning point")]
    NearTurningPoint(String),
    #[error("point {0} lies inside the turning-point region")]
    InsideOmega(String),
    #[error("point {0} is outside the domain of the local change of variable")]
    OutsideDomain(String),
    #[error("point {0} lies on a region boundary; a side hint is required")]
    AmbiguousRegion(String),
    #[error("z = {0} is outside the bulk interval")]
    OutsideBulk(f64),
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Ortho(#[from] OrthoError),
}

pub(crate) fn fmt_z(z: &rug::Complex) -> String {
    format!("{:.6}{:+.6}i", z.real().to_f64(), z.imag().to_f64())
}
