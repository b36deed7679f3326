//! Christoffel–Darboux kernel of the first Ncut+1 wavefunctions, the finite-N
//! and limiting eigenvalue densities, and the bulk and edge scaling limits.

mod scaling;

pub use scaling::{airy_grid, airy_kernel, airy_scaled, sinc, sine_grid, sine_scaled, EdgeScalingFrame, KernelGrid, KernelManifest, KernelRow};

use crate::numerics::{NumericsError, PrecisionCtx};
use crate::ortho::{deriv_coefficients, psi_deriv_from_values, psi_values, OrthoError, RecurrenceTable, WeightParams};
use rug::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("z = w: use the diagonal formula")]
    DiagonalRequested,
    #[error("z0 = {0} is outside the support of the limiting density")]
    OutsideBulk(f64),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("output failed: {0}")]
    Report(String),
    #[error(transparent)]
    Ortho(#[from] OrthoError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// One kernel evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSample {
    pub z: f64,
    pub w: f64,
    pub value: f64,
}

fn check_cut(table: &RecurrenceTable, ncut: usize, extra: usize) -> Result<(), KernelError> {
    let need = ncut + extra;
    if need > table.max_degree() {
        return Err(OrthoError::IndexOutOfRange { n: need, max: table.max_degree() }.into());
    }
    Ok(())
}

/// ψ_{Ncut+1}(z)ψ_Ncut(w) − ψ_Ncut(z)ψ_{Ncut+1}(w).
pub fn t_numerator(table: &RecurrenceTable, ncut: usize, z: &Float, w: &Float) -> Result<Float, KernelError> {
    check_cut(table, ncut, 1)?;
    let p = table.bits;
    let a = psi_values(table, ncut + 1, z)?;
    let b = psi_values(table, ncut + 1, w)?;
    let x = Float::with_val(p, &a[ncut + 1] * &b[ncut]);
    let y = Float::with_val(p, &a[ncut] * &b[ncut + 1]);
    Ok(x - y)
}

/// Q(z, w) = √R_{Ncut+1}[ψ_{Ncut+1}(z)ψ_Ncut(w) − ψ_Ncut(z)ψ_{Ncut+1}(w)]/(z − w),
/// which equals Σ_{j=0}^{Ncut} ψⱼ(z)ψⱼ(w).
pub fn qn_kernel(table: &RecurrenceTable, ncut: usize, z: &Float, w: &Float) -> Result<Float, KernelError> {
    if z == w {
        return Err(KernelError::DiagonalRequested);
    }
    let p = table.bits;
    let num = t_numerator(table, ncut, z, w)?;
    let dz = Float::with_val(p, z - w);
    Ok(num * &table.sqrt_r[ncut + 1] / dz)
}

/// Σ_{j=0}^{Ncut} ψⱼ(z)ψⱼ(w) summed directly.
pub fn qn_kernel_sum(table: &RecurrenceTable, ncut: usize, z: &Float, w: &Float) -> Result<Float, KernelError> {
    check_cut(table, ncut, 0)?;
    let p = table.bits;
    let a = psi_values(table, ncut, z)?;
    let b = psi_values(table, ncut, w)?;
    Ok(a.iter().zip(&b).fold(Float::with_val(p, 0), |acc, (x, y)| acc + Float::with_val(p, x * y)))
}

/// Q(z, z) = √R_{Ncut+1}[ψ′_{Ncut+1}ψ_Ncut − ψ′_Ncutψ_{Ncut+1}] with exact ψ′.
/// Needs degrees up to Ncut + 4 in the table.
pub fn qn_diag(table: &RecurrenceTable, ncut: usize, z: &Float) -> Result<Float, KernelError> {
    check_cut(table, ncut, 4)?;
    deriv_coefficients(table, ncut + 1)?;
    let p = table.bits;
    let psi = psi_values(table, ncut + 4, z)?;
    let d0 = psi_deriv_from_values(table, ncut, &psi)?;
    let d1 = psi_deriv_from_values(table, ncut + 1, &psi)?;
    let v = Float::with_val(p, &d1 * &psi[ncut]) - Float::with_val(p, &d0 * &psi[ncut + 1]);
    Ok(v * &table.sqrt_r[ncut + 1])
}

/// Normalized counting density Q(z, z)/(Ncut + 1); integrates to 1.
pub fn density_pn(table: &RecurrenceTable, ncut: usize, z: &Float) -> Result<Float, KernelError> {
    Ok(qn_diag(table, ncut, z)? / (ncut as u32 + 1))
}

/// Turning points z₁ < z₂ of the limiting density at λ = 1.
pub fn support_edges(params: &WeightParams, ctx: &PrecisionCtx) -> Result<(Float, Float), KernelError> {
    let p = ctx.bits;
    let t = params.t_at(ctx);
    let g = params.g_at(ctx);
    let two_sg = Float::with_val(p, g.sqrt_ref()) * 2u32;
    if t >= Float::with_val(p, -&two_sg) {
        return Err(KernelError::InvalidParams(format!("t = {} is not below −2√g", t.to_f64())));
    }
    let z1 = (-Float::with_val(p, &t + &two_sg) / &g).sqrt();
    let z2 = (Float::with_val(p, &two_sg - &t) / &g).sqrt();
    Ok((z1, z2))
}

/// p(z) = (g|z|/2π)√((z² − z₁²)(z₂² − z²)) on the two cuts, 0 elsewhere.
pub fn density_limit(params: &WeightParams, z: &Float, ctx: &PrecisionCtx) -> Result<Float, KernelError> {
    let p = ctx.bits;
    let (z1, z2) = support_edges(params, ctx)?;
    let x = Float::with_val(p, z.abs_ref());
    if x <= z1 || x >= z2 {
        return Ok(Float::with_val(p, 0));
    }
    let g = params.g_at(ctx);
    let zz = Float::with_val(p, x.square_ref());
    let a = Float::with_val(p, &zz - Float::with_val(p, z1.square_ref()));
    let b = Float::with_val(p, z2.square_ref()) - &zz;
    let two_pi = Float::with_val(p, rug::float::Constant::Pi) * 2u32;
    Ok(Float::with_val(p, &g * &x) / two_pi * (a * b).sqrt())
}
