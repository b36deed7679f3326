use super::params::WeightParams;
use super::OrthoError;
use crate::numerics::{integrate_ray, PrecisionCtx};
use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;

/// ∫₀^∞ s^k e^{-z s² - s⁴/2} ds.
fn moment(z: &Float, k: u32, ctx: &PrecisionCtx) -> Result<Float, OrthoError> {
    let p = ctx.bits;
    let q = integrate_ray(
        |s: &Float| {
            let s2 = Float::with_val(p, s * s);
            let e = -(Float::with_val(p, z * &s2) + Float::with_val(p, &s2 * &s2) / 2u32);
            s.clone().pow(k) * e.exp()
        },
        ctx,
    )?;
    Ok(q.value)
}

/// D_{-1/2}(z) and its derivative from (1/√π) e^{-z²/4} ∫₀^∞ e^{-zt-t²/2} t^{-1/2} dt,
/// integrated in s with t = s².
pub fn parabolic_cylinder_half(z: &Float, ctx: &PrecisionCtx) -> Result<(Float, Float), OrthoError> {
    let p = ctx.bits;
    let j0 = moment(z, 0, ctx)?;
    let j2 = moment(z, 2, ctx)?;
    let sqrt_pi = Float::with_val(p, Constant::Pi).sqrt();
    let quarter = (-Float::with_val(p, z * z) / 4u32).exp();
    let d = Float::with_val(p, &quarter * &j0) * 2u32 / &sqrt_pi;
    // d/dz [e^{-z²/4} I(z)] = e^{-z²/4}(-z/2 I - ∫ t^{1/2} ...) with I = 2 J0, ∫ t^{1/2} = 2 J2
    let di = -(Float::with_val(p, z * &j0) + Float::with_val(p, &j2 * 2u32));
    let dd = Float::with_val(p, &quarter * &di) / &sqrt_pi;
    Ok((d, dd))
}

/// D_{-1/2}(z) from √(2/π) e^{z²/4} ∫₀^∞ e^{-t²/2} cos(zt + π/4) t^{-1/2} dt.
pub fn parabolic_cylinder_half_cosine(z: &Float, ctx: &PrecisionCtx) -> Result<Float, OrthoError> {
    let p = ctx.bits;
    let quarter_pi = Float::with_val(p, Constant::Pi) / 4u32;
    let q = integrate_ray(
        |s: &Float| {
            let s2 = Float::with_val(p, s * s);
            let decay = (-Float::with_val(p, &s2 * &s2) / 2u32).exp();
            let arg = Float::with_val(p, z * &s2) + &quarter_pi;
            decay * arg.cos()
        },
        ctx,
    )?;
    let pre = (Float::with_val(p, 2) / Float::with_val(p, Constant::Pi)).sqrt();
    let grow = (Float::with_val(p, z * z) / 4u32).exp();
    Ok(pre * grow * q.value * 2u32)
}

/// R₁ = −(2/(Ng))^{1/2} d/dz ln[e^{z²/4} D_{-1/2}(z)] at z = t√(N/(2g)).
///
/// With I(z) = ∫ e^{-zt-t²/2} t^{-1/2} dt this is (2/(Ng))^{1/2}·J₂/J₀.
pub fn r1_closed_form(params: &WeightParams, ctx: &PrecisionCtx) -> Result<Float, OrthoError> {
    let p = ctx.bits;
    let g = params.g_at(ctx);
    let n = params.scale;
    let z = params.t_at(ctx) * (Float::with_val(p, n) / Float::with_val(p, &g * 2u32)).sqrt();
    let j0 = moment(&z, 0, ctx)?;
    let j2 = moment(&z, 2, ctx)?;
    let pref = (Float::with_val(p, 2) / Float::with_val(p, &g * n)).sqrt();
    Ok(pref * j2 / j0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn representations_agree() {
        let c = PrecisionCtx::default();
        for &z in &[-2.0, -0.5, 0.0, 1.0, 3.0] {
            let zf = c.real(z);
            let (a, _) = parabolic_cylinder_half(&zf, &c).unwrap();
            let b = parabolic_cylinder_half_cosine(&zf, &c).unwrap();
            let d = Float::with_val(c.bits, &a - &b).abs() / a.clone().abs();
            assert!(d < Float::with_val(c.bits, c.quad_rel_tol() * 1000u32), "z = {z}: {}", d.to_f64());
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let c = PrecisionCtx::default();
        let z = c.real(-1.3);
        let h = c.real(1) >> 40;
        let (_, d) = parabolic_cylinder_half(&z, &c).unwrap();
        let (p, _) = parabolic_cylinder_half(&Float::with_val(c.bits, &z + &h), &c).unwrap();
        let (m, _) = parabolic_cylinder_half(&Float::with_val(c.bits, &z - &h), &c).unwrap();
        let fd = (p - m) / (h * 2u32);
        assert!(Float::with_val(c.bits, &fd - &d).abs() < 1e-20);
    }

    #[test]
    fn large_scale_limit() {
        let c = PrecisionCtx::default();
        let p = WeightParams::from_f64(-4.0, 1.0, 4000).unwrap();
        let r1 = r1_closed_form(&p, &c).unwrap().to_f64();
        // |t|/g − 1/(|t|N) − 3g/(|t|³N²)
        let n = 4000.0;
        let expect = 4.0 - 1.0 / (4.0 * n) - 3.0 / (64.0 * n * n);
        assert!((r1 - expect).abs() < 1e-9);
    }
}
