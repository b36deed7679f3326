use super::{AsymptError, AsymptFrame, EdgeFrame, RegimeTag};
use crate::numerics::{airy_pair, integrate};
use crate::semiclassics::{w_change_with_derivative, Edge, SemiError};
use rug::float::Constant;
use rug::{Complex, Float};
use serde::{Deserialize, Serialize};

/// Which evaluator to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Formula {
    /// Trigonometric form in (z₁, z₂).
    Bulk,
    /// |U|^{−1/4}-normalized cosine with the phase integral from z₂ᴺ.
    BulkSemiclassical,
    /// Exponentially small form beyond z₂ and in the gap (0, z₁).
    Outer,
    /// Airy form near one turning point.
    Edge(Edge),
    /// Regime chosen by [`AsymptFrame::classify`].
    Auto,
}

/// Formula value and the amplitude used to normalize errors.
#[derive(Clone, Debug)]
pub struct AsymptValue {
    pub value: Float,
    /// Oscillation envelope (bulk, edge) or |value| (outer).
    pub envelope: Float,
}

fn outside(z: &Float) -> AsymptError {
    AsymptError::OutsideRegime(format!("{:.12}", z.to_f64()))
}

fn q_of(frame: &AsymptFrame, x: &Float) -> Float {
    let s = &frame.semi;
    let p = s.prec();
    let v = Float::with_val(p, &s.g * Float::with_val(p, x.square_ref())) + &s.t;
    v / Float::with_val(p, &frame.sqrt_lpg * 2u32)
}

fn r_of(frame: &AsymptFrame, q: &Float) -> Float {
    let s = &frame.semi;
    let p = s.prec();
    let two_s = Float::with_val(p, &frame.sqrt_lpg * 2u32);
    let num = Float::with_val(p, &two_s - Float::with_val(p, &s.t * q));
    let den = Float::with_val(p, &two_s * q) - &s.t;
    num / den
}

/// Snap |v| to 1 when it exceeds 1 by at most eps.
fn clamp_unit(v: Float, eps: &Float, inside: bool) -> Float {
    let p = v.prec();
    let excess = Float::with_val(p, v.abs_ref()) - 1u32;
    let snap = if inside { excess.is_sign_positive() && excess <= *eps } else { excess.is_sign_negative() && -excess <= *eps };
    if snap {
        Float::with_val(p, if v.is_sign_negative() { -1 } else { 1 })
    } else {
        v
    }
}

fn parity_sign(n: usize) -> i32 {
    if n % 2 == 0 {
        1
    } else {
        -1
    }
}

fn apply_parity(frame: &AsymptFrame, z: &Float, v: AsymptValue) -> AsymptValue {
    if z.is_sign_negative() && frame.n() % 2 == 1 {
        AsymptValue { value: -v.value, envelope: v.envelope }
    } else {
        v
    }
}

fn half_index(frame: &AsymptFrame) -> Float {
    Float::with_val(frame.prec(), 2 * frame.n() + 1) / 4u32
}

fn bulk_parts(frame: &AsymptFrame, x: &Float) -> Result<AsymptValue, AsymptError> {
    let p = frame.prec();
    let eps = frame.semi.ctx.eps();
    let q = q_of(frame, x);
    if x.is_zero() || Float::with_val(p, q.abs_ref()) >= 1u32 {
        return Err(outside(x));
    }
    let r = clamp_unit(r_of(frame, &q), &eps, true);
    let phi = q.acos();
    let chi = r.acos();
    let sin_phi = Float::with_val(p, phi.sin_ref());
    let amp = Float::with_val(p, &frame.cn * 2u32) * Float::with_val(p, x.sqrt_ref()) / sin_phi.sqrt();
    let two_phi = Float::with_val(p, &phi * 2u32);
    let inner = Float::with_val(p, two_phi.sin_ref()) / 2u32 - &phi;
    let quarter_pi = Float::with_val(p, Constant::Pi) / 4u32;
    let phase = half_index(frame) * inner - Float::with_val(p, &chi * parity_sign(frame.n())) / 4u32 + quarter_pi;
    let value = Float::with_val(p, &amp * phase.cos());
    Ok(AsymptValue { value, envelope: amp })
}

/// 2Cₙ√z/√sin φ · cos[((n+½)/2)(sin 2φ/2 − φ) − (−1)ⁿχ/4 + π/4], φ = arccos q, χ = arccos r,
/// with Cₙ = (1/(2√π))(g/λ)^{1/4}. Defined where |q| < 1; negative z by parity.
pub fn bulk_psi(frame: &AsymptFrame, z: &Float) -> Result<Float, AsymptError> {
    Ok(evaluate(frame, z, Formula::Bulk)?.value)
}

/// |U_N(v)|/|v − z₂ᴺ| from the factored form of U_N.
fn reduced_un(frame: &AsymptFrame, v: &Float) -> Float {
    let s = &frame.semi;
    let tp = &s.turning;
    let p = s.prec();
    let v2 = Float::with_val(p, v.square_ref());
    let a = Float::with_val(p, &v2 - Float::with_val(p, tp.z1n.square_ref())).abs();
    let b = Float::with_val(p, v + &tp.z2n);
    let c = Float::with_val(p, &v2 - &tp.s3).abs();
    Float::with_val(p, s.g.square_ref()) / 4u32 * a * b * c
}

fn semiclassical_parts(frame: &AsymptFrame, x: &Float) -> Result<AsymptValue, AsymptError> {
    let s = &frame.semi;
    let tp = &s.turning;
    let p = s.prec();
    if !(*x > tp.z1n && *x < tp.z2n) {
        return Err(outside(x));
    }
    // ∫_{z₂ᴺ}^x √|U_N| = −2h^{3/2}∫₀¹ σ²√|Q(z₂ᴺ − hσ²)| dσ
    let h = Float::with_val(p, &tp.z2n - x);
    let q = integrate(
        |sig: &Float| {
            let s2 = Float::with_val(p, sig.square_ref());
            let v = Float::with_val(p, &tp.z2n - Float::with_val(p, &h * &s2));
            reduced_un(frame, &v).sqrt() * s2
        },
        &Float::with_val(p, 0),
        &Float::with_val(p, 1),
        &s.ctx,
    )?;
    let h32 = Float::with_val(p, &h * Float::with_val(p, h.sqrt_ref()));
    let phase_int = -(q.value * h32 * 2u32);
    let quarter_pi = Float::with_val(p, Constant::Pi) / 4u32;
    let phase = phase_int * s.scale() + quarter_pi;
    let x2 = Float::with_val(p, x.square_ref());
    let lin = Float::with_val(p, &s.g * &x2) + &s.t;
    let u = Float::with_val(p, &x2 * (Float::with_val(p, lin.square_ref()) / 4u32 - Float::with_val(p, &s.lambda * &s.g)));
    let pi = Float::with_val(p, Constant::Pi);
    let amp = Float::with_val(p, x * Float::with_val(p, &s.g / &pi).sqrt()) / u.abs().sqrt().sqrt();
    let value = Float::with_val(p, &amp * phase.cos());
    Ok(AsymptValue { value, envelope: amp })
}

/// z√(g/π)/|U(z)|^{1/4} · cos(N∫_{z₂ᴺ}^z |U_N(v)|^{1/2} dv + π/4) for z₁ᴺ < |z| < z₂ᴺ.
pub fn bulk_psi_semiclassical(frame: &AsymptFrame, z: &Float) -> Result<Float, AsymptError> {
    Ok(evaluate(frame, z, Formula::BulkSemiclassical)?.value)
}

fn outer_parts(frame: &AsymptFrame, x: &Float) -> Result<AsymptValue, AsymptError> {
    let s = &frame.semi;
    let p = s.prec();
    let n = s.n;
    let eps = s.ctx.eps();
    let q = q_of(frame, x);
    let qa = Float::with_val(p, q.abs_ref());
    if qa <= 1u32 {
        return Err(outside(x));
    }
    let sigma = if q.is_sign_positive() { 0 } else { n / 2 };
    let phi = qa.acosh();
    let half = half_index(frame);
    let two_phi = Float::with_val(p, &phi * 2u32);
    let decay = -(half * (Float::with_val(p, two_phi.sinh_ref()) / 2u32 - &phi));
    let pre = Float::with_val(p, &frame.cn / Float::with_val(p, phi.sinh_ref()).sqrt());
    let body = if x.is_zero() {
        if n % 2 == 1 {
            return Ok(AsymptValue { value: Float::with_val(p, 0), envelope: Float::with_val(p, 0) });
        }
        // √z·e^{χ/4} → (2|2√(λ′g) − tq|/g)^{1/4} as z → 0
        let two_s = Float::with_val(p, &frame.sqrt_lpg * 2u32);
        let lim = (two_s - Float::with_val(p, &s.t * &q)).abs() * 2u32 / &s.g;
        pre * lim.sqrt().sqrt() * decay.exp()
    } else {
        let r = clamp_unit(r_of(frame, &q), &eps, false);
        let chi = Float::with_val(p, r.abs_ref()).acosh();
        let expo = decay + Float::with_val(p, &chi * parity_sign(n)) / 4u32;
        pre * Float::with_val(p, x.sqrt_ref()) * expo.exp()
    };
    let value = if sigma % 2 == 1 { -body } else { body };
    let envelope = Float::with_val(p, value.abs_ref());
    Ok(AsymptValue { value, envelope })
}

/// (−1)^σ Cₙ√z/√sinh φ · exp{−((n+½)/2)(sinh 2φ/2 − φ) + (−1)ⁿχ/4}, φ = arccosh|q|,
/// χ = arccosh|r|, σ = 0 beyond z₂ and ⌊n/2⌋ in the gap. Defined where |q| > 1.
pub fn outer_psi(frame: &AsymptFrame, z: &Float) -> Result<Float, AsymptError> {
    Ok(evaluate(frame, z, Formula::Outer)?.value)
}

/// √(Ai² + Ai′²/max(|x|, 1)) for x < 0, Ai(x) otherwise.
fn airy_envelope(x: &Float, ai: &Float, aip: &Float) -> Float {
    let p = x.prec();
    if x.is_sign_positive() {
        return Float::with_val(p, ai.abs_ref());
    }
    let ax = Float::with_val(p, x.abs_ref()).max(&Float::with_val(p, 1));
    (Float::with_val(p, ai.square_ref()) + Float::with_val(p, aip.square_ref()) / ax).sqrt()
}

fn edge_parts(frame: &AsymptFrame, x: &Float, edge: Edge) -> Result<AsymptValue, AsymptError> {
    let s = &frame.semi;
    let p = s.prec();
    let ef = EdgeFrame::new(frame, edge);
    let (w, wp) = match w_change_with_derivative(s, &Complex::with_val(p, x), edge) {
        Ok(v) => v,
        Err(SemiError::OutsideDomain(_)) => return Err(outside(x)),
        Err(e) => return Err(e.into()),
    };
    let n23 = Float::with_val(p, s.scale() * s.scale()).cbrt();
    let arg = Float::with_val(p, w.real() * &n23);
    let (ai, aip) = airy_pair(&arg, &s.ctx);
    let wpa = Float::with_val(p, wp.real().abs_ref());
    let pre = Float::with_val(p, &ef.dn * x) / wpa.sqrt();
    let value = Float::with_val(p, &pre * &ai);
    let envelope = Float::with_val(p, pre.abs_ref()) * airy_envelope(&arg, &ai, &aip);
    Ok(AsymptValue { value, envelope })
}

/// (Dₙz/√|w′(z)|)·Ai(N^{2/3}w(z)) with w the Airy change of variable at z_jᴺ.
/// Defined on the disk where w is analytic; negative z by parity.
pub fn edge_psi(frame: &AsymptFrame, z: &Float, edge: Edge) -> Result<Float, AsymptError> {
    Ok(evaluate(frame, z, Formula::Edge(edge))?.value)
}

/// The formula of the regime containing z.
pub fn psi_asympt(frame: &AsymptFrame, z: &Float) -> Result<Float, AsymptError> {
    Ok(evaluate(frame, z, Formula::Auto)?.value)
}

/// Value and envelope of the chosen formula at real z.
pub fn evaluate(frame: &AsymptFrame, z: &Float, formula: Formula) -> Result<AsymptValue, AsymptError> {
    let p = frame.prec();
    let x = Float::with_val(p, z.abs_ref());
    let formula = match formula {
        Formula::Auto => match frame.classify(z) {
            RegimeTag::Bulk => Formula::Bulk,
            RegimeTag::Outer => Formula::Outer,
            RegimeTag::Edge(e) => Formula::Edge(e),
        },
        f => f,
    };
    let v = match formula {
        Formula::Bulk => bulk_parts(frame, &x)?,
        Formula::BulkSemiclassical => semiclassical_parts(frame, &x)?,
        Formula::Outer => outer_parts(frame, &x)?,
        Formula::Edge(e) => edge_parts(frame, &x, e)?,
        Formula::Auto => unreachable!(),
    };
    Ok(apply_parity(frame, z, v))
}

/// ln of 2π√(Rₙ⁰)·exp[Nt²/(4g) − (Nλ/2)(1 + ln(g/λ))].
pub fn ln_hn_asympt(frame: &AsymptFrame) -> Float {
    let s = &frame.semi;
    let p = s.prec();
    let n = s.scale();
    let two_pi = Float::with_val(p, Constant::Pi) * 2u32;
    let a = Float::with_val(p, s.t.square_ref()) * n / Float::with_val(p, &s.g * 4u32);
    let lg = Float::with_val(p, &s.g / &s.lambda).ln() + 1u32;
    let b = Float::with_val(p, &s.lambda * n) / 2u32 * lg;
    two_pi.ln() + Float::with_val(p, s.rn0.ln_ref()) / 2u32 + a - b
}

/// 2π√(Rₙ⁰)·exp[Nt²/(4g) − (Nλ/2)(1 + ln(g/λ))].
pub fn hn_asympt(frame: &AsymptFrame) -> Float {
    ln_hn_asympt(frame).exp()
}
