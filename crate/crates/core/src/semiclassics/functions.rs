use super::turning::Vertical;
use super::{fmt_z, SemiError, SemiFrame};
use crate::numerics::Matrix2C;
use rug::float::Constant;
use rug::{Complex, Float};

pub(crate) fn cx(p: u32, v: &Float) -> Complex {
    Complex::with_val(p, v)
}

fn real_part_in(z: &Complex, lo: &Float, hi: &Float) -> bool {
    z.imag().is_zero() && {
        let a = Float::with_val(z.prec().0, z.real().abs_ref());
        a >= *lo && a <= *hi
    }
}

fn on_real_segment(z: &Complex, hi: &Float) -> bool {
    z.imag().is_zero() && Float::with_val(z.prec().0, z.real().abs_ref()) <= *hi
}

/// z ± i·ε_side.
pub(crate) fn shifted(frame: &SemiFrame, z: &Complex, side: Vertical, eps: &Float) -> Complex {
    let p = frame.prec();
    let mut w = Complex::with_val(p, z);
    match side {
        Vertical::Up => *w.mut_imag() += eps,
        Vertical::Down => *w.mut_imag() -= eps,
    }
    w
}

/// One-sided limit of `f` at `z` from `side`. Values at offsets ε, ε/2, ε/4
/// (ε = ε_side) are combined by Richardson extrapolation; the two first-order
/// extrapolants must agree to eps^{1/2}.
pub fn one_sided<F>(frame: &SemiFrame, z: &Complex, side: Vertical, f: F) -> Result<Complex, SemiError>
where
    F: Fn(&Complex) -> Result<Complex, SemiError>,
{
    let p = frame.prec();
    let e1 = frame.eps_side.clone();
    let e2 = Float::with_val(p, &e1 / 2u32);
    let e4 = Float::with_val(p, &e1 / 4u32);
    let v1 = f(&shifted(frame, z, side, &e1))?;
    let v2 = f(&shifted(frame, z, side, &e2))?;
    let v4 = f(&shifted(frame, z, side, &e4))?;
    let r1 = Complex::with_val(p, &v2 * 2u32) - &v1;
    let r2 = Complex::with_val(p, &v4 * 2u32) - &v2;
    check_step(frame, &Float::with_val(p, Complex::with_val(p, &r1 - &r2).abs_ref()), &r2, z)?;
    Ok((Complex::with_val(p, &r2 * 4u32) - r1) / 3u32)
}

/// Matrix version of [`one_sided`].
pub fn one_sided_matrix<F>(frame: &SemiFrame, z: &Complex, side: Vertical, f: F) -> Result<Matrix2C, SemiError>
where
    F: Fn(&Complex) -> Result<Matrix2C, SemiError>,
{
    let p = frame.prec();
    let e1 = frame.eps_side.clone();
    let e2 = Float::with_val(p, &e1 / 2u32);
    let e4 = Float::with_val(p, &e1 / 4u32);
    let m1 = f(&shifted(frame, z, side, &e1))?;
    let m2 = f(&shifted(frame, z, side, &e2))?;
    let m4 = f(&shifted(frame, z, side, &e4))?;
    let two = Complex::with_val(p, 2);
    let r1 = m2.scale(&two).sub(&m1);
    let r2 = m4.scale(&two).sub(&m2);
    let scale = Complex::with_val(p, r2.max_abs());
    check_step(frame, &r1.sub(&r2).max_abs(), &scale, z)?;
    Ok(r2.scale(&Complex::with_val(p, 4)).sub(&r1).scale(&(Complex::with_val(p, 1) / 3u32)))
}

fn check_step(frame: &SemiFrame, diff: &Float, value: &Complex, z: &Complex) -> Result<(), SemiError> {
    let p = frame.prec();
    let mag = Float::with_val(p, value.abs_ref()).max(&Float::with_val(p, 1));
    let tol = frame.ctx.eps().sqrt() * mag;
    if *diff > tol {
        return Err(SemiError::OnCut(format!("{} (one-sided limit unstable)", fmt_z(z))));
    }
    Ok(())
}

/// A⁰(z): a₁₁ = αₙz − gz³/2, a₁₂ = √Rₙ⁰·gz², a₂₁ = −a₁₂, a₂₂ = −a₁₁.
pub fn a0_matrix(frame: &SemiFrame, z: &Complex) -> Matrix2C {
    let (a11, a12) = a0_entries(frame, z);
    Matrix2C::new(a11.clone(), a12.clone(), -a12, -a11)
}

pub(crate) fn a0_entries(frame: &SemiFrame, z: &Complex) -> (Complex, Complex) {
    let p = frame.prec();
    let z2 = Complex::with_val(p, z * z);
    let z3 = Complex::with_val(p, &z2 * z);
    let a11 = Complex::with_val(p, z * &frame.alpha) - Complex::with_val(p, &z3 * &frame.g) / 2u32;
    let coef = Float::with_val(p, frame.rn0.sqrt_ref()) * &frame.g;
    let a12 = Complex::with_val(p, &z2 * &coef);
    (a11, a12)
}

/// x(z) = (t + gz²)/(2√(λg)).
pub(crate) fn x_of(frame: &SemiFrame, z: &Complex) -> Complex {
    let p = frame.prec();
    let num = Complex::with_val(p, z * z) * &frame.g + &frame.t;
    num / Float::with_val(p, &frame.sqrt_lg * 2u32)
}

/// √(x² − 1) as the even function g·f₁f₂/(2√(λg)) with principal roots, so the
/// cuts are exactly [z₁, z₂] and [−z₂, −z₁] and the value is ~x at infinity.
pub(crate) fn joukowski(frame: &SemiFrame, z: &Complex) -> Complex {
    joukowski_with(frame, z, &frame.turning.z1, &frame.turning.z2)
}

fn joukowski_with(frame: &SemiFrame, z: &Complex, z1: &Float, z2: &Float) -> Complex {
    let p = frame.prec();
    let f1 = Complex::with_val(p, z - z1).sqrt() * Complex::with_val(p, z - z2).sqrt();
    let f2 = Complex::with_val(p, z + z1).sqrt() * Complex::with_val(p, z + z2).sqrt();
    let num = Complex::with_val(p, &f1 * &f2) * &frame.g;
    num / Float::with_val(p, &frame.sqrt_lg * 2u32)
}

fn check_cuts(frame: &SemiFrame, z: &Complex) -> Result<(), SemiError> {
    let tp = &frame.turning;
    if real_part_in(z, &tp.z1, &tp.z2) && z.real().clone().abs() != tp.z1 && z.real().clone().abs() != tp.z2 {
        return Err(SemiError::OnCut(fmt_z(z)));
    }
    Ok(())
}

/// μ(z) = (gz/2)·√((z² − z₁²)(z² − z₂²)), positive on (z₂, ∞).
pub fn mu(frame: &SemiFrame, z: &Complex) -> Result<Complex, SemiError> {
    check_cuts(frame, z)?;
    Ok(mu_raw(frame, z))
}

pub(crate) fn mu_raw(frame: &SemiFrame, z: &Complex) -> Complex {
    let p = frame.prec();
    Complex::with_val(p, z * &frame.sqrt_lg) * joukowski(frame, z)
}

/// ξ(z) = (λ/2)[x√(x²−1) − ln(x + √(x²−1))] with the single cut (−∞, z₂].
pub fn xi(frame: &SemiFrame, z: &Complex) -> Result<Complex, SemiError> {
    if z.imag().is_zero() && *z.real() <= frame.turning.z2 {
        return Err(SemiError::OnCut(fmt_z(z)));
    }
    Ok(xi_raw(frame, z))
}

pub(crate) fn xi_raw(frame: &SemiFrame, z: &Complex) -> Complex {
    let p = frame.prec();
    if z.real().is_zero() {
        // the imaginary axis is not a cut of ξ; use the limit from the right
        let mut w = Complex::with_val(p, z);
        *w.mut_real() += &frame.eps_side;
        return xi_raw(frame, &w);
    }
    let x = x_of(frame, z);
    let s = joukowski(frame, z);
    let mut log = Complex::with_val(p, &x + &s).ln();
    if z.real().is_sign_negative() {
        let two_pi = Float::with_val(p, Constant::Pi) * 2u32;
        if z.imag().is_sign_negative() {
            *log.mut_imag() -= two_pi;
        } else {
            *log.mut_imag() += two_pi;
        }
    }
    let bracket = Complex::with_val(p, &x * &s) - log;
    bracket * Float::with_val(p, &frame.lambda / 2u32)
}

/// γ = t²/(8g) − (λ/4)ln(g/λ) − λ/4.
pub fn gamma_lambda(frame: &SemiFrame) -> Float {
    frame.gamma.clone()
}

/// λₙ⁰ = Nγ + (ln 2π)/2 + (ln Rₙ⁰)/4.
pub fn lambda_n0(frame: &SemiFrame) -> Float {
    frame.lambda_n0.clone()
}

/// a(z) = (μ − a₁₁⁰)/a₁₂⁰ in the closed form (1/z)(λ/g)^{1/4}(x + √(x²−1) + c)/√c.
pub fn a_func(frame: &SemiFrame, z: &Complex) -> Result<Complex, SemiError> {
    check_cuts(frame, z)?;
    if z.is_zero() {
        return Err(SemiError::OnCut(fmt_z(z)));
    }
    Ok(a_raw(frame, z, &joukowski(frame, z)))
}

pub(crate) fn a_raw(frame: &SemiFrame, z: &Complex, s: &Complex) -> Complex {
    let p = frame.prec();
    let k = Float::with_val(p, &frame.lambda / &frame.g).sqrt().sqrt() / Float::with_val(p, frame.cycle_c.sqrt_ref());
    let num = Complex::with_val(p, x_of(frame, z) + s) + &frame.cycle_c;
    num * k / z
}

/// (μ − a₁₁⁰)/a₁₂⁰ computed directly from A⁰ and μ.
pub fn a_from_matrix(frame: &SemiFrame, z: &Complex) -> Result<Complex, SemiError> {
    let p = frame.prec();
    let m = mu(frame, z)?;
    let (a11, a12) = a0_entries(frame, z);
    Ok(Complex::with_val(p, &m - &a11) / a12)
}

/// d(z) = −½ ln a(z), principal logarithm; cut on the real segment [−z₂, z₂].
pub fn d_func(frame: &SemiFrame, z: &Complex) -> Result<Complex, SemiError> {
    if on_real_segment(z, &frame.turning.z2) {
        return Err(SemiError::OnCut(fmt_z(z)));
    }
    Ok(-(a_raw(frame, z, &joukowski(frame, z)).ln() / 2u32))
}

/// T₀(z) = ((μ − a₁₁⁰)/2μ)^{1/2}[[1, 1/a],[1/a, 1]], positive for z > z₂.
pub fn t0_matrix(frame: &SemiFrame, z: &Complex) -> Result<Matrix2C, SemiError> {
    if on_real_segment(z, &frame.turning.z2) {
        return Err(SemiError::OnCut(fmt_z(z)));
    }
    let p = frame.prec();
    for zj in [&frame.turning.z1, &frame.turning.z2] {
        for sign in [1i32, -1] {
            let c = Complex::with_val(p, zj * sign);
            let d = Float::with_val(p, Complex::with_val(p, z - &c).abs_ref());
            if d < frame.guard_radius {
                return Err(SemiError::NearTurningPoint(fmt_z(z)));
            }
        }
    }
    Ok(t0_raw(frame, z))
}

pub(crate) fn t0_raw(frame: &SemiFrame, z: &Complex) -> Matrix2C {
    let p = frame.prec();
    let s = joukowski(frame, z);
    let x = x_of(frame, z);
    let zeta3 = Complex::with_val(p, &x + &s) + &frame.cycle_c;
    let zeta1 = Complex::with_val(p, &s * 2u32);
    let pref = zeta3.sqrt() / zeta1.sqrt();
    let inv_a = Complex::with_val(p, 1) / a_raw(frame, z, &s);
    let off = Complex::with_val(p, &pref * &inv_a);
    Matrix2C::new(pref.clone(), off.clone(), off, pref)
}

pub(crate) fn inside_ellipse(frame: &SemiFrame, z: &Complex) -> bool {
    let p = frame.prec();
    let lim = Float::with_val(p, 1) - &frame.boundary_tol;
    frame.ellipse.level(z) < lim || frame.ellipse.level(&Complex::with_val(p, -z)) < lim
}

/// Ψ_WKB(z) = C₀T₀(z)e^{(−Nξ(z)+C₁)σ₃} outside Ω ∪ (−Ω); the left half-plane is
/// obtained from the reflection (−1)ⁿσ₃Ψ_WKB(−z)σ₃.
pub fn psi_wkb(frame: &SemiFrame, z: &Complex) -> Result<Matrix2C, SemiError> {
    if inside_ellipse(frame, z) {
        return Err(SemiError::InsideOmega(fmt_z(z)));
    }
    Ok(wkb_any(frame, z))
}

pub(crate) fn wkb_any(frame: &SemiFrame, z: &Complex) -> Matrix2C {
    let p = frame.prec();
    if z.real().is_sign_negative() && !z.real().is_zero() {
        let m = wkb_right(frame, &Complex::with_val(p, -z)).sigma3_conj();
        return if frame.n % 2 == 1 { m.scale(&Complex::with_val(p, -1)) } else { m };
    }
    wkb_right(frame, z)
}

/// WKB formula in the closed right half-plane; real points below z₂ are
/// evaluated as upper one-sided limits (the matrix is continuous there).
pub(crate) fn wkb_right(frame: &SemiFrame, z: &Complex) -> Matrix2C {
    if on_real_segment(z, &frame.turning.z2) || z.real().is_zero() {
        let f = |w: &Complex| Ok(wkb_formula(frame, w));
        if let Ok(m) = one_sided_matrix(frame, z, Vertical::Up, f) {
            return m;
        }
        return wkb_formula(frame, &shifted(frame, z, Vertical::Up, &frame.eps_side));
    }
    wkb_formula(frame, z)
}

pub(crate) fn wkb_formula(frame: &SemiFrame, z: &Complex) -> Matrix2C {
    let p = frame.prec();
    let t0 = t0_raw(frame, z);
    let e = -Complex::with_val(p, xi_raw(frame, z) * frame.scale()) + &frame.c1;
    let d = Matrix2C::diag(e.clone().exp(), (-e).exp());
    t0.mul(&d).scale(&cx(p, &frame.c0))
}

/// ν²(z) = z²((t+gz²)²/4 − λg) + N⁻¹(t/2 + gRₙ⁰ − gz²/2).
pub fn nu_squared(frame: &SemiFrame, z: &Complex) -> Complex {
    let p = frame.prec();
    let z2 = Complex::with_val(p, z * z);
    let q = Complex::with_val(p, &z2 * &frame.g) + &frame.t;
    let lg = Float::with_val(p, &frame.lambda * &frame.g);
    let main = Complex::with_val(p, &z2 * (Complex::with_val(p, &q * &q) / 4u32 - lg));
    let corr = Complex::with_val(p, &frame.t / 2u32) + Float::with_val(p, &frame.g * &frame.rn0)
        - Complex::with_val(p, &z2 * &frame.g) / 2u32;
    main + corr / frame.scale()
}

/// ν(z) = (g/2)·z·√((z²−(z₁ᴺ)²)(z²−(z₂ᴺ)²))·√(1 − s₃/z²), positive beyond z₂ᴺ.
pub fn nu(frame: &SemiFrame, z: &Complex) -> Result<Complex, SemiError> {
    let tp = &frame.turning;
    if real_part_in(z, &tp.z1n, &tp.z2n) || z.is_zero() {
        return Err(SemiError::OnCut(fmt_z(z)));
    }
    let p = frame.prec();
    let f1 = Complex::with_val(p, z - &tp.z1n).sqrt() * Complex::with_val(p, z - &tp.z2n).sqrt();
    let f2 = Complex::with_val(p, z + &tp.z1n).sqrt() * Complex::with_val(p, z + &tp.z2n).sqrt();
    let z2 = Complex::with_val(p, z * z);
    let tail = (Complex::with_val(p, 1) - Complex::with_val(p, &tp.s3 / &z2)).sqrt();
    let v = Complex::with_val(p, &f1 * &f2) * tail * z * &frame.g / 2u32;
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::PrecisionCtx;
    use crate::ortho::WeightParams;

    fn frame(n: usize, scale: u32) -> SemiFrame {
        let c = PrecisionCtx::new(256).unwrap();
        SemiFrame::new(&WeightParams::from_f64(-4.0, 1.0, scale).unwrap(), n, &c).unwrap()
    }

    fn samples(f: &SemiFrame) -> Vec<Complex> {
        [(3.1, 0.4), (1.2, -0.7), (-2.6, 0.9), (0.3, 1.5), (-1.9, -0.2), (5.0, 2.0)]
            .iter()
            .map(|&(a, b)| f.ctx.complex((a, b)))
            .collect()
    }

    fn small(v: &Complex, f: &SemiFrame, factor: u32) -> bool {
        Float::with_val(f.prec(), v.abs_ref()) < f.ctx.eps() * factor
    }

    #[test]
    fn a0_trace_det_parity() {
        let f = frame(40, 40);
        let p = f.prec();
        for z in samples(&f) {
            let a = a0_matrix(&f, &z);
            assert!(small(&a.trace(), &f, 16));
            let z2 = Complex::with_val(p, &z * &z);
            let q = Complex::with_val(p, &z2 * &f.g) + &f.t;
            let lg4 = Float::with_val(p, &f.lambda * &f.g) * 4u32;
            let expect = Complex::with_val(p, &z2 / 4u32) * (Complex::with_val(p, &q * &q) - lg4);
            let got = -a.det();
            let scale = Float::with_val(p, expect.abs_ref());
            assert!(Float::with_val(p, Complex::with_val(p, &got - &expect).abs_ref()) < f.ctx.eps() * scale * 16u32);
            let minus = a0_matrix(&f, &Complex::with_val(p, -&z));
            let back = minus.sigma3_conj().scale(&Complex::with_val(p, -1));
            assert!(back.sub(&a).max_abs() < f.ctx.eps() * 64u32 * a.max_abs());
        }
    }

    #[test]
    fn mu_branch_and_symmetry() {
        let f = frame(40, 40);
        let p = f.prec();
        let z = Complex::with_val(p, Float::with_val(p, &f.turning.z2 + 1u32));
        let m = mu(&f, &z).unwrap();
        assert!(*m.real() > 0 && m.imag().clone().abs() < f.ctx.eps());
        assert!(mu(&f, &Complex::with_val(p, &f.turning.z2)).unwrap().is_zero());
        for z in samples(&f) {
            let a = mu(&f, &z).unwrap();
            let b = mu(&f, &Complex::with_val(p, -&z)).unwrap();
            assert!(small(&Complex::with_val(p, &a + &b), &f, 1 << 8));
            let c = mu(&f, &Complex::with_val(p, z.conj_ref())).unwrap();
            assert!(small(&(c.conj() - &a), &f, 1 << 8));
        }
        let on = f.ctx.complex(2.0);
        assert!(matches!(mu(&f, &on), Err(SemiError::OnCut(_))));
    }

    #[test]
    fn xi_vanishes_at_outer_turning_point_and_matches_infinity() {
        let f = frame(40, 40);
        let p = f.prec();
        let z = Complex::with_val(p, Float::with_val(p, &f.turning.z2 + (Float::with_val(p, 1) >> 200)));
        assert!(Float::with_val(p, xi(&f, &z).unwrap().abs_ref()) < f.ctx.eps() * 16u32);
        let prev = |r: f64| {
            let z = f.ctx.complex(r);
            let zr = f.ctx.real(r);
            let v = f.params.potential(&zr) / 2u32 - Float::with_val(p, &f.lambda * zr.ln()) + &f.gamma;
            Float::with_val(p, xi(&f, &z).unwrap().real() - &v).abs().to_f64()
        };
        let (a, b) = (prev(20.0), prev(40.0));
        assert!(a < 1e-2 && b < a / 3.0, "{a} {b}");
    }

    #[test]
    fn a_forms_agree_and_normalized() {
        let f = frame(41, 40);
        let p = f.prec();
        for z in samples(&f) {
            let a = a_func(&f, &z).unwrap();
            let b = a_from_matrix(&f, &z).unwrap();
            assert!(Float::with_val(p, Complex::with_val(p, &a - &b).abs_ref()) < f.ctx.eps() * 1024u32 * Float::with_val(p, a.abs_ref()));
            let d = d_func(&f, &z).unwrap();
            let one = (Complex::with_val(p, &d * 2u32)).exp() * &a;
            assert!(small(&(one - 1u32), &f, 1 << 10));
        }
        let at = a_func(&f, &Complex::with_val(p, &f.turning.z2)).unwrap();
        assert!(small(&(at - 1u32), &f, 1 << 10));
    }

    #[test]
    fn t0_identities() {
        for n in [40usize, 41] {
            let f = frame(n, 40);
            let p = f.prec();
            for z in samples(&f) {
                let t = t0_matrix(&f, &z).unwrap();
                assert!(small(&(t.det() - 1u32), &f, 1 << 10));
                let a = a0_matrix(&f, &z);
                let m = mu(&f, &z).unwrap();
                let r = t.inverse().unwrap().mul(&a).mul(&t).add(&Matrix2C::sigma3(p).scale(&m));
                assert!(r.max_abs() < f.ctx.eps() * 1024u32 * a.max_abs());
            }
            let big = f.ctx.complex(4.0);
            let t = t0_matrix(&f, &big).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    assert!(t.get(i, j).imag().is_zero() || t.get(i, j).imag().clone().abs() < f.ctx.eps());
                }
            }
            assert!(matches!(
                t0_matrix(&f, &Complex::with_val(p, (f.turning.z2.clone(), Float::with_val(p, 0.01)))),
                Err(SemiError::NearTurningPoint(_))
            ));
        }
    }

    #[test]
    fn wkb_det_and_large_z_normalization() {
        let f = frame(40, 40);
        let p = f.prec();
        let z = f.ctx.complex((3.5, 1.0));
        let m = psi_wkb(&f, &z).unwrap();
        let c02 = Float::with_val(p, f.c0.square_ref());
        assert!(small(&(m.det() - c02), &f, 1 << 12));
        let err_at = |r: f64| {
            let z = f.ctx.complex(r);
            let psi = psi_wkb(&f, &z).unwrap();
            let zr = f.ctx.real(r);
            let e = Float::with_val(p, f.params.potential(&zr) * f.scale()) / 2u32
                - Float::with_val(p, zr.ln() * f.n as u32)
                + &f.lambda_n0;
            let d = Matrix2C::diag(Complex::with_val(p, e.clone().exp()), Complex::with_val(p, (-e).exp()));
            let lim = Matrix2C::diag(
                Complex::with_val(p, 1),
                Complex::with_val(p, Float::with_val(p, 1) / f.rn0.clone().sqrt()),
            );
            psi.mul(&d).sub(&lim).max_abs().to_f64()
        };
        // the leading correction is O(N/z²) from ln(t + gz²)
        let (a, b) = (err_at(60.0), err_at(120.0));
        assert!(a < 0.05 && b < a / 3.0, "{a} {b}");
        assert!(matches!(psi_wkb(&f, &f.ctx.complex(2.0)), Err(SemiError::InsideOmega(_))));
    }

    #[test]
    fn nu_identities() {
        let f = frame(40, 40);
        let p = f.prec();
        for z in samples(&f) {
            let v = nu(&f, &z).unwrap();
            let v2 = nu_squared(&f, &z);
            assert!(Float::with_val(p, Complex::with_val(p, Complex::with_val(p, &v * &v) - &v2).abs_ref())
                < f.ctx.eps() * 1024u32 * Float::with_val(p, v2.abs_ref()));
            // ν² = −det A⁰ + N⁻¹[(a₁₁)′ − a₁₁(a₁₂)′/a₁₂] with (a₁₁)′ = α − 3gz²/2, (a₁₂)′/a₁₂ = 2/z
            let (a11, _) = a0_entries(&f, &z);
            let z2 = Complex::with_val(p, &z * &z);
            let da11 = Complex::with_val(p, -Complex::with_val(p, &z2 * &f.g) * 3u32 / 2u32) + &f.alpha;
            let corr = da11 - Complex::with_val(p, &a11 * 2u32) / &z;
            let expect = -a0_matrix(&f, &z).det() + corr / f.scale();
            assert!(Float::with_val(p, Complex::with_val(p, &expect - &v2).abs_ref()) < f.ctx.eps() * 1024u32 * Float::with_val(p, v2.abs_ref()));
        }
        let at = nu_squared(&f, &Complex::with_val(p, &f.turning.z2n));
        assert!(Float::with_val(p, at.abs_ref()) < f.ctx.eps() * 64u32);
        let right = nu(&f, &f.ctx.complex(3.0)).unwrap();
        assert!(*right.real() > 0);
    }

    #[test]
    fn one_sided_limit_of_mu_on_cut() {
        let f = frame(40, 40);
        let p = f.prec();
        let z = f.ctx.complex(2.0);
        let up = one_sided(&f, &z, Vertical::Up, |w| mu(&f, w)).unwrap();
        let down = one_sided(&f, &z, Vertical::Down, |w| mu(&f, w)).unwrap();
        assert!(*up.imag() > 0);
        // extrapolation leaves O(ε³) with ε = 2^{-bits/4}
        assert!(Float::with_val(p, Complex::with_val(p, &up + &down).abs_ref()) < 1e-50);
    }
}
