use super::functions::{a_raw, cx, joukowski, mu_raw, one_sided, wkb_right, x_of, xi_raw};
use super::turning::{psi0_in_region, Edge, Region, Vertical};
use super::{fmt_z, SemiError, SemiFrame};
use crate::numerics::{integrate, integrate_decaying, Matrix2C, PrecisionCtx};
use crate::ortho::WeightParams;
use rug::float::Constant;
use rug::{Complex, Float};
use serde::{Deserialize, Serialize};

/// ∫_{z₂}^{z} μ(u) du along the straight segment, with u = z₂ + (z − z₂)σ²
/// removing the square-root endpoint.
pub fn xi_quadrature(frame: &SemiFrame, z: &Complex) -> Result<Complex, SemiError> {
    let p = frame.prec();
    let z2 = cx(p, &frame.turning.z2);
    let h = Complex::with_val(p, z - &z2);
    let q = integrate(
        |s: &Float| {
            let u = Complex::with_val(p, &h * Float::with_val(p, s.square_ref())) + &z2;
            mu_raw(frame, &u) * Complex::with_val(p, &h * s) * 2u32
        },
        &Float::with_val(p, 0),
        &Float::with_val(p, 1),
        &frame.ctx,
    )?;
    Ok(q.value)
}

/// a′(z) from a(z) = k(x + √(x²−1) + c)/(z√c).
fn a_deriv(frame: &SemiFrame, z: &Complex, s: &Complex, a: &Complex) -> Complex {
    let p = frame.prec();
    let k = Float::with_val(p, &frame.lambda / &frame.g).sqrt().sqrt() / Float::with_val(p, frame.cycle_c.sqrt_ref());
    let xp = Complex::with_val(p, z * &frame.g) / &frame.sqrt_lg;
    let sp = Complex::with_val(p, x_of(frame, z) * &xp) / s;
    let inner = Complex::with_val(p, &xp + &sp) * k / z;
    inner - Complex::with_val(p, a / z)
}

/// Compares exp(−2∫_{za}^{zb} τ′) from quadrature of the diagonal of T⁻¹T′
/// (T with off-diagonal entries a₁₂⁰/(μ − a₁₁⁰)) against the closed form
/// [(μ − a₁₁⁰)/2μ](zb) / [(μ − a₁₁⁰)/2μ](za). Returns (quadrature, closed form).
pub fn tau_path_check(frame: &SemiFrame, za: &Complex, zb: &Complex) -> Result<(Complex, Complex), SemiError> {
    let p = frame.prec();
    let h = Complex::with_val(p, zb - za);
    let q = integrate(
        |s: &Float| {
            let u = Complex::with_val(p, &h * s) + za;
            let sj = joukowski(frame, &u);
            let a = a_raw(frame, &u, &sj);
            let ap = a_deriv(frame, &u, &sj, &a);
            let pv = Complex::with_val(p, 1) / &a;
            let pp = -Complex::with_val(p, &ap / Complex::with_val(p, &a * &a));
            let den = Complex::with_val(p, 1) - Complex::with_val(p, &pv * &pv);
            -(Complex::with_val(p, &pv * &pp) / den) * &h
        },
        &Float::with_val(p, 0),
        &Float::with_val(p, 1),
        &frame.ctx,
    )?;
    let quad = (Complex::with_val(p, &q.value * -2i32)).exp();
    let ratio = |u: &Complex| {
        let sj = joukowski(frame, u);
        let zeta3 = Complex::with_val(p, x_of(frame, u) + &sj) + &frame.cycle_c;
        zeta3 / Complex::with_val(p, &sj * 2u32)
    };
    Ok((quad, ratio(zb) / ratio(za)))
}

/// Both sides of the bulk phase identity at one point.
#[derive(Clone, Debug)]
pub struct PhaseResidual {
    pub z: Float,
    pub lhs: Complex,
    pub rhs: Float,
    pub residual: Float,
}

fn check_bulk(frame: &SemiFrame, z: &Float) -> Result<(), SemiError> {
    let p = frame.prec();
    let lo = Float::with_val(p, &frame.turning.z1 + &frame.guard_radius);
    let hi = Float::with_val(p, &frame.turning.z2 - &frame.guard_radius);
    if *z <= lo || *z >= hi {
        return Err(SemiError::OutsideBulk(z.to_f64()));
    }
    Ok(())
}

/// ((n+½)/2)(sin 2φ/2 − φ) − (−1)ⁿχ/4 with φ = arccos q, χ = arccos r at λ′ = (n+½)/N.
fn phase_closed_form(frame: &SemiFrame, z: &Float) -> Float {
    let p = frame.prec();
    let root = Float::with_val(p, &frame.lambda_prime * &frame.g).sqrt();
    let two_root = Float::with_val(p, &root * 2u32);
    let q = (Float::with_val(p, z.square_ref()) * &frame.g + &frame.t) / &two_root;
    let r = (Float::with_val(p, &two_root - Float::with_val(p, &frame.t * &q)))
        / (Float::with_val(p, &two_root * &q) - &frame.t);
    let phi = q.acos();
    let chi = r.acos();
    let two_phi = Float::with_val(p, &phi * 2u32);
    let bracket = two_phi.sin() / 2u32 - &phi;
    let weight = (Float::with_val(p, frame.n) + 0.5f64) / 2u32;
    let main = bracket * weight;
    let chi4 = chi / 4u32;
    if frame.n % 2 == 1 {
        main + chi4
    } else {
        main - chi4
    }
}

/// i⁻¹[Nξ₀(z) + d₀(z)] from the upper-side boundary values of ξ and d, against
/// the closed form. On the cut √(x²−1)₊ = i√(1−x²), so ln(x + √(x²−1))₊ = i·arccos x.
pub fn phase_identity_check(frame: &SemiFrame, z: &Float) -> Result<PhaseResidual, SemiError> {
    check_bulk(frame, z)?;
    let p = frame.prec();
    let zc = cx(p, z);
    let x = x_of(frame, &zc).real().clone();
    let y = (Float::with_val(p, 1) - Float::with_val(p, x.square_ref())).sqrt();
    let s_up = Complex::with_val(p, (Float::with_val(p, 0), y.clone()));
    let bracket_im = Float::with_val(p, &x * &y) - x.clone().acos();
    let xi_up = Complex::with_val(p, (Float::with_val(p, 0), bracket_im * &frame.lambda / 2u32));
    let d_up = -(a_raw(frame, &zc, &s_up).ln() / 2u32);
    let total = Complex::with_val(p, &xi_up * frame.scale()) + d_up;
    let lhs = Complex::with_val(p, &total * Complex::with_val(p, (0, -1)));
    let rhs = phase_closed_form(frame, z);
    let residual = Float::with_val(p, Complex::with_val(p, &lhs - &rhs).abs_ref());
    Ok(PhaseResidual { z: z.clone(), lhs, rhs, residual })
}

/// Same comparison with the left side taken as i⁻¹N∫_{z₂ᴺ}^{z} ν₊(u)du, computed as
/// −N·2(z₂ᴺ − z)^{3/2}∫₀¹σ²√Q(u)dσ with u = z₂ᴺ − (z₂ᴺ − z)σ² and ν² = (u − z₂ᴺ)Q(u).
pub fn phase_identity_contour(frame: &SemiFrame, z: &Float) -> Result<PhaseResidual, SemiError> {
    check_bulk(frame, z)?;
    let p = frame.prec();
    let tp = &frame.turning;
    let h = Float::with_val(p, &tp.z2n - z);
    let z1sq = Float::with_val(p, tp.z1n.square_ref());
    let g2 = Float::with_val(p, frame.g.square_ref()) / 4u32;
    let q = integrate(
        |s: &Float| {
            let s2 = Float::with_val(p, s.square_ref());
            let u = Float::with_val(p, &tp.z2n - Float::with_val(p, &h * &s2));
            let u2 = Float::with_val(p, u.square_ref());
            let val = Float::with_val(p, &u + &tp.z2n)
                * Float::with_val(p, &u2 - &z1sq)
                * Float::with_val(p, &u2 - &tp.s3)
                * &g2;
            val.sqrt() * s2
        },
        &Float::with_val(p, 0),
        &Float::with_val(p, 1),
        &frame.ctx,
    )?;
    let h32 = Float::with_val(p, &h * h.clone().sqrt());
    let j = q.value * h32 * 2u32;
    let lhs = Complex::with_val(p, -(j * frame.scale()));
    let rhs = phase_closed_form(frame, z);
    let residual = Float::with_val(p, Complex::with_val(p, &lhs - &rhs).abs_ref());
    Ok(PhaseResidual { z: z.clone(), lhs, rhs, residual })
}

/// The four Stokes multipliers of the canonical solutions.
#[derive(Clone, Debug, PartialEq)]
pub struct StokesData {
    pub s1: Complex,
    pub s2: Complex,
    pub s3: Complex,
    pub s4: Complex,
    /// Quadrature target actually used (log₂), tightened to absorb the N·h₀ factor.
    pub quad_tol_log2: i32,
}

/// s_j = N·h₀·∫ from ω_{j+1}∞ to ω_j∞ of (t + gu² + gR₁)e^{N(tu²/2 + gu⁴/4)} du with
/// ω_j = e^{i(π/4 + π(j−1)/2)}, each integral split into two rays through 0.
pub fn stokes_constants(params: &WeightParams, h0: &Float, r1: &Float, ctx: &PrecisionCtx) -> Result<StokesData, SemiError> {
    let p = ctx.bits;
    let t = params.t_at(ctx);
    let g = params.g_at(ctx);
    let n = params.scale;
    let pref = Float::with_val(p, h0 * n);
    let amplification = pref.get_exp().unwrap_or(0).max(0) + 8;
    let tight = ctx.tightened(ctx.quad_tol_log2 - amplification);
    let gr1 = Float::with_val(p, &g * r1);
    let f = |u: &Complex| {
        let u2 = Complex::with_val(p, u * u);
        let u4 = Complex::with_val(p, &u2 * &u2);
        let e = (Complex::with_val(p, &u2 * &t) / 2u32 + Complex::with_val(p, &u4 * &g) / 4u32) * n;
        let poly = Complex::with_val(p, &u2 * &g) + &t + &gr1;
        poly * e.exp()
    };
    let pi = Float::with_val(p, Constant::Pi);
    let mut rays = Vec::with_capacity(4);
    for j in 0..4u32 {
        let ang = Float::with_val(p, &pi / 4u32) + Float::with_val(p, &pi * j) / 2u32;
        let dir = Complex::with_val(p, (ang.clone().cos(), ang.sin()));
        rays.push(integrate_decaying(f, &dir, &tight)?.value);
    }
    let s = |j: usize| Complex::with_val(p, &rays[j] - &rays[(j + 1) % 4]) * &pref;
    Ok(StokesData { s1: s(0), s2: s(1), s3: s(2), s4: s(3), quad_tol_log2: tight.quad_tol_log2 })
}

/// Which part of ∂Ω₁ ∪ ∂Ω₂ a jump sample lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum JumpKind {
    OuterArc,
    InnerArc,
    DividingLine,
}

#[derive(Clone, Debug)]
pub struct JumpSample {
    pub z: Complex,
    pub kind: JumpKind,
    /// max-entry norm of Ψ⁰₊(Ψ⁰₋)⁻¹ − I.
    pub norm: Float,
}

fn jump_norm(inside: &Matrix2C, outside: &Matrix2C, z: &Complex) -> Result<Float, SemiError> {
    let p = inside.prec();
    let inv = outside
        .inverse()
        .ok_or_else(|| SemiError::InvalidFrame(format!("singular matrix at {}", fmt_z(z))))?;
    Ok(inside.mul(&inv).sub(&Matrix2C::identity(p)).max_abs())
}

/// Jump norms at `per_piece` points on each of the six boundary pieces of Ω₁ ∪ Ω₂
/// (two arcs and the dividing segment, upper and lower halves).
pub fn boundary_jump_norms(frame: &SemiFrame, per_piece: usize) -> Result<Vec<JumpSample>, SemiError> {
    let p = frame.prec();
    let pi = std::f64::consts::PI;
    let m = per_piece.max(1);
    let mut out = Vec::new();
    for (edge, lo, hi, side) in [
        (Edge::Outer, 0.0, pi / 2.0, Vertical::Up),
        (Edge::Outer, -pi / 2.0, 0.0, Vertical::Down),
        (Edge::Inner, pi / 2.0, pi, Vertical::Up),
        (Edge::Inner, -pi, -pi / 2.0, Vertical::Down),
    ] {
        for k in 0..m {
            let th = lo + (hi - lo) * (k as f64 + 0.5) / m as f64;
            let z = frame.ellipse.point(&Float::with_val(p, th));
            let inside = psi0_in_region(frame, &z, Region::Turning(edge, side))?;
            let outside = wkb_right(frame, &z);
            let kind = if edge == Edge::Outer { JumpKind::OuterArc } else { JumpKind::InnerArc };
            out.push(JumpSample { norm: jump_norm(&inside, &outside, &z)?, z, kind });
        }
    }
    for side in [Vertical::Up, Vertical::Down] {
        for k in 0..m {
            let frac = (k as f64 + 0.5) / m as f64;
            let mut im = Float::with_val(p, &frame.ellipse.semi_minor * frac);
            if side == Vertical::Down {
                im = -im;
            }
            let z = Complex::with_val(p, (frame.ellipse.center.clone(), im));
            let left = psi0_in_region(frame, &z, Region::Turning(Edge::Inner, side))?;
            let right = psi0_in_region(frame, &z, Region::Turning(Edge::Outer, side))?;
            out.push(JumpSample { norm: jump_norm(&left, &right, &z)?, z, kind: JumpKind::DividingLine });
        }
    }
    Ok(out)
}

/// Jump sample on the real axis outside ±Ω.
#[derive(Clone, Debug)]
pub struct GapSample {
    pub z: Float,
    /// max-entry norm of Ψ⁰SΨ⁰⁻¹ − I.
    pub norm: Float,
    pub re_xi: Float,
    /// norm·e^{2N·Re ξ(z)}.
    pub ratio: Float,
    /// e^{−2N Re ξ} lies above the working-precision floor eps·2⁸.
    pub resolved: bool,
}

/// ‖Ψ⁰SΨ⁰⁻¹ − I‖ and e^{−2N Re ξ} at real points of the complement of ±Ω.
pub fn gap_jump_norms(frame: &SemiFrame, points: &[Float]) -> Result<Vec<GapSample>, SemiError> {
    let p = frame.prec();
    let stokes = Matrix2C::new(
        Complex::with_val(p, 1),
        Complex::with_val(p, (0, -2)) * Float::with_val(p, Constant::Pi),
        Complex::with_val(p, 0),
        Complex::with_val(p, 1),
    );
    let mut out = Vec::with_capacity(points.len());
    for x in points {
        let zc = cx(p, x);
        let r = Complex::with_val(p, Float::with_val(p, x.abs_ref()));
        if x.is_zero() || frame.ellipse.level(&r) <= 1 {
            return Err(SemiError::InsideOmega(fmt_z(&zc)));
        }
        let psi = super::functions::wkb_any(frame, &zc);
        let inv = psi.inverse().ok_or_else(|| SemiError::InvalidFrame("singular WKB matrix".into()))?;
        let norm = psi.mul(&stokes).mul(&inv).sub(&Matrix2C::identity(p)).max_abs();
        let re_xi = if r.real() > &frame.turning.z2 {
            xi_raw(frame, &r).real().clone()
        } else {
            one_sided(frame, &r, Vertical::Up, |w| Ok(xi_raw(frame, w)))?.real().clone()
        };
        let scaled = Float::with_val(p, &re_xi * frame.scale()) * 2u32;
        let bound = Float::with_val(p, -&scaled).exp();
        let resolved = bound > Float::with_val(p, frame.ctx.eps() << 8u32);
        let ratio = Float::with_val(p, &norm / &bound);
        out.push(GapSample { z: x.clone(), norm, re_xi, ratio, resolved });
    }
    Ok(out)
}

struct Branches {
    s: Complex,
    ln2: Complex,
    r1: Complex,
    r3: Complex,
}

fn closer(cand: Complex, prev: &Complex) -> Complex {
    let p = cand.prec().0;
    let d1 = Float::with_val(p, Complex::with_val(p, &cand - prev).abs_ref());
    let d2 = Float::with_val(p, Complex::with_val(p, &cand + prev).abs_ref());
    if d1 <= d2 {
        cand
    } else {
        -cand
    }
}

fn branch_step(frame: &SemiFrame, u: &Complex, prev: Option<&Branches>) -> Branches {
    let p = frame.prec();
    let x = x_of(frame, u);
    let mut s = joukowski(frame, u);
    if let Some(b) = prev {
        s = closer(s, &b.s);
    }
    let zeta2 = Complex::with_val(p, &x + &s);
    let mut ln2 = zeta2.clone().ln();
    let zeta1 = Complex::with_val(p, &s * 2u32);
    let zeta3 = zeta2 + &frame.cycle_c;
    let mut r1 = zeta1.sqrt();
    let mut r3 = zeta3.sqrt();
    if let Some(b) = prev {
        let two_pi = Float::with_val(p, Constant::Pi) * 2u32;
        let k = (Float::with_val(p, b.ln2.imag() - ln2.imag()) / &two_pi).round();
        *ln2.mut_imag() += two_pi * k;
        r1 = closer(r1, &b.r1);
        r3 = closer(r3, &b.r3);
    }
    Branches { s, ln2, r1, r3 }
}

fn wkb_from_branches(frame: &SemiFrame, u: &Complex, b: &Branches) -> Matrix2C {
    let p = frame.prec();
    let x = x_of(frame, u);
    let xi = (Complex::with_val(p, &x * &b.s) - &b.ln2) * Float::with_val(p, &frame.lambda / 2u32);
    let pref = Complex::with_val(p, &b.r3 / &b.r1);
    let off = Complex::with_val(p, &pref / a_raw(frame, u, &b.s));
    let t0 = Matrix2C::new(pref.clone(), off.clone(), off, pref);
    let e = -Complex::with_val(p, &xi * frame.scale()) + &frame.c1;
    t0.mul(&Matrix2C::diag(e.clone().exp(), (-e).exp())).scale(&cx(p, &frame.c0))
}

/// Continues the right-half-plane WKB formula from the positive real point |z|
/// along the circle of radius |z| to z, once counter-clockwise and once clockwise,
/// tracking every square root and logarithm continuously, and compares each result
/// with (−1)ⁿσ₃Ψ_WKB(−z)σ₃. Returns the two relative differences.
pub fn reflection_check(frame: &SemiFrame, z: &Complex, steps: usize) -> Result<(Float, Float), SemiError> {
    let p = frame.prec();
    let r = Float::with_val(p, z.abs_ref());
    let start = Complex::with_val(p, &r);
    if frame.ellipse.level(&start) <= 1 || r <= frame.turning.z2 {
        return Err(SemiError::InvalidFrame(format!("radius {} does not start beyond the ellipse", r.to_f64())));
    }
    let target = Float::with_val(p, z.arg_ref());
    let two_pi = Float::with_val(p, Constant::Pi) * 2u32;
    let (ccw, cw) = if target.is_sign_negative() {
        (Float::with_val(p, &target + &two_pi), target.clone())
    } else {
        (target.clone(), Float::with_val(p, &target - &two_pi))
    };
    let expected = {
        let m = wkb_right(frame, &Complex::with_val(p, -z)).sigma3_conj();
        if frame.n % 2 == 1 {
            m.scale(&Complex::with_val(p, -1))
        } else {
            m
        }
    };
    let steps = steps.max(16);
    let run = |end: &Float| {
        let mut b = branch_step(frame, &start, None);
        let mut u = start.clone();
        for k in 1..=steps {
            let ang = Float::with_val(p, end * k as u32) / steps as u32;
            u = Complex::with_val(p, (Float::with_val(p, &r * ang.clone().cos()), Float::with_val(p, &r * ang.sin())));
            b = branch_step(frame, &u, Some(&b));
        }
        let m = wkb_from_branches(frame, &u, &b);
        m.sub(&expected).max_abs() / expected.max_abs()
    };
    Ok((run(&ccw), run(&cw)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semiclassics::functions::xi;

    fn frame(n: usize, scale: u32) -> SemiFrame {
        let c = PrecisionCtx::new(256).unwrap();
        SemiFrame::new(&WeightParams::from_f64(-4.0, 1.0, scale).unwrap(), n, &c).unwrap()
    }

    #[test]
    fn xi_closed_form_matches_quadrature() {
        let f = frame(40, 40);
        let p = f.prec();
        let z = f.ctx.complex((3, 1));
        let a = xi(&f, &z).unwrap();
        let b = xi_quadrature(&f, &z).unwrap();
        let tol = f.ctx.quad_rel_tol() * 1000u32 * Float::with_val(p, a.abs_ref());
        assert!(Float::with_val(p, Complex::with_val(p, &a - &b).abs_ref()) < tol);
    }

    #[test]
    fn tau_formula_matches_path_quadrature() {
        let f = frame(41, 40);
        let p = f.prec();
        let (q, c) = tau_path_check(&f, &f.ctx.complex((3.2, 0.3)), &f.ctx.complex((2.0, 1.1))).unwrap();
        assert!(Float::with_val(p, Complex::with_val(p, &q - &c).abs_ref()) < f.ctx.quad_rel_tol() * 1000u32);
    }

    #[test]
    fn phase_sides_close_and_contour_consistent() {
        let f = frame(40, 40);
        let z = f.ctx.real(1.9);
        let a = phase_identity_check(&f, &z).unwrap();
        let b = phase_identity_contour(&f, &z).unwrap();
        assert!(a.residual < 0.05 && b.residual < 0.05);
        assert!(a.lhs.imag().clone().abs() < 1e-60);
        assert!(matches!(phase_identity_check(&f, &f.ctx.real(3.0)), Err(SemiError::OutsideBulk(_))));
    }

    #[test]
    fn continuation_agrees_with_reflection() {
        for n in [40usize, 41] {
            let f = frame(n, 40);
            for (a, b) in [(-2.9, 1.3), (-3.5, -0.4)] {
                let (u, d) = reflection_check(&f, &f.ctx.complex((a, b)), 400).unwrap();
                assert!(u < 1e-60 && d < 1e-60, "n={n}: {} {}", u.to_f64(), d.to_f64());
            }
        }
    }

    #[test]
    fn stokes_multipliers_small_scale() {
        let c = PrecisionCtx::new(256).unwrap();
        let params = WeightParams::from_f64(-4.0, 1.0, 4).unwrap();
        let table = crate::ortho::build_table(&params, 2, &c.tightened(-230)).unwrap();
        let s = stokes_constants(&params, &table.h[0], &table.r[1], &c).unwrap();
        let p = c.bits;
        let sum13 = Float::with_val(p, Complex::with_val(p, &s.s1 + &s.s3).abs_ref());
        let sum24 = Float::with_val(p, Complex::with_val(p, &s.s2 + &s.s4).abs_ref());
        assert!(sum13 < 1e-40 && sum24 < 1e-40);
        let target = Complex::with_val(p, (0, -2)) * c.pi();
        assert!(Float::with_val(p, Complex::with_val(p, &s.s4 - &target).abs_ref()) < 1e-30);
        assert!(Float::with_val(p, s.s1.abs_ref()) < 1e-30);
    }
}
