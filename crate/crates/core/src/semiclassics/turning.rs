use super::functions::{a0_entries, cx, wkb_any};
use super::{fmt_z, SemiError, SemiFrame};
use crate::numerics::{airy_complex_pair, integrate, Matrix2C, PrecisionCtx};
use rug::float::Constant;
use rug::{Complex, Float};
use serde::{Deserialize, Serialize};

/// Which turning point: `Inner` is z₁ (Ω₁), `Outer` is z₂ (Ω₂).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Edge {
    Inner,
    Outer,
}

impl Edge {
    pub fn index(self) -> u8 {
        match self {
            Edge::Inner => 1,
            Edge::Outer => 2,
        }
    }

    pub fn from_index(j: u8) -> Option<Edge> {
        match j {
            1 => Some(Edge::Inner),
            2 => Some(Edge::Outer),
            _ => None,
        }
    }

    fn kappa(self) -> i32 {
        match self {
            Edge::Inner => -1,
            Edge::Outer => 1,
        }
    }
}

/// Upper or lower side of the real axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Vertical {
    Up,
    Down,
}

impl Vertical {
    pub fn flip(self) -> Vertical {
        match self {
            Vertical::Up => Vertical::Down,
            Vertical::Down => Vertical::Up,
        }
    }
}

/// Resolves membership for points on region boundaries. Each field is consulted
/// only when the point lies on the corresponding boundary.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideHint {
    /// Side of the real axis (for real points inside ±Ω).
    pub vertical: Option<Vertical>,
    /// Half of the ellipse (for points on the line Re z = z₀).
    pub edge: Option<Edge>,
    /// Inside or outside (for points on the ellipse).
    pub inside: Option<bool>,
}

/// Piece of the plane where a given formula for Ψ⁰ is used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    Outside,
    Turning(Edge, Vertical),
}

fn near(a: &Float, tol: &Float) -> bool {
    Float::with_val(a.prec(), a.abs_ref()) <= *tol
}

/// Region of z (after reflecting the left half-plane) and whether it was reflected.
pub fn classify(frame: &SemiFrame, z: &Complex, hint: SideHint) -> Result<(Region, bool), SemiError> {
    let p = frame.prec();
    let reflected = z.real().is_sign_negative() && !z.real().is_zero();
    let w = if reflected { Complex::with_val(p, -z) } else { z.clone() };
    let tol = &frame.boundary_tol;
    let level = frame.ellipse.level(&w) - 1u32;
    let inside = if near(&level, tol) {
        hint.inside.ok_or_else(|| SemiError::AmbiguousRegion(format!("{} on the ellipse", fmt_z(z))))?
    } else {
        level.is_sign_negative()
    };
    if !inside {
        return Ok((Region::Outside, reflected));
    }
    let dx = Float::with_val(p, w.real() - &frame.ellipse.center);
    let edge = if near(&dx, tol) {
        hint.edge.ok_or_else(|| SemiError::AmbiguousRegion(format!("{} on the dividing line", fmt_z(z))))?
    } else if dx.is_sign_negative() {
        Edge::Inner
    } else {
        Edge::Outer
    };
    let vertical = if near(w.imag(), tol) {
        let v = hint
            .vertical
            .ok_or_else(|| SemiError::AmbiguousRegion(format!("{} on the real axis", fmt_z(z))))?;
        if reflected {
            v.flip()
        } else {
            v
        }
    } else if w.imag().is_sign_negative() {
        Vertical::Down
    } else {
        Vertical::Up
    };
    Ok((Region::Turning(edge, vertical), reflected))
}

fn own_root(frame: &SemiFrame, edge: Edge) -> &Float {
    match edge {
        Edge::Inner => &frame.turning.z1n,
        Edge::Outer => &frame.turning.z2n,
    }
}

/// (w, w′) for the change of variable at z_jᴺ:
/// w = κ(z − z_jᴺ)·((3/2)F)^{2/3}, F = ∫₀¹ 2σ²√(κQ(z_jᴺ + (z − z_jᴺ)σ²)) dσ,
/// with ν² = (u − z_jᴺ)Q(u), κ = +1 at z₂ and −1 at z₁.
pub fn w_change_with_derivative(frame: &SemiFrame, z: &Complex, edge: Edge) -> Result<(Complex, Complex), SemiError> {
    let p = frame.prec();
    let outer = edge == Edge::Outer;
    let own = cx(p, own_root(frame, edge));
    let h = Complex::with_val(p, z - &own);
    if Float::with_val(p, h.abs_ref()) >= frame.local_radius(outer) {
        return Err(SemiError::OutsideDomain(fmt_z(z)));
    }
    let roots = frame.other_roots(outer);
    let kappa = edge.kappa();
    let g2 = Float::with_val(p, frame.g.square_ref()) / 4u32;
    let mut q0 = Complex::with_val(p, &g2 * kappa);
    for r in &roots {
        q0 *= Complex::with_val(p, &own - r);
    }
    let q0_sqrt = q0.sqrt();
    let diffs: Vec<Complex> = roots.iter().map(|r| Complex::with_val(p, &own - r)).collect();
    let integrand = |s: &Float| -> Vec<Complex> {
        let s2 = Float::with_val(p, s.square_ref());
        let u = Complex::with_val(p, &h * &s2) + &own;
        let mut root = q0_sqrt.clone();
        let mut logd = Complex::with_val(p, 0);
        for (r, d) in roots.iter().zip(&diffs) {
            let ur = Complex::with_val(p, &u - r);
            root *= Complex::with_val(p, &ur / d).sqrt();
            logd += Complex::with_val(p, 1) / ur;
        }
        let s4 = Float::with_val(p, s2.square_ref());
        let f = Complex::with_val(p, &root * &s2) * 2u32;
        let fp = Complex::with_val(p, &root * &logd) * &s4;
        vec![f, fp]
    };
    let q = integrate(integrand, &Float::with_val(p, 0), &Float::with_val(p, 1), &frame.ctx)?;
    let f = &q.value[0];
    let fp = &q.value[1];
    let base = Complex::with_val(p, f * 3u32) / 2u32;
    let lnb = base.ln();
    let g = (Complex::with_val(p, &lnb * 2u32) / 3u32).exp();
    let gp = Complex::with_val(p, -Complex::with_val(p, &lnb / 3u32)).exp() * fp;
    let w = Complex::with_val(p, &h * &g) * kappa;
    let wp = (g + Complex::with_val(p, &h * &gp)) * kappa;
    Ok((w, wp))
}

/// w(z; z_j) = ((3/2)∫_{z_jᴺ}^z ν)^{2/3}, analytic on a disk around z_jᴺ containing Ω_j.
pub fn w_change(frame: &SemiFrame, z: &Complex, edge: Edge) -> Result<Complex, SemiError> {
    Ok(w_change_with_derivative(frame, z, edge)?.0)
}

/// Gauge matrix W(z; z_j) = s·[[1, 0],[−a₁₁/a₁₂, w′/a₁₂]], s = √(a₁₂/w′) > 0 beyond z₂ᴺ
/// for the outer point and s = −i√(a₁₂/w′) > 0 on (0, z₁ᴺ) for the inner one.
pub fn gauge_w(frame: &SemiFrame, z: &Complex, edge: Edge) -> Result<Matrix2C, SemiError> {
    let (_, wp) = w_change_with_derivative(frame, z, edge)?;
    Ok(gauge_from(frame, z, edge, &wp))
}

fn gauge_from(frame: &SemiFrame, z: &Complex, edge: Edge, wp: &Complex) -> Matrix2C {
    let p = frame.prec();
    let (a11, a12) = a0_entries(frame, z);
    let ratio = Complex::with_val(p, &a12 / wp);
    let s = match edge {
        Edge::Outer => ratio.sqrt(),
        Edge::Inner => (-ratio).sqrt(),
    };
    let m = Matrix2C::new(
        Complex::with_val(p, 1),
        Complex::with_val(p, 0),
        -Complex::with_val(p, &a11 / &a12),
        Complex::with_val(p, wp / &a12),
    );
    m.scale(&s)
}

/// Airy model matrix diag(N^{1/6}, N^{−1/6})·[[y₀, y],[y₀′, y′]]·diag((2π)^{−1/2}, (2π)^{1/2})
/// evaluated at N^{2/3}·zarg, where y is y₁ (outer, up), y₂ (outer, down), −y₂ (inner, up)
/// or −y₁ (inner, down).
pub fn phi_model(zarg: &Complex, side: Vertical, edge: Edge, scale: u32, ctx: &PrecisionCtx) -> Result<Matrix2C, SemiError> {
    let p = ctx.bits;
    let nf = Float::with_val(p, scale);
    let n23 = Float::with_val(p, &nf * &nf).cbrt();
    let n16 = nf.clone().sqrt().cbrt();
    let zeta = Complex::with_val(p, zarg * &n23);
    let (y0, y0p) = airy_complex_pair(&zeta, ctx)?;
    let pi = Float::with_val(p, Constant::Pi);
    let rot = |num: i32, den: u32| -> Complex {
        let a = Float::with_val(p, &pi * num) / den;
        Complex::with_val(p, (a.clone().cos(), a.sin()))
    };
    let (use_first, negate) = match (edge, side) {
        (Edge::Outer, Vertical::Up) => (true, false),
        (Edge::Outer, Vertical::Down) => (false, false),
        (Edge::Inner, Vertical::Up) => (false, true),
        (Edge::Inner, Vertical::Down) => (true, true),
    };
    // y₁(ζ) = e^{−iπ/6}Ai(e^{−2πi/3}ζ), y₂(ζ) = e^{iπ/6}Ai(e^{2πi/3}ζ)
    let sign = if use_first { -1 } else { 1 };
    let arg = Complex::with_val(p, &zeta * rot(2 * sign, 3));
    let (ai, aip) = airy_complex_pair(&arg, ctx)?;
    let mut y = Complex::with_val(p, &ai * rot(sign, 6));
    let mut yp = Complex::with_val(p, &aip * rot(5 * sign, 6));
    if negate {
        y = -y;
        yp = -yp;
    }
    let two_pi_half = (Float::with_val(p, &pi * 2u32)).sqrt();
    let up = Float::with_val(p, &n16 / &two_pi_half);
    let lo_l = Float::with_val(p, Float::with_val(p, 1) / &n16) / &two_pi_half;
    let up_r = Float::with_val(p, &n16 * &two_pi_half);
    let lo_r = Float::with_val(p, &two_pi_half / &n16);
    Ok(Matrix2C::new(y0 * up, y * up_r, y0p * lo_l, yp * lo_r))
}

/// Ψ⁰ at z using the formula attached to `region`, without checking membership.
/// Turning-point formulas are only available on the right half-plane.
pub fn psi0_in_region(frame: &SemiFrame, z: &Complex, region: Region) -> Result<Matrix2C, SemiError> {
    let p = frame.prec();
    match region {
        Region::Outside => Ok(wkb_any(frame, z)),
        Region::Turning(edge, side) => {
            let (w, wp) = w_change_with_derivative(frame, z, edge)?;
            let gauge = gauge_from(frame, z, edge, &wp);
            let phi = phi_model(&w, side, edge, frame.scale(), &frame.ctx)?;
            let c = match edge {
                Edge::Outer => &frame.c_const,
                Edge::Inner => &frame.c_first,
            };
            Ok(gauge.mul(&phi).scale(&cx(p, c)))
        }
    }
}

/// Piecewise Ψ⁰: WKB outside ±Ω, turning-point functions in Ω₁, Ω₂ (upper and
/// lower halves), and (−1)ⁿσ₃Ψ⁰(−z)σ₃ on −Ω.
pub fn psi0(frame: &SemiFrame, z: &Complex, hint: SideHint) -> Result<Matrix2C, SemiError> {
    let p = frame.prec();
    let (region, reflected) = classify(frame, z, hint)?;
    if region == Region::Outside {
        return Ok(wkb_any(frame, z));
    }
    let w = if reflected { Complex::with_val(p, -z) } else { z.clone() };
    let m = psi0_in_region(frame, &w, region)?;
    if !reflected {
        return Ok(m);
    }
    let m = m.sigma3_conj();
    Ok(if frame.n % 2 == 1 { m.scale(&Complex::with_val(p, -1)) } else { m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::PrecisionCtx;
    use crate::ortho::WeightParams;
    use crate::semiclassics::functions::nu;

    fn frame(n: usize, scale: u32) -> SemiFrame {
        let c = PrecisionCtx::new(256).unwrap();
        SemiFrame::new(&WeightParams::from_f64(-4.0, 1.0, scale).unwrap(), n, &c).unwrap()
    }

    fn close(a: &Matrix2C, b: &Matrix2C, tol: &Float) -> bool {
        a.sub(b).max_abs() <= Float::with_val(tol.prec(), tol * a.max_abs().max(&Float::with_val(tol.prec(), 1)))
    }

    #[test]
    fn stokes_relation_between_models() {
        let c = PrecisionCtx::new(256).unwrap();
        let p = c.bits;
        let s = Matrix2C::new(c.complex(1), Complex::with_val(p, (0, -2)) * c.pi(), c.complex(0), c.complex(1));
        for edge in [Edge::Inner, Edge::Outer] {
            for z in [c.complex((0.3, 0.2)), c.complex((-0.5, -0.1)), c.complex(0.7)] {
                let u = phi_model(&z, Vertical::Up, edge, 40, &c).unwrap();
                let d = phi_model(&z, Vertical::Down, edge, 40, &c).unwrap();
                assert!(close(&u, &d.mul(&s), &(c.eps() * 1024u32)));
            }
        }
    }

    #[test]
    fn model_wronskian_constant_and_real_first_column() {
        let c = PrecisionCtx::new(256).unwrap();
        let dets: Vec<Complex> = [0.1, -0.4, 0.9]
            .iter()
            .map(|&x| phi_model(&c.complex((x, 0.3 * x)), Vertical::Up, Edge::Outer, 40, &c).unwrap().det())
            .collect();
        for d in &dets[1..] {
            assert!(Float::with_val(c.bits, Complex::with_val(c.bits, d - &dets[0]).abs_ref()) < c.eps() * 1024u32);
        }
        let m = phi_model(&c.complex(0.5), Vertical::Up, Edge::Outer, 40, &c).unwrap();
        assert!(m.get(0, 0).imag().is_zero() && m.get(1, 0).imag().is_zero());
    }

    #[test]
    fn w_change_signs_and_derivative() {
        let f = frame(40, 40);
        let p = f.prec();
        let z2n = cx(p, &f.turning.z2n);
        assert!(Float::with_val(p, w_change(&f, &z2n, Edge::Outer).unwrap().abs_ref()) < f.ctx.eps() * 16u32);
        let right = w_change(&f, &f.ctx.complex(2.6), Edge::Outer).unwrap();
        let left = w_change(&f, &f.ctx.complex(2.3), Edge::Outer).unwrap();
        assert!(*right.real() > 0 && *left.real() < 0);
        let inner_lo = w_change(&f, &f.ctx.complex(1.3), Edge::Inner).unwrap();
        let inner_hi = w_change(&f, &f.ctx.complex(1.5), Edge::Inner).unwrap();
        assert!(*inner_lo.real() > 0 && *inner_hi.real() < 0);
        // w′·w^{1/2} = ν, checked at points where both sides are off the cut
        for (z, edge) in [(f.ctx.complex((2.7, 0.1)), Edge::Outer), (f.ctx.complex((1.25, 0.1)), Edge::Inner)] {
            let (w, wp) = w_change_with_derivative(&f, &z, edge).unwrap();
            let h = Float::with_val(p, 1) >> 60;
            let zp = Complex::with_val(p, &z + &h);
            let zm = Complex::with_val(p, &z - &h);
            let fd = (w_change(&f, &zp, edge).unwrap() - w_change(&f, &zm, edge).unwrap()) / Float::with_val(p, &h * 2u32);
            assert!(Float::with_val(p, Complex::with_val(p, &fd - &wp).abs_ref()) < 1e-30);
            let lhs = Complex::with_val(p, &wp * w.sqrt());
            let v = nu(&f, &z).unwrap();
            let diff = Float::with_val(p, Complex::with_val(p, &lhs - &v).abs_ref());
            let sum = Float::with_val(p, Complex::with_val(p, &lhs + &v).abs_ref());
            assert!(diff.min(&sum) < f.ctx.quad_rel_tol() * 1024u32);
        }
        assert!(matches!(w_change(&f, &f.ctx.complex(0.2), Edge::Outer), Err(SemiError::OutsideDomain(_))));
    }

    #[test]
    fn gauge_determinant_and_branches() {
        let f = frame(40, 40);
        let p = f.prec();
        let w2 = gauge_w(&f, &f.ctx.complex((2.5, 0.1)), Edge::Outer).unwrap();
        assert!(Float::with_val(p, Complex::with_val(p, w2.det() - 1u32).abs_ref()) < f.ctx.eps() * 1024u32);
        let out = gauge_w(&f, &f.ctx.complex(2.6), Edge::Outer).unwrap();
        assert!(*out.get(0, 0).real() > 0);
        let inn = gauge_w(&f, &f.ctx.complex(1.3), Edge::Inner).unwrap();
        assert!(*inn.get(0, 0).real() > 0);
        assert!(Float::with_val(p, Complex::with_val(p, inn.det() + 1u32).abs_ref()) < f.ctx.eps() * 1024u32);
    }

    #[test]
    fn psi0_jump_on_real_axis_inside_ellipse() {
        for n in [40usize, 41] {
            let f = frame(n, 40);
            let p = f.prec();
            let s = Matrix2C::new(
                Complex::with_val(p, 1),
                Complex::with_val(p, (0, -2)) * f.ctx.pi(),
                Complex::with_val(p, 0),
                Complex::with_val(p, 1),
            );
            for x in [1.5, 1.9, 2.3, -1.6, -2.4] {
                let z = f.ctx.complex(x);
                let up = psi0(&f, &z, SideHint { vertical: Some(Vertical::Up), ..Default::default() }).unwrap();
                let down = psi0(&f, &z, SideHint { vertical: Some(Vertical::Down), ..Default::default() }).unwrap();
                assert!(close(&up, &down.mul(&s), &(f.ctx.eps() * (1u32 << 16))), "n={n} x={x}");
            }
            assert!(matches!(psi0(&f, &f.ctx.complex(1.9), SideHint::default()), Err(SemiError::AmbiguousRegion(_))));
        }
    }

    #[test]
    fn psi0_reflection_symmetry() {
        let f = frame(41, 40);
        let p = f.prec();
        for (a, b) in [(1.7, 0.1), (2.3, -0.05), (4.0, 1.0), (0.5, -0.3)] {
            let z = f.ctx.complex((a, b));
            let m = psi0(&f, &z, SideHint::default()).unwrap();
            let r = psi0(&f, &Complex::with_val(p, -&z), SideHint::default()).unwrap().sigma3_conj().scale(&Complex::with_val(p, -1));
            assert!(close(&m, &r, &(f.ctx.eps() * 16u32)));
        }
    }
}
