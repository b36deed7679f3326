use super::{NumericsError, PrecisionCtx};
use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float};

/// Largest |z| accepted by the complex Maclaurin evaluation.
pub fn complex_series_bound(_ctx: &PrecisionCtx) -> f64 {
    80.0
}

/// Crossover between the Maclaurin series and the asymptotic expansion.
///
/// The smallest term of the asymptotic series is about e^{-2ζ}, ζ = (2/3)|x|^{3/2},
/// so we need 2ζ ≥ (bits + 16)·ln 2.
pub fn airy_x_switch(ctx: &PrecisionCtx) -> f64 {
    let zeta = (ctx.bits as f64 + 16.0) * std::f64::consts::LN_2 / 2.0;
    (1.5 * zeta).powf(2.0 / 3.0)
}

fn extra_bits(abs_z: f64) -> u32 {
    (4.0 / 3.0 * abs_z.powf(1.5) * std::f64::consts::LOG2_E).ceil() as u32 + 64
}

fn airy_constants(prec: u32) -> (Float, Float) {
    let three = Float::with_val(prec, 3);
    let c1 = Float::with_val(prec, three.clone().pow(Float::with_val(prec, -2) / 3u32))
        / Float::with_val(prec, Float::with_val(prec, 2) / 3u32).gamma();
    let c2 = Float::with_val(prec, three.pow(Float::with_val(prec, -1) / 3u32))
        / Float::with_val(prec, Float::with_val(prec, 1) / 3u32).gamma();
    (c1, c2)
}

/// Ai, Ai′ from the Maclaurin series for real `x`, at precision `prec`.
pub fn airy_series_pair(x: &Float, prec: u32) -> (Float, Float) {
    let wp = prec + extra_bits(x.to_f64().abs());
    let x = Float::with_val(wp, x);
    let x3 = Float::with_val(wp, x.clone().pow(3u32));
    let (c1, c2) = airy_constants(wp);
    let tiny = wp as i32 + 8;
    // f = Σ a_k, g = Σ b_k and their derivatives
    let mut a = Float::with_val(wp, 1);
    let mut b = x.clone();
    let mut ap = Float::with_val(wp, &x * &x) / 2u32;
    let mut bp = Float::with_val(wp, 1);
    let mut f = a.clone();
    let mut g = b.clone();
    let mut fp = ap.clone();
    let mut gp = bp.clone();
    for k in 1u32.. {
        a *= &x3;
        a /= (3 * k - 1) * (3 * k);
        b *= &x3;
        b /= (3 * k) * (3 * k + 1);
        if k >= 2 {
            ap *= &x3;
            ap /= (3 * k - 1) * (3 * k - 3);
            fp += &ap;
        }
        bp *= &x3;
        bp /= (3 * k) * (3 * k - 2);
        f += &a;
        g += &b;
        gp += &bp;
        if k > 2 && negligible(&[&a, &b, &ap, &bp], tiny) {
            break;
        }
    }
    let ai = Float::with_val(wp, &c1 * &f) - Float::with_val(wp, &c2 * &g);
    let aip = Float::with_val(wp, &c1 * &fp) - Float::with_val(wp, &c2 * &gp);
    (Float::with_val(prec, ai), Float::with_val(prec, aip))
}

fn negligible(terms: &[&Float], bits: i32) -> bool {
    terms.iter().all(|t| t.is_zero() || t.get_exp().map_or(true, |e| e < -bits))
}

/// Ai″ summed directly from the twice-differentiated series.
pub fn airy_second_derivative_series(x: &Float, prec: u32) -> Float {
    let wp = prec + extra_bits(x.to_f64().abs());
    let x = Float::with_val(wp, x);
    let x3 = Float::with_val(wp, x.clone().pow(3u32));
    let (c1, c2) = airy_constants(wp);
    let tiny = wp as i32 + 8;
    let mut a = x.clone();
    let mut b = Float::with_val(wp, &x * &x);
    let mut f = a.clone();
    let mut g = b.clone();
    for k in 2u32.. {
        a *= &x3;
        a /= (3 * k - 3) * (3 * k - 4);
        b *= &x3;
        b /= (3 * k - 2) * (3 * k - 3);
        f += &a;
        g += &b;
        if negligible(&[&a, &b], tiny) {
            break;
        }
    }
    Float::with_val(prec, Float::with_val(wp, &c1 * &f) - Float::with_val(wp, &c2 * &g))
}

/// Ai, Ai′ from the Maclaurin series for complex `z`.
pub fn airy_series_complex(z: &Complex, prec: u32) -> (Complex, Complex) {
    let absz = Float::with_val(53, z.abs_ref()).to_f64();
    let wp = prec + extra_bits(absz);
    let z = Complex::with_val(wp, z);
    let z3 = Complex::with_val(wp, z.clone().pow(3u32));
    let (c1, c2) = airy_constants(wp);
    let tiny = wp as i32 + 8;
    let mut a = Complex::with_val(wp, 1);
    let mut b = z.clone();
    let mut ap = Complex::with_val(wp, &z * &z) / 2u32;
    let mut bp = Complex::with_val(wp, 1);
    let mut f = a.clone();
    let mut g = b.clone();
    let mut fp = ap.clone();
    let mut gp = bp.clone();
    for k in 1u32.. {
        a *= &z3;
        a /= (3 * k - 1) * (3 * k);
        b *= &z3;
        b /= (3 * k) * (3 * k + 1);
        if k >= 2 {
            ap *= &z3;
            ap /= (3 * k - 1) * (3 * k - 3);
            fp += &ap;
        }
        bp *= &z3;
        bp /= (3 * k) * (3 * k - 2);
        f += &a;
        g += &b;
        gp += &bp;
        if k > 2 && negligible_c(&[&a, &b, &ap, &bp], tiny) {
            break;
        }
    }
    let ai = Complex::with_val(wp, &f * &c1) - Complex::with_val(wp, &g * &c2);
    let aip = Complex::with_val(wp, &fp * &c1) - Complex::with_val(wp, &gp * &c2);
    (Complex::with_val(prec, ai), Complex::with_val(prec, aip))
}

fn negligible_c(terms: &[&Complex], bits: i32) -> bool {
    terms.iter().all(|t| {
        let m = Float::with_val(64, t.abs_ref());
        m.is_zero() || m.get_exp().map_or(true, |e| e < -bits)
    })
}

fn asymptotic_coefficients(prec: u32, count: usize) -> (Vec<Float>, Vec<Float>) {
    let mut u = vec![Float::with_val(prec, 1)];
    let mut v = vec![Float::with_val(prec, 1)];
    for k in 1..count as u64 {
        let num = (6 * k - 5) * (6 * k - 3) * (6 * k - 1);
        let den = (2 * k - 1) * 216 * k;
        let uk = Float::with_val(prec, &u[k as usize - 1] * num) / den;
        let vk = -Float::with_val(prec, &uk * (6 * k + 1)) / (6 * k - 1);
        u.push(uk);
        v.push(vk);
    }
    (u, v)
}

/// Ai, Ai′ from the large-|x| asymptotic expansions (both signs of x).
pub fn airy_asymptotic_pair(x: &Float, prec: u32) -> (Float, Float) {
    let wp = prec + 32;
    let x = Float::with_val(wp, x);
    let ax = x.clone().abs();
    let zeta = Float::with_val(wp, ax.clone().pow(Float::with_val(wp, 1.5))) * 2u32 / 3u32;
    let inv = Float::with_val(wp, zeta.clone().recip());
    let sqrt_pi = Float::with_val(wp, Constant::Pi).sqrt();
    let q = ax.clone().sqrt().sqrt();
    let target = -(wp as i32) - 4;
    let (u, v) = asymptotic_coefficients(wp, 600);
    // terms c_k ζ^{-k}; stop when negligible or no longer decreasing
    let mut terms_u = Vec::new();
    let mut terms_v = Vec::new();
    let mut p = Float::with_val(wp, 1);
    let mut last = Float::with_val(wp, f64::INFINITY);
    for k in 0..u.len() {
        let tu = Float::with_val(wp, &u[k] * &p);
        let tv = Float::with_val(wp, &v[k] * &p);
        let m = tu.clone().abs().max(&tv.clone().abs());
        if k > 2 && m > last {
            break;
        }
        terms_u.push(tu);
        terms_v.push(tv);
        if m.get_exp().map_or(true, |e| e < target) {
            break;
        }
        last = m;
        p *= &inv;
    }
    if x.is_sign_positive() {
        let mut su = Float::with_val(wp, 0);
        let mut sv = Float::with_val(wp, 0);
        for (k, (tu, tv)) in terms_u.iter().zip(&terms_v).enumerate() {
            if k % 2 == 0 {
                su += tu;
                sv += tv;
            } else {
                su -= tu;
                sv -= tv;
            }
        }
        let e = Float::with_val(wp, -&zeta).exp();
        let ai = Float::with_val(wp, &e * &su) / Float::with_val(wp, &sqrt_pi * &q) / 2u32;
        let aip = -Float::with_val(wp, &e * &sv) * &q / &sqrt_pi / 2u32;
        (Float::with_val(prec, ai), Float::with_val(prec, aip))
    } else {
        // even and odd parts with alternating signs
        let mut ue = Float::with_val(wp, 0);
        let mut uo = Float::with_val(wp, 0);
        let mut ve = Float::with_val(wp, 0);
        let mut vo = Float::with_val(wp, 0);
        for (k, (tu, tv)) in terms_u.iter().zip(&terms_v).enumerate() {
            let neg = (k / 2) % 2 == 1;
            let (us, vs) = if k % 2 == 0 { (&mut ue, &mut ve) } else { (&mut uo, &mut vo) };
            if neg {
                *us -= tu;
                *vs -= tv;
            } else {
                *us += tu;
                *vs += tv;
            }
        }
        let quarter_pi = Float::with_val(wp, Constant::Pi) / 4u32;
        let arg = Float::with_val(wp, &zeta - &quarter_pi);
        let (s, c) = arg.sin_cos(Float::new(wp));
        let ai = (Float::with_val(wp, &c * &ue) + Float::with_val(wp, &s * &uo)) / Float::with_val(wp, &sqrt_pi * &q);
        let aip = (Float::with_val(wp, &s * &ve) - Float::with_val(wp, &c * &vo)) * &q / &sqrt_pi;
        (Float::with_val(prec, ai), Float::with_val(prec, aip))
    }
}

/// (Ai(x), Ai′(x)) at context precision.
pub fn airy_pair(x: &Float, ctx: &PrecisionCtx) -> (Float, Float) {
    if x.to_f64().abs() <= airy_x_switch(ctx) {
        airy_series_pair(x, ctx.bits)
    } else {
        airy_asymptotic_pair(x, ctx.bits)
    }
}

pub fn airy_ai(x: &Float, ctx: &PrecisionCtx) -> Float {
    airy_pair(x, ctx).0
}

pub fn airy_ai_prime(x: &Float, ctx: &PrecisionCtx) -> Float {
    airy_pair(x, ctx).1
}

/// Complex Ai by the Maclaurin series, restricted to |z| ≤ `complex_series_bound`.
pub fn airy_ai_complex(z: &Complex, ctx: &PrecisionCtx) -> Result<Complex, NumericsError> {
    Ok(airy_complex_pair(z, ctx)?.0)
}

pub fn airy_ai_prime_complex(z: &Complex, ctx: &PrecisionCtx) -> Result<Complex, NumericsError> {
    Ok(airy_complex_pair(z, ctx)?.1)
}

/// Complex (Ai, Ai′) by the Maclaurin series, restricted to |z| ≤ `complex_series_bound`.
pub fn airy_complex_pair(z: &Complex, ctx: &PrecisionCtx) -> Result<(Complex, Complex), NumericsError> {
    let absz = Float::with_val(53, z.abs_ref()).to_f64();
    if !(absz <= complex_series_bound(ctx)) {
        return Err(NumericsError::SeriesDomainExceeded(absz));
    }
    Ok(airy_series_complex(z, ctx.bits))
}

/// Compare both real branches around the crossover; returns the largest
/// discrepancy measured against the envelope |x|^{∓1/4}·e^{-ζ⁺}/√π.
pub fn airy_overlap_check(ctx: &PrecisionCtx) -> Float {
    let xs = airy_x_switch(ctx);
    let prec = ctx.bits;
    let mut worst = Float::with_val(prec, 0);
    for &s in &[1.0, -1.0] {
        for &f in &[1.0, 1.03, 1.07] {
            let x = Float::with_val(prec, s * xs * f);
            let (a1, d1) = airy_series_pair(&x, prec);
            let (a2, d2) = airy_asymptotic_pair(&x, prec);
            let ax = Float::with_val(prec, x.clone().abs());
            let zeta = Float::with_val(prec, ax.clone().pow(Float::with_val(prec, 1.5))) * 2u32 / 3u32;
            let decay = if s > 0.0 { Float::with_val(prec, -zeta).exp() } else { Float::with_val(prec, 1) };
            let q = ax.sqrt().sqrt();
            let env_a = Float::with_val(prec, &decay / &q);
            let env_d = Float::with_val(prec, &decay * &q);
            let ea = Float::with_val(prec, &a1 - &a2).abs() / env_a;
            let ed = Float::with_val(prec, &d1 - &d2).abs() / env_d;
            worst = worst.max(&ea).max(&ed);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionCtx {
        PrecisionCtx::default()
    }

    fn rel(a: &Float, b: &Float) -> Float {
        Float::with_val(a.prec(), a - b).abs() / b.clone().abs()
    }

    #[test]
    fn values_at_origin() {
        let c = ctx();
        let (a, d) = airy_pair(&c.zero(), &c);
        // Ai(0) = 3^{-2/3}/Γ(2/3) summed independently via Γ(2/3) = π/(sin(π/3)Γ(1/3))
        let g13 = Float::with_val(c.bits, Float::with_val(c.bits, 1) / 3u32).gamma();
        let s = Float::with_val(c.bits, c.pi() / 3u32).sin();
        let g23 = c.pi() / (s * &g13);
        let ai0 = Float::with_val(c.bits, c.real(3).cbrt().recip().pow(2u32)) / g23;
        assert!(rel(&a, &ai0) < c.eps());
        assert!((a.to_f64() - 0.3550280538).abs() < 1e-10);
        assert!((d.to_f64() + 0.2588194038).abs() < 1e-10);
    }

    #[test]
    fn matches_mpfr_on_grid() {
        let c = ctx();
        for i in -40..=40 {
            let x = c.real(i) / 4u32;
            let a = airy_ai(&x, &c);
            let m = Float::with_val(c.bits, x.ai_ref());
            let d = Float::with_val(c.bits, &a - &m).abs();
            assert!(d <= Float::with_val(c.bits, c.eps() * m.abs().max(&c.real(1e-30))) * 4u32, "x = {x}");
        }
    }

    #[test]
    fn asymptotic_branch_matches_mpfr() {
        let c = ctx();
        for &x in &[45.0f64, 60.0, -45.0, -80.0] {
            let xf = c.real(x);
            let a = airy_ai(&xf, &c);
            let m = Float::with_val(c.bits, xf.ai_ref());
            let env = if x > 0.0 { m.clone().abs() } else { c.real(x.abs().powf(-0.25)) };
            let d = Float::with_val(c.bits, &a - &m).abs() / env;
            assert!(d < c.eps(), "x = {x}: {d}");
        }
    }

    #[test]
    fn branches_agree_in_overlap() {
        let c = ctx();
        assert!(airy_overlap_check(&c) < c.eps());
    }

    #[test]
    fn ode_residual_on_grid() {
        let c = ctx();
        for i in -20..=20 {
            let x = c.real(i) / 2u32;
            let a = airy_ai(&x, &c);
            let a2 = airy_second_derivative_series(&x, c.bits);
            let xa = Float::with_val(c.bits, &x * &a);
            let res = Float::with_val(c.bits, &a2 - &xa).abs();
            let bound = Float::with_val(c.bits, xa.abs() + 1u32) * c.eps() * 1000u32;
            assert!(res <= bound);
        }
    }

    #[test]
    fn connection_relation() {
        let c = ctx();
        let w = Complex::with_val(c.bits, (Float::with_val(c.bits, -0.5), c.real(3).sqrt() / 2u32));
        let wb = w.clone().conj();
        for &x in &[-3.0, -0.7, 0.0, 1.3, 4.0] {
            let z = c.complex((x, 0.35));
            let a0 = airy_ai_complex(&z, &c).unwrap();
            let a1 = airy_ai_complex(&Complex::with_val(c.bits, &w * &z), &c).unwrap();
            let a2 = airy_ai_complex(&Complex::with_val(c.bits, &wb * &z), &c).unwrap();
            let s = a0.clone() + Complex::with_val(c.bits, &w * &a1) + Complex::with_val(c.bits, &wb * &a2);
            let m = Float::with_val(c.bits, s.abs_ref());
            assert!(m < c.eps() * 16u32, "x = {x}: {m}");
        }
    }

    #[test]
    fn complex_series_agrees_with_real() {
        let c = ctx();
        let x = c.real(-2.5);
        let (a, d) = airy_pair(&x, &c);
        let (ac, dc) = airy_series_complex(&c.complex(&x), c.bits);
        assert!(Float::with_val(c.bits, ac.real() - &a).abs() < c.eps());
        assert!(Float::with_val(c.bits, dc.real() - &d).abs() < c.eps());
        assert!(ac.imag().is_zero());
    }

    #[test]
    fn series_domain_enforced() {
        let c = ctx();
        assert!(matches!(
            airy_ai_complex(&c.complex((100, 0)), &c),
            Err(NumericsError::SeriesDomainExceeded(_))
        ));
    }
}
