use super::{cubic_real, Cubic, LaxError, LaxFrame};
use crate::numerics::NumericsError;
use crate::ortho::psi_values;
use rug::Float;

const MAX_TERMS: usize = 50_000;

/// A solution Φ = (φₙ, φₙ₋₁)ᵀ of Φ′ = N·AₙΦ and its derivative at one point.
#[derive(Clone, Debug)]
pub struct SecondSolution {
    pub value: [Float; 2],
    pub deriv: [Float; 2],
}

/// Taylor coefficients of a cubic re-expanded about z0.
fn shift(c: &Cubic, z0: &Float) -> Cubic {
    let p = c[0].prec();
    let z2 = Float::with_val(p, z0 * z0);
    let b0 = cubic_real(c, z0);
    let b1 = Float::with_val(p, &c[1]) + Float::with_val(p, &c[2] * z0) * 2u32 + Float::with_val(p, &c[3] * &z2) * 3u32;
    let b2 = Float::with_val(p, &c[2]) + Float::with_val(p, &c[3] * z0) * 3u32;
    [b0, b1, b2, Float::with_val(p, &c[3])]
}

/// Solves Φ′ = N·AₙΦ with Φ(z0) = (1, 0)ᵀ by its Taylor series about z0 and
/// evaluates at z. Aₙ is a cubic, so the series is entire; the working
/// precision is raised by 64 bits to absorb cancellation between large terms.
pub fn second_solution(frame: &LaxFrame, z0: &Float, z: &Float) -> Result<SecondSolution, LaxError> {
    let p = frame.ctx.bits + 64;
    let polys = frame.a_polys(frame.n)?;
    let z0p = Float::with_val(p, z0);
    let coeffs: Vec<Cubic> = polys
        .iter()
        .map(|c| shift(&c.clone().map(|x| Float::with_val(p, x)), &z0p))
        .collect();
    let nn = frame.scale();
    let h = Float::with_val(p, z - &z0p);
    let eps = Float::with_val(p, 1) >> (frame.ctx.bits + 8);

    let mut terms: Vec<[Float; 2]> = vec![[Float::with_val(p, 1), Float::with_val(p, 0)]];
    let mut value = terms[0].clone();
    let mut deriv = [Float::with_val(p, 0), Float::with_val(p, 0)];
    let mut hk = Float::with_val(p, 1); // h^k
    let mut quiet = 0;
    for k in 0..MAX_TERMS {
        // v_{k+1} = N/(k+1) Σ_{j≤3} A_j v_{k−j}
        let mut next = [Float::with_val(p, 0), Float::with_val(p, 0)];
        for j in 0..=3.min(k) {
            let v = &terms[k - j];
            for row in 0..2 {
                let a = &coeffs[2 * row][j];
                let b = &coeffs[2 * row + 1][j];
                next[row] += Float::with_val(p, a * &v[0]) + Float::with_val(p, b * &v[1]);
            }
        }
        for x in next.iter_mut() {
            *x *= nn;
            *x /= (k + 1) as u32;
        }
        // (k+1)·h^k
        let hk1 = Float::with_val(p, &hk * (k + 1) as u32);
        hk *= &h;
        let mut size = Float::with_val(p, 0);
        for row in 0..2 {
            let t = Float::with_val(p, &next[row] * &hk);
            size = size.max(&Float::with_val(p, t.abs_ref()));
            value[row] += t;
            deriv[row] += Float::with_val(p, &next[row] * &hk1);
        }
        terms.push(next);
        let scale = Float::with_val(p, value[0].abs_ref()).max(&Float::with_val(p, value[1].abs_ref()));
        if k > 8 && size <= Float::with_val(p, &scale * &eps) {
            quiet += 1;
            if quiet >= 4 {
                let bits = frame.ctx.bits;
                let out = |a: &[Float; 2]| [Float::with_val(bits, &a[0]), Float::with_val(bits, &a[1])];
                return Ok(SecondSolution { value: out(&value), deriv: out(&deriv) });
            }
        } else {
            quiet = 0;
        }
    }
    Err(NumericsError::NonFinite(format!("Taylor series for the second solution did not settle at z = {}", z.to_f64())).into())
}

/// |det[Ψₙ(z), Φₙ(z)] − det[Ψₙ(z0), Φₙ(z0)]| / |det at z0| at each z.
pub fn wronskian_residuals(frame: &LaxFrame, z0: &Float, zs: &[Float]) -> Result<Vec<Float>, LaxError> {
    let p = frame.ctx.bits;
    let n = frame.n;
    let base_psi = psi_values(frame.table, n, z0)?;
    // Φ(z0) = (1, 0)ᵀ
    let base = -Float::with_val(p, &base_psi[n - 1]);
    zs.iter()
        .map(|z| {
            let psi = psi_values(frame.table, n, z)?;
            let phi = second_solution(frame, z0, z)?;
            let w = Float::with_val(p, &psi[n] * &phi.value[1]) - Float::with_val(p, &psi[n - 1] * &phi.value[0]);
            Ok(Float::with_val(p, &w - &base).abs() / base.clone().abs())
        })
        .collect()
}

/// Moves Φₙ to Φₙ₊₁ = UₙΦₙ and measures how far Φₙ₊₁ is from solving
/// Φ′ = N·Aₙ₊₁Φ, relative to N|Aₙ₊₁Φₙ₊₁|. Also returns the ratio of the
/// transported Wronskian to det Uₙ times the original one, minus 1.
pub fn transported_ode_residual(frame: &LaxFrame, z0: &Float, z: &Float) -> Result<(Float, Float), LaxError> {
    let p = frame.ctx.bits;
    let n = frame.n;
    let phi = second_solution(frame, z0, z)?;
    let u = frame.u_real(z);
    let apply = |m: &[Float; 4], v: &[Float; 2]| {
        [
            Float::with_val(p, &m[0] * &v[0]) + Float::with_val(p, &m[1] * &v[1]),
            Float::with_val(p, &m[2] * &v[0]) + Float::with_val(p, &m[3] * &v[1]),
        ]
    };
    let next = apply(&u, &phi.value);
    let du = Float::with_val(p, frame.table.sqrt_r[n + 1].clone().recip());
    let mut dnext = apply(&u, &phi.deriv);
    dnext[0] += Float::with_val(p, &du * &phi.value[0]);
    let a = frame.a_real(n + 1, z)?;
    let rhs = apply(&a, &next);
    let nn = frame.scale();
    let mut worst = Float::with_val(p, 0);
    for row in 0..2 {
        let r = Float::with_val(p, &rhs[row] * nn);
        let scale = (Float::with_val(p, &a[2 * row] * &next[0]).abs() + Float::with_val(p, &a[2 * row + 1] * &next[1]).abs()) * nn;
        worst = worst.max(&(Float::with_val(p, &dnext[row] - &r).abs() / scale));
    }

    let psi = psi_values(frame.table, n + 1, z)?;
    let w0 = Float::with_val(p, &psi[n] * &phi.value[1]) - Float::with_val(p, &psi[n - 1] * &phi.value[0]);
    let w1 = Float::with_val(p, &psi[n + 1] * &next[1]) - Float::with_val(p, &psi[n] * &next[0]);
    let det_u = Float::with_val(p, &frame.table.sqrt_r[n] / &frame.table.sqrt_r[n + 1]);
    let ratio = w1 / (w0 * det_u) - 1u32;
    Ok((worst, ratio.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::PrecisionCtx;
    use crate::ortho::{build_table, RecurrenceTable, WeightParams};

    fn table() -> RecurrenceTable {
        let ctx = PrecisionCtx::new(192).unwrap();
        let p = WeightParams::from_f64(-4.0, 1.0, 10).unwrap();
        build_table(&p, 16, &ctx).unwrap()
    }

    #[test]
    fn taylor_solution_solves_ode() {
        let t = table();
        let ctx = t.ctx();
        let f = LaxFrame::new(&t, 10).unwrap();
        let z0 = ctx.real(1.3);
        for &x in &[0.9, 1.3, 1.8] {
            let z = ctx.real(x);
            let s = second_solution(&f, &z0, &z).unwrap();
            let a = f.a_real(10, &z).unwrap();
            let r0 = (Float::with_val(ctx.bits, &a[0] * &s.value[0]) + Float::with_val(ctx.bits, &a[1] * &s.value[1])) * 10u32;
            let err = Float::with_val(ctx.bits, &r0 - &s.deriv[0]).abs();
            assert!(err < Float::with_val(ctx.bits, r0.abs_ref()) * ctx.quad_rel_tol(), "z = {x}");
        }
    }

    #[test]
    fn wronskian_is_constant_in_z() {
        let t = table();
        let ctx = t.ctx();
        let f = LaxFrame::new(&t, 10).unwrap();
        let zs: Vec<Float> = [0.6, 1.0, 1.5, 2.0].iter().map(|&x| ctx.real(x)).collect();
        for r in wronskian_residuals(&f, &ctx.real(1.3), &zs).unwrap() {
            assert!(r < ctx.quad_rel_tol() * 1000u32, "{}", r.to_f64());
        }
    }

    #[test]
    fn transport_keeps_solution_property() {
        let t = table();
        let ctx = t.ctx();
        let f = LaxFrame::new(&t, 9).unwrap();
        let (ode, det) = transported_ode_residual(&f, &ctx.real(1.2), &ctx.real(1.7)).unwrap();
        assert!(ode < ctx.quad_rel_tol() * 1000u32, "{}", ode.to_f64());
        assert!(det < ctx.eps() * 1024u32, "{}", det.to_f64());
    }
}
