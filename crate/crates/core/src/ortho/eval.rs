use super::table::{truncation_radius, RecurrenceTable};
use crate::numerics::integrate;
use super::OrthoError;
use rug::{Complex, Float};

fn check(table: &RecurrenceTable, n: usize) -> Result<(), OrthoError> {
    if n > table.max_degree() {
        Err(OrthoError::IndexOutOfRange { n, max: table.max_degree() })
    } else {
        Ok(())
    }
}

/// Monic Pₙ(z) by the three-term recurrence z Pₙ = Pₙ₊₁ + Rₙ Pₙ₋₁.
pub fn eval_pn(table: &RecurrenceTable, n: usize, z: &Float) -> Result<Float, OrthoError> {
    check(table, n)?;
    let p = table.bits.max(z.prec());
    let mut prev = Float::with_val(p, 1);
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = Float::with_val(p, z);
    for k in 1..n {
        let next = Float::with_val(p, z * &cur) - Float::with_val(p, &table.r[k] * &prev);
        prev = std::mem::replace(&mut cur, next);
    }
    Ok(cur)
}

pub fn eval_pn_complex(table: &RecurrenceTable, n: usize, z: &Complex) -> Result<Complex, OrthoError> {
    check(table, n)?;
    let p = table.bits;
    let mut prev = Complex::with_val(p, 1);
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = Complex::with_val(p, z);
    for k in 1..n {
        let next = Complex::with_val(p, z * &cur) - Complex::with_val(p, &prev * &table.r[k]);
        prev = std::mem::replace(&mut cur, next);
    }
    Ok(cur)
}

/// ψ₀(z), …, ψ_upto(z) by the orthonormal recurrence z ψₙ = √Rₙ₊₁ ψₙ₊₁ + √Rₙ ψₙ₋₁.
pub fn psi_values(table: &RecurrenceTable, upto: usize, z: &Float) -> Result<Vec<Float>, OrthoError> {
    check(table, upto)?;
    let p = table.bits;
    let z = Float::with_val(p, z);
    let half_nv = table.params.potential(&z) * table.params.scale / 2u32;
    let first = (-half_nv).exp() / table.h[0].clone().sqrt();
    let mut out = Vec::with_capacity(upto + 1);
    out.push(first);
    for n in 0..upto {
        let mut v = Float::with_val(p, &z * &out[n]);
        if n > 0 {
            v -= Float::with_val(p, &table.sqrt_r[n] * &out[n - 1]);
        }
        out.push(v / &table.sqrt_r[n + 1]);
    }
    Ok(out)
}

pub fn psi_values_complex(table: &RecurrenceTable, upto: usize, z: &Complex) -> Result<Vec<Complex>, OrthoError> {
    check(table, upto)?;
    let p = table.bits;
    let z = Complex::with_val(p, z);
    let half_nv = table.params.potential_complex(&z) * table.params.scale / 2u32;
    let first = Complex::with_val(p, (-half_nv).exp()) / table.h[0].clone().sqrt();
    let mut out = Vec::with_capacity(upto + 1);
    out.push(first);
    for n in 0..upto {
        let mut v = Complex::with_val(p, &z * &out[n]);
        if n > 0 {
            v -= Complex::with_val(p, &out[n - 1] * &table.sqrt_r[n]);
        }
        out.push(v / &table.sqrt_r[n + 1]);
    }
    Ok(out)
}

/// ψₙ(z) = Pₙ(z) e^{-NV(z)/2} / √hₙ.
pub fn eval_psi(table: &RecurrenceTable, n: usize, z: &Float) -> Result<Float, OrthoError> {
    Ok(psi_values(table, n, z)?.pop().unwrap())
}

pub fn eval_psi_complex(table: &RecurrenceTable, n: usize, z: &Complex) -> Result<Complex, OrthoError> {
    Ok(psi_values_complex(table, n, z)?.pop().unwrap())
}

/// Coefficients (c₋₃, c₋₁, c₊₁, c₊₃) with ψₙ′ = Σ cⱼ ψₙ₊ⱼ.
pub fn deriv_coefficients(table: &RecurrenceTable, n: usize) -> Result<[Float; 4], OrthoError> {
    check(table, n + 3)?;
    let ctx = table.ctx();
    let p = ctx.bits;
    let t = table.params.t_at(&ctx);
    let g = table.params.g_at(&ctx);
    let nn = table.params.scale;
    let r = |k: isize| if k <= 0 { Float::with_val(p, 0) } else { table.r[k as usize].clone() };
    let sr = |k: isize| if k <= 0 { Float::with_val(p, 0) } else { table.sqrt_r[k as usize].clone() };
    let n = n as isize;
    let half_ng = Float::with_val(p, &g * nn) / 2u32;
    let half_nt = Float::with_val(p, &t * nn) / 2u32;
    let up3 = -Float::with_val(p, &half_ng * Float::with_val(p, sr(n + 1) * sr(n + 2)) * sr(n + 3));
    let s1 = Float::with_val(p, r(n) + r(n + 1)) + r(n + 2);
    let up1 = -(Float::with_val(p, &half_nt * sr(n + 1)) + Float::with_val(p, &half_ng * sr(n + 1)) * s1);
    let s2 = Float::with_val(p, r(n - 1) + r(n)) + r(n + 1);
    let dn1 = Float::with_val(p, &half_nt * sr(n)) + Float::with_val(p, &half_ng * sr(n)) * s2;
    let dn3 = Float::with_val(p, &half_ng * Float::with_val(p, sr(n - 2) * sr(n - 1)) * sr(n));
    Ok([dn3, dn1, up1, up3])
}

fn combine(c: &[Float; 4], psi: &[Float], n: usize, p: u32) -> Float {
    let mut s = Float::with_val(p, &c[2] * &psi[n + 1]) + Float::with_val(p, &c[3] * &psi[n + 3]);
    if n >= 1 {
        s += Float::with_val(p, &c[1] * &psi[n - 1]);
    }
    if n >= 3 {
        s += Float::with_val(p, &c[0] * &psi[n - 3]);
    }
    s
}

/// ψₙ′(z) from the exact four-term formula in ψₙ₊₃, ψₙ₊₁, ψₙ₋₁, ψₙ₋₃.
///
/// Needs n + 3 ≤ M; for n < 3 the missing lower terms carry a factor R₀ = 0.
pub fn eval_psi_deriv(table: &RecurrenceTable, n: usize, z: &Float) -> Result<Float, OrthoError> {
    let c = deriv_coefficients(table, n)?;
    let psi = psi_values(table, n + 3, z)?;
    Ok(combine(&c, &psi, n, table.bits))
}

/// ψₙ′ from precomputed ψ values (ψ₀..ψₙ₊₃ at one point).
pub fn psi_deriv_from_values(table: &RecurrenceTable, n: usize, psi: &[Float]) -> Result<Float, OrthoError> {
    let c = deriv_coefficients(table, n)?;
    Ok(combine(&c, psi, n, table.bits))
}

pub fn eval_psi_deriv_complex(table: &RecurrenceTable, n: usize, z: &Complex) -> Result<Complex, OrthoError> {
    let c = deriv_coefficients(table, n)?;
    let psi = psi_values_complex(table, n + 3, z)?;
    let p = table.bits;
    let mut s = Complex::with_val(p, &psi[n + 1] * &c[2]) + Complex::with_val(p, &psi[n + 3] * &c[3]);
    if n >= 1 {
        s += Complex::with_val(p, &psi[n - 1] * &c[1]);
    }
    if n >= 3 {
        s += Complex::with_val(p, &psi[n - 3] * &c[0]);
    }
    Ok(s)
}
/// Max-entry deviation of the Gram matrix ∫ψⱼψₖ dz (j, k ≤ kmax) from the
/// identity, by quadrature over [−Z, Z] with Z the truncation radius.
pub fn gram_deviation(table: &RecurrenceTable, kmax: usize) -> Result<Float, OrthoError> {
    check(table, kmax)?;
    let ctx = table.ctx();
    let p = ctx.bits;
    let z = Float::with_val(p, truncation_radius(&table.params, kmax, &ctx));
    let products = |x: &Float| {
        let psi = psi_values(table, kmax, x).expect("degree checked");
        let mut out = Vec::with_capacity((kmax + 1) * (kmax + 2) / 2);
        for j in 0..=kmax {
            for k in j..=kmax {
                out.push(Float::with_val(p, &psi[j] * &psi[k]));
            }
        }
        out
    };
    let right = integrate(products, &ctx.zero(), &z, &ctx)?.value;
    let left = integrate(products, &Float::with_val(p, -&z), &ctx.zero(), &ctx)?.value;
    let mut worst = ctx.zero();
    let mut idx = 0;
    for j in 0..=kmax {
        for k in j..=kmax {
            let mut g = Float::with_val(p, &right[idx] + &left[idx]);
            if j == k {
                g -= 1u32;
            }
            worst = worst.max(&g.abs());
            idx += 1;
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::PrecisionCtx;
    use crate::ortho::{build_table, WeightParams};

    #[test]
    fn gram_is_identity() {
        let c = PrecisionCtx::new(192).unwrap();
        let p = WeightParams::from_f64(-4.0, 1.0, 6).unwrap();
        let table = build_table(&p, 12, &c).unwrap();
        let dev = gram_deviation(&table, 8).unwrap();
        assert!(dev < c.quad_rel_tol() * 10.0, "{}", dev.to_f64());
        assert!(gram_deviation(&table, 13).is_err());
    }
}
