//! Difference/differential system satisfied by the wavefunction vectors
//! (ψₙ, ψₙ₋₁)ᵀ: the shift matrix Uₙ, the derivative matrix Aₙ, their
//! determinant and compatibility identities, and the scalar Schrödinger form.
//! Every identity is exposed as a residual evaluated on an oracle table.

mod second;
mod sweep;

pub use second::{second_solution, transported_ode_residual, wronskian_residuals, SecondSolution};
pub use sweep::{residual_sweep, ResidualKind, ResidualRow, ResidualSweep};

use crate::numerics::{Matrix2C, NumericsError, PrecisionCtx};
use crate::ortho::{psi_deriv_from_values, psi_values, OrthoError, RecurrenceTable};
use rug::{Complex, Float};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LaxError {
    #[error("a12 vanishes near z = {0}")]
    A12Zero(f64),
    #[error("output failed: {0}")]
    Report(String),
    #[error(transparent)]
    Ortho(#[from] OrthoError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Cubic polynomial c₀ + c₁z + c₂z² + c₃z³.
pub(crate) type Cubic = [Float; 4];

pub(crate) fn cubic_real(c: &Cubic, z: &Float) -> Float {
    let p = c[0].prec();
    let mut acc = Float::with_val(p, &c[3]);
    for k in (0..3).rev() {
        acc = Float::with_val(p, &acc * z) + &c[k];
    }
    acc
}

fn cubic_complex(c: &Cubic, z: &Complex) -> Complex {
    let p = c[0].prec();
    let mut acc = Complex::with_val(p, &c[3]);
    for k in (0..3).rev() {
        acc = Complex::with_val(p, &acc * z) + &c[k];
    }
    acc
}

fn cubic_deriv(c: &Cubic) -> Cubic {
    let p = c[0].prec();
    [
        Float::with_val(p, &c[1]),
        Float::with_val(p, &c[2] * 2u32),
        Float::with_val(p, &c[3] * 3u32),
        Float::with_val(p, 0),
    ]
}

/// Index n of the pair (ψₙ, ψₙ₋₁) on a fixed table, 1 ≤ n ≤ M − 1.
#[derive(Clone, Debug)]
pub struct LaxFrame<'a> {
    pub table: &'a RecurrenceTable,
    pub n: usize,
    pub ctx: PrecisionCtx,
    t: Float,
    g: Float,
}

impl<'a> LaxFrame<'a> {
    pub fn new(table: &'a RecurrenceTable, n: usize) -> Result<Self, LaxError> {
        let max = table.max_degree();
        if n == 0 || n + 1 > max {
            return Err(OrthoError::IndexOutOfRange { n, max }.into());
        }
        let ctx = table.ctx();
        let t = table.params.t_at(&ctx);
        let g = table.params.g_at(&ctx);
        Ok(LaxFrame { table, n, ctx, t, g })
    }

    pub fn scale(&self) -> u32 {
        self.table.params.scale
    }

    fn p(&self) -> u32 {
        self.ctx.bits
    }

    /// Rₖ with R₀ = 0.
    pub fn r(&self, k: usize) -> Float {
        if k == 0 {
            self.ctx.zero()
        } else {
            self.table.r[k].clone()
        }
    }

    /// θₖ = t + g(Rₖ + Rₖ₊₁).
    pub fn theta(&self, k: usize) -> Float {
        let s = Float::with_val(self.p(), self.r(k) + self.r(k + 1));
        Float::with_val(self.p(), &self.g * &s) + &self.t
    }

    fn require(&self, k: usize) -> Result<(), LaxError> {
        let max = self.table.max_degree();
        if k > max {
            return Err(OrthoError::IndexOutOfRange { n: k, max }.into());
        }
        Ok(())
    }

    /// Entries of Aₖ as cubics in z, row-major.
    pub(crate) fn a_polys(&self, k: usize) -> Result<[Cubic; 4], LaxError> {
        if k == 0 {
            return Err(OrthoError::IndexOutOfRange { n: 0, max: self.table.max_degree() }.into());
        }
        self.require(k + 1)?;
        let p = self.p();
        let z = self.ctx.zero();
        let half_g = Float::with_val(p, &self.g / 2u32);
        let lin = Float::with_val(p, &self.t / 2u32) + Float::with_val(p, &self.g * &self.table.r[k]);
        let a11 = [z.clone(), -lin.clone(), z.clone(), -half_g.clone()];
        let a22 = [z.clone(), lin, z.clone(), half_g];
        let s = &self.table.sqrt_r[k];
        let sg = Float::with_val(p, s * &self.g);
        let a12 = [Float::with_val(p, s * &self.theta(k)), z.clone(), sg.clone(), z.clone()];
        let a21 = [-Float::with_val(p, s * &self.theta(k - 1)), z.clone(), -sg, z];
        Ok([a11, a12, a21, a22])
    }

    fn a_at(&self, k: usize, z: &Complex) -> Result<Matrix2C, LaxError> {
        let [a11, a12, a21, a22] = self.a_polys(k)?;
        Ok(Matrix2C::new(cubic_complex(&a11, z), cubic_complex(&a12, z), cubic_complex(&a21, z), cubic_complex(&a22, z)))
    }

    fn a_real(&self, k: usize, z: &Float) -> Result<[Float; 4], LaxError> {
        let [a11, a12, a21, a22] = self.a_polys(k)?;
        Ok([cubic_real(&a11, z), cubic_real(&a12, z), cubic_real(&a21, z), cubic_real(&a22, z)])
    }

    fn a_real_deriv(&self, k: usize, z: &Float) -> Result<[Float; 4], LaxError> {
        let polys = self.a_polys(k)?;
        Ok(polys.map(|c| cubic_real(&cubic_deriv(&c), z)))
    }

    fn u_real(&self, z: &Float) -> [Float; 4] {
        let p = self.p();
        let s1 = &self.table.sqrt_r[self.n + 1];
        [
            Float::with_val(p, z / s1),
            -Float::with_val(p, &self.table.sqrt_r[self.n] / s1),
            Float::with_val(p, 1),
            Float::with_val(p, 0),
        ]
    }

    /// (tz + gz³)/2.
    fn half_poly(&self, z: &Float) -> Float {
        let p = self.p();
        let z2 = Float::with_val(p, z * z);
        let inner = Float::with_val(p, &self.g * &z2) + &self.t;
        Float::with_val(p, &inner * z) / 2u32
    }

    /// ψ₀..ψ_{n+3} at z.
    fn psis(&self, z: &Float, upto: usize) -> Result<Vec<Float>, LaxError> {
        Ok(psi_values(self.table, upto, z)?)
    }
}

/// Uₙ(z) = [[z/√Rₙ₊₁, −√Rₙ/√Rₙ₊₁], [1, 0]].
pub fn u_matrix(frame: &LaxFrame, z: &Complex) -> Matrix2C {
    let p = frame.p();
    let s1 = &frame.table.sqrt_r[frame.n + 1];
    Matrix2C::new(
        Complex::with_val(p, z / s1),
        Complex::with_val(p, -Float::with_val(p, &frame.table.sqrt_r[frame.n] / s1)),
        Complex::with_val(p, 1),
        Complex::with_val(p, 0),
    )
}

/// Aₙ(z) with a₁₁ = −a₂₂ = −(tz/2 + gz³/2 + gzRₙ), a₁₂ = √Rₙ(θₙ + gz²), a₂₁ = −√Rₙ(θₙ₋₁ + gz²).
pub fn a_matrix(frame: &LaxFrame, z: &Complex) -> Matrix2C {
    frame.a_at(frame.n, z).expect("frame index checked at construction")
}

/// det Aₙ + (tz/2 + gz³/2)² − gnz²/N − Rₙθₙ₋₁θₙ, relative to the sum of the term magnitudes.
pub fn det_identity_residual(frame: &LaxFrame, z: &Float) -> Result<Float, LaxError> {
    let p = frame.p();
    let [a11, a12, a21, a22] = frame.a_real(frame.n, z)?;
    let det = Float::with_val(p, &a11 * &a22) - Float::with_val(p, &a12 * &a21);
    let hp = frame.half_poly(z);
    let sq = Float::with_val(p, hp.square_ref());
    let z2 = Float::with_val(p, z * z);
    let lin = Float::with_val(p, &frame.g * &z2) * frame.n as u32 / frame.scale();
    let rtt = frame.r(frame.n) * frame.theta(frame.n - 1) * frame.theta(frame.n);
    let res = Float::with_val(p, &det + &sq) - &lin - &rtt;
    let denom = det.abs() + sq + lin.abs() + rtt.abs();
    Ok(res.abs() / denom)
}

/// Both rows of (ψₙ′, ψₙ₋₁′)ᵀ − N·Aₙ(ψₙ, ψₙ₋₁)ᵀ with ψ′ from the four-term formula,
/// each relative to N(|a_{i1}ψₙ| + |a_{i2}ψₙ₋₁|); the larger is returned.
pub fn ode_residual(frame: &LaxFrame, z: &Float) -> Result<Float, LaxError> {
    let p = frame.p();
    let n = frame.n;
    let psi = frame.psis(z, n + 3)?;
    let d0 = psi_deriv_from_values(frame.table, n, &psi)?;
    let d1 = psi_deriv_from_values(frame.table, n - 1, &psi)?;
    let [a11, a12, a21, a22] = frame.a_real(n, z)?;
    let nn = frame.scale();
    let row = |d: &Float, x: &Float, y: &Float| {
        let u = Float::with_val(p, x * &psi[n]);
        let v = Float::with_val(p, y * &psi[n - 1]);
        let rhs = Float::with_val(p, &u + &v) * nn;
        let scale = (u.abs() + v.abs()) * nn;
        Float::with_val(p, d - &rhs).abs() / scale
    };
    Ok(row(&d0, &a11, &a12).max(&row(&d1, &a21, &a22)))
}

/// Uₙ′ − N·Aₙ₊₁Uₙ + N·UₙAₙ; needs n ≤ M − 2.
pub fn compatibility_residual(frame: &LaxFrame, z: &Complex) -> Result<Matrix2C, LaxError> {
    let (res, _) = compatibility_parts(frame, z)?;
    Ok(res)
}

fn compatibility_parts(frame: &LaxFrame, z: &Complex) -> Result<(Matrix2C, Float), LaxError> {
    let p = frame.p();
    let nn = Complex::with_val(p, frame.scale());
    let u = u_matrix(frame, z);
    let a0 = frame.a_at(frame.n, z)?;
    let a1 = frame.a_at(frame.n + 1, z)?;
    let inv = Complex::with_val(p, frame.table.sqrt_r[frame.n + 1].clone().recip());
    let du = Matrix2C::diag(inv, Complex::with_val(p, 0));
    let left = a1.mul(&u).scale(&nn);
    let right = u.mul(&a0).scale(&nn);
    let scale = left.max_abs() + right.max_abs();
    Ok((du.sub(&left).add(&right), scale))
}

/// max-entry of the compatibility residual over N(‖Aₙ₊₁Uₙ‖ + ‖UₙAₙ‖).
pub fn compatibility_relative(frame: &LaxFrame, z: &Complex) -> Result<Float, LaxError> {
    let (res, scale) = compatibility_parts(frame, z)?;
    Ok(res.max_abs() / scale)
}

/// Jₙ = N·Rₙ[t + g(Rₙ₋₁ + Rₙ + Rₙ₊₁)], with J₀ = 0.
pub fn j_value(table: &RecurrenceTable, n: usize) -> Result<Float, LaxError> {
    let ctx = table.ctx();
    let p = ctx.bits;
    if n == 0 {
        return Ok(ctx.zero());
    }
    if n + 1 > table.max_degree() {
        return Err(OrthoError::IndexOutOfRange { n: n + 1, max: table.max_degree() }.into());
    }
    let rm = if n >= 2 { table.r[n - 1].clone() } else { ctx.zero() };
    let s = rm + &table.r[n] + &table.r[n + 1];
    let inner = Float::with_val(p, &table.params.g_at(&ctx) * &s) + table.params.t_at(&ctx);
    Ok(inner * &table.r[n] * table.params.scale)
}

/// Jₙ₊₁ − Jₙ − 1.
pub fn j_increment_residual(table: &RecurrenceTable, n: usize) -> Result<Float, LaxError> {
    let a = j_value(table, n + 1)?;
    let b = j_value(table, n)?;
    Ok(a - b - 1u32)
}

/// The three pieces of the Schrödinger potential Û = U₀ + U₁ + U₂.
#[derive(Clone, Debug)]
pub struct PotentialParts {
    pub u0: Float,
    pub u1: Float,
    pub u2: Float,
}

impl PotentialParts {
    pub fn total(&self) -> Float {
        Float::with_val(self.u0.prec(), &self.u0 + &self.u1) + &self.u2
    }
}

/// U₀ = z²[((gz² + t)/2)² − λ′g] with λ′ = (n + ½)/N, U₁ = (t/2 + gRₙ)/N and the remainder U₂.
pub fn potential_parts(frame: &LaxFrame, z: &Float) -> Result<PotentialParts, LaxError> {
    let p = frame.p();
    let n = frame.n;
    let nn = Float::with_val(p, frame.scale());
    let g = &frame.g;
    let z2 = Float::with_val(p, z * z);
    let gz2 = Float::with_val(p, g * &z2);
    let lp = Float::with_val(p, 2 * n as u32 + 1) / Float::with_val(p, &nn * 2u32);
    let half = Float::with_val(p, &gz2 + &frame.t) / 2u32;
    let bracket = Float::with_val(p, half.square_ref()) - Float::with_val(p, &lp * g);
    let u0 = Float::with_val(p, &z2 * &bracket);
    let rn = frame.r(n);
    let grn = Float::with_val(p, g * &rn);
    let u1 = (Float::with_val(p, &frame.t / 2u32) + &grn) / &nn;
    let th0 = frame.theta(n - 1);
    let th1 = frame.theta(n);
    let den = Float::with_val(p, &gz2 + &th1);
    let x = Float::with_val(p, &frame.t + &gz2) + Float::with_val(p, &grn * 2u32);
    let lead = -(rn * th0 * &th1);
    let mid = Float::with_val(p, &th1 * &x) / &den / &nn;
    let num = Float::with_val(p, &gz2 * 2u32) - &th1;
    let den2 = Float::with_val(p, den.square_ref());
    let tail = Float::with_val(p, g * &num) / den2 / Float::with_val(p, nn.square_ref());
    let u2 = lead - mid + tail;
    Ok(PotentialParts { u0, u1, u2 })
}

/// |−ζₙ″ + N²Ûζₙ| / (N²|Ûζₙ|) with ζₙ = |a₁₂|^{−1/2}ψₙ, ψₙ′ from the four-term
/// formula and ψₙ″ = N[(Aₙ′Ψ)₁ + N(Aₙ²Ψ)₁]. Needs 3 ≤ n ≤ M − 4.
pub fn schrodinger_check(frame: &LaxFrame, z: &Float) -> Result<Float, LaxError> {
    let p = frame.p();
    let n = frame.n;
    let max = frame.table.max_degree();
    if n < 3 || n + 4 > max {
        return Err(OrthoError::IndexOutOfRange { n, max }.into());
    }
    let th = frame.theta(n);
    let gz2 = Float::with_val(p, &frame.g * Float::with_val(p, z * z));
    let gap = Float::with_val(p, &th + &gz2);
    if gap.clone().abs() < (Float::with_val(p, 1) >> (frame.p() / 4)) {
        return Err(LaxError::A12Zero(z.to_f64()));
    }
    let psi = frame.psis(z, n + 3)?;
    let d = psi_deriv_from_values(frame.table, n, &psi)?;
    let [a11, a12, a21, a22] = frame.a_real(n, z)?;
    let [b11, b12, _, _] = frame.a_real_deriv(n, z)?;
    let nn = Float::with_val(p, frame.scale());
    // (A²Ψ)₁ = (a11² + a12·a21)ψₙ + a12(a11 + a22)ψₙ₋₁
    let sq11 = Float::with_val(p, a11.square_ref()) + Float::with_val(p, &a12 * &a21);
    let sq12 = Float::with_val(p, &a12 * Float::with_val(p, &a11 + &a22));
    let a2 = Float::with_val(p, &sq11 * &psi[n]) + Float::with_val(p, &sq12 * &psi[n - 1]);
    let da = Float::with_val(p, &b11 * &psi[n]) + Float::with_val(p, &b12 * &psi[n - 1]);
    let dd = (da + Float::with_val(p, &a2 * &nn)) * &nn;

    // a12 and its z-derivatives; a12 = √Rₙ(θₙ + gz²)
    let a = a12.clone().abs();
    let sign = if a12.is_sign_negative() { -1 } else { 1 };
    let a1 = Float::with_val(p, &b12 * sign);
    let a2d = Float::with_val(p, &frame.table.sqrt_r[n] * &frame.g) * 2u32 * sign;
    let inv_sqrt = a.clone().sqrt().recip();
    let zeta = Float::with_val(p, &inv_sqrt * &psi[n]);
    // ζ″ = a^{-1/2}ψ″ − a^{-3/2}a′ψ′ + (3/4)a^{-5/2}a′²ψ − ½a^{-3/2}a″ψ
    let r1 = Float::with_val(p, &a1 / &a);
    let r2 = Float::with_val(p, &a2d / &a);
    let mut zz = dd;
    zz -= Float::with_val(p, &r1 * &d);
    let coef = Float::with_val(p, r1.square_ref()) * 3u32 / 4u32 - Float::with_val(p, &r2 / 2u32);
    zz += Float::with_val(p, &coef * &psi[n]);
    let zeta2 = zz * &inv_sqrt;

    let u = potential_parts(frame, z)?.total();
    let rhs = Float::with_val(p, &u * &zeta) * Float::with_val(p, nn.square_ref());
    let res = Float::with_val(p, &rhs - &zeta2).abs();
    Ok(res / rhs.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ortho::{build_table, WeightParams};
    use std::sync::OnceLock;

    fn table() -> &'static RecurrenceTable {
        static T: OnceLock<RecurrenceTable> = OnceLock::new();
        T.get_or_init(|| {
            let ctx = PrecisionCtx::new(256).unwrap();
            let p = WeightParams::from_f64(-4.0, 1.0, 16).unwrap();
            build_table(&p, 28, &ctx).unwrap()
        })
    }

    fn tol(k: u32) -> Float {
        table().ctx().quad_rel_tol() * k
    }

    fn cz(x: f64) -> Complex {
        Complex::with_val(table().bits, (x, 0))
    }

    #[test]
    fn transport_reproduces_next_pair() {
        let t = table();
        let ctx = t.ctx();
        for &n in &[1usize, 8, 16, 20] {
            let f = LaxFrame::new(t, n).unwrap();
            for &x in &[0.3, 1.4, 2.1] {
                let z = ctx.real(x);
                let psi = psi_values(t, n + 1, &z).unwrap();
                let u = f.u_real(&z);
                let top = Float::with_val(ctx.bits, &u[0] * &psi[n]) + Float::with_val(ctx.bits, &u[1] * &psi[n - 1]);
                let err = Float::with_val(ctx.bits, &top - &psi[n + 1]).abs();
                assert!(err < ctx.eps() * 1024u32 * (psi[n + 1].clone().abs() + 1u32), "n = {n}, z = {x}");
            }
        }
    }

    #[test]
    fn u_determinant_and_origin() {
        let t = table();
        let f = LaxFrame::new(t, 5).unwrap();
        let u = u_matrix(&f, &cz(0.7));
        let expect = Float::with_val(t.bits, &t.sqrt_r[5] / &t.sqrt_r[6]);
        let d = Complex::with_val(t.bits, u.det() - &expect).abs().real().clone();
        assert!(d < t.ctx().eps() * 16u32);
        assert!(u_matrix(&f, &cz(0.0)).get(0, 0).is_zero());
    }

    #[test]
    fn a_traceless_and_det_identity() {
        let t = table();
        for &n in &[1usize, 10, 16, 24] {
            let f = LaxFrame::new(t, n).unwrap();
            let z = Complex::with_val(t.bits, (0.8, 0.3));
            let tr = a_matrix(&f, &z).trace().abs().real().clone();
            assert!(tr < t.ctx().eps());
            for &x in &[0.0, 0.5, 1.5, 2.5] {
                let r = det_identity_residual(&f, &t.ctx().real(x)).unwrap();
                assert!(r < tol(1000), "n = {n}, z = {x}: {}", r.to_f64());
            }
        }
    }

    #[test]
    fn ode_holds_on_table() {
        let t = table();
        for &n in &[1usize, 12, 16, 25] {
            let f = LaxFrame::new(t, n).unwrap();
            for &x in &[-1.2, 0.4, 1.7, 2.6] {
                let r = ode_residual(&f, &t.ctx().real(x)).unwrap();
                assert!(r < tol(1000), "n = {n}, z = {x}: {}", r.to_f64());
            }
        }
    }

    #[test]
    fn compatibility_and_j_increment() {
        let t = table();
        for &n in &[1usize, 9, 16, 26] {
            let f = LaxFrame::new(t, n).unwrap();
            for &x in &[0.2, 1.1, 2.3] {
                let r = compatibility_relative(&f, &cz(x)).unwrap();
                assert!(r < tol(1000), "n = {n}, z = {x}: {}", r.to_f64());
            }
            let j = j_increment_residual(t, n).unwrap().abs();
            assert!(j < tol(1000), "n = {n}: {}", j.to_f64());
        }
        assert!(j_value(t, 0).unwrap().is_zero());
    }

    #[test]
    fn compatibility_entry_reduces_to_j_increment() {
        // √Rₙ₊₁ · res₁₁ = −(Jₙ₊₁ − Jₙ − 1), for any z
        let t = table();
        let f = LaxFrame::new(t, 7).unwrap();
        let res = compatibility_residual(&f, &cz(1.3)).unwrap();
        let lhs = Float::with_val(t.bits, res.get(0, 0).real() * &t.sqrt_r[8]);
        let j = j_increment_residual(t, 7).unwrap();
        let d = Float::with_val(t.bits, &lhs + &j).abs();
        assert!(d < t.ctx().eps() * (1u32 << 12), "{}", d.to_f64());
    }

    #[test]
    fn schrodinger_reduction() {
        let t = table();
        for &n in &[3usize, 16, 24] {
            let f = LaxFrame::new(t, n).unwrap();
            for &x in &[0.9, 1.6, 2.2, 2.9] {
                let r = schrodinger_check(&f, &t.ctx().real(x)).unwrap();
                assert!(r < tol(10_000), "n = {n}, z = {x}: {}", r.to_f64());
            }
        }
        let f = LaxFrame::new(t, 2).unwrap();
        assert!(schrodinger_check(&f, &t.ctx().real(1.0)).is_err());
    }

    #[test]
    fn leading_potential_part() {
        let t = table();
        let f = LaxFrame::new(t, 11).unwrap();
        let z = 1.3f64;
        let lp = 11.5 / 16.0;
        let expect = z * z * (((z * z - 4.0) / 2.0).powi(2) - lp);
        let got = potential_parts(&f, &t.ctx().real(z)).unwrap().u0.to_f64();
        assert!((got - expect).abs() < 1e-13);
    }

    #[test]
    fn a12_zero_detected() {
        let t = table();
        let f = LaxFrame::new(t, 16).unwrap();
        // θₙ alternates in sign with n; it is negative at even n here
        let th = f.theta(16);
        assert!(th.is_sign_negative());
        let z = (-th).sqrt();
        assert!(matches!(schrodinger_check(&f, &z), Err(LaxError::A12Zero(_))));
    }

    #[test]
    fn frame_index_bounds() {
        let t = table();
        assert!(LaxFrame::new(t, 0).is_err());
        assert!(LaxFrame::new(t, 28).is_err());
        let f = LaxFrame::new(t, 27).unwrap();
        assert!(compatibility_residual(&f, &cz(1.0)).is_err());
    }
}
