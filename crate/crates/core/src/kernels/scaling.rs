use super::{density_limit, qn_diag, qn_kernel, support_edges, KernelError};
use crate::numerics::{airy_pair, integrate, PrecisionCtx};
use crate::ortho::{RecurrenceTable, WeightParams};
use rayon::prelude::*;
use rug::float::Constant;
use rug::Float;
use serde::{Deserialize, Serialize};

/// sin πx/(πx), 1 at x = 0.
pub fn sinc(x: &Float) -> Float {
    let p = x.prec();
    if x.is_zero() {
        return Float::with_val(p, 1);
    }
    let px = Float::with_val(p, Constant::Pi) * x;
    Float::with_val(p, px.sin_ref()) / px
}

/// [Ai(u)Ai′(v) − Ai′(u)Ai(v)]/(u − v), with Ai′(u)² − u·Ai(u)² on the diagonal.
pub fn airy_kernel(u: &Float, v: &Float, ctx: &PrecisionCtx) -> Float {
    let p = ctx.bits;
    let (au, apu) = airy_pair(u, ctx);
    if u == v {
        return Float::with_val(p, apu.square_ref()) - Float::with_val(p, u * Float::with_val(p, au.square_ref()));
    }
    let (av, apv) = airy_pair(v, ctx);
    let num = Float::with_val(p, &au * &apv) - Float::with_val(p, &apu * &av);
    num / Float::with_val(p, u - v)
}

fn scaled_kernel(table: &RecurrenceTable, ncut: usize, centre: &Float, s: &Float, u: &Float, v: &Float) -> Result<Float, KernelError> {
    let p = table.bits;
    let z = Float::with_val(p, centre + Float::with_val(p, u / s));
    let w = Float::with_val(p, centre + Float::with_val(p, v / s));
    let q = if u == v { qn_diag(table, ncut, &z)? } else { qn_kernel(table, ncut, &z, &w)? };
    Ok(q / s)
}

fn bulk_scale(table: &RecurrenceTable, z0: &Float) -> Result<(Float, Float), KernelError> {
    let ctx = table.ctx();
    let pz = density_limit(&table.params, z0, &ctx)?;
    if pz.is_zero() {
        return Err(KernelError::OutsideBulk(z0.to_f64()));
    }
    let s = Float::with_val(ctx.bits, &pz * table.params.scale);
    Ok((pz, s))
}

/// [Np(z₀)]⁻¹ Q(z₀ + u/(Np(z₀)), z₀ + v/(Np(z₀))).
pub fn sine_scaled(table: &RecurrenceTable, ncut: usize, z0: &Float, u: &Float, v: &Float) -> Result<Float, KernelError> {
    let (_, s) = bulk_scale(table, z0)?;
    scaled_kernel(table, ncut, z0, &s, u, v)
}

fn edge_scale(table: &RecurrenceTable) -> Result<(Float, Float, Float), KernelError> {
    let ctx = table.ctx();
    let p = ctx.bits;
    let (_, z2) = support_edges(&table.params, &ctx)?;
    let g = table.params.g_at(&ctx);
    let c = Float::with_val(p, 2).cbrt() * g.sqrt() * &z2;
    let n = table.params.scale;
    let s = Float::with_val(p, &c * Float::with_val(p, n * n).cbrt());
    Ok((z2, c, s))
}

/// (cN^{2/3})⁻¹ Q(z₂ + u/(cN^{2/3}), z₂ + v/(cN^{2/3})) with c = 2^{1/3}√g·z₂.
pub fn airy_scaled(table: &RecurrenceTable, ncut: usize, u: &Float, v: &Float) -> Result<Float, KernelError> {
    let (z2, _, s) = edge_scale(table)?;
    scaled_kernel(table, ncut, &z2, &s, u, v)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelRow {
    pub u: f64,
    pub v: f64,
    pub scaled_value: f64,
    pub limit_value: f64,
    pub abs_err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelManifest {
    /// "sine" or "airy".
    pub kind: String,
    /// z₀ for the sine kernel, z₂ for the Airy kernel.
    pub point: f64,
    /// Edge scale c (Airy only).
    pub c: Option<f64>,
    /// p(z₀) (sine only).
    pub density: Option<f64>,
    pub ncut: usize,
    pub scale: u32,
    pub bits: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelGrid {
    pub manifest: KernelManifest,
    pub rows: Vec<KernelRow>,
}

impl KernelGrid {
    pub fn sup_abs_err(&self) -> f64 {
        self.rows.iter().map(|r| r.abs_err).fold(0.0, f64::max)
    }

    /// Largest |scaled − limit| over off-diagonal and diagonal rows separately.
    pub fn diagonal_rows(&self) -> impl Iterator<Item = &KernelRow> {
        self.rows.iter().filter(|r| r.u == r.v)
    }

    /// Columns u, v, scaled_value, limit_value, abs_err.
    pub fn to_csv(&self) -> Result<String, KernelError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).map_err(|e| KernelError::Report(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| KernelError::Report(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| KernelError::Report(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String, KernelError> {
        serde_json::to_string_pretty(self).map_err(|e| KernelError::Report(e.to_string()))
    }
}

fn grid<F, L>(us: &[f64], bits: u32, eval: F, limit: L) -> Result<Vec<KernelRow>, KernelError>
where
    F: Fn(&Float, &Float) -> Result<Float, KernelError> + Sync,
    L: Fn(&Float, &Float) -> Float + Sync,
{
    let pairs: Vec<(f64, f64)> = us.iter().flat_map(|&u| us.iter().map(move |&v| (u, v))).collect();
    pairs
        .par_iter()
        .map(|&(u, v)| {
            let (uf, vf) = (Float::with_val(bits, u), Float::with_val(bits, v));
            let a = eval(&uf, &vf)?;
            let b = limit(&uf, &vf);
            let d = Float::with_val(bits, &a - &b).abs();
            Ok(KernelRow { u, v, scaled_value: a.to_f64(), limit_value: b.to_f64(), abs_err: d.to_f64() })
        })
        .collect()
}

/// Scaled bulk kernel against sin π(u−v)/(π(u−v)) on us × us.
pub fn sine_grid(table: &RecurrenceTable, ncut: usize, z0: &Float, us: &[f64]) -> Result<KernelGrid, KernelError> {
    let (pz, s) = bulk_scale(table, z0)?;
    let p = table.bits;
    let rows = grid(us, p, |u, v| scaled_kernel(table, ncut, z0, &s, u, v), |u, v| sinc(&Float::with_val(p, u - v)))?;
    let manifest = KernelManifest {
        kind: "sine".into(),
        point: z0.to_f64(),
        c: None,
        density: Some(pz.to_f64()),
        ncut,
        scale: table.params.scale,
        bits: p,
    };
    Ok(KernelGrid { manifest, rows })
}

/// Scaled edge kernel against the Airy kernel on us × us.
pub fn airy_grid(table: &RecurrenceTable, ncut: usize, us: &[f64]) -> Result<KernelGrid, KernelError> {
    let (z2, c, s) = edge_scale(table)?;
    let ctx = table.ctx();
    let rows = grid(us, ctx.bits, |u, v| scaled_kernel(table, ncut, &z2, &s, u, v), |u, v| airy_kernel(u, v, &ctx))?;
    let manifest = KernelManifest {
        kind: "airy".into(),
        point: z2.to_f64(),
        c: Some(c.to_f64()),
        density: None,
        ncut,
        scale: table.params.scale,
        bits: ctx.bits,
    };
    Ok(KernelGrid { manifest, rows })
}

/// Edge scaling variables at z₂(λ′): φ₀, ρ = ξ/√φ₀, ω = η/√φ₀ and their values at z₂.
#[derive(Clone, Debug)]
pub struct EdgeScalingFrame {
    pub n: usize,
    pub t: Float,
    pub g: Float,
    pub lambda_prime: Float,
    /// Turning points at λ′.
    pub z1: Float,
    pub z2: Float,
    /// 2^{1/3}√g·z₂ with z₂ at λ = 1.
    pub c: Float,
    /// ∂U₀/∂z at z₂.
    pub kappa: Float,
    /// ∂φ₀/∂z at z₂.
    pub phi0_prime: Float,
    pub rho_edge: Float,
    pub omega_edge: Float,
    ctx: PrecisionCtx,
}

impl EdgeScalingFrame {
    pub fn new(params: &WeightParams, n: usize, ctx: &PrecisionCtx) -> Result<Self, KernelError> {
        let lp = Float::with_val(ctx.bits, 2 * n + 1) / (2 * params.scale);
        Self::at_lambda(params, n, &lp, ctx)
    }

    pub fn at_lambda(params: &WeightParams, n: usize, lambda_prime: &Float, ctx: &PrecisionCtx) -> Result<Self, KernelError> {
        let p = ctx.bits;
        let t = params.t_at(ctx);
        let g = params.g_at(ctx);
        let lp = Float::with_val(p, lambda_prime);
        let two_s = Float::with_val(p, &lp * &g).sqrt() * 2u32;
        let z1sq = -Float::with_val(p, &t + &two_s) / &g;
        if !z1sq.is_sign_positive() || z1sq.is_zero() {
            return Err(KernelError::InvalidParams("no gap at this λ′".into()));
        }
        let z1 = z1sq.sqrt();
        let z2 = (Float::with_val(p, &two_s - &t) / &g).sqrt();
        let (_, z2_unit) = support_edges(params, ctx)?;
        let cbrt2 = Float::with_val(p, 2).cbrt();
        let sqrt_g = Float::with_val(p, g.sqrt_ref());
        let c = Float::with_val(p, &cbrt2 * &sqrt_g) * &z2_unit;
        let g32 = Float::with_val(p, &g * &sqrt_g);
        let z2c = Float::with_val(p, z2.square_ref()) * &z2;
        let kappa = Float::with_val(p, lp.sqrt_ref()) * g32 * z2c * 2u32;
        let phi0_prime = Float::with_val(p, kappa.cbrt_ref());
        let lp13 = Float::with_val(p, lp.cbrt_ref());
        let rho_edge = -(Float::with_val(p, 1) / (Float::with_val(p, &cbrt2 * &cbrt2) * &lp13));
        let sign = if n % 2 == 0 { 1 } else { -1 };
        let omega_edge = -(Float::with_val(p, &cbrt2 * sign) / 4u32) / &lp13 * &z1 / &z2;
        Ok(EdgeScalingFrame { n, t, g, lambda_prime: lp, z1, z2, c, kappa, phi0_prime, rho_edge, omega_edge, ctx: ctx.clone() })
    }

    fn q(&self, z: &Float) -> Float {
        let p = self.ctx.bits;
        let two_s = Float::with_val(p, &self.lambda_prime * &self.g).sqrt() * 2u32;
        (Float::with_val(p, &self.g * Float::with_val(p, z.square_ref())) + &self.t) / two_s
    }

    /// U₀(z; λ′) = z²[(gz² + t)²/4 − λ′g].
    pub fn u0(&self, z: &Float) -> Float {
        let p = self.ctx.bits;
        let zz = Float::with_val(p, z.square_ref());
        let a = Float::with_val(p, &self.g * &zz) + &self.t;
        zz * (Float::with_val(p, a.square_ref()) / 4u32 - Float::with_val(p, &self.lambda_prime * &self.g))
    }

    /// ((3/2)∫_{z₂}^z √U₀)^{2/3} for z ≥ z₂.
    pub fn phi0(&self, z: &Float) -> Result<Float, KernelError> {
        let p = self.ctx.bits;
        let h = Float::with_val(p, z - &self.z2);
        if h.is_sign_negative() {
            return Err(KernelError::InvalidParams("φ₀ is evaluated for z ≥ z₂".into()));
        }
        let g2 = Float::with_val(p, self.g.square_ref()) / 4u32;
        let z1sq = Float::with_val(p, self.z1.square_ref());
        // v = z₂ + hσ², U₀(v)/(v − z₂) = (g²/4)v²(v² − z₁²)(v + z₂)
        let q = integrate(
            |s: &Float| {
                let s2 = Float::with_val(p, s.square_ref());
                let v = Float::with_val(p, &self.z2 + Float::with_val(p, &h * &s2));
                let vv = Float::with_val(p, v.square_ref());
                let red = Float::with_val(p, &g2 * &vv) * (vv - &z1sq) * (v + &self.z2);
                red.sqrt() * s2
            },
            &Float::with_val(p, 0),
            &Float::with_val(p, 1),
            &self.ctx,
        )?;
        let h32 = Float::with_val(p, &h * Float::with_val(p, h.sqrt_ref()));
        let inner = q.value * h32 * 3u32;
        Ok(inner.square().cbrt())
    }

    /// −arccosh(q)/(2√φ₀) for z > z₂.
    pub fn rho(&self, z: &Float) -> Result<Float, KernelError> {
        let xi = -(self.q(z).acosh() / 2u32);
        Ok(xi / self.phi0(z)?.sqrt())
    }

    /// −((−1)ⁿ/4)arccosh(r)/√φ₀ for z > z₂.
    pub fn omega(&self, z: &Float) -> Result<Float, KernelError> {
        let p = self.ctx.bits;
        let q = self.q(z);
        let two_s = Float::with_val(p, &self.lambda_prime * &self.g).sqrt() * 2u32;
        let num = Float::with_val(p, &two_s - Float::with_val(p, &self.t * &q));
        let den = Float::with_val(p, &two_s * &q) - &self.t;
        let r = num / den;
        let sign: i32 = if self.n % 2 == 0 { 1 } else { -1 };
        let eta = -(r.acosh() * sign / 4u32);
        Ok(eta / self.phi0(z)?.sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Float, b: &Float, tol: f64) -> bool {
        let d = Float::with_val(a.prec(), a - b).abs();
        d < Float::with_val(53, tol)
    }

    #[test]
    fn airy_kernel_diagonal_and_symmetry() {
        let c = PrecisionCtx::new(256).unwrap();
        let zero = c.real(0);
        let (_, ap0) = airy_pair(&zero, &c);
        assert!(close(&airy_kernel(&zero, &zero, &c), &Float::with_val(c.bits, ap0.square_ref()), 1e-70));
        assert!((airy_kernel(&zero, &zero, &c).to_f64() - 0.0669874).abs() < 1e-7);
        let (u, v) = (c.real(-1.3), c.real(0.8));
        assert_eq!(airy_kernel(&u, &v, &c), airy_kernel(&v, &u, &c));
        // the off-diagonal formula approaches the confluent value
        let near = Float::with_val(c.bits, &u + Float::with_val(c.bits, 1) / 1_000_000u32);
        assert!(close(&airy_kernel(&u, &near, &c), &airy_kernel(&u, &u, &c), 1e-6));
        assert_eq!(sinc(&c.real(0)), 1);
        assert!(sinc(&c.real(2)).abs() < 1e-70);
    }

    #[test]
    fn edge_frame_closed_forms() {
        let c = PrecisionCtx::new(256).unwrap();
        let params = WeightParams::from_f64(-4.0, 1.0, 40).unwrap();
        for n in [40, 41] {
            let f = EdgeScalingFrame::new(&params, n, &c).unwrap();
            let p = c.bits;
            assert!(f.u0(&f.z2).abs() < 1e-70);
            // 2ω = (−1)ⁿ z₁ρ/z₂ at the edge
            let sign = if n % 2 == 0 { 1 } else { -1 };
            let rhs = Float::with_val(p, &f.rho_edge * &f.z1) / &f.z2 * sign;
            assert!(close(&Float::with_val(p, &f.omega_edge * 2u32), &rhs, 1e-70));
            // limits from the defining integrals just above z₂
            let h = Float::with_val(p, 1) >> 60;
            let z = Float::with_val(p, &f.z2 + &h);
            let du = f.u0(&z) / &h;
            assert!(close(&du, &f.kappa, 1e-15));
            let dphi = f.phi0(&z).unwrap() / &h;
            assert!(close(&dphi, &f.phi0_prime, 1e-15));
            assert!(close(&f.rho(&z).unwrap(), &f.rho_edge, 1e-15));
            assert!(close(&f.omega(&z).unwrap(), &f.omega_edge, 1e-15));
        }
        // c is φ₀′(z₂) at λ′ = 1
        let unit = EdgeScalingFrame::at_lambda(&params, 40, &c.real(1), &c).unwrap();
        assert!(close(&unit.phi0_prime, &unit.c, 1e-70));
        assert!((unit.c.to_f64() - 2f64.cbrt() * 6f64.sqrt()).abs() < 1e-14);
    }
}
