//! Large-N formulas for ψₙ(z) in the oscillatory, exponentially small and
//! turning-point regions, the leading asymptotics of hₙ, and a comparison
//! harness against the exact recurrence tables.

mod formulas;
mod report;

pub use formulas::{
    bulk_psi, bulk_psi_semiclassical, evaluate, hn_asympt, ln_hn_asympt, outer_psi, edge_psi, psi_asympt,
    AsymptValue, Formula,
};
pub use report::{
    compare_psi, contraction_factors, decay_exponent, rn0_error_report, DecayFit, ErrorReport, ErrorRow,
    RunManifest,
};

use crate::freud::{formal_cycle, FreudError};
use crate::numerics::{NumericsError, PrecisionCtx};
use crate::ortho::{OrthoError, WeightParams};
use crate::semiclassics::{Edge, SemiError, SemiFrame};
use rug::float::Constant;
use rug::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Half-width of the edge windows as a fraction of z₂ − z₁.
pub const DEFAULT_DELTA_RATIO: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AsymptError {
    #[error("z = {0} is outside the domain of this formula")]
    OutsideRegime(String),
    #[error("report output failed: {0}")]
    Report(String),
    #[error(transparent)]
    Semi(#[from] SemiError),
    #[error(transparent)]
    Ortho(#[from] OrthoError),
    #[error(transparent)]
    Freud(#[from] FreudError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Which large-N formula applies at a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegimeTag {
    Bulk,
    Outer,
    Edge(Edge),
}

/// Constants shared by all regime formulas at fixed (t, g, N, n).
#[derive(Clone, Debug)]
pub struct AsymptFrame {
    pub semi: SemiFrame,
    pub delta: Float,
    /// (1/(2√π))·(g/λ)^{1/4}.
    pub cn: Float,
    /// √(λ′g).
    pub sqrt_lpg: Float,
}

impl AsymptFrame {
    pub fn new(params: &WeightParams, n: usize, ctx: &PrecisionCtx) -> Result<Self, AsymptError> {
        Self::with_delta(params, n, ctx, DEFAULT_DELTA_RATIO)
    }

    pub fn with_delta(params: &WeightParams, n: usize, ctx: &PrecisionCtx, ratio: f64) -> Result<Self, AsymptError> {
        let semi = SemiFrame::new(params, n, ctx)?;
        Ok(Self::from_semi(semi, ratio))
    }

    pub fn from_semi(semi: SemiFrame, ratio: f64) -> Self {
        let p = semi.prec();
        let width = Float::with_val(p, &semi.turning.z2 - &semi.turning.z1);
        let delta = width * Float::with_val(p, ratio);
        let sqrt_pi = Float::with_val(p, Constant::Pi).sqrt();
        let quarter = Float::with_val(p, &semi.g / &semi.lambda).sqrt().sqrt();
        let cn = quarter / (sqrt_pi * 2u32);
        let sqrt_lpg = Float::with_val(p, &semi.lambda_prime * &semi.g).sqrt();
        AsymptFrame { semi, delta, cn, sqrt_lpg }
    }

    pub fn prec(&self) -> u32 {
        self.semi.prec()
    }

    pub fn n(&self) -> usize {
        self.semi.n
    }

    /// Regime of z with preference Edge > Bulk > Outer on the window boundaries.
    pub fn classify(&self, z: &Float) -> RegimeTag {
        let p = self.prec();
        let x = Float::with_val(p, z.abs_ref());
        let tp = &self.semi.turning;
        for (edge, zj) in [(Edge::Inner, &tp.z1), (Edge::Outer, &tp.z2)] {
            if Float::with_val(p, &x - zj).abs() <= self.delta {
                return RegimeTag::Edge(edge);
            }
        }
        if x > Float::with_val(p, &tp.z1 + &self.delta) && x < Float::with_val(p, &tp.z2 - &self.delta) {
            RegimeTag::Bulk
        } else {
            RegimeTag::Outer
        }
    }

    /// Bulk sample grid of `count` interior points of (z₁+δ, z₂−δ).
    pub fn bulk_grid(&self, count: usize) -> Vec<Float> {
        let p = self.prec();
        let tp = &self.semi.turning;
        let a = Float::with_val(p, &tp.z1 + &self.delta);
        let b = Float::with_val(p, &tp.z2 - &self.delta);
        let step = Float::with_val(p, &b - &a) / (count as u32 + 1);
        (1..=count).map(|k| Float::with_val(p, &a + Float::with_val(p, &step * k as u32))).collect()
    }
}

/// Turning-point data: Dₙ, σ₀, the root z_jᴺ and U_N(z) = c₆z⁶ + c₄z⁴ + c₂z² + c₀.
#[derive(Clone, Debug)]
pub struct EdgeFrame {
    pub edge: Edge,
    pub dn: Float,
    pub sigma0: usize,
    pub root: Float,
    /// [c₀, c₂, c₄, c₆].
    pub un_coeffs: [Float; 4],
}

impl EdgeFrame {
    pub fn new(frame: &AsymptFrame, edge: Edge) -> Self {
        let s = &frame.semi;
        let p = s.prec();
        let sigma0 = if edge == Edge::Inner { s.n / 2 } else { 0 };
        let mut dn = Float::with_val(p, s.scale()).cbrt().sqrt() * Float::with_val(p, s.g.sqrt_ref());
        if sigma0 % 2 == 1 {
            dn = -dn;
        }
        let root = match edge {
            Edge::Inner => s.turning.z1n.clone(),
            Edge::Outer => s.turning.z2n.clone(),
        };
        let c6 = Float::with_val(p, s.g.square_ref()) / 4u32;
        let c4 = Float::with_val(p, &s.g * &s.t) / 2u32;
        let c2 = Float::with_val(p, s.t.square_ref()) / 4u32 - Float::with_val(p, &s.lambda_prime * &s.g);
        let c0 = (Float::with_val(p, &s.t / 2u32) + Float::with_val(p, &s.g * &s.rn0)) / s.scale();
        EdgeFrame { edge, dn, sigma0, root, un_coeffs: [c0, c2, c4, c6] }
    }

    pub fn u_n(&self, z: &Float) -> Float {
        let p = z.prec();
        let z2 = Float::with_val(p, z.square_ref());
        let [c0, c2, c4, c6] = &self.un_coeffs;
        let mut acc = c6.clone();
        for c in [c4, c2, c0] {
            acc = Float::with_val(p, &acc * &z2) + c;
        }
        acc
    }
}

/// Leading recurrence value (−t − (−1)ⁿ√(t² − 4λg))/(2g) at λ = n/N.
pub fn rn_leading(params: &WeightParams, n: usize, ctx: &PrecisionCtx) -> Result<Float, AsymptError> {
    let lambda = Float::with_val(ctx.bits, n) / params.scale;
    let cyc = formal_cycle(params, &lambda, ctx)?;
    Ok(if n % 2 == 1 { cyc.r0 } else { cyc.l0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::PrecisionCtx;
    use crate::semiclassics::nu_squared;
    use rug::Complex;

    fn frame(n: usize, scale: u32) -> AsymptFrame {
        let c = PrecisionCtx::new(256).unwrap();
        AsymptFrame::new(&WeightParams::from_f64(-4.0, 1.0, scale).unwrap(), n, &c).unwrap()
    }

    #[test]
    fn regime_classification() {
        let f = frame(40, 40);
        let c = &f.semi.ctx;
        assert_eq!(f.classify(&c.real(2.0)), RegimeTag::Bulk);
        assert_eq!(f.classify(&c.real(-2.0)), RegimeTag::Bulk);
        assert_eq!(f.classify(&c.real(3.0)), RegimeTag::Outer);
        assert_eq!(f.classify(&c.real(0.5)), RegimeTag::Outer);
        assert_eq!(f.classify(&c.real(2.45)), RegimeTag::Edge(Edge::Outer));
        assert_eq!(f.classify(&c.real(1.42)), RegimeTag::Edge(Edge::Inner));
        // boundary of the window belongs to the edge
        let b = Float::with_val(c.bits, &f.semi.turning.z2 - &f.delta);
        assert_eq!(f.classify(&b), RegimeTag::Edge(Edge::Outer));
        for z in f.bulk_grid(20) {
            assert_eq!(f.classify(&z), RegimeTag::Bulk);
        }
    }

    #[test]
    fn un_coefficients_match_nu_squared() {
        for n in [40, 41] {
            let f = frame(n, 40);
            let e = EdgeFrame::new(&f, Edge::Outer);
            let p = f.prec();
            for z in [0.3, 1.7, 2.6, 4.0] {
                let x = Float::with_val(p, z);
                let a = e.u_n(&x);
                let b = nu_squared(&f.semi, &Complex::with_val(p, &x));
                let d = Float::with_val(p, b.real() - &a).abs();
                assert!(d < 1e-70, "n = {n}, z = {z}: {}", d.to_f64());
            }
            assert!(e.u_n(&e.root).abs() < 1e-70);
        }
    }

    #[test]
    fn edge_signs() {
        for (n, sign) in [(40usize, 1), (41, 1), (42, -1), (43, -1)] {
            let f = frame(n, 40);
            let inner = EdgeFrame::new(&f, Edge::Inner);
            let outer = EdgeFrame::new(&f, Edge::Outer);
            assert_eq!(inner.dn.is_sign_positive(), sign > 0);
            assert!(outer.dn.is_sign_positive());
            assert_eq!(inner.sigma0, n / 2);
        }
    }

    #[test]
    fn leading_cycle_values() {
        let c = PrecisionCtx::new(256).unwrap();
        let p = WeightParams::from_f64(-4.0, 1.0, 40).unwrap();
        let three = c.real(3).sqrt();
        let even = rn_leading(&p, 40, &c).unwrap();
        let odd = rn_leading(&p, 41, &c).unwrap();
        assert!((even - (Float::with_val(c.bits, 2) - &three)).abs() < 1e-70);
        // λ = 41/40 for the odd index
        let lam = c.real(41) / 40u32;
        let expect = (c.real(4) + (c.real(16) - lam * 4u32).sqrt()) / 2u32;
        assert!((odd - expect).abs() < 1e-70);
    }
}
