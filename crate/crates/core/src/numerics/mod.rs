//! Extended-precision substrate: precision context, Gauss–Legendre quadrature,
//! Newton root finding, Airy functions and a small 2×2 complex matrix type.

mod airy;
mod matrix;
mod quad;
mod roots;

pub use airy::{
    airy_ai, airy_ai_complex, airy_complex_pair, airy_ai_prime, airy_ai_prime_complex, airy_overlap_check,
    airy_pair, airy_second_derivative_series, airy_series_pair, airy_asymptotic_pair,
    airy_x_switch, complex_series_bound,
};
pub use matrix::Matrix2C;
pub use quad::{integrate, integrate_decaying, integrate_ray, GaussLegendre, QuadValue, Quadrature, GL_ORDER};
pub use roots::{find_root, RootResult};

use rug::float::Constant;
use rug::{Complex, Float};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Complex value at context precision.
pub type ComplexVal = Complex;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("invalid precision: {0}")]
    InvalidPrecision(String),
    #[error("quadrature did not converge after {panels} panels")]
    NonConvergence { panels: usize },
    #[error("integrand does not decay along the ray (radius {radius})")]
    NoDecay { radius: f64 },
    #[error("Newton iteration diverged after {iterations} steps")]
    Divergence { iterations: usize },
    #[error("Newton iteration contracts only linearly (multiple root?) after {iterations} steps")]
    SlowContraction { iterations: usize },
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
    #[error("argument {0} outside the complex Airy series domain")]
    SeriesDomainExceeded(f64),
}

/// Working precision plus derived tolerances.
///
/// `eps = 2^(guard - bits)`, `quad_rel_tol = 2^quad_tol_log2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrecisionCtx {
    pub bits: u32,
    pub guard: u32,
    pub quad_tol_log2: i32,
    pub max_panels: usize,
}

impl Default for PrecisionCtx {
    fn default() -> Self {
        PrecisionCtx { bits: 512, guard: 16, quad_tol_log2: -400, max_panels: 1 << 14 }
    }
}

impl PrecisionCtx {
    /// Context with `bits` of mantissa; the quadrature target scales as 2^(-25·bits/32).
    pub fn new(bits: u32) -> Result<Self, NumericsError> {
        let quad = -((bits as i64 * 25 / 32) as i32);
        Self::with_tolerance(bits, quad)
    }

    pub fn with_tolerance(bits: u32, quad_tol_log2: i32) -> Result<Self, NumericsError> {
        if bits < 64 {
            return Err(NumericsError::InvalidPrecision(format!("bits = {bits} < 64")));
        }
        let guard = 16;
        if quad_tol_log2 < guard as i32 - bits as i32 {
            return Err(NumericsError::InvalidPrecision(format!(
                "quad_rel_tol 2^{quad_tol_log2} below eps 2^{}",
                guard as i32 - bits as i32
            )));
        }
        if quad_tol_log2 >= 0 {
            return Err(NumericsError::InvalidPrecision("quad_rel_tol must be < 1".into()));
        }
        Ok(PrecisionCtx { bits, guard, quad_tol_log2, max_panels: 1 << 14 })
    }

    pub fn eps_log2(&self) -> i32 {
        self.guard as i32 - self.bits as i32
    }

    pub fn eps(&self) -> Float {
        pow2(self.bits, self.eps_log2())
    }

    pub fn quad_rel_tol(&self) -> Float {
        pow2(self.bits, self.quad_tol_log2)
    }

    /// Same context with a different quadrature target, clamped to `[eps, 1)`.
    pub fn tightened(&self, quad_tol_log2: i32) -> Self {
        let mut c = self.clone();
        c.quad_tol_log2 = quad_tol_log2.max(self.eps_log2()).min(-1);
        c
    }

    pub fn real<T>(&self, v: T) -> Float
    where
        Float: rug::Assign<T>,
    {
        Float::with_val(self.bits, v)
    }

    pub fn complex<T>(&self, v: T) -> Complex
    where
        Complex: rug::Assign<T>,
    {
        Complex::with_val(self.bits, v)
    }

    pub fn parse(&self, s: &str) -> Result<Float, NumericsError> {
        Float::parse(s)
            .map(|p| Float::with_val(self.bits, p))
            .map_err(|e| NumericsError::NonFinite(format!("cannot parse {s:?}: {e}")))
    }

    pub fn pi(&self) -> Float {
        Float::with_val(self.bits, Constant::Pi)
    }

    pub fn zero(&self) -> Float {
        Float::with_val(self.bits, 0)
    }

    pub fn czero(&self) -> Complex {
        Complex::with_val(self.bits, 0)
    }

    pub fn i(&self) -> Complex {
        Complex::with_val(self.bits, (0, 1))
    }
}

pub(crate) fn pow2(prec: u32, e: i32) -> Float {
    let one = Float::with_val(prec, 1);
    one << e
}

/// Reject NaN or infinite values.
pub fn check_finite(v: &Float, what: &str) -> Result<(), NumericsError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(NumericsError::NonFinite(what.to_string()))
    }
}

pub fn check_finite_c(v: &Complex, what: &str) -> Result<(), NumericsError> {
    if v.real().is_finite() && v.imag().is_finite() {
        Ok(())
    } else {
        Err(NumericsError::NonFinite(what.to_string()))
    }
}

/// Full-precision decimal rendering used by caches and reports.
pub fn to_decimal(v: &Float) -> String {
    v.to_string_radix(10, None)
}

/// Short decimal rendering for CSV columns.
pub fn to_decimal_digits(v: &Float, digits: usize) -> String {
    v.to_string_radix(10, Some(digits))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_ctx_values() {
        let c = PrecisionCtx::default();
        assert_eq!(c.bits, 512);
        assert_eq!(c.eps_log2(), -496);
        assert!(c.quad_rel_tol() >= c.eps());
        assert_eq!(PrecisionCtx::new(512).unwrap().quad_tol_log2, -400);
    }

    #[test]
    fn rejects_small_precision() {
        assert!(PrecisionCtx::new(32).is_err());
        assert!(PrecisionCtx::with_tolerance(128, -120).is_err());
    }

    #[test]
    fn decimal_roundtrip() {
        let c = PrecisionCtx::default();
        let x = c.real(2).sqrt();
        let s = to_decimal(&x);
        assert_eq!(c.parse(&s).unwrap(), x);
    }
}
