use super::OrthoError;
use crate::numerics::{to_decimal, PrecisionCtx};
use rug::{Complex, Float};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Precision used when parameters are parsed from text.
const PARAM_BITS: u32 = 1024;

/// Weight e^{-N·V(z)} with V(z) = t z²/2 + g z⁴/4.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightParams {
    pub t: Float,
    pub g: Float,
    /// The large parameter N.
    pub scale: u32,
}

impl WeightParams {
    pub fn new(t: Float, g: Float, scale: u32) -> Result<Self, OrthoError> {
        if !(t.is_finite() && t < 0) {
            return Err(OrthoError::InvalidParams(format!("t must be negative, got {}", t.to_f64())));
        }
        if !(g.is_finite() && g > 0) {
            return Err(OrthoError::InvalidParams(format!("g must be positive, got {}", g.to_f64())));
        }
        if scale == 0 {
            return Err(OrthoError::InvalidParams("N must be at least 1".into()));
        }
        Ok(WeightParams { t, g, scale })
    }

    /// Parse decimal strings exactly (up to 1024 bits).
    pub fn parse(t: &str, g: &str, scale: u32) -> Result<Self, OrthoError> {
        let p = |s: &str| {
            Float::parse(s)
                .map(|v| Float::with_val(PARAM_BITS, v))
                .map_err(|e| OrthoError::InvalidParams(format!("{s:?}: {e}")))
        };
        Self::new(p(t)?, p(g)?, scale)
    }

    pub fn from_f64(t: f64, g: f64, scale: u32) -> Result<Self, OrthoError> {
        Self::new(Float::with_val(PARAM_BITS, t), Float::with_val(PARAM_BITS, g), scale)
    }

    pub fn with_scale(&self, scale: u32) -> Self {
        WeightParams { t: self.t.clone(), g: self.g.clone(), scale }
    }

    pub fn t_at(&self, ctx: &PrecisionCtx) -> Float {
        Float::with_val(ctx.bits, &self.t)
    }

    pub fn g_at(&self, ctx: &PrecisionCtx) -> Float {
        Float::with_val(ctx.bits, &self.g)
    }

    /// V(z) = t z²/2 + g z⁴/4.
    pub fn potential(&self, z: &Float) -> Float {
        let p = z.prec();
        let z2 = Float::with_val(p, z * z);
        let a = Float::with_val(p, &z2 * &self.t) / 2u32;
        let b = Float::with_val(p, Float::with_val(p, &z2 * &z2) * &self.g) / 4u32;
        a + b
    }

    pub fn potential_complex(&self, z: &Complex) -> Complex {
        let p = z.prec();
        let z2 = Complex::with_val(p, z * z);
        let a = Complex::with_val(p, &z2 * &self.t) / 2u32;
        let b = Complex::with_val(p, Complex::with_val(p, &z2 * &z2) * &self.g) / 4u32;
        a + b
    }

    /// λ_cr = t²/(4g).
    pub fn lambda_critical(&self, ctx: &PrecisionCtx) -> Float {
        let t = self.t_at(ctx);
        Float::with_val(ctx.bits, &t * &t) / Float::with_val(ctx.bits, &self.g * 4u32)
    }

    /// Two-cut regime at n = N requires t < -2√g.
    pub fn is_two_cut_at_unit_ratio(&self) -> bool {
        let bound = -Float::with_val(PARAM_BITS, self.g.clone().sqrt() * 2u32);
        self.t < bound
    }

    pub fn key(&self) -> String {
        format!("t={},g={},N={}", canonical(&self.t), canonical(&self.g), self.scale)
    }
}

/// Shortest decimal that round-trips at the value's precision.
pub(crate) fn canonical(v: &Float) -> String {
    if v.is_integer() {
        if let Some(i) = v.to_integer() {
            return i.to_string();
        }
    }
    for digits in 1..=(v.prec() as usize / 3 + 2) {
        let s = v.to_string_radix(10, Some(digits));
        if let Ok(p) = Float::parse(&s) {
            if Float::with_val(v.prec(), p) == *v {
                return s;
            }
        }
    }
    to_decimal(v)
}

/// e^{-N V(z)}.
pub fn weight(z: &Float, params: &WeightParams) -> Float {
    let v = params.potential(z);
    (-(v * params.scale)).exp()
}

#[derive(Serialize, Deserialize)]
struct ParamsRepr {
    t: String,
    g: String,
    #[serde(rename = "N")]
    scale: u32,
}

impl Serialize for WeightParams {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ParamsRepr { t: canonical(&self.t), g: canonical(&self.g), scale: self.scale }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for WeightParams {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = ParamsRepr::deserialize(d)?;
        WeightParams::parse(&r.t, &r.g, r.scale).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_values() {
        let c = PrecisionCtx::default();
        let p = WeightParams::from_f64(-4.0, 1.0, 1).unwrap();
        assert_eq!(weight(&c.zero(), &p), 1);
        let e4 = c.real(4).exp();
        let w = weight(&c.real(2), &p);
        assert!(Float::with_val(c.bits, &w - &e4).abs() < Float::with_val(c.bits, &e4 * c.eps()));
        let p40 = p.with_scale(40);
        for &z in &[0.3, 1.7, 2.9] {
            assert_eq!(weight(&c.real(z), &p40), weight(&c.real(-z), &p40));
        }
    }

    #[test]
    fn validation() {
        assert!(WeightParams::from_f64(1.0, 1.0, 4).is_err());
        assert!(WeightParams::from_f64(-1.0, 0.0, 4).is_err());
        assert!(WeightParams::from_f64(-1.0, 1.0, 0).is_err());
        let p = WeightParams::from_f64(-4.0, 1.0, 4).unwrap();
        assert!(p.is_two_cut_at_unit_ratio());
        assert!(!WeightParams::from_f64(-1.0, 1.0, 4).unwrap().is_two_cut_at_unit_ratio());
    }

    #[test]
    fn serde_roundtrip() {
        let p = WeightParams::parse("-4.25", "1", 40).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"t":"-4.25","g":"1","N":40}"#);
        let q: WeightParams = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
    }
}
