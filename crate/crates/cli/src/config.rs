use crate::error::CliError;
use quartic_core::numerics::PrecisionCtx;
use quartic_core::ortho::WeightParams;
use rug::Float;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Everything a run needs. Real numbers are kept as decimal strings so the
/// file form round-trips without rounding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: String,
    pub t: String,
    pub g: String,
    /// One or more values of the large parameter N.
    pub scales: Vec<u32>,
    /// Polynomial index; defaults to round(λN).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default = "default_lambda")]
    pub lambda: String,
    /// Table degree; defaults to n + 4.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default = "default_bits")]
    pub bits: u32,
    /// Regime margin as a fraction of z₂ − z₁.
    #[serde(default = "default_delta")]
    pub delta: String,
    /// Minor half-axis of the turning-point ellipse as a fraction of z₂ − z₁.
    #[serde(default = "default_ellipse")]
    pub ellipse: String,
    /// Bulk point for the sine-kernel comparison.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z0: Option<String>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

fn default_lambda() -> String {
    "1".into()
}

fn default_bits() -> u32 {
    512
}

fn default_delta() -> String {
    "0.1".into()
}

fn default_ellipse() -> String {
    "0.15".into()
}

fn default_output() -> PathBuf {
    PathBuf::from("quartic-out")
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            experiment: "run".into(),
            t: "-4".into(),
            g: "1".into(),
            scales: vec![40],
            n: None,
            lambda: default_lambda(),
            m: None,
            bits: default_bits(),
            delta: default_delta(),
            ellipse: default_ellipse(),
            z0: None,
            output: default_output(),
        }
    }
}

fn parse_real(name: &str, s: &str) -> Result<Float, CliError> {
    Float::parse(s)
        .map(|v| Float::with_val(1024, v))
        .map_err(|e| CliError::Config(format!("{name} = {s:?}: {e}")))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn ctx(&self) -> Result<PrecisionCtx, CliError> {
        PrecisionCtx::new(self.bits).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn params(&self, scale: u32) -> Result<WeightParams, CliError> {
        WeightParams::parse(&self.t, &self.g, scale).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn lambda_value(&self) -> Result<Float, CliError> {
        parse_real("lambda", &self.lambda)
    }

    pub fn delta_ratio(&self) -> Result<f64, CliError> {
        Ok(parse_real("delta", &self.delta)?.to_f64())
    }

    pub fn ellipse_ratio(&self) -> Result<f64, CliError> {
        Ok(parse_real("ellipse", &self.ellipse)?.to_f64())
    }

    pub fn z0_value(&self) -> Result<Option<Float>, CliError> {
        self.z0.as_deref().map(|s| parse_real("z0", s)).transpose()
    }

    /// Index used at `scale`: the explicit n if given, else round(λ·N).
    pub fn index_at(&self, scale: u32) -> Result<usize, CliError> {
        if let Some(n) = self.n {
            return Ok(n);
        }
        let lam = self.lambda_value()?.to_f64();
        Ok((lam * scale as f64).round() as usize)
    }

    pub fn degree_at(&self, scale: u32) -> Result<usize, CliError> {
        match self.m {
            Some(m) => Ok(m),
            None => Ok(self.index_at(scale)? + 4),
        }
    }

    /// Checks every field before any command touches a module.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.scales.is_empty() {
            return Err(CliError::Config("scales must list at least one N".into()));
        }
        if self.experiment.is_empty() || self.experiment.contains(['/', '\\']) {
            return Err(CliError::Config(format!("bad experiment name {:?}", self.experiment)));
        }
        self.ctx()?;
        for &s in &self.scales {
            self.params(s)?;
            let n = self.index_at(s)?;
            let m = self.degree_at(s)?;
            if n + 1 > m {
                return Err(CliError::Config(format!("M = {m} must exceed n = {n}")));
            }
        }
        let lam = self.lambda_value()?;
        if !(lam > 0) {
            return Err(CliError::Config("lambda must be positive".into()));
        }
        let d = self.delta_ratio()?;
        if !(d > 0.0 && d < 0.5) {
            return Err(CliError::Config(format!("delta = {d} must lie in (0, 0.5)")));
        }
        let b = self.ellipse_ratio()?;
        if !(b > 0.0 && b < 1.0) {
            return Err(CliError::Config(format!("ellipse = {b} must lie in (0, 1)")));
        }
        self.z0_value()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip() {
        let mut c = RunConfig::default();
        c.scales = vec![40, 80, 160];
        c.t = "-4.000000000000000000000000000001".into();
        c.z0 = Some("2".into());
        c.m = Some(60);
        let text = c.to_toml().unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), c);
    }

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::from_toml("experiment = \"x\"\nt = \"-4\"\ng = \"1\"\nscales = [40]\n").unwrap();
        assert_eq!(c.bits, 512);
        assert_eq!(c.index_at(40).unwrap(), 40);
        assert_eq!(c.degree_at(40).unwrap(), 44);
        c.validate().unwrap();
    }

    #[test]
    fn validation_rejects_bad_fields() {
        let mut c = RunConfig { t: "1".into(), ..Default::default() };
        assert!(matches!(c.validate(), Err(CliError::Config(_))));
        c.t = "-4".into();
        c.m = Some(10);
        assert!(c.validate().is_err());
        c.m = None;
        c.delta = "0.7".into();
        assert!(c.validate().is_err());
        assert!(RunConfig::from_toml("bogus = 1").is_err());
    }

    proptest::proptest! {
        #[test]
        fn any_valid_config_round_trips(
            t in -9.0f64..-0.1,
            g in 0.1f64..5.0,
            scales in proptest::collection::vec(4u32..400, 1..4),
            bits in 64u32..2048,
            m in proptest::option::of(500usize..900),
            z0 in proptest::option::of(0.1f64..3.0),
        ) {
            let c = RunConfig { t: format!("{t:e}"), g: g.to_string(), scales, bits, m, z0: z0.map(|v| v.to_string()), ..Default::default() };
            let back = RunConfig::from_toml(&c.to_toml().unwrap()).unwrap();
            proptest::prop_assert_eq!(back, c);
        }
    }
}
