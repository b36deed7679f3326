use super::{compatibility_relative, det_identity_residual, ode_residual, schrodinger_check, LaxError, LaxFrame};
use crate::ortho::RecurrenceTable;
use rayon::prelude::*;
use rug::{Complex, Float};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResidualKind {
    Determinant,
    Ode,
    Compatibility,
    Schrodinger,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub n: usize,
    pub z: f64,
    pub residual: f64,
    pub scale: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualSweep {
    pub kind: ResidualKind,
    pub rows: Vec<ResidualRow>,
}

impl ResidualSweep {
    pub fn max_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.residual).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> Result<String, LaxError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).map_err(|e| LaxError::Report(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| LaxError::Report(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| LaxError::Report(e.to_string()))
    }
}

/// Evaluates one residual family over all (n, z) pairs in parallel.
pub fn residual_sweep(table: &RecurrenceTable, kind: ResidualKind, ns: &[usize], zs: &[f64]) -> Result<ResidualSweep, LaxError> {
    let pairs: Vec<(usize, f64)> = ns.iter().flat_map(|&n| zs.iter().map(move |&z| (n, z))).collect();
    let bits = table.bits;
    let rows = pairs
        .par_iter()
        .map(|&(n, z)| {
            let frame = LaxFrame::new(table, n)?;
            let zf = Float::with_val(bits, z);
            let r = match kind {
                ResidualKind::Determinant => det_identity_residual(&frame, &zf)?,
                ResidualKind::Ode => ode_residual(&frame, &zf)?,
                ResidualKind::Compatibility => compatibility_relative(&frame, &Complex::with_val(bits, &zf))?,
                ResidualKind::Schrodinger => schrodinger_check(&frame, &zf)?,
            };
            Ok(ResidualRow { n, z, residual: r.to_f64(), scale: table.params.scale })
        })
        .collect::<Result<Vec<_>, LaxError>>()?;
    Ok(ResidualSweep { kind, rows })
}
