use super::formulas::{evaluate, Formula};
use super::{rn_leading, AsymptError, AsymptFrame};
use crate::numerics::{to_decimal_digits, PrecisionCtx};
use crate::ortho::{cache_key, eval_psi, OrthoError, RecurrenceTable, WeightParams};
use rayon::prelude::*;
use rug::Float;
use serde::{Deserialize, Serialize};

const CSV_DIGITS: usize = 24;

/// Provenance of a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub label: String,
    pub t: String,
    pub g: String,
    pub scales: Vec<u32>,
    pub bits: u32,
    /// Cache keys of the oracle tables used.
    pub table_keys: Vec<String>,
}

impl RunManifest {
    fn new(label: &str, params: &WeightParams, bits: u32) -> Self {
        RunManifest {
            label: label.to_string(),
            t: to_decimal_digits(&params.t, 20),
            g: to_decimal_digits(&params.g, 20),
            scales: Vec::new(),
            bits,
            table_keys: Vec::new(),
        }
    }

    fn add_table(&mut self, table: &RecurrenceTable) {
        self.scales.push(table.params.scale);
        self.table_keys.push(cache_key(&table.params, table.max_degree(), table.bits));
    }
}

/// One oracle-versus-formula comparison. `z` is absent for recurrence rows.
#[derive(Clone, Debug)]
pub struct ErrorRow {
    pub scale: u32,
    pub n: usize,
    pub z: Option<Float>,
    pub oracle: Float,
    pub formula: Float,
    pub abs_err: Float,
    pub rel_err: Float,
}

#[derive(Serialize, Deserialize)]
struct RowRecord {
    scale: u32,
    n: usize,
    z: String,
    oracle: String,
    formula: String,
    abs_err: String,
    rel_err: String,
}

impl From<&ErrorRow> for RowRecord {
    fn from(r: &ErrorRow) -> Self {
        let d = |v: &Float| to_decimal_digits(v, CSV_DIGITS);
        RowRecord {
            scale: r.scale,
            n: r.n,
            z: r.z.as_ref().map(d).unwrap_or_default(),
            oracle: d(&r.oracle),
            formula: d(&r.formula),
            abs_err: d(&r.abs_err),
            rel_err: d(&r.rel_err),
        }
    }
}

/// Least-squares decay exponent of an error sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub label: String,
    pub exponent: f64,
}

#[derive(Clone, Debug)]
pub struct ErrorReport {
    pub manifest: RunManifest,
    pub rows: Vec<ErrorRow>,
    pub fits: Vec<DecayFit>,
}

#[derive(Serialize)]
struct ReportRecord<'a> {
    manifest: &'a RunManifest,
    rows: Vec<RowRecord>,
    fits: &'a [DecayFit],
}

impl ErrorReport {
    pub fn max_rel_err(&self) -> Option<Float> {
        self.rows.iter().map(|r| r.rel_err.clone()).max_by(|a, b| a.total_cmp(b))
    }

    pub fn max_abs_err(&self) -> Option<Float> {
        self.rows.iter().map(|r| r.abs_err.clone()).max_by(|a, b| a.total_cmp(b))
    }

    /// Columns scale, n, z, oracle, formula, abs_err, rel_err.
    pub fn to_csv(&self) -> Result<String, AsymptError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(RowRecord::from(r)).map_err(|e| AsymptError::Report(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| AsymptError::Report(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| AsymptError::Report(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String, AsymptError> {
        let rec = ReportRecord { manifest: &self.manifest, rows: self.rows.iter().map(RowRecord::from).collect(), fits: &self.fits };
        serde_json::to_string_pretty(&rec).map_err(|e| AsymptError::Report(e.to_string()))
    }
}

/// Compares the oracle ψₙ from `table` with a formula at each z. The relative
/// error divides by the formula's envelope, so zeros of ψₙ do not inflate it.
pub fn compare_psi(
    frame: &AsymptFrame,
    table: &RecurrenceTable,
    zs: &[Float],
    formula: Formula,
) -> Result<ErrorReport, AsymptError> {
    let p = frame.prec();
    let n = frame.n();
    let rows: Vec<ErrorRow> = zs
        .par_iter()
        .map(|z| -> Result<ErrorRow, AsymptError> {
            let oracle = eval_psi(table, n, z)?;
            let v = evaluate(frame, z, formula)?;
            let abs_err = Float::with_val(p, &oracle - &v.value).abs();
            let rel_err = if v.envelope.is_zero() {
                abs_err.clone()
            } else {
                Float::with_val(p, &abs_err / &v.envelope)
            };
            Ok(ErrorRow { scale: frame.semi.scale(), n, z: Some(z.clone()), oracle, formula: v.value, abs_err, rel_err })
        })
        .collect::<Result<_, _>>()?;
    let mut manifest = RunManifest::new(&format!("psi {formula:?}"), &table.params, table.bits);
    manifest.add_table(table);
    Ok(ErrorReport { manifest, rows, fits: Vec::new() })
}

/// Ratios v[k]/v[k+1] of consecutive values.
pub fn contraction_factors(values: &[Float]) -> Vec<f64> {
    values
        .windows(2)
        .map(|w| Float::with_val(w[0].prec(), &w[0] / &w[1]).to_f64())
        .collect()
}

/// −slope of ln(err) against ln(N) by least squares.
pub fn decay_exponent(scales: &[u32], errs: &[Float]) -> f64 {
    let xs: Vec<f64> = scales.iter().map(|&s| (s as f64).ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| Float::with_val(e.prec(), e.ln_ref()).to_f64()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    -sxy / sxx
}

/// |Rₙ − Rₙ⁰| for an even and an odd index near λN at each scale, with the
/// decay exponent fitted per parity. `tables(params, m)` supplies an oracle
/// table holding degrees 0..=m for the given scale.
pub fn rn0_error_report<F>(
    params: &WeightParams,
    scales: &[u32],
    lambda: &Float,
    ctx: &PrecisionCtx,
    tables: F,
) -> Result<ErrorReport, AsymptError>
where
    F: Fn(&WeightParams, usize) -> Result<RecurrenceTable, OrthoError>,
{
    let p = ctx.bits;
    let mut manifest = RunManifest::new("recurrence", params, ctx.bits);
    let mut rows = Vec::new();
    let mut errs: [Vec<Float>; 2] = [Vec::new(), Vec::new()];
    for &scale in scales {
        let sp = params.with_scale(scale);
        let centre = (lambda.to_f64() * scale as f64).round() as usize;
        let even = centre - centre % 2;
        let table = tables(&sp, even + 1)?;
        manifest.add_table(&table);
        for n in [even, even + 1] {
            let rn = table.r.get(n).cloned().ok_or(OrthoError::IndexOutOfRange { n, max: table.max_degree() })?;
            let r0 = rn_leading(&sp, n, ctx)?;
            let abs_err = Float::with_val(p, &rn - &r0).abs();
            let rel_err = Float::with_val(p, &abs_err / &r0);
            errs[n % 2].push(abs_err.clone());
            rows.push(ErrorRow { scale, n, z: None, oracle: rn, formula: r0, abs_err, rel_err });
        }
    }
    let fits = if scales.len() >= 2 {
        vec![
            DecayFit { label: "even".into(), exponent: decay_exponent(scales, &errs[0]) },
            DecayFit { label: "odd".into(), exponent: decay_exponent(scales, &errs[1]) },
        ]
    } else {
        Vec::new()
    };
    Ok(ErrorReport { manifest, rows, fits })
}
