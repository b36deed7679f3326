//! The Freud equation n/N = Rₙ[t + g(Rₙ₋₁ + Rₙ + Rₙ₊₁)], its θ-form identity,
//! the (unstable) forward iteration, and the period-two formal expansion.

use crate::numerics::PrecisionCtx;
use crate::ortho::{RecurrenceTable, WeightParams};
use rug::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FreudError {
    #[error("index {n} outside the admissible range {lo}..={hi}")]
    IndexOutOfRange { n: usize, lo: usize, hi: usize },
    #[error("lambda = {0} outside (0, lambda_cr)")]
    LambdaOutOfRange(f64),
    #[error("t² − 4λg = {0} too close to zero: period-two system degenerates")]
    NearCritical(f64),
}

fn range(n: usize, lo: usize, hi: usize) -> Result<(), FreudError> {
    if n < lo || n > hi {
        Err(FreudError::IndexOutOfRange { n, lo, hi })
    } else {
        Ok(())
    }
}

/// n/N − Rₙ[t + g(Rₙ₋₁ + Rₙ + Rₙ₊₁)] for an arbitrary sequence `r` (r[0] = R₀).
pub fn freud_residual_seq(params: &WeightParams, r: &[Float], n: usize, ctx: &PrecisionCtx) -> Result<Float, FreudError> {
    range(n, 1, r.len().saturating_sub(2))?;
    let p = ctx.bits;
    let sum = Float::with_val(p, &r[n - 1] + &r[n]) + &r[n + 1];
    let bracket = params.t_at(ctx) + Float::with_val(p, &sum * &params.g);
    let lhs = Float::with_val(p, n as u32) / params.scale;
    Ok(lhs - Float::with_val(p, &r[n] * &bracket))
}

/// Freud residual on an oracle table, 1 ≤ n ≤ M − 1.
pub fn freud_residual(table: &RecurrenceTable, n: usize) -> Result<Float, FreudError> {
    freud_residual_seq(&table.params, &table.r, n, &table.ctx())
}

/// θₙ = t + gRₙ + gRₙ₊₁ for n = 0..M−1.
#[derive(Clone, Debug)]
pub struct ThetaSeq {
    pub theta: Vec<Float>,
}

impl ThetaSeq {
    pub fn from_sequence(params: &WeightParams, r: &[Float], ctx: &PrecisionCtx) -> Self {
        let p = ctx.bits;
        let t = params.t_at(ctx);
        let theta = r
            .windows(2)
            .map(|w| Float::with_val(p, &t + Float::with_val(p, Float::with_val(p, &w[0] + &w[1]) * &params.g)))
            .collect();
        ThetaSeq { theta }
    }

    pub fn from_table(table: &RecurrenceTable) -> Self {
        Self::from_sequence(&table.params, &table.r, &table.ctx())
    }
}

/// Rₙ₊₁θₙθₙ₊₁ − Rₙθₙ₋₁θₙ − θₙ/N for a sequence; needs Rₙ₋₁..Rₙ₊₂.
pub fn recursive_identity_residual_seq(
    params: &WeightParams,
    r: &[Float],
    n: usize,
    ctx: &PrecisionCtx,
) -> Result<Float, FreudError> {
    range(n, 1, r.len().saturating_sub(3))?;
    let p = ctx.bits;
    let th = ThetaSeq::from_sequence(params, &r[n - 1..=n + 2], ctx).theta;
    let (tm, t0, tp) = (&th[0], &th[1], &th[2]);
    let lhs = Float::with_val(p, &r[n + 1] * t0) * tp;
    let rhs = Float::with_val(p, &r[n] * tm) * t0 + Float::with_val(p, t0 / params.scale);
    Ok(lhs - rhs)
}

/// Identity residual on an oracle table, 1 ≤ n ≤ M − 2 (θₙ₊₁ needs Rₙ₊₂).
pub fn recursive_identity_residual(table: &RecurrenceTable, n: usize) -> Result<Float, FreudError> {
    recursive_identity_residual_seq(&table.params, &table.r, n, &table.ctx())
}

/// Outcome of iterating the Freud equation forward from (R₀, R₁).
#[derive(Clone, Debug)]
pub struct ForwardRun {
    pub values: Vec<Float>,
    /// First index whose value is nonpositive, non-finite or above the bound.
    pub divergence_index: Option<usize>,
    pub reason: Option<String>,
}

/// Rₙ₊₁ = (n/(N Rₙ) − t)/g − Rₙ₋₁ − Rₙ, recording where the iteration leaves
/// the admissible band 0 < Rₙ < (−t + √(t² + 4λg))/(2g).
pub fn freud_forward(params: &WeightParams, r1: &Float, nmax: usize, ctx: &PrecisionCtx) -> ForwardRun {
    let p = ctx.bits;
    let t = params.t_at(ctx);
    let g = params.g_at(ctx);
    let mut values = vec![Float::with_val(p, 0), Float::with_val(p, r1)];
    let bound = |n: usize| {
        let lambda = Float::with_val(p, n as u32) / params.scale;
        let disc = Float::with_val(p, &t * &t) + Float::with_val(p, &lambda * &g) * 4u32;
        (disc.sqrt() - &t) / Float::with_val(p, &g * 2u32)
    };
    let check = |n: usize, v: &Float| -> Option<String> {
        if !v.is_finite() {
            Some("non-finite value".into())
        } else if *v <= 0 {
            Some("nonpositive value".into())
        } else if *v >= bound(n) {
            Some("upper bound exceeded".into())
        } else {
            None
        }
    };
    if let Some(reason) = check(1, &values[1]) {
        return ForwardRun { values, divergence_index: Some(1), reason: Some(reason) };
    }
    for n in 1..nmax {
        let ratio = Float::with_val(p, n as u32) / Float::with_val(p, &values[n] * params.scale);
        let next = (ratio - &t) / &g - &values[n - 1] - &values[n];
        let bad = check(n + 1, &next);
        values.push(next);
        if let Some(reason) = bad {
            return ForwardRun { values, divergence_index: Some(n + 1), reason: Some(reason) };
        }
    }
    ForwardRun { values, divergence_index: None, reason: None }
}

/// How Δ in the N⁻² correction system is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SecondDifference {
    /// Exact second λ-derivative (the N → ∞ limit of the quotient).
    Analytic,
    /// (f(λ − 1/N) − 2f(λ) + f(λ + 1/N))·N².
    Discrete { scale: u32 },
}

/// Period-two formal solution: Rₙ ≈ R0 + R1/N² (n odd), L0 + L1/N² (n even).
#[derive(Clone, Debug)]
pub struct FormalCycle {
    pub lambda: Float,
    pub l0: Float,
    pub r0: Float,
    pub l1: Float,
    pub r1: Float,
}

fn cycle_roots(t: &Float, g: &Float, lambda: &Float, p: u32) -> (Float, Float, Float) {
    let disc = Float::with_val(p, t * t) - Float::with_val(p, lambda * g) * 4u32;
    let s = disc.sqrt();
    let two_g = Float::with_val(p, g * 2u32);
    let l0 = -Float::with_val(p, t + &s) / &two_g;
    let r0 = Float::with_val(p, &s - t) / &two_g;
    (l0, r0, s)
}

/// Leading values L0, R0 = (−t ∓ √(t² − 4λg))/(2g) and their N⁻² corrections.
pub fn formal_cycle(params: &WeightParams, lambda: &Float, ctx: &PrecisionCtx) -> Result<FormalCycle, FreudError> {
    formal_cycle_with(params, lambda, SecondDifference::Analytic, ctx)
}

pub fn formal_cycle_with(
    params: &WeightParams,
    lambda: &Float,
    delta: SecondDifference,
    ctx: &PrecisionCtx,
) -> Result<FormalCycle, FreudError> {
    let p = ctx.bits;
    let t = params.t_at(ctx);
    let g = params.g_at(ctx);
    let lambda = Float::with_val(p, lambda);
    let lcr = params.lambda_critical(ctx);
    if !(lambda > 0 && lambda < lcr) {
        return Err(FreudError::LambdaOutOfRange(lambda.to_f64()));
    }
    let disc = Float::with_val(p, &t * &t) - Float::with_val(p, &lambda * &g) * 4u32;
    if disc < Float::with_val(p, &t * &t) * ctx.eps() {
        return Err(FreudError::NearCritical(disc.to_f64()));
    }
    let (l0, r0, s) = cycle_roots(&t, &g, &lambda, p);
    let (dl, dr) = match delta {
        SecondDifference::Analytic => {
            // s = √(t² − 4λg): L0'' = 2g/s³, R0'' = −2g/s³
            let v = Float::with_val(p, &g * 2u32) / Float::with_val(p, s.clone().square() * &s);
            (v.clone(), -v)
        }
        SecondDifference::Discrete { scale } => {
            let step = Float::with_val(p, 1) / scale;
            let up = Float::with_val(p, &lambda + &step);
            let dn = Float::with_val(p, &lambda - &step);
            if !(dn > 0 && up < lcr) {
                return Err(FreudError::LambdaOutOfRange(lambda.to_f64()));
            }
            let (lu, ru, _) = cycle_roots(&t, &g, &up, p);
            let (ld, rd, _) = cycle_roots(&t, &g, &dn, p);
            let n2 = Float::with_val(p, scale) * scale;
            let dl = (lu + ld - Float::with_val(p, &l0 * 2u32)) * &n2;
            let dr = (ru + rd - Float::with_val(p, &r0 * 2u32)) * &n2;
            (dl, dr)
        }
    };
    // [[R0+L0, 2R0], [2L0, R0+L0]]·(R1, L1) = (−R0ΔL0, −L0ΔR0)
    let a = Float::with_val(p, &r0 + &l0);
    let b = Float::with_val(p, &r0 * 2u32);
    let c = Float::with_val(p, &l0 * 2u32);
    let det = Float::with_val(p, &a * &a) - Float::with_val(p, &b * &c);
    let f1 = -Float::with_val(p, &r0 * &dl);
    let f2 = -Float::with_val(p, &l0 * &dr);
    let r1 = (Float::with_val(p, &a * &f1) - Float::with_val(p, &b * &f2)) / &det;
    let l1 = (Float::with_val(p, &a * &f2) - Float::with_val(p, &c * &f1)) / &det;
    Ok(FormalCycle { lambda, l0, r0, l1, r1 })
}

impl FormalCycle {
    /// Two-term value for degree parity: odd → R branch, even → L branch.
    pub fn value(&self, odd: bool, scale: u32) -> Float {
        let p = self.r0.prec();
        let n2 = Float::with_val(p, scale) * scale;
        if odd {
            Float::with_val(p, &self.r0 + Float::with_val(p, &self.r1 / &n2))
        } else {
            Float::with_val(p, &self.l0 + Float::with_val(p, &self.l1 / &n2))
        }
    }
}
