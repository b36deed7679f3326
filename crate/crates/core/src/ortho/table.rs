use super::params::{weight, WeightParams};
use super::OrthoError;
use crate::numerics::{to_decimal, GaussLegendre, PrecisionCtx};
use rayon::prelude::*;
use rug::Float;
use serde::{Deserialize, Serialize};

/// Exact recurrence data h₀..h_M, R₀..R_M for one weight.
#[derive(Clone, Debug)]
pub struct RecurrenceTable {
    pub params: WeightParams,
    pub bits: u32,
    pub h: Vec<Float>,
    pub r: Vec<Float>,
    /// √Rₙ, cached for the orthonormal recurrences.
    pub sqrt_r: Vec<Float>,
    pub build: BuildInfo,
}

/// Discretization record of a table build.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BuildInfo {
    pub panels: usize,
    pub radius: f64,
    pub refinements: usize,
}

impl RecurrenceTable {
    /// Largest stored degree M.
    pub fn max_degree(&self) -> usize {
        self.h.len() - 1
    }

    pub fn ctx(&self) -> PrecisionCtx {
        PrecisionCtx::new(self.bits).expect("table precision validated at build")
    }

    pub fn from_parts(params: WeightParams, bits: u32, h: Vec<Float>, r: Vec<Float>, build: BuildInfo) -> Result<Self, OrthoError> {
        if h.len() != r.len() || h.is_empty() {
            return Err(OrthoError::InvalidTable("h and R must have equal nonzero length".into()));
        }
        let sqrt_r = r.iter().map(|x| x.clone().sqrt()).collect();
        let t = RecurrenceTable { params, bits, h, r, sqrt_r, build };
        t.check_invariants()?;
        Ok(t)
    }

    /// hₙ > 0, R₀ = 0, Rₙ = hₙ/hₙ₋₁ and 0 < Rₙ < (−t+√(t²+4λg))/(2g).
    pub fn check_invariants(&self) -> Result<(), OrthoError> {
        let ctx = self.ctx();
        let p = ctx.bits;
        if !self.r[0].is_zero() {
            return Err(OrthoError::InvariantViolation("R_0 must vanish".into()));
        }
        let t = self.params.t_at(&ctx);
        let g = self.params.g_at(&ctx);
        let tol = Float::with_val(p, ctx.eps() * 64u32);
        for n in 0..self.h.len() {
            if !(self.h[n].is_finite() && self.h[n] > 0) {
                return Err(OrthoError::InvariantViolation(format!("h_{n} not positive")));
            }
            if n == 0 {
                continue;
            }
            let ratio = Float::with_val(p, &self.h[n] / &self.h[n - 1]);
            let rel = Float::with_val(p, &ratio - &self.r[n]).abs() / &self.r[n];
            if rel > tol {
                return Err(OrthoError::InvariantViolation(format!("R_{n} != h_{n}/h_{}", n - 1)));
            }
            let lambda = Float::with_val(p, n as u32) / self.params.scale;
            let disc = Float::with_val(p, &t * &t) + Float::with_val(p, &lambda * &g) * 4u32;
            let bound = (disc.sqrt() - &t) / Float::with_val(p, &g * 2u32);
            if !(self.r[n] > 0 && self.r[n] < bound) {
                return Err(OrthoError::InvariantViolation(format!(
                    "R_{n} = {} outside (0, {})",
                    self.r[n].to_f64(),
                    bound.to_f64()
                )));
            }
        }
        Ok(())
    }

    pub fn to_cache(&self) -> TableCache {
        TableCache {
            params: self.params.clone(),
            bits: self.bits,
            m: self.max_degree(),
            h: self.h.iter().map(to_decimal).collect(),
            r: self.r.iter().map(to_decimal).collect(),
        }
    }

    pub fn from_cache(c: &TableCache) -> Result<Self, OrthoError> {
        let ctx = PrecisionCtx::new(c.bits).map_err(|e| OrthoError::InvalidTable(e.to_string()))?;
        let parse = |v: &Vec<String>| -> Result<Vec<Float>, OrthoError> {
            v.iter().map(|s| ctx.parse(s).map_err(|e| OrthoError::InvalidTable(e.to_string()))).collect()
        };
        let h = parse(&c.h)?;
        let r = parse(&c.r)?;
        if h.len() != c.m + 1 {
            return Err(OrthoError::InvalidTable(format!("expected {} entries, found {}", c.m + 1, h.len())));
        }
        Self::from_parts(c.params.clone(), c.bits, h, r, BuildInfo::default())
    }
}

/// JSON cache document for a table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableCache {
    pub params: WeightParams,
    pub bits: u32,
    #[serde(rename = "M")]
    pub m: usize,
    pub h: Vec<String>,
    #[serde(rename = "R")]
    pub r: Vec<String>,
}

/// Canonical cache key (t, g, N, M, bits).
pub fn cache_key(params: &WeightParams, m: usize, bits: u32) -> String {
    format!("{},M={},bits={}", params.key(), m, bits)
}

/// Smallest Z with N·V(Z) − 2M·ln Z > ln(1/tol) + 64.
pub fn truncation_radius(params: &WeightParams, m: usize, ctx: &PrecisionCtx) -> f64 {
    let t = params.t.to_f64();
    let g = params.g.to_f64();
    let n = params.scale as f64;
    let target = -(ctx.quad_tol_log2 as f64) * std::f64::consts::LN_2 + 64.0;
    let excess = |z: f64| n * (t * z * z / 2.0 + g * z.powi(4) / 4.0) - 2.0 * m as f64 * z.ln() - target;
    // beyond the potential minimum the excess is increasing
    let mut lo = (-t / g).sqrt().max(1.0);
    if excess(lo) > 0.0 {
        return lo;
    }
    let mut hi = lo * 2.0;
    while excess(hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

struct Grid {
    x: Vec<Float>,
    /// Quadrature weight times e^{-NV}, doubled for the mirrored half-line.
    w: Vec<Float>,
}

fn panel_grid(params: &WeightParams, a: &Float, b: &Float, rule: &GaussLegendre) -> Grid {
    let (xs, ws) = rule.on_interval(a, b);
    let w = xs
        .iter()
        .zip(&ws)
        .map(|(x, w)| Float::with_val(x.prec(), w * weight(x, params)) * 2u32)
        .collect();
    Grid { x: xs, w }
}

fn split(a: &Float, b: &Float) -> Float {
    Float::with_val(a.prec(), a + b) / 2u32
}

/// Stieltjes procedure on a discrete symmetric measure; returns (h, R).
fn stieltjes(grid: &Grid, m: usize, ctx: &PrecisionCtx) -> Result<(Vec<Float>, Vec<Float>), OrthoError> {
    let p = ctx.bits;
    let h0: Float = sum_chunks(&grid.w, p);
    let inv = Float::with_val(p, h0.clone().sqrt().recip());
    let mut prev: Vec<Float> = vec![Float::with_val(p, 0); grid.x.len()];
    let mut cur: Vec<Float> = vec![inv; grid.x.len()];
    let mut h = vec![h0];
    let mut r = vec![Float::with_val(p, 0)];
    let mut sqrt_prev = Float::with_val(p, 0);
    let cancel_limit = ctx.quad_tol_log2 + ctx.bits as i32;
    for n in 0..m {
        let v: Vec<Float> = grid
            .x
            .par_iter()
            .zip(cur.par_iter())
            .zip(prev.par_iter())
            .map(|((x, c), q)| Float::with_val(p, x * c) - Float::with_val(p, &sqrt_prev * q))
            .collect();
        let sq: Vec<Float> = v.iter().zip(&grid.w).map(|(a, w)| Float::with_val(p, a * a) * w).collect();
        let rn = sum_chunks(&sq, p);
        let raw: Vec<Float> = grid
            .x
            .iter()
            .zip(&cur)
            .zip(&grid.w)
            .map(|((x, c), w)| Float::with_val(p, Float::with_val(p, x * c).square()) * w)
            .collect();
        let raw = sum_chunks(&raw, p);
        if !(rn > 0) || Float::with_val(p, &rn / &raw).get_exp().unwrap_or(i32::MIN) < -cancel_limit {
            return Err(OrthoError::PrecisionExhausted { n: n + 1 });
        }
        let s = rn.clone().sqrt();
        let next: Vec<Float> = v.into_par_iter().map(|a| a / &s).collect();
        let hn = Float::with_val(p, &h[n] * &rn);
        h.push(hn);
        r.push(rn);
        prev = std::mem::replace(&mut cur, next);
        sqrt_prev = s;
    }
    Ok((h, r))
}

fn sum_chunks(v: &[Float], p: u32) -> Float {
    let parts: Vec<Float> = v
        .par_chunks(256)
        .map(|c| {
            let mut s = Float::with_val(p, 0);
            for x in c {
                s += x;
            }
            s
        })
        .collect();
    let mut s = Float::with_val(p, 0);
    for x in &parts {
        s += x;
    }
    s
}

/// Integrals of ψ₀², …, ψ_K² over one node set, given recurrence data.
fn psi_square_integrals(grid: &Grid, h0: &Float, sqrt_r: &[Float], p: u32) -> Vec<Float> {
    let k = sqrt_r.len();
    let mut acc = vec![Float::with_val(p, 0); k];
    let inv = Float::with_val(p, h0.clone().sqrt().recip());
    for (x, w) in grid.x.iter().zip(&grid.w) {
        let mut prev = Float::with_val(p, 0);
        let mut cur = inv.clone();
        acc[0] += Float::with_val(p, &cur * &cur) * w;
        for n in 0..k - 1 {
            let v = Float::with_val(p, x * &cur) - Float::with_val(p, &sqrt_r[n] * &prev);
            let next = v / &sqrt_r[n + 1];
            acc[n + 1] += Float::with_val(p, &next * &next) * w;
            prev = std::mem::replace(&mut cur, next);
        }
    }
    acc
}

/// Build the exact recurrence table up to degree `m` by discretized Stieltjes.
///
/// All degrees share one composite Gauss–Legendre panel set on [0, Z] (the
/// weight is even). A panel is bisected while the order-32 rule on the panel
/// and on its two halves disagree, for any ψₖ² with k ≤ m+1, by more than the
/// panel's share of `quad_rel_tol`.
pub fn build_table(params: &WeightParams, m: usize, ctx: &PrecisionCtx) -> Result<RecurrenceTable, OrthoError> {
    if m < 1 {
        return Err(OrthoError::InvalidParams("M must be at least 1".into()));
    }
    let p = ctx.bits;
    let rule = GaussLegendre::shared(p);
    let z_max = truncation_radius(params, m + 1, ctx);
    let zmax = Float::with_val(p, z_max);
    let initial = 16u32;
    let mut edges: Vec<Float> = (0..=initial).map(|i| Float::with_val(p, &zmax * i) / initial).collect();
    let tol = ctx.quad_rel_tol();
    let mut refinements = 0;
    loop {
        let panels: Vec<(Float, Float)> = edges.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect();
        // fine grid: both halves of every panel
        let halves: Vec<(Grid, Grid, Grid)> = panels
            .par_iter()
            .map(|(a, b)| {
                let mid = split(a, b);
                (
                    panel_grid(params, a, b, &rule),
                    panel_grid(params, a, &mid, &rule),
                    panel_grid(params, &mid, b, &rule),
                )
            })
            .collect();
        let mut fine = Grid { x: Vec::new(), w: Vec::new() };
        for (_, l, r) in &halves {
            fine.x.extend(l.x.iter().cloned());
            fine.w.extend(l.w.iter().cloned());
            fine.x.extend(r.x.iter().cloned());
            fine.w.extend(r.w.iter().cloned());
        }
        let (h, r) = stieltjes(&fine, m + 1, ctx)?;
        let sqrt_r: Vec<Float> = r.iter().map(|x| x.clone().sqrt()).collect();
        let diffs: Vec<Float> = halves
            .par_iter()
            .map(|(whole, l, rr)| {
                let a = psi_square_integrals(whole, &h[0], &sqrt_r, p);
                let b = psi_square_integrals(l, &h[0], &sqrt_r, p);
                let c = psi_square_integrals(rr, &h[0], &sqrt_r, p);
                let mut worst = Float::with_val(p, 0);
                for k in 0..a.len() {
                    let d = Float::with_val(p, &a[k] - &b[k]) - &c[k];
                    let d = d.abs();
                    if d > worst {
                        worst = d;
                    }
                }
                worst
            })
            .collect();
        let mut next = vec![edges[0].clone()];
        let mut changed = false;
        for ((a, b), d) in panels.iter().zip(&diffs) {
            // normalized ψ² integrate to 1 over the line; panel share by width
            let share = Float::with_val(p, &tol * Float::with_val(p, b - a)) / &zmax;
            if *d > share {
                next.push(split(a, b));
                changed = true;
            }
            next.push(b.clone());
        }
        if !changed {
            let mut h = h;
            let mut r = r;
            h.truncate(m + 1);
            r.truncate(m + 1);
            let info = BuildInfo { panels: panels.len() * 2, radius: z_max, refinements };
            return RecurrenceTable::from_parts(params.clone(), ctx.bits, h, r, info);
        }
        refinements += 1;
        edges = next;
        if edges.len() > ctx.max_panels {
            return Err(OrthoError::Quadrature(crate::numerics::NumericsError::NonConvergence {
                panels: edges.len(),
            }));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::ops::Pow;

    #[test]
    fn radius_satisfies_bound() {
        let ctx = PrecisionCtx::default();
        let p = WeightParams::from_f64(-4.0, 1.0, 40).unwrap();
        let z = truncation_radius(&p, 50, &ctx);
        let f = |z: f64| 40.0 * (-2.0 * z * z + z.powi(4) / 4.0) - 100.0 * z.ln();
        assert!(f(z) > 400.0 * std::f64::consts::LN_2 + 64.0);
        assert!(f(z * 0.999) <= 400.0 * std::f64::consts::LN_2 + 64.0 + 1.0);
    }

    #[test]
    fn small_table_matches_gaussian_moments() {
        // t=-4, g=1, N=1: check R1 = h1/h0 against direct moments
        let ctx = PrecisionCtx::default();
        let p = WeightParams::from_f64(-4.0, 1.0, 1).unwrap();
        let t = build_table(&p, 6, &ctx).unwrap();
        assert!(t.r[0].is_zero());
        let m = |k: u32| {
            crate::numerics::integrate(
                |x: &Float| x.clone().pow(k) * weight(x, &p),
                &ctx.zero(),
                &ctx.real(12),
                &ctx,
            )
            .unwrap()
            .value
        };
        let r1 = m(2) / m(0);
        let d = Float::with_val(ctx.bits, &r1 - &t.r[1]).abs();
        assert!(d < Float::with_val(ctx.bits, ctx.quad_rel_tol() * 100u32), "{}", d.to_f64());
    }

    #[test]
    fn cache_roundtrip_is_exact() {
        let ctx = PrecisionCtx::default();
        let p = WeightParams::from_f64(-4.0, 1.0, 4).unwrap();
        let t = build_table(&p, 8, &ctx).unwrap();
        let json = serde_json::to_string(&t.to_cache()).unwrap();
        let back = RecurrenceTable::from_cache(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back.h, t.h);
        assert_eq!(back.r, t.r);
        assert!(json.contains("\"R\":[\"0\""));
    }
}
