use crate::cache::TableStore;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::manifest::{CliManifest, Session};
use quartic_core::asympt::{compare_psi, ln_hn_asympt, rn0_error_report, AsymptFrame, ErrorReport, ErrorRow, Formula, RunManifest};
use quartic_core::freud::freud_residual;
use quartic_core::kernels::{airy_grid, sine_grid, support_edges};
use quartic_core::laxpair::{
    a_matrix, compatibility_relative, det_identity_residual, j_increment_residual, schrodinger_check, LaxError, LaxFrame,
};
use quartic_core::numerics::{to_decimal_digits, Matrix2C, PrecisionCtx};
use quartic_core::ortho::{cache_key, OrthoError, RecurrenceTable, WeightParams};
use quartic_core::semiclassics::{
    classify, gap_jump_norms, phi_model, psi0, psi0_in_region, reflection_check, stokes_constants, Edge, Region, SemiFrame, SideHint, Vertical,
};
use rug::{Complex, Float};
use serde::Serialize;
use std::collections::HashMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Regime {
    Bulk,
    Outer,
    Edge,
    Rn,
    Hn,
    KernelSine,
    KernelAiry,
    Identities,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Bulk => "bulk",
            Regime::Outer => "outer",
            Regime::Edge => "edge",
            Regime::Rn => "rn",
            Regime::Hn => "hn",
            Regime::KernelSine => "kernel-sine",
            Regime::KernelAiry => "kernel-airy",
            Regime::Identities => "identities",
        }
    }
}

fn sci(v: &Float) -> String {
    to_decimal_digits(v, 6)
}

fn fetch(
    store: &TableStore,
    session: &mut Session,
    params: &WeightParams,
    m: usize,
    ctx: &PrecisionCtx,
) -> Result<RecurrenceTable, CliError> {
    let (table, _) = store.get(params, m, ctx)?;
    session.add_key(cache_key(params, m, ctx.bits));
    Ok(table)
}

fn decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(" ")
}

/// Builds or loads the table for every N and checks it.
pub fn cmd_table(config: &RunConfig, store: &TableStore) -> Result<CliManifest, CliError> {
    config.validate()?;
    let ctx = config.ctx()?;
    let tol = ctx.quad_rel_tol() * 1000u32;
    let mut s = Session::new("table", config)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["scale", "n", "R", "h"]).map_err(|e| CliError::Io(e.to_string()))?;
    for &scale in &config.scales {
        let params = config.params(scale)?;
        let m = config.degree_at(scale)?;
        let table = fetch(store, &mut s, &params, m, &ctx)?;
        let inv = table.check_invariants();
        s.check(format!("invariants N={scale}"), inv.is_ok(), inv.err().map(|e| e.to_string()).unwrap_or_default(), "");
        let mut worst = ctx.zero();
        for n in 1..m {
            worst = worst.max(&freud_residual(&table, n)?.abs());
        }
        s.check(format!("freud residual N={scale}"), worst <= tol, sci(&worst), sci(&tol));
        for n in 0..=m {
            w.write_record([scale.to_string(), n.to_string(), to_decimal_digits(&table.r[n], 24), to_decimal_digits(&table.h[n], 24)])
                .map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    s.write("table.csv", &String::from_utf8_lossy(&bytes))?;
    s.finish()
}

fn asympt_frame(config: &RunConfig, params: &WeightParams, n: usize, ctx: &PrecisionCtx) -> Result<AsymptFrame, CliError> {
    let semi = SemiFrame::with_ellipse(params, n, ctx, config.ellipse_ratio()?)?;
    Ok(AsymptFrame::from_semi(semi, config.delta_ratio()?))
}

fn merge(label: &str, parts: Vec<ErrorReport>) -> Option<ErrorReport> {
    let mut it = parts.into_iter();
    let mut out = it.next()?;
    out.manifest.label = label.to_string();
    for r in it {
        out.rows.extend(r.rows);
        out.fits.extend(r.fits);
        for (sc, key) in r.manifest.scales.into_iter().zip(r.manifest.table_keys) {
            if !out.manifest.table_keys.contains(&key) {
                out.manifest.scales.push(sc);
                out.manifest.table_keys.push(key);
            }
        }
    }
    Some(out)
}

fn write_report(s: &mut Session, name: &str, rep: &ErrorReport) -> Result<(), CliError> {
    s.write(&format!("{name}.csv"), &rep.to_csv()?)?;
    s.write(&format!("{name}.json"), &rep.to_json()?)
}

fn spaced(a: &Float, b: &Float, count: usize, with_ends: bool) -> Vec<Float> {
    let p = a.prec();
    let span = Float::with_val(p, b - a);
    (0..count)
        .map(|k| {
            let frac = if with_ends {
                Float::with_val(p, k as u32) / (count as u32 - 1).max(1)
            } else {
                Float::with_val(p, k as u32 + 1) / (count as u32 + 1)
            };
            Float::with_val(p, &span * &frac) + a
        })
        .collect()
}

fn psi_points(frame: &AsymptFrame, regime: Regime) -> Vec<(Vec<Float>, Formula)> {
    let tp = &frame.semi.turning;
    let d = &frame.delta;
    let p = frame.prec();
    match regime {
        Regime::Bulk => vec![(frame.bulk_grid(20), Formula::Bulk)],
        Regime::Outer => {
            let lo = Float::with_val(p, &tp.z2 + d);
            let hi = Float::with_val(p, &lo + 1u32);
            let inner = Float::with_val(p, &tp.z1 - d);
            let mut zs = spaced(&lo, &hi, 5, true);
            zs.extend(spaced(&Float::with_val(p, 0), &inner, 3, false));
            vec![(zs, Formula::Outer)]
        }
        _ => {
            let around = |c: &Float| spaced(&Float::with_val(p, c - d), &Float::with_val(p, c + d), 9, true);
            vec![(around(&tp.z2), Formula::Edge(Edge::Outer)), (around(&tp.z1), Formula::Edge(Edge::Inner))]
        }
    }
}

fn compare_psi_regime(config: &RunConfig, store: &TableStore, s: &mut Session, regime: Regime) -> Result<(), CliError> {
    let ctx = config.ctx()?;
    let mut parts = Vec::new();
    let mut sups = Vec::new();
    for &scale in &config.scales {
        let params = config.params(scale)?;
        let n = config.index_at(scale)?;
        let table = fetch(store, s, &params, config.degree_at(scale)?, &ctx)?;
        let frame = asympt_frame(config, &params, n, &ctx)?;
        let mut sup = 0.0f64;
        for (zs, formula) in psi_points(&frame, regime) {
            let rep = compare_psi(&frame, &table, &zs, formula)?;
            sup = sup.max(rep.max_rel_err().map(|e| e.to_f64()).unwrap_or(0.0));
            parts.push(rep);
        }
        sups.push(sup);
    }
    if let Some(rep) = merge(regime.name(), parts) {
        write_report(s, regime.name(), &rep)?;
    }
    s.check(format!("{} sup relative error decreases with N", regime.name()), decreasing(&sups), list(&sups), "strictly decreasing");
    Ok(())
}

fn compare_rn(config: &RunConfig, store: &TableStore, s: &mut Session) -> Result<(), CliError> {
    let ctx = config.ctx()?;
    let lambda = config.lambda_value()?;
    let base = config.params(config.scales[0])?;
    let mut tables: HashMap<u32, RecurrenceTable> = HashMap::new();
    for &scale in &config.scales {
        let centre = (lambda.to_f64() * scale as f64).round() as usize;
        let m = config.degree_at(scale)?.max(centre - centre % 2 + 1);
        let table = fetch(store, s, &base.with_scale(scale), m, &ctx)?;
        tables.insert(scale, table);
    }
    let rep = rn0_error_report(&base, &config.scales, &lambda, &ctx, |p, m| {
        let t = tables.get(&p.scale).ok_or(OrthoError::IndexOutOfRange { n: m, max: 0 })?;
        if t.max_degree() < m {
            return Err(OrthoError::IndexOutOfRange { n: m, max: t.max_degree() });
        }
        Ok(t.clone())
    })?;
    write_report(s, "rn", &rep)?;
    for fit in &rep.fits {
        s.check(format!("rn {} decay exponent", fit.label), fit.exponent >= 0.7, format!("{:.3}", fit.exponent), ">= 0.7");
    }
    Ok(())
}

fn compare_hn(config: &RunConfig, store: &TableStore, s: &mut Session) -> Result<(), CliError> {
    let ctx = config.ctx()?;
    let p = ctx.bits;
    let params0 = config.params(config.scales[0])?;
    let mut manifest = RunManifest {
        label: "hn".into(),
        t: to_decimal_digits(&params0.t, 20),
        g: to_decimal_digits(&params0.g, 20),
        scales: Vec::new(),
        bits: p,
        table_keys: Vec::new(),
    };
    let mut rows = Vec::new();
    let mut errs = Vec::new();
    for &scale in &config.scales {
        let params = config.params(scale)?;
        let m = config.degree_at(scale)?;
        let n = config.index_at(scale)?;
        let table = fetch(store, s, &params, m, &ctx)?;
        manifest.scales.push(scale);
        manifest.table_keys.push(cache_key(&params, m, p));
        let frame = asympt_frame(config, &params, n, &ctx)?;
        let oracle = table.h[n].clone().ln();
        let formula = ln_hn_asympt(&frame);
        let abs_err = Float::with_val(p, &oracle - &formula).abs();
        let rel_err = Float::with_val(p, &abs_err / Float::with_val(p, formula.abs_ref()));
        errs.push(abs_err.to_f64());
        rows.push(ErrorRow { scale, n, z: None, oracle, formula, abs_err, rel_err });
    }
    write_report(s, "hn", &ErrorReport { manifest, rows, fits: Vec::new() })?;
    s.check("hn log error decreases with N", decreasing(&errs), list(&errs), "strictly decreasing");
    Ok(())
}

fn compare_kernel(config: &RunConfig, store: &TableStore, s: &mut Session, sine: bool) -> Result<(), CliError> {
    let ctx = config.ctx()?;
    let us: Vec<f64> = (0..9).map(|k| -2.0 + 0.5 * k as f64).collect();
    let mut sups = Vec::new();
    let name = if sine { "kernel-sine" } else { "kernel-airy" };
    for &scale in &config.scales {
        let params = config.params(scale)?;
        let n = config.index_at(scale)?;
        let table = fetch(store, s, &params, config.degree_at(scale)?, &ctx)?;
        let grid = if sine {
            let z0 = match config.z0_value()? {
                Some(z) => z,
                None => {
                    let (a, b) = support_edges(&params, &ctx)?;
                    (a + b) / 2u32
                }
            };
            sine_grid(&table, n, &z0, &us)?
        } else {
            airy_grid(&table, n, &us)?
        };
        sups.push(grid.sup_abs_err());
        s.write(&format!("{name}-N{scale}.csv"), &grid.to_csv()?)?;
        s.write(&format!("{name}-N{scale}.json"), &grid.to_json()?)?;
    }
    s.check(format!("{name} sup error decreases with N"), decreasing(&sups), list(&sups), "strictly decreasing");
    Ok(())
}

#[derive(Serialize)]
struct IdentityRow {
    check: String,
    scale: u32,
    value: String,
    tolerance: String,
    passed: bool,
}

fn cmax(m: &Matrix2C) -> Float {
    m.max_abs()
}

fn stokes_matrix(p: u32) -> Matrix2C {
    Matrix2C::new(
        Complex::with_val(p, 1),
        Complex::with_val(p, (0, -2)) * Float::with_val(p, rug::float::Constant::Pi),
        Complex::with_val(p, 0),
        Complex::with_val(p, 1),
    )
}

fn compare_identities(config: &RunConfig, store: &TableStore, s: &mut Session) -> Result<(), CliError> {
    let ctx = config.ctx()?;
    let p = ctx.bits;
    let tol3 = ctx.quad_rel_tol() * 1000u32;
    let tol4 = ctx.quad_rel_tol() * 10_000u32;
    let exact = ctx.eps() * (1u32 << 16);
    let mut rows: Vec<IdentityRow> = Vec::new();
    let mut record = |s: &mut Session, check: &str, scale: u32, value: &Float, tol: &Float| {
        let passed = value <= tol;
        s.check(format!("{check} N={scale}"), passed, sci(value), sci(tol));
        rows.push(IdentityRow { check: check.into(), scale, value: sci(value), tolerance: sci(tol), passed });
    };
    for &scale in &config.scales {
        let params = config.params(scale)?;
        let m = config.degree_at(scale)?;
        let n = config.index_at(scale)?;
        let table = fetch(store, s, &params, m, &ctx)?;

        let mut worst = ctx.zero();
        for k in 1..m {
            worst = worst.max(&freud_residual(&table, k)?.abs());
        }
        record(s, "freud residual", scale, &worst, &tol3);

        let lax = LaxFrame::new(&table, n.min(m - 2).max(1))?;
        let zs = [0.5, 1.5, 2.5];
        let mut tr = ctx.zero();
        let mut det = ctx.zero();
        let mut compat = ctx.zero();
        for &x in &zs {
            let z = ctx.complex((x, 0.1));
            tr = tr.max(&Float::with_val(p, a_matrix(&lax, &z).trace().abs_ref()));
            det = det.max(&det_identity_residual(&lax, &ctx.real(x))?);
            compat = compat.max(&compatibility_relative(&lax, &z)?);
        }
        record(s, "trace A", scale, &tr, &exact);
        record(s, "det A identity", scale, &det, &tol3);
        record(s, "compatibility", scale, &compat, &tol3);
        let jinc = j_increment_residual(&table, lax.n)?.abs();
        record(s, "J increment", scale, &jinc, &tol3);
        let mut schr = ctx.zero();
        for &x in &[0.9, 1.6, 2.2, 2.9] {
            match schrodinger_check(&lax, &ctx.real(x)) {
                Ok(r) => schr = schr.max(&r),
                Err(LaxError::A12Zero(_)) => {}
                Err(e) => return Err(e.into()),
            }
        }
        record(s, "schrodinger reduction", scale, &schr, &tol4);

        let mut airy = ctx.zero();
        for edge in [Edge::Inner, Edge::Outer] {
            for (a, b) in [(0.4, 0.3), (-0.7, 0.2), (1.1, -0.5)] {
                let w = ctx.complex((a, b));
                let up = phi_model(&w, Vertical::Up, edge, scale, &ctx)?;
                let down = phi_model(&w, Vertical::Down, edge, scale, &ctx)?;
                let dev = cmax(&up.sub(&down.mul(&stokes_matrix(p)))) / cmax(&up);
                airy = airy.max(&dev);
            }
        }
        record(s, "airy connection", scale, &airy, &exact);

        let semi = SemiFrame::with_ellipse(&params, n, &ctx, config.ellipse_ratio()?)?;
        let (z1, z2) = (semi.turning.z1.to_f64(), semi.turning.z2.to_f64());
        let mut jump = ctx.zero();
        for frac in [0.1, 0.5, 0.9] {
            let x = z1 + (z2 - z1) * frac;
            for sign in [1.0, -1.0] {
                let z = ctx.complex(sign * x);
                let up = psi0(&semi, &z, SideHint { vertical: Some(Vertical::Up), ..Default::default() })?;
                let down = psi0(&semi, &z, SideHint { vertical: Some(Vertical::Down), ..Default::default() })?;
                jump = jump.max(&(cmax(&up.sub(&down.mul(&stokes_matrix(p)))) / cmax(&up)));
            }
        }
        record(s, "cut jump", scale, &jump, &exact);
        let mut sym = ctx.zero();
        for (a, b) in [(-2.9, 1.3), (-3.5, -0.4)] {
            let (u, d) = reflection_check(&semi, &ctx.complex((a, b)), 400)?;
            sym = sym.max(&u).max(&d);
        }
        record(s, "reflection symmetry", scale, &sym, &tol3);
    }

    // Stokes multipliers at a small scale, where N·h₀ stays within reach of the precision.
    let small = config.params(8)?;
    let tight = ctx.tightened(ctx.eps_log2() + 6);
    let table = fetch(store, s, &small, 2, &tight)?;
    let st = stokes_constants(&small, &table.h[0], &table.r[1], &ctx)?;
    let two_pi_i = Complex::with_val(p, (0, 2)) * ctx.pi();
    let devs = [
        Float::with_val(p, st.s1.abs_ref()),
        Float::with_val(p, Complex::with_val(p, &st.s2 - &two_pi_i).abs_ref()),
        Float::with_val(p, st.s3.abs_ref()),
        Float::with_val(p, Complex::with_val(p, &st.s4 + &two_pi_i).abs_ref()),
    ];
    let worst = devs.into_iter().fold(ctx.zero(), |a, b| a.max(&b));
    record(s, "stokes multipliers", 8, &worst, &tol3);

    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    s.write("identities.csv", &String::from_utf8_lossy(&bytes))
}

/// Runs one comparison and writes its reports.
pub fn cmd_compare(config: &RunConfig, store: &TableStore, regime: Regime) -> Result<CliManifest, CliError> {
    config.validate()?;
    let mut s = Session::new(&format!("compare-{}", regime.name()), config)?;
    match regime {
        Regime::Bulk | Regime::Outer | Regime::Edge => compare_psi_regime(config, store, &mut s, regime)?,
        Regime::Rn => compare_rn(config, store, &mut s)?,
        Regime::Hn => compare_hn(config, store, &mut s)?,
        Regime::KernelSine => compare_kernel(config, store, &mut s, true)?,
        Regime::KernelAiry => compare_kernel(config, store, &mut s, false)?,
        Regime::Identities => compare_identities(config, store, &mut s)?,
    }
    s.finish()
}

/// A probe point with optional side hints, written as `x`, `x+yi` or `x-yi`,
/// optionally followed by `@hint[,hint…]` with hints up, down, inner, outer,
/// inside, outside.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbePoint {
    pub re: String,
    pub im: String,
    pub hint: SideHint,
}

impl std::str::FromStr for ProbePoint {
    type Err = CliError;

    fn from_str(text: &str) -> Result<Self, CliError> {
        let bad = || CliError::Config(format!("cannot parse probe point {text:?}"));
        let (num, hints) = match text.split_once('@') {
            Some((a, b)) => (a.trim(), Some(b)),
            None => (text.trim(), None),
        };
        let mut hint = SideHint::default();
        for h in hints.into_iter().flat_map(|h| h.split(',')) {
            match h.trim() {
                "up" => hint.vertical = Some(Vertical::Up),
                "down" => hint.vertical = Some(Vertical::Down),
                "inner" => hint.edge = Some(Edge::Inner),
                "outer" => hint.edge = Some(Edge::Outer),
                "inside" => hint.inside = Some(true),
                "outside" => hint.inside = Some(false),
                _ => return Err(bad()),
            }
        }
        let (re, im) = if let Some(body) = num.strip_suffix('i') {
            let bytes = body.as_bytes();
            let split = (1..bytes.len())
                .rev()
                .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'))
                .ok_or_else(bad)?;
            let im = &body[split..];
            let im = if im == "+" || im == "-" { format!("{im}1") } else { im.to_string() };
            (body[..split].to_string(), im.trim_start_matches('+').to_string())
        } else {
            (num.to_string(), "0".to_string())
        };
        Float::parse(&re).map_err(|_| bad())?;
        Float::parse(&im).map_err(|_| bad())?;
        Ok(ProbePoint { re, im, hint })
    }
}

#[derive(Serialize)]
struct ProbeRow {
    re: String,
    im: String,
    region: String,
    psi11: String,
    psi12: String,
    psi21: String,
    psi22: String,
    jump_kind: String,
    jump_deviation: String,
    symmetry_residual: String,
    error: String,
}

fn cfmt(z: &Complex) -> String {
    format!("{}{}{}i", to_decimal_digits(z.real(), 24), if z.imag().is_sign_negative() { "" } else { "+" }, to_decimal_digits(z.imag(), 24))
}

/// Tabulates Ψ⁰ at the given points with jump and symmetry residuals.
pub fn cmd_psi0_probe(config: &RunConfig, points: &[ProbePoint]) -> Result<CliManifest, CliError> {
    config.validate()?;
    let ctx = config.ctx()?;
    let p = ctx.bits;
    let exact = ctx.eps() * (1u32 << 16);
    let tol3 = ctx.quad_rel_tol() * 1000u32;
    let mut s = Session::new("psi0-probe", config)?;
    let mut rows = Vec::new();
    for &scale in &config.scales {
        let params = config.params(scale)?;
        let n = config.index_at(scale)?;
        let frame = SemiFrame::with_ellipse(&params, n, &ctx, config.ellipse_ratio()?)?;
        for pt in points {
            let re = ctx.parse(&pt.re)?;
            let im = ctx.parse(&pt.im)?;
            let z = Complex::with_val(p, (&re, &im));
            let mut row = ProbeRow {
                re: pt.re.clone(),
                im: pt.im.clone(),
                region: String::new(),
                psi11: String::new(),
                psi12: String::new(),
                psi21: String::new(),
                psi22: String::new(),
                jump_kind: String::new(),
                jump_deviation: String::new(),
                symmetry_residual: String::new(),
                error: String::new(),
            };
            let label = format!("N={scale} z={}{:+}i", re.to_f64(), im.to_f64());
            let region = match classify(&frame, &z, pt.hint) {
                Ok(r) => r,
                Err(e) => {
                    row.error = e.to_string();
                    s.check(format!("probe {label}"), false, e.to_string(), "");
                    rows.push(row);
                    continue;
                }
            };
            row.region = format!("{:?}{}", region.0, if region.1 { " reflected" } else { "" });
            let m = psi0(&frame, &z, pt.hint)?;
            row.psi11 = cfmt(m.get(0, 0));
            row.psi12 = cfmt(m.get(0, 1));
            row.psi21 = cfmt(m.get(1, 0));
            row.psi22 = cfmt(m.get(1, 1));

            let x = Float::with_val(p, re.abs_ref());
            if im.is_zero() && pt.hint.vertical.is_some() {
                let other = SideHint { vertical: pt.hint.vertical.map(|v| v.flip()), ..pt.hint };
                let m2 = psi0(&frame, &z, other)?;
                let (up, down) = if pt.hint.vertical == Some(Vertical::Up) { (&m, &m2) } else { (&m2, &m) };
                let dev = cmax(&up.sub(&down.mul(&stokes_matrix(p)))) / cmax(up);
                row.jump_kind = "cut".into();
                row.jump_deviation = sci(&dev);
                s.check(format!("cut jump {label}"), dev <= exact, sci(&dev), sci(&exact));
            } else if im.is_zero() && !x.is_zero() && (x > frame.turning.z2 || x < frame.turning.z1) {
                if let Ok(g) = gap_jump_norms(&frame, &[x.clone()]) {
                    row.jump_kind = if g[0].resolved { "gap".into() } else { "gap (below precision)".into() };
                    row.jump_deviation = sci(&g[0].norm);
                }
            } else if pt.hint.inside.is_some() {
                // on the ellipse: compare the inside and outside formulas
                let edge = pt.hint.edge.unwrap_or(if re > frame.ellipse.center { Edge::Outer } else { Edge::Inner });
                let side = if im.is_sign_negative() { Vertical::Down } else { Vertical::Up };
                let w = if re.is_sign_negative() { Complex::with_val(p, -&z) } else { z.clone() };
                if let (Ok(a), Ok(b)) = (psi0_in_region(&frame, &w, Region::Turning(edge, side)), psi0_in_region(&frame, &w, Region::Outside)) {
                    if let Some(inv) = b.inverse() {
                        let dev = a.mul(&inv).sub(&Matrix2C::identity(p)).max_abs();
                        row.jump_kind = "boundary (N times deviation)".into();
                        row.jump_deviation = sci(&(dev * scale));
                    }
                }
            }
            // left half-plane beyond the ellipse: continuation of the right-half formula
            // against the reflected one
            if re.is_sign_negative() && !re.is_zero() {
                if let Ok((u, d)) = reflection_check(&frame, &z, 400) {
                    let sym = u.max(&d);
                    row.symmetry_residual = sci(&sym);
                    s.check(format!("symmetry {label}"), sym <= tol3, sci(&sym), sci(&tol3));
                }
            }
            rows.push(row);
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    s.write("psi0.csv", &String::from_utf8_lossy(&bytes))?;
    s.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probe_point_parsing() {
        let a: ProbePoint = "1.9@up".parse().unwrap();
        assert_eq!((a.re.as_str(), a.im.as_str()), ("1.9", "0"));
        assert_eq!(a.hint.vertical, Some(Vertical::Up));
        let b: ProbePoint = "2.3-0.05i".parse().unwrap();
        assert_eq!((b.re.as_str(), b.im.as_str()), ("2.3", "-0.05"));
        let c: ProbePoint = "-1e-3+2e-1i@inside,outer".parse().unwrap();
        assert_eq!((c.re.as_str(), c.im.as_str()), ("-1e-3", "2e-1"));
        assert_eq!(c.hint.inside, Some(true));
        assert!("1.9@sideways".parse::<ProbePoint>().is_err());
        assert!("abc".parse::<ProbePoint>().is_err());
    }
}
