use quartic_core::laxpair::{
    potential_parts, residual_sweep, transported_ode_residual, wronskian_residuals, LaxFrame, ResidualKind,
};
use quartic_core::numerics::PrecisionCtx;
use quartic_core::ortho::{build_table, RecurrenceTable, WeightParams};
use rug::Float;

fn build(scale: u32) -> RecurrenceTable {
    let c = PrecisionCtx::new(256).unwrap();
    build_table(&WeightParams::from_f64(-4.0, 1.0, scale).unwrap(), scale as usize + 4, &c).unwrap()
}

#[test]
fn every_residual_family_is_small_on_oracle_tables() {
    let t = build(20);
    let c = t.ctx();
    let zs = [0.4, 1.1, 1.7, 2.3, 2.8];
    let ns: Vec<usize> = (3..=20).collect();
    for (kind, scale) in [
        (ResidualKind::Determinant, 1000u32),
        (ResidualKind::Ode, 1000),
        (ResidualKind::Compatibility, 1000),
        (ResidualKind::Schrodinger, 10_000),
    ] {
        let sweep = residual_sweep(&t, kind, &ns, &zs).unwrap();
        assert!(!sweep.rows.is_empty());
        let tol = (c.quad_rel_tol() * scale).to_f64();
        assert!(sweep.max_residual() <= tol, "{kind:?}: {:e}", sweep.max_residual());
        let csv = sweep.to_csv().unwrap();
        assert!(csv.starts_with("n,z,residual,scale\n"));
    }
}

#[test]
fn potential_remainder_shrinks_with_scale() {
    // U₀ carries the O(1) part; U₁ is O(1/N) and the remainder U₂ is smaller still
    let zs = [0.8, 1.9, 2.9];
    let mut worst = Vec::new();
    for scale in [20u32, 40, 80] {
        let t = build(scale);
        let f = LaxFrame::new(&t, scale as usize).unwrap();
        let mut u1 = 0.0f64;
        let mut u2 = 0.0f64;
        for &x in &zs {
            let parts = potential_parts(&f, &t.ctx().real(x)).unwrap();
            u1 = u1.max(parts.u1.to_f64().abs());
            u2 = u2.max(parts.u2.to_f64().abs());
        }
        assert!(u1 * scale as f64 <= 2.0, "N U1 = {}", u1 * scale as f64);
        worst.push(u2);
    }
    assert!(worst.windows(2).all(|w| w[1] < w[0]), "{worst:?}");
    assert!(worst[0] < 0.05, "{worst:?}");
}

#[test]
fn second_solution_wronskian_and_transport() {
    let t = build(24);
    let c = t.ctx();
    for n in [6usize, 15, 24] {
        let f = LaxFrame::new(&t, n).unwrap();
        let z0 = c.real(1.4);
        let zs: Vec<Float> = [0.7, 1.2, 2.0, 2.6].iter().map(|&x| c.real(x)).collect();
        for r in wronskian_residuals(&f, &z0, &zs).unwrap() {
            assert!(r < c.quad_rel_tol() * 1000u32, "n={n}: {}", r.to_f64());
        }
        let (ode, det) = transported_ode_residual(&f, &z0, &c.real(2.1)).unwrap();
        assert!(ode < c.quad_rel_tol() * 1000u32, "n={n}: {}", ode.to_f64());
        assert!(det < c.eps() * 1024u32, "n={n}: {}", det.to_f64());
    }
}
