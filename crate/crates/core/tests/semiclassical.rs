use quartic_core::asympt::{compare_psi, AsymptFrame, Formula};
use quartic_core::numerics::PrecisionCtx;
use quartic_core::ortho::{build_table, WeightParams};
use quartic_core::semiclassics::{classify, psi0, Region, SemiFrame, SideHint, Vertical};
use rug::Float;

fn ctx() -> PrecisionCtx {
    PrecisionCtx::new(256).unwrap()
}

fn params(scale: u32) -> WeightParams {
    WeightParams::from_f64(-4.0, 1.0, scale).unwrap()
}

#[test]
fn perturbed_turning_points_stay_within_calibrated_bound() {
    let c = ctx();
    let shift = |scale: u32| {
        let f = SemiFrame::new(&params(scale), scale as usize, &c).unwrap();
        let d1 = Float::with_val(c.bits, &f.turning.z1n - &f.turning.z1).abs().to_f64();
        let d2 = Float::with_val(c.bits, &f.turning.z2n - &f.turning.z2).abs().to_f64();
        d1.max(d2) * scale as f64
    };
    let calibrated = shift(24);
    for scale in [48u32, 96, 192, 384] {
        assert!(shift(scale) <= 1.1 * calibrated, "N={scale}");
    }
}

#[test]
fn outer_formula_converges() {
    let c = ctx();
    let mut sups = Vec::new();
    for scale in [40u32, 80] {
        let t = build_table(&params(scale), scale as usize + 4, &c).unwrap();
        let f = AsymptFrame::new(&params(scale), scale as usize, &c).unwrap();
        let lo = Float::with_val(c.bits, &f.semi.turning.z2 + &f.delta);
        let zs: Vec<Float> = (0..5).map(|k| Float::with_val(c.bits, &lo + 0.2 * k as f64)).collect();
        let rep = compare_psi(&f, &t, &zs, Formula::Outer).unwrap();
        sups.push(rep.max_rel_err().unwrap().to_f64());
    }
    assert!(sups.windows(2).all(|w| w[1] < w[0]), "{sups:?}");
}

#[test]
fn regions_and_cut_sides() {
    let c = ctx();
    let f = SemiFrame::new(&params(40), 40, &c).unwrap();
    let (region, _) = classify(&f, &c.complex((4.0, 0.5)), SideHint::default()).unwrap();
    assert_eq!(region, Region::Outside);
    let on_cut = c.complex(1.9);
    assert!(classify(&f, &on_cut, SideHint::default()).is_err());
    let up = SideHint { vertical: Some(Vertical::Up), ..Default::default() };
    let down = SideHint { vertical: Some(Vertical::Down), ..Default::default() };
    let a = psi0(&f, &on_cut, up).unwrap();
    let b = psi0(&f, &on_cut, down).unwrap();
    assert!(a.sub(&b).max_abs() > 1e-3);
}
