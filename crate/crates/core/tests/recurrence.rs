use quartic_core::freud::{formal_cycle, freud_forward, freud_residual, recursive_identity_residual};
use quartic_core::numerics::PrecisionCtx;
use quartic_core::ortho::{build_table, r1_closed_form, RecurrenceTable, WeightParams};
use rug::Float;

fn build(scale: u32, m: usize) -> (RecurrenceTable, PrecisionCtx) {
    let c = PrecisionCtx::new(256).unwrap();
    (build_table(&WeightParams::from_f64(-4.0, 1.0, scale).unwrap(), m, &c).unwrap(), c)
}

#[test]
fn two_term_cycle_error_is_fourth_order() {
    // n = N and N + 1 at λ = 1; the two-term expansion leaves an O(N⁻⁴) remainder
    let mut errs = [Vec::new(), Vec::new()];
    for scale in [20u32, 40, 80] {
        let (t, c) = build(scale, scale as usize + 2);
        for (k, n) in [scale as usize, scale as usize + 1].into_iter().enumerate() {
            let lam = Float::with_val(c.bits, n) / scale;
            let cyc = formal_cycle(&t.params, &lam, &c).unwrap();
            let e = Float::with_val(c.bits, &t.r[n] - cyc.value(n % 2 == 1, scale)).abs();
            errs[k].push(e.to_f64());
        }
    }
    for e in &errs {
        for w in e.windows(2) {
            let f = w[0] / w[1];
            assert!((11.0..=21.0).contains(&f), "{e:?}");
        }
    }
}

#[test]
fn oracle_table_satisfies_both_identities() {
    let (t, c) = build(40, 32);
    let tol = c.quad_rel_tol() * 1000u32;
    for n in 1..=30 {
        assert!(freud_residual(&t, n).unwrap().abs() <= tol, "freud n={n}");
    }
    for n in 2..=20 {
        assert!(recursive_identity_residual(&t, n).unwrap().abs() <= tol, "identity n={n}");
    }
}

#[test]
fn first_coefficient_matches_closed_form() {
    let (t, c) = build(40, 4);
    let r1 = r1_closed_form(&t.params, &c).unwrap();
    let rel = Float::with_val(c.bits, &t.r[1] - &r1).abs() / &r1;
    assert!(rel <= c.quad_rel_tol() * 10u32);
}

#[test]
fn forward_iteration_amplifies_rounding() {
    // the forward map amplifies the rounding of R₁ by many orders of magnitude
    let (t, c) = build(40, 44);
    let run = freud_forward(&t.params, &t.r[1], 44, &c);
    let drift = |range: std::ops::Range<usize>| {
        range.map(|n| Float::with_val(c.bits, &run.values[n] - &t.r[n]).abs().to_f64()).fold(0.0, f64::max)
    };
    let early = drift(1..5);
    let late = drift(40..45);
    assert!(early < 1e-60, "early drift {early:e}");
    assert!(late > early * 1e15, "late drift {late:e}");
}
