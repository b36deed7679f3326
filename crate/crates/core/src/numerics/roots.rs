use super::{NumericsError, PrecisionCtx};
use rug::Float;

const MAX_ITER: usize = 64;
const STALL_WINDOW: usize = 8;

#[derive(Clone, Debug)]
pub struct RootResult {
    pub root: Float,
    pub iterations: usize,
}

/// Newton iteration for a simple root of `f` near `x0`.
///
/// Stops once |f(x)| < eps·scale with scale = |f(x0)| + |f'(x0)|·max(1, |x0|).
/// A step that has not shrunk below the smallest step of the previous eight
/// iterations signals `Divergence`; eight consecutive linear contractions
/// (ratio above 1/4) signal `SlowContraction`.
pub fn find_root<F, D>(f: F, df: D, x0: &Float, ctx: &PrecisionCtx) -> Result<RootResult, NumericsError>
where
    F: Fn(&Float) -> Float,
    D: Fn(&Float) -> Float,
{
    let prec = ctx.bits;
    let mut x = Float::with_val(prec, x0);
    let f0 = f(&x);
    let d0 = df(&x);
    let one = Float::with_val(prec, 1);
    let scale = Float::with_val(prec, f0.clone().abs())
        + Float::with_val(prec, d0.clone().abs() * x.clone().abs().max(&one));
    let target = Float::with_val(prec, &scale * ctx.eps());
    let mut fx = f0;
    let mut steps: Vec<Float> = Vec::new();
    let mut linear = 0usize;
    for it in 0..=MAX_ITER {
        if !fx.is_finite() {
            return Err(NumericsError::NonFinite("root function value".into()));
        }
        if fx.clone().abs() < target || fx.is_zero() {
            return Ok(RootResult { root: x, iterations: it });
        }
        if it == MAX_ITER {
            break;
        }
        let d = df(&x);
        if d.is_zero() || !d.is_finite() {
            return Err(NumericsError::Divergence { iterations: it });
        }
        let step = Float::with_val(prec, &fx / &d);
        let size = step.clone().abs();
        if let Some(prev) = steps.last() {
            if !prev.is_zero() && Float::with_val(prec, &size / prev) > 0.25 {
                linear += 1;
            } else {
                linear = 0;
            }
        }
        if steps.len() >= STALL_WINDOW {
            let window = &steps[steps.len() - STALL_WINDOW..];
            let min = window.iter().min_by(|a, b| a.partial_cmp(b).unwrap()).unwrap();
            if size >= *min && size >= *window.first().unwrap() {
                return Err(NumericsError::Divergence { iterations: it });
            }
        }
        if linear >= STALL_WINDOW {
            return Err(NumericsError::SlowContraction { iterations: it });
        }
        x -= &step;
        steps.push(size);
        fx = f(&x);
    }
    Err(NumericsError::Divergence { iterations: MAX_ITER })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::ops::Pow;

    #[test]
    fn sqrt_two() {
        let c = PrecisionCtx::default();
        let r = find_root(
            |x| Float::with_val(c.bits, x * x) - 2u32,
            |x| Float::with_val(c.bits, x * 2u32),
            &c.real(1.5),
            &c,
        )
        .unwrap();
        let d = Float::with_val(c.bits, &r.root - c.real(2).sqrt()).abs();
        assert!(d < c.eps());
        assert!(r.iterations < 16);
    }

    #[test]
    fn triple_root_is_flagged() {
        let c = PrecisionCtx::default();
        let r = find_root(
            |x| x.clone().pow(3u32),
            |x| Float::with_val(c.bits, x * x) * 3u32,
            &c.real(1),
            &c,
        );
        assert!(matches!(r, Err(NumericsError::SlowContraction { .. })));
        // deterministic across calls
        let r2 = find_root(
            |x| x.clone().pow(3u32),
            |x| Float::with_val(c.bits, x * x) * 3u32,
            &c.real(1),
            &c,
        );
        assert_eq!(format!("{r:?}"), format!("{r2:?}"));
    }

    #[test]
    fn oscillating_newton_diverges() {
        // x^(1/3)-like cycle: f = sign(x)|x|^(1/3) makes Newton double the step
        let c = PrecisionCtx::default();
        let r = find_root(
            |x| {
                let a = x.clone().abs().cbrt();
                if x.is_sign_negative() { -a } else { a }
            },
            |x| {
                let a = x.clone().abs().cbrt();
                (Float::with_val(c.bits, &a * &a) * 3u32).recip()
            },
            &c.real(0.1),
            &c,
        );
        assert!(matches!(r, Err(NumericsError::Divergence { .. })));
    }
}
