use super::{NumericsError, PrecisionCtx};
use rayon::prelude::*;
#[cfg(test)]
use rug::ops::Pow;
use rug::{Complex, Float};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Gauss–Legendre order used on every panel.
pub const GL_ORDER: usize = 32;

/// Gauss–Legendre nodes and weights on [-1, 1].
#[derive(Debug)]
pub struct GaussLegendre {
    pub order: usize,
    pub nodes: Vec<Float>,
    pub weights: Vec<Float>,
}

impl GaussLegendre {
    /// Rule of order `n` computed by Newton iteration on the Legendre polynomial.
    pub fn compute(n: usize, prec: u32) -> Self {
        let wp = prec + 64;
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 1..=n {
            let guess = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
            let mut x = Float::with_val(wp, guess);
            let mut dp = Float::new(wp);
            for _ in 0..200 {
                let (p, d) = legendre(n, &x);
                let dx = Float::with_val(wp, &p / &d);
                x -= &dx;
                dp = d;
                if dx.is_zero() || dx.clone().abs().get_exp().unwrap_or(i32::MIN) < -(wp as i32) + 4 {
                    let (_, d2) = legendre(n, &x);
                    dp = d2;
                    break;
                }
            }
            let one_minus = Float::with_val(wp, 1 - Float::with_val(wp, &x * &x));
            let w = Float::with_val(wp, 2) / (one_minus * Float::with_val(wp, &dp * &dp));
            nodes.push(Float::with_val(prec, &x));
            weights.push(Float::with_val(prec, &w));
        }
        GaussLegendre { order: n, nodes, weights }
    }

    /// Shared order-32 rule at precision `prec`.
    pub fn shared(prec: u32) -> Arc<GaussLegendre> {
        static CACHE: OnceLock<Mutex<HashMap<u32, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(r) = cache.lock().unwrap().get(&prec) {
            return r.clone();
        }
        let rule = Arc::new(GaussLegendre::compute(GL_ORDER, prec));
        cache.lock().unwrap().entry(prec).or_insert(rule).clone()
    }

    /// Map the rule to [a, b]: returns (abscissae, scaled weights).
    pub fn on_interval(&self, a: &Float, b: &Float) -> (Vec<Float>, Vec<Float>) {
        let prec = a.prec().max(b.prec());
        let mid = Float::with_val(prec, a + b) / 2u32;
        let half = Float::with_val(prec, b - a) / 2u32;
        let xs = self.nodes.iter().map(|x| Float::with_val(prec, x * &half) + &mid).collect();
        let ws = self.weights.iter().map(|w| Float::with_val(prec, w * &half)).collect();
        (xs, ws)
    }
}

fn legendre(n: usize, x: &Float) -> (Float, Float) {
    let prec = x.prec();
    let mut p0 = Float::with_val(prec, 1);
    let mut p1 = x.clone();
    for k in 2..=n {
        let kf = k as u32;
        let a = Float::with_val(prec, x * &p1) * (2 * kf - 1);
        let b = Float::with_val(prec, &p0 * (kf - 1));
        let p2 = (a - b) / kf;
        p0 = p1;
        p1 = p2;
    }
    // P'_n = n (x P_n - P_{n-1}) / (x^2 - 1)
    let num = (Float::with_val(prec, x * &p1) - &p0) * n as u32;
    let den = Float::with_val(prec, x * x) - 1u32;
    let d = num / den;
    (p1, d)
}

/// Values that can be integrated: real, complex, or vectors of reals.
pub trait QuadValue: Clone + Send + Sync {
    fn zero_like(prec: u32, template: &Self) -> Self;
    fn add_scaled(&mut self, w: &Float, v: &Self);
    fn add(&mut self, v: &Self);
    /// Magnitude used for the L1 scale and error estimates.
    fn magnitude(&self) -> Float;
    fn distance(&self, other: &Self) -> Float;
}

impl QuadValue for Float {
    fn zero_like(prec: u32, _: &Self) -> Self {
        Float::with_val(prec, 0)
    }
    fn add_scaled(&mut self, w: &Float, v: &Self) {
        *self += Float::with_val(self.prec(), w * v);
    }
    fn add(&mut self, v: &Self) {
        *self += v;
    }
    fn magnitude(&self) -> Float {
        self.clone().abs()
    }
    fn distance(&self, other: &Self) -> Float {
        Float::with_val(self.prec(), self - other).abs()
    }
}

impl QuadValue for Complex {
    fn zero_like(prec: u32, _: &Self) -> Self {
        Complex::with_val(prec, 0)
    }
    fn add_scaled(&mut self, w: &Float, v: &Self) {
        *self += Complex::with_val(self.prec(), v * w);
    }
    fn add(&mut self, v: &Self) {
        *self += v;
    }
    fn magnitude(&self) -> Float {
        Float::with_val(self.prec().0, self.abs_ref())
    }
    fn distance(&self, other: &Self) -> Float {
        Float::with_val(self.prec().0, Complex::with_val(self.prec(), self - other).abs_ref())
    }
}

impl QuadValue for Vec<Float> {
    fn zero_like(prec: u32, template: &Self) -> Self {
        vec![Float::with_val(prec, 0); template.len()]
    }
    fn add_scaled(&mut self, w: &Float, v: &Self) {
        for (s, x) in self.iter_mut().zip(v) {
            *s += Float::with_val(s.prec(), w * x);
        }
    }
    fn add(&mut self, v: &Self) {
        for (s, x) in self.iter_mut().zip(v) {
            *s += x;
        }
    }
    fn magnitude(&self) -> Float {
        let mut m = Float::with_val(self.first().map_or(64, |x| x.prec()), 0);
        for x in self {
            let a = x.clone().abs();
            if a > m {
                m = a;
            }
        }
        m
    }
    fn distance(&self, other: &Self) -> Float {
        let mut m = Float::with_val(self.first().map_or(64, |x| x.prec()), 0);
        for (x, y) in self.iter().zip(other) {
            let a = Float::with_val(x.prec(), x - y).abs();
            if a > m {
                m = a;
            }
        }
        m
    }
}

impl QuadValue for Vec<Complex> {
    fn zero_like(prec: u32, template: &Self) -> Self {
        vec![Complex::with_val(prec, 0); template.len()]
    }
    fn add_scaled(&mut self, w: &Float, v: &Self) {
        for (s, x) in self.iter_mut().zip(v) {
            *s += Complex::with_val(s.prec(), x * w);
        }
    }
    fn add(&mut self, v: &Self) {
        for (s, x) in self.iter_mut().zip(v) {
            *s += x;
        }
    }
    fn magnitude(&self) -> Float {
        let mut m = Float::with_val(self.first().map_or(64, |x| x.prec().0), 0);
        for x in self {
            let a = Float::with_val(m.prec(), x.abs_ref());
            if a > m {
                m = a;
            }
        }
        m
    }
    fn distance(&self, other: &Self) -> Float {
        let mut m = Float::with_val(self.first().map_or(64, |x| x.prec().0), 0);
        for (x, y) in self.iter().zip(other) {
            let a = Float::with_val(m.prec(), Complex::with_val(x.prec(), x - y).abs_ref());
            if a > m {
                m = a;
            }
        }
        m
    }
}

/// Result of a quadrature with its reproducibility record.
#[derive(Clone, Debug)]
pub struct Quadrature<T> {
    pub value: T,
    /// Integral of the magnitude, used as the scale for relative error.
    pub l1: Float,
    pub panels: usize,
    pub order: usize,
    /// Truncation radius for ray integrals.
    pub radius: Option<Float>,
}

struct PanelSum<T> {
    value: T,
    l1: Float,
}

fn panel_sum<T, F>(f: &F, a: &Float, b: &Float, rule: &GaussLegendre, prec: u32) -> PanelSum<T>
where
    T: QuadValue,
    F: Fn(&Float) -> T,
{
    let (xs, ws) = rule.on_interval(a, b);
    let mut value: Option<T> = None;
    let mut l1 = Float::with_val(prec, 0);
    for (x, w) in xs.iter().zip(&ws) {
        let v = f(x);
        l1 += Float::with_val(prec, v.magnitude() * w);
        match value.as_mut() {
            None => {
                let mut z = T::zero_like(prec, &v);
                z.add_scaled(w, &v);
                value = Some(z);
            }
            Some(acc) => acc.add_scaled(w, &v),
        }
    }
    PanelSum { value: value.expect("rule has nodes"), l1 }
}

struct Panel<T> {
    a: Float,
    b: Float,
    whole: PanelSum<T>,
    halves: Option<(PanelSum<T>, PanelSum<T>, Float)>,
}

/// Adaptive composite Gauss–Legendre quadrature of `f` over [a, b].
///
/// Panels are bisected at their midpoint until the sum of local error estimates
/// (whole panel versus its two halves) is below `quad_rel_tol` times the
/// integral of |f|.
pub fn integrate<T, F>(f: F, a: &Float, b: &Float, ctx: &PrecisionCtx) -> Result<Quadrature<T>, NumericsError>
where
    T: QuadValue,
    F: Fn(&Float) -> T + Sync,
{
    integrate_with_floor(&f, a, b, ctx, None)
}

pub(crate) fn integrate_with_floor<T, F>(
    f: &F,
    a: &Float,
    b: &Float,
    ctx: &PrecisionCtx,
    abs_floor: Option<&Float>,
) -> Result<Quadrature<T>, NumericsError>
where
    T: QuadValue,
    F: Fn(&Float) -> T + Sync,
{
    let prec = ctx.bits;
    let rule = GaussLegendre::shared(prec);
    let a = Float::with_val(prec, a);
    let b = Float::with_val(prec, b);
    if a >= b {
        return Err(NumericsError::NonFinite("integration bounds must satisfy a < b".into()));
    }
    let total_width = Float::with_val(prec, &b - &a);
    let tol = ctx.quad_rel_tol();
    let whole = panel_sum(f, &a, &b, &rule, prec);
    let mut panels = vec![Panel { a, b, whole, halves: None }];
    loop {
        panels.par_iter_mut().filter(|p| p.halves.is_none()).for_each(|p| {
            let m = Float::with_val(prec, &p.a + &p.b) / 2u32;
            let l = panel_sum(f, &p.a, &m, &rule, prec);
            let r = panel_sum(f, &m, &p.b, &rule, prec);
            let mut both = l.value.clone();
            both.add(&r.value);
            let err = both.distance(&p.whole.value);
            p.halves = Some((l, r, err));
        });
        let mut l1 = Float::with_val(prec, 0);
        let mut err = Float::with_val(prec, 0);
        for p in &panels {
            let (l, r, e) = p.halves.as_ref().unwrap();
            l1 += &l.l1;
            l1 += &r.l1;
            err += e;
        }
        if !l1.is_finite() || !err.is_finite() {
            return Err(NumericsError::NonFinite("integrand".into()));
        }
        let mut target = Float::with_val(prec, &tol * &l1);
        if let Some(fl) = abs_floor {
            if *fl > target {
                target = fl.clone();
            }
        }
        if err <= target {
            let mut value: Option<T> = None;
            for p in &panels {
                let (l, r, _) = p.halves.as_ref().unwrap();
                match value.as_mut() {
                    None => {
                        let mut v = l.value.clone();
                        v.add(&r.value);
                        value = Some(v);
                    }
                    Some(v) => {
                        v.add(&l.value);
                        v.add(&r.value);
                    }
                }
            }
            return Ok(Quadrature {
                value: value.unwrap(),
                l1,
                panels: panels.len() * 2,
                order: rule.order,
                radius: None,
            });
        }
        let mut next = Vec::with_capacity(panels.len() * 2);
        for p in panels {
            let (l, r, e) = p.halves.unwrap();
            let share = Float::with_val(prec, &target * Float::with_val(prec, &p.b - &p.a)) / &total_width;
            if e > share {
                let m = Float::with_val(prec, &p.a + &p.b) / 2u32;
                next.push(Panel { a: p.a, b: m.clone(), whole: l, halves: None });
                next.push(Panel { a: m, b: p.b, whole: r, halves: None });
            } else {
                next.push(Panel { a: p.a, b: p.b, whole: p.whole, halves: Some((l, r, e)) });
            }
        }
        panels = next;
        if panels.len() > ctx.max_panels {
            return Err(NumericsError::NonConvergence { panels: panels.len() });
        }
    }
}

/// Integral of `g(r)` over r ∈ [0, ∞) for superexponentially decaying `g`.
///
/// Integrates over [0,1], [1,2], [2,4], ... and stops at the first radius where
/// |g(r)|·r is below `quad_rel_tol` times the accumulated L1 norm.
pub fn integrate_ray<T, F>(g: F, ctx: &PrecisionCtx) -> Result<Quadrature<T>, NumericsError>
where
    T: QuadValue,
    F: Fn(&Float) -> T + Sync,
{
    let prec = ctx.bits;
    let tol = ctx.quad_rel_tol();
    let mut lo = Float::with_val(prec, 0);
    let mut hi = Float::with_val(prec, 1);
    let first = integrate_with_floor(&g, &lo, &hi, ctx, None)?;
    let mut value = first.value;
    let mut l1 = first.l1;
    let mut panels = first.panels;
    let mut last_mag = g(&hi).magnitude();
    let mut stalls = 0usize;
    for _ in 0..64 {
        let bound = Float::with_val(prec, &last_mag * &hi);
        if bound < Float::with_val(prec, &tol * &l1) && !l1.is_zero() {
            return Ok(Quadrature { value, l1, panels, order: GL_ORDER, radius: Some(hi) });
        }
        lo = hi.clone();
        hi = Float::with_val(prec, &lo * 2u32);
        let floor = Float::with_val(prec, &tol * &l1) / 4u32;
        let seg = integrate_with_floor(&g, &lo, &hi, ctx, Some(&floor))?;
        value.add(&seg.value);
        l1 += &seg.l1;
        panels += seg.panels;
        let mag = g(&hi).magnitude();
        if mag >= last_mag {
            stalls += 1;
            if stalls >= 8 {
                return Err(NumericsError::NoDecay { radius: hi.to_f64() });
            }
        } else {
            stalls = 0;
        }
        last_mag = mag;
    }
    Err(NumericsError::NoDecay { radius: hi.to_f64() })
}

/// Integral of `f(u)` along the ray u = r·direction, r ∈ [0, ∞).
pub fn integrate_decaying<F>(f: F, direction: &Complex, ctx: &PrecisionCtx) -> Result<Quadrature<Complex>, NumericsError>
where
    F: Fn(&Complex) -> Complex + Sync,
{
    let d = Complex::with_val(ctx.bits, direction);
    integrate_ray(
        |r: &Float| {
            let u = Complex::with_val(ctx.bits, &d * r);
            f(&u) * &d
        },
        ctx,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionCtx {
        PrecisionCtx::default()
    }

    fn close(a: &Float, b: &Float, tol: &Float) -> bool {
        let d = Float::with_val(a.prec(), a - b).abs();
        d <= Float::with_val(a.prec(), tol * b.clone().abs().max(&Float::with_val(a.prec(), 1)))
    }

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let c = ctx();
        let rule = GaussLegendre::shared(c.bits);
        // degree 63 monomial over [-1,1] vanishes, degree 62 gives 2/63
        let (xs, ws) = rule.on_interval(&c.real(-1), &c.real(1));
        let mut s62 = c.zero();
        let mut s63 = c.zero();
        for (x, w) in xs.iter().zip(&ws) {
            s62 += Float::with_val(c.bits, x.clone().pow(62u32) * w);
            s63 += Float::with_val(c.bits, x.clone().pow(63u32) * w);
        }
        let exact = c.real(2) / 63u32;
        assert!(close(&s62, &exact, &c.eps()));
        assert!(s63.abs() <= c.eps());
    }

    #[test]
    fn square_on_unit_interval() {
        let c = ctx();
        let q = integrate(|x: &Float| Float::with_val(c.bits, x * x), &c.zero(), &c.real(1), &c).unwrap();
        assert!(close(&q.value, &(c.real(1) / 3u32), &c.eps()));
        assert_eq!(q.order, 32);
    }

    #[test]
    fn sine_over_half_period() {
        let c = ctx();
        let q = integrate(|x: &Float| x.clone().sin(), &c.zero(), &c.pi(), &c).unwrap();
        assert!(close(&q.value, &c.real(2), &c.quad_rel_tol()));
    }

    #[test]
    fn gaussian_against_erf_series() {
        let c = ctx();
        // erf(1)·√π = 2 Σ (-1)^k / (k! (2k+1))
        let mut s = c.zero();
        let mut fact = c.real(1);
        for k in 0..400u32 {
            if k > 0 {
                fact *= k;
            }
            let term = Float::with_val(c.bits, &fact * (2 * k + 1)).recip();
            if k % 2 == 0 {
                s += term;
            } else {
                s -= term;
            }
        }
        s *= 2u32;
        let q = integrate(|x: &Float| (-Float::with_val(c.bits, x * x)).exp(), &c.real(-1), &c.real(1), &c).unwrap();
        assert!(close(&q.value, &s, &c.quad_rel_tol()));
        assert!(s.to_f64() - 1.49364826562 < 1e-11);
    }

    #[test]
    fn ray_quartic_gamma() {
        let c = ctx();
        let q = integrate_decaying(
            |u: &Complex| (-Complex::with_val(c.bits, u.clone().pow(4u32))).exp(),
            &c.complex(1),
            &c,
        )
        .unwrap();
        let g = c.real(1.25).gamma();
        assert!(close(q.value.real(), &g, &c.quad_rel_tol()));
        assert!(q.radius.is_some());
    }

    #[test]
    fn ray_gaussian() {
        let c = ctx();
        let q = integrate_ray(|r: &Float| (-Float::with_val(c.bits, r * r)).exp(), &c).unwrap();
        let exact = c.pi().sqrt() / 2u32;
        assert!(close(&q.value, &exact, &c.quad_rel_tol()));
    }

    #[test]
    fn ray_detects_growth() {
        let c = ctx();
        let r = integrate_ray(|r: &Float| r.clone().exp(), &c);
        assert!(matches!(r, Err(NumericsError::NoDecay { .. })));
    }

    #[test]
    fn quartic_weight_on_diagonal_ray_matches_segment() {
        let c = ctx();
        let (t, g, n) = (c.real(-4), c.real(1), 4u32);
        let f = |u: &Complex| {
            let u2 = Complex::with_val(c.bits, u * u);
            let u4 = Complex::with_val(c.bits, &u2 * &u2);
            let e = Complex::with_val(c.bits, &u2 * &t) / 2u32 + Complex::with_val(c.bits, &u4 * &g) / 4u32;
            (e * n).exp()
        };
        let dir = Complex::with_val(c.bits, (c.real(0.5).sqrt(), c.real(0.5).sqrt()));
        let ray = integrate_decaying(f, &dir, &c).unwrap();
        let radius = ray.radius.clone().unwrap();
        let seg = integrate(
            |r: &Float| f(&Complex::with_val(c.bits, &dir * r)) * &dir,
            &c.zero(),
            &radius,
            &c,
        )
        .unwrap();
        let d = Complex::with_val(c.bits, &ray.value - &seg.value);
        assert!(Float::with_val(c.bits, d.abs_ref()) < Float::with_val(c.bits, &ray.l1 * c.quad_rel_tol()) * 10u32);
    }
}
