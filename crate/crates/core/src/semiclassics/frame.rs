use super::SemiError;
use crate::freud::{formal_cycle, FreudError};
use crate::numerics::{find_root, PrecisionCtx};
use crate::ortho::WeightParams;
use rug::float::Constant;
use rug::{Complex, Float};
use std::f64::consts::PI;

/// Semi-minor axis of the turning-point ellipse as a fraction of z₂ − z₁.
pub const DEFAULT_ELLIPSE_RATIO: f64 = 0.15;

/// Simple turning points of μ and the nearby zeros of ν.
#[derive(Clone, Debug)]
pub struct TurningPoints {
    pub lambda: Float,
    pub z1: Float,
    pub z2: Float,
    pub z1n: Float,
    pub z2n: Float,
    /// Third root of ν² as a cubic in z², close to 0.
    pub s3: Float,
}

/// Ellipse with foci z₁, z₂; Ω₁ is its left half, Ω₂ its right half.
#[derive(Clone, Debug)]
pub struct Ellipse {
    pub center: Float,
    pub semi_major: Float,
    pub semi_minor: Float,
}

impl Ellipse {
    /// ((Re z − z₀)/a)² + (Im z/b)²; below 1 inside.
    pub fn level(&self, z: &Complex) -> Float {
        let p = self.center.prec();
        let x = Float::with_val(p, z.real() - &self.center) / &self.semi_major;
        let y = Float::with_val(p, z.imag() / &self.semi_minor);
        Float::with_val(p, x.square_ref()) + Float::with_val(p, y.square_ref())
    }

    /// Boundary point at angle θ (θ = 0 is the right vertex).
    pub fn point(&self, theta: &Float) -> Complex {
        let p = self.center.prec();
        let (s, c) = theta.clone().sin_cos(Float::new(p));
        let re = Float::with_val(p, &self.semi_major * &c) + &self.center;
        let im = Float::with_val(p, &self.semi_minor * &s);
        Complex::with_val(p, (re, im))
    }
}

/// Everything the semiclassical construction needs for fixed (t, g, N, n).
#[derive(Clone, Debug)]
pub struct SemiFrame {
    pub params: WeightParams,
    pub n: usize,
    pub ctx: PrecisionCtx,
    pub t: Float,
    pub g: Float,
    pub lambda: Float,
    /// (n + ½)/N.
    pub lambda_prime: Float,
    /// Leading recurrence value at index n (period-2 cycle).
    pub rn0: Float,
    /// Leading value at the neighbouring indices n ± 1.
    pub rn_adj: Float,
    /// (−1)ⁿ√(t² − 4λg)/2.
    pub alpha: Float,
    pub gamma: Float,
    pub lambda_n0: Float,
    /// Turning-point constant C.
    pub c_const: Float,
    pub c0: Float,
    pub c1: Float,
    /// Constant used in Ω₁: (−1)^⌊n/2⌋·C.
    pub c_first: Float,
    /// √(λg).
    pub sqrt_lg: Float,
    /// −t/(2√(λg)).
    pub x0: Float,
    /// √(g/λ)·Rₙ⁰.
    pub cycle_c: Float,
    pub turning: TurningPoints,
    pub ellipse: Ellipse,
    /// Offset used for one-sided limits onto cuts.
    pub eps_side: Float,
    /// Distance below which a point counts as lying on a region boundary.
    pub boundary_tol: Float,
    /// Exclusion radius around ±z₁, ±z₂ for the WKB matrix.
    pub guard_radius: Float,
}

impl SemiFrame {
    pub fn new(params: &WeightParams, n: usize, ctx: &PrecisionCtx) -> Result<Self, SemiError> {
        Self::with_ellipse(params, n, ctx, DEFAULT_ELLIPSE_RATIO)
    }

    pub fn with_ellipse(params: &WeightParams, n: usize, ctx: &PrecisionCtx, ratio: f64) -> Result<Self, SemiError> {
        let p = ctx.bits;
        if n == 0 {
            return Err(SemiError::InvalidFrame("n must be positive".into()));
        }
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(SemiError::InvalidFrame(format!("ellipse ratio {ratio} outside (0, 1)")));
        }
        let t = params.t_at(ctx);
        let g = params.g_at(ctx);
        let big_n = params.scale;
        let lambda = Float::with_val(p, n) / big_n;
        let lambda_prime = (Float::with_val(p, n) + 0.5f64) / big_n;
        let lcr = params.lambda_critical(ctx);
        let near_edge = Float::with_val(p, &lcr - &lambda) < Float::with_val(p, &lcr >> 10u32);
        if near_edge || lambda < Float::with_val(p, 1e-6) {
            return Err(SemiError::InvalidFrame(format!(
                "lambda = {} too close to 0 or to lambda_cr = {}",
                lambda.to_f64(),
                lcr.to_f64()
            )));
        }
        let cycle = formal_cycle(params, &lambda, ctx).map_err(|e| match e {
            FreudError::LambdaOutOfRange(l) => SemiError::InvalidFrame(format!("lambda = {l} outside the two-cut range")),
            other => SemiError::InvalidFrame(other.to_string()),
        })?;
        let odd = n % 2 == 1;
        let (rn0, rn_adj) = if odd { (cycle.r0.clone(), cycle.l0.clone()) } else { (cycle.l0.clone(), cycle.r0.clone()) };
        let disc = (Float::with_val(p, &t * &t) - Float::with_val(p, &lambda * &g) * 4u32).sqrt();
        let alpha = if odd { -disc / 2u32 } else { disc / 2u32 };
        let two_pi = Float::with_val(p, Constant::Pi) * 2u32;
        let ln2pi = two_pi.clone().ln();
        let gamma = Float::with_val(p, &t * &t) / Float::with_val(p, &g * 8u32)
            - Float::with_val(p, &lambda * Float::with_val(p, &g / &lambda).ln()) / 4u32
            - Float::with_val(p, &lambda / 4u32);
        let lambda_n0 =
            Float::with_val(p, &gamma * big_n) + Float::with_val(p, &ln2pi / 2u32) + Float::with_val(p, rn0.ln_ref()) / 4u32;
        let c_const = two_pi.clone().sqrt() / Float::with_val(p, rn0.sqrt_ref()).sqrt();
        let c0 = Float::with_val(p, &c_const / two_pi.clone().sqrt());
        let c1 = -Float::with_val(p, &ln2pi / 2u32);
        let c_first = if (n / 2) % 2 == 1 { -c_const.clone() } else { c_const.clone() };
        let sqrt_lg = Float::with_val(p, &lambda * &g).sqrt();
        let x0 = -Float::with_val(p, &t / Float::with_val(p, &sqrt_lg * 2u32));
        let cycle_c = Float::with_val(p, Float::with_val(p, &g / &lambda).sqrt() * &rn0);

        let z1 = (Float::with_val(p, -&t) - Float::with_val(p, &sqrt_lg * 2u32)).sqrt() / g.clone().sqrt();
        let z2 = (Float::with_val(p, -&t) + Float::with_val(p, &sqrt_lg * 2u32)).sqrt() / g.clone().sqrt();
        let mut frame = SemiFrame {
            params: params.clone(),
            n,
            ctx: ctx.clone(),
            t,
            g,
            lambda: lambda.clone(),
            lambda_prime,
            rn0,
            rn_adj,
            alpha,
            gamma,
            lambda_n0,
            c_const,
            c0,
            c1,
            c_first,
            sqrt_lg,
            x0,
            cycle_c,
            turning: TurningPoints {
                lambda,
                z1: z1.clone(),
                z2: z2.clone(),
                z1n: z1.clone(),
                z2n: z2.clone(),
                s3: Float::with_val(p, 0),
            },
            ellipse: Ellipse { center: Float::with_val(p, 0), semi_major: Float::with_val(p, 0), semi_minor: Float::with_val(p, 0) },
            eps_side: Float::with_val(p, 1) >> (p / 4),
            boundary_tol: Float::with_val(p, 1) >> (p / 2),
            guard_radius: Float::with_val(p, Float::with_val(p, &z2 - &z1) * 0.05f64),
        };
        let z1n = frame.perturbed_root(&z1)?;
        let z2n = frame.perturbed_root(&z2)?;
        let sum = Float::with_val(p, z1n.square_ref()) + Float::with_val(p, z2n.square_ref());
        frame.turning.s3 = -Float::with_val(p, &frame.t * 2u32) / &frame.g - sum;
        frame.turning.z1n = z1n;
        frame.turning.z2n = z2n;

        let center = Float::with_val(p, &z1 + &z2) / 2u32;
        let semi_minor = Float::with_val(p, Float::with_val(p, &z2 - &z1) * ratio);
        let focal = Float::with_val(p, &center - &z1);
        let semi_major = (Float::with_val(p, focal.square_ref()) + Float::with_val(p, semi_minor.square_ref())).sqrt();
        frame.ellipse = Ellipse { center, semi_major, semi_minor };
        frame.validate_ellipse()?;
        Ok(frame)
    }

    pub fn prec(&self) -> u32 {
        self.ctx.bits
    }

    pub fn scale(&self) -> u32 {
        self.params.scale
    }

    /// ν²(z) = z²((t+gz²)²/4 − λg) + N⁻¹(t/2 + gRₙ⁰ − gz²/2) for real z.
    pub fn nu_squared_real(&self, z: &Float) -> Float {
        let p = self.prec();
        let z2 = Float::with_val(p, z.square_ref());
        let q = Float::with_val(p, &self.t + Float::with_val(p, &self.g * &z2));
        let lg = Float::with_val(p, &self.lambda * &self.g);
        let main = Float::with_val(p, &z2 * (Float::with_val(p, q.square_ref()) / 4u32 - lg));
        main + self.nu_correction(&z2)
    }

    fn nu_correction(&self, z2: &Float) -> Float {
        let p = self.prec();
        let a = Float::with_val(p, &self.t / 2u32) + Float::with_val(p, &self.g * &self.rn0)
            - Float::with_val(p, &self.g * z2) / 2u32;
        a / self.scale()
    }

    fn nu_squared_real_deriv(&self, z: &Float) -> Float {
        let p = self.prec();
        let z2 = Float::with_val(p, z.square_ref());
        let q = Float::with_val(p, &self.t + Float::with_val(p, &self.g * &z2));
        let lg = Float::with_val(p, &self.lambda * &self.g);
        let a = Float::with_val(p, z * 2u32) * (Float::with_val(p, q.square_ref()) / 4u32 - lg);
        let b = Float::with_val(p, &self.g * Float::with_val(p, &z2 * z)) * &q;
        let c = Float::with_val(p, &self.g * z) / self.scale();
        a + b - c
    }

    fn perturbed_root(&self, start: &Float) -> Result<Float, SemiError> {
        let r = find_root(|x| self.nu_squared_real(x), |x| self.nu_squared_real_deriv(x), start, &self.ctx)?;
        Ok(r.root)
    }

    /// Roots of ν²/(z − z_jᴺ) other than z_jᴺ, as complex numbers.
    pub(crate) fn other_roots(&self, j_outer: bool) -> Vec<Complex> {
        let p = self.prec();
        let tp = &self.turning;
        let (own, other) = if j_outer { (&tp.z2n, &tp.z1n) } else { (&tp.z1n, &tp.z2n) };
        let r3 = Complex::with_val(p, &tp.s3).sqrt();
        vec![
            Complex::with_val(p, -own),
            Complex::with_val(p, other),
            Complex::with_val(p, -other),
            r3.clone(),
            -r3,
        ]
    }

    /// Radius of the disk around z_jᴺ on which the local change of variable is evaluated.
    pub(crate) fn local_radius(&self, j_outer: bool) -> Float {
        let p = self.prec();
        let own = if j_outer { &self.turning.z2n } else { &self.turning.z1n };
        let own = Complex::with_val(p, own);
        let mut m: Option<Float> = None;
        for r in self.other_roots(j_outer) {
            let d = Float::with_val(p, Complex::with_val(p, &own - &r).abs_ref());
            m = Some(match m {
                Some(v) if v < d => v,
                _ => d,
            });
        }
        m.unwrap() * 0.95f64
    }

    fn validate_ellipse(&self) -> Result<(), SemiError> {
        let p = self.prec();
        let e = &self.ellipse;
        if Float::with_val(p, &e.center - &e.semi_major) <= 0 {
            return Err(SemiError::InvalidFrame("ellipse contains the origin".into()));
        }
        for z in [&self.turning.z1n, &self.turning.z2n] {
            if e.level(&Complex::with_val(p, z)) >= 1 {
                return Err(SemiError::InvalidFrame("perturbed turning point outside the ellipse".into()));
            }
        }
        // every point of Ω_j must lie in the disk where w(z; z_j) is computed
        for outer in [false, true] {
            let own = Complex::with_val(p, if outer { &self.turning.z2n } else { &self.turning.z1n });
            let radius = self.local_radius(outer);
            let mut far = Float::with_val(p, 0);
            for k in 0..=64 {
                let th = PI * (k as f64 / 64.0 - 0.5) + if outer { 0.0 } else { PI };
                let pt = e.point(&Float::with_val(p, th));
                let d = Float::with_val(p, Complex::with_val(p, &pt - &own).abs_ref());
                if d > far {
                    far = d;
                }
            }
            if far >= radius {
                return Err(SemiError::InvalidFrame(format!(
                    "ellipse half {} exceeds the local change-of-variable disk",
                    if outer { 2 } else { 1 }
                )));
            }
        }
        Ok(())
    }
}
