use rug::{Complex, Float};

/// 2×2 complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix2C {
    pub m: [[Complex; 2]; 2],
}

impl Matrix2C {
    pub fn new(a11: Complex, a12: Complex, a21: Complex, a22: Complex) -> Self {
        Matrix2C { m: [[a11, a12], [a21, a22]] }
    }

    pub fn prec(&self) -> u32 {
        self.m[0][0].prec().0
    }

    pub fn identity(prec: u32) -> Self {
        let o = Complex::with_val(prec, 1);
        let z = Complex::with_val(prec, 0);
        Matrix2C::new(o.clone(), z.clone(), z, o)
    }

    pub fn zero(prec: u32) -> Self {
        let z = Complex::with_val(prec, 0);
        Matrix2C::new(z.clone(), z.clone(), z.clone(), z)
    }

    pub fn sigma3(prec: u32) -> Self {
        let o = Complex::with_val(prec, 1);
        let z = Complex::with_val(prec, 0);
        Matrix2C::new(o.clone(), z.clone(), z, -o)
    }

    pub fn diag(a: Complex, b: Complex) -> Self {
        let p = a.prec().0;
        let z = Complex::with_val(p, 0);
        Matrix2C::new(a, z.clone(), z, b)
    }

    pub fn get(&self, i: usize, j: usize) -> &Complex {
        &self.m[i][j]
    }

    pub fn mul(&self, o: &Matrix2C) -> Matrix2C {
        let p = self.prec();
        let e = |i: usize, j: usize| {
            Complex::with_val(p, &self.m[i][0] * &o.m[0][j]) + Complex::with_val(p, &self.m[i][1] * &o.m[1][j])
        };
        Matrix2C::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }

    pub fn add(&self, o: &Matrix2C) -> Matrix2C {
        let p = self.prec();
        let e = |i: usize, j: usize| Complex::with_val(p, &self.m[i][j] + &o.m[i][j]);
        Matrix2C::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }

    pub fn sub(&self, o: &Matrix2C) -> Matrix2C {
        let p = self.prec();
        let e = |i: usize, j: usize| Complex::with_val(p, &self.m[i][j] - &o.m[i][j]);
        Matrix2C::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }

    pub fn scale(&self, s: &Complex) -> Matrix2C {
        let p = self.prec();
        let e = |i: usize, j: usize| Complex::with_val(p, &self.m[i][j] * s);
        Matrix2C::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }

    pub fn det(&self) -> Complex {
        let p = self.prec();
        Complex::with_val(p, &self.m[0][0] * &self.m[1][1]) - Complex::with_val(p, &self.m[0][1] * &self.m[1][0])
    }

    pub fn trace(&self) -> Complex {
        Complex::with_val(self.prec(), &self.m[0][0] + &self.m[1][1])
    }

    /// Inverse via the adjugate; `None` when the determinant vanishes.
    pub fn inverse(&self) -> Option<Matrix2C> {
        let d = self.det();
        if d.is_zero() {
            return None;
        }
        let p = self.prec();
        let inv = |x: &Complex| Complex::with_val(p, x / &d);
        Some(Matrix2C::new(
            inv(&self.m[1][1]),
            -inv(&self.m[0][1]),
            -inv(&self.m[1][0]),
            inv(&self.m[0][0]),
        ))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> Float {
        let p = self.prec();
        let mut m = Float::with_val(p, 0);
        for row in &self.m {
            for x in row {
                let a = Float::with_val(p, x.abs_ref());
                if a > m {
                    m = a;
                }
            }
        }
        m
    }

    /// Conjugation σ₃·M·σ₃ (flips the off-diagonal signs).
    pub fn sigma3_conj(&self) -> Matrix2C {
        Matrix2C::new(
            self.m[0][0].clone(),
            -self.m[0][1].clone(),
            -self.m[1][0].clone(),
            self.m[1][1].clone(),
        )
    }

    /// Apply to a column vector.
    pub fn apply(&self, v: &[Complex; 2]) -> [Complex; 2] {
        let p = self.prec();
        [
            Complex::with_val(p, &self.m[0][0] * &v[0]) + Complex::with_val(p, &self.m[0][1] * &v[1]),
            Complex::with_val(p, &self.m[1][0] * &v[0]) + Complex::with_val(p, &self.m[1][1] * &v[1]),
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|x| x.real().is_finite() && x.imag().is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_det() {
        let p = 256;
        let a = Matrix2C::new(
            Complex::with_val(p, (1, 2)),
            Complex::with_val(p, (3, -1)),
            Complex::with_val(p, (0, 1)),
            Complex::with_val(p, (2, 0)),
        );
        let i = a.mul(&a.inverse().unwrap()).sub(&Matrix2C::identity(p));
        assert!(i.max_abs() < Float::with_val(p, 1e-70));
        let d = a.det();
        assert_eq!(d, Complex::with_val(p, (1, 1)));
    }

    #[test]
    fn sigma3_conjugation() {
        let p = 128;
        let a = Matrix2C::new(
            Complex::with_val(p, 1),
            Complex::with_val(p, 2),
            Complex::with_val(p, 3),
            Complex::with_val(p, 4),
        );
        let s = Matrix2C::sigma3(p);
        assert_eq!(s.mul(&a).mul(&s), a.sigma3_conj());
    }
}
