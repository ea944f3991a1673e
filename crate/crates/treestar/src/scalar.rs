//! Exact Gaussian-rational scalars.
//!
//! Coefficients of algebra elements live in Q(i) so that star operations,
//! traces and matrix identities can be checked exactly. Conversion to
//! `Complex<f64>` happens only at the boundary to iterative solvers.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussianRational { re, im }
    }

    pub fn zero() -> Self {
        GaussianRational::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        GaussianRational::new(BigRational::one(), BigRational::zero())
    }

    pub fn i() -> Self {
        GaussianRational::new(BigRational::zero(), BigRational::one())
    }

    pub fn from_integer(n: i64) -> Self {
        GaussianRational::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        GaussianRational::new(
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            BigRational::zero(),
        )
    }

    pub fn from_rational(q: BigRational) -> Self {
        GaussianRational::new(q, BigRational::zero())
    }

    pub fn mul_rational(&self, q: &BigRational) -> Self {
        GaussianRational::new(&self.re * q, &self.im * q)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussianRational::new(self.re.clone(), -self.im.clone())
    }

    /// |z|^2 as an exact rational.
    pub fn norm_sq(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// |re| + |im|, an exact magnitude surrogate that vanishes iff z = 0.
    pub fn l1_magnitude(&self) -> BigRational {
        self.re.abs() + self.im.abs()
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sq();
        Some(GaussianRational::new(&self.re / &n, -(&self.im / &n)))
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

impl Add for &GaussianRational {
    type Output = GaussianRational;
    fn add(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub for &GaussianRational {
    type Output = GaussianRational;
    fn sub(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul for &GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(-self.re.clone(), -self.im.clone())
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "{}", self.re);
        }
        if self.re.is_zero() {
            return write!(f, "{}i", self.im);
        }
        if self.im.is_negative() {
            write!(f, "{}{}i", self.re, self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

impl fmt::Debug for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> GaussianRational {
        GaussianRational::from_ratio(n, d)
    }

    #[test]
    fn field_ops_are_exact() {
        let z = GaussianRational::new(
            BigRational::new(BigInt::from(2), BigInt::from(1)),
            BigRational::new(BigInt::from(-1), BigInt::from(1)),
        );
        let w = &z * &z.conj();
        assert_eq!(w, q(5, 1));
        let inv = z.inv().unwrap();
        assert_eq!(&z * &inv, GaussianRational::one());
    }

    #[test]
    fn i_squared_is_minus_one() {
        let i = GaussianRational::i();
        assert_eq!(&i * &i, q(-1, 1));
    }

    #[test]
    fn display_forms() {
        assert_eq!(q(3, 6).to_string(), "1/2");
        assert_eq!(GaussianRational::i().to_string(), "1i");
        let z = &q(2, 1) - &GaussianRational::i();
        assert_eq!(z.to_string(), "2-1i");
    }
}
