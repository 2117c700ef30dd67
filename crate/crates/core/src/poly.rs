//! Univariate polynomials with exact rational coefficients.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{BigRational, One, Zero};

use crate::rational::fmt_rational;

/// Polynomial in one indeterminate, coefficients in ascending powers.
/// Trailing zero coefficients are always stripped.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalPoly {
    coeffs: Vec<BigRational>,
}

impl RationalPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    /// The indeterminate itself.
    pub fn x() -> Self {
        Self::from_ints(&[0, 1])
    }

    /// `x + a`.
    pub fn linear(a: BigRational) -> Self {
        Self::new(vec![a, BigRational::one()])
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(One::is_one)
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect())
    }
}

impl Zero for RationalPoly {
    fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl One for RationalPoly {
    fn one() -> Self {
        Self::constant(BigRational::one())
    }
}

impl Add for RationalPoly {
    type Output = RationalPoly;
    fn add(self, rhs: Self) -> Self {
        &self + &rhs
    }
}

impl Add for &RationalPoly {
    type Output = RationalPoly;
    fn add(self, rhs: &RationalPoly) -> RationalPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let zero = BigRational::zero();
        RationalPoly::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&zero) + rhs.coeffs.get(i).unwrap_or(&zero))
                .collect(),
        )
    }
}

impl Neg for RationalPoly {
    type Output = RationalPoly;
    fn neg(self) -> Self {
        RationalPoly::new(self.coeffs.into_iter().map(|c| -c).collect())
    }
}

impl Sub for &RationalPoly {
    type Output = RationalPoly;
    fn sub(self, rhs: &RationalPoly) -> RationalPoly {
        self + &(-rhs.clone())
    }
}

impl Mul for RationalPoly {
    type Output = RationalPoly;
    fn mul(self, rhs: Self) -> Self {
        &self * &rhs
    }
}

impl Mul for &RationalPoly {
    type Output = RationalPoly;
    fn mul(self, rhs: &RationalPoly) -> RationalPoly {
        if self.is_zero() || rhs.is_zero() {
            return RationalPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RationalPoly::new(out)
    }
}

impl fmt::Display for RationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{}", fmt_rational(c))?,
                1 => write!(f, "{}*c", fmt_rational(c))?,
                _ => write!(f, "{}*c^{k}", fmt_rational(c))?,
            }
        }
        Ok(())
    }
}

/// Rising factorial `[y]_r = y (y+1) ... (y+r-1)`, `[y]_0 = 1`.
///
/// Works for any ring element that can be shifted by one, in particular exact
/// rationals and [`RationalPoly`].
pub fn pochhammer<T>(y: &T, r: usize) -> T
where
    T: Clone + One + Add<Output = T> + Mul<Output = T>,
{
    let mut acc = T::one();
    let mut factor = y.clone();
    for _ in 0..r {
        acc = acc * factor.clone();
        factor = factor + T::one();
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn rising_factorials() {
        assert_eq!(pochhammer(&rat(7, 3), 0), BigRational::one());
        assert_eq!(pochhammer(&rat(2, 1), 3), rat(24, 1));
        assert_eq!(pochhammer(&RationalPoly::x(), 2), RationalPoly::from_ints(&[0, 1, 1]));
        assert_eq!(pochhammer(&RationalPoly::x(), 0), RationalPoly::one());
    }

    #[test]
    fn ring_ops() {
        let a = RationalPoly::from_ints(&[1, 1]);
        let b = RationalPoly::from_ints(&[-1, 1]);
        assert_eq!(&a * &b, RationalPoly::from_ints(&[-1, 0, 1]));
        assert_eq!(&a - &a, RationalPoly::zero());
        assert_eq!((&a + &b).degree(), Some(1));
        assert_eq!(a.eval(&rat(1, 2)), rat(3, 2));
        assert_eq!(RationalPoly::from_ints(&[0, 0]).degree(), None);
    }
}
