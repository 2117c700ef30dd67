//! Truncated power series in the deformation parameter lambda.

use std::ops::{Add, Mul, Sub};

use num::{BigRational, One, Zero};

use crate::error::{Error, Result};

/// `sum_{k <= order} coeffs[k] lambda^k`; all arithmetic truncates at `order`.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaSeries<T> {
    coeffs: Vec<T>,
}

impl<T: Clone + Zero> LambdaSeries<T> {
    pub fn zero(order: usize) -> Self {
        Self {
            coeffs: vec![T::zero(); order + 1],
        }
    }

    /// Pads with zeros or truncates to `order + 1` coefficients.
    pub fn from_coeffs(mut coeffs: Vec<T>, order: usize) -> Self {
        coeffs.resize(order + 1, T::zero());
        Self { coeffs }
    }

    pub fn constant(c: T, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// `c * lambda^k`, zero when `k > order`.
    pub fn monomial(c: T, k: usize, order: usize) -> Self {
        let mut s = Self::zero(order);
        if k <= order {
            s.coeffs[k] = c;
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn coeff(&self, k: usize) -> &T {
        &self.coeffs[k]
    }

    /// Index of the first nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn map<U: Clone + Zero>(&self, f: impl Fn(&T) -> U) -> LambdaSeries<U> {
        LambdaSeries {
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }
}

impl<T> LambdaSeries<T>
where
    T: Clone + Zero + for<'a> Mul<&'a T, Output = T>,
{
    pub fn scale(&self, k: &T) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c.clone() * k).collect(),
        }
    }
}

impl<T> Add for &LambdaSeries<T>
where
    T: Clone + Zero + for<'a> Add<&'a T, Output = T>,
{
    type Output = LambdaSeries<T>;
    fn add(self, rhs: &LambdaSeries<T>) -> LambdaSeries<T> {
        let order = self.order().min(rhs.order());
        LambdaSeries {
            coeffs: (0..=order).map(|k| self.coeffs[k].clone() + &rhs.coeffs[k]).collect(),
        }
    }
}

impl<T> Sub for &LambdaSeries<T>
where
    T: Clone + Zero + for<'a> Sub<&'a T, Output = T>,
{
    type Output = LambdaSeries<T>;
    fn sub(self, rhs: &LambdaSeries<T>) -> LambdaSeries<T> {
        let order = self.order().min(rhs.order());
        LambdaSeries {
            coeffs: (0..=order).map(|k| self.coeffs[k].clone() - &rhs.coeffs[k]).collect(),
        }
    }
}

impl<T> Mul for &LambdaSeries<T>
where
    T: Clone + Zero + for<'a> Mul<&'a T, Output = T> + for<'a> Add<&'a T, Output = T>,
{
    type Output = LambdaSeries<T>;
    fn mul(self, rhs: &LambdaSeries<T>) -> LambdaSeries<T> {
        let order = self.order().min(rhs.order());
        let coeffs = (0..=order)
            .map(|k| {
                (0..=k).fold(T::zero(), |acc, i| {
                    acc + &(self.coeffs[i].clone() * &rhs.coeffs[k - i])
                })
            })
            .collect();
        LambdaSeries { coeffs }
    }
}

impl LambdaSeries<BigRational> {
    /// Multiplicative inverse; the constant term must be nonzero.
    pub fn inverse(&self) -> Result<Self> {
        let a0 = &self.coeffs[0];
        if a0.is_zero() {
            return Err(Error::Singular(
                "series with zero constant term is not invertible".into(),
            ));
        }
        let inv0 = a0.recip();
        let mut out = vec![inv0.clone()];
        for k in 1..=self.order() {
            let s = (1..=k).fold(BigRational::zero(), |acc, i| acc + &self.coeffs[i] * &out[k - i]);
            out.push(-s * &inv0);
        }
        Ok(Self { coeffs: out })
    }

    /// Geometric series `1 / (1 - a lambda)`.
    pub fn geometric(a: &BigRational, order: usize) -> Self {
        let mut coeffs = Vec::with_capacity(order + 1);
        let mut term = BigRational::one();
        for _ in 0..=order {
            coeffs.push(term.clone());
            term *= a;
        }
        Self { coeffs }
    }

    /// Exact value at a rational `lambda` of the truncated polynomial.
    pub fn eval(&self, lambda: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * lambda + c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn truncated_product_and_inverse() {
        let a = LambdaSeries::from_coeffs(vec![int(1), int(2)], 3);
        let b = LambdaSeries::from_coeffs(vec![int(1), int(-2)], 3);
        assert_eq!((&a * &b).coeffs(), &[int(1), int(0), int(-4), int(0)]);
        let inv = a.inverse().unwrap();
        assert_eq!(inv.coeffs(), &[int(1), int(-2), int(4), int(-8)]);
        assert_eq!(inv, LambdaSeries::geometric(&int(-2), 3));
        assert!(LambdaSeries::from_coeffs(vec![int(0), int(1)], 2).inverse().is_err());
    }

    #[test]
    fn mixed_orders_truncate_to_smaller() {
        let a = LambdaSeries::constant(rat(1, 2), 4);
        let b = LambdaSeries::monomial(int(3), 1, 2);
        let s = &a + &b;
        assert_eq!(s.order(), 2);
        assert_eq!(s.valuation(), Some(0));
        assert_eq!(LambdaSeries::monomial(int(1), 5, 2).valuation(), None);
    }
}
