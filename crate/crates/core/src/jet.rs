//! Truncated multivariate Taylor expansions ("jets") with complex coefficients.
//!
//! A jet in `n` variables truncated at total degree `K` stores the Taylor
//! coefficients of a function around a base point, sparse and bucketed by
//! total degree. Monomial exponents are packed four bits per variable into a
//! `u128`, which caps jets at 32 variables and order 15.

use std::ops::Range;

use nalgebra::DMatrix;
use num::complex::Complex64;
use num::Zero;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};

pub const MAX_VARS: usize = 32;
pub const MAX_ORDER: usize = 15;

const BITS: usize = 4;
const MASK: u128 = 0xF;

type Key = u128;

fn var_key(index: usize) -> Key {
    1 << (BITS * index)
}

fn exponent(key: Key, index: usize) -> usize {
    ((key >> (BITS * index)) & MASK) as usize
}

fn pack(degrees: &[usize]) -> Key {
    degrees
        .iter()
        .enumerate()
        .fold(0, |key, (i, &d)| key | ((d as Key) << (BITS * i)))
}

fn factorial_f64(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn key_factorial(key: Key, nvars: usize) -> f64 {
    (0..nvars).map(|i| factorial_f64(exponent(key, i))).product()
}

/// Restriction of `key` to the variables in `range`, shifted to start at bit 0.
fn sub_key(key: Key, range: &Range<usize>) -> Key {
    let width = BITS * range.len();
    let shifted = key >> (BITS * range.start);
    if width >= 128 {
        shifted
    } else {
        shifted & ((1 << width) - 1)
    }
}

fn check_dims(nvars: usize, order: usize) -> Result<()> {
    if nvars > MAX_VARS {
        return Err(Error::OutOfRange {
            what: "jet variables",
            value: nvars as i64,
            min: 0,
            max: MAX_VARS as i64,
        });
    }
    if order > MAX_ORDER {
        return Err(Error::OutOfRange {
            what: "jet order",
            value: order as i64,
            min: 0,
            max: MAX_ORDER as i64,
        });
    }
    Ok(())
}

/// Truncated Taylor expansion in `nvars` variables up to total degree `order`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    nvars: usize,
    order: usize,
    buckets: Vec<FxHashMap<Key, Complex64>>,
}

impl Jet {
    pub fn zero(nvars: usize, order: usize) -> Result<Self> {
        check_dims(nvars, order)?;
        Ok(Self {
            nvars,
            order,
            buckets: vec![FxHashMap::default(); order + 1],
        })
    }

    pub fn constant(value: Complex64, nvars: usize, order: usize) -> Result<Self> {
        let mut j = Self::zero(nvars, order)?;
        j.buckets[0].insert(0, value);
        Ok(j)
    }

    /// `base + eps_index`.
    pub fn var(index: usize, base: Complex64, nvars: usize, order: usize) -> Result<Self> {
        if index >= nvars {
            return Err(Error::OutOfRange {
                what: "jet variable index",
                value: index as i64,
                min: 0,
                max: nvars as i64 - 1,
            });
        }
        let mut j = Self::constant(base, nvars, order)?;
        if order >= 1 {
            j.buckets[1].insert(var_key(index), Complex64::new(1.0, 0.0));
        }
        Ok(j)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn zero_like(&self) -> Self {
        Self {
            nvars: self.nvars,
            order: self.order,
            buckets: vec![FxHashMap::default(); self.order + 1],
        }
    }

    pub fn constant_like(&self, value: Complex64) -> Self {
        let mut j = self.zero_like();
        j.buckets[0].insert(0, value);
        j
    }

    pub fn value(&self) -> Complex64 {
        self.buckets[0].get(&0).copied().unwrap_or_default()
    }

    /// Taylor coefficient of the monomial with the given exponents.
    pub fn coeff(&self, degrees: &[usize]) -> Complex64 {
        let total: usize = degrees.iter().sum();
        if total > self.order || degrees.len() > self.nvars || degrees.iter().any(|&d| d > MAX_ORDER) {
            return Complex64::zero();
        }
        self.buckets[total].get(&pack(degrees)).copied().unwrap_or_default()
    }

    /// The mixed partial derivative `d^|degrees| f / prod d eps_i^{degrees_i}` at the base point.
    pub fn extract_partial(&self, degrees: &[usize]) -> Result<Complex64> {
        let total: usize = degrees.iter().sum();
        if total > self.order {
            return Err(Error::OutOfRange {
                what: "derivative order",
                value: total as i64,
                min: 0,
                max: self.order as i64,
            });
        }
        if degrees.len() > self.nvars {
            return Err(Error::Shape(format!(
                "{} exponents for a jet in {} variables",
                degrees.len(),
                self.nvars
            )));
        }
        let scale: f64 = degrees.iter().map(|&d| factorial_f64(d)).product();
        Ok(self.coeff(degrees) * scale)
    }

    /// Number of stored monomials.
    pub fn len(&self) -> usize {
        self.buckets.iter().map(FxHashMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn terms(&self) -> impl Iterator<Item = (Vec<usize>, Complex64)> + '_ {
        self.buckets.iter().flat_map(move |b| {
            b.iter()
                .map(move |(&k, &c)| ((0..self.nvars).map(|i| exponent(k, i)).collect(), c))
        })
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.buckets
            .iter()
            .flat_map(|b| b.values())
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::Shape(format!(
                "jets in {} and {} variables",
                self.nvars, other.nvars
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.truncate(self.order.min(other.order));
        out.add_assign_truncated(other);
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    fn add_assign_truncated(&mut self, other: &Self) {
        for (d, bucket) in other.buckets.iter().enumerate().take(self.order + 1) {
            for (k, c) in bucket {
                *self.buckets[d].entry(*k).or_default() += c;
            }
        }
    }

    /// In-place `self += other`, truncating to the smaller order.
    pub fn add_assign(&mut self, other: &Self) -> Result<()> {
        self.check_compatible(other)?;
        if self.order > other.order {
            *self = self.truncate(other.order);
        }
        self.add_assign_truncated(other);
        Ok(())
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self {
            nvars: self.nvars,
            order: self.order,
            buckets: self
                .buckets
                .iter()
                .map(|b| b.iter().map(|(&key, &c)| (key, c * k)).collect())
                .collect(),
        }
    }

    /// Cauchy product truncated at the smaller of the two orders.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let order = self.order.min(other.order);
        let mut out = Self {
            nvars: self.nvars,
            order,
            buckets: vec![FxHashMap::default(); order + 1],
        };
        for (da, ba) in self.buckets.iter().enumerate().take(order + 1) {
            for (db, bb) in other.buckets.iter().enumerate().take(order + 1 - da) {
                if ba.is_empty() || bb.is_empty() {
                    continue;
                }
                let target = &mut out.buckets[da + db];
                for (ka, ca) in ba {
                    for (kb, cb) in bb {
                        *target.entry(ka + kb).or_default() += ca * cb;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Drops all terms above total degree `order`.
    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order);
        Self {
            nvars: self.nvars,
            order,
            buckets: self.buckets[..=order].to_vec(),
        }
    }

    /// Re-embeds into `nvars` variables (`nvars >= self.nvars`), keeping indices.
    pub fn extend_vars(&self, nvars: usize) -> Result<Self> {
        if nvars < self.nvars {
            return Err(Error::Shape("cannot drop jet variables".into()));
        }
        check_dims(nvars, self.order)?;
        Ok(Self {
            nvars,
            ..self.clone()
        })
    }

    /// All partial derivatives of order `r` in the variables `vars`, as a dense
    /// tensor of length `|vars|^r` (row-major over the derivative slots).
    ///
    /// Every entry is a jet in the remaining variables: the derivative still
    /// depends on them. Monomials involving other variables of `vars` than the
    /// ones differentiated are dropped, so the result is evaluated at zero
    /// displacement in `vars`.
    pub fn partial_jets(&self, vars: Range<usize>, r: usize) -> Result<Vec<Jet>> {
        if vars.end > self.nvars {
            return Err(Error::Shape("derivative variables out of range".into()));
        }
        let n = vars.len();
        let mut grouped: FxHashMap<Key, Jet> = FxHashMap::default();
        for bucket in self.buckets.iter().skip(r) {
            for (&key, &c) in bucket {
                let inner = sub_key(key, &vars);
                let inner_degree: usize = (0..n).map(|i| exponent(inner, i)).sum();
                if inner_degree != r {
                    continue;
                }
                let outer = key - (inner << (BITS * vars.start));
                let outer_degree: usize = (0..self.nvars).map(|i| exponent(outer, i)).sum();
                let jet = grouped.entry(inner).or_insert_with(|| self.zero_like());
                *jet.buckets[outer_degree].entry(outer).or_default() += c * key_factorial(inner, n);
            }
        }
        let size = n.checked_pow(r as u32).ok_or(Error::DimensionCap {
            dim: usize::MAX,
            cap: crate::tensor_action::MAX_DIM,
        })?;
        let mut counts = vec![0usize; n];
        let zero = self.zero_like();
        Ok((0..size)
            .map(|flat| {
                counts.iter_mut().for_each(|c| *c = 0);
                let mut f = flat;
                for _ in 0..r {
                    counts[f % n] += 1;
                    f /= n;
                }
                grouped.get(&pack(&counts)).cloned().unwrap_or_else(|| zero.clone())
            })
            .collect())
    }

    /// Numeric partial derivatives of order `r` in `vars` at the base point.
    pub fn partials(&self, vars: Range<usize>, r: usize) -> Result<Vec<Complex64>> {
        Ok(self.partial_jets(vars, r)?.iter().map(Jet::value).collect())
    }
}

/// Ring operations shared by plain complex numbers and jets, so that tensor
/// contractions can run on either.
pub trait Scalar: Clone {
    fn zero_like(&self) -> Self;
    fn add_assign_ref(&mut self, other: &Self);
    fn mul_ref(&self, other: &Self) -> Self;
    fn scale_by(&self, k: Complex64) -> Self;
    fn base_value(&self) -> Complex64;
}

impl Scalar for Complex64 {
    fn zero_like(&self) -> Self {
        Complex64::zero()
    }
    fn add_assign_ref(&mut self, other: &Self) {
        *self += other;
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn scale_by(&self, k: Complex64) -> Self {
        self * k
    }
    fn base_value(&self) -> Complex64 {
        *self
    }
}

impl Scalar for Jet {
    fn zero_like(&self) -> Self {
        Jet::zero_like(self)
    }
    fn add_assign_ref(&mut self, other: &Self) {
        self.add_assign(other).expect("jets in the same variables");
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self.mul(other).expect("jets in the same variables")
    }
    fn scale_by(&self, k: Complex64) -> Self {
        self.scale(k)
    }
    fn base_value(&self) -> Complex64 {
        self.value()
    }
}

/// Dense matrix of jets sharing variables and order.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixJet {
    rows: usize,
    cols: usize,
    entries: Vec<Jet>,
}

const INVERSE_CONDITION: f64 = 1e-8;
const CONVERGENCE_TOL: f64 = 1e-13;

impl MatrixJet {
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Jet>) -> Result<Self> {
        if entries.len() != rows * cols || entries.is_empty() {
            return Err(Error::Shape(format!("{} entries for {rows}x{cols}", entries.len())));
        }
        let (n, k) = (entries[0].nvars, entries[0].order);
        if entries.iter().any(|e| e.nvars != n || e.order != k) {
            return Err(Error::Shape("matrix entries with different jet spaces".into()));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn constant(m: &DMatrix<Complex64>, nvars: usize, order: usize) -> Result<Self> {
        let entries = (0..m.nrows() * m.ncols())
            .map(|k| Jet::constant(m[(k / m.ncols(), k % m.ncols())], nvars, order))
            .collect::<Result<Vec<_>>>()?;
        Self::from_entries(m.nrows(), m.ncols(), entries)
    }

    /// `m + E` where `E` has one fresh variable per entry, numbered row-major from `first_var`.
    pub fn variables(m: &DMatrix<Complex64>, first_var: usize, nvars: usize, order: usize) -> Result<Self> {
        let entries = (0..m.nrows() * m.ncols())
            .map(|k| Jet::var(first_var + k, m[(k / m.ncols(), k % m.ncols())], nvars, order))
            .collect::<Result<Vec<_>>>()?;
        Self::from_entries(m.nrows(), m.ncols(), entries)
    }

    pub fn identity(n: usize, nvars: usize, order: usize) -> Result<Self> {
        Self::constant(&DMatrix::identity(n, n), nvars, order)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn nvars(&self) -> usize {
        self.entries[0].nvars
    }

    pub fn order(&self) -> usize {
        self.entries[0].order
    }

    pub fn get(&self, i: usize, j: usize) -> &Jet {
        &self.entries[i * self.cols + j]
    }

    pub fn entries(&self) -> &[Jet] {
        &self.entries
    }

    pub fn value(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).value())
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(Jet::max_abs).fold(0.0, f64::max)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        Self::from_entries(self.rows, self.cols, entries)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<Vec<_>>>()?;
        Self::from_entries(self.rows, self.cols, entries)
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self {
            entries: self.entries.iter().map(|e| e.scale(k)).collect(),
            ..*self
        }
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::Shape(format!("{:?} vs {:?}", self.shape(), other.shape())));
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {:?} by {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let mut entries = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = self.get(i, 0).mul(other.get(0, j))?;
                for k in 1..self.cols {
                    acc.add_assign(&self.get(i, k).mul(other.get(k, j))?)?;
                }
                entries.push(acc);
            }
        }
        Self::from_entries(self.rows, other.cols, entries)
    }

    /// `m * self` for a constant matrix `m`.
    pub fn left_mul_const(&self, m: &DMatrix<Complex64>) -> Result<Self> {
        if m.ncols() != self.rows {
            return Err(Error::Shape("constant factor has wrong width".into()));
        }
        let mut entries = Vec::with_capacity(m.nrows() * self.cols);
        for i in 0..m.nrows() {
            for j in 0..self.cols {
                let mut acc = self.get(0, j).zero_like();
                for k in 0..self.rows {
                    if m[(i, k)] != Complex64::zero() {
                        acc.add_assign(&self.get(k, j).scale(m[(i, k)]))?;
                    }
                }
                entries.push(acc);
            }
        }
        Self::from_entries(m.nrows(), self.cols, entries)
    }

    /// `self * m` for a constant matrix `m`.
    pub fn right_mul_const(&self, m: &DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != self.cols {
            return Err(Error::Shape("constant factor has wrong height".into()));
        }
        let mut entries = Vec::with_capacity(self.rows * m.ncols());
        for i in 0..self.rows {
            for j in 0..m.ncols() {
                let mut acc = self.get(i, 0).zero_like();
                for k in 0..self.cols {
                    if m[(k, j)] != Complex64::zero() {
                        acc.add_assign(&self.get(i, k).scale(m[(k, j)]))?;
                    }
                }
                entries.push(acc);
            }
        }
        Self::from_entries(self.rows, m.ncols(), entries)
    }

    pub fn trace(&self) -> Result<Jet> {
        if self.rows != self.cols {
            return Err(Error::Shape("trace of a non-square matrix".into()));
        }
        let mut acc = self.get(0, 0).clone();
        for i in 1..self.rows {
            acc.add_assign(self.get(i, i))?;
        }
        Ok(acc)
    }

    /// `tr(self * other)` without forming the product.
    pub fn trace_of_product(&self, other: &Self) -> Result<Jet> {
        if self.cols != other.rows || self.rows != other.cols {
            return Err(Error::Shape("trace of product needs transposed shapes".into()));
        }
        let mut acc = self.get(0, 0).zero_like();
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc.add_assign(&self.get(i, k).mul(other.get(k, i))?)?;
            }
        }
        Ok(acc)
    }

    fn check_square(&self) -> Result<()> {
        if self.rows != self.cols {
            return Err(Error::Shape(format!("{:?} is not square", self.shape())));
        }
        Ok(())
    }

    /// Matrix inverse by Newton iteration `X <- X (2 - M X)` from the inverse of the constant term.
    pub fn inverse(&self) -> Result<Self> {
        self.check_square()?;
        let m0 = self.value();
        check_condition(&m0)?;
        let x0 = m0.clone().try_inverse().ok_or_else(|| Error::Singular("constant term".into()))?;
        let (n, order) = (self.nvars(), self.order());
        let mut x = Self::constant(&x0, n, order)?;
        let two = Self::identity(self.rows, n, order)?.scale(Complex64::new(2.0, 0.0));
        let scale = x0.norm().max(1.0);
        for _ in 0..order + 2 {
            let next = x.mul(&two.sub(&self.mul(&x)?)?)?;
            let change = next.sub(&x)?.max_abs();
            x = next;
            if change <= CONVERGENCE_TOL * scale {
                return Ok(x);
            }
        }
        Err(Error::Numeric("jet matrix inverse did not converge".into()))
    }

    /// Principal inverse square root of a matrix whose constant term is hermitian positive definite.
    ///
    /// The square root `X` is found by the chord iteration
    /// `X <- X + L^{-1}(M - X^2)` with `L(H) = S0 H + H S0` frozen at the
    /// constant-term root `S0`; each step fixes at least one more order. The
    /// result is `X^{-1}`.
    pub fn inv_sqrt(&self) -> Result<Self> {
        self.check_square()?;
        let m0 = self.value();
        let scale = m0.norm().max(f64::MIN_POSITIVE);
        if (&m0 - m0.adjoint()).norm() > 1e-10 * scale {
            return Err(Error::InvalidInput("constant term is not hermitian".into()));
        }
        let hermitian = (&m0 + m0.adjoint()).scale(0.5);
        let eig = hermitian.symmetric_eigen();
        let max_e = eig.eigenvalues.max();
        if eig.eigenvalues.iter().any(|&e| e <= INVERSE_CONDITION * max_e) || max_e <= 0.0 {
            return Err(Error::InvalidInput("constant term is not positive definite".into()));
        }
        let v = eig.eigenvectors.clone();
        let vh = v.adjoint();
        let roots: Vec<f64> = eig.eigenvalues.iter().map(|e| e.sqrt()).collect();
        let s0 = &v * DMatrix::from_fn(v.nrows(), v.ncols(), |i, j| {
            if i == j {
                Complex64::new(roots[i], 0.0)
            } else {
                Complex64::zero()
            }
        }) * &vh;
        let (n, order) = (self.nvars(), self.order());
        let mut x = Self::constant(&s0, n, order)?;
        let dim = self.rows;
        let root_scale = s0.norm().max(1.0);
        let mut converged = false;
        for _ in 0..order + 2 {
            let residual = self.sub(&x.mul(&x)?)?;
            // solve S0 H + H S0 = residual in the eigenbasis of S0
            let rotated = residual.left_mul_const(&vh)?.right_mul_const(&v)?;
            let entries = rotated
                .entries
                .iter()
                .enumerate()
                .map(|(k, e)| {
                    let (i, j) = (k / dim, k % dim);
                    e.scale(Complex64::new(1.0 / (roots[i] + roots[j]), 0.0))
                })
                .collect();
            let step = Self::from_entries(dim, dim, entries)?
                .left_mul_const(&v)?
                .right_mul_const(&vh)?;
            let change = step.max_abs();
            x = x.add(&step)?;
            if change <= CONVERGENCE_TOL * root_scale {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Numeric("jet matrix square root did not converge".into()));
        }
        x.inverse()
    }
}

fn check_condition(m: &DMatrix<Complex64>) -> Result<()> {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.max();
    let min = sv.min();
    if max == 0.0 || min / max < INVERSE_CONDITION {
        return Err(Error::Singular(format!(
            "constant term ill-conditioned (inverse condition {:.3e})",
            if max == 0.0 { 0.0 } else { min / max }
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_jet(nvars: usize, order: usize, rng: &mut ChaCha8Rng) -> Jet {
        let mut j = Jet::constant(c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)), nvars, order).unwrap();
        for _ in 0..3 {
            let i = rng.gen_range(0..nvars);
            let v = Jet::var(i, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)), nvars, order).unwrap();
            j = j.mul(&v).unwrap().add(&j).unwrap();
        }
        j
    }

    fn max_diff(a: &Jet, b: &Jet) -> f64 {
        a.sub(b).unwrap().max_abs()
    }

    #[test]
    fn variables_and_products() {
        let x = Jet::var(0, c(2.0, 0.0), 2, 3).unwrap();
        let y = Jet::var(1, c(-1.0, 0.0), 2, 3).unwrap();
        assert_eq!(x.value(), c(2.0, 0.0));
        assert_eq!(x.extract_partial(&[1, 0]).unwrap(), c(1.0, 0.0));
        let e0 = Jet::var(0, Complex64::zero(), 2, 3).unwrap();
        let e1 = Jet::var(1, Complex64::zero(), 2, 3).unwrap();
        assert_eq!(e0.mul(&e1).unwrap().coeff(&[1, 1]), c(1.0, 0.0));
        assert_eq!(x.mul(&y).unwrap().coeff(&[1, 1]), c(1.0, 0.0));
        let one = Jet::constant(c(1.0, 0.0), 1, 2).unwrap();
        let eps = Jet::var(0, Complex64::zero(), 1, 2).unwrap();
        let prod = one.add(&eps).unwrap().mul(&one.sub(&eps).unwrap()).unwrap();
        assert_eq!(prod.coeff(&[0]), c(1.0, 0.0));
        assert_eq!(prod.coeff(&[1]), Complex64::zero());
        assert_eq!(prod.coeff(&[2]), c(-1.0, 0.0));
        assert!(Jet::var(2, Complex64::zero(), 2, 1).is_err());
    }

    #[test]
    fn truncation() {
        let eps = Jet::var(0, Complex64::zero(), 1, 2).unwrap();
        let cube = eps.mul(&eps).unwrap().mul(&eps).unwrap();
        assert_eq!(cube.max_abs(), 0.0);
        let sq = eps.mul(&eps).unwrap();
        assert_eq!(sq.extract_partial(&[2]).unwrap(), c(2.0, 0.0));
        assert_eq!(sq.extract_partial(&[0]).unwrap(), Complex64::zero());
        assert!(sq.extract_partial(&[3]).is_err());
        let low = Jet::var(0, c(1.0, 0.0), 1, 1).unwrap();
        assert_eq!(low.mul(&sq).unwrap().order(), 1);
    }

    #[test]
    fn ring_axioms_on_random_jets() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let a = random_jet(4, 4, &mut rng);
            let b = random_jet(4, 4, &mut rng);
            let d = random_jet(4, 4, &mut rng);
            let scale = a.max_abs() * b.max_abs() * d.max_abs() + 1.0;
            let lhs = a.mul(&b).unwrap().mul(&d).unwrap();
            let rhs = a.mul(&b.mul(&d).unwrap()).unwrap();
            assert!(max_diff(&lhs, &rhs) < 1e-12 * scale);
            let dist = a.mul(&b.add(&d).unwrap()).unwrap();
            let split = a.mul(&b).unwrap().add(&a.mul(&d).unwrap()).unwrap();
            assert!(max_diff(&dist, &split) < 1e-12 * scale);
            assert!(max_diff(&a.mul(&b).unwrap(), &b.mul(&a).unwrap()) < 1e-14 * scale);
        }
    }

    fn poly_complex(x: Complex64, y: Complex64) -> Complex64 {
        // (1 + x y)^3 (x - 2) + x^2 y
        (1.0 + x * y).powu(3) * (x - 2.0) + x * x * y
    }

    fn poly_jet(x: &Jet, y: &Jet) -> Jet {
        let one = x.constant_like(c(1.0, 0.0));
        let t = one.add(&x.mul(y).unwrap()).unwrap();
        let t3 = t.mul(&t).unwrap().mul(&t).unwrap();
        let xm2 = x.sub(&x.constant_like(c(2.0, 0.0))).unwrap();
        t3.mul(&xm2).unwrap().add(&x.mul(x).unwrap().mul(y).unwrap()).unwrap()
    }

    fn poly_at(x0: Complex64, y0: Complex64) -> Jet {
        poly_jet(&Jet::var(0, x0, 2, 3).unwrap(), &Jet::var(1, y0, 2, 3).unwrap())
    }

    #[test]
    fn partials_match_finite_differences() {
        let (x0, y0) = (c(0.7, -0.2), c(-0.4, 0.5));
        let f = poly_at(x0, y0);
        assert!((f.value() - poly_complex(x0, y0)).norm() < 1e-14);
        let h = 1e-4;
        // each partial against a central difference of the next lower one
        for degrees in [[1, 0], [0, 1], [1, 1], [2, 0], [2, 1], [0, 3], [1, 2], [3, 0]] {
            let exact = f.extract_partial(&degrees).unwrap();
            let var = if degrees[0] > 0 { 0 } else { 1 };
            let mut lower = degrees;
            lower[var] -= 1;
            let shift = if var == 0 { (c(h, 0.0), c(0.0, 0.0)) } else { (c(0.0, 0.0), c(h, 0.0)) };
            let plus = poly_at(x0 + shift.0, y0 + shift.1).extract_partial(&lower).unwrap();
            let minus = poly_at(x0 - shift.0, y0 - shift.1).extract_partial(&lower).unwrap();
            let approx = (plus - minus) / (2.0 * h);
            assert!(
                (exact - approx).norm() <= 1e-5 * exact.norm().max(1.0),
                "{degrees:?}: {exact} vs {approx}"
            );
        }
    }

    #[test]
    fn partial_tensors() {
        let x = Jet::var(0, c(0.3, 0.0), 3, 3).unwrap();
        let y = Jet::var(1, c(0.0, 1.0), 3, 3).unwrap();
        let z = Jet::var(2, c(1.0, 0.0), 3, 3).unwrap();
        let f = x.mul(&y).unwrap().mul(&z).unwrap();
        // derivatives in x, y only; z stays as a jet variable
        let d = f.partial_jets(0..2, 2).unwrap();
        assert_eq!(d.len(), 4);
        assert_eq!(d[0].max_abs(), 0.0);
        assert_eq!(d[1], d[2]);
        assert_eq!(d[1].value(), c(1.0, 0.0));
        assert_eq!(d[1].coeff(&[0, 0, 1]), c(1.0, 0.0));
        let g = f.partials(0..3, 1).unwrap();
        assert!((g[0] - c(0.0, 1.0)).norm() < 1e-15);
        assert!((g[2] - c(0.0, 0.3)).norm() < 1e-15);
    }

    fn random_matrix_jet(n: usize, nvars: usize, order: usize, rng: &mut ChaCha8Rng) -> MatrixJet {
        let entries = (0..n * n)
            .map(|k| {
                let base = if k % (n + 1) == 0 { c(3.0, 0.0) } else { Complex64::zero() };
                let mut j = Jet::constant(base + c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)), nvars, order).unwrap();
                for v in 0..nvars {
                    let e = Jet::var(v, Complex64::zero(), nvars, order).unwrap();
                    j = j.add(&e.scale(c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))).unwrap();
                    j = j.add(&e.mul(&e).unwrap().scale(c(rng.gen_range(-1.0..1.0), 0.0))).unwrap();
                }
                j
            })
            .collect();
        MatrixJet::from_entries(n, n, entries).unwrap()
    }

    #[test]
    fn matrix_product_entrywise() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_matrix_jet(2, 2, 2, &mut rng);
        let b = random_matrix_jet(2, 2, 2, &mut rng);
        let p = a.mul(&b).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let e = a.get(i, 0).mul(b.get(0, j)).unwrap().add(&a.get(i, 1).mul(b.get(1, j)).unwrap()).unwrap();
                assert!(max_diff(p.get(i, j), &e) < 1e-15);
            }
        }
    }

    #[test]
    fn scalar_inverse_is_geometric() {
        let x = MatrixJet::from_entries(1, 1, vec![Jet::var(0, c(2.0, 0.0), 1, 4).unwrap()]).unwrap();
        let inv = x.inverse().unwrap();
        for k in 0..=4 {
            let expected = (-1.0f64).powi(k as i32) / 2f64.powi(k as i32 + 1);
            assert!((inv.get(0, 0).coeff(&[k]) - c(expected, 0.0)).norm() < 1e-15);
        }
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 1.0), c(0.0, -1.0), c(3.0, 0.0)]);
        let cinv = MatrixJet::constant(&m, 1, 2).unwrap().inverse().unwrap();
        assert!((cinv.value() - m.try_inverse().unwrap()).norm() < 1e-14);
        let singular = DMatrix::from_element(2, 2, c(1.0, 0.0));
        assert!(matches!(MatrixJet::constant(&singular, 1, 2).unwrap().inverse(), Err(Error::Singular(_))));
    }

    #[test]
    fn random_inverse_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in [2, 3] {
            let m = random_matrix_jet(n, 3, 4, &mut rng);
            let inv = m.inverse().unwrap();
            let id = MatrixJet::identity(n, 3, 4).unwrap();
            assert!(m.mul(&inv).unwrap().sub(&id).unwrap().max_abs() < 1e-12);
            assert!(inv.mul(&m).unwrap().sub(&id).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn scalar_inv_sqrt_is_binomial() {
        let x = MatrixJet::from_entries(1, 1, vec![Jet::var(0, c(4.0, 0.0), 1, 5).unwrap()]).unwrap();
        let r = x.inv_sqrt().unwrap();
        // (4 + e)^{-1/2} = sum_k binom(-1/2, k) 4^{-1/2-k} e^k
        let mut binom = 1.0;
        for k in 0..=5 {
            let expected = binom * 4f64.powf(-0.5 - k as f64);
            assert!((r.get(0, 0).coeff(&[k]) - c(expected, 0.0)).norm() < 1e-14, "k={k}");
            binom *= (-0.5 - k as f64) / (k as f64 + 1.0);
        }
        assert!((r.get(0, 0).coeff(&[1]) - c(-1.0 / 16.0, 0.0)).norm() < 1e-15);
        let id = MatrixJet::identity(3, 2, 3).unwrap();
        assert!(id.inv_sqrt().unwrap().sub(&id).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn random_inv_sqrt_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for n in [1, 2, 3] {
            let a = DMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let h = &a * a.adjoint() + DMatrix::identity(n, n).scale(0.5);
            let mut m = MatrixJet::constant(&h.map(|x| x), 4, 4).unwrap();
            let pert = random_matrix_jet(n, 4, 4, &mut rng);
            let pert = pert.sub(&MatrixJet::constant(&pert.value(), 4, 4).unwrap()).unwrap();
            m = m.add(&pert).unwrap();
            let r = m.inv_sqrt().unwrap();
            let id = MatrixJet::identity(n, 4, 4).unwrap();
            let res = r.mul(&m).unwrap().mul(&r).unwrap().sub(&id).unwrap().max_abs();
            assert!(res < 1e-11, "n={n} residual {res}");
            let r0 = r.value();
            assert!((&r0 - r0.adjoint()).norm() < 1e-12);
        }
        let neg = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]));
        assert!(MatrixJet::constant(&neg, 1, 1).unwrap().inv_sqrt().is_err());
    }
}
