//! The center of the group algebra `Q[S_r]`.
//!
//! Central elements are stored in the class-sum basis `k_alpha`. The idempotent
//! basis `e_a` (one per frame) diagonalises multiplication: a central element
//! acts on the isotypic block of frame `a` by the scalar
//! `omega_a(u) = sum_alpha u_alpha h_alpha chi^a_alpha / n_a`.
//!
//! The coefficients of the reduced star product are the class coefficients of
//! the inverse of `Z(c) = sum_alpha c^{|alpha|} k_alpha`; in the idempotent
//! basis `Z(c)` has eigenvalue `t_a(c) = prod_{boxes} (c + content)`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num::{BigInt, BigRational, One, Zero};

use crate::characters::character_table;
use crate::error::{Error, Result};
use crate::partitions::{
    check_r, class_size, classes_unchecked, cycle_type, dim_symmetric, factorial, ConjClass,
    Frame, Permutation,
};
use crate::poly::{pochhammer, RationalPoly};
use crate::rational::{fmt_rational, int};
use crate::series::LambdaSeries;

/// `sum_alpha coeffs[alpha] k_alpha`, indexed in the order of [`crate::partitions::classes_of`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CentralElement {
    r: usize,
    coeffs: Vec<BigRational>,
}

impl CentralElement {
    pub fn from_coeffs(r: usize, coeffs: Vec<BigRational>) -> Result<Self> {
        check_r(r)?;
        let n = classes_unchecked(r).len();
        if coeffs.len() != n {
            return Err(Error::Shape(format!(
                "S_{r} has {n} classes, got {} coefficients",
                coeffs.len()
            )));
        }
        Ok(Self { r, coeffs })
    }

    pub fn zero(r: usize) -> Result<Self> {
        check_r(r)?;
        Ok(Self {
            r,
            coeffs: vec![BigRational::zero(); classes_unchecked(r).len()],
        })
    }

    /// The identity permutation, i.e. `k_(1^r)`.
    pub fn identity(r: usize) -> Result<Self> {
        let mut u = Self::zero(r)?;
        u.coeffs[0] = BigRational::one();
        Ok(u)
    }

    pub fn class_sum(class: &ConjClass) -> Result<Self> {
        let r = class.r();
        let mut u = Self::zero(r)?;
        let idx = classes_unchecked(r)
            .iter()
            .position(|c| c == class)
            .expect("class of S_r");
        u.coeffs[idx] = BigRational::one();
        Ok(u)
    }

    /// `sum_alpha w(alpha) k_alpha`.
    pub fn from_fn(r: usize, w: impl Fn(&ConjClass) -> BigRational) -> Result<Self> {
        check_r(r)?;
        Ok(Self {
            r,
            coeffs: classes_unchecked(r).iter().map(w).collect(),
        })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn classes(&self) -> Vec<ConjClass> {
        classes_unchecked(self.r)
    }

    pub fn get(&self, class: &ConjClass) -> Option<&BigRational> {
        let idx = self.classes().iter().position(|c| c == class)?;
        Some(&self.coeffs[idx])
    }

    /// Sum of the coefficients over all group elements, `sum_alpha h_alpha u_alpha`.
    pub fn augmentation(&self) -> BigRational {
        self.classes()
            .iter()
            .zip(&self.coeffs)
            .map(|(c, u)| u * BigRational::from_integer(class_size(c).into()))
            .sum()
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        Self {
            r: self.r,
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.r != other.r {
            return Err(Error::Shape(format!("S_{} vs S_{}", self.r, other.r)));
        }
        Ok(Self {
            r: self.r,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }
}

/// Coordinates in the idempotent basis, indexed in the order of [`crate::partitions::partitions_of`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdempotentCoords {
    pub r: usize,
    pub frames: Vec<Frame>,
    pub coeffs: Vec<BigRational>,
}

impl IdempotentCoords {
    pub fn get(&self, frame: &Frame) -> Option<&BigRational> {
        let idx = self.frames.iter().position(|f| f == frame)?;
        Some(&self.coeffs[idx])
    }
}

fn big(n: num::BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Class-sum basis to idempotent basis: `u = sum_a omega_a(u) e_a`.
pub fn k_to_e(u: &CentralElement) -> Result<IdempotentCoords> {
    let t = character_table(u.r)?;
    let h: Vec<BigRational> = t.classes.iter().map(|c| big(class_size(c))).collect();
    let coeffs = t
        .frames
        .iter()
        .zip(&t.table)
        .map(|(f, row)| {
            let s: BigRational = row
                .iter()
                .zip(&h)
                .zip(&u.coeffs)
                .map(|((&chi, h), c)| c * h * int(chi))
                .sum();
            s / big(dim_symmetric(f))
        })
        .collect();
    Ok(IdempotentCoords {
        r: u.r,
        frames: t.frames.clone(),
        coeffs,
    })
}

/// Idempotent basis to class sums, using `e_a = n_a / r! sum_alpha chi^a_alpha k_alpha`.
pub fn e_to_k(v: &IdempotentCoords) -> Result<CentralElement> {
    let t = character_table(v.r)?;
    if v.coeffs.len() != t.frames.len() {
        return Err(Error::Shape("idempotent coordinates of wrong length".into()));
    }
    let order = big(factorial(v.r));
    let weights: Vec<BigRational> = t
        .frames
        .iter()
        .zip(&v.coeffs)
        .map(|(f, c)| c * big(dim_symmetric(f)) / &order)
        .collect();
    let coeffs = (0..t.classes.len())
        .map(|k| {
            t.table
                .iter()
                .zip(&weights)
                .map(|(row, w)| w * int(row[k]))
                .sum()
        })
        .collect();
    CentralElement::from_coeffs(v.r, coeffs)
}

/// `t_[m](c) = [c]_{m_1} [c-1]_{m_2} ... [c-p+1]_{m_p}`.
pub fn t_poly(frame: &Frame, p: usize) -> Result<RationalPoly> {
    if frame.len() > p {
        return Err(Error::InvalidInput(format!(
            "frame {frame} has more than p = {p} rows"
        )));
    }
    Ok(frame
        .rows()
        .iter()
        .enumerate()
        .fold(RationalPoly::one(), |acc, (i, &m)| {
            acc * pochhammer(&RationalPoly::linear(int(-(i as i64))), m)
        }))
}

/// `t_a(c) = 1/n_a sum_alpha h_alpha chi^a_alpha c^{|alpha|}` from the character table.
pub fn t_from_characters(frame: &Frame) -> Result<RationalPoly> {
    let r = frame.weight();
    if r == 0 {
        return Ok(RationalPoly::one());
    }
    let t = character_table(r)?;
    let a = t.frame_index(frame).expect("frame of weight r");
    let mut coeffs = vec![BigRational::zero(); r + 1];
    for (k, class) in t.classes.iter().enumerate() {
        coeffs[class.num_cycles()] += big(class_size(class)) * int(t.table[a][k]);
    }
    Ok(RationalPoly::new(coeffs).scale(&big(dim_symmetric(frame)).recip()))
}

/// `t_[m]` evaluated at a rational point, as the product over boxes of `c + content`.
pub fn t_value(frame: &Frame, c: &BigRational) -> BigRational {
    frame.contents().map(|ct| c + int(ct)).product()
}

/// `Z(c) = sum_alpha c^{|alpha|} k_alpha`.
pub fn deformation_element(r: usize, c: &BigRational) -> Result<CentralElement> {
    CentralElement::from_fn(r, |a| num::pow(c.clone(), a.num_cycles()))
}

/// Class coefficients `s_alpha(c)` of `Z(c)^{-1}` via `s_alpha = sum_a n_a chi^a_alpha / (r! t_a(c))`.
pub fn s_coeffs(r: usize, c: &BigRational) -> Result<CentralElement> {
    let t = character_table(r)?;
    let mut inv_t = Vec::with_capacity(t.frames.len());
    for f in &t.frames {
        let v = t_value(f, c);
        if v.is_zero() {
            return Err(Error::Pole {
                frame: f.clone(),
                c: fmt_rational(c),
            });
        }
        inv_t.push(v.recip());
    }
    e_to_k(&IdempotentCoords {
        r,
        frames: t.frames.clone(),
        coeffs: inv_t,
    })
}

/// Structure constants of the center: `k_alpha k_beta = sum_gamma a[alpha][beta][gamma] k_gamma`.
#[derive(Debug)]
pub struct StructureConstants {
    pub r: usize,
    pub table: Vec<Vec<Vec<BigInt>>>,
}

/// Largest `r` for which structure constants are computed by enumerating `S_r`.
pub const MAX_ENUM_R: usize = 6;

static STRUCTURE: OnceLock<Mutex<HashMap<usize, Arc<StructureConstants>>>> = OnceLock::new();

pub fn structure_constants(r: usize) -> Result<Arc<StructureConstants>> {
    check_r(r)?;
    if r > MAX_ENUM_R {
        return Err(Error::OutOfRange {
            what: "r (enumeration of S_r)",
            value: r as i64,
            min: 1,
            max: MAX_ENUM_R as i64,
        });
    }
    let cache = STRUCTURE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(s) = cache.lock().expect("cache poisoned").get(&r) {
        return Ok(s.clone());
    }
    let classes = classes_unchecked(r);
    let perms = Permutation::all(r);
    let class_of: Vec<usize> = perms
        .iter()
        .map(|s| {
            let ct = cycle_type(s);
            classes.iter().position(|c| *c == ct).unwrap()
        })
        .collect();
    let index: HashMap<&Permutation, usize> = perms.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let n = classes.len();
    let mut table = vec![vec![vec![BigInt::zero(); n]; n]; n];
    for (g, class) in classes.iter().enumerate() {
        let rep = class.representative();
        for (x, sx) in perms.iter().enumerate() {
            // x * y = rep  <=>  y = x^{-1} * rep
            let y = &sx.inverse() * &rep;
            table[class_of[x]][class_of[index[&y]]][g] += 1;
        }
    }
    let s = Arc::new(StructureConstants { r, table });
    Ok(cache
        .lock()
        .expect("cache poisoned")
        .entry(r)
        .or_insert(s)
        .clone())
}

/// Product in the center through structure constants (`r <= 6`).
pub fn multiply_central_direct(u: &CentralElement, v: &CentralElement) -> Result<CentralElement> {
    if u.r != v.r {
        return Err(Error::Shape(format!("S_{} vs S_{}", u.r, v.r)));
    }
    let sc = structure_constants(u.r)?;
    let n = u.coeffs.len();
    let mut out = vec![BigRational::zero(); n];
    for a in 0..n {
        if u.coeffs[a].is_zero() {
            continue;
        }
        for b in 0..n {
            let ab = &u.coeffs[a] * &v.coeffs[b];
            if ab.is_zero() {
                continue;
            }
            for (g, o) in out.iter_mut().enumerate() {
                if !sc.table[a][b][g].is_zero() {
                    *o += &ab * BigRational::from_integer(sc.table[a][b][g].clone());
                }
            }
        }
    }
    CentralElement::from_coeffs(u.r, out)
}

/// Product in the center, multiplying idempotent coordinates componentwise.
pub fn multiply_central(u: &CentralElement, v: &CentralElement) -> Result<CentralElement> {
    if u.r != v.r {
        return Err(Error::Shape(format!("S_{} vs S_{}", u.r, v.r)));
    }
    let mut eu = k_to_e(u)?;
    let ev = k_to_e(v)?;
    for (a, b) in eu.coeffs.iter_mut().zip(&ev.coeffs) {
        *a *= b;
    }
    e_to_k(&eu)
}

/// Solves `A x = b` exactly by Gaussian elimination.
pub(crate) fn solve_rational(
    mut a: Vec<Vec<BigRational>>,
    mut b: Vec<BigRational>,
) -> Result<Vec<BigRational>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&row| !a[row][col].is_zero())
            .ok_or_else(|| Error::Singular(format!("no pivot in column {col}")))?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].recip();
        for row in 0..n {
            if row == col || a[row][col].is_zero() {
                continue;
            }
            let f = &a[row][col] * &inv;
            let pivot = a[col].clone();
            for (x, y) in a[row][col..].iter_mut().zip(&pivot[col..]) {
                *x -= &f * y;
            }
            let delta = &f * &b[col];
            b[row] -= delta;
        }
    }
    Ok((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

/// `Z(c)^{-1}` by solving `u Z(c) = 1` with structure constants from an
/// enumeration of `S_r` (`r <= 6`); independent of the character table.
pub fn invert_central_direct(r: usize, c: &BigRational) -> Result<CentralElement> {
    let sc = structure_constants(r)?;
    let z = deformation_element(r, c)?;
    let n = z.coeffs.len();
    // (sum_a u_a k_a)(sum_b z_b k_b) = sum_g (sum_ab u_a z_b sc[a][b][g]) k_g
    let matrix: Vec<Vec<BigRational>> = (0..n)
        .map(|g| {
            (0..n)
                .map(|a| {
                    (0..n)
                        .map(|b| &z.coeffs[b] * BigRational::from_integer(sc.table[a][b][g].clone()))
                        .sum()
                })
                .collect()
        })
        .collect();
    let mut rhs = vec![BigRational::zero(); n];
    rhs[0] = BigRational::one();
    let coeffs = solve_rational(matrix, rhs)?;
    CentralElement::from_coeffs(r, coeffs)
}

/// Lambda expansion of `mu^{|m|} / t_[m](mu/lambda + p)` to order `order`.
///
/// Each box with content `k` contributes `mu / (mu/lambda + p + k) =
/// lambda / (1 + lambda (p + k) / mu)`, so the series starts at `lambda^{|m|}`.
pub fn lambda_coefficient_series(
    frame: &Frame,
    mu: &BigRational,
    p: usize,
    order: usize,
) -> Result<LambdaSeries<BigRational>> {
    if frame.len() > p {
        return Err(Error::InvalidInput(format!(
            "frame {frame} has more than p = {p} rows"
        )));
    }
    coefficient_series_unchecked(frame, mu, p, order)
}

pub(crate) fn coefficient_series_unchecked(
    frame: &Frame,
    mu: &BigRational,
    p: usize,
    order: usize,
) -> Result<LambdaSeries<BigRational>> {
    if mu.is_zero() || *mu < BigRational::zero() {
        return Err(Error::InvalidInput("mu must be positive".into()));
    }
    let r = frame.weight();
    if r > order {
        return Ok(LambdaSeries::zero(order));
    }
    let denom = frame.contents().fold(LambdaSeries::constant(int(1), order), |acc, ct| {
        let factor = LambdaSeries::from_coeffs(vec![int(1), int(p as i64 + ct) / mu], order);
        &acc * &factor
    });
    let inv = denom.inverse()?;
    let mut coeffs = vec![BigRational::zero(); r];
    coeffs.extend(inv.into_coeffs());
    Ok(LambdaSeries::from_coeffs(coeffs, order))
}
