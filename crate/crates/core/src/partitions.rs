//! Integer partitions, permutations and conjugacy classes of the symmetric group.
//!
//! A [`Frame`] labels an irreducible representation of `S_r` (and of `Gl(s)` on
//! tensor powers), a [`ConjClass`] labels a conjugacy class by its cycle counts.
//! All counting functions return arbitrary-precision integers.

use std::fmt;
use std::ops::Mul;

use num::{BigInt, BigUint, One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest symmetric-group order parameter supported by the table builders.
pub const MAX_R: usize = 12;

pub(crate) fn check_r(r: usize) -> Result<()> {
    if (1..=MAX_R).contains(&r) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what: "r",
            value: r as i64,
            min: 1,
            max: MAX_R as i64,
        })
    }
}

pub(crate) fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

/// Young frame `[m_1, m_2, ...]` with weakly decreasing rows.
///
/// Trailing zero rows are stripped on construction, so `[2,1,0] == [2,1]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Frame {
    rows: Vec<usize>,
}

impl Frame {
    pub fn new(mut rows: Vec<usize>) -> Result<Self> {
        if rows.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidInput(format!(
                "frame rows must be weakly decreasing, got {rows:?}"
            )));
        }
        while rows.last() == Some(&0) {
            rows.pop();
        }
        Ok(Self { rows })
    }

    /// The empty frame of weight zero.
    pub fn empty() -> Self {
        Self { rows: Vec::new() }
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    /// Number of nonzero rows.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.rows.iter().sum()
    }

    /// Contents `j - i` of all boxes `(i, j)`, row by row.
    pub fn contents(&self) -> impl Iterator<Item = i64> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, &m)| (0..m).map(move |j| j as i64 - i as i64))
    }

    pub fn conjugate(&self) -> Frame {
        let width = self.rows.first().copied().unwrap_or(0);
        let rows = (0..width)
            .map(|j| self.rows.iter().filter(|&&m| m > j).count())
            .collect();
        Frame { rows }
    }

    /// Beta numbers `l_i = m_i + k - i` for `k` rows (after padding with zeros).
    pub(crate) fn beta(&self, k: usize) -> Vec<usize> {
        debug_assert!(k >= self.rows.len());
        (0..k)
            .map(|i| self.rows.get(i).copied().unwrap_or(0) + k - 1 - i)
            .collect()
    }
}

impl TryFrom<Vec<usize>> for Frame {
    type Error = Error;
    fn try_from(rows: Vec<usize>) -> Result<Self> {
        Frame::new(rows)
    }
}

impl From<Frame> for Vec<usize> {
    fn from(f: Frame) -> Self {
        f.rows
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, m) in self.rows.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "]")
    }
}

/// Conjugacy class of `S_r` given by cycle counts `alpha[i-1] = #i-cycles`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct ConjClass {
    alpha: Vec<usize>,
}

impl ConjClass {
    pub fn new(alpha: Vec<usize>) -> Result<Self> {
        let r = alpha.len();
        let total: usize = alpha.iter().enumerate().map(|(i, a)| (i + 1) * a).sum();
        if r == 0 || total != r {
            return Err(Error::InvalidInput(format!(
                "cycle counts {alpha:?} do not describe a permutation of {r} letters"
            )));
        }
        Ok(Self { alpha })
    }

    pub fn identity(r: usize) -> Self {
        let mut alpha = vec![0; r];
        alpha[0] = r;
        Self { alpha }
    }

    /// The class whose cycle lengths are the parts of `cycle_type`.
    pub fn from_cycle_type(cycle_type: &Frame) -> Self {
        let r = cycle_type.weight();
        let mut alpha = vec![0; r];
        for &len in cycle_type.rows() {
            alpha[len - 1] += 1;
        }
        Self { alpha }
    }

    pub fn alpha(&self) -> &[usize] {
        &self.alpha
    }

    pub fn r(&self) -> usize {
        self.alpha.len()
    }

    /// Total number of cycles `|alpha|`.
    pub fn num_cycles(&self) -> usize {
        self.alpha.iter().sum()
    }

    /// Cycle lengths in decreasing order.
    pub fn cycle_type(&self) -> Frame {
        let rows = (1..=self.r())
            .rev()
            .flat_map(|len| std::iter::repeat_n(len, self.alpha[len - 1]))
            .collect();
        Frame { rows }
    }

    pub fn is_identity(&self) -> bool {
        self.alpha[0] == self.r()
    }

    /// A permutation in this class, cycles laid out on consecutive letters.
    pub fn representative(&self) -> Permutation {
        let r = self.r();
        let mut images = vec![0; r];
        let mut start = 0;
        for len in self.cycle_type().rows() {
            for k in 0..*len {
                images[start + k] = start + (k + 1) % len;
            }
            start += len;
        }
        Permutation { images }
    }
}

impl TryFrom<Vec<usize>> for ConjClass {
    type Error = Error;
    fn try_from(alpha: Vec<usize>) -> Result<Self> {
        ConjClass::new(alpha)
    }
}

impl From<ConjClass> for Vec<usize> {
    fn from(c: ConjClass) -> Self {
        c.alpha
    }
}

impl fmt::Display for ConjClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.alpha.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// Bijection of `{0, .., r-1}`; `images[k]` is the image of `k`.
///
/// Products compose left to right: `(s * t)(k) = t(s(k))`. With this
/// convention the slot permutation `rho(s)` of the tensor-action module is a
/// homomorphism, `rho(s) rho(t) = rho(s * t)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || seen[i] {
                return Err(Error::InvalidInput(format!(
                    "{images:?} is not a bijection"
                )));
            }
            seen[i] = true;
        }
        Ok(Self { images })
    }

    /// Builds a permutation of `r` letters from 1-based cycles, e.g. `[[1, 2], [3, 4]]`.
    pub fn from_cycles(r: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut images: Vec<usize> = (0..r).collect();
        let mut touched = vec![false; r];
        for cycle in cycles {
            for (k, &a) in cycle.iter().enumerate() {
                let b = cycle[(k + 1) % cycle.len()];
                if a == 0 || a > r || b == 0 || b > r || touched[a - 1] {
                    return Err(Error::InvalidInput(format!("bad cycle {cycle:?}")));
                }
                touched[a - 1] = true;
                images[a - 1] = b - 1;
            }
        }
        Permutation::new(images)
    }

    pub fn identity(r: usize) -> Self {
        Self {
            images: (0..r).collect(),
        }
    }

    pub fn transposition(r: usize, a: usize, b: usize) -> Self {
        let mut p = Self::identity(r);
        p.images.swap(a, b);
        p
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, k: usize) -> usize {
        self.images[k]
    }

    pub fn inverse(&self) -> Self {
        let mut images = vec![0; self.images.len()];
        for (k, &i) in self.images.iter().enumerate() {
            images[i] = k;
        }
        Self { images }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(k, &i)| k == i)
    }

    /// All `r!` permutations in lexicographic order of their image arrays.
    pub fn all(r: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut cur: Vec<usize> = (0..r).collect();
        loop {
            out.push(Permutation {
                images: cur.clone(),
            });
            // next lexicographic permutation
            let Some(i) = (1..r).rev().find(|&i| cur[i - 1] < cur[i]) else {
                break;
            };
            let j = (i..r).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
            cur.swap(i - 1, j);
            cur[i..].reverse();
        }
        out
    }
}

impl Mul for &Permutation {
    type Output = Permutation;

    fn mul(self, rhs: &Permutation) -> Permutation {
        assert_eq!(self.degree(), rhs.degree(), "permutation degree mismatch");
        Permutation {
            images: self.images.iter().map(|&k| rhs.images[k]).collect(),
        }
    }
}

/// All partitions of `r` in reverse-lexicographic order, e.g. `[4], [3,1], [2,2], [2,1,1], [1,1,1,1]`.
pub fn partitions_of(r: usize) -> Result<Vec<Frame>> {
    check_r(r)?;
    Ok(partitions_unchecked(r))
}

pub(crate) fn partitions_unchecked(r: usize) -> Vec<Frame> {
    fn rec(remaining: usize, max_part: usize, cur: &mut Vec<usize>, out: &mut Vec<Frame>) {
        if remaining == 0 {
            out.push(Frame { rows: cur.clone() });
            return;
        }
        for part in (1..=max_part.min(remaining)).rev() {
            cur.push(part);
            rec(remaining - part, part, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(r, r, &mut Vec::new(), &mut out);
    out
}

/// Conjugacy classes of `S_r`, identity class first.
///
/// The order is the frame order of [`partitions_of`] reversed, applied to cycle
/// types: `(1^r)`, `(2,1^{r-2})`, ..., `(r)`.
pub fn classes_of(r: usize) -> Result<Vec<ConjClass>> {
    check_r(r)?;
    Ok(classes_unchecked(r))
}

pub(crate) fn classes_unchecked(r: usize) -> Vec<ConjClass> {
    partitions_unchecked(r)
        .iter()
        .rev()
        .map(ConjClass::from_cycle_type)
        .collect()
}

/// Number of permutations in the class: `r! / prod_i (i^{alpha_i} alpha_i!)`.
pub fn class_size(alpha: &ConjClass) -> BigUint {
    let denom = alpha
        .alpha()
        .iter()
        .enumerate()
        .fold(BigUint::one(), |acc, (i, &a)| {
            acc * BigUint::from(i + 1).pow(a as u32) * factorial(a)
        });
    factorial(alpha.r()) / denom
}

/// Minimal number of transpositions composing any element of the class: `r - |alpha|`.
pub fn min_transpositions(alpha: &ConjClass) -> usize {
    alpha.r() - alpha.num_cycles()
}

pub fn cycle_type(sigma: &Permutation) -> ConjClass {
    let r = sigma.degree();
    let mut alpha = vec![0; r];
    let mut seen = vec![false; r];
    for start in 0..r {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut k = start;
        while !seen[k] {
            seen[k] = true;
            k = sigma.apply(k);
            len += 1;
        }
        alpha[len - 1] += 1;
    }
    ConjClass { alpha }
}

fn vandermonde_beta(l: &[usize]) -> BigInt {
    let mut prod = BigInt::one();
    for i in 0..l.len() {
        for j in i + 1..l.len() {
            prod *= BigInt::from(l[i] as i64 - l[j] as i64);
        }
    }
    prod
}

/// Dimension `n_[m]` of the irreducible `S_r` representation labelled by the frame.
pub fn dim_symmetric(frame: &Frame) -> BigUint {
    let k = frame.len();
    let l = frame.beta(k);
    let num = BigInt::from(factorial(frame.weight())) * vandermonde_beta(&l);
    let den = l
        .iter()
        .fold(BigUint::one(), |acc, &li| acc * factorial(li));
    (num / BigInt::from(den))
        .to_biguint()
        .expect("dimension is nonnegative")
}

/// Dimension `d_[m]` of the irreducible `Gl(s)` representation on `(C^s)^{(x)r}`;
/// zero when the frame has more than `s` rows.
pub fn dim_gl(frame: &Frame, s: usize) -> BigUint {
    if frame.len() > s {
        return BigUint::zero();
    }
    let l = frame.beta(s);
    let den = (0..s).fold(BigUint::one(), |acc, k| acc * factorial(k));
    (vandermonde_beta(&l) / BigInt::from(den))
        .to_biguint()
        .expect("dimension is nonnegative")
}
