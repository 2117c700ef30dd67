//! Commuting actions of `S_r` and `Gl(s)` on `(C^s)^{(x)r}`.
//!
//! Basis tensors `e_{A_1} (x) ... (x) e_{A_r}` are flattened row-major, `A_1`
//! most significant: `flat = A_1 s^{r-1} + ... + A_r`. Operators are dense
//! `s^r x s^r` matrices stored row-major.
//!
//! `rho(sigma)` sends `e_{A_1} (x) ... (x) e_{A_r}` to
//! `e_{A_sigma(1)} (x) ... (x) e_{A_sigma(r)}`. Read literally with ordinary
//! composition this is an anti-homomorphism; permutations in this crate
//! compose left to right (see [`Permutation`]), which makes `rho` a
//! homomorphism.

use nalgebra::DMatrix;
use num::complex::Complex64;
use num::{BigRational, One, Zero};

use crate::center::{e_to_k, CentralElement, IdempotentCoords};
use crate::characters::character_table;
use crate::error::{Error, Result};
use crate::partitions::{class_size, cycle_type, factorial, ConjClass, Frame, Permutation};
use crate::rational::to_f64;

/// Largest supported tensor-space dimension `s^r`.
pub const MAX_DIM: usize = 4096;
/// Largest `r` for operators built by summing over all of `S_r`.
pub const MAX_ENUM_R: usize = 7;

pub(crate) fn tensor_dim(s: usize, r: usize) -> Result<usize> {
    let mut dim: usize = 1;
    for _ in 0..r {
        dim = dim.saturating_mul(s);
        if dim > MAX_DIM {
            return Err(Error::DimensionCap { dim, cap: MAX_DIM });
        }
    }
    Ok(dim)
}

fn check_enum_r(r: usize) -> Result<()> {
    if r > MAX_ENUM_R {
        return Err(Error::OutOfRange {
            what: "r (sum over S_r)",
            value: r as i64,
            min: 0,
            max: MAX_ENUM_R as i64,
        });
    }
    Ok(())
}

pub fn unflatten(mut flat: usize, s: usize, r: usize) -> Vec<usize> {
    let mut idx = vec![0; r];
    for k in (0..r).rev() {
        idx[k] = flat % s;
        flat /= s;
    }
    idx
}

pub fn flatten(idx: &[usize], s: usize) -> usize {
    idx.iter().fold(0, |acc, &a| acc * s + a)
}

/// Image of the basis tensor `flat` under `rho(sigma)`.
pub fn permute_basis(sigma: &Permutation, flat: usize, s: usize) -> usize {
    let a = unflatten(flat, s, sigma.degree());
    let b: Vec<usize> = (0..sigma.degree()).map(|k| a[sigma.apply(k)]).collect();
    flatten(&b, s)
}

/// `rho(sigma) v` by index shuffling, without building the operator.
pub fn apply_perm<T: Clone>(sigma: &Permutation, s: usize, v: &[T]) -> Vec<T> {
    let mut out = v.to_vec();
    for (flat, x) in v.iter().enumerate() {
        out[permute_basis(sigma, flat, s)] = x.clone();
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub enum Entries {
    Exact(Vec<BigRational>),
    Complex(Vec<Complex64>),
}

/// Linear map on `(C^s)^{(x)r}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorOperator {
    s: usize,
    r: usize,
    dim: usize,
    entries: Entries,
}

impl TensorOperator {
    pub fn zero_exact(s: usize, r: usize) -> Result<Self> {
        let dim = tensor_dim(s, r)?;
        Ok(Self {
            s,
            r,
            dim,
            entries: Entries::Exact(vec![BigRational::zero(); dim * dim]),
        })
    }

    pub fn identity(s: usize, r: usize) -> Result<Self> {
        let mut op = Self::zero_exact(s, r)?;
        if let Entries::Exact(e) = &mut op.entries {
            for i in 0..op.dim {
                e[i * op.dim + i] = BigRational::one();
            }
        }
        Ok(op)
    }

    pub fn from_complex(s: usize, r: usize, entries: Vec<Complex64>) -> Result<Self> {
        let dim = tensor_dim(s, r)?;
        if entries.len() != dim * dim {
            return Err(Error::Shape(format!("expected {} entries", dim * dim)));
        }
        Ok(Self {
            s,
            r,
            dim,
            entries: Entries::Complex(entries),
        })
    }

    pub fn base_dim(&self) -> usize {
        self.s
    }

    pub fn power(&self) -> usize {
        self.r
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &Entries {
        &self.entries
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.entries, Entries::Exact(_))
    }

    pub fn exact_entry(&self, row: usize, col: usize) -> Option<&BigRational> {
        match &self.entries {
            Entries::Exact(e) => Some(&e[row * self.dim + col]),
            Entries::Complex(_) => None,
        }
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        match &self.entries {
            Entries::Exact(e) => Complex64::new(to_f64(&e[row * self.dim + col]), 0.0),
            Entries::Complex(e) => e[row * self.dim + col],
        }
    }

    pub fn to_complex(&self) -> Self {
        let entries = match &self.entries {
            Entries::Exact(e) => e.iter().map(|x| Complex64::new(to_f64(x), 0.0)).collect(),
            Entries::Complex(e) => e.clone(),
        };
        Self {
            entries: Entries::Complex(entries),
            ..*self
        }
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.entry(i, j))
    }

    fn check_same_space(&self, other: &Self) -> Result<()> {
        if self.s != other.s || self.r != other.r {
            return Err(Error::Shape(format!(
                "operators on (C^{})^(x){} and (C^{})^(x){}",
                self.s, self.r, other.s, other.r
            )));
        }
        Ok(())
    }

    /// `self o other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        let n = self.dim;
        let entries = match (&self.entries, &other.entries) {
            (Entries::Exact(a), Entries::Exact(b)) => {
                let mut out = vec![BigRational::zero(); n * n];
                for i in 0..n {
                    for k in 0..n {
                        let aik = &a[i * n + k];
                        if aik.is_zero() {
                            continue;
                        }
                        for j in 0..n {
                            let bkj = &b[k * n + j];
                            if !bkj.is_zero() {
                                out[i * n + j] += aik * bkj;
                            }
                        }
                    }
                }
                Entries::Exact(out)
            }
            _ => {
                let a = self.to_complex();
                let b = other.to_complex();
                let (Entries::Complex(a), Entries::Complex(b)) = (&a.entries, &b.entries) else {
                    unreachable!()
                };
                let mut out = vec![Complex64::zero(); n * n];
                for i in 0..n {
                    for k in 0..n {
                        let aik = a[i * n + k];
                        if aik == Complex64::zero() {
                            continue;
                        }
                        for j in 0..n {
                            out[i * n + j] += aik * b[k * n + j];
                        }
                    }
                }
                Entries::Complex(out)
            }
        };
        Ok(Self { entries, ..*self })
    }

    fn zip_with(
        &self,
        other: &Self,
        fe: impl Fn(&BigRational, &BigRational) -> BigRational,
        fc: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        self.check_same_space(other)?;
        let entries = match (&self.entries, &other.entries) {
            (Entries::Exact(a), Entries::Exact(b)) => {
                Entries::Exact(a.iter().zip(b).map(|(x, y)| fe(x, y)).collect())
            }
            _ => {
                let n = self.dim * self.dim;
                Entries::Complex(
                    (0..n)
                        .map(|k| fc(self.entry(k / self.dim, k % self.dim), other.entry(k / self.dim, k % self.dim)))
                        .collect(),
                )
            }
        };
        Ok(Self { entries, ..*self })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b, |a, b| a - b)
    }

    pub fn scale_exact(&self, k: &BigRational) -> Self {
        let entries = match &self.entries {
            Entries::Exact(e) => Entries::Exact(e.iter().map(|x| x * k).collect()),
            Entries::Complex(e) => {
                let kf = to_f64(k);
                Entries::Complex(e.iter().map(|x| x * kf).collect())
            }
        };
        Self { entries, ..*self }
    }

    pub fn trace_exact(&self) -> Option<BigRational> {
        match &self.entries {
            Entries::Exact(e) => Some((0..self.dim).map(|i| e[i * self.dim + i].clone()).sum()),
            Entries::Complex(_) => None,
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.entry(i, i)).sum()
    }

    pub fn is_zero(&self) -> bool {
        match &self.entries {
            Entries::Exact(e) => e.iter().all(Zero::is_zero),
            Entries::Complex(e) => e.iter().all(|x| *x == Complex64::zero()),
        }
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_space(other)?;
        let n = self.dim;
        Ok((0..n * n)
            .map(|k| (self.entry(k / n, k % n) - other.entry(k / n, k % n)).norm())
            .fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        let n = self.dim;
        (0..n * n).map(|k| self.entry(k / n, k % n).norm()).fold(0.0, f64::max)
    }

    /// Applies the operator to a vector of length `s^r`.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.entry(i, j) * v[j]).sum())
            .collect()
    }
}

/// Slot-permutation operator `rho(sigma)` on `(C^s)^{(x)r}`, `r = deg sigma`.
pub fn rho_perm(sigma: &Permutation, s: usize) -> Result<TensorOperator> {
    let r = sigma.degree();
    let mut op = TensorOperator::zero_exact(s, r)?;
    let dim = op.dim;
    if let Entries::Exact(e) = &mut op.entries {
        for col in 0..dim {
            e[permute_basis(sigma, col, s) * dim + col] = BigRational::one();
        }
    }
    Ok(op)
}

/// `rho(u) = sum_alpha u_alpha sum_{sigma in alpha} rho(sigma)`.
pub fn rho_central(u: &CentralElement, s: usize) -> Result<TensorOperator> {
    let r = u.r();
    check_enum_r(r)?;
    let mut op = TensorOperator::zero_exact(s, r)?;
    let dim = op.dim;
    let classes = u.classes();
    if let Entries::Exact(e) = &mut op.entries {
        for sigma in Permutation::all(r) {
            let ct = cycle_type(&sigma);
            let k = classes.iter().position(|c| *c == ct).unwrap();
            let coeff = &u.coeffs()[k];
            if coeff.is_zero() {
                continue;
            }
            for col in 0..dim {
                e[permute_basis(&sigma, col, s) * dim + col] += coeff;
            }
        }
    }
    Ok(op)
}

/// `D(S) = S^{(x)r}` in the same index convention.
pub fn d_power(m: &DMatrix<Complex64>, r: usize) -> Result<TensorOperator> {
    if !m.is_square() {
        return Err(Error::Shape("D(S) needs a square matrix".into()));
    }
    let s = m.nrows();
    let dim = tensor_dim(s, r)?;
    let mut entries = vec![Complex64::zero(); dim * dim];
    for row in 0..dim {
        let b = unflatten(row, s, r);
        for col in 0..dim {
            let a = unflatten(col, s, r);
            entries[row * dim + col] = (0..r).map(|k| m[(b[k], a[k])]).product();
        }
    }
    TensorOperator::from_complex(s, r, entries)
}

/// Isotypic projector `rho(e_[m]) = n_[m]/r! sum_alpha chi^[m]_alpha rho(k_alpha)`.
///
/// Frames with more than `s` rows give the zero operator.
pub fn projector(frame: &Frame, s: usize) -> Result<TensorOperator> {
    let r = frame.weight();
    if r == 0 {
        return TensorOperator::identity(s, 0);
    }
    let t = character_table(r)?;
    let coeffs = t
        .frames
        .iter()
        .map(|f| if f == frame { BigRational::one() } else { BigRational::zero() })
        .collect();
    let e = e_to_k(&IdempotentCoords {
        r,
        frames: t.frames.clone(),
        coeffs,
    })?;
    rho_central(&e, s)
}

/// `tr(D(A) rho(sigma))`, computed on the dense tensor space.
pub fn frobenius_trace(a: &DMatrix<Complex64>, sigma: &Permutation) -> Result<Complex64> {
    let d = d_power(a, sigma.degree())?;
    let p = rho_perm(sigma, a.nrows())?;
    Ok(d.compose(&p)?.trace())
}

/// `prod_k (tr A^k)^{alpha_k}`.
pub fn power_trace_product(a: &DMatrix<Complex64>, alpha: &ConjClass) -> Complex64 {
    let mut power = a.clone();
    let mut out = Complex64::one();
    for &count in alpha.alpha() {
        out *= power.trace().powu(count as u32);
        power = &power * a;
    }
    out
}

/// Character `phi^[m](A)` of the `Gl(s)` irreducible, by the Frobenius sum over classes.
pub fn schur_character(frame: &Frame, a: &DMatrix<Complex64>) -> Result<Complex64> {
    let r = frame.weight();
    if r == 0 {
        return Ok(Complex64::one());
    }
    if r > 8 {
        return Err(Error::OutOfRange {
            what: "|frame|",
            value: r as i64,
            min: 0,
            max: 8,
        });
    }
    let t = character_table(r)?;
    let row = t.frame_index(frame).expect("frame of weight r");
    let sum: Complex64 = t
        .classes
        .iter()
        .zip(&t.table[row])
        .map(|(c, &chi)| {
            let h = to_f64(&BigRational::from_integer(class_size(c).into()));
            power_trace_product(a, c) * (h * chi as f64)
        })
        .sum();
    Ok(sum / to_f64(&BigRational::from_integer(factorial(r).into())))
}

/// Schur polynomial as a ratio of alternants, `det(x_i^{m_j + s - j}) / det(x_i^{s - j})`.
pub fn bialternant_schur(frame: &Frame, xs: &[Complex64]) -> Complex64 {
    let s = xs.len();
    if frame.len() > s {
        return Complex64::zero();
    }
    let l = frame.beta(s);
    let num = DMatrix::from_fn(s, s, |i, j| xs[i].powu(l[j] as u32));
    let den = DMatrix::from_fn(s, s, |i, j| xs[i].powu((s - 1 - j) as u32));
    num.determinant() / den.determinant()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::center::{deformation_element, s_coeffs};
    use crate::partitions::{dim_gl, dim_symmetric, partitions_of};
    use crate::rational::{int, rat};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn frame(rows: &[usize]) -> Frame {
        Frame::new(rows.to_vec()).unwrap()
    }

    fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
        DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn rho_is_a_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for r in 1..=4 {
            let perms = Permutation::all(r);
            for _ in 0..10 {
                let a = &perms[rng.gen_range(0..perms.len())];
                let b = &perms[rng.gen_range(0..perms.len())];
                let lhs = rho_perm(a, 2).unwrap().compose(&rho_perm(b, 2).unwrap()).unwrap();
                assert_eq!(lhs, rho_perm(&(a * b), 2).unwrap());
                let inv = rho_perm(a, 3).unwrap().compose(&rho_perm(&a.inverse(), 3).unwrap()).unwrap();
                assert_eq!(inv, TensorOperator::identity(3, r).unwrap());
            }
        }
    }

    #[test]
    fn swap_operator() {
        let tau = Permutation::transposition(2, 0, 1);
        let op = rho_perm(&tau, 2).unwrap();
        // basis order 00, 01, 10, 11
        for (col, row) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
            assert!(op.exact_entry(row, col).unwrap().is_one());
        }
        assert_eq!(rho_perm(&Permutation::identity(3), 2).unwrap(), TensorOperator::identity(2, 3).unwrap());
        let k = CentralElement::class_sum(&ConjClass::new(vec![0, 1]).unwrap()).unwrap();
        assert_eq!(rho_central(&k, 2).unwrap(), op);
        assert_eq!(
            rho_central(&CentralElement::identity(3).unwrap(), 2).unwrap(),
            TensorOperator::identity(2, 3).unwrap()
        );
    }

    #[test]
    fn apply_perm_matches_operator() {
        let sigma = Permutation::from_cycles(3, &[&[1, 2, 3]]).unwrap();
        let v: Vec<Complex64> = (0..27).map(|k| Complex64::new(k as f64, -(k as f64))).collect();
        assert_eq!(apply_perm(&sigma, 3, &v), rho_perm(&sigma, 3).unwrap().apply(&v));
    }

    #[test]
    fn central_inverse_through_rho() {
        let c = rat(7, 2);
        for s in 1..=3 {
            for r in 1..=4 {
                let z = rho_central(&deformation_element(r, &c).unwrap(), s).unwrap();
                let w = rho_central(&s_coeffs(r, &c).unwrap(), s).unwrap();
                assert_eq!(z.compose(&w).unwrap(), TensorOperator::identity(s, r).unwrap());
            }
        }
    }

    #[test]
    fn d_power_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_matrix(2, &mut rng);
        let d1 = d_power(&a, 1).unwrap();
        assert_eq!(d1.to_matrix(), a);
        let id = d_power(&DMatrix::identity(3, 3), 2).unwrap();
        assert_eq!(id.max_abs_diff(&TensorOperator::identity(3, 2).unwrap()).unwrap(), 0.0);
        for sigma in Permutation::all(3) {
            let p = rho_perm(&sigma, 2).unwrap();
            let d = d_power(&a, 3).unwrap();
            let diff = d.compose(&p).unwrap().max_abs_diff(&p.compose(&d).unwrap()).unwrap();
            assert!(diff < 1e-12);
        }
        assert!(matches!(d_power(&DMatrix::identity(5, 5), 6), Err(Error::DimensionCap { .. })));
    }

    #[test]
    fn projector_suite() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for s in 1..=3 {
            for r in 1..=4 {
                let frames = partitions_of(r).unwrap();
                let projs: Vec<TensorOperator> = frames.iter().map(|f| projector(f, s).unwrap()).collect();
                let mut total = TensorOperator::zero_exact(s, r).unwrap();
                let a = random_matrix(s, &mut rng);
                let d = d_power(&a, r).unwrap();
                for (i, (f, pf)) in frames.iter().zip(&projs).enumerate() {
                    assert_eq!(&pf.compose(pf).unwrap(), pf, "idempotent {f} s={s}");
                    for pg in &projs[i + 1..] {
                        assert!(pf.compose(pg).unwrap().is_zero());
                    }
                    let expected = BigRational::from_integer((dim_symmetric(f) * dim_gl(f, s)).into());
                    assert_eq!(pf.trace_exact().unwrap(), expected);
                    if f.len() > s {
                        assert!(pf.is_zero());
                    }
                    let comm = pf.compose(&d).unwrap().max_abs_diff(&d.compose(pf).unwrap()).unwrap();
                    assert!(comm < 1e-12);
                    total = total.add(pf).unwrap();
                }
                assert_eq!(total, TensorOperator::identity(s, r).unwrap());
            }
        }
    }

    #[test]
    fn symmetrizer_symmetrizes() {
        let p = projector(&frame(&[2]), 2).unwrap();
        let v = vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
        let w = p.apply(&v);
        assert_eq!(w[1], Complex64::new(0.5, 0.0));
        assert_eq!(w[2], Complex64::new(0.5, 0.0));
    }

    #[test]
    fn frobenius_traces() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_matrix(3, &mut rng);
        let tr = a.trace();
        let id2 = Permutation::identity(2);
        assert!((frobenius_trace(&a, &id2).unwrap() - tr * tr).norm() < 1e-12);
        let tau = Permutation::transposition(2, 0, 1);
        assert!((frobenius_trace(&a, &tau).unwrap() - (&a * &a).trace()).norm() < 1e-12);
        let cyc = Permutation::from_cycles(3, &[&[1, 2, 3]]).unwrap();
        assert!((frobenius_trace(&a, &cyc).unwrap() - (&a * &a * &a).trace()).norm() < 1e-12);
        for r in 1..=4 {
            for sigma in Permutation::all(r) {
                let lhs = frobenius_trace(&a, &sigma).unwrap();
                let rhs = power_trace_product(&a, &cycle_type(&sigma));
                assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm().max(1.0));
            }
        }
    }

    #[test]
    fn schur_character_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let a = random_matrix(3, &mut rng);
        assert!((schur_character(&frame(&[1]), &a).unwrap() - a.trace()).norm() < 1e-12);
        let (x, y) = (Complex64::new(0.3, 0.2), Complex64::new(-1.1, 0.5));
        let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![x, y]));
        assert!((schur_character(&frame(&[1, 1]), &diag).unwrap() - x * y).norm() < 1e-12);
        // phi^[m](1_s) = t_[m](s) n_[m] / r!
        for s in 1..=3usize {
            for r in 1..=4 {
                for f in partitions_of(r).unwrap() {
                    let one = DMatrix::identity(s, s);
                    let t = crate::center::t_value(&f, &int(s as i64));
                    let expected = to_f64(&(t * BigRational::from_integer(dim_symmetric(&f).into())))
                        / to_f64(&BigRational::from_integer(factorial(r).into()));
                    assert!((schur_character(&f, &one).unwrap().re - expected).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn schur_character_matches_bialternant() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for s in 1..=3 {
            let xs: Vec<Complex64> = (0..s)
                .map(|_| Complex64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)))
                .collect();
            let v = random_matrix(s, &mut rng) + DMatrix::identity(s, s) * Complex64::new(2.0, 0.0);
            let a = &v * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(xs.clone())) * v.clone().try_inverse().unwrap();
            for r in 1..=5 {
                for f in partitions_of(r).unwrap() {
                    let lhs = schur_character(&f, &a).unwrap();
                    let rhs = bialternant_schur(&f, &xs);
                    assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm().max(1.0), "{f} s={s}");
                }
            }
        }
    }
}
