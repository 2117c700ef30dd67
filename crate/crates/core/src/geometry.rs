//! Points of the flat space of `(p+q) x p` matrices, the Grassmannian projector,
//! invariant functions, and the upstairs Wick product.
//!
//! Functions are evaluated on jets by treating `z` and `z^dagger` as independent
//! matrices `Z` and `W`; the point itself has `W = Z^dagger`. The holomorphic
//! coordinate `z^A_i` is `Z[(A, i)]`, its conjugate `W[(i, A)]`; both carry the
//! derivative index `v = A p + i`.

use nalgebra::DMatrix;
use num::complex::Complex64;
use num::{BigRational, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Jet, MatrixJet};
use crate::rational::{fmt_rational, parse_rational, to_f64};
use crate::series::LambdaSeries;

/// Smallest admitted ratio of extreme singular values of a point.
pub const RANK_THRESHOLD: f64 = 1e-6;
const SAMPLE_TRIES: usize = 100;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpaceConfig {
    pub p: usize,
    pub q: usize,
    pub mu: BigRational,
}

impl SpaceConfig {
    pub fn new(p: usize, q: usize, mu: BigRational) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::InvalidInput(format!("p and q must be positive, got p={p}, q={q}")));
        }
        if mu <= BigRational::zero() {
            return Err(Error::InvalidInput(format!("mu must be positive, got {}", fmt_rational(&mu))));
        }
        Ok(Self { p, q, mu })
    }

    pub fn rows(&self) -> usize {
        self.p + self.q
    }

    /// Number of complex coordinates `(p+q) p`.
    pub fn nvars(&self) -> usize {
        (self.p + self.q) * self.p
    }

    pub fn mu_f64(&self) -> f64 {
        to_f64(&self.mu)
    }
}

impl Serialize for SpaceConfig {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("SpaceConfig", 3)?;
        st.serialize_field("p", &self.p)?;
        st.serialize_field("q", &self.q)?;
        st.serialize_field("mu", &fmt_rational(&self.mu))?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for SpaceConfig {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            p: usize,
            q: usize,
            mu: String,
        }
        let raw = Raw::deserialize(d)?;
        let mu = parse_rational(&raw.mu).map_err(serde::de::Error::custom)?;
        SpaceConfig::new(raw.p, raw.q, mu).map_err(serde::de::Error::custom)
    }
}

/// Serde helpers for complex numbers as `[re, im]` and matrices as nested rows of those.
pub mod complex_json {
    use super::*;

    pub fn pair(c: Complex64) -> [f64; 2] {
        [c.re, c.im]
    }

    pub fn matrix_rows(m: &DMatrix<Complex64>) -> Vec<Vec<[f64; 2]>> {
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| pair(m[(i, j)])).collect())
            .collect()
    }

    pub fn matrix_from_rows(rows: &[Vec<[f64; 2]>]) -> Result<DMatrix<Complex64>> {
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::Shape("matrix rows must be non-empty and of equal length".into()));
        }
        if rows.iter().flatten().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| {
            Complex64::new(rows[i][j][0], rows[i][j][1])
        }))
    }

    pub mod complex {
        use super::*;
        pub fn serialize<S: serde::Serializer>(c: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
            pair(*c).serialize(s)
        }
        pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Complex64, D::Error> {
            let [re, im] = <[f64; 2]>::deserialize(d)?;
            Ok(Complex64::new(re, im))
        }
    }

    pub mod matrix {
        use super::*;
        pub fn serialize<S: serde::Serializer>(m: &DMatrix<Complex64>, s: S) -> std::result::Result<S::Ok, S::Error> {
            matrix_rows(m).serialize(s)
        }
        pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<DMatrix<Complex64>, D::Error> {
            let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
            matrix_from_rows(&rows).map_err(serde::de::Error::custom)
        }
    }
}

/// A full-rank `(p+q) x p` matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PointRepr", into = "PointRepr")]
pub struct PointZ {
    z: DMatrix<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct PointRepr {
    #[serde(with = "complex_json::matrix")]
    z: DMatrix<Complex64>,
}

impl TryFrom<PointRepr> for PointZ {
    type Error = Error;
    fn try_from(r: PointRepr) -> Result<Self> {
        PointZ::new(r.z)
    }
}

impl From<PointZ> for PointRepr {
    fn from(p: PointZ) -> Self {
        PointRepr { z: p.z }
    }
}

impl PointZ {
    pub fn new(z: DMatrix<Complex64>) -> Result<Self> {
        if z.ncols() == 0 || z.nrows() <= z.ncols() {
            return Err(Error::Shape(format!(
                "a point needs more rows than columns, got {}x{}",
                z.nrows(),
                z.ncols()
            )));
        }
        let sv = z.clone().svd(false, false).singular_values;
        if sv.min().partial_cmp(&(RANK_THRESHOLD * sv.max())) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::InvalidInput("point is (numerically) rank deficient".into()));
        }
        Ok(Self { z })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.z
    }

    pub fn p(&self) -> usize {
        self.z.ncols()
    }

    pub fn q(&self) -> usize {
        self.z.nrows() - self.z.ncols()
    }

    pub fn check_space(&self, cfg: &SpaceConfig) -> Result<()> {
        if self.p() != cfg.p || self.q() != cfg.q {
            return Err(Error::Shape(format!(
                "point is {}x{}, configuration wants {}x{}",
                self.z.nrows(),
                self.z.ncols(),
                cfg.rows(),
                cfg.p
            )));
        }
        Ok(())
    }
}

/// Standard complex Gaussian matrix: real and imaginary parts independent `N(0, 1/2)`.
pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * s, im * s)
    })
}

pub fn sample_point_rng(cfg: &SpaceConfig, rng: &mut impl Rng) -> Result<PointZ> {
    for _ in 0..SAMPLE_TRIES {
        if let Ok(pt) = PointZ::new(gaussian_matrix(cfg.rows(), cfg.p, rng)) {
            return Ok(pt);
        }
    }
    Err(Error::Numeric(format!("no full-rank sample in {SAMPLE_TRIES} tries")))
}

/// Deterministic Gaussian sample for a seed.
pub fn sample_point(cfg: &SpaceConfig, seed: u64) -> Result<PointZ> {
    sample_point_rng(cfg, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Random element of `Gl(n)`, kept away from singular matrices.
pub fn random_gl(n: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    loop {
        let g = gaussian_matrix(n, n, rng);
        let sv = g.clone().svd(false, false).singular_values;
        if sv.min() > 0.1 * sv.max() {
            return g;
        }
    }
}

/// Random unitary matrix from the QR factorization of a Gaussian matrix.
pub fn random_unitary(n: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    let qr = gaussian_matrix(n, n, rng).qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = DMatrix::from_fn(n, n, |i, j| {
        if i == j && r[(i, i)].norm() > 0.0 {
            r[(i, i)] / r[(i, i)].norm()
        } else if i == j {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::zero()
        }
    });
    q * phases
}

/// `x = z^dagger z`.
pub fn gram(z: &PointZ) -> DMatrix<Complex64> {
    z.z.adjoint() * &z.z
}

/// `J = (i/2) z^dagger z`.
pub fn momentum(z: &PointZ) -> DMatrix<Complex64> {
    gram(z) * Complex64::new(0.0, 0.5)
}

fn hermitian_power(x: &DMatrix<Complex64>, power: f64) -> DMatrix<Complex64> {
    let h = (x + x.adjoint()).scale(0.5);
    let eig = h.symmetric_eigen();
    let v = &eig.eigenvectors;
    let d = DMatrix::from_fn(v.ncols(), v.ncols(), |i, j| {
        if i == j {
            Complex64::new(eig.eigenvalues[i].powf(power), 0.0)
        } else {
            Complex64::zero()
        }
    });
    v * d * v.adjoint()
}

/// `zeta = z (z^dagger z)^{-1/2} sqrt(mu)`, the representative on the level set `zeta^dagger zeta = mu`.
pub fn level_representative(z: &PointZ, mu: f64) -> Result<PointZ> {
    let r = hermitian_power(&gram(z), -0.5);
    PointZ::new(&z.z * r * Complex64::new(mu.sqrt(), 0.0))
}

/// Jet version of [`level_representative`] for independent `Z`, `W`:
/// returns `(Z R sqrt(mu), sqrt(mu) R W)` with `R = (W Z)^{-1/2}`.
pub fn level_representative_jet(z: &MatrixJet, w: &MatrixJet, mu: f64) -> Result<(MatrixJet, MatrixJet)> {
    let r = w.mul(z)?.inv_sqrt()?;
    let s = Complex64::new(mu.sqrt(), 0.0);
    Ok((z.mul(&r)?.scale(s), r.mul(w)?.scale(s)))
}

/// Orthogonal projector `Pi = z (z^dagger z)^{-1} z^dagger` onto the column space.
pub fn projector_matrix(z: &PointZ) -> Result<DMatrix<Complex64>> {
    let xinv = gram(z)
        .try_inverse()
        .ok_or_else(|| Error::Singular("Gram matrix".into()))?;
    Ok(&z.z * xinv * z.z.adjoint())
}

/// A scalar function of `(Z, W)`, evaluated on jets.
pub trait Observable {
    fn eval_jet(&self, z: &MatrixJet, w: &MatrixJet) -> Result<Jet>;

    /// Value at a point (`W = Z^dagger`).
    fn eval_at(&self, z: &PointZ) -> Result<Complex64> {
        let zj = MatrixJet::constant(z.matrix(), 0, 0)?;
        let wj = MatrixJet::constant(&z.matrix().adjoint(), 0, 0)?;
        Ok(self.eval_jet(&zj, &wj)?.value())
    }
}

/// Generator `tr(B Pi)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    #[serde(rename = "B", with = "complex_json::matrix")]
    pub b: DMatrix<Complex64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    #[serde(with = "complex_json::complex")]
    pub coeff: Complex64,
    pub factors: Vec<Generator>,
}

/// Polynomial in the generators `tr(B Pi(z))`, a `Gl(p)`-invariant function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionExpr {
    pub terms: Vec<Term>,
}

impl FunctionExpr {
    pub fn constant(c: Complex64) -> Self {
        Self {
            terms: vec![Term {
                coeff: c,
                factors: Vec::new(),
            }],
        }
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    pub fn generator(b: DMatrix<Complex64>) -> Self {
        Self {
            terms: vec![Term {
                coeff: Complex64::new(1.0, 0.0),
                factors: vec![Generator { b }],
            }],
        }
    }

    /// A constant plus two or three monomials of degree one or two with Gaussian data.
    pub fn random(dim: usize, rng: &mut impl Rng) -> Self {
        let mut terms = vec![Term {
            coeff: gaussian_matrix(1, 1, rng)[(0, 0)],
            factors: Vec::new(),
        }];
        for _ in 0..rng.gen_range(2..=3) {
            let degree = rng.gen_range(1..=2);
            terms.push(Term {
                coeff: gaussian_matrix(1, 1, rng)[(0, 0)],
                factors: (0..degree)
                    .map(|_| Generator {
                        b: gaussian_matrix(dim, dim, rng),
                    })
                    .collect(),
            });
        }
        Self { terms }
    }

    /// Complex conjugate function: conjugated coefficients and `B -> B^dagger`.
    pub fn conj(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: t.coeff.conj(),
                    factors: t
                        .factors
                        .iter()
                        .map(|g| Generator { b: g.b.adjoint() })
                        .collect(),
                })
                .collect(),
        }
    }

    /// Checks that every generator matrix is `dim x dim`.
    pub fn validate(&self, dim: usize) -> Result<()> {
        for g in self.terms.iter().flat_map(|t| &t.factors) {
            if g.b.nrows() != dim || g.b.ncols() != dim {
                return Err(Error::Shape(format!(
                    "generator is {}x{}, expected {dim}x{dim}",
                    g.b.nrows(),
                    g.b.ncols()
                )));
            }
        }
        if self.terms.iter().any(|t| !t.coeff.re.is_finite() || !t.coeff.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite coefficient".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("finite data serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidInput(format!("function expression: {e}")))
    }

    /// Value at a point through the projector matrix.
    pub fn eval_point(&self, z: &PointZ) -> Result<Complex64> {
        self.validate(z.matrix().nrows())?;
        let pi = projector_matrix(z)?;
        Ok(self
            .terms
            .iter()
            .map(|t| {
                t.factors
                    .iter()
                    .fold(t.coeff, |acc, g| acc * (&g.b * &pi).trace())
            })
            .sum())
    }
}

impl Observable for FunctionExpr {
    fn eval_jet(&self, z: &MatrixJet, w: &MatrixJet) -> Result<Jet> {
        self.validate(z.shape().0)?;
        // tr(B Z (WZ)^{-1} W) = tr((W B Z) (WZ)^{-1})
        let xinv = w.mul(z)?.inverse()?;
        let mut total = z.get(0, 0).zero_like();
        for term in &self.terms {
            let mut acc = z.get(0, 0).constant_like(term.coeff);
            for g in &term.factors {
                let wbz = w.mul(&z.left_mul_const(&g.b)?)?;
                acc = acc.mul(&wbz.trace_of_product(&xinv)?)?;
            }
            total.add_assign(&acc)?;
        }
        Ok(total)
    }
}

/// Entry `J^i_j = (i/2) sum_A zbar^A_i z^A_j` of the momentum map, extended
/// holomorphically as `(i/2) (W Z)_{ij}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MomentumEntry {
    pub i: usize,
    pub j: usize,
}

impl Observable for MomentumEntry {
    fn eval_jet(&self, z: &MatrixJet, w: &MatrixJet) -> Result<Jet> {
        let (rows, p) = z.shape();
        if self.i >= p || self.j >= p {
            return Err(Error::Shape(format!("momentum entry ({}, {}) with p = {p}", self.i, self.j)));
        }
        let mut acc = z.get(0, 0).zero_like();
        for a in 0..rows {
            acc.add_assign(&w.get(self.i, a).mul(z.get(a, self.j))?)?;
        }
        Ok(acc.scale(Complex64::new(0.0, 0.5)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Holomorphic,
    Antiholomorphic,
}

/// Adds jet variables `first_var + A p + i` to the holomorphic (`Z[(A,i)]`) or
/// antiholomorphic (`W[(i,A)]`) coordinates.
pub fn displace(z: &MatrixJet, w: &MatrixJet, side: Side, first_var: usize) -> Result<(MatrixJet, MatrixJet)> {
    let (rows, p) = z.shape();
    let (nvars, order) = (z.nvars(), z.order());
    let bump = |base: &Jet, v: usize| -> Result<Jet> { base.add(&Jet::var(first_var + v, Complex64::zero(), nvars, order)?) };
    match side {
        Side::Holomorphic => {
            let entries = (0..rows * p)
                .map(|k| bump(z.get(k / p, k % p), k))
                .collect::<Result<Vec<_>>>()?;
            Ok((MatrixJet::from_entries(rows, p, entries)?, w.clone()))
        }
        Side::Antiholomorphic => {
            let entries = (0..p * rows)
                .map(|k| {
                    let (i, a) = (k / rows, k % rows);
                    bump(w.get(i, a), a * p + i)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((z.clone(), MatrixJet::from_entries(p, rows, entries)?))
        }
    }
}

/// Taylor jet of an observable around `(z, z^dagger)` in the coordinates of one side.
pub fn observable_jet(obs: &dyn Observable, z: &PointZ, side: Side, order: usize) -> Result<Jet> {
    let n = z.matrix().nrows() * z.p();
    let zj = MatrixJet::constant(z.matrix(), n, order)?;
    let wj = MatrixJet::constant(&z.matrix().adjoint(), n, order)?;
    let (zj, wj) = displace(&zj, &wj, side, 0)?;
    obs.eval_jet(&zj, &wj)
}

fn factorial(r: usize) -> f64 {
    (1..=r).map(|k| k as f64).product()
}

/// Upstairs Wick product `sum_r lambda^r / r! sum_v d^r F/dz_v . d^r G/dzbar_v` at `z`.
pub fn wick_product(f: &dyn Observable, g: &dyn Observable, z: &PointZ, order: usize) -> Result<LambdaSeries<Complex64>> {
    let n = z.matrix().nrows() * z.p();
    let fj = observable_jet(f, z, Side::Holomorphic, order)?;
    let gj = observable_jet(g, z, Side::Antiholomorphic, order)?;
    let coeffs = (0..=order)
        .map(|r| {
            let a = fj.partials(0..n, r)?;
            let b = gj.partials(0..n, r)?;
            let s: Complex64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
            Ok(s / factorial(r))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LambdaSeries::from_coeffs(coeffs, order))
}

/// `{F, G} = (2/i) sum_v (dF/dz_v dG/dzbar_v - dG/dz_v dF/dzbar_v)`.
pub fn poisson_bracket(f: &dyn Observable, g: &dyn Observable, z: &PointZ) -> Result<Complex64> {
    let n = z.matrix().nrows() * z.p();
    let df = observable_jet(f, z, Side::Holomorphic, 1)?.partials(0..n, 1)?;
    let dbf = observable_jet(f, z, Side::Antiholomorphic, 1)?.partials(0..n, 1)?;
    let dg = observable_jet(g, z, Side::Holomorphic, 1)?.partials(0..n, 1)?;
    let dbg = observable_jet(g, z, Side::Antiholomorphic, 1)?.partials(0..n, 1)?;
    let s: Complex64 = (0..n).map(|v| df[v] * dbg[v] - dg[v] * dbf[v]).sum();
    Ok(s * Complex64::new(0.0, -2.0))
}

/// Whether `|f(zU) - f(z)| < 1e-10`.
pub fn check_invariant_u(f: &dyn Observable, z: &PointZ, u: &DMatrix<Complex64>) -> Result<bool> {
    let moved = PointZ::new(z.matrix() * u)?;
    Ok((f.eval_at(&moved)? - f.eval_at(z)?).norm() < 1e-10)
}
