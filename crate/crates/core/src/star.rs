//! The reduced star product on the Grassmannian `G_{p,q}`.
//!
//! For invariant functions `f, g` the product at `z` is
//!
//! ```text
//! (f * g)(z) = sum_r mu^r / r! sum_{A, i, j} [rho(u_r)]_{ij} d^r f / dz^A_i (zeta) d^r g / dzbar^A_j (zeta)
//! ```
//!
//! with `zeta` the level representative of `z`, `A = (A_1..A_r)` and `i, j`
//! multi-indices, and `u_r = sum_alpha s_alpha(c) k_alpha` the inverse of the
//! deformation element at `c = mu / lambda + p`. The same operator written in the
//! idempotent basis is `sum_m rho(e_m) / t_m(c)` over frames with at most `p`
//! rows ("frames" path); the class form is the "classes" path.
//!
//! Coefficients are either expanded as power series in `lambda` (formal mode) or
//! evaluated exactly at a rational `lambda` (fixed mode).

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num::complex::Complex64;
use num::{BigInt, BigRational, One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::center::{coefficient_series_unchecked, deformation_element, s_coeffs, t_value};
use crate::characters::character_table;
use crate::error::{Error, Result};
use crate::geometry::{
    displace, gram, level_representative, level_representative_jet, observable_jet,
    sample_point, wick_product, FunctionExpr, MomentumEntry, Observable, PointZ, Side, SpaceConfig,
};
use crate::jet::{Jet, MatrixJet, Scalar};
use crate::partitions::{class_size, dim_symmetric, factorial, partitions_of, Frame, Permutation};
use crate::rational::{fmt_rational, int, to_f64};
use crate::series::LambdaSeries;
use crate::tensor_action::{flatten, projector, rho_central, unflatten, TensorOperator};

/// Largest supported lambda truncation order.
pub const MAX_STAR_ORDER: usize = 6;
/// Largest derivative tensor `((p+q) p)^r` the engine will materialize.
pub const MAX_TENSOR_LEN: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoefficientPath {
    Classes,
    Frames,
}

impl fmt::Display for CoefficientPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoefficientPath::Classes => "classes",
            CoefficientPath::Frames => "frames",
        })
    }
}

impl FromStr for CoefficientPath {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classes" => Ok(CoefficientPath::Classes),
            "frames" => Ok(CoefficientPath::Frames),
            _ => Err(Error::InvalidInput(format!("path must be 'classes' or 'frames', got {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LambdaMode {
    Formal,
    Fixed(BigRational),
}

impl fmt::Display for LambdaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LambdaMode::Formal => f.write_str("formal"),
            LambdaMode::Fixed(l) => f.write_str(&fmt_rational(l)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StarConfig {
    pub space: SpaceConfig,
    pub order: usize,
    pub mode: LambdaMode,
    pub path: CoefficientPath,
}

/// `c = mu / lambda + p`.
pub fn c_of(mu: &BigRational, lambda: &BigRational, p: usize) -> Result<BigRational> {
    if lambda.is_zero() {
        return Err(Error::InvalidInput("fixed lambda must be nonzero".into()));
    }
    Ok(mu / lambda + int(p as i64))
}

fn frames_on_path(r: usize, p: usize, path: CoefficientPath) -> Result<Vec<Frame>> {
    let frames = partitions_of(r)?;
    Ok(match path {
        CoefficientPath::Classes => frames,
        CoefficientPath::Frames => frames.into_iter().filter(|f| f.len() <= p).collect(),
    })
}

impl StarConfig {
    /// Validates the order and, in fixed mode, that no `t_m(c)` used by the path vanishes.
    pub fn new(space: SpaceConfig, order: usize, mode: LambdaMode, path: CoefficientPath) -> Result<Self> {
        if order > MAX_STAR_ORDER {
            return Err(Error::OutOfRange {
                what: "order",
                value: order as i64,
                min: 0,
                max: MAX_STAR_ORDER as i64,
            });
        }
        if let LambdaMode::Fixed(lambda) = &mode {
            let c = c_of(&space.mu, lambda, space.p)?;
            for r in 1..=order {
                for f in frames_on_path(r, space.p, path)? {
                    if t_value(&f, &c).is_zero() {
                        return Err(Error::Pole {
                            frame: f,
                            c: fmt_rational(&c),
                        });
                    }
                }
            }
        }
        Ok(Self {
            space,
            order,
            mode,
            path,
        })
    }

    pub fn formal(space: SpaceConfig, order: usize) -> Result<Self> {
        Self::new(space, order, LambdaMode::Formal, CoefficientPath::Classes)
    }

    pub fn c_value(&self) -> Option<BigRational> {
        match &self.mode {
            LambdaMode::Formal => None,
            LambdaMode::Fixed(l) => c_of(&self.space.mu, l, self.space.p).ok(),
        }
    }

    /// Number of lambda coefficients produced: `order + 1`, or one value in fixed mode.
    fn series_len(&self) -> usize {
        match self.mode {
            LambdaMode::Formal => self.order + 1,
            LambdaMode::Fixed(_) => 1,
        }
    }

    fn with_mode(&self, mode: LambdaMode, path: CoefficientPath) -> Result<Self> {
        Self::new(self.space.clone(), self.order, mode, path)
    }
}

/// Result of a star-product evaluation.
#[derive(Clone, Debug, PartialEq)]
pub enum StarValue {
    Series(LambdaSeries<Complex64>),
    Value(Complex64),
}

impl StarValue {
    pub fn coeffs(&self) -> &[Complex64] {
        match self {
            StarValue::Series(s) => s.coeffs(),
            StarValue::Value(v) => std::slice::from_ref(v),
        }
    }
}

/// `r`-th partial derivatives `d^r f / dz_{v_1} ... dz_{v_r}` (or `dzbar`) with
/// `v = A p + i`, stored densely, row-major in `(v_1, ..., v_r)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivativeTensor {
    pub r: usize,
    pub nvars: usize,
    pub entries: Vec<Complex64>,
}

impl DerivativeTensor {
    pub fn get(&self, vars: &[usize]) -> Complex64 {
        self.entries[flatten(vars, self.nvars)]
    }

    /// Largest deviation from symmetry under permutations of the derivative slots.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (flat, v) in self.entries.iter().enumerate() {
            let mut idx = unflatten(flat, self.nvars, self.r);
            idx.sort_unstable();
            worst = worst.max((v - self.get(&idx)).norm());
        }
        worst
    }
}

fn check_tensor_len(nvars: usize, r: usize) -> Result<()> {
    let len = (nvars as u128).pow(r as u32);
    if len > MAX_TENSOR_LEN as u128 {
        return Err(Error::DimensionCap {
            dim: len.min(usize::MAX as u128) as usize,
            cap: MAX_TENSOR_LEN,
        });
    }
    Ok(())
}

/// Derivative tensor of `f` of order `r` at the level representative of `z`.
pub fn derivative_tensor(f: &dyn Observable, z: &PointZ, cfg: &SpaceConfig, r: usize, side: Side) -> Result<DerivativeTensor> {
    z.check_space(cfg)?;
    let n = cfg.nvars();
    check_tensor_len(n, r)?;
    let zeta = level_representative(z, cfg.mu_f64())?;
    let jet = observable_jet(f, &zeta, side, r)?;
    Ok(DerivativeTensor {
        r,
        nvars: n,
        entries: jet.partials(0..n, r)?,
    })
}

/// The coefficient operator on `(C^p)^{(x)r}`:
/// `rho(sum_alpha s_alpha(c) k_alpha)` or `sum_{m, <= p rows} rho(e_m) / t_m(c)`.
pub fn coefficient_operator(r: usize, p: usize, c: &BigRational, path: CoefficientPath) -> Result<TensorOperator> {
    if r == 0 {
        return TensorOperator::identity(p, 0);
    }
    match path {
        CoefficientPath::Classes => rho_central(&s_coeffs(r, c)?, p),
        CoefficientPath::Frames => {
            let mut acc = TensorOperator::zero_exact(p, r)?;
            for f in frames_on_path(r, p, path)? {
                let t = t_value(&f, c);
                if t.is_zero() {
                    return Err(Error::Pole {
                        frame: f,
                        c: fmt_rational(c),
                    });
                }
                acc = acc.add(&projector(&f, p)?.scale_exact(&t.recip()))?;
            }
            Ok(acc)
        }
    }
}

/// One pairing of a holomorphic and an antiholomorphic derivative tensor.
enum Contraction {
    /// `h_alpha sum L[(A, j o sigma)] R[(A, j)]` for a class representative `sigma`.
    Class { rep: Permutation, size: f64 },
    /// `sum_A <P L_A, P R_A>` with `P` an isotypic projector on the `i` slots.
    Frame { projector: Vec<f64> },
}

struct Weights {
    /// `[r]` -> list of (pairing, lambda coefficients).
    terms: Vec<Vec<(Contraction, Vec<f64>)>>,
}

fn big(n: num::BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn weights(sc: &StarConfig) -> Result<Weights> {
    let p = sc.space.p;
    let mu = &sc.space.mu;
    let len = sc.series_len();
    let mut terms = vec![vec![(
        Contraction::Class {
            rep: Permutation::identity(0),
            size: 1.0,
        },
        {
            let mut w = vec![0.0; len];
            w[0] = 1.0;
            w
        },
    )]];
    for r in 1..=sc.order {
        let r_fact = big(factorial(r));
        let table = character_table(r)?;
        // mu^r / t_m(c) for every frame on the path: series or exact value
        let frame_coeffs: Vec<(Frame, Vec<BigRational>)> = frames_on_path(r, p, sc.path)?
            .into_iter()
            .map(|f| {
                let coeffs = match &sc.mode {
                    LambdaMode::Formal => coefficient_series_unchecked(&f, mu, p, sc.order)?.into_coeffs(),
                    LambdaMode::Fixed(l) => {
                        let c = c_of(mu, l, p)?;
                        vec![num::pow(mu.clone(), r) / t_value(&f, &c)]
                    }
                };
                Ok((f, coeffs))
            })
            .collect::<Result<_>>()?;
        let mut level = Vec::new();
        match sc.path {
            CoefficientPath::Classes => {
                for (k, class) in table.classes.iter().enumerate() {
                    let mut w = vec![BigRational::zero(); len];
                    for (f, coeffs) in &frame_coeffs {
                        let a = table.frame_index(f).expect("frame of weight r");
                        let weight = big(dim_symmetric(f)) * int(table.table[a][k]) / &r_fact;
                        for (wi, ci) in w.iter_mut().zip(coeffs) {
                            *wi += &weight * ci;
                        }
                    }
                    level.push((
                        Contraction::Class {
                            rep: class.representative(),
                            size: to_f64(&big(class_size(class))),
                        },
                        w.iter().map(|x| to_f64(&(x / &r_fact))).collect(),
                    ));
                }
            }
            CoefficientPath::Frames => {
                for (f, coeffs) in &frame_coeffs {
                    let proj = projector(f, p)?;
                    let dim = proj.dim();
                    let projector = (0..dim * dim).map(|k| proj.entry(k / dim, k % dim).re).collect();
                    level.push((
                        Contraction::Frame { projector },
                        coeffs.iter().map(|x| to_f64(&(x / &r_fact))).collect(),
                    ));
                }
            }
        }
        terms.push(level);
    }
    Ok(Weights { terms })
}

fn contract<T: Scalar>(kind: &Contraction, left: &[T], right: &[T], p: usize, rows: usize, r: usize) -> T {
    let n = rows * p;
    let mut acc = left[0].zero_like();
    if r == 0 {
        return left[0].mul_ref(&right[0]);
    }
    match kind {
        Contraction::Class { rep, size } => {
            for (flat, rv) in right.iter().enumerate() {
                let v = unflatten(flat, n, r);
                let moved: Vec<usize> = (0..r).map(|k| (v[k] / p) * p + v[rep.apply(k)] % p).collect();
                acc.add_assign_ref(&left[flatten(&moved, n)].mul_ref(rv));
            }
            acc.scale_by(Complex64::new(*size, 0.0))
        }
        Contraction::Frame { projector } => {
            let dim = p.pow(r as u32);
            let project = |t: &[T], a: &[usize]| -> Vec<T> {
                let gathered: Vec<&T> = (0..dim)
                    .map(|flat_i| {
                        let i = unflatten(flat_i, p, r);
                        let v: Vec<usize> = (0..r).map(|k| a[k] * p + i[k]).collect();
                        &t[flatten(&v, n)]
                    })
                    .collect();
                (0..dim)
                    .map(|row| {
                        let mut s = gathered[0].zero_like();
                        for (col, x) in gathered.iter().enumerate() {
                            let w = projector[row * dim + col];
                            if w != 0.0 {
                                s.add_assign_ref(&x.scale_by(Complex64::new(w, 0.0)));
                            }
                        }
                        s
                    })
                    .collect()
            };
            for flat_a in 0..rows.pow(r as u32) {
                let a = unflatten(flat_a, rows, r);
                let pl = project(left, &a);
                let pr = project(right, &a);
                for (x, y) in pl.iter().zip(&pr) {
                    acc.add_assign_ref(&x.mul_ref(y));
                }
            }
            acc
        }
    }
}

/// Sums the weighted pairings of lambda-series of derivative tensors.
///
/// `left[k][r]` is the `r`-th derivative tensor of the `lambda^k` coefficient
/// of the holomorphic factor, likewise `right` for the antiholomorphic one.
fn combine<T: Scalar>(left: &[Vec<Vec<T>>], right: &[Vec<Vec<T>>], w: &Weights, p: usize, rows: usize, len: usize) -> Vec<T> {
    let mut out: Vec<T> = vec![left[0][0][0].zero_like(); len];
    for (r, level) in w.terms.iter().enumerate() {
        for (kind, coeffs) in level {
            for (k1, lk) in left.iter().enumerate().take(len) {
                for (k2, rk) in right.iter().enumerate().take(len - k1) {
                    if coeffs[..len - k1 - k2].iter().all(|c| *c == 0.0) {
                        continue;
                    }
                    let pairing = contract(kind, &lk[r], &rk[r], p, rows, r);
                    for (k3, c) in coeffs.iter().enumerate().take(len - k1 - k2) {
                        if *c != 0.0 {
                            out[k1 + k2 + k3].add_assign_ref(&pairing.scale_by(Complex64::new(*c, 0.0)));
                        }
                    }
                }
            }
        }
    }
    out
}

fn plain_derivatives(obs: &dyn Observable, point: &PointZ, side: Side, order: usize) -> Result<Vec<Vec<Complex64>>> {
    let n = point.matrix().nrows() * point.p();
    check_tensor_len(n, order)?;
    let jet = observable_jet(obs, point, side, order)?;
    (0..=order).map(|r| jet.partials(0..n, r)).collect()
}

fn check_inputs(f: &dyn Observable, g: &dyn Observable, z: &PointZ, sc: &StarConfig) -> Result<()> {
    z.check_space(&sc.space)?;
    let _ = (f, g);
    Ok(())
}

/// `f * g` at `z`, as a lambda series (formal mode) or a value (fixed mode).
pub fn star_eval(f: &dyn Observable, g: &dyn Observable, z: &PointZ, sc: &StarConfig) -> Result<StarValue> {
    check_inputs(f, g, z, sc)?;
    let zeta = level_representative(z, sc.space.mu_f64())?;
    let w = weights(sc)?;
    let left = vec![plain_derivatives(f, &zeta, Side::Holomorphic, sc.order)?];
    let right = vec![plain_derivatives(g, &zeta, Side::Antiholomorphic, sc.order)?];
    let out = combine(&left, &right, &w, sc.space.p, sc.space.rows(), sc.series_len());
    Ok(match sc.mode {
        LambdaMode::Formal => StarValue::Series(LambdaSeries::from_coeffs(out, sc.order)),
        LambdaMode::Fixed(_) => StarValue::Value(out[0]),
    })
}

/// `f * g` as a function of a jet-valued point `(Z, W)` in `2n` variables,
/// the first `n` of which are the caller's. Returns one jet per lambda coefficient.
fn star_on_jets(f: &dyn Observable, g: &dyn Observable, z: &MatrixJet, w: &MatrixJet, sc: &StarConfig, weights: &Weights) -> Result<Vec<Jet>> {
    let n = sc.space.nvars();
    let (zeta, zeta_dag) = level_representative_jet(z, w, sc.space.mu_f64())?;
    let (zf, wf) = displace(&zeta, &zeta_dag, Side::Holomorphic, n)?;
    let (zg, wg) = displace(&zeta, &zeta_dag, Side::Antiholomorphic, n)?;
    let fj = f.eval_jet(&zf, &wf)?;
    let gj = g.eval_jet(&zg, &wg)?;
    let left = vec![(0..=sc.order).map(|r| fj.partial_jets(n..2 * n, r)).collect::<Result<Vec<_>>>()?];
    let right = vec![(0..=sc.order).map(|r| gj.partial_jets(n..2 * n, r)).collect::<Result<Vec<_>>>()?];
    Ok(combine(&left, &right, weights, sc.space.p, sc.space.rows(), sc.series_len()))
}

fn outer_derivatives(series: &[Jet], n: usize, order: usize) -> Result<Vec<Vec<Vec<Complex64>>>> {
    series
        .iter()
        .map(|j| (0..=order).map(|r| j.partials(0..n, r)).collect())
        .collect()
}

/// Both bracketings `(f*g)*h` and `f*(g*h)` at `z`, per lambda coefficient.
///
/// The inner product is evaluated on jets around the level representative so
/// that the outer product differentiates through the restriction to the level set.
pub fn nested_products(f: &dyn Observable, g: &dyn Observable, h: &dyn Observable, z: &PointZ, sc: &StarConfig) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    z.check_space(&sc.space)?;
    let (n, p, rows) = (sc.space.nvars(), sc.space.p, sc.space.rows());
    check_tensor_len(n, sc.order)?;
    // in formal mode a term of derivative order r starts at lambda^r, so the
    // total derivative order never exceeds the lambda order
    let jet_order = match sc.mode {
        LambdaMode::Formal => sc.order,
        LambdaMode::Fixed(_) => 2 * sc.order,
    };
    let w = weights(sc)?;
    let len = sc.series_len();
    let zeta = level_representative(z, sc.space.mu_f64())?;
    let z0 = MatrixJet::constant(zeta.matrix(), 2 * n, jet_order)?;
    let w0 = MatrixJet::constant(&zeta.matrix().adjoint(), 2 * n, jet_order)?;

    let (zl, wl) = displace(&z0, &w0, Side::Holomorphic, 0)?;
    let fg = star_on_jets(f, g, &zl, &wl, sc, &w)?;
    let left = outer_derivatives(&fg, n, sc.order)?;
    let right = vec![plain_derivatives(h, &zeta, Side::Antiholomorphic, sc.order)?];
    let lhs = combine(&left, &right, &w, p, rows, len);

    let (zr, wr) = displace(&z0, &w0, Side::Antiholomorphic, 0)?;
    let gh = star_on_jets(g, h, &zr, &wr, sc, &w)?;
    let right = outer_derivatives(&gh, n, sc.order)?;
    let left = vec![plain_derivatives(f, &zeta, Side::Holomorphic, sc.order)?];
    let rhs = combine(&left, &right, &w, p, rows, len);
    Ok((lhs, rhs))
}

/// `|((f*g)*h - f*(g*h))_k|` for each lambda coefficient `k`.
pub fn associativity_check(f: &dyn Observable, g: &dyn Observable, h: &dyn Observable, z: &PointZ, sc: &StarConfig) -> Result<Vec<f64>> {
    let (lhs, rhs) = nested_products(f, g, h, z, sc)?;
    Ok(lhs.iter().zip(&rhs).map(|(a, b)| (a - b).norm()).collect())
}

/// Closed-form product on `CP^q` (`p = 1`):
/// `sum_r lambda^r / r! prod_{s=1}^r (mu + lambda s)^{-1} x^r d^r F . dbar^r G` at `z`.
pub fn cp_star_eval(f: &dyn Observable, g: &dyn Observable, z: &PointZ, mu: &BigRational, order: usize) -> Result<LambdaSeries<Complex64>> {
    if z.p() != 1 {
        return Err(Error::InvalidInput(format!("closed form needs p = 1, got p = {}", z.p())));
    }
    if !mu.is_positive() {
        return Err(Error::InvalidInput("mu must be positive".into()));
    }
    let n = z.matrix().nrows();
    let x = gram(z)[(0, 0)].re;
    let fj = observable_jet(f, z, Side::Holomorphic, order)?;
    let gj = observable_jet(g, z, Side::Antiholomorphic, order)?;
    let mut total = LambdaSeries::zero(order);
    let mut weight = LambdaSeries::constant(BigRational::one(), order);
    for r in 0..=order {
        if r > 0 {
            // 1 / (mu + lambda r) = mu^{-1} / (1 - (-r/mu) lambda)
            let factor = LambdaSeries::geometric(&(-int(r as i64) / mu), order).scale(&mu.recip());
            weight = &weight * &factor;
        }
        let a = fj.partials(0..n, r)?;
        let b = gj.partials(0..n, r)?;
        let m_r: Complex64 = a.iter().zip(&b).map(|(u, v)| u * v).sum::<Complex64>() * x.powi(r as i32);
        let scale = 1.0 / (1..=r).map(|k| k as f64).product::<f64>();
        let mut coeffs = vec![Complex64::zero(); r];
        coeffs.extend(weight.coeffs().iter().map(|w| m_r * (to_f64(w) * scale)));
        total = &total + &LambdaSeries::from_coeffs(coeffs, order);
    }
    Ok(total)
}

/// Projection of `x^r` for `p = 1`: `prod_{s=1}^{-r} (mu + lambda s)^{-1}` for
/// negative `r`, `prod_{s=0}^{r-1} (mu - lambda s)` otherwise.
pub fn proj_x_pow(r: i64, mu: &BigRational, lambda: &BigRational) -> Result<BigRational> {
    if r >= 0 {
        return Ok((0..r).map(|s| mu - lambda * int(s)).product());
    }
    let mut acc = BigRational::one();
    for s in 1..=-r {
        let d = mu + lambda * int(s);
        if d.is_zero() {
            return Err(Error::Pole {
                frame: Frame::new(vec![(-r) as usize])?,
                c: fmt_rational(&c_of(mu, lambda, 1)?),
            });
        }
        acc /= d;
    }
    Ok(acc)
}

/// `m^{(x)r}` in the row-major multi-index convention.
pub fn kron_power(m: &DMatrix<Complex64>, r: usize) -> DMatrix<Complex64> {
    (0..r).fold(DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0)), |acc, _| acc.kronecker(m))
}

fn level_tensors(cfg: &SpaceConfig, z: &PointZ, r: usize) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    z.check_space(cfg)?;
    let zeta = level_representative(z, cfg.mu_f64())?;
    Ok((kron_power(zeta.matrix(), r), kron_power(&zeta.matrix().adjoint(), r)))
}

/// `P(S^{(x)r}) = (lambda mu)^{-r} zeta^{(x)r} rho(sum_alpha s_alpha(c) k_alpha) zeta^dagger^{(x)r}`.
pub fn proj_s_tensor(r: usize, cfg: &SpaceConfig, lambda: &BigRational, z: &PointZ) -> Result<DMatrix<Complex64>> {
    let c = c_of(&cfg.mu, lambda, cfg.p)?;
    let u = coefficient_operator(r, cfg.p, &c, CoefficientPath::Classes)?.to_matrix();
    let (k, kd) = level_tensors(cfg, z, r)?;
    let scale = to_f64(&num::pow(lambda * &cfg.mu, r)).recip();
    Ok(k * u * kd * Complex64::new(scale, 0.0))
}

/// Largest entry of `rho(sum c^{|alpha|} k_alpha) lambda^r P(S^{(x)r}) - T^{(x)r}`, `T = zeta zeta^dagger / mu`,
/// with `rho` acting on the `(p+q)`-dimensional slots.
pub fn proj_s_round_trip(r: usize, cfg: &SpaceConfig, lambda: &BigRational, z: &PointZ) -> Result<f64> {
    let c = c_of(&cfg.mu, lambda, cfg.p)?;
    let p_s = proj_s_tensor(r, cfg, lambda, z)? * Complex64::new(to_f64(&num::pow(lambda.clone(), r)), 0.0);
    let z_op = if r == 0 {
        DMatrix::identity(1, 1)
    } else {
        rho_central(&deformation_element(r, &c)?, cfg.rows())?.to_matrix()
    };
    let zeta = level_representative(z, cfg.mu_f64())?;
    let t = zeta.matrix() * zeta.matrix().adjoint() * Complex64::new(1.0 / cfg.mu_f64(), 0.0);
    Ok(max_modulus(&(z_op * p_s - kron_power(&t, r))))
}

/// `P((z z^dagger)^{(x)r}) = zeta^{(x)r} rho(sum_alpha (-lambda/mu)^{#alpha} k_alpha) zeta^dagger^{(x)r}`.
pub fn proj_zzdag_tensor(r: usize, cfg: &SpaceConfig, lambda: &BigRational, z: &PointZ) -> Result<DMatrix<Complex64>> {
    let (k, kd) = level_tensors(cfg, z, r)?;
    if r == 0 {
        return Ok(k * kd);
    }
    let ratio = -(lambda / &cfg.mu);
    let u = crate::center::CentralElement::from_fn(r, |a| num::pow(ratio.clone(), r - a.num_cycles()))?;
    let op = rho_central(&u, cfg.p)?.to_matrix();
    Ok(k * op * kd)
}

/// Largest entry modulus of a complex matrix.
pub fn max_modulus(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// One line of a verification report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check: String,
    pub params: serde_json::Value,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub pass: bool,
}

fn record(checks: &mut Vec<CheckResult>, check: &str, params: serde_json::Value, residual: f64, tolerance: f64, override_tol: Option<f64>) {
    let tolerance = override_tol.unwrap_or(tolerance);
    checks.push(CheckResult {
        check: check.into(),
        params,
        residual,
        tolerance,
        pass: residual.is_finite() && residual <= tolerance,
    });
}

fn scaled(diff: f64, scale: f64) -> f64 {
    diff / scale.max(1.0)
}

fn max_scaled_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| scaled((x - y).norm(), x.norm().max(y.norm())))
        .fold(0.0, f64::max)
}

/// Runs every identity check at a sampled point with random invariant functions.
///
/// Residuals are absolute differences divided by `max(1, |reference|)`.
/// Series checks use the formal mode of the given space, order and path; in fixed
/// mode the unit and conjugation checks are repeated at the fixed lambda.
pub fn verify_suite(sc: &StarConfig, seed: u64, tolerance: Option<f64>) -> Result<Report> {
    let cfg = &sc.space;
    let (p, n_order) = (cfg.p, sc.order);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = sample_point(cfg, seed)?;
    let dim = cfg.rows();
    let f = FunctionExpr::random(dim, &mut rng);
    let g = FunctionExpr::random(dim, &mut rng);
    let h = FunctionExpr::random(dim, &mut rng);
    let one = FunctionExpr::one();
    let formal = sc.with_mode(LambdaMode::Formal, sc.path)?;
    let base = json!({"p": p, "q": cfg.q, "mu": fmt_rational(&cfg.mu), "order": n_order, "path": sc.path.to_string()});
    let mut checks = Vec::new();

    let f_val = f.eval_point(&z)?;
    let unit_r = star_eval(&f, &one, &z, &formal)?;
    let unit_l = star_eval(&one, &f, &z, &formal)?;
    let mut expected = vec![Complex64::zero(); n_order + 1];
    expected[0] = f_val;
    let res = max_scaled_diff(unit_r.coeffs(), &expected).max(max_scaled_diff(unit_l.coeffs(), &expected));
    record(&mut checks, "unit", base.clone(), res, 1e-12, tolerance);

    let (lhs, rhs) = nested_products(&f, &g, &h, &z, &formal)?;
    let res = max_scaled_diff(&lhs, &rhs);
    record(&mut checks, "associativity", base.clone(), res, 1e-7, tolerance);

    if n_order >= 1 {
        let fg = star_eval(&f, &g, &z, &formal)?;
        let gf = star_eval(&g, &f, &z, &formal)?;
        let zeta = level_representative(&z, cfg.mu_f64())?;
        let wfg = wick_product(&f, &g, &zeta, 1)?;
        let wgf = wick_product(&g, &f, &zeta, 1)?;
        let lhs = fg.coeffs()[1] - gf.coeffs()[1];
        let rhs = wfg.coeff(1) - wgf.coeff(1);
        record(&mut checks, "first_order_commutator", base.clone(), scaled((lhs - rhs).norm(), rhs.norm()), 1e-9, tolerance);

        let mut worst: f64 = 0.0;
        for i in 0..p {
            for j in 0..p {
                let jm = MomentumEntry { i, j };
                let a = wick_product(&f, &jm, &z, 2)?;
                let b = wick_product(&jm, &f, &z, 2)?;
                let bracket = crate::geometry::poisson_bracket(&f, &jm, &z)?;
                let diff = &a - &b;
                let mut target = vec![Complex64::zero(); 3];
                target[1] = bracket * Complex64::new(0.0, 0.5);
                worst = worst.max(max_scaled_diff(diff.coeffs(), &target));
            }
        }
        record(&mut checks, "momentum_wick_commutator", base.clone(), worst, 1e-9, tolerance);
    }

    let conj_res = |s: &StarConfig| -> Result<f64> {
        let fg = star_eval(&f, &g, &z, s)?;
        let gf = star_eval(&g.conj(), &f.conj(), &z, s)?;
        let conj: Vec<Complex64> = fg.coeffs().iter().map(|c| c.conj()).collect();
        Ok(max_scaled_diff(&conj, gf.coeffs()))
    };
    record(&mut checks, "conjugation", base.clone(), conj_res(&formal)?, 1e-9, tolerance);

    // exact coefficient paths at a rational c
    let lambda_exact = match &sc.mode {
        LambdaMode::Fixed(l) if StarConfig::new(cfg.clone(), n_order, sc.mode.clone(), CoefficientPath::Classes).is_ok() => l.clone(),
        _ => &cfg.mu * int(2),
    };
    let c = c_of(&cfg.mu, &lambda_exact, p)?;
    let mut path_res: f64 = 0.0;
    let mut exact = true;
    for r in 0..=n_order.min(4) {
        if p.pow(r as u32) > crate::tensor_action::MAX_DIM {
            break;
        }
        let a = coefficient_operator(r, p, &c, CoefficientPath::Classes)?;
        let b = coefficient_operator(r, p, &c, CoefficientPath::Frames)?;
        exact &= a == b;
        path_res = path_res.max(a.max_abs_diff(&b)?);
    }
    let res = if exact { 0.0 } else { path_res.max(f64::MIN_POSITIVE) };
    record(&mut checks, "coefficient_paths", json!({"c": fmt_rational(&c), "max_r": n_order.min(4)}), res, 0.0, None);

    if p == 1 {
        let star = star_eval(&f, &g, &z, &formal)?;
        let closed = cp_star_eval(&f, &g, &z, &cfg.mu, n_order)?;
        record(&mut checks, "projective_closed_form", base.clone(), max_scaled_diff(star.coeffs(), closed.coeffs()), 1e-11, tolerance);
    }

    let mut finite = true;
    for r in 1..=n_order {
        for fr in frames_on_path(r, p, CoefficientPath::Frames)? {
            finite &= !t_value(&fr, &int(p as i64)).is_zero();
        }
    }
    let mut values = Vec::new();
    for l in [1i64, 10, 1000, 1_000_000] {
        let s = sc.with_mode(LambdaMode::Fixed(int(l)), CoefficientPath::Frames)?;
        let v = star_eval(&f, &g, &z, &s)?.coeffs()[0];
        finite &= v.re.is_finite() && v.im.is_finite();
        values.push(json!({"lambda": fmt_rational(&int(l)), "value": [v.re, v.im]}));
    }
    record(&mut checks, "large_lambda_finite", json!({"values": values}), if finite { 0.0 } else { f64::INFINITY }, 0.0, None);

    let mut rt: f64 = 0.0;
    for r in 0..=n_order.min(3) {
        if cfg.rows().pow(r as u32) > 256 {
            break;
        }
        rt = rt.max(proj_s_round_trip(r, cfg, &lambda_exact, &z)?);
    }
    record(&mut checks, "projected_s_round_trip", json!({"lambda": fmt_rational(&lambda_exact)}), rt, 1e-10, tolerance);

    let lambda = &lambda_exact;
    let mut recursion = proj_x_pow(-1, &cfg.mu, lambda)? == (&cfg.mu + lambda).recip();
    for r in 1..=6 {
        let lhs = (&cfg.mu + lambda * int(r)) * proj_x_pow(-r, &cfg.mu, lambda)?;
        recursion &= lhs == proj_x_pow(-(r - 1), &cfg.mu, lambda)?;
    }
    record(&mut checks, "projected_x_recursion", json!({"lambda": fmt_rational(lambda)}), if recursion { 0.0 } else { 1.0 }, 0.0, None);

    if let LambdaMode::Fixed(l) = &sc.mode {
        let fixed_params = json!({"lambda": fmt_rational(l), "path": sc.path.to_string()});
        let u = star_eval(&f, &one, &z, sc)?.coeffs()[0];
        record(&mut checks, "unit_fixed", fixed_params.clone(), scaled((u - f_val).norm(), f_val.norm()), 1e-12, tolerance);
        record(&mut checks, "conjugation_fixed", fixed_params, conj_res(sc)?, 1e-9, tolerance);
    }

    let pass = checks.iter().all(|c| c.pass);
    Ok(Report { seed, checks, pass })
}
