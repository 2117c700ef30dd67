use grassmann_star::center::{
    deformation_element, e_to_k, k_to_e, multiply_central, s_coeffs, CentralElement,
};
use grassmann_star::geometry::{sample_point, FunctionExpr, SpaceConfig};
use grassmann_star::jet::Jet;
use grassmann_star::partitions::{classes_of, partitions_of, Frame};
use grassmann_star::rational::{fmt_rational, int, parse_rational, rat};
use grassmann_star::series::LambdaSeries;
use grassmann_star::star::{star_eval, StarConfig};
use num::complex::Complex64;
use num::{BigRational, One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn central(r: usize, coeffs: &[i64]) -> CentralElement {
    let n = classes_of(r).unwrap().len();
    CentralElement::from_coeffs(r, (0..n).map(|k| int(coeffs[k % coeffs.len()])).collect()).unwrap()
}

fn generic_c() -> impl Strategy<Value = BigRational> {
    // odd numerators over 2 are never integers, hence never roots of any t_m
    (-40i64..40, 1i64..9).prop_map(|(a, b)| rat(2 * a + 1, 2 * b))
}

const NVARS: usize = 2;
const ORDER: usize = 3;

fn jet(c: &[(f64, f64)]) -> Jet {
    let x = Jet::var(0, Complex64::new(c[0].0, c[0].1), NVARS, ORDER).unwrap();
    let y = Jet::var(1, Complex64::new(c[1].0, c[1].1), NVARS, ORDER).unwrap();
    let xy = x.mul(&y).unwrap().scale(Complex64::new(c[2].0, c[2].1));
    let xx = x.mul(&x).unwrap().scale(Complex64::new(c[3].0, c[3].1));
    x.add(&y).unwrap().add(&xy).unwrap().add(&xx).unwrap()
}

fn jet_strategy() -> impl Strategy<Value = Jet> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 4).prop_map(|c| jet(&c))
}

fn close(a: &Jet, b: &Jet) -> bool {
    a.sub(b).unwrap().max_abs() < 1e-10
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn central_product_commutes(r in 1usize..=4, a in prop::collection::vec(-5i64..5, 1..6), b in prop::collection::vec(-5i64..5, 1..6)) {
        let (u, v) = (central(r, &a), central(r, &b));
        prop_assert_eq!(multiply_central(&u, &v).unwrap(), multiply_central(&v, &u).unwrap());
    }

    #[test]
    fn central_product_associates(r in 1usize..=4, a in prop::collection::vec(-4i64..4, 1..6), b in prop::collection::vec(-4i64..4, 1..6), c in prop::collection::vec(-4i64..4, 1..6)) {
        let (u, v, w) = (central(r, &a), central(r, &b), central(r, &c));
        let left = multiply_central(&multiply_central(&u, &v).unwrap(), &w).unwrap();
        let right = multiply_central(&u, &multiply_central(&v, &w).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn idempotent_coordinates_round_trip(r in 1usize..=6, a in prop::collection::vec(-9i64..9, 1..8)) {
        let u = central(r, &a);
        prop_assert_eq!(e_to_k(&k_to_e(&u).unwrap()).unwrap(), u);
    }

    #[test]
    fn s_inverts_deformation(r in 1usize..=5, c in generic_c()) {
        let product = multiply_central(&s_coeffs(r, &c).unwrap(), &deformation_element(r, &c).unwrap()).unwrap();
        prop_assert_eq!(product, CentralElement::identity(r).unwrap());
    }

    #[test]
    fn jets_form_a_commutative_ring(a in jet_strategy(), b in jet_strategy(), c in jet_strategy()) {
        prop_assert!(close(&a.mul(&b).unwrap(), &b.mul(&a).unwrap()));
        let ab_c = a.mul(&b).unwrap().mul(&c).unwrap();
        let a_bc = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert!(close(&ab_c, &a_bc));
        let distributed = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
        prop_assert!(close(&a.mul(&b.add(&c).unwrap()).unwrap(), &distributed));
        let one = Jet::constant(Complex64::one(), NVARS, ORDER).unwrap();
        prop_assert!(close(&a.mul(&one).unwrap(), &a));
    }

    #[test]
    fn series_inverse(coeffs in prop::collection::vec(-6i64..6, 1..6), lead in 1i64..5) {
        let mut c: Vec<BigRational> = coeffs.iter().map(|&k| int(k)).collect();
        c[0] = int(lead);
        let s = LambdaSeries::from_coeffs(c, 5);
        let product = &s * &s.inverse().unwrap();
        prop_assert_eq!(product, LambdaSeries::constant(BigRational::one(), 5));
    }

    #[test]
    fn rational_text_round_trip(n in -1000i64..1000, d in 1i64..1000) {
        let q = rat(n, d);
        prop_assert_eq!(parse_rational(&fmt_rational(&q)).unwrap(), q);
    }

    #[test]
    fn conjugate_frame_is_involution(r in 1usize..=9, k in 0usize..100) {
        let frames = partitions_of(r).unwrap();
        let f: &Frame = &frames[k % frames.len()];
        prop_assert_eq!(f.conjugate().conjugate(), f.clone());
        prop_assert_eq!(f.conjugate().weight(), r);
    }

    #[test]
    fn unit_holds_at_random_points(seed in 0u64..1000, p in 1usize..=2, q in 1usize..=2) {
        let space = SpaceConfig::new(p, q, rat(3, 2)).unwrap();
        let sc = StarConfig::formal(space.clone(), 2).unwrap();
        let z = sample_point(&space, seed).unwrap();
        let f = FunctionExpr::random(p + q, &mut ChaCha8Rng::seed_from_u64(seed));
        let s = star_eval(&f, &FunctionExpr::one(), &z, &sc).unwrap();
        let fv = f.eval_point(&z).unwrap();
        prop_assert!((s.coeffs()[0] - fv).norm() < 1e-12 * fv.norm().max(1.0));
        prop_assert!(s.coeffs()[1..].iter().all(|c| c.norm() < 1e-12));
    }

    #[test]
    fn central_zero_is_absorbing(r in 1usize..=4, a in prop::collection::vec(-5i64..5, 1..6)) {
        let u = central(r, &a);
        let zero = CentralElement::zero(r).unwrap();
        let product = multiply_central(&u, &zero).unwrap();
        prop_assert!(product.coeffs().iter().all(|c| c.is_zero()));
    }
}
