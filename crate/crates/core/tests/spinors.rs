use nullinf::spinors::*;
use proptest::prelude::*;

fn cplx() -> impl Strategy<Value = C> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| c(a, b))
}

fn spinor() -> impl Strategy<Value = Spinor> {
    (cplx(), cplx()).prop_map(|(a, b)| Spinor::new(a, b))
}

fn lorentz() -> impl Strategy<Value = Lorentz> {
    (0.0..1.5f64, -1.0..1.0f64, -1.0..1.0f64, 0.1..1.0f64, 0.0..6.0f64).prop_map(|(eta, x, y, z, angle)| {
        let boost = Lorentz::boost_to(&FourVector::boosted(eta, [x, y, z])).unwrap();
        boost.compose(&Lorentz::rotation([z, x, y], angle))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn epsilon_contraction_is_antisymmetric(a in spinor(), b in spinor()) {
        prop_assert_eq!(inner(&a, &b), -inner(&b, &a));
    }
}

proptest! {
    #[test]
    fn null_vector_is_null_and_future(s in spinor()) {
        let l = null_vector_of(&s);
        prop_assert!(l.norm_sqr().abs() < 1e-12 * l.euclid().powi(2).max(1e-300));
        prop_assert!(l.0[0] >= 0.0);
        prop_assert!((l.0[0] - (s.0[0].norm_sqr() + s.0[1].norm_sqr())).abs() < 1e-12);
    }

    #[test]
    fn null_vector_map_is_covariant(s in spinor(), lam in lorentz()) {
        let a = null_vector_of(&lam.spinor(&s));
        let b = lam.vector(&null_vector_of(&s));
        prop_assert!((a - b).euclid() < 1e-10 * (1.0 + b.euclid()));
    }

    #[test]
    fn lorentz_maps_preserve_the_metric(lam in lorentz(), x in -2.0..2.0f64, y in -2.0..2.0f64) {
        let v = FourVector::new(1.3, x, y, 0.4);
        let w = FourVector::new(-0.2, 0.7, x * y, 1.1);
        prop_assert!((lam.vector(&v).dot(&lam.vector(&w)) - v.dot(&w)).abs() < 1e-10 * (1.0 + v.euclid() * w.euclid()) * 10.0);
    }

    #[test]
    fn tensor_spinor_round_trip(f in proptest::array::uniform6(-3.0..3.0f64)) {
        let mut t = Tensor::zero();
        let mut k = 0;
        for a in 0..4 {
            for b in (a + 1)..4 {
                t.0[a][b] = f[k];
                t.0[b][a] = -f[k];
                k += 1;
            }
        }
        prop_assert!(SymSpinor::from_tensor(&t).to_tensor().sub(&t).max_abs() < 1e-13 * 10.0);
    }

    #[test]
    fn spinor_form_of_tensor_is_covariant(f in proptest::array::uniform6(-1.0..1.0f64), lam in lorentz()) {
        let mut t = Tensor::zero();
        let mut k = 0;
        for a in 0..4 {
            for b in (a + 1)..4 {
                t.0[a][b] = f[k];
                t.0[b][a] = -f[k];
                k += 1;
            }
        }
        let moved = SymSpinor::from_tensor(&lam.tensor(&t)).to_tensor();
        prop_assert!(moved.sub(&lam.tensor(&t)).max_abs() < 1e-9);
    }
}

#[test]
fn anchors_of_the_vector_spinor_convention() {
    let up = null_vector_of(&Spinor::new(c(1.0, 0.0), c(0.0, 0.0)));
    assert_eq!(up, FourVector::new(1.0, 0.0, 0.0, 1.0));
    let down = null_vector_of(&Spinor::new(c(0.0, 0.0), c(1.0, 0.0)));
    assert!((down - FourVector::new(1.0, 0.0, 0.0, -1.0)).euclid() < 1e-15);
}

#[test]
fn dirac_projectors_split_the_identity() {
    let v = FourVector::boosted(0.8, [0.3, -0.4, 0.5]);
    let (_, plus, minus) = dirac_algebra(&v).unwrap();
    assert!(plus.add(&minus).sub(&DiracOperator::identity()).max_abs() < 1e-13);
    assert!(plus.mul(&plus).sub(&plus).max_abs() < 1e-12);
    assert!(plus.mul(&minus).max_abs() < 1e-12);
}
