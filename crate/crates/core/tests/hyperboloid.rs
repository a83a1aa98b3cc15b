use std::f64::consts::PI;
use std::sync::Arc;

use nullinf::charges::scattering_phase;
use nullinf::hyperboloid::*;
use nullinf::sphere::{HomogeneousFn, NullGrid};
use nullinf::spinors::*;
use proptest::prelude::*;

const SPINOR: [[f64; 2]; 4] = [[1.0, 0.0], [0.0, 0.5], [0.3, 0.0], [0.0, -0.2]];

fn sphere() -> NullGrid {
    NullGrid::new(&FourVector::time(), 24, 48).unwrap()
}

fn kink_phi() -> HomogeneousFn {
    let out = FourVector::boosted(1.0, [0.0, 0.0, 1.0]);
    let back = FourVector::boosted(1.0, [0.0, 0.0, -1.0]);
    HomogeneousFn::new(0, 0, move |o| {
        let l = null_vector_of(o);
        c((out.dot(&l) / back.dot(&l)).ln(), 0.0)
    })
}

fn packet(shape: ProfileShape, res: (usize, usize, usize)) -> DiracPacket {
    DiracPacket::new(DiracProfile { shape, mass: 1.0, coupling: 1.0 }, res, true).unwrap()
}

fn centre() -> FourVector {
    FourVector::boosted(0.4, [0.0, 1.0, 0.0])
}

#[test]
fn measure_integrates_the_inverse_fourth_power() {
    let t = FourVector::time();
    for center in [t, FourVector::boosted(0.6, [0.0, 1.0, 0.0]), FourVector::boosted(1.0, [1.0, -1.0, 0.5])] {
        let g = HyperboloidGrid::new(&center, Radial::Tanh { u_max: 1.0 }, 60, 24, 48).unwrap();
        let val = g.integrate(|v| 1.0 / t.dot(v).powi(4));
        assert!((val - 4.0 * PI / 3.0).abs() < 1e-6, "{val}");
    }
}

#[test]
fn normalized_packets_have_unit_norm_and_positive_density() {
    let shapes = [
        ProfileShape::GaussianBump { center: centre().0, width: 0.5, spinor: SPINOR },
        ProfileShape::PlusEigenpacket { center: centre().0, width: 0.4, spinor: SPINOR },
        ProfileShape::TwoBump {
            first: centre().0,
            second: FourVector::boosted(0.5, [1.0, 0.0, 0.0]).0,
            width: 0.4,
            spinor_a: SPINOR,
            spinor_b: [[0.0, 1.0], [0.4, 0.0], [0.0, 0.0], [0.1, 0.1]],
        },
    ];
    for shape in shapes {
        let p = packet(shape, (24, 12, 24));
        assert!((p.norm_sqr() - 1.0).abs() < 1e-12);
        assert!((p.charge() - p.coupling()).abs() < 1e-12);
        assert!(p.positivity_residual().unwrap() < 1e-10);
        assert!(p.grid.nodes.iter().all(|v| p.density(v) >= 0.0));
    }
}

#[test]
fn eigenpacket_momentum_points_along_its_centre() {
    let width = 0.3;
    let p = packet(ProfileShape::PlusEigenpacket { center: centre().0, width, spinor: SPINOR }, PACKET_RESOLUTION);
    let charges = timelike_out_charges(&p).unwrap();
    let m = charges.momentum.norm_sqr().sqrt();
    assert!(rapidity_between(&(charges.momentum * (1.0 / m)), &centre()) < width);
    assert!(m / p.mass() - 1.0 < width * width);
    assert!(m >= p.mass() - 1e-9);
    assert!(charges.imaginary < 1e-8 && charges.tangency < 1e-6);
}

#[test]
fn coulomb_double_integrals_are_antisymmetric() {
    let p = packet(ProfileShape::GaussianBump { center: centre().0, width: 0.5, spinor: SPINOR }, (16, 8, 16));
    for lambda in [10.0, 1e3] {
        let (a, b) = coulomb_antisymmetry(&p, lambda);
        assert!(a.max_abs() < 1e-9 && b.max_abs() < 1e-9);
    }
}

#[test]
fn dressing_is_a_pure_phase() {
    let p = Arc::new(packet(ProfileShape::GaussianBump { center: centre().0, width: 0.5, spinor: SPINOR }, (24, 12, 24)));
    let d = phase_dressing(p.clone(), kink_phi(), sphere());
    assert!(d.norm_change().abs() < 1e-12);
    assert!(d.phase.iter().all(|h| h.im.abs() < 1e-12));
    let z = p.grid.nodes[7];
    let ratio = d.amplitude(&z).0[0] / p.amplitude(&z).0[0];
    assert!((ratio.norm() - 1.0).abs() < 1e-12);
}

#[test]
fn dressing_moves_angular_momentum_by_its_mixing_tensor() {
    let p = Arc::new(packet(ProfileShape::GaussianBump { center: centre().0, width: 0.5, spinor: SPINOR }, PACKET_RESOLUTION));
    let d = phase_dressing(p.clone(), kink_phi(), sphere());
    let base = timelike_out_charges(&p).unwrap();
    let dressed = d.charges().unwrap();
    assert!((dressed.momentum - base.momentum).euclid() < 1e-5);
    let moved = dressed.angular.sub(&base.angular);
    assert!(moved.sub(&d.mixing_tensor()).max_abs() < 1e-5);
}

#[test]
fn asymptote_error_falls_with_distance() {
    let p = packet(ProfileShape::GaussianBump { center: centre().0, width: 0.5, spinor: SPINOR }, (32, 12, 24));
    let z = centre();
    let err = |lambda: f64| {
        let psi = dirac_packet(&p, &(z * lambda)).unwrap();
        let asy = packet_asymptote(&p, &z, lambda).unwrap();
        (projector_density(&z, &psi.sub(&asy)).unwrap() / projector_density(&z, &asy).unwrap()).sqrt()
    };
    let (e1, e2) = (err(10.0), err(20.0));
    assert!(e2 < e1, "{e1} {e2}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn phase_field_gives_the_scattering_phase(eta in 0.0..1.5f64, x in -1.0..1.0f64, y in -1.0..1.0f64, zc in 0.1..1.0f64, e in -2.0..2.0f64) {
        let z = FourVector::boosted(eta, [x, y, zc]);
        let phi = kink_phi();
        let g = sphere();
        let h = phase_field(&phi, e, &g, &z);
        prop_assert!((-2.0 * h.re - scattering_phase(e, &z, &phi, &g)).abs() < 1e-8);
    }

    #[test]
    fn phase_gradient_matches_differences(eta in 0.0..1.2f64, x in -1.0..1.0f64, y in -1.0..1.0f64, zc in 0.1..1.0f64) {
        let z = FourVector::boosted(eta, [x, y, zc]);
        let phi = kink_phi();
        let g = sphere();
        let (_, jet) = phase_jet(&phi, 1.0, &g, &z);
        let fd = tangential_derivative(&|v: &FourVector| phase_field(&phi, 1.0, &g, v), &z, 1e-3);
        for b in 0..4 {
            prop_assert!((jet[b] - fd[b]).norm() < 1e-7, "{} {}", jet[b], fd[b]);
        }
    }
}
