use std::f64::consts::PI;

use nullinf::em::*;
use nullinf::sphere::NullGrid;
use nullinf::spinors::*;
use nullinf::worldline::Worldline;
use proptest::prelude::*;

fn grid() -> NullGrid {
    NullGrid::new(&FourVector::time(), 24, 48).unwrap()
}

fn kink(charge: C, rapidity: f64, axis: [f64; 3]) -> (EMAsymptoticData, FourVector, FourVector) {
    let out = FourVector::boosted(rapidity, axis);
    let back = FourVector::boosted(rapidity, axis.map(|a| -a));
    let w = Worldline::new(FourVector([0.0; 4]), &[out, back], &[0.5]).unwrap();
    let model = CurrentModel::PointCharges(vec![PointCharge { worldline: w, charge }]);
    (EMAsymptoticData::with_sources(model, None, &FourVector::time()).unwrap(), out, back)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn kink_longrange_variables_match_closed_forms(
        re in -1.5..1.5f64,
        im in -1.0..1.0f64,
        rapidity in 0.2..1.2f64,
        ax in -1.0..1.0f64,
        az in 0.2..1.0f64,
    ) {
        let charge = c(re, im);
        let (data, _, _) = kink(charge, rapidity, [ax, 0.0, az]);
        let g = grid();
        let vars = longrange_vars(&data, &g).unwrap();
        let model = data.sources.as_ref().unwrap();
        prop_assert!(vars.defects.mean_q < 1e-8 && vars.defects.mean_q_past < 1e-8);
        prop_assert!(vars.defects.mean_sigma < 1e-8 && vars.defects.mean_sigma_past < 1e-8);
        prop_assert!(vars.defects.constraint < 1e-8);
        for (k, n) in g.nodes.iter().enumerate() {
            let (q, q_past) = closed_form_q(model, &n.o);
            prop_assert!((vars.samples.q[k] - q).norm() < 1e-8);
            prop_assert!((vars.samples.q_past[k] - q_past).norm() < 1e-8);
        }
    }
}

#[test]
fn static_charge_has_no_free_part() {
    let t = FourVector::boosted(0.5, [1.0, 0.0, 0.0]);
    let data = EMAsymptoticData::coulomb(c(0.7, 0.2), &t, None).unwrap();
    let vars = longrange_vars(&data, &grid()).unwrap();
    assert!(vars.samples.sigma.iter().all(|s| s.norm() < 1e-10));
    assert!((vars.charge - c(0.7, 0.2)).norm() < 1e-14);
    assert!(vars.defects.mean_q < 1e-8);
}

#[test]
fn infrared_potential_is_the_log_of_velocity_ratios() {
    let charge = 1.3;
    let (data, out, back) = kink(c(charge, 0.0), 0.6, [0.0, 1.0, 0.0]);
    let g = grid();
    let vars = longrange_vars(&data, &g).unwrap();
    let phi = phi_from_sigma(&g, &vars.samples.sigma, ZERO).unwrap();
    let vals: Vec<C> = g.nodes.iter().map(|n| phi.eval(&n.o)).collect();
    let target: Vec<C> = g.nodes.iter().map(|n| c(charge * (out.dot(&n.l) / back.dot(&n.l)).ln(), 0.0)).collect();
    let mean = |v: &[C]| g.integrate_samples(v) * (1.0 / (4.0 * PI));
    let (mv, mt) = (mean(&vals), mean(&target));
    for (a, b) in vals.iter().zip(&target) {
        assert!((a - mv - (b - mt)).norm() < 1e-6, "{a} {b}");
    }
    assert!(phi_residual(&phi, &data, &g) < 1e-6);
    assert!(phi_round_trip(&phi, &g, &vars.samples.sigma) < 1e-8);
}

#[test]
fn outgoing_data_is_rebuilt_from_the_charges() {
    let (data, _, _) = kink(c(0.8, -0.4), 1.0, [0.0, 0.0, 1.0]);
    let g = grid();
    let vars = longrange_vars(&data, &g).unwrap();
    assert!(reconstruction_residual(&vars, &g).unwrap() < 1e-6);
}

#[test]
fn coulomb_spacelike_limit_for_a_moving_frame() {
    let t = FourVector::boosted(0.8, [0.0, 0.6, 0.8]);
    let charge = c(1.0, -0.3);
    let data = EMAsymptoticData::coulomb(charge, &t, None).unwrap();
    let g = grid();
    for y in [FourVector::new(0.2, 1.0, 0.0, 0.0), FourVector::new(-0.5, 0.3, 1.1, -0.4), FourVector::new(0.9, 0.0, 0.0, 1.5)] {
        let f = spacelike_limit(data.future.as_ref(), &g, &y, 256).unwrap();
        let exact = coulomb_spacelike(charge, &t, &y).unwrap();
        assert!(f.sub(&exact).max_abs() < 1e-6);
    }
}

#[test]
fn dyad_is_normalized() {
    let t = FourVector::boosted(1.1, [0.3, -0.2, 0.5]);
    for n in grid().nodes.iter().step_by(37) {
        assert!((dyad_normalization(&n.o, &t) - c(1.0, 0.0)).norm() < 1e-12);
    }
}

#[test]
fn magnetic_charge_is_imaginary() {
    assert_eq!(magnetic_charge(2.0), c(0.0, -2.0));
}
