//! Executable invariant suites, one per library module.
//!
//! Each check runs on its own thread under a time budget; a check that runs out of time is
//! reported as such without failing the remaining ones.

use std::f64::consts::PI;
use std::fmt;
use std::sync::mpsc;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::charges::{
    angular_momentum_split, cauchy_surface_charges, is_future_causal, radiated_angular_momentum, radiated_momentum,
    radiation_budget, scattering_phase, BallQuadrature, Infinity,
};
use crate::em::{
    closed_form_q, coulomb_spacelike, longrange_vars, phi_from_sigma, reconstruction_residual, spacelike_limit,
    CurrentModel, EMAsymptoticData, FreeNews, NewsChannel, PointCharge,
};
use crate::error::{Error, Result};
use crate::hyperboloid::{
    coulomb_antisymmetry, phase_dressing, phase_field, timelike_out_charges, DiracPacket, DiracProfile,
    HyperboloidGrid, ProfileShape, Radial,
};
use crate::pulse::PulseShape;
use crate::scalar::{
    field_from_asymptotic, kirchhoff_evaluate, null_asymptote, AsymptoticProfile, ComplexShift, Direction, Ladder,
    LimitMode,
};
use crate::scenario::{run_scenario, ReportFormat, ScenarioConfig};
use crate::sphere::{HomogeneousFn, NullGrid};
use crate::spinors::{c, inner, null_vector_of, FourVector, Lorentz, Spinor, SymSpinor, Tensor, C};
use crate::worldline::Worldline;

/// Module suites in execution order.
pub const SUITES: [&str; 7] = [
    "minkowski_spinors",
    "null_sphere",
    "scalar_asymptotics",
    "em_asymptotics",
    "poincare_charges",
    "massive_hyperboloid",
    "scenario_cli",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    Timeout,
    Error(String),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub suite: String,
    pub check: String,
    pub residual: f64,
    pub tolerance: f64,
    pub status: Status,
    pub seconds: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = match &self.status {
            Status::Pass => "PASS".to_string(),
            Status::Fail => "FAIL".to_string(),
            Status::Timeout => "TIMEOUT".to_string(),
            Status::Error(e) => format!("ERROR ({e})"),
        };
        write!(
            f,
            "{:<20} {:<36} {:>11.3e} {:>11.3e} {:>8.2}s  {}",
            self.suite, self.check, self.residual, self.tolerance, self.seconds, status
        )
    }
}

/// A named check returning (residual, tolerance).
struct Check {
    name: &'static str,
    run: fn() -> Result<(f64, f64)>,
}

fn checks(suite: &str) -> Option<Vec<Check>> {
    macro_rules! list {
        ($($f:ident),* $(,)?) => { vec![$(Check { name: stringify!($f), run: $f }),*] };
    }
    Some(match suite {
        "minkowski_spinors" => list![epsilon_antisymmetry, null_vector_anchor, frame_energy_anchor, tensor_round_trip],
        "null_sphere" => list![weight_sum, inverse_square_measure, delta_line_identity, gauge_independence],
        "scalar_asymptotics" => list![null_extraction, asymptotic_rebuild, kirchhoff_agreement],
        "em_asymptotics" => list![static_longrange, kink_longrange, kink_phi_closed_form, coulomb_spacelike_limit],
        "poincare_charges" => list![
            gaussian_news_energy,
            isotropic_news_spin,
            sourceless_budget_closure,
            mixing_by_parts,
            existence_detection,
            cauchy_oracle,
        ],
        "massive_hyperboloid" => {
            list![hyperboloid_measure, packet_positivity, dressing_transfer, coulomb_antisymmetry_check, phase_identity]
        }
        "scenario_cli" => list![report_determinism],
        _ => return None,
    })
}

/// Runs a suite ("all" runs every suite) giving each check `budget` of wall time.
pub fn verify_suite(name: &str, budget: Duration) -> Result<Vec<CheckResult>> {
    let names: Vec<&str> = if name == "all" { SUITES.to_vec() } else { vec![name] };
    let mut out = Vec::new();
    for suite in names {
        let list = checks(suite).ok_or_else(|| Error::Config(format!("unknown suite {suite}")))?;
        for check in list {
            out.push(run_check(suite, check, budget));
        }
    }
    Ok(out)
}

fn run_check(suite: &str, check: Check, budget: Duration) -> CheckResult {
    let (tx, rx) = mpsc::channel();
    let start = Instant::now();
    let run = check.run;
    std::thread::spawn(move || {
        let _ = tx.send(run());
    });
    let (residual, tolerance, status) = match rx.recv_timeout(budget) {
        Ok(Ok((r, tol))) => (r, tol, if r <= tol { Status::Pass } else { Status::Fail }),
        Ok(Err(e)) => (f64::NAN, f64::NAN, Status::Error(e.to_string())),
        Err(_) => (f64::NAN, f64::NAN, Status::Timeout),
    };
    CheckResult {
        suite: suite.to_string(),
        check: check.name.to_string(),
        residual,
        tolerance,
        status,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed)
}

fn rand_c(r: &mut ChaCha8Rng) -> C {
    c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))
}

fn rand_spacelike(r: &mut ChaCha8Rng) -> FourVector {
    loop {
        let y = FourVector::new(
            r.random_range(-1.0..1.0),
            r.random_range(-2.0..2.0),
            r.random_range(-2.0..2.0),
            r.random_range(-2.0..2.0),
        );
        if y.norm_sqr() < -0.1 {
            return y;
        }
    }
}

fn kink_data(charge: C, rapidity: f64) -> Result<(EMAsymptoticData, FourVector, FourVector)> {
    let u1 = FourVector::boosted(rapidity, [0.0, 0.0, 1.0]);
    let u2 = FourVector::boosted(rapidity, [0.0, 0.0, -1.0]);
    let w = Worldline::new(FourVector([0.0; 4]), &[u1, u2], &[0.5])?;
    let model = CurrentModel::PointCharges(vec![PointCharge { worldline: w, charge }]);
    Ok((EMAsymptoticData::with_sources(model, None, &FourVector::time())?, u1, u2))
}

fn sphere() -> Result<NullGrid> {
    NullGrid::new(&FourVector::time(), 24, 48)
}

// minkowski_spinors

fn epsilon_antisymmetry() -> Result<(f64, f64)> {
    let mut r = rng();
    let mut worst = 0.0_f64;
    for _ in 0..10_000 {
        let a = Spinor::new(rand_c(&mut r), rand_c(&mut r));
        let b = Spinor::new(rand_c(&mut r), rand_c(&mut r));
        worst = worst.max((inner(&a, &b) + inner(&b, &a)).norm());
    }
    Ok((worst, 0.0))
}

fn null_vector_anchor() -> Result<(f64, f64)> {
    let l = null_vector_of(&Spinor::new(c(1.0, 0.0), c(0.0, 0.0)));
    Ok(((l - FourVector::new(1.0, 0.0, 0.0, 1.0)).euclid(), 1e-15))
}

fn frame_energy_anchor() -> Result<(f64, f64)> {
    let mut r = rng();
    let t = FourVector::boosted(0.8, [0.3, -0.5, 0.2]);
    let frame = Lorentz::boost_to(&t)?;
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let xi = Spinor::new(rand_c(&mut r), rand_c(&mut r));
        let expected = xi.0[0].norm_sqr() + xi.0[1].norm_sqr();
        let l = null_vector_of(&frame.spinor(&xi));
        worst = worst.max((t.dot(&l) - expected).abs() / expected);
    }
    Ok((worst, 1e-13))
}

fn tensor_round_trip() -> Result<(f64, f64)> {
    let mut r = rng();
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let mut f = Tensor::zero();
        for a in 0..4 {
            for b in (a + 1)..4 {
                let x = r.random_range(-1.0..1.0);
                f.0[a][b] = x;
                f.0[b][a] = -x;
            }
        }
        worst = worst.max(SymSpinor::from_tensor(&f).to_tensor().sub(&f).max_abs());
    }
    Ok((worst, 1e-13))
}

// null_sphere

fn weight_sum() -> Result<(f64, f64)> {
    let g = NullGrid::new(&FourVector::boosted(0.7, [0.0, 1.0, 0.0]), 24, 48)?;
    Ok(((g.weights.iter().sum::<f64>() - 4.0 * PI).abs(), 1e-12))
}

fn inverse_square_measure() -> Result<(f64, f64)> {
    let g = NullGrid::new(&FourVector::time(), 48, 96)?;
    let mut worst = 0.0_f64;
    for eta in [0.0, 0.5, 1.0, 2.0] {
        let v = FourVector::boosted(eta, [0.6, 0.0, 0.8]);
        let val = g.integrate_with(|n| 1.0 / v.dot(&n.l).powi(2));
        worst = worst.max((val - 4.0 * PI).abs());
    }
    Ok((worst, 1e-9))
}

fn delta_line_identity() -> Result<(f64, f64)> {
    let g = sphere()?;
    let t = g.t;
    let mut r = rng();
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let y = rand_spacelike(&mut r);
        let val: f64 = g.integrate_delta_line(&y, 256, |_| 1.0)?;
        let exact = 2.0 * PI / (y.dot(&t).powi(2) - y.norm_sqr()).sqrt();
        worst = worst.max((val - exact).abs());
    }
    Ok((worst, 1e-8))
}

fn gauge_independence() -> Result<(f64, f64)> {
    let v = FourVector::boosted(0.9, [0.0, 0.6, 0.8]);
    let w = FourVector::boosted(0.4, [1.0, 0.0, 0.0]);
    let f = HomogeneousFn::new(-2, -2, move |o| {
        let l = null_vector_of(o);
        c(1.0 / (v.dot(&l) * w.dot(&l)), 0.0)
    });
    let a = sphere()?.integrate(&f)?;
    let b = NullGrid::new(&FourVector::boosted(0.6, [0.0, 0.0, 1.0]), 24, 48)?.integrate(&f)?;
    Ok(((a - b).norm(), 1e-9))
}

// scalar_asymptotics

fn timelike_bs() -> [FourVector; 3] {
    [
        FourVector::new(1.2, 0.2, 0.0, 0.1),
        FourVector::new(1.0, -0.3, 0.4, 0.0),
        FourVector::new(1.5, 0.0, 0.5, -0.6),
    ]
}

fn null_extraction() -> Result<(f64, f64)> {
    let x = FourVector::new(0.3, -0.2, 0.1, 0.4);
    let l = FourVector::new(1.0, 0.48, 0.6, 0.64);
    let mut worst = 0.0_f64;
    for b in timelike_bs() {
        let est = null_asymptote(|y| ComplexShift::field(&b, y), &x, &l, LimitMode::Future, &Ladder::default())?;
        let expected = 1.0 / (c(x.dot(&l), -b.dot(&l)) * 2.0);
        worst = worst.max((est.value - expected).norm());
    }
    Ok((worst, 1e-6))
}

fn rebuild_points() -> Vec<FourVector> {
    let mut r = rng();
    (0..50)
        .map(|_| {
            FourVector::new(
                r.random_range(-1.0..1.0),
                r.random_range(-1.0..1.0),
                r.random_range(-1.0..1.0),
                r.random_range(-1.0..1.0),
            )
        })
        .collect()
}

fn asymptotic_rebuild() -> Result<(f64, f64)> {
    let g = NullGrid::new(&FourVector::time(), 32, 64)?;
    let mut worst = 0.0_f64;
    for b in timelike_bs() {
        let p = AsymptoticProfile::new(ComplexShift::future(b), FourVector::time(), 1.0, Direction::Future);
        for x in rebuild_points() {
            let a = field_from_asymptotic(&p, &g, &x)?;
            worst = worst.max((a.value - ComplexShift::field(&b, &x)).norm());
        }
    }
    Ok((worst, 1e-8))
}

fn kirchhoff_agreement() -> Result<(f64, f64)> {
    let g = NullGrid::new(&FourVector::time(), 32, 64)?;
    let mut worst = 0.0_f64;
    for b in timelike_bs() {
        let eta = ComplexShift::cone_data(b);
        let p = AsymptoticProfile::new(ComplexShift::future(b), FourVector::time(), 1.0, Direction::Future);
        for x in [FourVector::new(2.0, 0.1, -0.3, 0.2), FourVector::new(1.5, 0.4, 0.2, -0.5)] {
            let k = kirchhoff_evaluate(&eta, &g, &x)?;
            worst = worst.max((k - field_from_asymptotic(&p, &g, &x)?.value).norm());
        }
    }
    Ok((worst, 1e-6))
}

// em_asymptotics

fn longrange_defects(data: &EMAsymptoticData, q0: C) -> Result<f64> {
    let g = sphere()?;
    let vars = longrange_vars(data, &g)?;
    let model = data.sources.as_ref().expect("sourced data");
    let mut worst = vars.defects.mean_q.max(vars.defects.constraint);
    worst = worst.max((vars.charge - q0).norm());
    for (n, q) in g.nodes.iter().zip(&vars.samples.q) {
        worst = worst.max((closed_form_q(model, &n.o).0 - q).norm());
    }
    Ok(worst)
}

fn static_longrange() -> Result<(f64, f64)> {
    let data = EMAsymptoticData::coulomb(c(1.0, 0.0), &FourVector::time(), None)?;
    Ok((longrange_defects(&data, c(1.0, 0.0))?, 1e-8))
}

fn kink_longrange() -> Result<(f64, f64)> {
    let (data, _, _) = kink_data(c(0.8, 0.0), 1.0)?;
    let g = sphere()?;
    let vars = longrange_vars(&data, &g)?;
    Ok((longrange_defects(&data, c(0.8, 0.0))?.max(reconstruction_residual(&vars, &g)? * 1e-2), 1e-8))
}

fn kink_phi_closed_form() -> Result<(f64, f64)> {
    let (data, u1, u2) = kink_data(c(0.8, 0.0), 1.0)?;
    let g = sphere()?;
    let vars = longrange_vars(&data, &g)?;
    let phi = phi_from_sigma(&g, &vars.samples.sigma, c(0.0, 0.0))?;
    let vals: Vec<C> = g.nodes.iter().map(|n| phi.eval(&n.o)).collect();
    let target: Vec<C> = g.nodes.iter().map(|n| c(0.8 * (u1.dot(&n.l) / u2.dot(&n.l)).ln(), 0.0)).collect();
    let mv = g.integrate_samples(&vals) * (1.0 / (4.0 * PI));
    let mt = g.integrate_samples(&target) * (1.0 / (4.0 * PI));
    let worst = vals.iter().zip(&target).map(|(a, b)| (a - mv - (b - mt)).norm()).fold(0.0, f64::max);
    Ok((worst, 1e-6))
}

fn coulomb_spacelike_limit() -> Result<(f64, f64)> {
    let t = FourVector::time();
    let data = EMAsymptoticData::coulomb(c(1.0, -0.3), &t, None)?;
    let g = sphere()?;
    let mut r = rng();
    let mut worst = 0.0_f64;
    for _ in 0..10 {
        let y = rand_spacelike(&mut r);
        let f = spacelike_limit(data.future.as_ref(), &g, &y, 256)?;
        worst = worst.max(f.sub(&coulomb_spacelike(c(1.0, -0.3), &t, &y)?).max_abs());
    }
    Ok((worst, 1e-6))
}

// poincare_charges

fn isotropic_news() -> Result<FreeNews> {
    FreeNews::isotropic(&FourVector::time(), PulseShape::gaussian(1.0, 0.0, 1.0), 12.0)
}

fn gaussian_news_energy() -> Result<(f64, f64)> {
    let g = NullGrid::new(&FourVector::time(), 16, 32)?;
    let data = EMAsymptoticData::free(isotropic_news()?);
    let p = radiated_momentum(&data, &g, Infinity::Future)?;
    Ok(((p.0[0] - 2.0 * (PI / 2.0).sqrt()).abs(), 1e-6))
}

fn isotropic_news_spin() -> Result<(f64, f64)> {
    let g = NullGrid::new(&FourVector::time(), 16, 32)?;
    let data = EMAsymptoticData::free(isotropic_news()?);
    let m = radiated_angular_momentum(&data, &g, Infinity::Future, &FourVector([0.0; 4]))?;
    Ok((m.tensor().max_abs(), 1e-8))
}

fn asymmetric_news() -> Result<FreeNews> {
    FreeNews::new(
        &FourVector::time(),
        vec![
            NewsChannel { shape: PulseShape::gaussian(1.0, 0.0, 1.0), polarization: [c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)] },
            NewsChannel { shape: PulseShape::gaussian(0.6, 2.0, 1.0), polarization: [c(0.0, 0.0), c(0.3, 0.0), c(1.0, 0.2)] },
        ],
    )
}

fn sourceless_budget_closure() -> Result<(f64, f64)> {
    let g = NullGrid::new(&FourVector::time(), 24, 48)?;
    let data = EMAsymptoticData::free(asymmetric_news()?);
    let b = radiation_budget(&data, &g, None)?;
    let causal = if is_future_causal(&b.out_total.momentum, 1e-12) { 0.0 } else { 1.0 };
    Ok((b.momentum_defect.max(causal), 1e-7))
}

fn mixing_by_parts() -> Result<(f64, f64)> {
    let (data, _, _) = kink_data(c(0.8, 0.0), 1.0)?;
    let g = sphere()?;
    let vars = longrange_vars(&data, &g)?;
    let phi = phi_from_sigma(&g, &vars.samples.sigma, c(0.0, 0.0))?;
    let split = angular_momentum_split(&data, &vars, &phi, &g)?;
    Ok((split.by_parts, 1e-7))
}

fn pair_existence(a: C, b: C) -> Result<f64> {
    let t = FourVector::time();
    let w1 = Worldline::new(
        FourVector([0.0; 4]),
        &[FourVector::boosted(0.8, [0.0, 0.0, 1.0]), FourVector::boosted(0.8, [0.0, 0.0, -1.0])],
        &[0.5],
    )?;
    let w2 = Worldline::new(
        FourVector::new(0.0, 1.0, 0.0, 0.0),
        &[FourVector::boosted(0.5, [0.0, 1.0, 0.0]), FourVector::boosted(0.9, [1.0, 0.0, 0.0])],
        &[0.7],
    )?;
    let model = CurrentModel::PointCharges(vec![
        PointCharge { worldline: w1, charge: a },
        PointCharge { worldline: w2, charge: b },
    ]);
    let data = EMAsymptoticData::with_sources(model, None, &t)?;
    Ok(radiation_budget(&data, &sphere()?, None)?.existence)
}

fn existence_detection() -> Result<(f64, f64)> {
    let equal = pair_existence(c(1.0, -0.5), c(-0.6, 0.3))?;
    let mixed = pair_existence(c(1.0, -0.5), c(0.6, 0.3))?;
    // detection counts as a residual of zero, missing it as the distance from the threshold
    let detection = if mixed > 1e-2 { 0.0 } else { 1e-2 - mixed };
    Ok((equal.max(detection), 1e-8))
}

fn cauchy_oracle() -> Result<(f64, f64)> {
    let g = NullGrid::new(&FourVector::time(), 24, 48)?;
    let news = asymmetric_news()?;
    let data = EMAsymptoticData::free(news.clone());
    let origin = FourVector([0.0; 4]);
    let p = radiated_momentum(&data, &g, Infinity::Future)?;
    let mu_out = radiated_angular_momentum(&data, &g, Infinity::Future, &origin)?.tensor();
    let mu_in = radiated_angular_momentum(&data, &g, Infinity::Past, &origin)?.tensor();
    let mu = mu_out.add(&mu_in).scale(0.5);
    let radii = [3.0, 6.0, 12.0, 24.0];
    let quad = BallQuadrature::default();
    let at0 = cauchy_surface_charges(&news, &g, 0.0, &radii, &quad)?;
    let at1 = cauchy_surface_charges(&news, &g, 0.5, &radii, &quad)?;
    let defects: Vec<f64> = at0
        .iter()
        .map(|k| (k.momentum - p).euclid().max(k.angular.sub(&mu).max_abs()))
        .collect();
    let monotone = defects.windows(2).all(|w| w[1] <= w[0]);
    // the ball charges approach their limit as r⁻³; compare the extrapolated limits
    let limit = |k: &[crate::charges::CauchyCharges]| {
        let (a, b) = (&k[k.len() - 2], &k[k.len() - 1]);
        ((b.momentum * 8.0 - a.momentum) * (1.0 / 7.0), b.angular.scale(8.0).sub(&a.angular).scale(1.0 / 7.0))
    };
    let (p0, m0) = limit(&at0);
    let (p1, m1) = limit(&at1);
    let offset = (p0 - p1).euclid().max(m0.sub(&m1).max_abs());
    let final_defect = *defects.last().expect("four rungs");
    if !monotone {
        return Ok((f64::INFINITY, 1e-3));
    }
    // offset independence is held to 1e−5, the final defect to 1e−3
    Ok((final_defect.max(offset * 100.0), 1e-3))
}

// massive_hyperboloid

fn hyperboloid_measure() -> Result<(f64, f64)> {
    let t = FourVector::time();
    let center = FourVector::boosted(0.6, [0.0, 1.0, 0.0]);
    let g = HyperboloidGrid::new(&center, Radial::Tanh { u_max: 1.0 }, 60, 24, 48)?;
    let val = g.integrate(|v| 1.0 / t.dot(v).powi(4));
    Ok(((val - 4.0 * PI / 3.0).abs(), 1e-6))
}

fn test_packet(width: f64, res: (usize, usize, usize)) -> Result<DiracPacket> {
    let z0 = FourVector::boosted(0.4, [0.0, 1.0, 0.0]);
    let spinor = [[1.0, 0.0], [0.0, 0.5], [0.3, 0.0], [0.0, -0.2]];
    let shape = ProfileShape::GaussianBump { center: z0.0, width, spinor };
    DiracPacket::new(DiracProfile { shape, mass: 1.0, coupling: 1.0 }, res, true)
}

fn kink_phi() -> HomogeneousFn {
    let u1 = FourVector::boosted(1.0, [0.0, 0.0, 1.0]);
    let u2 = FourVector::boosted(1.0, [0.0, 0.0, -1.0]);
    HomogeneousFn::new(0, 0, move |o| {
        let l = null_vector_of(o);
        c((u1.dot(&l) / u2.dot(&l)).ln(), 0.0)
    })
}

fn packet_positivity() -> Result<(f64, f64)> {
    Ok((test_packet(0.5, (24, 12, 24))?.positivity_residual()?, 1e-10))
}

fn dressing_transfer() -> Result<(f64, f64)> {
    let packet = Arc::new(test_packet(0.5, (48, 16, 32))?);
    let g = sphere()?;
    let phi = kink_phi();
    let base = timelike_out_charges(&packet)?;
    let dressed = phase_dressing(packet.clone(), phi.clone(), g.clone());
    let model = CurrentModel::DiracPacket(packet.clone());
    let q: Vec<C> = g.nodes.iter().map(|n| closed_form_q(&model, &n.o).0).collect();
    let mix = crate::charges::mixing_term(&q, &phi, &g)?.to_tensor();
    let dm = dressed.charges()?.angular.sub(&base.angular);
    Ok((dm.sub(&mix).max_abs(), 1e-5))
}

fn coulomb_antisymmetry_check() -> Result<(f64, f64)> {
    let packet = test_packet(0.5, (16, 8, 16))?;
    let mut worst = 0.0_f64;
    for lambda in [10.0, 100.0] {
        let (a, b) = coulomb_antisymmetry(&packet, lambda);
        worst = worst.max(a.max_abs()).max(b.max_abs());
    }
    Ok((worst, 1e-9))
}

fn phase_identity() -> Result<(f64, f64)> {
    let g = sphere()?;
    let phi = kink_phi();
    let z = FourVector::boosted(0.7, [0.3, 0.2, 0.9]);
    let h = phase_field(&phi, 1.0, &g, &z);
    let delta = scattering_phase(1.0, &z, &phi, &g);
    Ok(((-2.0 * h.re - delta).abs(), 1e-8))
}

// scenario_cli

const DETERMINISM_CONFIG: &str = r#"
[grid]
sphere = [24, 48]

[scenario]
kind = "particle-kink"
charge = [0.8, 0.0]
rapidity = 1.0
"#;

fn report_determinism() -> Result<(f64, f64)> {
    let cfg = ScenarioConfig::from_toml(DETERMINISM_CONFIG)?;
    let mut texts = Vec::new();
    for threads in [1, 2, 8] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        let text = pool.install(|| run_scenario(&cfg).and_then(|r| r.render(ReportFormat::Table)))?;
        texts.push(text);
    }
    let differing = texts.windows(2).filter(|w| w[0] != w[1]).count();
    Ok((differing as f64, 0.0))
}
