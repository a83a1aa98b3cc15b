//! Electromagnetic fields described by their characteristic data ζ_A(s, o) at null infinity.
//!
//! A profile ζ_A is a lower-index spinor field of homogeneity ζ_A(αᾱs, αo, ᾱō) = α⁻¹ζ_A
//! with ζ^A o_A = Q. Free data have Q = 0 and ζ_A = o_A ζ(s, o) with a scalar ζ.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::harmonics::SphereSeries;
use crate::hyperboloid::DiracPacket;
use crate::pulse::PulseShape;
use crate::quadrature::{pairwise_sum, richardson, Accum, CVec};
use crate::scalar::Ladder;
use crate::sphere::{d_primed, d_unprimed, HomogeneousFn, Node, NullGrid};
use crate::spinors::{
    c, dual, null_vector_of, outer_conj, vector_on_conj, CoSpinor, ComplexVector, FourVector, Lorentz, Mat2,
    Spinor, SymSpinor, Tensor, C, EPS01, I, ONE, ZERO,
};
use crate::worldline::Worldline;

/// ι^A = t^{AA'}ō_{A'}/(t·l): the dyad partner of o normalized against o in the gauge of t.
pub fn iota(o: &Spinor, t: &FourVector) -> Spinor {
    let tl = t.dot(&null_vector_of(o));
    vector_on_conj(t, o).scale(c(1.0 / tl, 0.0))
}

/// ζ^A o_A for a lower-index ζ.
pub fn charge_of(zeta: &CoSpinor, o: &Spinor) -> C {
    o.lower().contract(&zeta.raise())
}

/// Mixed spinor with two lower indices, stored [A][A'].
pub type Mixed = [[C; 2]; 2];

/// ∂_{A'} of a lower-index spinor function, stored [A][A'].
pub fn primed_jacobian<F: Fn(&Spinor) -> CoSpinor>(f: &F, o: &Spinor) -> Mixed {
    let g = |s: &Spinor| CVec(f(s).0);
    let d = d_primed(&g, o);
    [[d[0].0[0], d[1].0[0]], [d[0].0[1], d[1].0[1]]]
}

/// Splits ∂_{A'}ζ_A = o_A ν_{A'} + residual, returning ν and the residual size.
pub fn split_transverse(j: &Mixed, o: &Spinor, io: &Spinor) -> ([C; 2], f64) {
    let ol = o.lower();
    let nu: [C; 2] = std::array::from_fn(|ap| io.0[0] * j[0][ap] + io.0[1] * j[1][ap]);
    let mut res = 0.0_f64;
    for a in 0..2 {
        for ap in 0..2 {
            res = res.max((j[a][ap] - ol.0[a] * nu[ap]).norm());
        }
    }
    (nu, res)
}

fn fd_nu<F: Fn(&Spinor) -> CoSpinor>(f: &F, o: &Spinor, t: &FourVector) -> [C; 2] {
    split_transverse(&primed_jacobian(f, o), o, &iota(o, t)).0
}

fn sub2(a: [C; 2], b: [C; 2]) -> [C; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

/// Characteristic data of an electromagnetic field along one null infinity.
pub trait SpinorProfile: Send + Sync {
    /// ζ_A(s, o).
    fn value(&self, s: f64, o: &Spinor) -> CoSpinor;
    /// ∂_s ζ_A.
    fn rate(&self, s: f64, o: &Spinor) -> CoSpinor;
    /// ∂²_s ζ_A; central differences of `rate` unless overridden.
    fn accel(&self, s: f64, o: &Spinor) -> CoSpinor {
        let h = 1e-3 * self.resolution() * o.norm().powi(2);
        let f = |d: f64| self.rate(s + d, o);
        f(h).sub(&f(-h)).scale(c(8.0, 0.0)).sub(&f(2.0 * h).sub(&f(-2.0 * h))).scale(c(1.0 / (12.0 * h), 0.0))
    }
    /// (ζ_A(−∞), ζ_A(+∞)).
    fn limits(&self, o: &Spinor) -> (CoSpinor, CoSpinor);
    /// Interval of s outside which ζ̇ vanishes to working precision; `None` when ζ is
    /// independent of s.
    fn window(&self, o: &Spinor) -> Option<(f64, f64)>;
    /// ν_{A'} = ι^A∂_{A'}ζ_A at fixed s; finite differences unless overridden.
    fn nu(&self, s: f64, o: &Spinor, t: &FourVector) -> [C; 2] {
        fd_nu(&|x: &Spinor| self.value(s, x), o, t)
    }
    /// (ν(−∞), ν(+∞)) from the limits.
    fn nu_limits(&self, o: &Spinor, t: &FourVector) -> ([C; 2], [C; 2]) {
        (fd_nu(&|x: &Spinor| self.limits(x).0, o, t), fd_nu(&|x: &Spinor| self.limits(x).1, o, t))
    }
    /// Values of s inside the window where ζ̇ may fail to be smooth.
    fn breaks(&self, _o: &Spinor) -> Vec<f64> {
        Vec::new()
    }
    /// Smallest s-scale of the profile in t-gauge units.
    fn resolution(&self) -> f64 {
        1.0
    }
}

/// Coulomb characteristic ζ_A = Q ι_A, the same at both null infinities.
#[derive(Clone, Copy, Debug)]
pub struct CoulombProfile {
    pub charge: C,
    pub t: FourVector,
}

impl SpinorProfile for CoulombProfile {
    fn value(&self, _s: f64, o: &Spinor) -> CoSpinor {
        iota(o, &self.t).lower().scale(self.charge)
    }
    fn rate(&self, _s: f64, _o: &Spinor) -> CoSpinor {
        CoSpinor::zero()
    }
    fn accel(&self, _s: f64, _o: &Spinor) -> CoSpinor {
        CoSpinor::zero()
    }
    fn limits(&self, o: &Spinor) -> (CoSpinor, CoSpinor) {
        let v = self.value(0.0, o);
        (v, v)
    }
    fn window(&self, _o: &Spinor) -> Option<(f64, f64)> {
        None
    }
}

/// One dipole channel of outgoing news: g(s/(t·l)) (m̄·k)/(t·l) with m̄^a = ι^A ō^{A'}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewsChannel {
    pub shape: PulseShape,
    /// Rest-frame components of the complex polarization vector k.
    pub polarization: [C; 3],
}

/// Free outgoing data ζ_A = o_A ζ(s, o) built from dipole channels in the gauge of t.
#[derive(Clone, Debug)]
pub struct FreeNews {
    pub t: FourVector,
    pub channels: Vec<NewsChannel>,
    vectors: Vec<ComplexVector>,
}

impl FreeNews {
    pub fn new(t: &FourVector, channels: Vec<NewsChannel>) -> Result<Self> {
        let frame = Lorentz::boost_to(t).map_err(|_| Error::invalid("free_news", "gauge vector is not unit timelike"))?;
        let axes = [1, 2, 3].map(|i| {
            let mut e = [0.0; 4];
            e[i] = 1.0;
            frame.vector(&FourVector(e)).complexify()
        });
        for ch in &channels {
            let (_, w) = ch.shape.scale();
            if !(w > 0.0) {
                return Err(Error::invalid("free_news", "pulse widths must be positive"));
            }
        }
        let vectors = channels
            .iter()
            .map(|ch| (0..3).fold(ComplexVector::zero(), |acc, i| acc.add(&axes[i].scale(ch.polarization[i]))))
            .collect();
        Ok(FreeNews { t: *t, channels, vectors })
    }

    /// Three real linear channels along the rest axes of t, delayed by `spacing` from one
    /// another so that their pulses do not overlap. The summed intensity Σ|m̄·e_k|² = 1 makes
    /// the energy flux isotropic.
    pub fn isotropic(t: &FourVector, shape: PulseShape, spacing: f64) -> Result<Self> {
        let chans = (0..3)
            .map(|k| {
                let mut pol = [ZERO; 3];
                pol[k] = ONE;
                NewsChannel { shape: shape.shifted((k as f64 - 1.0) * spacing), polarization: pol }
            })
            .collect();
        FreeNews::new(t, chans)
    }

    fn weights(&self, o: &Spinor) -> (f64, Vec<C>) {
        let tl = self.t.dot(&null_vector_of(o));
        let io = iota(o, &self.t);
        let mbar = ComplexVector::from_upper(&outer_conj(&io, o));
        (tl, self.vectors.iter().map(|k| mbar.dot(k)).collect())
    }

    /// Derivative of the scalar ζ(s, o) of the given order (0..=2).
    pub fn scalar(&self, s: f64, o: &Spinor, order: usize) -> C {
        let (tl, w) = self.weights(o);
        let u = s / tl;
        let terms: Vec<C> = self
            .channels
            .iter()
            .zip(&w)
            .map(|(ch, wk)| *wk * (ch.shape.derivatives(u)[order] / tl.powi(order as i32 + 1)))
            .collect();
        pairwise_sum(&terms)
    }

    /// ∂_{A'}(w_k/(t·l)) for every channel and ∂_{A'}(t·l).
    fn weight_gradients(&self, o: &Spinor) -> (Vec<[C; 2]>, [C; 2]) {
        let tau = |x: &Spinor| c(self.t.dot(&null_vector_of(x)), 0.0);
        let dtau = d_primed(&tau, o);
        let dw = (0..self.channels.len())
            .map(|k| {
                let h = |x: &Spinor| {
                    let (tl, w) = self.weights(x);
                    w[k] / tl
                };
                d_primed(&h, o)
            })
            .collect();
        (dw, dtau)
    }

    /// ∂_{A'}ζ(s, o) at fixed s, with the s-dependence differentiated in closed form.
    pub fn scalar_gradient(&self, s: f64, o: &Spinor) -> [C; 2] {
        let (tl, w) = self.weights(o);
        let (dw, dtau) = self.weight_gradients(o);
        let u = s / tl;
        let mut out = [ZERO; 2];
        for (k, ch) in self.channels.iter().enumerate() {
            let d = ch.shape.derivatives(u);
            for i in 0..2 {
                // ∂u = −s ∂τ/τ²
                out[i] += dw[k][i] * d[0] - w[k] / tl * d[1] * s * dtau[i] / (tl * tl);
            }
        }
        out
    }

    /// (ζ(−∞, o), ζ(+∞, o)) of the scalar profile.
    pub fn scalar_limits(&self, o: &Spinor) -> (C, C) {
        let (tl, w) = self.weights(o);
        let mut lo = ZERO;
        let mut hi = ZERO;
        for (ch, wk) in self.channels.iter().zip(&w) {
            let (a, b) = ch.shape.limits();
            lo += *wk * (a / tl);
            hi += *wk * (b / tl);
        }
        (lo, hi)
    }

    /// Support of ζ̇ in t-gauge.
    pub fn support(&self) -> Option<(f64, f64)> {
        self.channels.iter().map(|ch| ch.shape.support()).reduce(|a, b| (a.0.min(b.0), a.1.max(b.1)))
    }

    pub fn min_width(&self) -> f64 {
        self.channels.iter().map(|ch| ch.shape.scale().1).fold(f64::INFINITY, f64::min)
    }

    /// The same channels with every polarization conjugated and amplitudes scaled.
    pub fn scaled(&self, k: C) -> Self {
        let chans = self
            .channels
            .iter()
            .map(|ch| NewsChannel { shape: ch.shape, polarization: ch.polarization.map(|p| p * k) })
            .collect();
        FreeNews::new(&self.t, chans).expect("validated gauge")
    }
}

impl SpinorProfile for FreeNews {
    fn value(&self, s: f64, o: &Spinor) -> CoSpinor {
        o.lower().scale(self.scalar(s, o, 0))
    }
    fn rate(&self, s: f64, o: &Spinor) -> CoSpinor {
        o.lower().scale(self.scalar(s, o, 1))
    }
    fn accel(&self, s: f64, o: &Spinor) -> CoSpinor {
        o.lower().scale(self.scalar(s, o, 2))
    }
    fn nu(&self, s: f64, o: &Spinor, _t: &FourVector) -> [C; 2] {
        self.scalar_gradient(s, o)
    }
    fn nu_limits(&self, o: &Spinor, _t: &FourVector) -> ([C; 2], [C; 2]) {
        let (dw, _) = self.weight_gradients(o);
        let mut lo = [ZERO; 2];
        let mut hi = [ZERO; 2];
        for (k, ch) in self.channels.iter().enumerate() {
            let (a, b) = ch.shape.limits();
            for i in 0..2 {
                lo[i] += dw[k][i] * a;
                hi[i] += dw[k][i] * b;
            }
        }
        (lo, hi)
    }
    fn limits(&self, o: &Spinor) -> (CoSpinor, CoSpinor) {
        let (a, b) = self.scalar_limits(o);
        (o.lower().scale(a), o.lower().scale(b))
    }
    fn window(&self, o: &Spinor) -> Option<(f64, f64)> {
        let tl = self.t.dot(&null_vector_of(o));
        self.support().map(|(a, b)| (a * tl, b * tl))
    }
    fn resolution(&self) -> f64 {
        self.min_width()
    }
}

/// A point charge moving along a worldline.
#[derive(Clone, Debug)]
pub struct PointCharge {
    pub worldline: Worldline,
    pub charge: C,
}

/// Sources of the field.
#[derive(Clone, Debug)]
pub enum CurrentModel {
    PointCharges(Vec<PointCharge>),
    DiracPacket(Arc<DiracPacket>),
    StaticCoulomb { charge: C, t: FourVector, anchor: FourVector },
}

fn lowered_over(v: &FourVector, o: &Spinor) -> (Spinor, f64) {
    let vl = v.dot(&null_vector_of(o));
    (vector_on_conj(v, o).scale(c(1.0 / vl, 0.0)), vl)
}

impl CurrentModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            CurrentModel::PointCharges(ps) if ps.is_empty() => {
                Err(Error::invalid("current_model", "no point charges given"))
            }
            CurrentModel::DiracPacket(p) => {
                if p.norm_sqr() > 0.0 {
                    Ok(())
                } else {
                    Err(Error::invalid("current_model", "Dirac profile is not normalizable"))
                }
            }
            CurrentModel::StaticCoulomb { t, .. } if !t.is_unit_timelike(1e-9) => {
                Err(Error::invalid("current_model", "static charge velocity is not unit timelike"))
            }
            _ => Ok(()),
        }
    }

    /// Total charge.
    pub fn charge(&self) -> C {
        match self {
            CurrentModel::PointCharges(ps) => ps.iter().map(|p| p.charge).sum(),
            CurrentModel::DiracPacket(p) => c(p.charge(), 0.0),
            CurrentModel::StaticCoulomb { charge, .. } => *charge,
        }
    }

    /// Upper-index characteristic c^A at (s, o) together with its s-derivative.
    fn upper(&self, s: f64, o: &Spinor) -> Result<(Spinor, Spinor)> {
        let l = null_vector_of(o);
        match self {
            CurrentModel::PointCharges(ps) => {
                let mut val = Spinor::zero();
                let mut rate = Spinor::zero();
                for p in ps {
                    let tau = p.worldline.retarded_time(&l, s)?;
                    let (_, v, a) = p.worldline.state(tau);
                    let (vo, vl) = lowered_over(&v, o);
                    val = val.add(&vo.scale(p.charge));
                    let al = a.dot(&l);
                    if al != 0.0 || a.euclid() != 0.0 {
                        let ao = vector_on_conj(&a, o).scale(c(1.0 / vl, 0.0));
                        let d = ao.add(&vo.scale(c(-al / vl, 0.0))).scale(p.charge / vl);
                        rate = rate.add(&d);
                    }
                }
                Ok((val, rate))
            }
            CurrentModel::DiracPacket(p) => {
                let terms: Vec<CVec<2>> = p
                    .currents()
                    .iter()
                    .map(|(v, w)| CVec(lowered_over(v, o).0.scale(c(*w, 0.0)).0))
                    .collect();
                Ok((Spinor(pairwise_sum(&terms).0), Spinor::zero()))
            }
            CurrentModel::StaticCoulomb { charge, t, .. } => Ok((iota(o, t).scale(*charge), Spinor::zero())),
        }
    }

    fn limit_upper(&self, o: &Spinor) -> (Spinor, Spinor) {
        match self {
            CurrentModel::PointCharges(ps) => {
                let mut lo = Spinor::zero();
                let mut hi = Spinor::zero();
                for p in ps {
                    lo = lo.add(&lowered_over(&p.worldline.velocity_in(), o).0.scale(p.charge));
                    hi = hi.add(&lowered_over(&p.worldline.velocity_out(), o).0.scale(p.charge));
                }
                (lo, hi)
            }
            _ => {
                let v = self.upper(0.0, o).expect("s-independent model").0;
                (v, v)
            }
        }
    }

    fn window(&self, o: &Spinor) -> Option<(f64, f64)> {
        let CurrentModel::PointCharges(ps) = self else { return None };
        let l = null_vector_of(o);
        ps.iter()
            .filter(|p| !p.worldline.is_inertial())
            .map(|p| {
                let (a, b) = p.worldline.knots();
                (l.dot(&a), l.dot(&b))
            })
            .reduce(|a, b| (a.0.min(b.0), a.1.max(b.1)))
    }

    /// Retarded-time window in t-gauge from a fixed set of directions, used for panel sizes.
    fn scale(&self) -> f64 {
        match self {
            CurrentModel::PointCharges(ps) => ps
                .iter()
                .filter(|p| !p.worldline.is_inertial())
                .map(|p| {
                    let (a, b) = p.worldline.knots();
                    (b - a).euclid()
                })
                .fold(f64::INFINITY, f64::min)
                .clamp(1e-3, 1.0),
            _ => 1.0,
        }
    }
}

/// (c_A(s, o), Q) with Q = c^A o_A.
pub fn current_characteristic(model: &CurrentModel, s: f64, o: &Spinor) -> Result<(CoSpinor, C)> {
    let (up, _) = model.upper(s, o)?;
    Ok((up.lower(), o.lower().contract(&up)))
}

/// Retarded characteristic of a current model as a profile.
#[derive(Clone, Debug)]
pub struct SourceProfile {
    pub model: CurrentModel,
}

impl SpinorProfile for SourceProfile {
    fn value(&self, s: f64, o: &Spinor) -> CoSpinor {
        self.model.upper(s, o).map(|(v, _)| v.lower()).unwrap_or_else(|_| CoSpinor([C::new(f64::NAN, 0.0); 2]))
    }
    fn rate(&self, s: f64, o: &Spinor) -> CoSpinor {
        self.model.upper(s, o).map(|(_, r)| r.lower()).unwrap_or_else(|_| CoSpinor([C::new(f64::NAN, 0.0); 2]))
    }
    fn limits(&self, o: &Spinor) -> (CoSpinor, CoSpinor) {
        let (a, b) = self.model.limit_upper(o);
        (a.lower(), b.lower())
    }
    fn window(&self, o: &Spinor) -> Option<(f64, f64)> {
        self.model.window(o)
    }
    fn breaks(&self, o: &Spinor) -> Vec<f64> {
        let CurrentModel::PointCharges(ps) = &self.model else { return Vec::new() };
        let l = null_vector_of(o);
        ps.iter()
            .filter(|p| !p.worldline.is_inertial())
            .flat_map(|p| p.worldline.corners())
            .map(|z| l.dot(&z))
            .collect()
    }
    fn resolution(&self) -> f64 {
        self.model.scale()
    }
}

/// Past data ζ′(s) = ζ(−∞) − ζ(s) of a free field given by its future data ζ.
#[derive(Clone)]
pub struct Reflected(pub Arc<dyn SpinorProfile>);

impl SpinorProfile for Reflected {
    fn value(&self, s: f64, o: &Spinor) -> CoSpinor {
        self.0.limits(o).0.sub(&self.0.value(s, o))
    }
    fn rate(&self, s: f64, o: &Spinor) -> CoSpinor {
        self.0.rate(s, o).scale(-ONE)
    }
    fn accel(&self, s: f64, o: &Spinor) -> CoSpinor {
        self.0.accel(s, o).scale(-ONE)
    }
    fn nu(&self, s: f64, o: &Spinor, t: &FourVector) -> [C; 2] {
        sub2(self.0.nu_limits(o, t).0, self.0.nu(s, o, t))
    }
    fn nu_limits(&self, o: &Spinor, t: &FourVector) -> ([C; 2], [C; 2]) {
        let (lo, hi) = self.0.nu_limits(o, t);
        ([ZERO; 2], sub2(lo, hi))
    }
    fn limits(&self, o: &Spinor) -> (CoSpinor, CoSpinor) {
        let (lo, hi) = self.0.limits(o);
        (CoSpinor::zero(), lo.sub(&hi))
    }
    fn window(&self, o: &Spinor) -> Option<(f64, f64)> {
        self.0.window(o)
    }
    fn breaks(&self, o: &Spinor) -> Vec<f64> {
        self.0.breaks(o)
    }
    fn resolution(&self) -> f64 {
        self.0.resolution()
    }
}

/// The s-independent profile equal to the early-time limit of another profile.
#[derive(Clone)]
pub struct EarlyLimit(pub Arc<dyn SpinorProfile>);

impl SpinorProfile for EarlyLimit {
    fn value(&self, _s: f64, o: &Spinor) -> CoSpinor {
        self.0.limits(o).0
    }
    fn rate(&self, _s: f64, _o: &Spinor) -> CoSpinor {
        CoSpinor::zero()
    }
    fn accel(&self, _s: f64, _o: &Spinor) -> CoSpinor {
        CoSpinor::zero()
    }
    fn nu(&self, _s: f64, o: &Spinor, t: &FourVector) -> [C; 2] {
        self.0.nu_limits(o, t).0
    }
    fn nu_limits(&self, o: &Spinor, t: &FourVector) -> ([C; 2], [C; 2]) {
        let v = self.0.nu_limits(o, t).0;
        (v, v)
    }
    fn limits(&self, o: &Spinor) -> (CoSpinor, CoSpinor) {
        let v = self.0.limits(o).0;
        (v, v)
    }
    fn window(&self, _o: &Spinor) -> Option<(f64, f64)> {
        None
    }
}

/// A profile minus its late-time limit: o_A ζ^out(s).
#[derive(Clone)]
pub struct Detrended(pub Arc<dyn SpinorProfile>);

impl SpinorProfile for Detrended {
    fn value(&self, s: f64, o: &Spinor) -> CoSpinor {
        self.0.value(s, o).sub(&self.0.limits(o).1)
    }
    fn rate(&self, s: f64, o: &Spinor) -> CoSpinor {
        self.0.rate(s, o)
    }
    fn accel(&self, s: f64, o: &Spinor) -> CoSpinor {
        self.0.accel(s, o)
    }
    fn nu(&self, s: f64, o: &Spinor, t: &FourVector) -> [C; 2] {
        sub2(self.0.nu(s, o, t), self.0.nu_limits(o, t).1)
    }
    fn nu_limits(&self, o: &Spinor, t: &FourVector) -> ([C; 2], [C; 2]) {
        let (lo, hi) = self.0.nu_limits(o, t);
        (sub2(lo, hi), [ZERO; 2])
    }
    fn limits(&self, o: &Spinor) -> (CoSpinor, CoSpinor) {
        let (lo, hi) = self.0.limits(o);
        (lo.sub(&hi), CoSpinor::zero())
    }
    fn window(&self, o: &Spinor) -> Option<(f64, f64)> {
        self.0.window(o)
    }
    fn breaks(&self, o: &Spinor) -> Vec<f64> {
        self.0.breaks(o)
    }
    fn resolution(&self) -> f64 {
        self.0.resolution()
    }
}

/// A profile seen from the origin a: ζ^{(a)}(s, o) = ζ(s + a·l, o).
#[derive(Clone)]
pub struct Translated {
    pub inner: Arc<dyn SpinorProfile>,
    pub origin: FourVector,
}

impl SpinorProfile for Translated {
    fn value(&self, s: f64, o: &Spinor) -> CoSpinor {
        self.inner.value(s + self.origin.dot(&null_vector_of(o)), o)
    }
    fn rate(&self, s: f64, o: &Spinor) -> CoSpinor {
        self.inner.rate(s + self.origin.dot(&null_vector_of(o)), o)
    }
    fn accel(&self, s: f64, o: &Spinor) -> CoSpinor {
        self.inner.accel(s + self.origin.dot(&null_vector_of(o)), o)
    }
    fn nu(&self, s: f64, o: &Spinor, t: &FourVector) -> [C; 2] {
        let shift = |x: &Spinor| c(self.origin.dot(&null_vector_of(x)), 0.0);
        let d = d_primed(&shift, o);
        let s1 = s + self.origin.dot(&null_vector_of(o));
        let rate = self.inner.rate(s1, o).contract(&iota(o, t));
        let base = self.inner.nu(s1, o, t);
        [base[0] + rate * d[0], base[1] + rate * d[1]]
    }
    fn nu_limits(&self, o: &Spinor, t: &FourVector) -> ([C; 2], [C; 2]) {
        self.inner.nu_limits(o, t)
    }
    fn limits(&self, o: &Spinor) -> (CoSpinor, CoSpinor) {
        self.inner.limits(o)
    }
    fn window(&self, o: &Spinor) -> Option<(f64, f64)> {
        let al = self.origin.dot(&null_vector_of(o));
        self.inner.window(o).map(|(a, b)| (a - al, b - al))
    }
    fn breaks(&self, o: &Spinor) -> Vec<f64> {
        let al = self.origin.dot(&null_vector_of(o));
        self.inner.breaks(o).into_iter().map(|s| s - al).collect()
    }
    fn resolution(&self) -> f64 {
        self.inner.resolution()
    }
}

/// Sum of profiles.
#[derive(Clone)]
pub struct SumProfile(pub Vec<Arc<dyn SpinorProfile>>);

impl SpinorProfile for SumProfile {
    fn value(&self, s: f64, o: &Spinor) -> CoSpinor {
        self.0.iter().fold(CoSpinor::zero(), |acc, p| acc.add(&p.value(s, o)))
    }
    fn rate(&self, s: f64, o: &Spinor) -> CoSpinor {
        self.0.iter().fold(CoSpinor::zero(), |acc, p| acc.add(&p.rate(s, o)))
    }
    fn accel(&self, s: f64, o: &Spinor) -> CoSpinor {
        self.0.iter().fold(CoSpinor::zero(), |acc, p| acc.add(&p.accel(s, o)))
    }
    fn nu(&self, s: f64, o: &Spinor, t: &FourVector) -> [C; 2] {
        self.0.iter().fold([ZERO; 2], |acc, p| {
            let v = p.nu(s, o, t);
            [acc[0] + v[0], acc[1] + v[1]]
        })
    }
    fn nu_limits(&self, o: &Spinor, t: &FourVector) -> ([C; 2], [C; 2]) {
        self.0.iter().fold(([ZERO; 2], [ZERO; 2]), |acc, p| {
            let (a, b) = p.nu_limits(o, t);
            ([acc.0[0] + a[0], acc.0[1] + a[1]], [acc.1[0] + b[0], acc.1[1] + b[1]])
        })
    }
    fn limits(&self, o: &Spinor) -> (CoSpinor, CoSpinor) {
        self.0.iter().fold((CoSpinor::zero(), CoSpinor::zero()), |acc, p| {
            let (a, b) = p.limits(o);
            (acc.0.add(&a), acc.1.add(&b))
        })
    }
    fn window(&self, o: &Spinor) -> Option<(f64, f64)> {
        self.0.iter().filter_map(|p| p.window(o)).reduce(|a, b| (a.0.min(b.0), a.1.max(b.1)))
    }
    fn breaks(&self, o: &Spinor) -> Vec<f64> {
        self.0.iter().flat_map(|p| p.breaks(o)).collect()
    }
    fn resolution(&self) -> f64 {
        self.0.iter().map(|p| p.resolution()).fold(f64::INFINITY, f64::min)
    }
}

/// Future and past characteristic data of one field.
#[derive(Clone)]
pub struct EMAsymptoticData {
    pub future: Arc<dyn SpinorProfile>,
    pub past: Arc<dyn SpinorProfile>,
    pub charge: C,
    pub gauge: FourVector,
    /// Sources of the retarded part, if any.
    pub sources: Option<CurrentModel>,
    /// Future data of the free part, if any.
    pub free: Option<FreeNews>,
}

/// Audit of the structural invariants of characteristic data.
#[derive(Clone, Copy, Debug, Default)]
pub struct DataAudit {
    /// max |ζ^A o_A − Q| over sampled (s, node), both infinities.
    pub charge: f64,
    /// max |ζ(−∞) − ζ′(+∞)|.
    pub matching: f64,
    /// max |ζ(s) − declared limit| at the window edges.
    pub limits: f64,
}

impl EMAsymptoticData {
    /// Sourceless field with the given outgoing data.
    pub fn free(news: FreeNews) -> Self {
        let fut: Arc<dyn SpinorProfile> = Arc::new(news.clone());
        EMAsymptoticData {
            past: Arc::new(Reflected(fut.clone())),
            future: fut,
            charge: ZERO,
            gauge: news.t,
            sources: None,
            free: Some(news),
        }
    }

    /// Retarded field of `model` plus an optional free field given by its future data.
    pub fn with_sources(model: CurrentModel, free: Option<FreeNews>, gauge: &FourVector) -> Result<Self> {
        model.validate()?;
        if !gauge.is_unit_timelike(1e-9) {
            return Err(Error::invalid("em_data", "gauge vector is not unit timelike"));
        }
        let src: Arc<dyn SpinorProfile> = Arc::new(SourceProfile { model: model.clone() });
        let mut fut: Vec<Arc<dyn SpinorProfile>> = vec![src.clone()];
        let mut past: Vec<Arc<dyn SpinorProfile>> = vec![Arc::new(EarlyLimit(src))];
        if let Some(n) = &free {
            let p: Arc<dyn SpinorProfile> = Arc::new(n.clone());
            past.push(Arc::new(Reflected(p.clone())));
            fut.push(p);
        }
        Ok(EMAsymptoticData {
            future: Arc::new(SumProfile(fut)),
            past: Arc::new(SumProfile(past)),
            charge: model.charge(),
            gauge: *gauge,
            sources: Some(model),
            free,
        })
    }

    /// Coulomb field of a charge at rest with velocity t, plus an optional free part.
    pub fn coulomb(charge: C, t: &FourVector, free: Option<FreeNews>) -> Result<Self> {
        EMAsymptoticData::with_sources(
            CurrentModel::StaticCoulomb { charge, t: *t, anchor: FourVector([0.0; 4]) },
            free,
            t,
        )
    }

    /// ν_{A'} = ι^A ∂_{A'}ζ_A at (s, o) for the future data.
    pub fn nu(&self, s: f64, o: &Spinor) -> [C; 2] {
        self.future.nu(s, o, &self.gauge)
    }

    /// Checks ζ^A o_A = Q, ζ(−∞) = ζ′(+∞) and the declared limits against the profile
    /// values at the ends of its window.
    pub fn audit(&self, grid: &NullGrid) -> Result<DataAudit> {
        let step = (grid.len() / 48).max(1);
        let mut audit = DataAudit::default();
        for k in (0..grid.len()).step_by(step) {
            let o = grid.nodes[k].o;
            for prof in [&self.future, &self.past] {
                let (lo, hi) = prof.limits(&o);
                let ss: Vec<f64> = match prof.window(&o) {
                    Some((a, b)) => (0..=8).map(|i| a + (b - a) * i as f64 / 8.0).collect(),
                    None => vec![0.0],
                };
                for s in ss {
                    audit.charge = audit.charge.max((charge_of(&prof.value(s, &o), &o) - self.charge).norm());
                }
                audit.charge = audit.charge.max((charge_of(&lo, &o) - self.charge).norm());
                audit.charge = audit.charge.max((charge_of(&hi, &o) - self.charge).norm());
                if let Some((a, b)) = prof.window(&o) {
                    let margin = (b - a).max(1.0);
                    audit.limits = audit.limits.max(prof.value(a - margin, &o).sub(&lo).max_abs());
                    audit.limits = audit.limits.max(prof.value(b + margin, &o).sub(&hi).max_abs());
                }
            }
            let m = self.future.limits(&o).0.sub(&self.past.limits(&o).1).max_abs();
            audit.matching = audit.matching.max(m);
        }
        if !(audit.charge < 1e-9) {
            return Err(Error::invariant("em_data", format!("ζ^A o_A deviates from Q by {:.3e}", audit.charge)));
        }
        if !(audit.matching < 1e-9) {
            return Err(Error::invariant("em_data", format!("ζ(−∞) and ζ′(+∞) differ by {:.3e}", audit.matching)));
        }
        if !(audit.limits < 1e-5) {
            return Err(Error::invariant(
                "em_data",
                format!("declared limits disagree with the profile by {:.3e}", audit.limits),
            ));
        }
        Ok(audit)
    }
}

/// ν_{A'} = ι^A ∂_{A'}ζ_A at fixed s, with the size of the part of ∂_{A'}ζ_A not of the form o_A ν_{A'}.
pub fn nu_of(profile: &dyn SpinorProfile, s: f64, o: &Spinor, t: &FourVector) -> ([C; 2], f64) {
    let j = primed_jacobian(&|x: &Spinor| profile.value(s, x), o);
    split_transverse(&j, o, &iota(o, t))
}

/// ν at s = −∞ from the declared limits.
pub fn nu_early(profile: &dyn SpinorProfile, o: &Spinor, t: &FourVector) -> ([C; 2], f64) {
    let j = primed_jacobian(&|x: &Spinor| profile.limits(x).0, o);
    split_transverse(&j, o, &iota(o, t))
}

// ---------------------------------------------------------------------------------------------
// Free fields

/// φ_AB and φ̂_{AA'} of a free field at one point.
#[derive(Clone, Copy, Debug)]
pub struct FreeField {
    pub phi: SymSpinor,
    /// φ̂_{AA'} stored [A][A'].
    pub phi_hat: Mixed,
    /// max |φ̂_{AA'} − φ_AB x^B_{A'}|.
    pub consistency: f64,
}

/// Quadrature settings for free-field evaluation by retarded-time bands.
#[derive(Clone, Copy, Debug)]
pub struct FieldQuadrature {
    pub nodes_per_panel: usize,
    pub n_phi: usize,
}

impl Default for FieldQuadrature {
    fn default() -> Self {
        FieldQuadrature { nodes_per_panel: 12, n_phi: 24 }
    }
}

/// x^B_{A'} = ε^{BC} x_{CA'}, stored [B][A'].
fn raise_first(x: &Mat2) -> Mixed {
    let e = 1.0 / EPS01;
    [[x.0[1][0] * e, x.0[1][1] * e], [-x.0[0][0] * e, -x.0[0][1] * e]]
}

fn consistency(phi: &SymSpinor, hat: &Mixed, x: &FourVector) -> f64 {
    let xu = raise_first(&x.to_lower());
    let mut worst = 0.0_f64;
    for a in 0..2 {
        for ap in 0..2 {
            let v = phi.get(a, 0) * xu[0][ap] + phi.get(a, 1) * xu[1][ap];
            worst = worst.max((v - hat[a][ap]).norm());
        }
    }
    worst
}

fn field_integrand(news: &FreeNews, x: &FourVector, n: &Node) -> CVec<7> {
    let s = x.dot(&n.l);
    let acc = news.scalar(s, &n.o, 2);
    let ol = n.o.lower();
    let rate = |o: &Spinor| news.scalar(s, o, 1);
    let d = d_primed(&rate, &n.o);
    CVec([
        ol.0[0] * ol.0[0] * acc,
        ol.0[0] * ol.0[1] * acc,
        ol.0[1] * ol.0[1] * acc,
        ol.0[0] * d[0],
        ol.0[0] * d[1],
        ol.0[1] * d[0],
        ol.0[1] * d[1],
    ])
}

fn assemble(v: CVec<7>, x: &FourVector) -> FreeField {
    let k = c(-1.0 / (2.0 * PI), 0.0);
    let phi = SymSpinor([v.0[0] * k, v.0[1] * k, v.0[2] * k]);
    let phi_hat = [[v.0[3] * k, v.0[4] * k], [v.0[5] * k, v.0[6] * k]];
    let consistency = consistency(&phi, &phi_hat, x);
    FreeField { phi, phi_hat, consistency }
}

/// φ_AB(x) = −(1/2π)∫o_A o_B ζ̈(x·l) dl and φ̂_{AA'}(x) = −(1/2π)∫o_A ∂_{A'}ζ̇(x·l) dl.
///
/// The sphere is cut into bands about the rest-frame direction of x so that only the
/// directions with x·l inside the support of ζ̇ are sampled.
pub fn news_field(news: &FreeNews, grid: &NullGrid, x: &FourVector, quad: &FieldQuadrature) -> Result<FreeField> {
    let v = news_bands(news, grid, x, quad, |n| field_integrand(news, x, n))?;
    Ok(assemble(v, x))
}

/// φ_AB alone, skipping the spin derivative needed for φ̂.
pub fn news_field_strength(news: &FreeNews, grid: &NullGrid, x: &FourVector, quad: &FieldQuadrature) -> Result<SymSpinor> {
    let v = news_bands(news, grid, x, quad, |n| {
        let acc = news.scalar(x.dot(&n.l), &n.o, 2);
        let ol = n.o.lower();
        CVec([ol.0[0] * ol.0[0] * acc, ol.0[0] * ol.0[1] * acc, ol.0[1] * ol.0[1] * acc])
    })?;
    Ok(SymSpinor(v.0).scale(c(-1.0 / (2.0 * PI), 0.0)))
}

fn news_bands<T: Accum, F: Fn(&Node) -> T + Sync + Send>(
    news: &FreeNews,
    grid: &NullGrid,
    x: &FourVector,
    quad: &FieldQuadrature,
    f: F,
) -> Result<T> {
    if (grid.t - news.t).euclid() > 1e-12 {
        return Err(Error::invalid("free_field", "grid gauge differs from the gauge of the news"));
    }
    let Some((s_lo, s_hi)) = news.support() else {
        return Ok(T::zero());
    };
    let x0 = x.dot(&grid.t);
    let xs = grid.rest_components(x);
    let rho = (xs[0] * xs[0] + xs[1] * xs[1] + xs[2] * xs[2]).sqrt();
    // x·l = x0 − ρ cos∠(x⃗, n)
    let (axis, c_lo, c_hi) = if rho > 1e-12 {
        (xs.map(|v| v / rho), ((x0 - s_hi) / rho).max(-1.0), ((x0 - s_lo) / rho).min(1.0))
    } else if x0 >= s_lo && x0 <= s_hi {
        ([0.0, 0.0, 1.0], -1.0, 1.0)
    } else {
        return Ok(T::zero());
    };
    if c_hi <= c_lo {
        return Ok(T::zero());
    }
    let span = rho * (c_hi - c_lo);
    let panels = ((span / news.min_width()).ceil() as usize).max(1);
    let parts: Vec<T> = (0..panels)
        .map(|p| {
            let a = c_lo + (c_hi - c_lo) * p as f64 / panels as f64;
            let b = c_lo + (c_hi - c_lo) * (p + 1) as f64 / panels as f64;
            grid.integrate_band(axis, a, b, quad.nodes_per_panel, quad.n_phi, &f)
        })
        .collect();
    Ok(pairwise_sum(&parts))
}

/// The same integrals as a plain node sum over the grid (reference quadrature).
pub fn news_field_on_grid(news: &FreeNews, grid: &NullGrid, x: &FourVector) -> FreeField {
    assemble(grid.integrate_with(|n| field_integrand(news, x, n)), x)
}

/// Free field of sourceless data at x.
pub fn free_field_from_zeta(data: &EMAsymptoticData, grid: &NullGrid, x: &FourVector) -> Result<FreeField> {
    if data.sources.is_some() || data.charge.norm() > 0.0 {
        return Err(Error::invalid("free_field_from_zeta", "data carry sources; only free data are admitted"));
    }
    match &data.free {
        Some(n) => news_field(n, grid, x, &FieldQuadrature::default()),
        None => Ok(assemble(CVec::zero(), x)),
    }
}

/// lim R^power f(R) over the ladder radii by Richardson extrapolation in 1/R.
pub fn radial_limit<T: Accum, F: Fn(f64) -> T>(f: F, power: i32, ladder: &Ladder) -> (T, f64) {
    let samples: Vec<T> = ladder.radii().iter().map(|&r| f(r) * r.powi(power)).collect();
    let (v, e, _) = richardson(&samples, ladder.ratio);
    (v, e)
}

// ---------------------------------------------------------------------------------------------
// Coulomb field

/// t^{C'}_{(A} y_{B)C'} for real vectors t, y.
fn half_contraction(t: &FourVector, y: &FourVector) -> SymSpinor {
    let tl = t.to_lower();
    let yl = y.to_lower();
    let e = 1.0 / EPS01;
    // t_A^{C'} = ε^{C'D'} t_{AD'}
    let tu = |a: usize, cp: usize| if cp == 0 { tl.0[a][1] * e } else { -tl.0[a][0] * e };
    let x = |a: usize, b: usize| tu(a, 0) * yl.0[b][0] + tu(a, 1) * yl.0[b][1];
    SymSpinor([x(0, 0), (x(0, 1) + x(1, 0)) * 0.5, x(1, 1)])
}

/// Coulomb field of a (possibly magnetic) charge Q on the axis a + τt.
pub fn coulomb_field(charge: C, t: &FourVector, a: &FourVector, x: &FourVector) -> Result<SymSpinor> {
    let y = *x - *a;
    let yt = y.dot(t);
    let d = yt * yt - y.norm_sqr();
    if d <= 1e-20 * y.euclid().powi(2).max(1e-300) {
        return Err(Error::invalid("coulomb_field", "point lies on the worldline of the charge"));
    }
    Ok(half_contraction(t, &y).scale(charge / d.powf(1.5)))
}

/// R²φ^Q(a + Ry) as R → ∞ in closed form.
pub fn coulomb_spacelike(charge: C, t: &FourVector, y: &FourVector) -> Result<SymSpinor> {
    coulomb_field(charge, t, &FourVector([0.0; 4]), y)
}

/// ζ^Q_A = Q ι_A.
pub fn coulomb_characteristic(charge: C, t: &FourVector, o: &Spinor) -> CoSpinor {
    iota(o, t).lower().scale(charge)
}

/// (1/2π)∫δ′(y·l) o_(A ζ_B)(−∞) dl, from the δ-line integral of the gauge-shifted vector
/// y − εt differentiated in ε.
pub fn spacelike_limit(profile: &dyn SpinorProfile, grid: &NullGrid, y: &FourVector, n: usize) -> Result<SymSpinor> {
    let g = |node: &Node| CVec(SymSpinor::sym(&node.o.lower(), &profile.limits(&node.o).0).0);
    let h = 1e-3 * y.euclid();
    let at = |e: f64| grid.integrate_delta_line(&(*y - grid.t * e), n, g);
    let d = ((at(h)? - at(-h)?) * 8.0 - (at(2.0 * h)? - at(-2.0 * h)?)) * (1.0 / (12.0 * h));
    Ok(SymSpinor(d.0).scale(c(-1.0 / (2.0 * PI), 0.0)))
}

// ---------------------------------------------------------------------------------------------
// Long-range variables

/// −ι^A ῑ^{A'} J_{AA'} and the size of J_{AA'} + (that) o_A ō_{A'}.
fn coefficient_of_l(j: &Mixed, o: &Spinor, t: &FourVector) -> (C, f64) {
    let io = iota(o, t);
    let ib = io.conj();
    let mut q = ZERO;
    for a in 0..2 {
        for ap in 0..2 {
            q -= io.0[a] * ib.0[ap] * j[a][ap];
        }
    }
    let ol = o.lower();
    let ob = o.conj().lower();
    let mut res = 0.0_f64;
    for a in 0..2 {
        for ap in 0..2 {
            res = res.max((j[a][ap] + q * ol.0[a] * ob.0[ap]).norm());
        }
    }
    (q, res)
}

/// Which limit of which data a long-range variable is read from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LongRangeKind {
    /// q: ζ(+∞).
    Outgoing,
    /// q′: ζ′(−∞).
    Incoming,
    /// σ: ζ(−∞) − ζ(+∞).
    OutgoingFree,
    /// σ′: ζ′(+∞) − ζ′(−∞).
    IncomingFree,
    /// q + σ: ζ(−∞).
    Total,
}

fn limit_combination(data: &EMAsymptoticData, kind: LongRangeKind, o: &Spinor) -> CoSpinor {
    match kind {
        LongRangeKind::Outgoing => data.future.limits(o).1,
        LongRangeKind::Incoming => data.past.limits(o).0,
        LongRangeKind::OutgoingFree => {
            let (a, b) = data.future.limits(o);
            a.sub(&b)
        }
        LongRangeKind::IncomingFree => {
            let (a, b) = data.past.limits(o);
            b.sub(&a)
        }
        LongRangeKind::Total => data.future.limits(o).0,
    }
}

/// The long-range variable of the given kind at o with its transverse residual.
pub fn longrange_value(data: &EMAsymptoticData, kind: LongRangeKind, o: &Spinor) -> (C, f64) {
    let j = primed_jacobian(&|x: &Spinor| limit_combination(data, kind, x), o);
    coefficient_of_l(&j, o, &data.gauge)
}

/// Type {−2,−2} function of a long-range variable.
pub fn longrange_fn(data: &EMAsymptoticData, kind: LongRangeKind) -> HomogeneousFn {
    let d = data.clone();
    HomogeneousFn::new(-2, -2, move |o| longrange_value(&d, kind, o).0)
}

/// Node samples of q, q′, σ, σ′.
#[derive(Clone, Debug)]
pub struct NodeSamples {
    pub q: Vec<C>,
    pub q_past: Vec<C>,
    pub sigma: Vec<C>,
    pub sigma_past: Vec<C>,
}

/// Defects of the mean and constraint identities.
#[derive(Clone, Copy, Debug)]
pub struct LongRangeDefects {
    /// (1/2π)∫q − Q.
    pub mean_q: f64,
    pub mean_q_past: f64,
    /// (1/2π)∫σ.
    pub mean_sigma: f64,
    pub mean_sigma_past: f64,
    /// max |q + σ − q′ − σ′|.
    pub constraint: f64,
    /// Largest transverse residual met while extracting.
    pub transverse: f64,
}

/// Long-range variables of one field.
#[derive(Clone)]
pub struct LongRangeVars {
    pub charge: C,
    pub gauge: FourVector,
    pub data: EMAsymptoticData,
    pub samples: NodeSamples,
    pub defects: LongRangeDefects,
}

impl LongRangeVars {
    pub fn function(&self, kind: LongRangeKind) -> HomogeneousFn {
        longrange_fn(&self.data, kind)
    }
}

/// Reads q, q′, σ, σ′ from the limits of the data on the grid nodes.
pub fn longrange_vars(data: &EMAsymptoticData, grid: &NullGrid) -> Result<LongRangeVars> {
    let kinds = [
        LongRangeKind::Outgoing,
        LongRangeKind::Incoming,
        LongRangeKind::OutgoingFree,
        LongRangeKind::IncomingFree,
    ];
    let per = grid.sample(|n| kinds.map(|k| longrange_value(data, k, &n.o)));
    let scale = per.iter().flatten().fold(1.0_f64, |m, x| m.max(x.0.norm()));
    let transverse = per.iter().flatten().fold(0.0_f64, |m, x| m.max(x.1)) / scale;
    if transverse > 1e-6 {
        return Err(Error::invariant(
            "longrange_vars",
            format!("∂_{{A'}}ζ_A(±∞) is not proportional to l_a (residual {transverse:.3e}); inconsistent data"),
        ));
    }
    let col = |i: usize| per.iter().map(|r| r[i].0).collect::<Vec<C>>();
    let samples = NodeSamples { q: col(0), q_past: col(1), sigma: col(2), sigma_past: col(3) };
    let mean = |v: &[C]| grid.integrate_samples(v) * (1.0 / (2.0 * PI));
    let constraint = (0..grid.len())
        .map(|k| (samples.q[k] + samples.sigma[k] - samples.q_past[k] - samples.sigma_past[k]).norm())
        .fold(0.0, f64::max);
    let defects = LongRangeDefects {
        mean_q: (mean(&samples.q) - data.charge).norm(),
        mean_q_past: (mean(&samples.q_past) - data.charge).norm(),
        mean_sigma: mean(&samples.sigma).norm(),
        mean_sigma_past: mean(&samples.sigma_past).norm(),
        constraint,
        transverse,
    };
    Ok(LongRangeVars { charge: data.charge, gauge: data.gauge, data: data.clone(), samples, defects })
}

/// Closed forms (q, q′) = Σ Q/(2(v_out·l)²), Σ Q/(2(v_in·l)²) for the current models.
pub fn closed_form_q(model: &CurrentModel, o: &Spinor) -> (C, C) {
    let l = null_vector_of(o);
    match model {
        CurrentModel::PointCharges(ps) => ps.iter().fold((ZERO, ZERO), |acc, p| {
            let out = p.charge / (2.0 * p.worldline.velocity_out().dot(&l).powi(2));
            let inn = p.charge / (2.0 * p.worldline.velocity_in().dot(&l).powi(2));
            (acc.0 + out, acc.1 + inn)
        }),
        CurrentModel::DiracPacket(p) => {
            let terms: Vec<f64> = p.currents().iter().map(|(v, w)| w / (2.0 * v.dot(&l).powi(2))).collect();
            let q = c(pairwise_sum(&terms), 0.0);
            (q, q)
        }
        CurrentModel::StaticCoulomb { charge, t, .. } => {
            let q = *charge / (2.0 * t.dot(&l).powi(2));
            (q, q)
        }
    }
}

/// ζ_A(+∞) rebuilt as Q ι_A + w o_A from (Q, q), where ∂_{A'}w = −ō_{A'}(q − Q/(2(t·l)²)) is
/// solved harmonically. Returns the largest node-wise deviation from the data.
pub fn reconstruction_residual(vars: &LongRangeVars, grid: &NullGrid) -> Result<f64> {
    let t = vars.gauge;
    let q0 = vars.charge;
    // in the gauge of t the Coulomb part is the constant Q/2
    let h: Vec<C> = grid
        .nodes
        .iter()
        .zip(&vars.samples.q)
        .map(|(n, q)| *q - q0 / (2.0 * t.dot(&n.l).powi(2)))
        .collect();
    let potential = phi_from_sigma(grid, &h, ZERO)?;
    let f = potential.as_fn();
    let worst = grid
        .sample(|n| {
            let d = d_unprimed(&|o: &Spinor| f.eval(o), &n.o);
            let io = iota(&n.o, &t);
            let w = -(io.0[0] * d[0] + io.0[1] * d[1]);
            let rebuilt = io.lower().scale(q0).add(&n.o.lower().scale(w));
            rebuilt.sub(&vars.data.future.limits(&n.o).1).max_abs()
        })
        .into_iter()
        .fold(0.0, f64::max);
    Ok(worst)
}

// ---------------------------------------------------------------------------------------------
// Infrared potential

/// Degree-zero potential Φ with ∂_A∂_{A'}Φ = l_a σ, as a harmonic series in the gauge of the grid.
#[derive(Clone, Debug)]
pub struct PhiField {
    pub series: SphereSeries,
    pub constant: C,
    /// Spectral tail norm of the σ expansion.
    pub tail: f64,
}

impl PhiField {
    pub fn eval(&self, o: &Spinor) -> C {
        self.series.eval(o) + self.constant
    }

    pub fn as_fn(&self) -> HomogeneousFn {
        let me = self.clone();
        HomogeneousFn::new(0, 0, move |o| me.eval(o))
    }
}

/// Inverts σ = ½Δ_S Φ mode by mode: Φ_ℓm = −2σ_ℓm/(ℓ(ℓ+1)) for ℓ ≥ 1. The ℓ = 0 mode of Φ is
/// the explicit `constant`.
pub fn phi_from_sigma(grid: &NullGrid, sigma: &[C], constant: C) -> Result<PhiField> {
    if sigma.len() != grid.len() {
        return Err(Error::invalid("phi_from_sigma", "σ samples do not match the grid"));
    }
    let mean = grid.integrate_samples(sigma) * (1.0 / (2.0 * PI));
    let scale = sigma.iter().fold(1.0_f64, |m, s| m.max(s.norm()));
    if mean.norm() > 1e-6 * scale {
        return Err(Error::invalid(
            "phi_from_sigma",
            format!("σ has mean {:.3e}; no degree-zero potential exists", mean.norm()),
        ));
    }
    let l_max = (grid.n_theta - 1).min((grid.n_phi - 1) / 2);
    // σ is sampled in t-gauge, where it is a plain function on the sphere
    let s = SphereSeries::analyze(grid, sigma, l_max, -2);
    let tail = s.tail_norm();
    let series = s.map_degree(0, |l| if l == 0 { ZERO } else { c(-2.0 / (l * (l + 1)) as f64, 0.0) });
    Ok(PhiField { series, constant, tail })
}

/// max over nodes of |∂_AΦ + o_A ζ^out(−∞)| for the outgoing data of `data`.
pub fn phi_residual(phi: &PhiField, data: &EMAsymptoticData, grid: &NullGrid) -> f64 {
    let f = phi.as_fn();
    grid.sample(|n| {
        let d = d_unprimed(&|o: &Spinor| f.eval(o), &n.o);
        let (lo, hi) = data.future.limits(&n.o);
        let target = lo.sub(&hi);
        (d[0] + target.0[0]).norm().max((d[1] + target.0[1]).norm())
    })
    .into_iter()
    .fold(0.0, f64::max)
}

/// max over nodes of |∂_A∂_{A'}Φ − l_a σ| with both derivatives by finite differences.
pub fn phi_round_trip(phi: &PhiField, grid: &NullGrid, sigma: &[C]) -> f64 {
    let f = phi.as_fn();
    grid.sample(|n| {
        let inner = |o: &Spinor| CVec(d_unprimed(&|x: &Spinor| f.eval(x), o));
        let dd = d_primed(&inner, &n.o);
        let k = grid.nodes.iter().position(|m| std::ptr::eq(m, n)).unwrap_or(0);
        let ol = n.o.lower();
        let ob = n.o.conj().lower();
        let mut worst = 0.0_f64;
        for a in 0..2 {
            for ap in 0..2 {
                worst = worst.max((dd[ap].0[a] - sigma[k] * ol.0[a] * ob.0[ap]).norm());
            }
        }
        worst
    })
    .into_iter()
    .fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------------------------
// Long-range field

/// Quadrature for the sign-kernel integral.
#[derive(Clone, Copy, Debug)]
pub struct SignQuadrature {
    pub n_c: usize,
    pub n_phi: usize,
}

impl Default for SignQuadrature {
    fn default() -> Self {
        SignQuadrature { n_c: 32, n_phi: 64 }
    }
}

/// One sample of the long-range field at a spacelike y.
#[derive(Clone, Copy, Debug)]
pub struct LongRangeSample {
    pub y: FourVector,
    /// K_a with a lower index.
    pub k: [C; 4],
    pub field: Tensor,
    pub electric_type: Tensor,
    pub magnetic_type: Tensor,
    /// y^{C'}_(A K_B)C'.
    pub spinor: SymSpinor,
    /// max(|F^M_ab y^b|, |*F^E_ab y^b|).
    pub transversality: f64,
}

/// K_a(y) = (1/2πy²)∇_a∫sgn(y·l) f dl by fourth-order differences with step 1e−4‖y‖.
pub fn k_vector(f: &HomogeneousFn, grid: &NullGrid, y: &FourVector, quad: &SignQuadrature) -> Result<[C; 4]> {
    let s = |x: &FourVector| grid.integrate_sign(x, quad.n_c, quad.n_phi, |n| f.eval(&n.o));
    let h = 1e-4 * y.euclid();
    let yy = y.norm_sqr();
    let mut k = [ZERO; 4];
    for (a, ka) in k.iter_mut().enumerate() {
        let mut e = [0.0; 4];
        e[a] = h;
        let e = FourVector(e);
        let d = ((s(&(*y + e))? - s(&(*y - e))?) * 8.0 - (s(&(*y + e * 2.0))? - s(&(*y - e * 2.0))?)) * (1.0 / (12.0 * h));
        *ka = d / (2.0 * PI * yy);
    }
    Ok(k)
}

/// Long-range field of the source function f = q + σ (or any type {−2,−2} function).
pub fn longrange_field_of(f: &HomogeneousFn, grid: &NullGrid, y: &FourVector, quad: &SignQuadrature) -> Result<LongRangeSample> {
    let yy = y.norm_sqr();
    if yy >= -1e-8 * y.euclid().powi(2) {
        return Err(Error::invalid("longrange_field", "y is not spacelike or lies too close to the light cone"));
    }
    let k = k_vector(f, grid, y, quad)?;
    let re = FourVector::from_lower(k.map(|z| z.re));
    let im = FourVector::from_lower(k.map(|z| z.im));
    let electric_type = Tensor::wedge(&re, y);
    let magnetic_type = dual(&Tensor::wedge(&im, y)).scale(-1.0);
    let field = electric_type.add(&magnetic_type);
    let yl = y.to_lower();
    let kl = ComplexVector::from_lower(k).to_lower();
    let yu = raise_first_primed(&yl);
    let x = |a: usize, b: usize| yu[a][0] * kl.0[b][0] + yu[a][1] * kl.0[b][1];
    let spinor = SymSpinor([x(0, 0), (x(0, 1) + x(1, 0)) * 0.5, x(1, 1)]);
    let fm = magnetic_type.contract(y);
    let fe = dual(&electric_type).contract(y);
    let transversality = fm.iter().chain(fe.iter()).fold(0.0_f64, |m, v| m.max(v.abs()));
    Ok(LongRangeSample { y: *y, k, field, electric_type, magnetic_type, spinor, transversality })
}

/// y_A^{C'} = ε^{C'D'} y_{AD'}, stored [A][C'].
fn raise_first_primed(y: &Mat2) -> Mixed {
    let e = 1.0 / EPS01;
    [[y.0[0][1] * e, -y.0[0][0] * e], [y.0[1][1] * e, -y.0[1][0] * e]]
}

/// Long-range field of the total long-range variable q + σ.
pub fn longrange_field(vars: &LongRangeVars, grid: &NullGrid, y: &FourVector) -> Result<LongRangeSample> {
    longrange_field_of(&vars.function(LongRangeKind::Total), grid, y, &SignQuadrature::default())
}

/// Helper for tests and reports: ι^A o_A, which the conventions fix to 1.
pub fn dyad_normalization(o: &Spinor, t: &FourVector) -> C {
    o.lower().contract(&iota(o, t))
}

/// Charge Q = −ig of a magnetic monopole of strength g.
pub fn magnetic_charge(g: f64) -> C {
    -I * g
}
