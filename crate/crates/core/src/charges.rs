//! Poincaré charges carried by electromagnetic radiation, their split into free and
//! long-range parts, the existence condition for total angular momentum, the trajectory
//! shift of a charged particle and a direct Cauchy-surface evaluation for free fields.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::em::{
    iota, news_field_strength, Detrended, EMAsymptoticData, FieldQuadrature, FreeNews,
    LongRangeKind, LongRangeVars, PhiField, SpinorProfile, Translated,
};
use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, gauss_legendre_on, pairwise_sum, par_map, Accum, CVec, RVec};
use crate::sphere::{d_unprimed, HomogeneousFn, NullGrid};
use crate::spinors::{c, CoSpinor, FourVector, Spinor, SymSpinor, Tensor, C};

/// Which null infinity a radiated quantity refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Infinity {
    Future,
    Past,
}

/// Angular momentum as a symmetric spinor μ_AB about a given origin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngularMomentum {
    pub spinor: SymSpinor,
    pub origin: FourVector,
}

impl AngularMomentum {
    pub fn new(spinor: SymSpinor, origin: FourVector) -> Self {
        AngularMomentum { spinor, origin }
    }

    /// M_ab = μ_AB ε_{A'B'} + μ̄_{A'B'} ε_AB.
    pub fn tensor(&self) -> Tensor {
        self.spinor.to_tensor()
    }

    pub fn from_tensor(m: &Tensor, origin: FourVector) -> Self {
        AngularMomentum { spinor: SymSpinor::from_tensor(m), origin }
    }

    /// The same charge about another origin, given the momentum it belongs to.
    pub fn moved_to(&self, origin: &FourVector, momentum: &FourVector) -> Self {
        let m = self.tensor().add(&orbital_term(&(*origin - self.origin), momentum));
        AngularMomentum::from_tensor(&m, *origin)
    }
}

/// Change of M_ab when its origin moves by `shift`: −(a_a P_b − a_b P_a).
pub fn orbital_term(shift: &FourVector, momentum: &FourVector) -> Tensor {
    Tensor::wedge(shift, momentum).scale(-1.0)
}

/// m(y_a v_b − y_b v_a): angular momentum of a particle of mass m through y with velocity v.
pub fn particle_angular_momentum(mass: f64, y: &FourVector, v: &FourVector) -> Tensor {
    Tensor::wedge(y, v).scale(mass)
}

const PANEL_NODES: usize = 10;

/// Gauss rule in s covering the window of ζ̇ at o, split at the declared breaks.
fn s_rule(profile: &dyn SpinorProfile, o: &Spinor) -> Option<(Vec<f64>, Vec<f64>)> {
    let (a, b) = profile.window(o)?;
    let mut cuts: Vec<f64> = profile.breaks(o).into_iter().filter(|s| *s > a && *s < b).collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let res = profile.resolution();
    let mut xs = Vec::new();
    let mut ws = Vec::new();
    for w in cuts.windows(2) {
        let len = w[1] - w[0];
        let panels = ((len / res).ceil() as usize).max(1);
        for p in 0..panels {
            let lo = w[0] + len * p as f64 / panels as f64;
            let hi = w[0] + len * (p + 1) as f64 / panels as f64;
            let (x, wt) = gauss_legendre_on(PANEL_NODES, lo, hi);
            xs.extend(x);
            ws.extend(wt);
        }
    }
    Some((xs, ws))
}

/// ζ̇ as a scalar: ζ̇_A = o_A ζ̇.
fn rate_scalar(profile: &dyn SpinorProfile, s: f64, o: &Spinor, t: &FourVector) -> C {
    let r = profile.rate(s, o);
    let io = iota(o, t);
    r.contract(&io)
}

/// Rejects a window whose edges still carry a visible part of the integrand.
fn check_edges(profile: &dyn SpinorProfile, o: &Spinor, t: &FourVector, op: &'static str) -> Result<()> {
    if let Some((a, b)) = profile.window(o) {
        let peak = s_rule(profile, o)
            .map(|(xs, _)| xs.iter().map(|s| rate_scalar(profile, *s, o, t).norm()).fold(0.0, f64::max))
            .unwrap_or(0.0);
        let edge = rate_scalar(profile, a, o, t).norm().max(rate_scalar(profile, b, o, t).norm());
        if edge > 1e-8 * peak.max(1e-300) && edge > 1e-300 {
            return Err(Error::convergence(op, format!("ζ̇ is {edge:.3e} at the window edge; tail not negligible")));
        }
    }
    Ok(())
}

/// P^a = (1/2π)∫ l^a |ζ̇|² ds dl for one profile.
pub fn profile_momentum(profile: &dyn SpinorProfile, grid: &NullGrid) -> Result<FourVector> {
    grid.sample(|n| check_edges(profile, &n.o, &grid.t, "radiated_momentum")).into_iter().collect::<Result<Vec<_>>>()?;
    let energy = grid.sample(|n| match s_rule(profile, &n.o) {
        None => 0.0,
        Some((xs, ws)) => {
            let terms: Vec<f64> =
                xs.iter().zip(&ws).map(|(s, w)| rate_scalar(profile, *s, &n.o, &grid.t).norm_sqr() * w).collect();
            pairwise_sum(&terms)
        }
    });
    let vals: Vec<RVec<4>> = grid.nodes.iter().zip(&energy).map(|(n, e)| RVec(n.l.0.map(|x| x * e))).collect();
    Ok(FourVector(grid.integrate_samples(&vals).0.map(|x| x / (2.0 * PI))))
}

/// μ_AB = −(1/2π)∫ ν̄_(A ζ̇_B) ds dl for one profile, with ν_{A'} = ι^A∂_{A'}ζ_A at fixed s.
pub fn profile_angular_momentum(profile: &dyn SpinorProfile, grid: &NullGrid) -> Result<SymSpinor> {
    let per = grid.sample(|n| -> Result<CVec<3>> {
        let Some((xs, ws)) = s_rule(profile, &n.o) else { return Ok(CVec::zero()) };
        check_edges(profile, &n.o, &grid.t, "radiated_angular_momentum")?;
        let terms: Vec<CVec<3>> = xs
            .iter()
            .zip(&ws)
            .map(|(s, w)| {
                let nu = profile.nu(*s, &n.o, &grid.t);
                let nubar = CoSpinor([nu[0].conj(), nu[1].conj()]);
                CVec(SymSpinor::sym(&nubar, &profile.rate(*s, &n.o)).0) * *w
            })
            .collect();
        Ok(pairwise_sum(&terms))
    });
    let vals = per.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(SymSpinor(grid.integrate_samples(&vals).0).scale(c(-1.0 / (2.0 * PI), 0.0)))
}

fn pick(data: &EMAsymptoticData, which: Infinity) -> Arc<dyn SpinorProfile> {
    match which {
        Infinity::Future => data.future.clone(),
        Infinity::Past => data.past.clone(),
    }
}

/// Energy-momentum radiated into future (or arriving from past) null directions.
pub fn radiated_momentum(data: &EMAsymptoticData, grid: &NullGrid, which: Infinity) -> Result<FourVector> {
    profile_momentum(pick(data, which).as_ref(), grid)
}

/// Angular momentum radiated into future (or arriving from past) null directions, about `origin`.
pub fn radiated_angular_momentum(
    data: &EMAsymptoticData,
    grid: &NullGrid,
    which: Infinity,
    origin: &FourVector,
) -> Result<AngularMomentum> {
    let base = pick(data, which);
    let mu = if origin.euclid() == 0.0 {
        profile_angular_momentum(base.as_ref(), grid)?
    } else {
        profile_angular_momentum(&Translated { inner: base, origin: *origin }, grid)?
    };
    Ok(AngularMomentum::new(mu, *origin))
}

// ---------------------------------------------------------------------------------------------
// Long-range split

/// Angular momentum radiated into future null directions, split into the part carried by
/// ζ^out = ζ − ζ(+∞) and the term mixing q with Φ.
#[derive(Clone, Copy, Debug)]
pub struct MixingSplit {
    pub free: SymSpinor,
    pub mixing: SymSpinor,
    /// Radiated angular momentum of the full data.
    pub total: SymSpinor,
    /// max |free + mixing − total|.
    pub closure: f64,
    /// max |mixing − (−(1/2π)∫Φ o_(A∂_B)q)|.
    pub by_parts: f64,
}

/// (1/2π)∫ q o_(A∂_B)Φ dl from node samples of q.
pub fn mixing_term(q: &[C], phi: &HomogeneousFn, grid: &NullGrid) -> Result<SymSpinor> {
    if q.len() != grid.len() {
        return Err(Error::invalid("mixing_term", "q samples do not match the grid"));
    }
    let f = phi;
    let per = grid.sample(|n| {
        let d = d_unprimed(&|o: &Spinor| f.eval(o), &n.o);
        CVec(SymSpinor::sym(&n.o.lower(), &CoSpinor(d)).0)
    });
    let vals: Vec<CVec<3>> = per.iter().zip(q).map(|(v, qk)| v.scale_c(*qk)).collect();
    Ok(SymSpinor(grid.integrate_samples(&vals).0).scale(c(1.0 / (2.0 * PI), 0.0)))
}

/// −(1/2π)∫Φ o_(A∂_B)q dl: the mixing term after integration by parts.
pub fn mixing_term_by_parts(q: &HomogeneousFn, phi: &HomogeneousFn, grid: &NullGrid) -> SymSpinor {
    let per = grid.sample(|n| {
        let d = d_unprimed(&|o: &Spinor| q.eval(o), &n.o);
        CVec(SymSpinor::sym(&n.o.lower(), &CoSpinor(d)).0).scale_c(phi.eval(&n.o))
    });
    SymSpinor(grid.integrate_samples(&per).0).scale(c(-1.0 / (2.0 * PI), 0.0))
}

/// Splits the radiated angular momentum of `data` into the ζ^out part and the mixing term
/// built from q and the potential Φ of σ.
pub fn angular_momentum_split(
    data: &EMAsymptoticData,
    vars: &LongRangeVars,
    phi: &PhiField,
    grid: &NullGrid,
) -> Result<MixingSplit> {
    let im = vars.samples.q.iter().fold(0.0_f64, |m, q| m.max(q.im.abs()));
    if im > 1e-8 {
        return Err(Error::invariant(
            "angular_momentum_split",
            format!("q has imaginary part {im:.3e}: magnetic-type long-range field present"),
        ));
    }
    let total = profile_angular_momentum(data.future.as_ref(), grid)?;
    let free = profile_angular_momentum(&Detrended(data.future.clone()), grid)?;
    let phi = phi.as_fn();
    let mixing = mixing_term(&vars.samples.q, &phi, grid)?;
    let alt = mixing_term_by_parts(&vars.function(LongRangeKind::Outgoing), &phi, grid);
    Ok(MixingSplit {
        free,
        mixing,
        total,
        closure: free.add(&mixing).sub(&total).max_abs(),
        by_parts: mixing.sub(&alt).max_abs(),
    })
}

/// (1/4π)∫ ν̄_(A ζ_B)(−∞) dl: vanishes exactly when the total angular momentum exists.
pub fn existence_defect(data: &EMAsymptoticData, grid: &NullGrid) -> SymSpinor {
    let vals = grid.sample(|n| {
        let nu = data.future.nu_limits(&n.o, &data.gauge).0;
        let nubar = CoSpinor([nu[0].conj(), nu[1].conj()]);
        CVec(SymSpinor::sym(&nubar, &data.future.limits(&n.o).0).0)
    });
    SymSpinor(grid.integrate_samples(&vals).0).scale(c(1.0 / (4.0 * PI), 0.0))
}

// ---------------------------------------------------------------------------------------------
// Trajectory shift and scattering phase

/// Translation of a particle worldline produced by a zero-frequency field.
#[derive(Clone, Copy, Debug)]
pub struct TrajectoryShift {
    /// (Q/πm)∫ l_a Φ dl/(v·l)³ as computed (upper index).
    pub raw: FourVector,
    /// The representative orthogonal to v.
    pub shift: FourVector,
    /// δ(v) = −(Q/2π)∫Φ dl/(v·l)².
    pub phase: f64,
}

/// Δy and δ(v) for a particle of charge Q and mass m moving with velocity v.
pub fn trajectory_shift(charge: f64, mass: f64, v: &FourVector, phi: &HomogeneousFn, grid: &NullGrid) -> Result<TrajectoryShift> {
    if !v.is_unit_timelike(1e-9) {
        return Err(Error::invalid("trajectory_shift", "velocity is not unit timelike"));
    }
    if !(mass > 0.0) {
        return Err(Error::invalid("trajectory_shift", "mass must be positive"));
    }
    if phi.p != 0 || phi.q != 0 {
        return Err(Error::invalid("trajectory_shift", "Φ must have homogeneity type {0,0}"));
    }
    let vals = grid.sample(|n| {
        let f = phi.eval(&n.o).re;
        let vl = v.dot(&n.l);
        let w = f / vl.powi(3);
        let mut out = [0.0; 5];
        for (a, o) in out.iter_mut().take(4).enumerate() {
            *o = n.l.0[a] * w;
        }
        out[4] = f / (vl * vl);
        RVec(out)
    });
    let sum = grid.integrate_samples(&vals).0;
    let raw = FourVector(std::array::from_fn(|a| charge / (PI * mass) * sum[a]));
    let shift = raw - *v * raw.dot(v);
    Ok(TrajectoryShift { raw, shift, phase: -charge / (2.0 * PI) * sum[4] })
}

/// δ(v) = −(Q/2π)∫Φ dl/(v·l)².
pub fn scattering_phase(charge: f64, v: &FourVector, phi: &HomogeneousFn, grid: &NullGrid) -> f64 {
    let vals = grid.sample(|n| phi.eval(&n.o).re / v.dot(&n.l).powi(2));
    -charge / (2.0 * PI) * grid.integrate_samples(&vals)
}

/// ∂δ/∂v^a along the mass shell by central differences, as a lower-index covector.
pub fn phase_gradient(charge: f64, v: &FourVector, phi: &HomogeneousFn, grid: &NullGrid, h: f64) -> [f64; 4] {
    // δ extended off the shell as a function of degree −2 in v; only tangential parts matter
    std::array::from_fn(|a| {
        let mut e = [0.0; 4];
        e[a] = h;
        let e = FourVector(e);
        let f = |x: FourVector| scattering_phase(charge, &x, phi, grid);
        (8.0 * (f(*v + e) - f(*v - e)) - (f(*v + e * 2.0) - f(*v - e * 2.0))) / (12.0 * h)
    })
}

// ---------------------------------------------------------------------------------------------
// Cauchy-surface oracle

/// Charges contained in a ball of the hyperplane t·x = offset.
#[derive(Clone, Copy, Debug)]
pub struct CauchyCharges {
    pub radius: f64,
    pub momentum: FourVector,
    pub angular: Tensor,
}

impl CauchyCharges {
    pub fn angular_spinor(&self) -> SymSpinor {
        SymSpinor::from_tensor(&self.angular)
    }
}

/// Quadrature over the balls of a radius ladder.
#[derive(Clone, Copy, Debug)]
pub struct BallQuadrature {
    pub radial_nodes: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    pub field: FieldQuadrature,
}

impl Default for BallQuadrature {
    fn default() -> Self {
        BallQuadrature { radial_nodes: 10, n_theta: 12, n_phi: 24, field: FieldQuadrature { nodes_per_panel: 8, n_phi: 16 } }
    }
}

const METRIC: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

/// T_ab = −(1/4π)(F_ac F_b^c − ¼ g_ab F_cd F^cd) with lower indices.
pub fn maxwell_stress(f: &Tensor) -> [[f64; 4]; 4] {
    let fm = &f.0;
    let mut inv = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            inv += fm[a][b] * fm[a][b] * METRIC[a] * METRIC[b];
        }
    }
    std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            let mut s = 0.0;
            for k in 0..4 {
                s += fm[a][k] * fm[b][k] * METRIC[k];
            }
            let g = if a == b { METRIC[a] } else { 0.0 };
            -(s - 0.25 * g * inv) / (4.0 * PI)
        })
    })
}

/// P_a[Σ(r)] = ∫T_ac t^c d³x and M_ab[Σ(r)] = ∫(x_a T_bc − x_b T_ac) t^c d³x over the balls
/// |x⃗| ≤ r of the hyperplane t·x = offset, for every radius of the increasing ladder `radii`.
pub fn cauchy_surface_charges(
    news: &FreeNews,
    grid: &NullGrid,
    offset: f64,
    radii: &[f64],
    quad: &BallQuadrature,
) -> Result<Vec<CauchyCharges>> {
    if radii.is_empty() || radii.windows(2).any(|w| !(w[1] > w[0])) || !(radii[0] > 0.0) {
        return Err(Error::invalid("cauchy_surface_charges", "radii must be positive and increasing"));
    }
    let t = grid.t;
    let axes = *grid.axes();
    let width = news.min_width();
    let (ct, wt) = gauss_legendre(quad.n_theta);
    let dphi = 2.0 * PI / quad.n_phi as f64;
    let mut shells: Vec<(f64, f64)> = Vec::new();
    let mut bounds = Vec::new();
    let mut lo = 0.0;
    for &r in radii {
        let step = (2.0 * width).max(0.5 * lo);
        let panels = (((r - lo) / step).ceil() as usize).max(1);
        for p in 0..panels {
            let a = lo + (r - lo) * p as f64 / panels as f64;
            let b = lo + (r - lo) * (p + 1) as f64 / panels as f64;
            let (x, w) = gauss_legendre_on(quad.radial_nodes, a, b);
            shells.extend(x.into_iter().zip(w));
        }
        bounds.push(shells.len());
        lo = r;
    }
    let n_ang = quad.n_theta * quad.n_phi;
    let mut points = Vec::with_capacity(shells.len() * n_ang);
    for &(rho, wr) in &shells {
        for (ci, wi) in ct.iter().zip(&wt) {
            let st = (1.0 - ci * ci).max(0.0).sqrt();
            for j in 0..quad.n_phi {
                let ph = (j as f64 + 0.5) * dphi;
                let dir = [st * ph.cos(), st * ph.sin(), *ci];
                let x = t * offset + (axes[0] * dir[0] + axes[1] * dir[1] + axes[2] * dir[2]) * rho;
                points.push((x, wr * wi * dphi * rho * rho));
            }
        }
    }
    let densities: Vec<Result<RVec<10>>> = par_map(points.len(), |k| {
        let (x, w) = points[k];
        let phi = news_field_strength(news, grid, &x, &quad.field)?;
        let stress = maxwell_stress(&phi.to_tensor());
        // T_ac t^c with t^c upper
        let flow: [f64; 4] = std::array::from_fn(|a| (0..4).map(|c| stress[a][c] * t.0[c]).sum());
        let xl = x.lower();
        let mut out = [0.0; 10];
        out[..4].copy_from_slice(&flow);
        let mut k = 4;
        for a in 0..4 {
            for b in (a + 1)..4 {
                out[k] = xl[a] * flow[b] - xl[b] * flow[a];
                k += 1;
            }
        }
        Ok(RVec(out) * w)
    });
    let densities = densities.into_iter().collect::<Result<Vec<_>>>()?;
    let mut result = Vec::with_capacity(radii.len());
    let mut start = 0;
    let mut acc = RVec::<10>::zero();
    for (i, &end) in bounds.iter().enumerate() {
        let part = pairwise_sum(&densities[start * n_ang..end * n_ang]);
        acc = acc + part;
        start = end;
        let v = acc.0;
        let momentum = FourVector::from_lower([v[0], v[1], v[2], v[3]]);
        let mut m = [[0.0; 4]; 4];
        let mut k = 4;
        for a in 0..4 {
            for b in (a + 1)..4 {
                m[a][b] = v[k];
                m[b][a] = -v[k];
                k += 1;
            }
        }
        result.push(CauchyCharges { radius: radii[i], momentum, angular: Tensor(m) });
    }
    Ok(result)
}

// ---------------------------------------------------------------------------------------------
// Budget

/// Energy-momentum and angular momentum of one block.
#[derive(Clone, Copy, Debug)]
pub struct ChargePair {
    pub momentum: FourVector,
    pub angular: SymSpinor,
}

impl ChargePair {
    pub fn zero() -> Self {
        ChargePair { momentum: FourVector([0.0; 4]), angular: SymSpinor::zero() }
    }

    fn plus(&self, o: &ChargePair) -> ChargePair {
        ChargePair { momentum: self.momentum + o.momentum, angular: self.angular.add(&o.angular) }
    }
}

/// All radiated and timelike blocks with their totals.
#[derive(Clone, Copy, Debug)]
pub struct RadiationBudget {
    pub out_null: ChargePair,
    pub in_null: ChargePair,
    pub out_timelike: ChargePair,
    pub in_timelike: ChargePair,
    pub out_total: ChargePair,
    pub in_total: ChargePair,
    /// |P_out − P_in| (max component).
    pub momentum_defect: f64,
    /// |μ_out − μ_in| (max component).
    pub angular_defect: f64,
    /// Size of the existence defect.
    pub existence: f64,
}

/// Budget of a field about the origin 0. The timelike blocks are zero unless supplied by a
/// massive-field model.
pub fn radiation_budget(
    data: &EMAsymptoticData,
    grid: &NullGrid,
    timelike: Option<(ChargePair, ChargePair)>,
) -> Result<RadiationBudget> {
    let origin = FourVector([0.0; 4]);
    let out_null = ChargePair {
        momentum: radiated_momentum(data, grid, Infinity::Future)?,
        angular: radiated_angular_momentum(data, grid, Infinity::Future, &origin)?.spinor,
    };
    let in_null = ChargePair {
        momentum: radiated_momentum(data, grid, Infinity::Past)?,
        angular: radiated_angular_momentum(data, grid, Infinity::Past, &origin)?.spinor,
    };
    let (out_timelike, in_timelike) = timelike.unwrap_or((ChargePair::zero(), ChargePair::zero()));
    let out_total = out_null.plus(&out_timelike);
    let in_total = in_null.plus(&in_timelike);
    Ok(RadiationBudget {
        out_null,
        in_null,
        out_timelike,
        in_timelike,
        out_total,
        in_total,
        momentum_defect: (out_total.momentum - in_total.momentum).0.iter().fold(0.0, |m, x| m.max(x.abs())),
        angular_defect: out_total.angular.sub(&in_total.angular).max_abs(),
        existence: existence_defect(data, grid).max_abs(),
    })
}

/// Whether a momentum is future-causal within `tol`.
pub fn is_future_causal(p: &FourVector, tol: f64) -> bool {
    let s = p.spatial();
    p.0[0] >= (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt() - tol
}
