//! The unit velocity hyperboloid: quadrature, free Dirac packets, their timelike charges,
//! the Coulomb potential of a hyperboloid density and the infrared phase dressing.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre_on, pairwise_sum, par_map, Accum, CVec};
use crate::sphere::{HomogeneousFn, NullGrid};
use crate::spinors::{
    c, dirac_algebra, slash, spin_matrix, DiracOperator, DiracSpinor, FourVector, Lorentz, Tensor, C, I, ZERO,
};

/// Radial coordinate used for the hyperboloid quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Radial {
    /// Gauss nodes in u = tanh χ on [0, u_max]; u_max = 1 means no cutoff.
    Tanh { u_max: f64 },
    /// Composite Gauss nodes in the rapidity χ on [0, χ_max].
    Rapidity { chi_max: f64, panels: usize },
}

/// Quadrature for dμ(v) = d³v/v⁰ = sinh²χ dχ dΩ centred on a unit timelike vector.
#[derive(Clone, Debug)]
pub struct HyperboloidGrid {
    pub center: FourVector,
    pub radial: Radial,
    pub n_radial: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    pub nodes: Vec<FourVector>,
    pub weights: Vec<f64>,
    /// Radial coordinate χ of each node.
    pub rapidity: Vec<f64>,
    frame: Lorentz,
}

/// Hyperboloid integral with its cutoff-tail and resolution estimates.
#[derive(Clone, Copy, Debug)]
pub struct HyperIntegral<T> {
    pub value: T,
    pub tail: f64,
    pub error: f64,
}

fn radial_rule(radial: Radial, n: usize) -> (Vec<f64>, Vec<f64>) {
    match radial {
        Radial::Tanh { u_max } => {
            let (u, w) = gauss_legendre_on(n, 0.0, u_max);
            // sinh²χ dχ = u² du / (1−u²)²
            let chi = u.iter().map(|x| x.atanh()).collect();
            let wt = u.iter().zip(&w).map(|(x, wi)| wi * x * x / (1.0 - x * x).powi(2)).collect();
            (chi, wt)
        }
        Radial::Rapidity { chi_max, panels } => {
            let panels = panels.max(1);
            let per = n.div_ceil(panels).max(2);
            let mut chi = Vec::with_capacity(per * panels);
            let mut wt = Vec::with_capacity(per * panels);
            for k in 0..panels {
                let a = chi_max * k as f64 / panels as f64;
                let b = chi_max * (k + 1) as f64 / panels as f64;
                let (x, w) = gauss_legendre_on(per, a, b);
                for (xi, wi) in x.into_iter().zip(w) {
                    wt.push(wi * xi.sinh().powi(2));
                    chi.push(xi);
                }
            }
            (chi, wt)
        }
    }
}

impl HyperboloidGrid {
    pub fn new(center: &FourVector, radial: Radial, n_radial: usize, n_theta: usize, n_phi: usize) -> Result<Self> {
        let frame = Lorentz::boost_to(center)
            .map_err(|_| Error::invalid("hyperboloid_grid", "center is not unit timelike"))?;
        match radial {
            Radial::Tanh { u_max } if !(u_max > 0.0 && u_max <= 1.0) => {
                return Err(Error::invalid("hyperboloid_grid", "u_max must lie in (0, 1]"))
            }
            Radial::Rapidity { chi_max, .. } if !(chi_max > 0.0) => {
                return Err(Error::invalid("hyperboloid_grid", "chi_max must be positive"))
            }
            _ => {}
        }
        if n_radial < 2 || n_theta < 2 || n_phi < 4 {
            return Err(Error::invalid("hyperboloid_grid", "resolution too small"));
        }
        let (chis, wr) = radial_rule(radial, n_radial);
        let (cts, wt) = gauss_legendre_on(n_theta, -1.0, 1.0);
        let dphi = 2.0 * PI / n_phi as f64;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut rapidity = Vec::new();
        for (chi, w1) in chis.iter().zip(&wr) {
            let (sh, ch) = (chi.sinh(), chi.cosh());
            for (ct, w2) in cts.iter().zip(&wt) {
                let st = (1.0 - ct * ct).max(0.0).sqrt();
                for j in 0..n_phi {
                    let ph = (j as f64 + 0.5) * dphi;
                    let local = FourVector::new(ch, sh * st * ph.cos(), sh * st * ph.sin(), sh * ct);
                    nodes.push(frame.vector(&local));
                    weights.push(w1 * w2 * dphi);
                    rapidity.push(*chi);
                }
            }
        }
        Ok(HyperboloidGrid {
            center: *center,
            radial,
            n_radial: chis.len(),
            n_theta,
            n_phi,
            nodes,
            weights,
            rapidity,
            frame,
        })
    }

    /// Grid for a profile concentrated within rapidity `radius` of `center`.
    pub fn for_support(center: &FourVector, radius: f64, n_radial: usize, n_theta: usize, n_phi: usize) -> Result<Self> {
        let panels = (radius / 0.5).ceil().max(1.0) as usize;
        HyperboloidGrid::new(center, Radial::Rapidity { chi_max: radius, panels }, n_radial, n_theta, n_phi)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn frame(&self) -> &Lorentz {
        &self.frame
    }

    /// Σ w g(v) over the nodes.
    pub fn integrate<T: Accum, F: Fn(&FourVector) -> T + Sync + Send>(&self, g: F) -> T {
        let vals = par_map(self.len(), |k| g(&self.nodes[k]) * self.weights[k]);
        pairwise_sum(&vals)
    }

    /// Values of g on the nodes.
    pub fn sample<T: Send, F: Fn(&FourVector) -> T + Sync + Send>(&self, g: F) -> Vec<T> {
        par_map(self.len(), |k| g(&self.nodes[k]))
    }
}

/// ∫ g dμ with a cutoff-tail estimate (radial density at the cutoff times the missing
/// rapidity range, integrated to infinity assuming the local exponential decay) and a
/// resolution estimate from a half-resolution radial rule.
pub fn integrate_hyperboloid<T: Accum, F: Fn(&FourVector) -> T + Sync + Send>(
    grid: &HyperboloidGrid,
    g: F,
) -> Result<HyperIntegral<T>> {
    let value = grid.integrate(&g);
    let coarse = HyperboloidGrid::new(&grid.center, grid.radial, grid.n_radial / 2 + 1, grid.n_theta, grid.n_phi)?;
    let error = (value - coarse.integrate(&g)).size();
    let tail = match grid.radial {
        Radial::Tanh { u_max } if u_max >= 1.0 => 0.0,
        Radial::Tanh { u_max } => shell_tail(grid, u_max.atanh(), &g),
        Radial::Rapidity { chi_max, .. } => shell_tail(grid, chi_max, &g),
    };
    if tail > 1e-8 * value.size().max(1e-300) && tail > 1e-300 {
        return Err(Error::convergence(
            "integrate_hyperboloid",
            format!("cutoff tail {tail:.3e} is not negligible against {:.3e}", value.size()),
        ));
    }
    Ok(HyperIntegral { value, tail, error })
}

/// Radial density D(χ) = sinh²χ ∫ g dΩ near the cutoff, extrapolated as an exponential tail.
fn shell_tail<T: Accum, F: Fn(&FourVector) -> T + Sync + Send>(grid: &HyperboloidGrid, chi: f64, g: &F) -> f64 {
    let density = |x: f64| -> f64 {
        let (sh, ch) = (x.sinh(), x.cosh());
        let (cts, wt) = gauss_legendre_on(grid.n_theta, -1.0, 1.0);
        let dphi = 2.0 * PI / grid.n_phi as f64;
        let mut acc = 0.0;
        for (ct, w) in cts.iter().zip(&wt) {
            let st = (1.0 - ct * ct).max(0.0).sqrt();
            for j in 0..grid.n_phi {
                let ph = (j as f64 + 0.5) * dphi;
                let v = grid.frame.vector(&FourVector::new(ch, sh * st * ph.cos(), sh * st * ph.sin(), sh * ct));
                acc += g(&v).size() * w * dphi;
            }
        }
        acc * sh * sh
    };
    let d0 = density(chi);
    let d1 = density(chi + 0.25);
    if d0 == 0.0 {
        return 0.0;
    }
    if d1 >= d0 {
        return f64::INFINITY;
    }
    let rate = (d0 / d1).ln() / 0.25;
    d0 / rate
}

/// Named amplitude profiles f(v) on the hyperboloid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "kebab-case")]
pub enum ProfileShape {
    /// exp(−χ²/2w²) s with χ the rapidity from `center`.
    GaussianBump { center: [f64; 4], width: f64, spinor: [[f64; 2]; 4] },
    /// Sum of two Gaussian bumps with their own spinors.
    TwoBump { first: [f64; 4], second: [f64; 4], width: f64, spinor_a: [[f64; 2]; 4], spinor_b: [[f64; 2]; 4] },
    /// exp(−χ²/2w²) P₊(v) s: positive-frequency content at every v.
    PlusEigenpacket { center: [f64; 4], width: f64, spinor: [[f64; 2]; 4] },
}

/// Asymptotic Dirac amplitude with mass and coupling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiracProfile {
    pub shape: ProfileShape,
    pub mass: f64,
    pub coupling: f64,
}

fn spinor_of(s: &[[f64; 2]; 4]) -> DiracSpinor {
    DiracSpinor(s.map(|z| c(z[0], z[1])))
}

fn bump(center: &FourVector, width: f64, v: &FourVector) -> f64 {
    let chi = center.dot(v).max(1.0).acosh();
    (-0.5 * chi * chi / (width * width)).exp()
}

/// Rapidity between two unit timelike vectors.
pub fn rapidity_between(a: &FourVector, b: &FourVector) -> f64 {
    a.dot(b).max(1.0).acosh()
}

/// Unit timelike vector along a (future timelike) vector.
fn unit(v: &FourVector) -> FourVector {
    *v * (1.0 / v.norm_sqr().sqrt())
}

impl DiracProfile {
    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0) {
            return Err(Error::invalid("dirac_profile", "mass must be positive"));
        }
        let check = |v: &[f64; 4], w: f64| -> Result<()> {
            let v = FourVector(*v);
            if !v.is_unit_timelike(1e-9) || !(w > 0.0) {
                return Err(Error::invalid("dirac_profile", "bump centers must be unit timelike with positive width"));
            }
            Ok(())
        };
        match &self.shape {
            ProfileShape::GaussianBump { center, width, .. } | ProfileShape::PlusEigenpacket { center, width, .. } => {
                check(center, *width)
            }
            ProfileShape::TwoBump { first, second, width, .. } => {
                check(first, *width)?;
                check(second, *width)
            }
        }
    }

    /// f(v) before normalization.
    pub fn amplitude(&self, v: &FourVector) -> DiracSpinor {
        match &self.shape {
            ProfileShape::GaussianBump { center, width, spinor } => {
                spinor_of(spinor).scale(c(bump(&FourVector(*center), *width, v), 0.0))
            }
            ProfileShape::TwoBump { first, second, width, spinor_a, spinor_b } => {
                let a = spinor_of(spinor_a).scale(c(bump(&FourVector(*first), *width, v), 0.0));
                let b = spinor_of(spinor_b).scale(c(bump(&FourVector(*second), *width, v), 0.0));
                a.add(&b)
            }
            ProfileShape::PlusEigenpacket { center, width, spinor } => {
                let g = slash(v);
                let plus = DiracOperator::identity().add(&g).scale(c(0.5, 0.0));
                plus.apply(&spinor_of(spinor)).scale(c(bump(&FourVector(*center), *width, v), 0.0))
            }
        }
    }

    /// A centre and rapidity radius containing the profile up to e^{−18} in amplitude.
    pub fn support(&self) -> (FourVector, f64) {
        match &self.shape {
            ProfileShape::GaussianBump { center, width, .. } | ProfileShape::PlusEigenpacket { center, width, .. } => {
                (FourVector(*center), 6.0 * width)
            }
            ProfileShape::TwoBump { first, second, width, .. } => {
                let (a, b) = (FourVector(*first), FourVector(*second));
                let mid = unit(&(a + b));
                let r = rapidity_between(&mid, &a).max(rapidity_between(&mid, &b));
                (mid, r + 6.0 * width)
            }
        }
    }

    /// Peak width in rapidity.
    pub fn width(&self) -> f64 {
        match &self.shape {
            ProfileShape::GaussianBump { width, .. }
            | ProfileShape::PlusEigenpacket { width, .. }
            | ProfileShape::TwoBump { width, .. } => *width,
        }
    }
}

/// f̄ γ·z f, the density of the scalar product.
pub fn product_density(z: &FourVector, f: &DiracSpinor) -> f64 {
    f.bar_dot(&slash(z).apply(f)).re
}

/// (f₊†f₊ + f₋†f₋)/z⁰ with f± = P±(z) f.
pub fn projector_density(z: &FourVector, f: &DiracSpinor) -> Result<f64> {
    let (_, p, m) = dirac_algebra(z)?;
    let fp = p.apply(f);
    let fm = m.apply(f);
    Ok((fp.herm(&fp).re + fm.herm(&fm).re) / z.0[0])
}

/// A profile sampled on a grid that covers its support, optionally normalized to (f,f) = 1.
#[derive(Clone, Debug)]
pub struct DiracPacket {
    pub profile: DiracProfile,
    pub grid: HyperboloidGrid,
    pub scale: f64,
    pub samples: Vec<DiracSpinor>,
}

/// Default resolution (radial, polar, azimuthal) of packet grids.
pub const PACKET_RESOLUTION: (usize, usize, usize) = (48, 16, 32);

impl DiracPacket {
    pub fn new(profile: DiracProfile, resolution: (usize, usize, usize), normalize: bool) -> Result<Self> {
        profile.validate()?;
        let (center, radius) = profile.support();
        let grid = HyperboloidGrid::for_support(&center, radius, resolution.0, resolution.1, resolution.2)?;
        let raw = grid.sample(|v| profile.amplitude(v));
        let norm: f64 = pairwise_sum(
            &raw.iter().zip(&grid.nodes).zip(&grid.weights).map(|((f, v), w)| product_density(v, f) * w).collect::<Vec<_>>(),
        );
        if !(norm > 0.0) {
            return Err(Error::invalid("dirac_packet", "profile has vanishing norm"));
        }
        let scale = if normalize { 1.0 / norm.sqrt() } else { 1.0 };
        let samples = raw.into_iter().map(|f| f.scale(c(scale, 0.0))).collect();
        Ok(DiracPacket { profile, grid, scale, samples })
    }

    pub fn mass(&self) -> f64 {
        self.profile.mass
    }

    pub fn coupling(&self) -> f64 {
        self.profile.coupling
    }

    /// Normalized amplitude at any v.
    pub fn amplitude(&self, v: &FourVector) -> DiracSpinor {
        self.profile.amplitude(v).scale(c(self.scale, 0.0))
    }

    /// (f, f).
    pub fn norm_sqr(&self) -> f64 {
        self.integrate_nodes(product_density)
    }

    /// e (f, f).
    pub fn charge(&self) -> f64 {
        self.coupling() * self.norm_sqr()
    }

    /// ρ(v) = e f̄ γ·v f.
    pub fn density(&self, v: &FourVector) -> f64 {
        self.coupling() * product_density(v, &self.amplitude(v))
    }

    /// Node velocities with their weighted charge e f̄γ·v f w.
    pub fn currents(&self) -> Vec<(FourVector, f64)> {
        let e = self.coupling();
        (0..self.grid.len())
            .map(|k| {
                let v = self.grid.nodes[k];
                (v, e * product_density(&v, &self.samples[k]) * self.grid.weights[k])
            })
            .collect()
    }

    fn integrate_nodes<T: Accum, F: Fn(&FourVector, &DiracSpinor) -> T + Sync + Send>(&self, g: F) -> T {
        let vals = par_map(self.grid.len(), |k| g(&self.grid.nodes[k], &self.samples[k]) * self.grid.weights[k]);
        pairwise_sum(&vals)
    }

    /// Node-wise maximum of |f̄γ·zf − (f₊†f₊ + f₋†f₋)/z⁰|.
    pub fn positivity_residual(&self) -> Result<f64> {
        let mut worst = 0.0_f64;
        for (v, f) in self.grid.nodes.iter().zip(&self.samples) {
            worst = worst.max((product_density(v, f) - projector_density(v, f)?).abs());
        }
        Ok(worst)
    }
}

/// Largest admitted m·λ for the packet quadrature.
pub const OSCILLATION_BUDGET: f64 = 50.0;

/// Quadrature for the packet integral about the direction of x.
#[derive(Clone, Copy, Debug)]
pub struct OscillatoryQuadrature {
    pub nodes_per_panel: usize,
    /// Largest change of m x·v across one radial panel.
    pub phase_per_panel: f64,
    /// Largest panel length in rapidity.
    pub max_panel: f64,
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for OscillatoryQuadrature {
    fn default() -> Self {
        OscillatoryQuadrature { nodes_per_panel: 12, phase_per_panel: PI, max_panel: 0.25, n_theta: 24, n_phi: 48 }
    }
}

/// Panel edges on [lo, hi] keeping the change of k·cosh χ per panel below `phase`.
fn oscillation_edges(lo: f64, hi: f64, k: f64, phase: f64, max_panel: f64) -> Vec<f64> {
    let mut edges = vec![lo];
    let mut x = lo;
    while x < hi {
        let next = (x.cosh() + phase / k).acosh().min(x + max_panel).min(hi);
        edges.push(next);
        x = next;
    }
    edges
}

/// ψ(x) = (m/2π)^{3/2} ∫ e^{−im x·v γ·v} γ·v f(v) dμ(v) for x in the future cone.
pub fn dirac_packet(packet: &DiracPacket, x: &FourVector) -> Result<DiracSpinor> {
    dirac_packet_with(packet, x, &OscillatoryQuadrature::default())
}

/// [`dirac_packet`] with an explicit quadrature. The rule is centred on x/λ, where the phase
/// m x·v = mλ cosh χ depends on the radial coordinate only.
pub fn dirac_packet_with(packet: &DiracPacket, x: &FourVector, quad: &OscillatoryQuadrature) -> Result<DiracSpinor> {
    let xx = x.norm_sqr();
    if !(xx > 0.0 && x.0[0] > 0.0) {
        return Err(Error::invalid("dirac_packet", "x must lie inside the future light cone"));
    }
    let m = packet.mass();
    let lambda = xx.sqrt();
    if m * lambda > OSCILLATION_BUDGET {
        return Err(Error::invalid(
            "dirac_packet",
            format!("m·λ = {:.3} exceeds the oscillatory quadrature budget {OSCILLATION_BUDGET}", m * lambda),
        ));
    }
    let z = *x * (1.0 / lambda);
    let (center, radius) = packet.profile.support();
    let chi_c = rapidity_between(&z, &center);
    let edges = oscillation_edges((chi_c - radius).max(0.0), chi_c + radius, m * lambda, quad.phase_per_panel, quad.max_panel);
    let nodes = cap_nodes(&z, &center, radius, &edges, quad.nodes_per_panel, quad.n_theta, quad.n_phi)?;
    let pref = (m / (2.0 * PI)).powf(1.5);
    let terms = par_map(nodes.len(), |k| {
        let (chi, _, v, w) = nodes[k];
        let f = packet.amplitude(&v);
        let g = slash(&v);
        let plus = DiracOperator::identity().add(&g).scale(c(0.5, 0.0));
        let minus = DiracOperator::identity().sub(&g).scale(c(0.5, 0.0));
        let alpha = m * lambda * chi.cosh();
        // γ·v P± = ±P±
        let e = C::from_polar(1.0, -alpha);
        let out = plus.apply(&f).scale(e).sub(&minus.apply(&f).scale(e.conj()));
        out.scale(c(w * chi.sinh().powi(2) * pref, 0.0))
    });
    Ok(sum_spinors(&terms))
}

fn sum_spinors(v: &[DiracSpinor]) -> DiracSpinor {
    let comps: [C; 4] = std::array::from_fn(|i| pairwise_sum(&v.iter().map(|s| s.0[i]).collect::<Vec<_>>()));
    DiracSpinor(comps)
}

/// Leading term −i λ^{−3/2} e^{−i(mλ+π/4)γ·z} f(z) of the packet at x = λz.
pub fn packet_asymptote(packet: &DiracPacket, z: &FourVector, lambda: f64) -> Result<DiracSpinor> {
    let (_, plus, minus) = dirac_algebra(z)?;
    let f = packet.amplitude(z);
    let a = packet.mass() * lambda + 0.25 * PI;
    let e = C::from_polar(1.0, -a);
    let phase = plus.apply(&f).scale(e).add(&minus.apply(&f).scale(e.conj()));
    Ok(phase.scale(-I * lambda.powf(-1.5)))
}

/// Derivative of the degree-zero extension g(x/√(x·x)) along each coordinate x^b at x = z,
/// by fourth-order central differences.
pub fn tangential_derivative<T: Accum, F: Fn(&FourVector) -> T>(g: &F, z: &FourVector, h: f64) -> [T; 4] {
    let at = |x: FourVector| g(&unit(&x));
    // the normalization is nonlinear on the scale 1/z⁰
    let h = h / z.0[0].abs().max(1.0);
    std::array::from_fn(|b| {
        let mut e = [0.0; 4];
        e[b] = h;
        let e = FourVector(e);
        ((at(*z + e) - at(*z - e)) * 8.0 - (at(*z + e * 2.0) - at(*z - e * 2.0))) * (1.0 / (12.0 * h))
    })
}

/// Step of the tangential-derivative stencil.
pub const TANGENT_STEP: f64 = 1e-3;

impl Accum for DiracSpinor {
    fn zero() -> Self {
        DiracSpinor::zero()
    }
    fn size(&self) -> f64 {
        self.0.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

impl std::ops::Add for DiracSpinor {
    type Output = DiracSpinor;
    fn add(self, o: DiracSpinor) -> DiracSpinor {
        DiracSpinor::add(&self, &o)
    }
}

impl std::ops::Sub for DiracSpinor {
    type Output = DiracSpinor;
    fn sub(self, o: DiracSpinor) -> DiracSpinor {
        DiracSpinor::sub(&self, &o)
    }
}

impl std::ops::Mul<f64> for DiracSpinor {
    type Output = DiracSpinor;
    fn mul(self, k: f64) -> DiracSpinor {
        self.scale(c(k, 0.0))
    }
}

/// Outgoing timelike energy-momentum and angular momentum of a massive field.
#[derive(Clone, Copy, Debug)]
pub struct TimelikeCharges {
    pub momentum: FourVector,
    pub angular: Tensor,
    pub orbital: Tensor,
    pub spin: Tensor,
    /// Largest imaginary part met before taking real parts.
    pub imaginary: f64,
    /// Residual of δ_a z^b = δ_a^b − z_a z^b on the stencil.
    pub tangency: f64,
}

/// P_a = m∫z_a f̄f dμ and M_ab = ∫f̄γ·z(z_a iδ_b − z_b iδ_a + (i/4)[γ_a,γ_b])f dμ.
pub fn timelike_out_charges(packet: &DiracPacket) -> Result<TimelikeCharges> {
    timelike_charges_of(&|v: &FourVector| packet.amplitude(v), &packet.grid, packet.mass())
}

/// Same as [`timelike_out_charges`] for any amplitude on a given grid.
pub fn timelike_charges_of<F: Fn(&FourVector) -> DiracSpinor + Sync>(
    f: &F,
    grid: &HyperboloidGrid,
    mass: f64,
) -> Result<TimelikeCharges> {
    charges_from_jets(grid, mass, |k| {
        let z = grid.nodes[k];
        (f(&z), tangential_derivative(f, &z, TANGENT_STEP))
    })
}

/// Charges from the amplitude and its tangential derivatives at each grid node.
fn charges_from_jets<J: Fn(usize) -> (DiracSpinor, [DiracSpinor; 4]) + Sync>(
    grid: &HyperboloidGrid,
    mass: f64,
    jet: J,
) -> Result<TimelikeCharges> {
    let tangency = tangency_residual(grid);
    if tangency > 1e-6 {
        return Err(Error::invariant(
            "timelike_out_charges",
            format!("tangential derivative fails δ_a z^b = h_a^b by {tangency:.3e}"),
        ));
    }
    let spins: Vec<Vec<DiracOperator>> = (0..4).map(|a| (0..4).map(|b| spin_matrix(a, b)).collect()).collect();
    let per_node = par_map(grid.len(), |k| {
        let z = grid.nodes[k];
        let w = grid.weights[k];
        let (fz, d) = jet(k);
        let zl = z.lower();
        let gz = slash(&z);
        let bra = |x: &DiracSpinor| fz.bar_dot(&gz.apply(x));
        let mut out = [ZERO; 36];
        let ff = fz.bar_dot(&fz);
        for a in 0..4 {
            out[a] = ff * (mass * zl[a] * w);
        }
        for a in 0..4 {
            for b in 0..4 {
                let orb = d[b].scale(I * zl[a]).sub(&d[a].scale(I * zl[b]));
                out[4 + 4 * a + b] = bra(&orb) * w;
                out[20 + 4 * a + b] = bra(&spins[a][b].apply(&fz)) * w;
            }
        }
        out
    });
    let total: Vec<C> = (0..36).map(|i| pairwise_sum(&per_node.iter().map(|r| r[i]).collect::<Vec<_>>())).collect();
    let mut imaginary = 0.0_f64;
    let momentum = FourVector::from_lower(std::array::from_fn(|a| {
        imaginary = imaginary.max(total[a].im.abs());
        total[a].re
    }));
    let mut orbital = Tensor::zero();
    let mut spin = Tensor::zero();
    for a in 0..4 {
        for b in 0..4 {
            orbital.0[a][b] = total[4 + 4 * a + b].re;
            spin.0[a][b] = total[20 + 4 * a + b].re;
            imaginary = imaginary.max(total[4 + 4 * a + b].im.abs()).max(total[20 + 4 * a + b].im.abs());
        }
    }
    Ok(TimelikeCharges { momentum, angular: orbital.add(&spin), orbital, spin, imaginary, tangency })
}

fn tangency_residual(grid: &HyperboloidGrid) -> f64 {
    let probes = [0, grid.len() / 3, grid.len() / 2, grid.len() - 1];
    let mut worst = 0.0_f64;
    for &k in &probes {
        let z = grid.nodes[k];
        let zl = z.lower();
        for cidx in 0..4 {
            let d = tangential_derivative(&|x: &FourVector| x.0[cidx], &z, TANGENT_STEP);
            for (b, db) in d.iter().enumerate() {
                let delta = if b == cidx { 1.0 } else { 0.0 };
                let scale = 1.0 + z.0[0] * z.0[0];
                worst = worst.max((db - (delta - zl[b] * z.0[cidx])).abs() / scale);
            }
        }
    }
    worst
}

/// Coulomb potential of a hyperboloid density seen from z, with its compensating gauge.
#[derive(Clone, Copy, Debug)]
pub struct GaugedPotential {
    pub z: FourVector,
    pub lambda: f64,
    /// a_b(z), lower index.
    pub a: [f64; 4],
    /// Part of a_b orthogonal to z.
    pub a_transverse: [f64; 4],
    /// δ_b(z·a).
    pub grad_za: [f64; 4],
    /// A_tr,b(λz) = λ^{−1}(a_T,b − lnλ δ_b(z·a)).
    pub a_tr: [f64; 4],
    /// Coulomb field coefficient f_ab(z).
    pub field: Tensor,
}

/// Resolution of the z-centred quadrature used for Coulomb potentials.
#[derive(Clone, Copy, Debug)]
pub struct CentredQuadrature {
    pub n_radial: usize,
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for CentredQuadrature {
    fn default() -> Self {
        CentredQuadrature { n_radial: 64, n_theta: 24, n_phi: 32 }
    }
}

/// Nodes (χ, N, v, w) for dχ dΩ about z, restricted to the region that can meet the ball of
/// rapidity radius `radius` around `center`.
fn centred_nodes(
    z: &FourVector,
    center: &FourVector,
    radius: f64,
    quad: &CentredQuadrature,
) -> Result<Vec<(f64, FourVector, FourVector, f64)>> {
    let chi_c = rapidity_between(z, center);
    let (lo, hi) = ((chi_c - radius).max(0.0), chi_c + radius);
    let panels = ((hi - lo) / 0.5).ceil().max(1.0) as usize;
    let per = quad.n_radial.div_ceil(panels).max(4);
    let edges: Vec<f64> = (0..=panels).map(|p| lo + (hi - lo) * p as f64 / panels as f64).collect();
    cap_nodes(z, center, radius, &edges, per, quad.n_theta, quad.n_phi)
}

/// Nodes on radial panels `edges` about z, with the polar range cut to the cap that can meet
/// the ball of rapidity radius `radius` around `center`.
fn cap_nodes(
    z: &FourVector,
    center: &FourVector,
    radius: f64,
    edges: &[f64],
    per: usize,
    n_theta: usize,
    n_phi: usize,
) -> Result<Vec<(f64, FourVector, FourVector, f64)>> {
    let frame = Lorentz::boost_to(z)?;
    let inv = frame.inverse();
    let local = inv.vector(center);
    let chi_c = rapidity_between(z, center);
    let sp = local.spatial();
    let sn = (sp[0] * sp[0] + sp[1] * sp[1] + sp[2] * sp[2]).sqrt();
    let axis = if sn > 1e-12 { sp.map(|x| x / sn) } else { [0.0, 0.0, 1.0] };
    let pick = if axis[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
    let e1 = crate::sphere::normalize(crate::sphere::cross(pick, axis));
    let e2 = crate::sphere::cross(axis, e1);
    let ct_min = if chi_c <= radius {
        -1.0
    } else {
        let s = (radius.sinh() / chi_c.sinh()).min(1.0);
        (2.0 * s.asin()).min(PI).cos()
    };
    let (cts, wts) = gauss_legendre_on(n_theta, ct_min, 1.0);
    let dphi = 2.0 * PI / n_phi as f64;
    let mut out = Vec::new();
    for pair in edges.windows(2) {
        let (xs, ws) = gauss_legendre_on(per, pair[0], pair[1]);
        for (chi, wc) in xs.iter().zip(&ws) {
            for (ct, wt) in cts.iter().zip(&wts) {
                let st = (1.0 - ct * ct).max(0.0).sqrt();
                for j in 0..n_phi {
                    let ph = (j as f64 + 0.5) * dphi;
                    let (s, co) = ph.sin_cos();
                    let n: [f64; 3] = std::array::from_fn(|i| ct * axis[i] + st * (co * e1[i] + s * e2[i]));
                    let big_n = frame.vector(&FourVector::new(0.0, n[0], n[1], n[2]));
                    let v = *z * chi.cosh() + big_n * chi.sinh();
                    out.push((*chi, big_n, v, wc * wt * dphi));
                }
            }
        }
    }
    Ok(out)
}

/// a_b(z) = ∫ v_b ρ(v) dμ/√((z·v)²−1) and the transformed potential at λz.
///
/// In rapidity coordinates about z the kernel singularity cancels against the measure.
pub fn coulomb_gauge_potential<F: Fn(&FourVector) -> f64 + Sync>(
    density: &F,
    support: (FourVector, f64),
    z: &FourVector,
    lambda: f64,
    quad: &CentredQuadrature,
) -> Result<GaugedPotential> {
    if !z.is_unit_timelike(1e-9) || !(lambda > 0.0) {
        return Err(Error::invalid("coulomb_gauge_potential", "z must be unit timelike and λ positive"));
    }
    let nodes = centred_nodes(z, &support.0, support.1, quad)?;
    let per = par_map(nodes.len(), |k| {
        let (chi, n, v, w) = nodes[k];
        let rho = density(&v) * w;
        let vl = v.lower();
        let nl = n.lower();
        let mut out = [0.0; 24];
        for b in 0..4 {
            out[b] = vl[b] * rho * chi.sinh();
            out[4 + b] = -nl[b] * rho;
        }
        let zl = z.lower();
        for a in 0..4 {
            for b in 0..4 {
                out[8 + 4 * a + b] = (zl[a] * nl[b] - zl[b] * nl[a]) * rho;
            }
        }
        out
    });
    let sum = |i: usize| pairwise_sum(&per.iter().map(|r| r[i]).collect::<Vec<_>>());
    let a: [f64; 4] = std::array::from_fn(sum);
    let grad_za: [f64; 4] = std::array::from_fn(|b| sum(4 + b));
    let field = Tensor(std::array::from_fn(|p| std::array::from_fn(|q| sum(8 + 4 * p + q))));
    let zl = z.lower();
    let za: f64 = (0..4).map(|b| z.0[b] * a[b]).sum();
    let a_transverse: [f64; 4] = std::array::from_fn(|b| a[b] - za * zl[b]);
    let ln = lambda.ln();
    let a_tr: [f64; 4] = std::array::from_fn(|b| (a_transverse[b] - ln * grad_za[b]) / lambda);
    Ok(GaugedPotential { z: *z, lambda, a, a_transverse, grad_za, a_tr, field })
}

/// ∫ dμ(v) / [(√((z·v)²−1))^β (z·v + √((z·v)²−1))^γ (t·v)^{α+1}].
pub fn estimate_kernel(z: &FourVector, t: &FourVector, beta: f64, gamma: f64, alpha: f64, quad: &CentredQuadrature) -> Result<f64> {
    let chi_z = rapidity_between(z, t);
    let reach = chi_z + 30.0 / (alpha + 1.0).max(1.0);
    let nodes = centred_nodes(z, z, reach, quad)?;
    let vals = par_map(nodes.len(), |k| {
        let (chi, _, v, w) = nodes[k];
        let sh = chi.sinh();
        // dμ = sinh²χ dχ dΩ, √((z·v)²−1) = sinh χ, z·v + sinh χ = e^χ
        sh.powf(2.0 - beta) * (-gamma * chi).exp() / t.dot(&v).powf(alpha + 1.0) * w
    });
    Ok(pairwise_sum(&vals))
}

/// lnλ-dependent and λ-independent parts of the double integral
/// ∫∫ ρ(z)ρ(v) (z∧v)/√((z·v)²−1) (1 + lnλ/((z·v)²−1)) dμ dμ; both vanish by antisymmetry.
pub fn coulomb_antisymmetry(packet: &DiracPacket, lambda: f64) -> (Tensor, Tensor) {
    let cur = packet.currents();
    let n = cur.len();
    let ln = lambda.ln();
    let rows = par_map(n, |i| {
        let (z, wz) = cur[i];
        let zl = z.lower();
        let mut a = [[0.0; 4]; 4];
        let mut b = [[0.0; 4]; 4];
        for (j, (v, wv)) in cur.iter().enumerate() {
            if i == j {
                continue;
            }
            let cz = z.dot(v);
            let s2 = cz * cz - 1.0;
            if s2 <= 1e-14 {
                continue;
            }
            let vl = v.lower();
            let k = wz * wv / s2.sqrt();
            for p in 0..4 {
                for q in 0..4 {
                    let wedge = zl[p] * vl[q] - zl[q] * vl[p];
                    a[p][q] += k * wedge;
                    b[p][q] += k * wedge * ln / s2;
                }
            }
        }
        (a, b)
    });
    let mut a = Tensor::zero();
    let mut b = Tensor::zero();
    for p in 0..4 {
        for q in 0..4 {
            a.0[p][q] = pairwise_sum(&rows.iter().map(|r| r.0[p][q]).collect::<Vec<_>>());
            b.0[p][q] = pairwise_sum(&rows.iter().map(|r| r.1[p][q]).collect::<Vec<_>>());
        }
    }
    (a, b)
}

/// H(z) = (e/4π) ∫ Φ(l) dl / (z·l)².
pub fn phase_field(phi: &HomogeneousFn, coupling: f64, sphere: &NullGrid, z: &FourVector) -> C {
    sphere.integrate_with(|n| phi.eval(&n.o) / z.dot(&n.l).powi(2)) * (coupling / (4.0 * PI))
}

/// H(z) with its tangential derivative δ_b H = 2z_b H − (e/2π)∫Φ l_b dl/(z·l)³ (lower index).
pub fn phase_jet(phi: &HomogeneousFn, coupling: f64, sphere: &NullGrid, z: &FourVector) -> (C, [C; 4]) {
    let sums = sphere.integrate_with(|n| {
        let f = phi.eval(&n.o);
        let zl = z.dot(&n.l);
        let ll = n.l.lower();
        let mut out = [ZERO; 5];
        out[0] = f / (zl * zl);
        for b in 0..4 {
            out[b + 1] = f * (ll[b] / (zl * zl * zl));
        }
        CVec(out)
    });
    let k = coupling / (4.0 * PI);
    let h = sums.0[0] * k;
    let zl = z.lower();
    (h, std::array::from_fn(|b| h * (2.0 * zl[b]) - sums.0[b + 1] * (2.0 * k)))
}

/// The dressed amplitude g = e^{iH} f.
#[derive(Clone)]
pub struct Dressing {
    pub packet: Arc<DiracPacket>,
    pub phi: HomogeneousFn,
    pub sphere: NullGrid,
    /// H at the packet's grid nodes.
    pub phase: Vec<C>,
    /// δ_b H at the packet's grid nodes.
    pub gradient: Vec<[C; 4]>,
}

impl Dressing {
    pub fn phase_at(&self, z: &FourVector) -> C {
        phase_field(&self.phi, self.packet.coupling(), &self.sphere, z)
    }

    pub fn amplitude(&self, z: &FourVector) -> DiracSpinor {
        self.packet.amplitude(z).scale((I * self.phase_at(z)).exp())
    }

    /// ‖g‖² − ‖f‖² on the packet grid.
    pub fn norm_change(&self) -> f64 {
        let grid = &self.packet.grid;
        let terms: Vec<f64> = (0..grid.len())
            .map(|k| {
                let v = &grid.nodes[k];
                let f = &self.packet.samples[k];
                let g = f.scale((I * self.phase[k]).exp());
                (product_density(v, &g) - product_density(v, f)) * grid.weights[k]
            })
            .collect();
        pairwise_sum(&terms)
    }

    /// ΔM_ab = −(f, (z_a δ_bH − z_b δ_aH) f).
    pub fn mixing_tensor(&self) -> Tensor {
        let grid = &self.packet.grid;
        let per = par_map(grid.len(), |k| {
            let z = grid.nodes[k];
            let dh = &self.gradient[k];
            let zl = z.lower();
            let rho = product_density(&z, &self.packet.samples[k]) * grid.weights[k];
            let mut out = [0.0; 16];
            for a in 0..4 {
                for b in 0..4 {
                    out[4 * a + b] = -(zl[a] * dh[b].re - zl[b] * dh[a].re) * rho;
                }
            }
            out
        });
        let mut t = Tensor::zero();
        for a in 0..4 {
            for b in 0..4 {
                t.0[a][b] = pairwise_sum(&per.iter().map(|r| r[4 * a + b]).collect::<Vec<_>>());
            }
        }
        t
    }

    /// Timelike charges of g, with δg = e^{iH}(δf + i δH f).
    pub fn charges(&self) -> Result<TimelikeCharges> {
        let grid = &self.packet.grid;
        let packet = &self.packet;
        charges_from_jets(grid, packet.mass(), |k| {
            let z = grid.nodes[k];
            let f = packet.samples[k];
            let df = tangential_derivative(&|v: &FourVector| packet.amplitude(v), &z, TANGENT_STEP);
            let e = (I * self.phase[k]).exp();
            let dg = std::array::from_fn(|b| df[b].add(&f.scale(I * self.gradient[k][b])).scale(e));
            (f.scale(e), dg)
        })
    }
}

/// H and δH on the packet nodes, defining the dressed amplitude g = e^{iH} f.
pub fn phase_dressing(packet: Arc<DiracPacket>, phi: HomogeneousFn, sphere: NullGrid) -> Dressing {
    let coupling = packet.coupling();
    let jets = packet.grid.sample(|z| phase_jet(&phi, coupling, &sphere, z));
    let (phase, gradient) = jets.into_iter().unzip();
    Dressing { packet, phi, sphere, phase, gradient }
}
