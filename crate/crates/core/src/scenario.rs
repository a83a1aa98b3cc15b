//! Configuration-driven scenarios: building field and particle data from a TOML document,
//! computing the requested blocks and emitting deterministic reports.
//!
//! Every reported value carries an error estimate: the difference between the run on the
//! configured grids and a rerun on grids coarsened by a factor 2/3.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::charges::{
    angular_momentum_split, mixing_term, phase_gradient, radiated_angular_momentum, radiated_momentum,
    radiation_budget, trajectory_shift, Infinity,
};
use crate::em::{
    closed_form_q, coulomb_spacelike, longrange_vars, news_field, phi_from_sigma, phi_residual, radial_limit,
    reconstruction_residual, spacelike_limit, CurrentModel, EMAsymptoticData, FieldQuadrature, FreeNews,
    NewsChannel, PointCharge,
};
use crate::error::{Error, Result};
use crate::hyperboloid::{
    dirac_packet, packet_asymptote, phase_dressing, phase_field, projector_density, timelike_out_charges, DiracPacket,
    DiracProfile,
};
use crate::pulse::PulseShape;
use crate::quadrature::CVec;
use crate::scalar::Ladder;
use crate::sphere::{HomogeneousFn, NullGrid};
use crate::spinors::{c, null_vector_of, FourVector, Lorentz, SymSpinor, Tensor, C, ZERO};
use crate::worldline::Worldline;

const AXES: [&str; 4] = ["t", "x", "y", "z"];

fn time_vector() -> [f64; 4] {
    [1.0, 0.0, 0.0, 0.0]
}

fn default_sphere() -> [usize; 2] {
    [24, 48]
}

fn default_hyperboloid() -> [usize; 3] {
    [48, 16, 32]
}

fn one() -> f64 {
    1.0
}

fn default_axis() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

fn default_duration() -> f64 {
    0.5
}

fn default_spacing() -> f64 {
    12.0
}

fn default_lambdas() -> Vec<f64> {
    vec![10.0, 20.0, 40.0]
}

/// Rest frame of the observer; every gauge-dependent quantity refers to it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameConfig {
    #[serde(default = "time_vector")]
    pub t: [f64; 4],
}

impl Default for FrameConfig {
    fn default() -> Self {
        FrameConfig { t: time_vector() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Polar × azimuthal nodes of the null-direction sphere.
    #[serde(default = "default_sphere")]
    pub sphere: [usize; 2],
    /// Radial × polar × azimuthal nodes of the velocity hyperboloid.
    #[serde(default = "default_hyperboloid")]
    pub hyperboloid: [usize; 3],
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { sphere: default_sphere(), hyperboloid: default_hyperboloid() }
    }
}

/// A charge at rest in some inertial frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaticCharge {
    /// Electric and magnetic parts (Q = e + i g).
    pub charge: [f64; 2],
    #[serde(default)]
    pub velocity: Option<[f64; 4]>,
    #[serde(default)]
    pub anchor: [f64; 4],
}

/// A charge whose 3-velocity is reversed: u₁ = boost(ξ, +axis) turns into u₂ = boost(ξ, −axis).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Kink {
    pub charge: [f64; 2],
    pub rapidity: f64,
    #[serde(default = "default_axis")]
    pub axis: [f64; 3],
    /// Proper time spent turning.
    #[serde(default = "default_duration")]
    pub duration: f64,
}

/// Test particle scattered by the zero-frequency part of the field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Probe {
    #[serde(default = "one")]
    pub charge: f64,
    #[serde(default = "one")]
    pub mass: f64,
    #[serde(default)]
    pub velocity: Option<[f64; 4]>,
}

impl Default for Probe {
    fn default() -> Self {
        Probe { charge: 1.0, mass: 1.0, velocity: None }
    }
}

/// A Gaussian news pulse ζ = A e^{−((s−c)/w)²} along each polarization channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianPulse {
    #[serde(default = "one")]
    pub amplitude: f64,
    pub width: f64,
    #[serde(default)]
    pub center: f64,
    /// Three real dipole channels along the rest axes, delayed by `spacing`; otherwise a single
    /// channel with the given complex polarization.
    #[serde(default)]
    pub polarization: Option<[[f64; 2]; 3]>,
    #[serde(default = "default_spacing")]
    pub spacing: f64,
}

/// Piece of a composite scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "part", rename_all = "kebab-case")]
pub enum Part {
    StaticCharge(StaticCharge),
    ParticleKink(Kink),
    GaussianPulse(GaussianPulse),
}

/// Dressing field of a Dirac scenario: Φ of a kink.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiracScenario {
    pub profile: DiracProfile,
    #[serde(default)]
    pub dressing: Option<Kink>,
    /// Values of λ at which the packet is compared with its leading asymptote.
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
    /// Direction z of the comparison; defaults to the profile centre.
    #[serde(default)]
    pub direction: Option<[f64; 4]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Scenario {
    StaticCharge(StaticCharge),
    ParticleKink {
        #[serde(flatten)]
        kink: Kink,
        #[serde(default)]
        probe: Probe,
    },
    GaussianPulse(GaussianPulse),
    DiracPacket(Box<DiracScenario>),
    Composite {
        parts: Vec<Part>,
        #[serde(default)]
        probe: Option<Probe>,
    },
}

/// Report blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Block {
    Asymptote,
    Radiate,
    Budget,
    Longrange,
    Shift,
    Dirac,
}

impl Block {
    pub const ALL: [Block; 6] = [Block::Asymptote, Block::Radiate, Block::Budget, Block::Longrange, Block::Shift, Block::Dirac];

    pub fn name(&self) -> &'static str {
        match self {
            Block::Asymptote => "asymptote",
            Block::Radiate => "radiate",
            Block::Budget => "budget",
            Block::Longrange => "longrange",
            Block::Shift => "shift",
            Block::Dirac => "dirac",
        }
    }
}

/// Thresholds of the checks run alongside a scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// |(1/2π)∫q − Q|.
    pub q_mean: f64,
    /// |(1/2π)∫σ|.
    pub sigma_mean: f64,
    /// max |q + σ − q′ − σ′|.
    pub constraint: f64,
    /// ∂Φ against the infrared limits.
    pub phi: f64,
    /// Rebuilt ζ(+∞) against the data.
    pub reconstruction: f64,
    /// Existence condition for electric-type data.
    pub existence: f64,
    /// Free + mixing − total angular momentum.
    pub split: f64,
    /// Mixing term against −½ m(Δy∧v).
    pub mixing: f64,
    /// −2H against δ.
    pub phase: f64,
    /// Gradient of δ against mΔy modulo v.
    pub gradient: f64,
    /// Spacelike limit against its closed form or between infinities.
    pub spacelike: f64,
    /// Dressing transfer against the mixing term.
    pub dressing: f64,
    /// Scalar-product positivity identity.
    pub positivity: f64,
    /// Change of ‖f‖ under the phase dressing.
    pub norm: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            q_mean: 1e-8,
            sigma_mean: 1e-8,
            constraint: 1e-8,
            phi: 1e-6,
            reconstruction: 1e-6,
            existence: 1e-8,
            split: 1e-7,
            mixing: 1e-5,
            phase: 1e-8,
            gradient: 1e-5,
            spacelike: 1e-6,
            dressing: 1e-5,
            positivity: 1e-10,
            norm: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn scaled(&self, k: f64) -> Tolerances {
        let mut out = self.clone();
        for v in out.fields_mut() {
            *v *= k;
        }
        out
    }

    fn fields_mut(&mut self) -> [&mut f64; 14] {
        [
            &mut self.q_mean,
            &mut self.sigma_mean,
            &mut self.constraint,
            &mut self.phi,
            &mut self.reconstruction,
            &mut self.existence,
            &mut self.split,
            &mut self.mixing,
            &mut self.phase,
            &mut self.gradient,
            &mut self.spacelike,
            &mut self.dressing,
            &mut self.positivity,
            &mut self.norm,
        ]
    }

    pub fn table(&self) -> BTreeMap<String, f64> {
        let v = serde_json::to_value(self).expect("plain struct");
        v.as_object()
            .expect("object")
            .iter()
            .map(|(k, x)| (k.clone(), x.as_f64().expect("number")))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub frame: FrameConfig,
    #[serde(default)]
    pub grid: GridConfig,
    pub scenario: Scenario,
    /// Blocks to compute; empty means every block that applies to the scenario.
    #[serde(default)]
    pub outputs: Vec<Block>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn unit_future(v: [f64; 4], what: &str) -> Result<[f64; 4]> {
    let u = FourVector(v);
    if !(u.norm_sqr() > 0.0 && u.0[0] > 0.0) {
        return Err(Error::Config(format!("{what} {v:?} is not future timelike")));
    }
    Ok((u * (1.0 / u.norm_sqr().sqrt())).0)
}

fn unit_axis(a: [f64; 3], what: &str) -> Result<[f64; 3]> {
    let n = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    if !(n > 0.0) {
        return Err(Error::Config(format!("{what} must be a nonzero 3-vector")));
    }
    Ok(a.map(|x| x / n))
}

fn check_kink(k: &mut Kink) -> Result<()> {
    k.axis = unit_axis(k.axis, "kink axis")?;
    if !(k.rapidity > 0.0 && k.rapidity <= 5.0) {
        return Err(Error::Config("kink rapidity must lie in (0, 5]".into()));
    }
    if !(k.duration > 0.0) {
        return Err(Error::Config("kink duration must be positive".into()));
    }
    Ok(())
}

fn check_probe(p: &mut Probe) -> Result<()> {
    if !(p.mass > 0.0) {
        return Err(Error::Config("probe mass must be positive".into()));
    }
    if let Some(v) = p.velocity {
        p.velocity = Some(unit_future(v, "probe velocity")?);
    }
    Ok(())
}

fn check_pulse(p: &GaussianPulse) -> Result<()> {
    if !(p.width > 0.0) || !(p.spacing > 0.0) {
        return Err(Error::Config("pulse width and spacing must be positive".into()));
    }
    Ok(())
}

fn check_static(s: &mut StaticCharge) -> Result<()> {
    if let Some(v) = s.velocity {
        s.velocity = Some(unit_future(v, "charge velocity")?);
    }
    Ok(())
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validated()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        ScenarioConfig::from_toml(&text)
    }

    /// Normalizes every declared vector and checks resolutions against their bounds.
    pub fn validated(mut self) -> Result<Self> {
        self.frame.t = unit_future(self.frame.t, "frame vector t")?;
        let [nt, np] = self.grid.sphere;
        if !(6..=128).contains(&nt) || !(12..=256).contains(&np) {
            return Err(Error::Config("sphere resolution must lie in [6,128] × [12,256]".into()));
        }
        let [hr, ht, hp] = self.grid.hyperboloid;
        if !(6..=512).contains(&hr) || !(6..=128).contains(&ht) || !(6..=256).contains(&hp) {
            return Err(Error::Config("hyperboloid resolution must lie in [6,512] × [6,128] × [6,256]".into()));
        }
        for (name, v) in self.tolerances.table() {
            if !(v > 0.0) {
                return Err(Error::Config(format!("tolerance {name} must be positive")));
            }
        }
        match &mut self.scenario {
            Scenario::StaticCharge(s) => check_static(s)?,
            Scenario::ParticleKink { kink, probe } => {
                check_kink(kink)?;
                check_probe(probe)?;
            }
            Scenario::GaussianPulse(p) => check_pulse(p)?,
            Scenario::DiracPacket(d) => {
                d.profile.validate().map_err(|e| Error::Config(e.to_string()))?;
                if let Some(k) = &mut d.dressing {
                    check_kink(k)?;
                }
                if let Some(z) = d.direction {
                    d.direction = Some(unit_future(z, "comparison direction")?);
                }
                if d.lambdas.iter().any(|l| !(*l > 0.0)) {
                    return Err(Error::Config("λ values must be positive".into()));
                }
            }
            Scenario::Composite { parts, probe } => {
                if parts.is_empty() {
                    return Err(Error::Config("composite scenario needs at least one part".into()));
                }
                if parts.iter().filter(|p| matches!(p, Part::GaussianPulse(_))).count() > 1 {
                    return Err(Error::Config("composite scenario admits a single pulse".into()));
                }
                for p in parts.iter_mut() {
                    match p {
                        Part::StaticCharge(s) => check_static(s)?,
                        Part::ParticleKink(k) => check_kink(k)?,
                        Part::GaussianPulse(g) => check_pulse(g)?,
                    }
                }
                if let Some(p) = probe {
                    check_probe(p)?;
                }
            }
        }
        Ok(self)
    }

    /// SHA-256 of the canonical JSON form of the validated config.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Blocks that apply to the scenario kind.
    pub fn applicable(&self) -> Vec<Block> {
        match &self.scenario {
            Scenario::StaticCharge(_) => vec![Block::Asymptote, Block::Radiate, Block::Budget, Block::Longrange],
            Scenario::ParticleKink { .. } => {
                vec![Block::Asymptote, Block::Radiate, Block::Budget, Block::Longrange, Block::Shift]
            }
            Scenario::GaussianPulse(_) => vec![Block::Asymptote, Block::Radiate, Block::Budget, Block::Longrange],
            Scenario::DiracPacket(_) => vec![Block::Dirac],
            Scenario::Composite { probe, .. } => {
                let mut b = vec![Block::Asymptote, Block::Radiate, Block::Budget, Block::Longrange];
                if probe.is_some() {
                    b.push(Block::Shift);
                }
                b
            }
        }
    }

    /// The requested blocks, or all applicable ones when none are requested.
    pub fn blocks(&self) -> Result<Vec<Block>> {
        let ok = self.applicable();
        if self.outputs.is_empty() {
            return Ok(ok);
        }
        let mut out = self.outputs.clone();
        out.sort();
        out.dedup();
        if let Some(b) = out.iter().find(|b| !ok.contains(b)) {
            return Err(Error::Config(format!("block {} does not apply to this scenario", b.name())));
        }
        Ok(out)
    }
}

/// A value with its error estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// A check that exceeded its tolerance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub config_hash: String,
    pub version: String,
    pub sphere_grid: [usize; 2],
    pub coarse_sphere_grid: [usize; 2],
    pub hyperboloid_grid: [usize; 3],
    pub coarse_hyperboloid_grid: [usize; 3],
    pub blocks: Vec<Block>,
    pub tolerances: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub values: BTreeMap<String, Estimate>,
    pub violations: Vec<Violation>,
    pub provenance: Provenance,
}

/// Output layout of a report.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    /// Flat CSV: name, value, error.
    Table,
    /// JSON document.
    Structured,
}

impl Report {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).map(|e| e.value)
    }

    pub fn render(&self, format: ReportFormat) -> Result<String> {
        match format {
            ReportFormat::Structured => {
                let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))?;
                s.push('\n');
                Ok(s)
            }
            ReportFormat::Table => {
                let mut w = csv::Writer::from_writer(Vec::new());
                let io = |e: csv::Error| Error::Config(e.to_string());
                w.write_record(["name", "value", "error"]).map_err(io)?;
                for (k, e) in &self.values {
                    w.write_record([k.as_str(), &format!("{:.15e}", e.value), &format!("{:.15e}", e.error)]).map_err(io)?;
                }
                for v in &self.violations {
                    w.write_record([format!("violation.{}", v.name), format!("{:.15e}", v.value), format!("{:.15e}", v.tolerance)])
                        .map_err(io)?;
                }
                let p = &self.provenance;
                let rows = [
                    ("provenance.config_hash", p.config_hash.clone()),
                    ("provenance.version", p.version.clone()),
                    ("provenance.sphere_grid", format!("{}x{}", p.sphere_grid[0], p.sphere_grid[1])),
                    ("provenance.coarse_sphere_grid", format!("{}x{}", p.coarse_sphere_grid[0], p.coarse_sphere_grid[1])),
                    (
                        "provenance.hyperboloid_grid",
                        format!("{}x{}x{}", p.hyperboloid_grid[0], p.hyperboloid_grid[1], p.hyperboloid_grid[2]),
                    ),
                    (
                        "provenance.coarse_hyperboloid_grid",
                        format!(
                            "{}x{}x{}",
                            p.coarse_hyperboloid_grid[0], p.coarse_hyperboloid_grid[1], p.coarse_hyperboloid_grid[2]
                        ),
                    ),
                    ("provenance.blocks", p.blocks.iter().map(|b| b.name()).collect::<Vec<_>>().join(";")),
                ];
                for (k, v) in rows {
                    w.write_record([k, v.as_str(), ""]).map_err(io)?;
                }
                for (k, v) in &p.tolerances {
                    w.write_record([format!("tolerance.{k}"), format!("{v:.15e}"), String::new()]).map_err(io)?;
                }
                let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
                String::from_utf8(bytes).map_err(|e| Error::Config(e.to_string()))
            }
        }
    }

    pub fn write(&self, path: &Path, format: ReportFormat) -> Result<()> {
        std::fs::write(path, self.render(format)?)?;
        Ok(())
    }
}

// ---------------------------------------------------------------------------------------------
// Setup

struct Setup {
    t: FourVector,
    frame: Lorentz,
    data: Option<EMAsymptoticData>,
    news: Option<FreeNews>,
    /// Charge of a single static source, for the closed-form spacelike check.
    static_only: Option<C>,
    probe: Option<(f64, f64, FourVector)>,
    kink_phi: Option<(C, FourVector, FourVector)>,
    dirac: Option<(Arc<DiracPacket>, DiracScenario)>,
}

fn cplx(z: [f64; 2]) -> C {
    c(z[0], z[1])
}

fn kink_velocities(k: &Kink, frame: &Lorentz) -> (FourVector, FourVector) {
    let up = FourVector::boosted(k.rapidity, k.axis);
    let down = FourVector::boosted(k.rapidity, k.axis.map(|x| -x));
    (frame.vector(&up), frame.vector(&down))
}

fn kink_charge(k: &Kink, frame: &Lorentz) -> Result<PointCharge> {
    let (u1, u2) = kink_velocities(k, frame);
    let worldline = Worldline::new(FourVector([0.0; 4]), &[u1, u2], &[k.duration])?;
    Ok(PointCharge { worldline, charge: cplx(k.charge) })
}

fn static_charge(s: &StaticCharge, t: &FourVector) -> Result<PointCharge> {
    let v = s.velocity.map(FourVector).unwrap_or(*t);
    Ok(PointCharge { worldline: Worldline::inertial(FourVector(s.anchor), v)?, charge: cplx(s.charge) })
}

fn pulse_news(p: &GaussianPulse, t: &FourVector) -> Result<FreeNews> {
    let shape = PulseShape::gaussian(p.amplitude, p.center, p.width);
    match p.polarization {
        None => FreeNews::isotropic(t, shape, p.spacing),
        Some(pol) => FreeNews::new(t, vec![NewsChannel { shape, polarization: pol.map(cplx) }]),
    }
}

fn probe_of(p: &Probe, t: &FourVector) -> (f64, f64, FourVector) {
    (p.charge, p.mass, p.velocity.map(FourVector).unwrap_or(*t))
}

fn build(cfg: &ScenarioConfig, hyper: [usize; 3]) -> Result<Setup> {
    let t = FourVector(cfg.frame.t);
    let frame = Lorentz::boost_to(&t)?;
    let mut setup =
        Setup { t, frame, data: None, news: None, static_only: None, probe: None, kink_phi: None, dirac: None };
    match &cfg.scenario {
        Scenario::StaticCharge(s) => {
            let v = s.velocity.map(FourVector).unwrap_or(t);
            let model = CurrentModel::StaticCoulomb { charge: cplx(s.charge), t: v, anchor: FourVector(s.anchor) };
            setup.data = Some(EMAsymptoticData::with_sources(model, None, &t)?);
            if s.velocity.is_none() && s.anchor == [0.0; 4] {
                setup.static_only = Some(cplx(s.charge));
            }
        }
        Scenario::ParticleKink { kink, probe } => {
            let pc = kink_charge(kink, &frame)?;
            setup.data = Some(EMAsymptoticData::with_sources(CurrentModel::PointCharges(vec![pc]), None, &t)?);
            setup.probe = Some(probe_of(probe, &t));
            let (u1, u2) = kink_velocities(kink, &frame);
            setup.kink_phi = Some((cplx(kink.charge), u1, u2));
        }
        Scenario::GaussianPulse(p) => {
            let news = pulse_news(p, &t)?;
            setup.data = Some(EMAsymptoticData::free(news.clone()));
            setup.news = Some(news);
        }
        Scenario::DiracPacket(d) => {
            let packet = DiracPacket::new(d.profile.clone(), (hyper[0], hyper[1], hyper[2]), true)?;
            setup.dirac = Some((Arc::new(packet), (**d).clone()));
        }
        Scenario::Composite { parts, probe } => {
            let mut charges = Vec::new();
            for p in parts {
                match p {
                    Part::StaticCharge(s) => charges.push(static_charge(s, &t)?),
                    Part::ParticleKink(k) => charges.push(kink_charge(k, &frame)?),
                    Part::GaussianPulse(g) => setup.news = Some(pulse_news(g, &t)?),
                }
            }
            setup.data = Some(if charges.is_empty() {
                EMAsymptoticData::free(setup.news.clone().expect("a part exists"))
            } else {
                EMAsymptoticData::with_sources(CurrentModel::PointCharges(charges), setup.news.clone(), &t)?
            });
            setup.probe = probe.as_ref().map(|p| probe_of(p, &t));
        }
    }
    Ok(setup)
}

// ---------------------------------------------------------------------------------------------
// Blocks

type Values = Vec<(String, f64)>;

fn push_vector(out: &mut Values, prefix: &str, v: &FourVector) {
    for (a, name) in AXES.iter().enumerate() {
        out.push((format!("{prefix}.{name}"), v.0[a]));
    }
}

fn push_tensor(out: &mut Values, prefix: &str, m: &Tensor) {
    for a in 0..4 {
        for b in (a + 1)..4 {
            out.push((format!("{prefix}.{}{}", AXES[a], AXES[b]), m.0[a][b]));
        }
    }
}

fn max_abs_c(v: &[C]) -> f64 {
    v.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Sample event and direction for the asymptotic comparisons.
fn sample_points(setup: &Setup) -> (FourVector, FourVector, FourVector) {
    let f = &setup.frame;
    let x = f.vector(&FourVector::new(0.4, 0.3, -0.2, 0.5));
    let l = f.vector(&FourVector::new(1.0, 0.48, 0.6, 0.64));
    let y = f.vector(&FourVector::new(0.3, 0.2, -0.5, 1.1));
    (x, l, y)
}

fn asymptote_block(setup: &Setup, grid: &NullGrid, tol: &Tolerances, viol: &mut Vec<Violation>) -> Result<Values> {
    let mut out = Values::new();
    let data = setup.data.as_ref().expect("EM scenario");
    let (x, l, y) = sample_points(setup);
    let future = spacelike_limit(data.future.as_ref(), grid, &y, 256)?;
    let past = spacelike_limit(data.past.as_ref(), grid, &y, 256)?;
    let between = future.sub(&past).max_abs();
    out.push(("asymptote.spacelike.norm".into(), future.max_abs()));
    out.push(("defect.spacelike-infinities".into(), between));
    check(viol, "spacelike-infinities", between, tol.spacelike);
    if let Some(q) = setup.static_only {
        let closed = coulomb_spacelike(q, &setup.t, &y)?;
        let d = future.sub(&closed).max_abs();
        out.push(("defect.spacelike-closed-form".into(), d));
        check(viol, "spacelike-closed-form", d, tol.spacelike);
    }
    if let Some(news) = &setup.news {
        // R·φ(x + R l) → o_A o_B ζ̇(x·l)
        let o = spinor_of_null(&l);
        let target = {
            let ol = o.lower();
            SymSpinor::sym(&ol, &ol).scale(news.scalar(x.dot(&l), &o, 1))
        };
        let ladder = Ladder { r0: 20.0, ratio: 2.0, rungs: 4 };
        let quad = FieldQuadrature::default();
        let failure = std::sync::Mutex::new(None);
        let (lim, err) = radial_limit(
            |r| match news_field(news, grid, &(x + l * r), &quad) {
                Ok(f) => CVec(f.phi.0),
                Err(e) => {
                    failure.lock().expect("unpoisoned").get_or_insert(e.to_string());
                    CVec([ZERO; 3])
                }
            },
            1,
            &ladder,
        );
        if let Some(msg) = failure.into_inner().expect("unpoisoned") {
            return Err(Error::convergence("asymptote", msg));
        }
        let d = SymSpinor(lim.0).sub(&target).max_abs();
        out.push(("asymptote.null.norm".into(), target.max_abs()));
        out.push(("defect.null-asymptote".into(), d));
        out.push(("asymptote.null.extrapolation".into(), err));
    }
    Ok(out)
}

/// A spinor o with l = o ō for a future null vector l.
fn spinor_of_null(l: &FourVector) -> crate::spinors::Spinor {
    let m = l.to_upper();
    let a = m.0[0][0].re;
    if a > 1e-12 {
        let s = a.sqrt();
        crate::spinors::Spinor::new(c(s, 0.0), m.0[1][0] * (1.0 / s))
    } else {
        let d = m.0[1][1].re.sqrt();
        crate::spinors::Spinor::new(m.0[0][1] * (1.0 / d), c(d, 0.0))
    }
}

fn radiate_block(setup: &Setup, grid: &NullGrid) -> Result<Values> {
    let mut out = Values::new();
    let data = setup.data.as_ref().expect("EM scenario");
    let origin = FourVector([0.0; 4]);
    for (which, tag) in [(Infinity::Future, "out-n"), (Infinity::Past, "in-n")] {
        let p = radiated_momentum(data, grid, which)?;
        push_vector(&mut out, &format!("P.{tag}"), &p);
        let m = radiated_angular_momentum(data, grid, which, &origin)?;
        push_tensor(&mut out, &format!("mu.{tag}"), &m.tensor());
    }
    Ok(out)
}

fn electric(data: &EMAsymptoticData) -> bool {
    match &data.sources {
        None => true,
        Some(CurrentModel::PointCharges(ps)) => ps.iter().all(|p| p.charge.im == 0.0),
        Some(CurrentModel::StaticCoulomb { charge, .. }) => charge.im == 0.0,
        Some(CurrentModel::DiracPacket(_)) => true,
    }
}

fn budget_block(setup: &Setup, grid: &NullGrid, tol: &Tolerances, viol: &mut Vec<Violation>) -> Result<Values> {
    let mut out = Values::new();
    let data = setup.data.as_ref().expect("EM scenario");
    let b = radiation_budget(data, grid, None)?;
    push_vector(&mut out, "P.out-total", &b.out_total.momentum);
    push_vector(&mut out, "P.in-total", &b.in_total.momentum);
    push_tensor(&mut out, "mu.out-total", &b.out_total.angular.to_tensor());
    push_tensor(&mut out, "mu.in-total", &b.in_total.angular.to_tensor());
    out.push(("defect.momentum".into(), b.momentum_defect));
    out.push(("defect.angular".into(), b.angular_defect));
    out.push(("defect.existence".into(), b.existence));
    if electric(data) {
        check(viol, "existence", b.existence, tol.existence);
    }
    Ok(out)
}

fn longrange_block(setup: &Setup, grid: &NullGrid, tol: &Tolerances, viol: &mut Vec<Violation>) -> Result<Values> {
    let mut out = Values::new();
    let data = setup.data.as_ref().expect("EM scenario");
    let vars = longrange_vars(data, grid)?;
    let mean = grid.integrate_samples(&vars.samples.q) * (1.0 / (2.0 * PI));
    out.push(("q.mean".into(), mean.re));
    out.push(("q.mean.im".into(), mean.im));
    out.push(("q.max".into(), max_abs_c(&vars.samples.q)));
    out.push(("sigma.max".into(), max_abs_c(&vars.samples.sigma)));
    let d = &vars.defects;
    for (name, v, t) in [
        ("defect.q-mean", d.mean_q, tol.q_mean),
        ("defect.q-mean-past", d.mean_q_past, tol.q_mean),
        ("defect.sigma-mean", d.mean_sigma, tol.sigma_mean),
        ("defect.sigma-mean-past", d.mean_sigma_past, tol.sigma_mean),
        ("defect.constraint", d.constraint, tol.constraint),
    ] {
        out.push((name.into(), v));
        check(viol, name.trim_start_matches("defect."), v, t);
    }
    let recon = reconstruction_residual(&vars, grid)?;
    out.push(("defect.reconstruction".into(), recon));
    check(viol, "reconstruction", recon, tol.reconstruction);
    let phi = phi_from_sigma(grid, &vars.samples.sigma, ZERO)?;
    let pr = phi_residual(&phi, data, grid);
    out.push(("defect.phi".into(), pr));
    out.push(("phi.tail".into(), phi.tail));
    check(viol, "phi", pr, tol.phi);
    if let Some((q0, u1, u2)) = setup.kink_phi {
        let vals: Vec<C> = grid.nodes.iter().map(|n| phi.eval(&n.o)).collect();
        let target: Vec<C> = grid.nodes.iter().map(|n| q0 * (u1.dot(&n.l) / u2.dot(&n.l)).ln()).collect();
        let area = 4.0 * PI;
        let mv = grid.integrate_samples(&vals) * (1.0 / area);
        let mt = grid.integrate_samples(&target) * (1.0 / area);
        let d = vals.iter().zip(&target).map(|(a, b)| (a - mv - (b - mt)).norm()).fold(0.0, f64::max);
        out.push(("defect.phi-closed-form".into(), d));
        check(viol, "phi-closed-form", d, tol.phi);
    }
    if vars.samples.q.iter().all(|q| q.im.abs() <= 1e-8) {
        let split = angular_momentum_split(data, &vars, &phi, grid)?;
        let mix = split.mixing.to_tensor();
        push_tensor(&mut out, "mu.mix", &mix);
        out.push(("mu.mix.norm".into(), mix.max_abs()));
        out.push(("defect.split".into(), split.closure));
        out.push(("defect.by-parts".into(), split.by_parts));
        check(viol, "split", split.closure, tol.split);
    }
    Ok(out)
}

fn shift_block(setup: &Setup, grid: &NullGrid, tol: &Tolerances, viol: &mut Vec<Violation>) -> Result<Values> {
    let mut out = Values::new();
    let data = setup.data.as_ref().expect("EM scenario");
    let (charge, mass, v) = setup.probe.expect("probe present");
    let vars = longrange_vars(data, grid)?;
    let phi = phi_from_sigma(grid, &vars.samples.sigma, ZERO)?.as_fn();
    let phi = HomogeneousFn::new(0, 0, move |o| c(phi.eval(o).re, 0.0));
    let sh = trajectory_shift(charge, mass, &v, &phi, grid)?;
    let rest = grid.rest_components(&sh.shift);
    for (k, name) in ["x", "y", "z"].iter().enumerate() {
        out.push((format!("shift.{name}"), rest[k]));
    }
    let norm = (-sh.shift.norm_sqr()).max(0.0).sqrt();
    out.push(("shift.norm".into(), norm));
    if let Some((q0, _, _)) = setup.kink_phi {
        out.push(("shift.ratio".into(), norm / (charge * q0.norm() / mass)));
    }
    out.push(("phase.delta".into(), sh.phase));
    // −2H(v) with coupling e = Q
    let h = phase_field(&phi, charge, grid, &v).re;
    let d = (-2.0 * h - sh.phase).abs();
    out.push(("defect.phase".into(), d));
    check(viol, "phase", d, tol.phase);
    let q: Vec<C> = grid.nodes.iter().map(|n| c(charge / (2.0 * v.dot(&n.l).powi(2)), 0.0)).collect();
    let mix = mixing_term(&q, &phi, grid)?.to_tensor();
    push_tensor(&mut out, "mu.mix-probe", &mix);
    let implied = Tensor::wedge(&sh.raw, &v).scale(-0.5 * mass);
    let d = mix.sub(&implied).max_abs();
    out.push(("defect.mix-shift".into(), d));
    check(viol, "mix-shift", d, tol.mixing);
    let grad = phase_gradient(charge, &v, &phi, grid, 1e-4);
    let dy = sh.raw.lower();
    let r: [f64; 4] = std::array::from_fn(|a| grad[a] - mass * dy[a]);
    let vl = v.lower();
    let along: f64 = (0..4).map(|a| r[a] * v.0[a]).sum();
    let d = (0..4).map(|a| (r[a] - along * vl[a]).abs()).fold(0.0, f64::max);
    out.push(("defect.phase-gradient".into(), d));
    check(viol, "phase-gradient", d, tol.gradient);
    Ok(out)
}

fn dirac_block(setup: &Setup, grid: &NullGrid, tol: &Tolerances, viol: &mut Vec<Violation>) -> Result<Values> {
    let mut out = Values::new();
    let (packet, sc) = setup.dirac.as_ref().expect("Dirac scenario");
    out.push(("dirac.norm".into(), packet.norm_sqr()));
    out.push(("dirac.charge".into(), packet.charge()));
    let pos = packet.positivity_residual()?;
    out.push(("defect.positivity".into(), pos));
    check(viol, "positivity", pos, tol.positivity);
    let tc = timelike_out_charges(packet)?;
    push_vector(&mut out, "P.out-t", &tc.momentum);
    push_tensor(&mut out, "M.out-t", &tc.angular);
    push_tensor(&mut out, "M.out-t.spin", &tc.spin);
    let z = sc.direction.map(FourVector).unwrap_or(packet.profile.support().0);
    for lam in &sc.lambdas {
        let psi = dirac_packet(packet, &(z * *lam))?;
        let asy = packet_asymptote(packet, &z, *lam)?;
        let rel = (projector_density(&z, &psi.sub(&asy))? / projector_density(&z, &asy)?).sqrt();
        out.push((format!("dirac.asymptote.{lam}"), rel));
    }
    if let Some(k) = &sc.dressing {
        let (u1, u2) = kink_velocities(k, &setup.frame);
        let q0 = k.charge[0];
        let phi = HomogeneousFn::new(0, 0, move |o| {
            let l = null_vector_of(o);
            c(q0 * (u1.dot(&l) / u2.dot(&l)).ln(), 0.0)
        });
        let dr = phase_dressing(packet.clone(), phi.clone(), grid.clone());
        let nc = dr.norm_change().abs();
        out.push(("defect.norm-change".into(), nc));
        check(viol, "norm-change", nc, tol.norm);
        let dm = dr.charges()?.angular.sub(&tc.angular);
        push_tensor(&mut out, "M.dressing", &dm);
        let model = CurrentModel::DiracPacket(packet.clone());
        let q: Vec<C> = grid.nodes.iter().map(|n| closed_form_q(&model, &n.o).0).collect();
        let mix = mixing_term(&q, &phi, grid)?.to_tensor();
        let d = dm.sub(&mix).max_abs();
        out.push(("defect.dressing".into(), d));
        check(viol, "dressing", d, tol.dressing);
    }
    Ok(out)
}

fn check(viol: &mut Vec<Violation>, name: &str, value: f64, tolerance: f64) {
    if !(value <= tolerance) {
        viol.push(Violation { name: name.to_string(), value, tolerance });
    }
}

fn coarse2(r: [usize; 2]) -> [usize; 2] {
    [(2 * r[0]).div_ceil(3).max(6), (2 * r[1]).div_ceil(3).max(12)]
}

fn coarse3(r: [usize; 3]) -> [usize; 3] {
    [(2 * r[0]).div_ceil(3).max(6), (2 * r[1]).div_ceil(3).max(6), (2 * r[2]).div_ceil(3).max(6)]
}

fn run_blocks(
    cfg: &ScenarioConfig,
    blocks: &[Block],
    sphere: [usize; 2],
    hyper: [usize; 3],
    viol: &mut Vec<Violation>,
) -> Result<BTreeMap<String, f64>> {
    let setup = build(cfg, hyper)?;
    let grid = NullGrid::new(&setup.t, sphere[0], sphere[1])?;
    let tol = &cfg.tolerances;
    let mut values = BTreeMap::new();
    for b in blocks {
        let vals = match b {
            Block::Asymptote => asymptote_block(&setup, &grid, tol, viol)?,
            Block::Radiate => radiate_block(&setup, &grid)?,
            Block::Budget => budget_block(&setup, &grid, tol, viol)?,
            Block::Longrange => longrange_block(&setup, &grid, tol, viol)?,
            Block::Shift => shift_block(&setup, &grid, tol, viol)?,
            Block::Dirac => dirac_block(&setup, &grid, tol, viol)?,
        };
        for (k, v) in vals {
            values.insert(k, v);
        }
    }
    Ok(values)
}

/// Runs every requested block on the configured grids and on coarsened grids; the difference
/// is the error estimate. Violations are collected from the fine run only.
pub fn run_scenario(config: &ScenarioConfig) -> Result<Report> {
    let blocks = config.blocks()?;
    let sphere = config.grid.sphere;
    let hyper = config.grid.hyperboloid;
    let (cs, ch) = (coarse2(sphere), coarse3(hyper));
    let mut violations = Vec::new();
    let fine = run_blocks(config, &blocks, sphere, hyper, &mut violations)?;
    let coarse = run_blocks(config, &blocks, cs, ch, &mut Vec::new())?;
    let values = fine
        .iter()
        .map(|(k, v)| {
            let error = coarse.get(k).map(|w| (v - w).abs()).unwrap_or(f64::INFINITY);
            (k.clone(), Estimate { value: *v, error })
        })
        .collect();
    Ok(Report {
        values,
        violations,
        provenance: Provenance {
            config_hash: config.hash(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            sphere_grid: sphere,
            coarse_sphere_grid: cs,
            hyperboloid_grid: hyper,
            coarse_hyperboloid_grid: ch,
            blocks,
            tolerances: config.tolerances.table(),
        },
    })
}
