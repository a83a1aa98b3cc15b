//! Scalar wave fields and their null and spacelike asymptotics.
//!
//! A future profile χ(s, l) is the limit of R·A(x + Rl) at s = x·l. It is homogeneous of
//! degree −1 under (s, l) → (κs, κl). The field is recovered as A(x) = −(1/2π)∫χ̇(x·l, l) dl,
//! or from a past profile χ′ as A(x) = (1/2π)∫χ̇′(x·l, l) dl.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::harmonics::{real_harmonics, SphereSeries};
use crate::pulse::PulseShape;
use crate::quadrature::richardson;
use crate::sphere::NullGrid;
use crate::spinors::{c, FourVector, C, I};
use crate::worldline::Worldline;

/// Future or past null infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Future,
    Past,
}

/// A homogeneous characteristic function χ(s, l) of degree −1.
pub trait ScalarProfile: Send + Sync {
    fn value(&self, s: f64, l: &FourVector) -> C;
    /// ∂χ/∂s
    fn rate(&self, s: f64, l: &FourVector) -> C;
    /// (χ(−∞, l), χ(+∞, l))
    fn limits(&self, l: &FourVector) -> (C, C);
    /// Range of s on which the profile is known; outside it χ̇ is taken to vanish.
    fn window(&self, _l: &FourVector) -> Option<(f64, f64)> {
        None
    }
}

/// A profile together with its gauge, declared fall-off and direction.
#[derive(Clone)]
pub struct AsymptoticProfile {
    pub inner: Arc<dyn ScalarProfile>,
    pub gauge: FourVector,
    pub falloff: f64,
    pub direction: Direction,
}

impl std::fmt::Debug for AsymptoticProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AsymptoticProfile")
            .field("gauge", &self.gauge)
            .field("falloff", &self.falloff)
            .field("direction", &self.direction)
            .finish()
    }
}

impl AsymptoticProfile {
    pub fn new<P: ScalarProfile + 'static>(inner: P, gauge: FourVector, falloff: f64, direction: Direction) -> Self {
        AsymptoticProfile { inner: Arc::new(inner), gauge, falloff, direction }
    }

    pub fn value(&self, s: f64, l: &FourVector) -> C {
        self.inner.value(s, l)
    }

    pub fn rate(&self, s: f64, l: &FourVector) -> C {
        self.inner.rate(s, l)
    }

    /// Smallest C with |χ(s) − χ(−∞)| ≤ C/|s|^ε for s < −s_t and |χ(s) − χ(+∞)| ≤ C/s^ε for
    /// s > s_t over the sampled nodes and s values.
    pub fn falloff_constant(&self, grid: &NullGrid, s_t: f64, s_samples: &[f64]) -> f64 {
        let per_node = grid.sample(|n| {
            let (lo, hi) = self.inner.limits(&n.l);
            let mut worst = 0.0_f64;
            for &s in s_samples {
                let s = s.abs().max(s_t);
                let up = (self.value(s, &n.l) - hi).norm() * s.powf(self.falloff);
                let down = (self.value(-s, &n.l) - lo).norm() * s.powf(self.falloff);
                worst = worst.max(up).max(down);
            }
            worst
        });
        per_node.into_iter().fold(0.0, f64::max)
    }
}

/// χ = ±1/(2(s − i b·l)): the null asymptote of A_b(x) = 1/(x − ib)² (sign +1 future,
/// −1 past).
#[derive(Clone, Copy, Debug)]
pub struct ComplexShift {
    pub b: FourVector,
    pub sign: f64,
}

impl ComplexShift {
    pub fn future(b: FourVector) -> Self {
        ComplexShift { b, sign: 1.0 }
    }

    pub fn past(b: FourVector) -> Self {
        ComplexShift { b, sign: -1.0 }
    }

    /// The field A_b(x) = 1/(x − ib)².
    pub fn field(b: &FourVector, x: &FourVector) -> C {
        let xc = x.complexify();
        let z = crate::spinors::ComplexVector(std::array::from_fn(|k| xc.0[k] - I * b.0[k]));
        1.0 / z.dot(&z)
    }

    /// Cone data of A_b: η(p, l) = 1/(−2i b·l − b² p).
    pub fn cone_data(b: FourVector) -> ConeDataFn {
        let bb = b.norm_sqr();
        ConeDataFn::new(
            move |p, l| 1.0 / (c(-bb * p, -2.0 * b.dot(l))),
            move |p, l| bb / c(-bb * p, -2.0 * b.dot(l)).powi(2),
        )
    }
}

impl ScalarProfile for ComplexShift {
    fn value(&self, s: f64, l: &FourVector) -> C {
        self.sign * 0.5 / c(s, -self.b.dot(l))
    }
    fn rate(&self, s: f64, l: &FourVector) -> C {
        -self.sign * 0.5 / c(s, -self.b.dot(l)).powi(2)
    }
    fn limits(&self, _l: &FourVector) -> (C, C) {
        (c(0.0, 0.0), c(0.0, 0.0))
    }
}

/// χ(s, l) = g(s/(t·l))/(t·l): the same pulse on every generator in the gauge of t.
#[derive(Clone, Copy, Debug)]
pub struct Isotropic {
    pub t: FourVector,
    pub shape: PulseShape,
}

impl ScalarProfile for Isotropic {
    fn value(&self, s: f64, l: &FourVector) -> C {
        let tl = self.t.dot(l);
        c(self.shape.value(s / tl) / tl, 0.0)
    }
    fn rate(&self, s: f64, l: &FourVector) -> C {
        let tl = self.t.dot(l);
        c(self.shape.derivatives(s / tl)[1] / (tl * tl), 0.0)
    }
    fn limits(&self, l: &FourVector) -> (C, C) {
        let tl = self.t.dot(l);
        let (a, b) = self.shape.limits();
        (c(a / tl, 0.0), c(b / tl, 0.0))
    }
}

impl Isotropic {
    /// Closed-form field of the isotropic profile built from the future asymptote:
    /// A(x) = (g(x⁰ − r) − g(x⁰ + r))/r in the rest frame of t.
    pub fn field(&self, x: &FourVector) -> C {
        let x0 = x.dot(&self.t);
        let r = (x0 * x0 - x.norm_sqr()).max(0.0).sqrt();
        if r < 1e-6 {
            // r → 0 limit: −2 g′(x⁰)
            return c(-2.0 * self.shape.derivatives(x0)[1], 0.0);
        }
        c((self.shape.value(x0 - r) - self.shape.value(x0 + r)) / r, 0.0)
    }
}

/// Tabulated profile: values on a common uniform s grid at the nodes of a null grid.
#[derive(Clone, Debug)]
pub struct Tabulated {
    pub gauge: FourVector,
    pub falloff: f64,
    pub n_theta: usize,
    pub n_phi: usize,
    s: Vec<f64>,
    series: Vec<SphereSeries>,
    l_max: usize,
    axes: [FourVector; 3],
}

impl Tabulated {
    /// Builds the table from node values `values[k][i]` at `s[k]` and node `i`.
    pub fn from_samples(grid: &NullGrid, falloff: f64, s: Vec<f64>, values: &[Vec<C>]) -> Result<Self> {
        if s.len() < 4 || values.len() != s.len() {
            return Err(Error::invalid("tabulated_profile", "need at least 4 s samples with one value row each"));
        }
        let ds = s[1] - s[0];
        if !(ds > 0.0) || s.windows(2).any(|w| ((w[1] - w[0]) - ds).abs() > 1e-9 * ds.abs().max(1.0)) {
            return Err(Error::invalid("tabulated_profile", "s samples must be increasing and uniform"));
        }
        let l_max = (grid.n_theta - 1).min(grid.n_phi / 2 - 1);
        let series = values.iter().map(|row| SphereSeries::analyze(grid, row, l_max, -1)).collect();
        Ok(Tabulated {
            gauge: grid.t,
            falloff,
            n_theta: grid.n_theta,
            n_phi: grid.n_phi,
            s,
            series,
            l_max,
            axes: *grid.axes(),
        })
    }

    /// Reads a delimited-text table. Layout, one record per line, comma separated:
    ///
    /// ```text
    /// gauge,t0,t1,t2,t3
    /// falloff,eps
    /// grid,n_theta,n_phi
    /// node,s,re,im
    /// 0,-10.0,0.05,0.0
    /// ...
    /// ```
    ///
    /// Nodes are indexed in the order of [`NullGrid::new`]; every node must carry the same
    /// uniform s grid.
    pub fn load(path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_path(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut gauge = None;
        let mut falloff = None;
        let mut res = None;
        let mut rows: Vec<(usize, f64, C)> = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            let num = |k: usize| -> Result<f64> {
                rec.get(k)
                    .ok_or_else(|| Error::Config(format!("short record {rec:?}")))?
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("bad number in {rec:?}: {e}")))
            };
            match rec.get(0) {
                Some("gauge") => gauge = Some(FourVector([num(1)?, num(2)?, num(3)?, num(4)?])),
                Some("falloff") => falloff = Some(num(1)?),
                Some("grid") => res = Some((num(1)? as usize, num(2)? as usize)),
                Some("node") => {}
                Some(_) => rows.push((num(0)? as usize, num(1)?, c(num(2)?, num(3)?))),
                None => {}
            }
        }
        let gauge = gauge.ok_or_else(|| Error::Config("missing gauge record".into()))?;
        let falloff = falloff.ok_or_else(|| Error::Config("missing falloff record".into()))?;
        let (nt, np) = res.ok_or_else(|| Error::Config("missing grid record".into()))?;
        let grid = NullGrid::new(&gauge.unit_timelike()?, nt, np)?;
        let mut s: Vec<f64> = rows.iter().filter(|r| r.0 == 0).map(|r| r.1).collect();
        s.sort_by(|a, b| a.partial_cmp(b).expect("finite s"));
        let mut values = vec![vec![c(0.0, 0.0); grid.len()]; s.len()];
        let mut seen = vec![0usize; grid.len()];
        for (node, sv, val) in rows {
            if node >= grid.len() {
                return Err(Error::Config(format!("node index {node} out of range")));
            }
            let k = s
                .binary_search_by(|x| x.partial_cmp(&sv).expect("finite s"))
                .map_err(|_| Error::Config(format!("node {node} uses s = {sv} not sampled at node 0")))?;
            values[k][node] = val;
            seen[node] += 1;
        }
        if seen.iter().any(|&n| n != s.len()) {
            return Err(Error::Config("every node must carry the same s samples".into()));
        }
        Tabulated::from_samples(&grid, falloff, s, &values)
    }

    /// Writes the table layout read by [`Tabulated::load`].
    pub fn write(path: &Path, grid: &NullGrid, falloff: f64, s: &[f64], values: &[Vec<C>]) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .flexible(true)
            .from_path(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let io = |e: csv::Error| Error::Config(e.to_string());
        let t = grid.t.0;
        w.write_record(["gauge".to_string(), t[0].to_string(), t[1].to_string(), t[2].to_string(), t[3].to_string()])
            .map_err(io)?;
        w.write_record(["falloff".to_string(), falloff.to_string()]).map_err(io)?;
        w.write_record(["grid".to_string(), grid.n_theta.to_string(), grid.n_phi.to_string()]).map_err(io)?;
        w.write_record(["node", "s", "re", "im"]).map_err(io)?;
        for i in 0..grid.len() {
            for (k, sv) in s.iter().enumerate() {
                let v = values[k][i];
                w.write_record([i.to_string(), format!("{sv:e}"), format!("{:e}", v.re), format!("{:e}", v.im)])
                    .map_err(io)?;
            }
        }
        w.flush().map_err(|e| Error::Config(e.to_string()))
    }

    fn locate(&self, s: f64) -> (usize, f64) {
        let ds = self.s[1] - self.s[0];
        let n = self.s.len();
        let k = (((s - self.s[0]) / ds).floor() as isize).clamp(1, n as isize - 3) as usize;
        (k, (s - self.s[k]) / ds)
    }

    /// Cubic Lagrange value and s-derivative in t-gauge at a rest-frame direction.
    fn interpolate(&self, s: f64, dir: [f64; 3]) -> (C, C) {
        let (lo, hi) = (self.s[0], *self.s.last().expect("samples"));
        let y = real_harmonics(self.l_max, dir);
        let at = |k: usize| self.series[k].eval_harmonics(&y);
        if s < lo {
            return (at(0), c(0.0, 0.0));
        }
        if s > hi {
            return (at(self.s.len() - 1), c(0.0, 0.0));
        }
        let ds = self.s[1] - self.s[0];
        let (k, u) = self.locate(s);
        let f = [at(k - 1), at(k), at(k + 1), at(k + 2)];
        // nodes at u = −1, 0, 1, 2
        let w = [
            -u * (u - 1.0) * (u - 2.0) / 6.0,
            (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0,
            -(u + 1.0) * u * (u - 2.0) / 2.0,
            (u + 1.0) * u * (u - 1.0) / 6.0,
        ];
        let dw = [
            -(3.0 * u * u - 6.0 * u + 2.0) / 6.0,
            (3.0 * u * u - 4.0 * u - 1.0) / 2.0,
            -(3.0 * u * u - 2.0 * u - 2.0) / 2.0,
            (3.0 * u * u - 1.0) / 6.0,
        ];
        let v = (0..4).fold(c(0.0, 0.0), |acc, j| acc + f[j] * w[j]);
        let d = (0..4).fold(c(0.0, 0.0), |acc, j| acc + f[j] * dw[j]) / ds;
        (v, d)
    }

    fn gauge_split(&self, l: &FourVector) -> (f64, [f64; 3]) {
        let tl = self.gauge.dot(l);
        (tl, [0, 1, 2].map(|i| -l.dot(&self.axes[i]) / tl))
    }
}

impl ScalarProfile for Tabulated {
    fn value(&self, s: f64, l: &FourVector) -> C {
        let (k, dir) = self.gauge_split(l);
        self.interpolate(s / k, dir).0 / k
    }
    fn rate(&self, s: f64, l: &FourVector) -> C {
        let (k, dir) = self.gauge_split(l);
        self.interpolate(s / k, dir).1 / (k * k)
    }
    fn limits(&self, l: &FourVector) -> (C, C) {
        let (k, dir) = self.gauge_split(l);
        let lo = self.interpolate(f64::NEG_INFINITY, dir).0 / k;
        let hi = self.interpolate(f64::INFINITY, dir).0 / k;
        (lo, hi)
    }
    fn window(&self, l: &FourVector) -> Option<(f64, f64)> {
        let k = self.gauge.dot(l);
        Some((self.s[0] * k, self.s.last().expect("samples") * k))
    }
}

/// A function η(p, l) representing field values on the future light cone of the origin:
/// A(Rl) = R⁻¹ η(R⁻¹, l).
pub trait ConeData: Send + Sync {
    fn eta(&self, p: f64, l: &FourVector) -> C;
    /// ∂η/∂p
    fn eta_rate(&self, p: f64, l: &FourVector) -> C;
}

type ConeFn = Arc<dyn Fn(f64, &FourVector) -> C + Send + Sync>;

/// Cone data given by a pair of closures (η, η̇).
#[derive(Clone)]
pub struct ConeDataFn {
    eta: ConeFn,
    rate: ConeFn,
}

impl ConeDataFn {
    pub fn new<F, G>(eta: F, rate: G) -> Self
    where
        F: Fn(f64, &FourVector) -> C + Send + Sync + 'static,
        G: Fn(f64, &FourVector) -> C + Send + Sync + 'static,
    {
        ConeDataFn { eta: Arc::new(eta), rate: Arc::new(rate) }
    }
}

impl ConeData for ConeDataFn {
    fn eta(&self, p: f64, l: &FourVector) -> C {
        (self.eta)(p, l)
    }
    fn eta_rate(&self, p: f64, l: &FourVector) -> C {
        (self.rate)(p, l)
    }
}

fn check_interior(x: &FourVector, op: &'static str) -> Result<f64> {
    let xx = x.norm_sqr();
    if !(xx > 0.0 && x.0[0] > 0.0) {
        return Err(Error::invalid(op, format!("x = {:?} is not inside the future light cone", x.0)));
    }
    Ok(xx)
}

fn kirchhoff_on(eta: &dyn ConeData, grid: &NullGrid, x: &FourVector, xx: f64) -> C {
    let k = -1.0 / (PI * xx);
    grid.integrate_with(|n| eta.eta_rate(2.0 * x.dot(&n.l) / xx, &n.l)) * k
}

/// A(x) = −(1/(π x²)) ∫ η̇(2x·u/x², u) du for x inside the future cone of the origin.
///
/// The value is computed on `grid` and on a grid of doubled resolution; the finer value is
/// returned and the two must agree to 1e−6 relative.
pub fn kirchhoff_evaluate(eta: &dyn ConeData, grid: &NullGrid, x: &FourVector) -> Result<C> {
    let xx = check_interior(x, "kirchhoff_evaluate")?;
    let fine = grid.with_resolution(2 * grid.n_theta, 2 * grid.n_phi)?;
    let a = kirchhoff_on(eta, grid, x, xx);
    let b = kirchhoff_on(eta, &fine, x, xx);
    let scale = b.norm().max(1e-300);
    if (a - b).norm() > 1e-6 * scale && (a - b).norm() > 1e-14 {
        return Err(Error::convergence(
            "kirchhoff_evaluate",
            format!("grid refinement changed the value by {:.3e} relative", (a - b).norm() / scale),
        ));
    }
    Ok(b)
}

/// χ(s, l) = −(1/(2πs)) ∫ η̇(l·u/s, u) du for s > 0.
pub fn asymptote_from_cone(eta: &dyn ConeData, grid: &NullGrid, s: f64, l: &FourVector) -> Result<C> {
    if !(s > 0.0) {
        return Err(Error::invalid("asymptote_from_cone", "requires s > 0"));
    }
    Ok(grid.integrate_with(|n| eta.eta_rate(l.dot(&n.l) / s, &n.l)) * (-1.0 / (2.0 * PI * s)))
}

/// A field value with an error estimate.
#[derive(Clone, Copy, Debug)]
pub struct FieldValue {
    pub value: C,
    /// Estimated contribution cut away outside the profile's s window.
    pub truncation: f64,
}

/// A(x) = −(1/2π)∫χ̇(x·l, l) dl for a future profile, +(1/2π)∫χ̇′(x·l, l) dl for a past one.
pub fn field_from_asymptotic(profile: &AsymptoticProfile, grid: &NullGrid, x: &FourVector) -> Result<FieldValue> {
    let sign = match profile.direction {
        Direction::Future => -1.0,
        Direction::Past => 1.0,
    };
    let inner = &profile.inner;
    let parts: (C, f64) = {
        let vals = grid.sample(|n| {
            let s = x.dot(&n.l);
            let outside = match inner.window(&n.l) {
                Some((lo, _)) if s < lo => inner.rate(lo, &n.l).norm(),
                Some((_, hi)) if s > hi => inner.rate(hi, &n.l).norm(),
                _ => 0.0,
            };
            (inner.rate(s, &n.l), outside)
        });
        let v: Vec<C> = vals.iter().map(|p| p.0).collect();
        let t: Vec<f64> = vals.iter().map(|p| p.1).collect();
        (grid.integrate_samples(&v), grid.integrate_samples(&t))
    };
    let value = parts.0 * (sign / (2.0 * PI));
    let truncation = parts.1 / (2.0 * PI);
    if truncation > 1e-8 * value.norm().max(1e-300) && truncation > 1e-14 {
        return Err(Error::convergence(
            "field_from_asymptotic",
            format!("profile window truncates {truncation:.3e} against {:.3e}", value.norm()),
        ));
    }
    Ok(FieldValue { value, truncation })
}

/// (1/2π)∫χ(−∞, l) δ(y·l) dl: the spacelike limit of R·A(x + Ry) for spacelike y.
pub fn spacelike_from_profile(profile: &AsymptoticProfile, grid: &NullGrid, y: &FourVector, n: usize) -> Result<C> {
    let r = grid.integrate_delta_line(y, n, |node| profile.inner.limits(&node.l).0)?;
    Ok(r / (2.0 * PI))
}

/// Which limit to extract.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitMode {
    /// lim R·A(x + Rl)
    Future,
    /// lim R·A(x − Rl)
    Past,
    /// lim R·A(x + Ry)
    Spacelike,
}

/// Geometric ladder R₀·ratio^k, k = 0..rungs.
#[derive(Clone, Copy, Debug)]
pub struct Ladder {
    pub r0: f64,
    pub ratio: f64,
    pub rungs: usize,
}

impl Default for Ladder {
    fn default() -> Self {
        Ladder { r0: 64.0, ratio: 2.0, rungs: 5 }
    }
}

impl Ladder {
    pub fn radii(&self) -> Vec<f64> {
        (0..self.rungs).map(|k| self.r0 * self.ratio.powi(k as i32)).collect()
    }
}

/// Extrapolated limit of R·A along a ray.
#[derive(Clone, Debug)]
pub struct LimitEstimate {
    pub value: C,
    /// Difference of the last two extrapolants.
    pub error: f64,
    /// Raw samples R·A(x ± R·dir).
    pub samples: Vec<C>,
    /// Empirical ε from successive raw differences ~ R^{−ε}; None when they vanish.
    pub fitted_falloff: Option<f64>,
    /// Successive extrapolants grow instead of settling.
    pub diverging: bool,
}

impl LimitEstimate {
    /// Converts the diagnostic flags into errors.
    pub fn checked(self) -> Result<Self> {
        if self.diverging {
            return Err(Error::convergence("null_asymptote", "successive extrapolants grow"));
        }
        if let Some(eps) = self.fitted_falloff {
            if eps <= 0.0 {
                return Err(Error::convergence("null_asymptote", format!("fitted fall-off exponent {eps:.3} ≤ 0")));
            }
        }
        Ok(self)
    }
}

/// Richardson-extrapolated limit of R·A(x + R·dir) (future, spacelike) or R·A(x − R·dir)
/// (past) over a geometric ladder with at least four rungs.
pub fn null_asymptote<F: Fn(&FourVector) -> C + Sync>(
    field: F,
    x: &FourVector,
    dir: &FourVector,
    mode: LimitMode,
    ladder: &Ladder,
) -> Result<LimitEstimate> {
    if ladder.rungs < 4 || !(ladder.ratio > 1.0) || !(ladder.r0 > 0.0) {
        return Err(Error::invalid("null_asymptote", "ladder needs ≥ 4 rungs, ratio > 1 and R₀ > 0"));
    }
    let dd = dir.norm_sqr();
    let scale = dir.euclid().powi(2);
    match mode {
        LimitMode::Future | LimitMode::Past => {
            if dd.abs() > 1e-10 * scale || dir.0[0] <= 0.0 {
                return Err(Error::invalid("null_asymptote", "direction must be a future null vector"));
            }
        }
        LimitMode::Spacelike => {
            if dd >= -1e-12 * scale {
                return Err(Error::invalid("null_asymptote", "direction must be spacelike"));
            }
        }
    }
    let sgn = if mode == LimitMode::Past { -1.0 } else { 1.0 };
    let radii = ladder.radii();
    let samples: Vec<C> = radii.iter().map(|&r| field(&(*x + *dir * (sgn * r))) * r).collect();
    let (value, error, diag) = richardson(&samples, ladder.ratio);
    let n = diag.len();
    let d_last = (diag[n - 1] - diag[n - 2]).norm();
    let d_prev = (diag[n - 2] - diag[n - 3]).norm();
    let diverging = d_last > d_prev && d_last > 1e-8 * value.norm().max(1.0);
    let diffs: Vec<f64> = samples.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let k = diffs.len();
    let fitted_falloff = if diffs[k - 2] > 1e-13 * value.norm().max(1e-300) && diffs[k - 1] > 0.0 {
        Some((diffs[k - 2] / diffs[k - 1]).ln() / ladder.ratio.ln())
    } else {
        None
    };
    Ok(LimitEstimate { value, error, samples, fitted_falloff, diverging })
}

/// □A at x by fourth-order central differences with step h.
pub fn wave_residual<F: Fn(&FourVector) -> C>(field: F, x: &FourVector, h: f64) -> C {
    let f0 = field(x);
    let second = |k: usize| {
        let mut e = [0.0; 4];
        e[k] = h;
        let e = FourVector(e);
        let p1 = field(&(*x + e));
        let m1 = field(&(*x - e));
        let p2 = field(&(*x + e * 2.0));
        let m2 = field(&(*x - e * 2.0));
        (-(p2 + m2) + (p1 + m1) * 16.0 - f0 * 30.0) / (12.0 * h * h)
    };
    second(0) - second(1) - second(2) - second(3)
}

/// Scalar point source: worldline and charge.
#[derive(Clone, Debug)]
pub struct PointSource {
    pub worldline: Worldline,
    pub charge: C,
}

type Density = Arc<dyn Fn(&FourVector) -> C + Send + Sync>;

/// Current density J(y) supported in the spatial box |y^i| ≤ half_width of the frame of t.
#[derive(Clone)]
pub struct CurrentSampler {
    pub density: Density,
    pub half_width: f64,
    pub nodes: usize,
}

/// Sources whose characteristic c(s, l) = ∫δ(s − l·y) J(y) d⁴y is available.
#[derive(Clone)]
pub enum SourceModel {
    Points(Vec<PointSource>),
    Sampled(CurrentSampler),
}

/// The source characteristic c(s, l) of a model, as a profile.
#[derive(Clone)]
pub struct SourceCharacteristic {
    pub model: SourceModel,
}

impl SourceCharacteristic {
    pub fn new(model: SourceModel) -> Self {
        SourceCharacteristic { model }
    }

    /// c(s, l); root-solve failures are reported.
    pub fn eval(&self, s: f64, l: &FourVector) -> Result<C> {
        match &self.model {
            SourceModel::Points(ps) => {
                let mut acc = c(0.0, 0.0);
                for p in ps {
                    let tau = p.worldline.retarded_time(l, s)?;
                    let (_, v, _) = p.worldline.state(tau);
                    acc += p.charge / v.dot(l);
                }
                Ok(acc)
            }
            SourceModel::Sampled(cs) => Ok(sampled_characteristic(cs, s, l)),
        }
    }

    /// ċ(s, l)
    pub fn eval_rate(&self, s: f64, l: &FourVector) -> Result<C> {
        match &self.model {
            SourceModel::Points(ps) => {
                let mut acc = c(0.0, 0.0);
                for p in ps {
                    let tau = p.worldline.retarded_time(l, s)?;
                    let (_, v, a) = p.worldline.state(tau);
                    let vl = v.dot(l);
                    acc += -p.charge * a.dot(l) / (vl * vl * vl);
                }
                Ok(acc)
            }
            SourceModel::Sampled(cs) => {
                let h = 1e-3 * cs.half_width.max(1e-3);
                let f = |d: f64| sampled_characteristic(cs, s + d, l);
                Ok((f(-2.0 * h) - f(h) * 8.0 + f(-h) * 8.0 - f(2.0 * h)) * (-1.0 / (12.0 * h)))
            }
        }
    }
}

/// (1/l⁰)∫J((s + l⃗·y⃗)/l⁰, y⃗) d³y by a tensor Gauss–Legendre rule.
fn sampled_characteristic(cs: &CurrentSampler, s: f64, l: &FourVector) -> C {
    let (x, w) = crate::quadrature::gauss_legendre_on(cs.nodes, -cs.half_width, cs.half_width);
    let n = cs.nodes;
    let l0 = l.0[0];
    let vals = crate::quadrature::par_map(n * n * n, |k| {
        let (i, j, m) = (k / (n * n), (k / n) % n, k % n);
        let y = [x[i], x[j], x[m]];
        let y0 = (s + l.0[1] * y[0] + l.0[2] * y[1] + l.0[3] * y[2]) / l0;
        (cs.density)(&FourVector([y0, y[0], y[1], y[2]])) * (w[i] * w[j] * w[m])
    });
    crate::quadrature::pairwise_sum(&vals) / l0
}

impl ScalarProfile for SourceCharacteristic {
    fn value(&self, s: f64, l: &FourVector) -> C {
        self.eval(s, l).expect("timelike worldlines have a retarded point")
    }
    fn rate(&self, s: f64, l: &FourVector) -> C {
        self.eval_rate(s, l).expect("timelike worldlines have a retarded point")
    }
    fn limits(&self, l: &FourVector) -> (C, C) {
        match &self.model {
            SourceModel::Points(ps) => ps.iter().fold((c(0.0, 0.0), c(0.0, 0.0)), |acc, p| {
                (
                    acc.0 + p.charge / p.worldline.velocity_in().dot(l),
                    acc.1 + p.charge / p.worldline.velocity_out().dot(l),
                )
            }),
            SourceModel::Sampled(_) => {
                let big = 1e6;
                (self.value(-big, l), self.value(big, l))
            }
        }
    }
}

/// Empirical check of the decay bounds for C_k(x) = −(1/2π)∫f_k(x·u, u) du.
#[derive(Clone, Debug)]
pub struct DecayAudit {
    /// Constant fitted on the fitting part of the lattice.
    pub constant: f64,
    /// Largest ratio |C_k| / bound seen on the checking part of the lattice.
    pub worst_check: f64,
    pub passed: bool,
}

/// Bound envelope for C_k(λz) with unit constant, k ∈ {0,1,2}, in the gauge where z⁰ = t·z.
pub fn decay_envelope(k: u32, eps: f64, s_t: f64, lambda: f64, z0: f64) -> f64 {
    match k {
        0 => 1.0 / (s_t + lambda * z0).powf(eps),
        1 => z0.powf(eps) / ((lambda + s_t * z0).powf(eps) * (s_t + lambda * z0)),
        _ => z0.powf(1.0 + eps) / ((lambda + s_t * z0).powf(1.0 + eps) * (s_t + lambda * z0)),
    }
}

/// Fits the bound constant on `fit_lambdas` and checks it on `check_lambdas` for every unit
/// timelike direction z in `dirs`.
#[allow(clippy::too_many_arguments)]
pub fn decay_bound_audit<F: Fn(&FourVector) -> C>(
    field: F,
    t: &FourVector,
    k: u32,
    eps: f64,
    s_t: f64,
    dirs: &[FourVector],
    fit_lambdas: &[f64],
    check_lambdas: &[f64],
) -> DecayAudit {
    let ratio = |lam: f64, z: &FourVector| field(&(*z * lam)).norm() / decay_envelope(k, eps, s_t, lam, z.dot(t));
    let constant = dirs.iter().flat_map(|z| fit_lambdas.iter().map(move |&l| (l, z))).map(|(l, z)| ratio(l, z)).fold(0.0, f64::max);
    let worst_check = dirs
        .iter()
        .flat_map(|z| check_lambdas.iter().map(move |&l| (l, z)))
        .map(|(l, z)| ratio(l, z))
        .fold(0.0, f64::max);
    DecayAudit { constant, worst_check, passed: worst_check <= constant }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> NullGrid {
        NullGrid::new(&FourVector::time(), 32, 64).unwrap()
    }

    #[test]
    fn kirchhoff_closed_form() {
        let eta = ComplexShift::cone_data(FourVector::time());
        let a = kirchhoff_evaluate(&eta, &grid(), &FourVector::new(2.0, 0.0, 0.0, 0.0)).unwrap();
        assert!((a - c(0.12, 0.16)).norm() < 1e-12, "{a}");
        let zero = ConeDataFn::new(|_, _| c(0.0, 0.0), |_, _| c(0.0, 0.0));
        assert_eq!(kirchhoff_evaluate(&zero, &grid(), &FourVector::new(1.0, 0.2, 0.0, 0.0)).unwrap(), c(0.0, 0.0));
        assert!(kirchhoff_evaluate(&eta, &grid(), &FourVector::new(1.0, 2.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn field_from_future_and_past_profiles() {
        let t = FourVector::time();
        let fut = AsymptoticProfile::new(ComplexShift::future(t), t, 1.0, Direction::Future);
        let a = field_from_asymptotic(&fut, &grid(), &FourVector::new(2.0, 0.0, 0.0, 0.0)).unwrap();
        assert!((a.value - c(0.12, 0.16)).norm() < 1e-12);
        let past = AsymptoticProfile::new(ComplexShift::past(t), t, 1.0, Direction::Past);
        let x = FourVector::new(0.3, 0.5, -0.2, 0.4);
        let b = field_from_asymptotic(&past, &grid(), &x).unwrap();
        let f = field_from_asymptotic(&fut, &grid(), &x).unwrap();
        assert!((b.value - f.value).norm() < 1e-12);
        assert!((f.value - ComplexShift::field(&t, &x)).norm() < 1e-10);
    }

    #[test]
    fn isotropic_profile_center_value() {
        let t = FourVector::time();
        let shape = PulseShape::gaussian(1.0, 0.0, 1.0);
        let p = AsymptoticProfile::new(Isotropic { t, shape }, t, 1.0, Direction::Future);
        for lam in [0.5, 1.0, 2.0] {
            let a = field_from_asymptotic(&p, &grid(), &(t * lam)).unwrap();
            assert!((a.value.re + 2.0 * shape.derivatives(lam)[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn extraction_modes() {
        let t = FourVector::time();
        let l = FourVector::new(1.0, 0.0, 0.6, 0.8);
        let est = null_asymptote(|x| ComplexShift::field(&t, x), &FourVector([0.0; 4]), &l, LimitMode::Future, &Ladder::default())
            .unwrap()
            .checked()
            .unwrap();
        assert!((est.value - c(0.0, 0.5)).norm() < 1e-9, "{:?}", est.value);
        let coulomb = |x: &FourVector| c(1.0 / (x.0[1].powi(2) + x.0[2].powi(2) + x.0[3].powi(2)).sqrt(), 0.0);
        let x = FourVector::new(0.4, 0.3, -0.1, 0.2);
        let est = null_asymptote(coulomb, &x, &l, LimitMode::Future, &Ladder::default()).unwrap();
        assert!((est.value - c(1.0, 0.0)).norm() < 1e-9);
        let y = FourVector::new(0.0, 0.0, 0.0, 1.0);
        let est = null_asymptote(coulomb, &x, &y, LimitMode::Spacelike, &Ladder::default()).unwrap();
        assert!((est.value - c(1.0, 0.0)).norm() < 1e-9);
        let past = null_asymptote(|x| ComplexShift::field(&t, x), &x, &l, LimitMode::Past, &Ladder::default()).unwrap();
        let s = x.dot(&l);
        assert!((past.value + 0.5 / c(s, -1.0)).norm() < 1e-8);
    }

    #[test]
    fn divergence_is_flagged() {
        let growing = |x: &FourVector| c(x.0[0].sqrt(), 0.0);
        let l = FourVector::new(1.0, 0.0, 0.0, 1.0);
        let est = null_asymptote(growing, &FourVector::time(), &l, LimitMode::Future, &Ladder::default()).unwrap();
        assert!(est.checked().is_err());
        let short = Ladder { rungs: 3, ..Ladder::default() };
        assert!(null_asymptote(growing, &FourVector::time(), &l, LimitMode::Future, &short).is_err());
    }

    #[test]
    fn static_point_source() {
        let w = Worldline::inertial(FourVector([0.0; 4]), FourVector::time()).unwrap();
        let src = SourceCharacteristic::new(SourceModel::Points(vec![PointSource { worldline: w, charge: c(2.0, 0.0) }]));
        let l = FourVector::new(1.0, 0.0, 0.6, 0.8) * 1.7;
        for s in [-3.0, 0.0, 5.0] {
            assert!((src.eval(s, &l).unwrap() - c(2.0 / 1.7, 0.0)).norm() < 1e-14);
            assert!(src.eval_rate(s, &l).unwrap().norm() < 1e-14);
        }
    }

    #[test]
    fn kink_source_limits_and_homogeneity() {
        let v1 = FourVector::boosted(0.7, [0.0, 0.0, 1.0]);
        let v2 = FourVector::boosted(1.1, [1.0, 0.5, 0.0]);
        let w = Worldline::new(FourVector([0.0; 4]), &[v1, v2], &[1.0]).unwrap();
        let src = SourceCharacteristic::new(SourceModel::Points(vec![PointSource { worldline: w, charge: c(1.0, 0.0) }]));
        let l = FourVector::new(1.0, 0.6, 0.0, -0.8);
        let (lo, hi) = src.limits(&l);
        assert!((src.eval(-1e3, &l).unwrap() - lo).norm() < 1e-14);
        assert!((src.eval(1e3, &l).unwrap() - hi).norm() < 1e-14);
        assert!((lo - c(1.0 / v1.dot(&l), 0.0)).norm() < 1e-14);
        for kappa in [0.3, 2.5] {
            for s in [-0.4, 0.2, 0.9] {
                let a = src.eval(kappa * s, &(l * kappa)).unwrap();
                let b = src.eval(s, &l).unwrap() / kappa;
                assert!((a - b).norm() < 1e-10 * b.norm());
            }
        }
        // ċ against a difference quotient of c
        let h = 1e-5;
        let fd = (src.eval(0.3 + h, &l).unwrap() - src.eval(0.3 - h, &l).unwrap()) / (2.0 * h);
        assert!((fd - src.eval_rate(0.3, &l).unwrap()).norm() < 1e-8);
    }

    #[test]
    fn sampled_static_blob() {
        let q = 1.5;
        let sigma: f64 = 0.3;
        let norm = q / (2.0 * PI * sigma * sigma).powf(1.5);
        let density: Density = Arc::new(move |y: &FourVector| {
            let r2 = y.0[1].powi(2) + y.0[2].powi(2) + y.0[3].powi(2);
            c(norm * (-r2 / (2.0 * sigma * sigma)).exp(), 0.0)
        });
        let src = SourceCharacteristic::new(SourceModel::Sampled(CurrentSampler { density, half_width: 3.0, nodes: 40 }));
        let l = FourVector::new(1.0, 0.0, 0.0, 1.0);
        assert!((src.eval(0.2, &l).unwrap() - c(q, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn tabulated_round_trip() {
        let g = NullGrid::new(&FourVector::time(), 16, 32).unwrap();
        let b = FourVector::new(1.2, 0.2, 0.0, 0.1);
        let prof = ComplexShift::future(b);
        let s: Vec<f64> = (0..=1200).map(|k| -60.0 + 0.1 * k as f64).collect();
        let values: Vec<Vec<C>> = s.iter().map(|&sv| g.nodes.iter().map(|n| prof.value(sv, &n.l)).collect()).collect();
        let dir = std::env::temp_dir().join(format!("nullinf-tab-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("profile.csv");
        Tabulated::write(&path, &g, 1.0, &s, &values).unwrap();
        let tab = Tabulated::load(&path).unwrap();
        std::fs::remove_dir_all(&dir).ok();
        let l = FourVector::new(1.0, 0.0, 0.6, 0.8);
        for sv in [-3.1, 0.0, 0.72] {
            let ev = (tab.value(sv, &l) - prof.value(sv, &l)).norm();
            let er = (tab.rate(sv, &l) - prof.rate(sv, &l)).norm();
            assert!(ev < 1e-4 && er < 1e-3, "{ev:e} {er:e}");
        }
        // window truncation is reported at points whose x·l leave the table
        let ap = AsymptoticProfile::new(tab, g.t, 1.0, Direction::Future);
        assert!(field_from_asymptotic(&ap, &g, &FourVector::new(1.0, 0.1, 0.0, 0.0)).is_ok());
        assert!(field_from_asymptotic(&ap, &g, &FourVector::new(100.0, 0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn wave_equation_residual() {
        let b = FourVector::new(1.0, 0.1, 0.2, 0.0);
        let x = FourVector::new(0.5, 0.2, -0.3, 0.1);
        assert!(wave_residual(|y| ComplexShift::field(&b, y), &x, 1e-2).norm() < 1e-6);
    }
}
