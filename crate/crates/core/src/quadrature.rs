//! One-dimensional quadrature kernels and deterministic reductions.
//!
//! Every reduction in the crate goes through [`pairwise_sum`], whose summation tree depends
//! only on the input length. Parallel callers collect node values into a vector first and
//! reduce afterwards, so results never depend on the thread count.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub type C = Complex64;

/// Values that can be accumulated by the quadrature kernels.
pub trait Accum:
    Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    /// Max-abs size, used for error control.
    fn size(&self) -> f64;
}

impl Accum for f64 {
    fn zero() -> Self {
        0.0
    }
    fn size(&self) -> f64 {
        self.abs()
    }
}

impl Accum for C {
    fn zero() -> Self {
        C::new(0.0, 0.0)
    }
    fn size(&self) -> f64 {
        self.norm()
    }
}

/// Accumulators that also admit multiplication by a complex scalar.
pub trait CAccum: Accum {
    fn cmul(self, k: C) -> Self;
}

impl CAccum for C {
    fn cmul(self, k: C) -> Self {
        self * k
    }
}

impl<const N: usize> CAccum for CVec<N> {
    fn cmul(self, k: C) -> Self {
        self.scale_c(k)
    }
}

/// Fixed-length complex vector with elementwise arithmetic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CVec<const N: usize>(pub [C; N]);

impl<const N: usize> CVec<N> {
    pub fn scale_c(self, k: C) -> Self {
        let mut out = self;
        for z in out.0.iter_mut() {
            *z *= k;
        }
        out
    }
}

impl<const N: usize> Add for CVec<N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = self;
        for (a, b) in out.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
        out
    }
}

impl<const N: usize> Sub for CVec<N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut out = self;
        for (a, b) in out.0.iter_mut().zip(rhs.0) {
            *a -= b;
        }
        out
    }
}

impl<const N: usize> Mul<f64> for CVec<N> {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        let mut out = self;
        for a in out.0.iter_mut() {
            *a *= k;
        }
        out
    }
}

impl<const N: usize> Accum for CVec<N> {
    fn zero() -> Self {
        CVec([C::new(0.0, 0.0); N])
    }
    fn size(&self) -> f64 {
        self.0.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

/// Fixed-length real vector with elementwise arithmetic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RVec<const N: usize>(pub [f64; N]);

impl<const N: usize> Add for RVec<N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        RVec(std::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl<const N: usize> Sub for RVec<N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        RVec(std::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}

impl<const N: usize> Mul<f64> for RVec<N> {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        RVec(self.0.map(|x| x * k))
    }
}

impl<const N: usize> Accum for RVec<N> {
    fn zero() -> Self {
        RVec([0.0; N])
    }
    fn size(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Pairwise summation with a tree fixed by the slice length.
pub fn pairwise_sum<T: Accum>(xs: &[T]) -> T {
    const BLOCK: usize = 8;
    if xs.len() <= BLOCK {
        let mut acc = T::zero();
        for &x in xs {
            acc = acc + x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Evaluates `f` on `0..n` in parallel and returns the values in index order.
pub fn par_map<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    (0..n).into_par_iter().map(f).collect()
}

/// Weighted sum `Σ w_i f(i)` evaluated in parallel and reduced deterministically.
pub fn weighted_sum<T: Accum, F: Fn(usize) -> T + Sync + Send>(weights: &[f64], f: F) -> T {
    let vals = par_map(weights.len(), |i| f(i) * weights[i]);
    pairwise_sum(&vals)
}

/// Gauss–Legendre nodes and weights on [−1, 1], nodes in increasing order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                let (_, d) = legendre_with_derivative(n, z);
                dp = d;
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped onto [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let h = 0.5 * (b - a);
    let c = 0.5 * (b + a);
    (x.iter().map(|&t| c + h * t).collect(), w.iter().map(|&wi| wi * h).collect())
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 15-point Kronrod panel; returns (Kronrod estimate, |Kronrod − Gauss|).
pub fn gk15<T: Accum, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        let s = f1 + f2;
        k = k + s * WGK[j];
        if j % 2 == 1 {
            g = g + s * WG[j / 2];
        }
    }
    let k = k * h;
    let g = g * h;
    (k, (k - g).size())
}

/// Adaptive bisection on Kronrod panels. Deterministic: the refinement order depends only
/// on the integrand values.
pub fn adaptive<T: Accum, F: Fn(f64) -> T>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_depth: u32,
) -> (T, f64) {
    let (v, e) = gk15(f, a, b);
    if e <= abs_tol || max_depth == 0 || (b - a).abs() < 1e-13 * (1.0 + a.abs().max(b.abs())) {
        return (v, e);
    }
    let m = 0.5 * (a + b);
    let (v1, e1) = adaptive(f, a, m, 0.5 * abs_tol, max_depth - 1);
    let (v2, e2) = adaptive(f, m, b, 0.5 * abs_tol, max_depth - 1);
    (v1 + v2, e1 + e2)
}

/// Settings for improper integrals over the real line.
#[derive(Clone, Copy, Debug)]
pub struct LinePolicy {
    /// Truncate where the integrand drops below this fraction of its sampled peak.
    pub cutoff: f64,
    /// Reject when the estimated tail exceeds this fraction of the integral.
    pub tail_tol: f64,
    /// Absolute error target for the panels.
    pub abs_tol: f64,
    pub panels: usize,
}

impl Default for LinePolicy {
    fn default() -> Self {
        LinePolicy { cutoff: 1e-10, tail_tol: 1e-8, abs_tol: 1e-13, panels: 16 }
    }
}

/// Result of an improper line integral.
#[derive(Clone, Copy, Debug)]
pub struct LineIntegral<T> {
    pub value: T,
    pub error: f64,
    pub window: (f64, f64),
    pub tail: f64,
}

/// ∫ f(s) ds over ℝ with a data-driven window.
///
/// The window starts at `center ± scale` (widened to cover `breakpoints`) and grows
/// geometrically on each side until the integrand falls below `cutoff · peak`.
pub fn integrate_line<T: Accum, F: Fn(f64) -> T>(
    f: &F,
    center: f64,
    scale: f64,
    breakpoints: &[f64],
    policy: &LinePolicy,
) -> Result<LineIntegral<T>> {
    let scale = scale.abs().max(1e-6);
    let mut lo = center - scale;
    let mut hi = center + scale;
    for &b in breakpoints {
        lo = lo.min(b);
        hi = hi.max(b);
    }
    let mut peak = 0.0_f64;
    let probes = 64;
    for k in 0..=probes {
        let s = lo + (hi - lo) * k as f64 / probes as f64;
        peak = peak.max(f(s).size());
    }
    let mut step = scale;
    let mut guard = 0;
    loop {
        let flo = f(lo).size();
        let flo2 = f(lo - 0.5 * step).size();
        peak = peak.max(flo).max(flo2);
        if flo.max(flo2) <= policy.cutoff * peak || peak == 0.0 {
            break;
        }
        lo -= step;
        step *= 2.0;
        guard += 1;
        if guard > 60 {
            return Err(Error::convergence("integrate_line", "integrand does not decay towards -inf"));
        }
    }
    let mut step = scale;
    guard = 0;
    loop {
        let fhi = f(hi).size();
        let fhi2 = f(hi + 0.5 * step).size();
        peak = peak.max(fhi).max(fhi2);
        if fhi.max(fhi2) <= policy.cutoff * peak || peak == 0.0 {
            break;
        }
        hi += step;
        step *= 2.0;
        guard += 1;
        if guard > 60 {
            return Err(Error::convergence("integrate_line", "integrand does not decay towards +inf"));
        }
    }
    let mut cuts: Vec<f64> = Vec::with_capacity(policy.panels + breakpoints.len() + 1);
    for k in 0..=policy.panels {
        cuts.push(lo + (hi - lo) * k as f64 / policy.panels as f64);
    }
    for &b in breakpoints {
        if b > lo && b < hi {
            cuts.push(b);
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14 * (1.0 + a.abs()));
    let tol = policy.abs_tol / cuts.len() as f64;
    let mut parts = Vec::with_capacity(cuts.len());
    let mut err = 0.0;
    for w in cuts.windows(2) {
        let (v, e) = adaptive(f, w[0], w[1], tol, 30);
        parts.push(v);
        err += e;
    }
    let value = pairwise_sum(&parts);
    let tail = (f(lo).size() + f(hi).size()) * (hi - lo);
    if tail > policy.tail_tol * value.size().max(1e-300) && tail > policy.abs_tol {
        return Err(Error::convergence(
            "integrate_line",
            format!("tail estimate {tail:.3e} exceeds tolerance relative to {:.3e}", value.size()),
        ));
    }
    Ok(LineIntegral { value, error: err, window: (lo, hi), tail })
}

/// Richardson extrapolation of samples `f(h_k)` with `h_k = h_0 / ratio^k` towards h → 0,
/// assuming an expansion in integer powers of h.
///
/// Returns the final extrapolant and the difference of the last two diagonal entries.
pub fn richardson<T: Accum>(samples: &[T], ratio: f64) -> (T, f64, Vec<T>) {
    let n = samples.len();
    assert!(n >= 1);
    let mut table: Vec<Vec<T>> = vec![samples.to_vec()];
    for j in 1..n {
        let prev = &table[j - 1];
        let factor = ratio.powi(j as i32);
        let row: Vec<T> = (0..prev.len() - 1)
            .map(|k| (prev[k + 1] * factor - prev[k]) * (1.0 / (factor - 1.0)))
            .collect();
        table.push(row);
    }
    let diag: Vec<T> = table.iter().map(|r| *r.last().expect("row")).collect();
    let best = *diag.last().expect("diag");
    let err = if n >= 2 { (diag[n - 1] - diag[n - 2]).size() } else { f64::INFINITY };
    (best, err, diag)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1usize, 2, 5, 16, 40, 97] {
            let (x, w) = gauss_legendre(n);
            let sw: f64 = w.iter().sum();
            assert!((sw - 2.0).abs() < 1e-14, "n={n}");
            let k = 2 * n - 2;
            let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
            assert!((m - 2.0 / (k as f64 + 1.0)).abs() < 1e-14, "n={n}");
        }
    }

    #[test]
    fn kronrod_panel_is_exact_for_degree_22() {
        let f = |x: f64| 23.0 * x.powi(22) + x.powi(21);
        let (v, _) = gk15(&f, -1.0, 1.0);
        assert!((v - 2.0).abs() < 1e-13);
        let g = |x: f64| 13.0 * x.powi(12);
        let (v, e) = gk15(&g, -1.0, 1.0);
        assert!((v - 2.0).abs() < 1e-13 && e < 1e-13);
    }

    #[test]
    fn gaussian_line_integral() {
        let f = |s: f64| (-(s - 3.0) * (s - 3.0)).exp();
        let r = integrate_line(&f, 0.0, 1.0, &[], &LinePolicy::default()).unwrap();
        assert!((r.value - std::f64::consts::PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn richardson_removes_polynomial_terms() {
        let f = |h: f64| 2.0 + 3.0 * h - h * h + 0.5 * h * h * h;
        let samples: Vec<f64> = (0..4).map(|k| f(0.1 / 2f64.powi(k))).collect();
        let (v, _, _) = richardson(&samples, 2.0);
        assert!((v - 2.0).abs() < 1e-13);
    }

    #[test]
    fn pairwise_matches_naive_within_rounding() {
        let xs: Vec<f64> = (0..1000).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-12);
    }
}
