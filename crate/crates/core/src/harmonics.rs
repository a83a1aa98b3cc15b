//! Real spherical harmonics on the rest-frame sphere of a gauge vector.
//!
//! Functions of type {p,p} are represented by their values in t-gauge, expanded as
//! Σ a_ℓm Y_ℓm(n) with real orthonormal Y_ℓm and complex coefficients.

use std::f64::consts::PI;

use crate::quadrature::pairwise_sum;
use crate::sphere::NullGrid;
use crate::spinors::{null_vector_of, FourVector, Spinor, C};

fn index(l: usize, m: i64) -> usize {
    l * l + (l as i64 + m) as usize
}

/// Normalized associated Legendre values P̄_ℓ^m(x), m ≥ 0, stored at `l*(l+1)/2 + m`.
pub fn legendre_table(l_max: usize, x: f64) -> Vec<f64> {
    let tri = |l: usize, m: usize| l * (l + 1) / 2 + m;
    let mut p = vec![0.0; (l_max + 1) * (l_max + 2) / 2];
    let s = (1.0 - x * x).max(0.0).sqrt();
    p[0] = 0.5 / PI.sqrt();
    for m in 1..=l_max {
        let mf = m as f64;
        p[tri(m, m)] = ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s * p[tri(m - 1, m - 1)];
    }
    for m in 0..l_max {
        p[tri(m + 1, m)] = (2.0 * m as f64 + 3.0).sqrt() * x * p[tri(m, m)];
    }
    for m in 0..=l_max {
        let mf = m as f64;
        let a = |l: f64| ((4.0 * l * l - 1.0) / (l * l - mf * mf)).sqrt();
        for l in (m + 2)..=l_max {
            let lf = l as f64;
            p[tri(l, m)] = a(lf) * (x * p[tri(l - 1, m)] - p[tri(l - 2, m)] / a(lf - 1.0));
        }
    }
    p
}

/// All Y_ℓm(n) for ℓ ≤ l_max at a unit direction, indexed ℓ² + ℓ + m.
pub fn real_harmonics(l_max: usize, dir: [f64; 3]) -> Vec<f64> {
    let x = dir[2].clamp(-1.0, 1.0);
    let phi = dir[1].atan2(dir[0]);
    let p = legendre_table(l_max, x);
    let mut y = vec![0.0; (l_max + 1) * (l_max + 1)];
    for l in 0..=l_max {
        y[index(l, 0)] = p[l * (l + 1) / 2];
        for m in 1..=l {
            let (sm, cm) = (m as f64 * phi).sin_cos();
            let v = std::f64::consts::SQRT_2 * p[l * (l + 1) / 2 + m];
            y[index(l, m as i64)] = v * cm;
            y[index(l, -(m as i64))] = v * sm;
        }
    }
    y
}

/// Truncated harmonic expansion of a type-{p,p} function in the gauge of `t`.
#[derive(Clone, Debug)]
pub struct SphereSeries {
    pub l_max: usize,
    /// Homogeneity degree p of the represented function (type {p,p}).
    pub degree: i32,
    t: FourVector,
    axes: [FourVector; 3],
    coeffs: Vec<C>,
}

impl SphereSeries {
    /// Projects node values (sampled in the grid's t-gauge) onto harmonics up to `l_max`.
    /// Exact for band-limited data when `l_max < n_theta` and `n_phi > 2 l_max`.
    pub fn analyze(grid: &NullGrid, values: &[C], l_max: usize, degree: i32) -> Self {
        assert_eq!(values.len(), grid.len(), "sample count does not match the grid");
        let n_phi = grid.n_phi;
        let n_modes = (l_max + 1) * (l_max + 1);
        // ring-wise: Fourier sums in φ, then Legendre weights
        let rings: Vec<Vec<C>> = crate::quadrature::par_map(grid.n_theta, |r| {
            let base = r * n_phi;
            let x = grid.nodes[base].dir[2];
            let w = grid.weights[base];
            let p = legendre_table(l_max, x);
            let mut out = vec![C::new(0.0, 0.0); n_modes];
            let mut cos_sum = vec![C::new(0.0, 0.0); l_max + 1];
            let mut sin_sum = vec![C::new(0.0, 0.0); l_max + 1];
            for (m, (cs, ss)) in cos_sum.iter_mut().zip(sin_sum.iter_mut()).enumerate() {
                let terms_c: Vec<C> = (0..n_phi)
                    .map(|j| {
                        let d = grid.nodes[base + j].dir;
                        values[base + j] * (m as f64 * d[1].atan2(d[0])).cos()
                    })
                    .collect();
                let terms_s: Vec<C> = (0..n_phi)
                    .map(|j| {
                        let d = grid.nodes[base + j].dir;
                        values[base + j] * (m as f64 * d[1].atan2(d[0])).sin()
                    })
                    .collect();
                *cs = pairwise_sum(&terms_c);
                *ss = pairwise_sum(&terms_s);
            }
            for l in 0..=l_max {
                out[index(l, 0)] = cos_sum[0] * (p[l * (l + 1) / 2] * w);
                for m in 1..=l {
                    let v = std::f64::consts::SQRT_2 * p[l * (l + 1) / 2 + m] * w;
                    out[index(l, m as i64)] = cos_sum[m] * v;
                    out[index(l, -(m as i64))] = sin_sum[m] * v;
                }
            }
            out
        });
        let coeffs = (0..n_modes)
            .map(|k| {
                let col: Vec<C> = rings.iter().map(|r| r[k]).collect();
                pairwise_sum(&col)
            })
            .collect();
        SphereSeries { l_max, degree, t: grid.t, axes: *grid.axes(), coeffs }
    }

    pub fn coeff(&self, l: usize, m: i64) -> C {
        self.coeffs[index(l, m)]
    }

    /// Replaces every coefficient of degree ℓ by `f(ℓ)` times itself.
    pub fn map_degree<F: Fn(usize) -> C>(&self, degree: i32, f: F) -> Self {
        let mut out = self.clone();
        out.degree = degree;
        for l in 0..=self.l_max {
            let k = f(l);
            for m in -(l as i64)..=(l as i64) {
                out.coeffs[index(l, m)] *= k;
            }
        }
        out
    }

    /// Value at a rest-frame unit direction (t-gauge value).
    pub fn eval_dir(&self, dir: [f64; 3]) -> C {
        self.eval_harmonics(&real_harmonics(self.l_max, dir))
    }

    /// Series value given precomputed harmonics at a direction.
    pub fn eval_harmonics(&self, y: &[f64]) -> C {
        let terms: Vec<C> = self.coeffs.iter().zip(y).map(|(a, yv)| *a * *yv).collect();
        pairwise_sum(&terms)
    }

    /// Value at an arbitrary spinor, restoring the homogeneity weight (t·l)^p.
    pub fn eval(&self, o: &Spinor) -> C {
        let l = null_vector_of(o);
        let tl = self.t.dot(&l);
        let dir = [0, 1, 2].map(|i| -l.dot(&self.axes[i]) / tl);
        self.eval_dir(dir) * tl.powi(self.degree)
    }

    /// Root-sum-square of the coefficients with ℓ in the top quarter of the band.
    pub fn tail_norm(&self) -> f64 {
        let start = self.l_max - self.l_max / 4;
        (start..=self.l_max)
            .flat_map(|l| (-(l as i64)..=(l as i64)).map(move |m| (l, m)))
            .map(|(l, m)| self.coeffs[index(l, m)].norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Root-sum-square of all coefficients (the L² norm on the unit sphere).
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spinors::c;

    #[test]
    fn orthonormal_on_grid() {
        let g = NullGrid::new(&FourVector::time(), 12, 24).unwrap();
        let l_max = 6;
        let ys: Vec<Vec<f64>> = g.nodes.iter().map(|n| real_harmonics(l_max, n.dir)).collect();
        let n = (l_max + 1) * (l_max + 1);
        for a in 0..n {
            for b in 0..n {
                let s: f64 = ys.iter().zip(&g.weights).map(|(y, w)| y[a] * y[b] * w).sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((s - expect).abs() < 1e-12, "{a} {b} {s}");
            }
        }
    }

    #[test]
    fn low_degree_closed_forms() {
        let dir = [0.36, 0.48, 0.8];
        let y = real_harmonics(2, dir);
        let k1 = (3.0 / (4.0 * PI)).sqrt();
        assert!((y[index(1, 0)] - k1 * 0.8).abs() < 1e-14);
        assert!((y[index(1, 1)] - k1 * 0.36).abs() < 1e-14);
        assert!((y[index(1, -1)] - k1 * 0.48).abs() < 1e-14);
        let k20 = (5.0 / (16.0 * PI)).sqrt();
        assert!((y[index(2, 0)] - k20 * (3.0 * 0.64 - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn analysis_reproduces_smooth_function() {
        let t = FourVector::boosted(0.3, [0.2, 0.5, 1.0]);
        let g = NullGrid::new(&t, 32, 64).unwrap();
        let u = FourVector::boosted(0.8, [1.0, -0.3, 0.1]);
        let f = |o: &Spinor| c(1.0 / u.dot(&null_vector_of(o)).powi(2), 0.0);
        let vals = g.sample(|n| f(&n.o));
        let s = SphereSeries::analyze(&g, &vals, 31, -2);
        let o = Spinor::new(c(0.3, -0.2), c(1.1, 0.4));
        let err = (s.eval(&o) - f(&o)).norm() / f(&o).norm();
        assert!(err < 1e-9, "{err:e} {:e}", s.tail_norm());
        assert!(s.tail_norm() < 1e-6);
    }
}
