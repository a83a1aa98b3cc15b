//! Invariant measure over null directions.
//!
//! A grid is built for a unit timelike gauge vector t: every node spinor satisfies t·l = 1,
//! so the invariant measure reduces to the round measure on the sphere of directions in the
//! rest frame of t. Integrands are functions of the node spinor of homogeneity type {−2,−2}.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, gauss_legendre_on, pairwise_sum, par_map, Accum, CAccum};
use crate::spinors::{c, null_vector_of, FourVector, Lorentz, Spinor, C, I};

/// A quadrature node: t-gauge spinor, its null vector and rest-frame direction.
#[derive(Clone, Copy, Debug)]
pub struct Node {
    pub o: Spinor,
    pub l: FourVector,
    pub dir: [f64; 3],
}

/// Gauss–Legendre × trapezoid grid over null directions in the gauge of `t`.
#[derive(Clone, Debug)]
pub struct NullGrid {
    pub t: FourVector,
    pub n_theta: usize,
    pub n_phi: usize,
    frame: Lorentz,
    axes: [FourVector; 3],
    pub nodes: Vec<Node>,
    pub weights: Vec<f64>,
}

impl NullGrid {
    pub fn new(t: &FourVector, n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta < 2 || n_phi < 4 {
            return Err(Error::invalid("build_grid", format!("resolution {n_theta}x{n_phi} too small")));
        }
        let frame = Lorentz::boost_to(t).map_err(|_| Error::invalid("build_grid", "gauge vector is not unit timelike"))?;
        let axes = [1, 2, 3].map(|i| {
            let mut e = [0.0; 4];
            e[i] = 1.0;
            frame.vector(&FourVector(e))
        });
        let (x, w) = gauss_legendre(n_theta);
        let mut grid = NullGrid { t: *t, n_theta, n_phi, frame, axes, nodes: Vec::new(), weights: Vec::new() };
        let dphi = 2.0 * PI / n_phi as f64;
        for (ci, wi) in x.iter().zip(&w) {
            let st = (1.0 - ci * ci).max(0.0).sqrt();
            for j in 0..n_phi {
                let phi = (j as f64 + 0.5) * dphi;
                let dir = [st * phi.cos(), st * phi.sin(), *ci];
                grid.nodes.push(grid.node_at(dir));
                grid.weights.push(wi * dphi);
            }
        }
        Ok(grid)
    }

    /// The same gauge at a different resolution.
    pub fn with_resolution(&self, n_theta: usize, n_phi: usize) -> Result<Self> {
        NullGrid::new(&self.t, n_theta, n_phi)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Spatial unit vectors of the rest frame of t.
    pub fn axes(&self) -> &[FourVector; 3] {
        &self.axes
    }

    pub fn frame(&self) -> &Lorentz {
        &self.frame
    }

    /// t-gauge spinor ξ = cos(ϑ/2) o_t + √2 sin(ϑ/2) e^{−iφ} ι_t for a rest-frame direction.
    pub fn spinor_at(&self, dir: [f64; 3]) -> Spinor {
        let nz = dir[2].clamp(-1.0, 1.0);
        let half = 0.5 * nz.acos();
        let phi = dir[1].atan2(dir[0]);
        let base = Spinor::new(c(half.cos(), 0.0), (-I * phi).exp() * half.sin());
        self.frame.spinor(&base)
    }

    pub fn node_at(&self, dir: [f64; 3]) -> Node {
        let o = self.spinor_at(dir);
        Node { o, l: null_vector_of(&o), dir }
    }

    /// Rest-frame components of a spatial direction given by a vector (the part orthogonal to t).
    pub fn rest_components(&self, v: &FourVector) -> [f64; 3] {
        [-v.dot(&self.axes[0]), -v.dot(&self.axes[1]), -v.dot(&self.axes[2])]
    }

    /// Rest-frame direction of the null ray of `o`.
    pub fn direction_of(&self, o: &Spinor) -> [f64; 3] {
        let l = null_vector_of(o);
        let tl = self.t.dot(&l);
        self.rest_components(&l).map(|x| x / tl)
    }

    /// Rescales an arbitrary spinor into t-gauge (keeps its phase).
    pub fn gauge(&self, o: &Spinor) -> Spinor {
        let tl = self.t.dot(&null_vector_of(o));
        o.scale(c(1.0 / tl.sqrt(), 0.0))
    }

    /// Node values in grid order, evaluated in parallel.
    pub fn sample<T: Send, F: Fn(&Node) -> T + Sync + Send>(&self, f: F) -> Vec<T> {
        par_map(self.nodes.len(), |i| f(&self.nodes[i]))
    }

    /// Quadrature of already sampled node values.
    pub fn integrate_samples<T: Accum>(&self, vals: &[T]) -> T {
        assert_eq!(vals.len(), self.weights.len(), "sample count does not match the grid");
        let terms: Vec<T> = vals.iter().zip(&self.weights).map(|(v, w)| *v * *w).collect();
        pairwise_sum(&terms)
    }

    /// ∫ f dl for an integrand of type {−2,−2}, evaluated at the t-gauge nodes.
    pub fn integrate_with<T: Accum, F: Fn(&Node) -> T + Sync + Send>(&self, f: F) -> T {
        let vals = self.sample(f);
        self.integrate_samples(&vals)
    }

    /// ∫ f dl for a declared homogeneous function.
    pub fn integrate(&self, f: &HomogeneousFn) -> Result<C> {
        if f.p != -2 || f.q != -2 {
            return Err(Error::invalid("integrate", format!("integrand has type {{{},{}}}, expected {{-2,-2}}", f.p, f.q)));
        }
        Ok(self.integrate_with(|n| f.eval(&n.o)))
    }

    /// Orthonormal pair completing the rest-frame unit vector `axis`.
    fn transverse(axis: [f64; 3]) -> ([f64; 3], [f64; 3]) {
        let pick = if axis[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
        let e1 = normalize(cross(pick, axis));
        let e2 = cross(axis, e1);
        (e1, e2)
    }

    /// Quadrature over the band `c_lo ≤ cos∠(axis, n) ≤ c_hi` with `n_c` Gauss nodes in the
    /// cosine and `n_phi` trapezoid nodes around the axis.
    pub fn integrate_band<T: Accum, F: Fn(&Node) -> T + Sync + Send>(
        &self,
        axis: [f64; 3],
        c_lo: f64,
        c_hi: f64,
        n_c: usize,
        n_phi: usize,
        f: F,
    ) -> T {
        if c_hi <= c_lo {
            return T::zero();
        }
        let axis = normalize(axis);
        let (e1, e2) = Self::transverse(axis);
        let (cs, ws) = gauss_legendre_on(n_c, c_lo, c_hi);
        let dphi = 2.0 * PI / n_phi as f64;
        let vals = par_map(n_c * n_phi, |k| {
            let (i, j) = (k / n_phi, k % n_phi);
            let cc = cs[i];
            let s = (1.0 - cc * cc).max(0.0).sqrt();
            let psi = (j as f64 + 0.5) * dphi;
            let (sp, cp) = psi.sin_cos();
            let dir = std::array::from_fn(|a| cc * axis[a] + s * (cp * e1[a] + sp * e2[a]));
            f(&self.node_at(dir)) * (ws[i] * dphi)
        });
        pairwise_sum(&vals)
    }

    /// ∫ δ(y·l) f(l) dl for spacelike y, as a trapezoid rule on the great circle y·l = 0.
    pub fn integrate_delta_line<T: Accum, F: Fn(&Node) -> T + Sync + Send>(
        &self,
        y: &FourVector,
        n: usize,
        f: F,
    ) -> Result<T> {
        let (yhat, ymag, cstar) = self.split_spacelike(y, "integrate_delta_line")?;
        let (e1, e2) = Self::transverse(yhat);
        let s = (1.0 - cstar * cstar).sqrt();
        let dpsi = 2.0 * PI / n as f64;
        let vals = par_map(n, |k| {
            let psi = (k as f64 + 0.5) * dpsi;
            let (sp, cp) = psi.sin_cos();
            let dir = std::array::from_fn(|a| cstar * yhat[a] + s * (cp * e1[a] + sp * e2[a]));
            f(&self.node_at(dir)) * (dpsi / ymag)
        });
        Ok(pairwise_sum(&vals))
    }

    /// ∫ sgn(y·l) f(l) dl, split exactly along the circle y·l = 0.
    pub fn integrate_sign<T: Accum, F: Fn(&Node) -> T + Sync + Send>(
        &self,
        y: &FourVector,
        n_c: usize,
        n_phi: usize,
        f: F,
    ) -> Result<T> {
        let (yhat, _, cstar) = self.split_spacelike(y, "integrate_sign")?;
        let below = self.integrate_band(yhat, -1.0, cstar, n_c, n_phi, &f);
        let above = self.integrate_band(yhat, cstar, 1.0, n_c, n_phi, &f);
        Ok(below - above)
    }

    /// Rest-frame unit direction of y, |y⃗|, and cos of the circle y·l = 0 about it.
    fn split_spacelike(&self, y: &FourVector, op: &'static str) -> Result<([f64; 3], f64, f64)> {
        let yy = y.norm_sqr();
        let scale = y.euclid().powi(2).max(1e-300);
        if yy >= -1e-12 * scale {
            return Err(Error::invalid(op, format!("y = {:?} is not spacelike", y.0)));
        }
        let y0 = y.dot(&self.t);
        let ys = self.rest_components(y);
        let ymag = (ys[0] * ys[0] + ys[1] * ys[1] + ys[2] * ys[2]).sqrt();
        Ok((ys.map(|x| x / ymag), ymag, y0 / ymag))
    }
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn normalize(a: [f64; 3]) -> [f64; 3] {
    let n = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    a.map(|x| x / n)
}

type Evaluator = Arc<dyn Fn(&Spinor) -> C + Send + Sync>;

/// Complex function of a spinor with a declared homogeneity type {p, q}.
#[derive(Clone)]
pub struct HomogeneousFn {
    pub p: i32,
    pub q: i32,
    eval: Evaluator,
}

impl std::fmt::Debug for HomogeneousFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "HomogeneousFn{{{},{}}}", self.p, self.q)
    }
}

impl HomogeneousFn {
    pub fn new<F: Fn(&Spinor) -> C + Send + Sync + 'static>(p: i32, q: i32, f: F) -> Self {
        HomogeneousFn { p, q, eval: Arc::new(f) }
    }

    pub fn eval(&self, o: &Spinor) -> C {
        (self.eval)(o)
    }

    /// Largest relative residual of f(αo) = α^p ᾱ^q f(o) over the given samples.
    pub fn homogeneity_residual(&self, samples: &[(Spinor, C)]) -> f64 {
        samples
            .iter()
            .map(|(o, a)| {
                let lhs = self.eval(&o.scale(*a));
                let rhs = self.eval(o) * a.powi(self.p) * a.conj().powi(self.q);
                (lhs - rhs).norm() / rhs.norm().max(1e-300)
            })
            .fold(0.0, f64::max)
    }
}

/// Relative step of the spin-derivative stencils.
pub const SPIN_STEP: f64 = 1e-3;

/// Derivatives ∂f/∂x and ∂f/∂y of f along the real and imaginary directions of component k.
fn partials<T: CAccum, F: Fn(&Spinor) -> T>(f: &F, o: &Spinor, k: usize, h: f64) -> (T, T) {
    let shifted = |d: C| {
        let mut s = *o;
        s.0[k] += d;
        f(&s)
    };
    let stencil = |dir: C| {
        let f1 = shifted(dir * h);
        let f2 = shifted(dir * (2.0 * h));
        let m1 = shifted(dir * -h);
        let m2 = shifted(dir * (-2.0 * h));
        ((f1 - m1) * 8.0 - (f2 - m2)) * (1.0 / (12.0 * h))
    };
    (stencil(c(1.0, 0.0)), stencil(I))
}

/// ∂_A f = ∂f/∂o^A (holomorphic Wirtinger derivative), lower unprimed index.
pub fn d_unprimed<T: CAccum, F: Fn(&Spinor) -> T>(f: &F, o: &Spinor) -> [T; 2] {
    let h = SPIN_STEP * o.norm();
    std::array::from_fn(|k| {
        let (dx, dy) = partials(f, o, k, h);
        (dx - dy.cmul(I)) * 0.5
    })
}

/// ∂_{A'} f = ∂f/∂ō^{A'} (antiholomorphic Wirtinger derivative), lower primed index.
pub fn d_primed<T: CAccum, F: Fn(&Spinor) -> T>(f: &F, o: &Spinor) -> [T; 2] {
    let h = SPIN_STEP * o.norm();
    std::array::from_fn(|k| {
        let (dx, dy) = partials(f, o, k, h);
        (dx + dy.cmul(I)) * 0.5
    })
}

/// Which spin-frame derivative to take.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpinIndex {
    Unprimed,
    Primed,
}

/// Node-sampled spin derivative of a homogeneous function.
#[derive(Clone, Debug)]
pub struct SpinDerivative {
    pub which: SpinIndex,
    pub values: Vec<[C; 2]>,
    pub euler_residual: f64,
}

/// ∂_A f or ∂_{A'} f on the grid nodes, with the Euler identity o^A∂_A f = p f
/// (ō^{A'}∂_{A'} f = q f) checked at every node.
pub fn spin_derivative(grid: &NullGrid, f: &HomogeneousFn, which: SpinIndex) -> Result<SpinDerivative> {
    let g = |o: &Spinor| f.eval(o);
    let per_node = grid.sample(|n| {
        let d = match which {
            SpinIndex::Unprimed => d_unprimed(&g, &n.o),
            SpinIndex::Primed => d_primed(&g, &n.o),
        };
        let (contr, deg) = match which {
            SpinIndex::Unprimed => (n.o.0[0] * d[0] + n.o.0[1] * d[1], f.p),
            SpinIndex::Primed => (n.o.0[0].conj() * d[0] + n.o.0[1].conj() * d[1], f.q),
        };
        let val = f.eval(&n.o);
        (d, (contr - val * deg as f64).norm(), val.norm())
    });
    let scale = per_node.iter().fold(0.0_f64, |m, x| m.max(x.2)).max(1e-300);
    let euler_residual = per_node.iter().fold(0.0_f64, |m, x| m.max(x.1)) / scale;
    if euler_residual > 1e-6 {
        return Err(Error::invariant(
            "spin_derivative",
            format!("Euler identity residual {euler_residual:.3e}: declared type or smoothness is wrong"),
        ));
    }
    Ok(SpinDerivative { which, values: per_node.into_iter().map(|x| x.0).collect(), euler_residual })
}
