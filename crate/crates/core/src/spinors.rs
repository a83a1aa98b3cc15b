//! Minkowski vectors, two-component spinors, null tetrads and Dirac matrices.
//!
//! Signature is (+,−,−,−). Components are pinned by three anchors:
//! the null vector of (1,0) is (1,0,0,1); the spherical parametrization of a t-gauge spinor
//! gives u = t + sinϑ(cosφ X + sinφ Y) + cosϑ Z; and t·l = |ξ⁰|² + |ξ¹|² in the t-frame.
//! These fix the antisymmetric form to ε₀₁ = √2, so ⟨a,b⟩ = a_A b^A = √2(a⁰b¹ − a¹b⁰).
//!
//! A contravariant vector v corresponds to the mixed spinor
//! V^{AA'} = ½[[v⁰+v³, v¹+iv²], [v¹−iv², v⁰−v³]],
//! and a covariant vector x_a to X_{AA'} = [[x₀+x₃, x₁−ix₂], [x₁+ix₂, x₀−x₃]].

use std::f64::consts::SQRT_2;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C = Complex64;

pub const I: C = C::new(0.0, 1.0);
pub const ZERO: C = C::new(0.0, 0.0);
pub const ONE: C = C::new(1.0, 0.0);

/// ε_{AB} with ε₀₁ = √2.
pub const EPS01: f64 = SQRT_2;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Real four-vector with contravariant components.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourVector(pub [f64; 4]);

impl FourVector {
    pub const fn new(t: f64, x: f64, y: f64, z: f64) -> Self {
        FourVector([t, x, y, z])
    }

    pub const fn time() -> Self {
        FourVector([1.0, 0.0, 0.0, 0.0])
    }

    pub fn dot(&self, o: &FourVector) -> f64 {
        let a = &self.0;
        let b = &o.0;
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.dot(self)
    }

    /// Euclidean size of the component array.
    pub fn euclid(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Covariant components x_a.
    pub fn lower(&self) -> [f64; 4] {
        [self.0[0], -self.0[1], -self.0[2], -self.0[3]]
    }

    pub fn from_lower(x: [f64; 4]) -> Self {
        FourVector([x[0], -x[1], -x[2], -x[3]])
    }

    pub fn spatial(&self) -> [f64; 3] {
        [self.0[1], self.0[2], self.0[3]]
    }

    pub fn complexify(&self) -> ComplexVector {
        ComplexVector(self.0.map(|x| C::new(x, 0.0)))
    }

    /// Unit timelike future vector with rapidity `eta` along the unit spatial direction `dir`.
    pub fn boosted(eta: f64, dir: [f64; 3]) -> Self {
        let n = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
        let (ch, sh) = (eta.cosh(), eta.sinh());
        if n == 0.0 {
            return FourVector::time();
        }
        FourVector([ch, sh * dir[0] / n, sh * dir[1] / n, sh * dir[2] / n])
    }

    /// Rescales a timelike future vector to unit norm.
    pub fn unit_timelike(&self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if !(n2 > 0.0) || self.0[0] <= 0.0 {
            return Err(Error::invalid("unit_timelike", format!("{:?} is not future timelike", self.0)));
        }
        Ok(*self * (1.0 / n2.sqrt()))
    }

    pub fn is_unit_timelike(&self, tol: f64) -> bool {
        self.0[0] > 0.0 && (self.norm_sqr() - 1.0).abs() <= tol
    }

    /// Mixed spinor V^{AA'}.
    pub fn to_upper(&self) -> Mat2 {
        self.complexify().to_upper()
    }

    /// Mixed spinor X_{AA'} (both indices down).
    pub fn to_lower(&self) -> Mat2 {
        self.complexify().to_lower()
    }
}

impl Add for FourVector {
    type Output = FourVector;
    fn add(self, o: FourVector) -> FourVector {
        FourVector(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl Sub for FourVector {
    type Output = FourVector;
    fn sub(self, o: FourVector) -> FourVector {
        FourVector(std::array::from_fn(|i| self.0[i] - o.0[i]))
    }
}

impl Mul<f64> for FourVector {
    type Output = FourVector;
    fn mul(self, k: f64) -> FourVector {
        FourVector(self.0.map(|x| x * k))
    }
}

impl Neg for FourVector {
    type Output = FourVector;
    fn neg(self) -> FourVector {
        self * -1.0
    }
}

/// Complex four-vector with contravariant components.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexVector(pub [C; 4]);

impl ComplexVector {
    pub fn zero() -> Self {
        ComplexVector([ZERO; 4])
    }

    /// Bilinear Minkowski product (no conjugation).
    pub fn dot(&self, o: &ComplexVector) -> C {
        let a = &self.0;
        let b = &o.0;
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3]
    }

    pub fn dot_real(&self, o: &FourVector) -> C {
        let a = &self.0;
        let b = &o.0;
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3]
    }

    pub fn conj(&self) -> Self {
        ComplexVector(self.0.map(|z| z.conj()))
    }

    pub fn re(&self) -> FourVector {
        FourVector(self.0.map(|z| z.re))
    }

    pub fn im(&self) -> FourVector {
        FourVector(self.0.map(|z| z.im))
    }

    pub fn lower(&self) -> [C; 4] {
        [self.0[0], -self.0[1], -self.0[2], -self.0[3]]
    }

    pub fn from_lower(x: [C; 4]) -> Self {
        ComplexVector([x[0], -x[1], -x[2], -x[3]])
    }

    pub fn scale(&self, k: C) -> Self {
        ComplexVector(self.0.map(|z| z * k))
    }

    pub fn add(&self, o: &ComplexVector) -> Self {
        ComplexVector(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn to_upper(&self) -> Mat2 {
        let v = &self.0;
        Mat2([[(v[0] + v[3]) * 0.5, (v[1] + I * v[2]) * 0.5], [(v[1] - I * v[2]) * 0.5, (v[0] - v[3]) * 0.5]])
    }

    pub fn to_lower(&self) -> Mat2 {
        let x = self.lower();
        Mat2([[x[0] + x[3], x[1] - I * x[2]], [x[1] + I * x[2], x[0] - x[3]]])
    }

    /// Inverse of [`ComplexVector::to_upper`].
    pub fn from_upper(m: &Mat2) -> Self {
        let a = &m.0;
        ComplexVector([
            a[0][0] + a[1][1],
            a[0][1] + a[1][0],
            (a[0][1] - a[1][0]) / I,
            a[0][0] - a[1][1],
        ])
    }

    /// Inverse of [`ComplexVector::to_lower`].
    pub fn from_lower_matrix(m: &Mat2) -> Self {
        let a = &m.0;
        ComplexVector::from_lower([
            (a[0][0] + a[1][1]) * 0.5,
            (a[0][1] + a[1][0]) * 0.5,
            (a[1][0] - a[0][1]) / (2.0 * I),
            (a[0][0] - a[1][1]) * 0.5,
        ])
    }
}

/// 2×2 complex matrix; used for mixed spinors M^{AA'} / M_{AA'} and SL(2,C) maps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[C; 2]; 2]);

impl Mat2 {
    pub fn identity() -> Self {
        Mat2([[ONE, ZERO], [ZERO, ONE]])
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &o.0;
        Mat2(std::array::from_fn(|i| std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j])))
    }

    pub fn adjoint(&self) -> Mat2 {
        let a = &self.0;
        Mat2([[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]])
    }

    pub fn det(&self) -> C {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn apply(&self, s: [C; 2]) -> [C; 2] {
        let a = &self.0;
        [a[0][0] * s[0] + a[0][1] * s[1], a[1][0] * s[0] + a[1][1] * s[1]]
    }

    pub fn scale(&self, k: C) -> Mat2 {
        Mat2(self.0.map(|r| r.map(|z| z * k)))
    }

    pub fn add(&self, o: &Mat2) -> Mat2 {
        Mat2(std::array::from_fn(|i| std::array::from_fn(|j| self.0[i][j] + o.0[i][j])))
    }

    /// Contracts the primed index of a mixed spinor with a lower primed spinor:
    /// (M^{AA'} ω_{A'})^A.
    pub fn contract_primed(&self, w: &CoSpinor) -> Spinor {
        Spinor(self.apply(w.0))
    }

    /// (M_{AA'} ω̄^{A'})_A for a mixed spinor with both indices down.
    pub fn contract_primed_upper(&self, w: [C; 2]) -> CoSpinor {
        CoSpinor(self.apply(w))
    }
}

/// Spinor with an upper index, ξ^A.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spinor(pub [C; 2]);

/// Spinor with a lower index, ξ_A.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoSpinor(pub [C; 2]);

impl Spinor {
    pub fn new(a: C, b: C) -> Self {
        Spinor([a, b])
    }

    pub fn zero() -> Self {
        Spinor([ZERO; 2])
    }

    /// ξ_B = ξ^A ε_{AB}.
    pub fn lower(&self) -> CoSpinor {
        CoSpinor([-EPS01 * self.0[1], EPS01 * self.0[0]])
    }

    /// Componentwise complex conjugate (a primed spinor with the same component values).
    pub fn conj(&self) -> Spinor {
        Spinor([self.0[0].conj(), self.0[1].conj()])
    }

    pub fn scale(&self, k: C) -> Spinor {
        Spinor([self.0[0] * k, self.0[1] * k])
    }

    pub fn add(&self, o: &Spinor) -> Spinor {
        Spinor([self.0[0] + o.0[0], self.0[1] + o.0[1]])
    }

    pub fn norm(&self) -> f64 {
        (self.0[0].norm_sqr() + self.0[1].norm_sqr()).sqrt()
    }

    /// Components (a, b) in ξ = a·o + b·ι for a normalized dyad.
    pub fn dyad_components(&self, o: &Spinor, iota: &Spinor) -> (C, C) {
        (inner(self, iota), inner(o, self))
    }
}

impl CoSpinor {
    pub fn zero() -> Self {
        CoSpinor([ZERO; 2])
    }

    /// ξ^A = ε^{AB} ξ_B with ε^{01} = 1/√2.
    pub fn raise(&self) -> Spinor {
        Spinor([self.0[1] / EPS01, -self.0[0] / EPS01])
    }

    /// Contraction ξ_A η^A.
    pub fn contract(&self, s: &Spinor) -> C {
        self.0[0] * s.0[0] + self.0[1] * s.0[1]
    }

    pub fn scale(&self, k: C) -> CoSpinor {
        CoSpinor([self.0[0] * k, self.0[1] * k])
    }

    pub fn add(&self, o: &CoSpinor) -> CoSpinor {
        CoSpinor([self.0[0] + o.0[0], self.0[1] + o.0[1]])
    }

    pub fn sub(&self, o: &CoSpinor) -> CoSpinor {
        CoSpinor([self.0[0] - o.0[0], self.0[1] - o.0[1]])
    }

    pub fn conj(&self) -> CoSpinor {
        CoSpinor([self.0[0].conj(), self.0[1].conj()])
    }

    pub fn max_abs(&self) -> f64 {
        self.0[0].norm().max(self.0[1].norm())
    }
}

/// Antisymmetric contraction ⟨a,b⟩ = a_A b^A.
pub fn inner(a: &Spinor, b: &Spinor) -> C {
    EPS01 * (a.0[0] * b.0[1] - a.0[1] * b.0[0])
}

/// Outer product a^A b̄^{A'} as a mixed spinor.
pub fn outer_conj(a: &Spinor, b: &Spinor) -> Mat2 {
    Mat2(std::array::from_fn(|i| std::array::from_fn(|j| a.0[i] * b.0[j].conj())))
}

/// l^a = o^A ō^{A'}.
pub fn null_vector_of(o: &Spinor) -> FourVector {
    ComplexVector::from_upper(&outer_conj(o, o)).re()
}

/// t^{AA'} ō_{A'}: the unprimed spinor obtained by contracting a real vector with ō.
pub fn vector_on_conj(v: &FourVector, o: &Spinor) -> Spinor {
    v.to_upper().contract_primed(&o.conj().lower())
}

/// Null tetrad built from a spinor and a unit timelike vector.
#[derive(Clone, Copy, Debug)]
pub struct Tetrad {
    pub o: Spinor,
    pub iota: Spinor,
    pub l: FourVector,
    pub n: FourVector,
    pub m: ComplexVector,
}

/// ι^A = t^{AA'} ō_{A'} / (t·l) together with l = oō, n = ιῑ, m = oῑ.
pub fn tetrad_from(o: &Spinor, t: &FourVector) -> Result<Tetrad> {
    if !t.is_unit_timelike(1e-10) {
        return Err(Error::invalid("tetrad_from", format!("t = {:?} is not unit timelike", t.0)));
    }
    if o.norm() == 0.0 {
        return Err(Error::invalid("tetrad_from", "zero spinor"));
    }
    let l = null_vector_of(o);
    let tl = t.dot(&l);
    let iota = vector_on_conj(t, o).scale(C::new(1.0 / tl, 0.0));
    let n = null_vector_of(&iota);
    let m = ComplexVector::from_upper(&outer_conj(o, &iota));
    Ok(Tetrad { o: *o, iota, l, n, m })
}

/// Element of SL(2,C) acting on spinors and, through S V S†, on vectors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lorentz(pub Mat2);

impl Lorentz {
    pub fn identity() -> Self {
        Lorentz(Mat2::identity())
    }

    /// Pure boost taking (1,0,0,0) to the unit timelike `t`.
    pub fn boost_to(t: &FourVector) -> Result<Self> {
        if !t.is_unit_timelike(1e-10) {
            return Err(Error::invalid("boost_to", format!("t = {:?} is not unit timelike", t.0)));
        }
        let m = t.to_upper().scale(C::new(2.0, 0.0));
        let tr = m.0[0][0] + m.0[1][1];
        let k = (tr + 2.0).sqrt();
        Ok(Lorentz(m.add(&Mat2::identity()).scale(1.0 / k)))
    }

    /// Rotation by `angle` about the unit spatial axis `n` (acts on vectors as a proper rotation).
    pub fn rotation(axis: [f64; 3], angle: f64) -> Self {
        let nn = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        let (x, y, z) = (axis[0] / nn, axis[1] / nn, axis[2] / nn);
        let (s, co) = (0.5 * angle).sin_cos();
        Lorentz(Mat2([
            [C::new(co, s * z), C::new(-s * y, s * x)],
            [C::new(s * y, s * x), C::new(co, -s * z)],
        ]))
    }

    pub fn compose(&self, o: &Lorentz) -> Lorentz {
        Lorentz(self.0.mul(&o.0))
    }

    pub fn inverse(&self) -> Lorentz {
        let a = &self.0 .0;
        let d = self.0.det();
        Lorentz(Mat2([[a[1][1] / d, -a[0][1] / d], [-a[1][0] / d, a[0][0] / d]]))
    }

    pub fn spinor(&self, s: &Spinor) -> Spinor {
        Spinor(self.0.apply(s.0))
    }

    pub fn vector(&self, v: &FourVector) -> FourVector {
        let m = self.0.mul(&v.to_upper()).mul(&self.0.adjoint());
        ComplexVector::from_upper(&m).re()
    }

    pub fn cvector(&self, v: &ComplexVector) -> ComplexVector {
        let m = self.0.mul(&v.to_upper()).mul(&self.0.adjoint());
        ComplexVector::from_upper(&m)
    }

    /// Lower-index spinors transform with the inverse transpose.
    pub fn cospinor(&self, s: &CoSpinor) -> CoSpinor {
        self.spinor(&s.raise()).lower()
    }

    /// Λ^a_b as a real matrix acting on contravariant components.
    pub fn matrix(&self) -> [[f64; 4]; 4] {
        let mut out = [[0.0; 4]; 4];
        for b in 0..4 {
            let mut e = [0.0; 4];
            e[b] = 1.0;
            let col = self.vector(&FourVector(e));
            for a in 0..4 {
                out[a][b] = col.0[a];
            }
        }
        out
    }

    /// Transforms a covariant antisymmetric tensor F_ab.
    pub fn tensor(&self, f: &Tensor) -> Tensor {
        let inv = self.inverse().matrix();
        // F'_{ab} = F_{cd} (Λ^{-1})^c_a (Λ^{-1})^d_b
        let mut out = [[0.0; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                let mut s = 0.0;
                for cc in 0..4 {
                    for d in 0..4 {
                        s += f.0[cc][d] * inv[cc][a] * inv[d][b];
                    }
                }
                out[a][b] = s;
            }
        }
        Tensor(out)
    }
}

/// Real antisymmetric covariant tensor F_ab.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tensor(pub [[f64; 4]; 4]);

impl Tensor {
    pub fn zero() -> Self {
        Tensor([[0.0; 4]; 4])
    }

    /// a_a b_b − a_b b_a for contravariant inputs.
    pub fn wedge(a: &FourVector, b: &FourVector) -> Self {
        let x = a.lower();
        let y = b.lower();
        Tensor(std::array::from_fn(|i| std::array::from_fn(|j| x[i] * y[j] - x[j] * y[i])))
    }

    pub fn sub(&self, o: &Tensor) -> Tensor {
        Tensor(std::array::from_fn(|i| std::array::from_fn(|j| self.0[i][j] - o.0[i][j])))
    }

    pub fn add(&self, o: &Tensor) -> Tensor {
        Tensor(std::array::from_fn(|i| std::array::from_fn(|j| self.0[i][j] + o.0[i][j])))
    }

    pub fn scale(&self, k: f64) -> Tensor {
        Tensor(self.0.map(|r| r.map(|x| x * k)))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// F_{ab} v^b for contravariant v, returned with a lower index.
    pub fn contract(&self, v: &FourVector) -> [f64; 4] {
        std::array::from_fn(|a| (0..4).map(|b| self.0[a][b] * v.0[b]).sum())
    }

    /// Electric field E^i = F_{ab} t^a e_i^b in the standard frame.
    pub fn electric(&self) -> [f64; 3] {
        [self.0[0][1], self.0[0][2], self.0[0][3]]
    }

    /// Magnetic field with F_{ij} = −ε_{ijk} B^k in the standard frame.
    pub fn magnetic(&self) -> [f64; 3] {
        [-self.0[2][3], -self.0[3][1], -self.0[1][2]]
    }
}

/// Symmetric spinor φ_AB stored as its three independent components (φ₀₀, φ₀₁, φ₁₁).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymSpinor(pub [C; 3]);

impl SymSpinor {
    pub fn zero() -> Self {
        SymSpinor([ZERO; 3])
    }

    pub fn get(&self, a: usize, b: usize) -> C {
        match (a, b) {
            (0, 0) => self.0[0],
            (1, 1) => self.0[2],
            _ => self.0[1],
        }
    }

    /// Symmetrized product α_(A β_B).
    pub fn sym(a: &CoSpinor, b: &CoSpinor) -> Self {
        SymSpinor([a.0[0] * b.0[0], (a.0[0] * b.0[1] + a.0[1] * b.0[0]) * 0.5, a.0[1] * b.0[1]])
    }

    pub fn scale(&self, k: C) -> Self {
        SymSpinor(self.0.map(|z| z * k))
    }

    pub fn add(&self, o: &SymSpinor) -> Self {
        SymSpinor(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }

    pub fn sub(&self, o: &SymSpinor) -> Self {
        SymSpinor(std::array::from_fn(|i| self.0[i] - o.0[i]))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Real tensor F_ab = φ_AB ε_{A'B'} + φ̄_{A'B'} ε_AB.
    pub fn to_tensor(&self) -> Tensor {
        let full = self.to_mixed_tensor();
        Tensor(full.map(|r| r.map(|z| z.re)))
    }

    /// Complex tensor φ_AB ε_{A'B'} + φ̄_{A'B'} ε_AB before taking the (vanishing) imaginary part.
    pub fn to_mixed_tensor(&self) -> [[C; 4]; 4] {
        let eps = [[0.0, EPS01], [-EPS01, 0.0]];
        let mut big = [[[[ZERO; 2]; 2]; 2]; 2]; // [A][A'][B][B']
        for a in 0..2 {
            for ap in 0..2 {
                for b in 0..2 {
                    for bp in 0..2 {
                        big[a][ap][b][bp] =
                            self.get(a, b) * eps[ap][bp] + self.get(ap, bp).conj() * eps[a][b];
                    }
                }
            }
        }
        let tau = vector_extractors();
        let mut out = [[ZERO; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                let mut s = ZERO;
                for a in 0..2 {
                    for ap in 0..2 {
                        for b in 0..2 {
                            for bp in 0..2 {
                                s += big[a][ap][b][bp] * tau[i][a][ap] * tau[j][b][bp];
                            }
                        }
                    }
                }
                out[i][j] = s;
            }
        }
        out
    }

    /// φ_AB = ½ F_{AA'BB'} ε^{A'B'}.
    pub fn from_tensor(f: &Tensor) -> Self {
        let sig = vector_builders();
        let eps_up = [[0.0, 1.0 / EPS01], [-1.0 / EPS01, 0.0]];
        let mut phi = [[ZERO; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                let mut s = ZERO;
                for i in 0..4 {
                    for j in 0..4 {
                        if f.0[i][j] == 0.0 {
                            continue;
                        }
                        for ap in 0..2 {
                            for bp in 0..2 {
                                s += sig[i][a][ap] * sig[j][b][bp] * (f.0[i][j] * eps_up[ap][bp]);
                            }
                        }
                    }
                }
                phi[a][b] = s * 0.5;
            }
        }
        SymSpinor([phi[0][0], (phi[0][1] + phi[1][0]) * 0.5, phi[1][1]])
    }
}

/// σ^a_{AA'}: X_{AA'} = Σ_a x_a σ^a_{AA'}.
fn vector_builders() -> [[[C; 2]; 2]; 4] {
    [
        [[ONE, ZERO], [ZERO, ONE]],
        [[ZERO, ONE], [ONE, ZERO]],
        [[ZERO, -I], [I, ZERO]],
        [[ONE, ZERO], [ZERO, -ONE]],
    ]
}

/// τ_a^{AA'}: x_a = Σ X_{AA'} τ_a^{AA'}.
fn vector_extractors() -> [[[C; 2]; 2]; 4] {
    let h = C::new(0.5, 0.0);
    [
        [[h, ZERO], [ZERO, h]],
        [[ZERO, h], [h, ZERO]],
        [[ZERO, I * 0.5], [-I * 0.5, ZERO]],
        [[h, ZERO], [ZERO, -h]],
    ]
}

/// Hodge dual defined through the spinor correspondence: *F ↔ −iφ_AB.
pub fn dual(f: &Tensor) -> Tensor {
    SymSpinor::from_tensor(f).scale(-I).to_tensor()
}

// ---------------------------------------------------------------------------------------------
// Dirac algebra in the standard representation (γ⁰ diagonal).

/// Four-component Dirac spinor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiracSpinor(pub [C; 4]);

/// 4×4 complex matrix acting on Dirac spinors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiracOperator(pub [[C; 4]; 4]);

impl DiracSpinor {
    pub fn zero() -> Self {
        DiracSpinor([ZERO; 4])
    }

    pub fn scale(&self, k: C) -> Self {
        DiracSpinor(self.0.map(|z| z * k))
    }

    pub fn add(&self, o: &DiracSpinor) -> Self {
        DiracSpinor(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }

    pub fn sub(&self, o: &DiracSpinor) -> Self {
        DiracSpinor(std::array::from_fn(|i| self.0[i] - o.0[i]))
    }

    /// Hermitian product a†b.
    pub fn herm(&self, b: &DiracSpinor) -> C {
        (0..4).map(|i| self.0[i].conj() * b.0[i]).sum()
    }

    /// Dirac-adjoint product ā b = a†γ⁰b.
    pub fn bar_dot(&self, b: &DiracSpinor) -> C {
        self.0[0].conj() * b.0[0] + self.0[1].conj() * b.0[1]
            - self.0[2].conj() * b.0[2]
            - self.0[3].conj() * b.0[3]
    }

    pub fn norm(&self) -> f64 {
        self.herm(self).re.sqrt()
    }
}

impl DiracOperator {
    pub fn identity() -> Self {
        DiracOperator(std::array::from_fn(|i| std::array::from_fn(|j| if i == j { ONE } else { ZERO })))
    }

    pub fn zero() -> Self {
        DiracOperator([[ZERO; 4]; 4])
    }

    pub fn mul(&self, o: &DiracOperator) -> Self {
        DiracOperator(std::array::from_fn(|i| {
            std::array::from_fn(|j| (0..4).map(|k| self.0[i][k] * o.0[k][j]).sum())
        }))
    }

    pub fn apply(&self, s: &DiracSpinor) -> DiracSpinor {
        DiracSpinor(std::array::from_fn(|i| (0..4).map(|k| self.0[i][k] * s.0[k]).sum()))
    }

    pub fn add(&self, o: &DiracOperator) -> Self {
        DiracOperator(std::array::from_fn(|i| std::array::from_fn(|j| self.0[i][j] + o.0[i][j])))
    }

    pub fn sub(&self, o: &DiracOperator) -> Self {
        DiracOperator(std::array::from_fn(|i| std::array::from_fn(|j| self.0[i][j] - o.0[i][j])))
    }

    pub fn scale(&self, k: C) -> Self {
        DiracOperator(self.0.map(|r| r.map(|z| z * k)))
    }

    pub fn trace(&self) -> C {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |m, z| m.max(z.norm()))
    }
}

/// γ^a with an upper index, standard representation.
pub fn gamma_upper(a: usize) -> DiracOperator {
    let mut g = DiracOperator::zero();
    match a {
        0 => {
            g.0[0][0] = ONE;
            g.0[1][1] = ONE;
            g.0[2][2] = -ONE;
            g.0[3][3] = -ONE;
        }
        1..=3 => {
            let s = pauli(a);
            for i in 0..2 {
                for j in 0..2 {
                    g.0[i][j + 2] = s[i][j];
                    g.0[i + 2][j] = -s[i][j];
                }
            }
        }
        _ => panic!("gamma index out of range"),
    }
    g
}

/// γ_a with a lower index.
pub fn gamma_lower(a: usize) -> DiracOperator {
    if a == 0 {
        gamma_upper(0)
    } else {
        gamma_upper(a).scale(-ONE)
    }
}

fn pauli(k: usize) -> [[C; 2]; 2] {
    match k {
        1 => [[ZERO, ONE], [ONE, ZERO]],
        2 => [[ZERO, -I], [I, ZERO]],
        3 => [[ONE, ZERO], [ZERO, -ONE]],
        _ => panic!("pauli index out of range"),
    }
}

/// γ·v = γ^a v_a.
pub fn slash(v: &FourVector) -> DiracOperator {
    let x = v.lower();
    (0..4).fold(DiracOperator::zero(), |acc, a| acc.add(&gamma_upper(a).scale(C::new(x[a], 0.0))))
}

/// (γ·v, P₊(v), P₋(v)) for a unit timelike v.
pub fn dirac_algebra(v: &FourVector) -> Result<(DiracOperator, DiracOperator, DiracOperator)> {
    if (v.norm_sqr() - 1.0).abs() > 1e-10 {
        return Err(Error::invalid("dirac_algebra", format!("v·v = {} is not 1", v.norm_sqr())));
    }
    let g = slash(v);
    let id = DiracOperator::identity();
    let half = C::new(0.5, 0.0);
    Ok((g, id.add(&g).scale(half), id.sub(&g).scale(half)))
}

/// Spin matrix (i/4)[γ_a, γ_b].
pub fn spin_matrix(a: usize, b: usize) -> DiracOperator {
    let ga = gamma_lower(a);
    let gb = gamma_lower(b);
    ga.mul(&gb).sub(&gb.mul(&ga)).scale(I * 0.25)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C, b: C, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn anchor_null_vector_of_first_basis_spinor() {
        let l = null_vector_of(&Spinor::new(ONE, ZERO));
        assert_eq!(l, FourVector::new(1.0, 0.0, 0.0, 1.0));
    }

    #[test]
    fn south_pole_of_parametrization() {
        // ξ = √2 ι with ι = (0, 1/√2)
        let l = null_vector_of(&Spinor::new(ZERO, ONE));
        assert!((l - FourVector::new(1.0, 0.0, 0.0, -1.0)).euclid() < 1e-15);
    }

    #[test]
    fn null_vector_scales_with_modulus_squared() {
        let o = Spinor::new(c(0.3, -0.7), c(1.1, 0.2));
        let a = c(2.0, 1.0);
        let l1 = null_vector_of(&o.scale(a));
        let l0 = null_vector_of(&o) * a.norm_sqr();
        assert!((l1 - l0).euclid() < 1e-13);
        assert!(l1.norm_sqr().abs() < 1e-13);
    }

    #[test]
    fn time_component_is_spinor_norm() {
        let o = Spinor::new(c(0.4, 0.1), c(-0.2, 0.9));
        let l = null_vector_of(&o);
        assert!((FourVector::time().dot(&l) - o.norm().powi(2)).abs() < 1e-15);
    }

    #[test]
    fn standard_tetrad() {
        let tet = tetrad_from(&Spinor::new(ONE, ZERO), &FourVector::time()).unwrap();
        assert!(close(tet.iota.0[0], ZERO, 1e-15));
        assert!(close(tet.iota.0[1], c(1.0 / SQRT_2, 0.0), 1e-15));
        let (a, b) = tet.iota.dyad_components(&tet.o, &tet.iota);
        assert!(close(a, ZERO, 1e-15) && close(b, ONE, 1e-15));
        assert!((tet.n - FourVector::new(0.5, 0.0, 0.0, -0.5)).euclid() < 1e-15);
        assert!((tet.l.dot(&tet.n) - 1.0).abs() < 1e-15);
        let t2 = tet.n + tet.l * 0.5;
        assert!((t2 - FourVector::time()).euclid() < 1e-15);
        assert!((tet.m.dot(&tet.m.conj()) + ONE).norm() < 1e-15);
        assert!(tet.m.dot(&tet.m).norm() < 1e-15);
        assert!(tet.m.dot_real(&tet.l).norm() < 1e-15);
        assert!(tet.m.dot_real(&tet.n).norm() < 1e-15);
    }

    #[test]
    fn mixed_spinor_maps_reproduce_the_metric() {
        let v = FourVector::new(1.3, 0.2, -0.5, 0.7);
        let w = FourVector::new(-0.4, 1.1, 0.3, 0.9);
        let up = v.to_upper();
        let low = w.to_lower();
        let mut s = ZERO;
        for a in 0..2 {
            for b in 0..2 {
                s += up.0[a][b] * low.0[a][b];
            }
        }
        assert!(close(s, c(v.dot(&w), 0.0), 1e-14));
        let back = ComplexVector::from_lower_matrix(&low).re();
        assert!((back - w).euclid() < 1e-15);
        let back = ComplexVector::from_upper(&up).re();
        assert!((back - v).euclid() < 1e-15);
    }

    #[test]
    fn lower_raise_round_trip() {
        let s = Spinor::new(c(0.3, 0.2), c(-1.0, 0.5));
        let r = s.lower().raise();
        assert!(close(r.0[0], s.0[0], 1e-15) && close(r.0[1], s.0[1], 1e-15));
        let t = Spinor::new(c(0.1, -0.8), c(0.6, 0.4));
        assert!(close(s.lower().contract(&t), inner(&s, &t), 1e-15));
    }

    #[test]
    fn boost_maps_time_axis() {
        let t = FourVector::boosted(1.3, [0.2, -0.4, 0.9]);
        let b = Lorentz::boost_to(&t).unwrap();
        let img = b.vector(&FourVector::time());
        assert!((img - t).euclid() < 1e-13);
        assert!((b.0.det() - ONE).norm() < 1e-13);
    }

    #[test]
    fn rotation_is_proper() {
        let r = Lorentz::rotation([0.0, 0.0, 1.0], 0.5 * std::f64::consts::PI);
        let x = r.vector(&FourVector::new(0.0, 1.0, 0.0, 0.0));
        assert!((x - FourVector::new(0.0, 0.0, 1.0, 0.0)).euclid() < 1e-14);
        let r = Lorentz::rotation([1.0, 0.0, 0.0], 0.5 * std::f64::consts::PI);
        let y = r.vector(&FourVector::new(0.0, 0.0, 1.0, 0.0));
        assert!((y - FourVector::new(0.0, 0.0, 0.0, 1.0)).euclid() < 1e-14);
        let r = Lorentz::rotation([0.0, 1.0, 0.0], 0.5 * std::f64::consts::PI);
        let z = r.vector(&FourVector::new(0.0, 0.0, 0.0, 1.0));
        assert!((z - FourVector::new(0.0, 1.0, 0.0, 0.0)).euclid() < 1e-14);
    }

    #[test]
    fn tensor_spinor_round_trip() {
        let a = FourVector::new(0.3, 1.2, -0.7, 0.4);
        let b = FourVector::new(-1.1, 0.5, 0.8, 2.0);
        let f = Tensor::wedge(&a, &b).add(&Tensor::wedge(&FourVector::new(0.0, 0.1, 0.0, 0.3), &a));
        let phi = SymSpinor::from_tensor(&f);
        let back = phi.to_tensor();
        assert!(back.sub(&f).max_abs() < 1e-13);
        let mixed = phi.to_mixed_tensor();
        assert!(mixed.iter().flatten().all(|z| z.im.abs() < 1e-13));
    }

    #[test]
    fn double_dual_is_minus_identity() {
        let f = Tensor::wedge(&FourVector::new(0.3, 1.2, -0.7, 0.4), &FourVector::new(-1.1, 0.5, 0.8, 2.0));
        let dd = dual(&dual(&f));
        assert!(dd.add(&f).max_abs() < 1e-13);
    }

    #[test]
    fn dirac_projectors() {
        let (g, pp, pm) = dirac_algebra(&FourVector::time()).unwrap();
        assert!(close(pp.trace(), c(2.0, 0.0), 1e-15));
        let id = DiracOperator::identity();
        assert!(pp.add(&pm).sub(&id).max_abs() < 1e-14);
        assert!(g.mul(&g).sub(&id).max_abs() < 1e-14);
        let v = FourVector::boosted(2.0, [1.0, 2.0, -0.5]);
        let (g, pp, pm) = dirac_algebra(&v).unwrap();
        assert!(g.mul(&g).sub(&id).max_abs() < 1e-12);
        assert!(pp.mul(&pp).sub(&pp).max_abs() < 1e-12);
        assert!(pp.mul(&pm).max_abs() < 1e-12);
        assert!(dirac_algebra(&FourVector::new(2.0, 0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn clifford_relation() {
        let eta = [1.0, -1.0, -1.0, -1.0];
        for a in 0..4 {
            for b in 0..4 {
                let ac = gamma_upper(a).mul(&gamma_upper(b)).add(&gamma_upper(b).mul(&gamma_upper(a)));
                let expect = if a == b { DiracOperator::identity().scale(c(2.0 * eta[a], 0.0)) } else { DiracOperator::zero() };
                assert!(ac.sub(&expect).max_abs() < 1e-15);
            }
        }
    }
}
