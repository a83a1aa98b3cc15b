//! Piecewise-hyperbolic timelike worldlines.
//!
//! A worldline is inertial before its first knot and after its last one. Between knots it
//! moves with constant proper acceleration in the plane of the two adjacent velocities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spinors::FourVector;

#[derive(Clone, Copy, Debug)]
struct Segment {
    tau0: f64,
    tau1: f64,
    z0: FourVector,
    va: FourVector,
    e: FourVector,
    alpha: f64,
}

impl Segment {
    fn state(&self, tau: f64) -> (FourVector, FourVector, FourVector) {
        let s = tau - self.tau0;
        if self.alpha == 0.0 {
            return (self.z0 + self.va * s, self.va, FourVector([0.0; 4]));
        }
        let (sh, ch) = ((self.alpha * s).sinh(), (self.alpha * s).cosh());
        let z = self.z0 + (self.va * sh + self.e * (ch - 1.0)) * (1.0 / self.alpha);
        let v = self.va * ch + self.e * sh;
        let a = (self.va * sh + self.e * ch) * self.alpha;
        (z, v, a)
    }
}

/// Timelike worldline z(τ) parametrized by proper time.
#[derive(Clone, Debug)]
pub struct Worldline {
    v_in: FourVector,
    v_out: FourVector,
    start: FourVector,
    end: FourVector,
    tau_end: f64,
    segments: Vec<Segment>,
}

/// Serializable description: position at τ = 0, successive velocities and the proper time
/// spent turning between each consecutive pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorldlineSpec {
    pub anchor: [f64; 4],
    pub velocities: Vec<[f64; 4]>,
    #[serde(default)]
    pub durations: Vec<f64>,
}

impl Worldline {
    /// Straight worldline through `anchor` at τ = 0.
    pub fn inertial(anchor: FourVector, v: FourVector) -> Result<Self> {
        Worldline::new(anchor, &[v], &[])
    }

    /// Worldline passing `anchor` at τ = 0 and turning from `velocities[k]` to
    /// `velocities[k+1]` during `durations[k]` of proper time.
    pub fn new(anchor: FourVector, velocities: &[FourVector], durations: &[f64]) -> Result<Self> {
        if velocities.is_empty() || durations.len() + 1 != velocities.len() {
            return Err(Error::invalid("worldline", "need n velocities and n-1 durations"));
        }
        for v in velocities {
            if !v.is_unit_timelike(1e-10) {
                return Err(Error::invalid("worldline", format!("velocity {:?} is not unit timelike", v.0)));
            }
        }
        let mut segments = Vec::with_capacity(durations.len());
        let mut z = anchor;
        let mut tau = 0.0;
        for (k, &d) in durations.iter().enumerate() {
            if !(d > 0.0) {
                return Err(Error::invalid("worldline", "durations must be positive"));
            }
            let (va, vb) = (velocities[k], velocities[k + 1]);
            let ch = va.dot(&vb).max(1.0);
            let theta = ch.acosh();
            let seg = if theta < 1e-14 {
                Segment { tau0: tau, tau1: tau + d, z0: z, va, e: FourVector([0.0; 4]), alpha: 0.0 }
            } else {
                let e = (vb - va * ch) * (1.0 / theta.sinh());
                Segment { tau0: tau, tau1: tau + d, z0: z, va, e, alpha: theta / d }
            };
            z = seg.state(tau + d).0;
            tau += d;
            segments.push(seg);
        }
        Ok(Worldline {
            v_in: velocities[0],
            v_out: *velocities.last().expect("nonempty"),
            start: anchor,
            end: z,
            tau_end: tau,
            segments,
        })
    }

    pub fn from_spec(spec: &WorldlineSpec) -> Result<Self> {
        let vs: Vec<FourVector> = spec.velocities.iter().map(|v| FourVector(*v)).collect();
        Worldline::new(FourVector(spec.anchor), &vs, &spec.durations)
    }

    pub fn velocity_in(&self) -> FourVector {
        self.v_in
    }

    pub fn velocity_out(&self) -> FourVector {
        self.v_out
    }

    /// Events where the worldline starts and stops accelerating.
    pub fn knots(&self) -> (FourVector, FourVector) {
        (self.start, self.end)
    }

    /// Events where the acceleration changes: both knots and every junction in between.
    pub fn corners(&self) -> Vec<FourVector> {
        let mut out = vec![self.start];
        out.extend(self.segments.iter().map(|s| s.state(s.tau1).0));
        out
    }

    pub fn is_inertial(&self) -> bool {
        self.segments.iter().all(|s| s.alpha == 0.0)
    }

    /// Position, velocity and acceleration at proper time τ.
    pub fn state(&self, tau: f64) -> (FourVector, FourVector, FourVector) {
        let zero = FourVector([0.0; 4]);
        if tau <= 0.0 {
            return (self.start + self.v_in * tau, self.v_in, zero);
        }
        if tau >= self.tau_end {
            return (self.end + self.v_out * (tau - self.tau_end), self.v_out, zero);
        }
        let seg = self
            .segments
            .iter()
            .find(|s| tau <= s.tau1)
            .unwrap_or_else(|| self.segments.last().expect("inside a segment"));
        seg.state(tau)
    }

    /// Proper time τ at which l·z(τ) = s, for a future null (or timelike) l.
    pub fn retarded_time(&self, l: &FourVector, s: f64) -> Result<f64> {
        let lv_in = l.dot(&self.v_in);
        let lv_out = l.dot(&self.v_out);
        if !(lv_in > 0.0 && lv_out > 0.0) {
            return Err(Error::convergence("retarded_time", "l·z(τ) is not increasing; l is not future-directed"));
        }
        let s_start = l.dot(&self.start);
        if s <= s_start {
            return Ok((s - s_start) / lv_in);
        }
        let s_end = l.dot(&self.end);
        if s >= s_end {
            return Ok(self.tau_end + (s - s_end) / lv_out);
        }
        for seg in &self.segments {
            let hi = l.dot(&seg.state(seg.tau1).0);
            if s > hi {
                continue;
            }
            return solve_monotone(|tau| {
                let (z, v, _) = seg.state(tau);
                (l.dot(&z) - s, l.dot(&v))
            }, seg.tau0, seg.tau1);
        }
        Err(Error::convergence("retarded_time", "l·z(τ) is not monotone along the worldline"))
    }
}

/// Newton iteration safeguarded by bisection for an increasing function on [a, b].
fn solve_monotone<F: Fn(f64) -> (f64, f64)>(f: F, mut a: f64, mut b: f64) -> Result<f64> {
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx > 0.0 {
            b = x;
        } else {
            a = x;
        }
        if dfx <= 0.0 {
            return Err(Error::convergence("retarded_time", "derivative of l·z(τ) is not positive"));
        }
        let mut next = x - fx / dfx;
        if !(next > a && next < b) {
            next = 0.5 * (a + b);
        }
        if (next - x).abs() <= 1e-15 * (1.0 + x.abs()) || (b - a) <= 1e-15 * (1.0 + x.abs()) {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::convergence("retarded_time", "root solve did not converge"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kink_connects_velocities_smoothly() {
        let v1 = FourVector::time();
        let v2 = FourVector::boosted(1.0, [1.0, 0.0, 0.0]);
        let w = Worldline::new(FourVector([0.0; 4]), &[v1, v2], &[2.0]).unwrap();
        let (_, v, a) = w.state(1.0);
        assert!((v.norm_sqr() - 1.0).abs() < 1e-13);
        assert!(v.dot(&a).abs() < 1e-13);
        assert!((w.state(2.0).1 - v2).euclid() < 1e-13);
        // continuity of z across the end knot
        let (z1, _, _) = w.state(2.0 - 1e-9);
        let (z2, _, _) = w.state(2.0 + 1e-9);
        assert!((z1 - z2).euclid() < 1e-8);
    }

    #[test]
    fn retarded_time_solves_light_cone_condition() {
        let v1 = FourVector::boosted(0.5, [0.0, 1.0, 0.0]);
        let v2 = FourVector::boosted(1.5, [1.0, 0.0, 0.3]);
        let w = Worldline::new(FourVector::new(0.3, 0.1, 0.0, -0.2), &[v1, v2], &[1.5]).unwrap();
        let l = FourVector::new(1.0, 0.6, 0.0, 0.8);
        for s in [-5.0, -0.2, 0.1, 0.4, 0.9, 3.0] {
            let tau = w.retarded_time(&l, s).unwrap();
            assert!((l.dot(&w.state(tau).0) - s).abs() < 1e-12);
        }
    }
}
