//! One-dimensional pulse shapes g(s) with closed-form derivatives up to third order.

use serde::{Deserialize, Serialize};

/// Shape of a news or profile function along s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum PulseShape {
    /// A e^{−u²}, u = (s − center)/width.
    Gaussian { amplitude: f64, center: f64, width: f64 },
    /// −2A u e^{−u²}: the width-scaled derivative of a Gaussian; no net area.
    GaussianDerivative { amplitude: f64, center: f64, width: f64 },
    /// (A/2)(1 − tanh u): goes from A at s → −∞ to 0 at s → +∞.
    Step { amplitude: f64, center: f64, width: f64 },
}

impl PulseShape {
    pub fn gaussian(amplitude: f64, center: f64, width: f64) -> Self {
        PulseShape::Gaussian { amplitude, center, width }
    }

    fn params(&self) -> (f64, f64, f64) {
        match *self {
            PulseShape::Gaussian { amplitude, center, width }
            | PulseShape::GaussianDerivative { amplitude, center, width }
            | PulseShape::Step { amplitude, center, width } => (amplitude, center, width),
        }
    }

    /// (center, width)
    pub fn scale(&self) -> (f64, f64) {
        let (_, c, w) = self.params();
        (c, w)
    }

    /// Same shape moved by `ds` along s.
    pub fn shifted(&self, ds: f64) -> Self {
        match *self {
            PulseShape::Gaussian { amplitude, center, width } => {
                PulseShape::Gaussian { amplitude, center: center + ds, width }
            }
            PulseShape::GaussianDerivative { amplitude, center, width } => {
                PulseShape::GaussianDerivative { amplitude, center: center + ds, width }
            }
            PulseShape::Step { amplitude, center, width } => PulseShape::Step { amplitude, center: center + ds, width },
        }
    }

    /// Interval outside which g′ is below 1e−16 relative to its peak.
    pub fn support(&self) -> (f64, f64) {
        let (_, c, w) = self.params();
        let r = match self {
            PulseShape::Step { .. } => 20.0,
            _ => 7.0,
        };
        (c - r * w, c + r * w)
    }

    /// [g, g′, g″, g‴] at s.
    pub fn derivatives(&self, s: f64) -> [f64; 4] {
        let (a, c, w) = self.params();
        let u = (s - c) / w;
        let (w1, w2, w3) = (1.0 / w, 1.0 / (w * w), 1.0 / (w * w * w));
        match self {
            PulseShape::Gaussian { .. } => {
                let e = a * (-u * u).exp();
                [e, -2.0 * u * e * w1, (4.0 * u * u - 2.0) * e * w2, (12.0 * u - 8.0 * u * u * u) * e * w3]
            }
            PulseShape::GaussianDerivative { .. } => {
                let e = a * (-u * u).exp();
                let u2 = u * u;
                [
                    -2.0 * u * e,
                    (4.0 * u2 - 2.0) * e * w1,
                    (12.0 * u - 8.0 * u2 * u) * e * w2,
                    (16.0 * u2 * u2 - 48.0 * u2 + 12.0) * e * w3,
                ]
            }
            PulseShape::Step { .. } => {
                let th = u.tanh();
                let sech2 = 1.0 - th * th;
                [
                    0.5 * a * (1.0 - th),
                    -0.5 * a * sech2 * w1,
                    a * sech2 * th * w2,
                    a * (sech2 * sech2 - 2.0 * sech2 * th * th) * w3,
                ]
            }
        }
    }

    pub fn value(&self, s: f64) -> f64 {
        self.derivatives(s)[0]
    }

    /// (g(−∞), g(+∞))
    pub fn limits(&self) -> (f64, f64) {
        match *self {
            PulseShape::Step { amplitude, .. } => (amplitude, 0.0),
            _ => (0.0, 0.0),
        }
    }

    /// ∫ g′(s)² ds in closed form.
    pub fn rate_energy(&self) -> f64 {
        let (a, _, w) = self.params();
        match self {
            // ∫ 4u² e^{−2u²} du / w = √(π/2) / w
            PulseShape::Gaussian { .. } => a * a * (std::f64::consts::PI / 2.0).sqrt() / w,
            // ∫ (4u²−2)² e^{−2u²} du / w = 3√(π/2)/w
            PulseShape::GaussianDerivative { .. } => 3.0 * a * a * (std::f64::consts::PI / 2.0).sqrt() / w,
            // ∫ sech⁴u du / (4w) = (4/3)/(4w)
            PulseShape::Step { .. } => a * a / (3.0 * w),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_derivatives(p: PulseShape) {
        let h = 1e-4;
        for s in [-1.3, -0.2, 0.0, 0.45, 1.7] {
            let d = p.derivatives(s);
            let dp = p.derivatives(s + h);
            let dm = p.derivatives(s - h);
            for k in 0..3 {
                let fd = (dp[k] - dm[k]) / (2.0 * h);
                assert!((fd - d[k + 1]).abs() < 1e-6, "{p:?} order {k} at {s}: {fd} vs {}", d[k + 1]);
            }
        }
    }

    #[test]
    fn derivatives_are_consistent() {
        check_derivatives(PulseShape::Gaussian { amplitude: 1.3, center: 0.2, width: 0.7 });
        check_derivatives(PulseShape::GaussianDerivative { amplitude: 0.8, center: -0.1, width: 1.2 });
        check_derivatives(PulseShape::Step { amplitude: 2.0, center: 0.3, width: 0.5 });
    }

    #[test]
    fn rate_energy_matches_quadrature() {
        for p in [
            PulseShape::Gaussian { amplitude: 1.3, center: 0.2, width: 0.7 },
            PulseShape::GaussianDerivative { amplitude: 0.8, center: -0.1, width: 1.2 },
            PulseShape::Step { amplitude: 2.0, center: 0.3, width: 0.5 },
        ] {
            let (v, _) = crate::quadrature::adaptive(&|s: f64| p.derivatives(s)[1].powi(2), -40.0, 40.0, 1e-14, 40);
            assert!((v - p.rate_energy()).abs() < 1e-10, "{p:?}");
        }
    }
}
