use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Horizontal force `(P_x, P_z)` as a `T`-periodic function of slow time.
///
/// All variants are written in the phase `ωs` with `ω = 2π/T`; for
/// `T = 2π` this is plain `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ForcingSpec {
    Zero,
    /// `(A cos ωs, A sin ωs)`: a force of constant magnitude rotating in the
    /// horizontal plane.
    Rotating {
        #[serde(rename = "A")]
        amplitude: f64,
    },
    /// `(A cos(α − α cos ωs), A sin(α − α cos ωs))`: a force of magnitude `A`
    /// whose direction swings between the angles `0` and `2α`.
    #[serde(rename = "oscillating")]
    OscillatingAngle {
        #[serde(rename = "A")]
        amplitude: f64,
        alpha: f64,
    },
    /// Truncated Fourier series. `*_cos[j]` multiplies `cos(j ωs)` (so index 0
    /// is the mean) and `*_sin[j]` multiplies `sin((j + 1) ωs)`.
    #[serde(rename = "fourier")]
    FourierPair {
        px_cos: Vec<f64>,
        px_sin: Vec<f64>,
        pz_cos: Vec<f64>,
        pz_sin: Vec<f64>,
    },
}

impl ForcingSpec {
    pub fn eval(&self, s: f64, omega: f64) -> (f64, f64) {
        let phase = omega * s;
        match self {
            ForcingSpec::Zero => (0.0, 0.0),
            ForcingSpec::Rotating { amplitude } => {
                (amplitude * phase.cos(), amplitude * phase.sin())
            }
            ForcingSpec::OscillatingAngle { amplitude, alpha } => {
                let angle = alpha - alpha * phase.cos();
                (amplitude * angle.cos(), amplitude * angle.sin())
            }
            ForcingSpec::FourierPair {
                px_cos,
                px_sin,
                pz_cos,
                pz_sin,
            } => (
                fourier_sum(px_cos, px_sin, phase),
                fourier_sum(pz_cos, pz_sin, phase),
            ),
        }
    }

    /// Upper bound on `max(|P_x|, |P_z|)`; for the two rotating families this
    /// is the magnitude `A`.
    pub fn magnitude_bound(&self) -> f64 {
        match self {
            ForcingSpec::Zero => 0.0,
            ForcingSpec::Rotating { amplitude }
            | ForcingSpec::OscillatingAngle { amplitude, .. } => amplitude.abs(),
            ForcingSpec::FourierPair {
                px_cos,
                px_sin,
                pz_cos,
                pz_sin,
            } => {
                let l1 = |c: &[f64], s: &[f64]| c.iter().chain(s).map(|v| v.abs()).sum::<f64>();
                l1(px_cos, px_sin).max(l1(pz_cos, pz_sin))
            }
        }
    }

    /// Force amplitude, if the variant has a single one.
    pub fn amplitude(&self) -> Option<f64> {
        match self {
            ForcingSpec::Zero => Some(0.0),
            ForcingSpec::Rotating { amplitude }
            | ForcingSpec::OscillatingAngle { amplitude, .. } => Some(*amplitude),
            ForcingSpec::FourierPair { .. } => None,
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match self {
            ForcingSpec::OscillatingAngle { alpha, .. } => Some(*alpha),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: &f64| v.is_finite();
        let ok = match self {
            ForcingSpec::Zero => true,
            ForcingSpec::Rotating { amplitude } => amplitude.is_finite(),
            ForcingSpec::OscillatingAngle { amplitude, alpha } => {
                amplitude.is_finite() && alpha.is_finite()
            }
            ForcingSpec::FourierPair {
                px_cos,
                px_sin,
                pz_cos,
                pz_sin,
            } => [px_cos, px_sin, pz_cos, pz_sin]
                .iter()
                .all(|c| c.iter().all(finite)),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("forcing", "coefficients must be finite"))
        }
    }
}

fn fourier_sum(cos: &[f64], sin: &[f64], phase: f64) -> f64 {
    let c: f64 = cos
        .iter()
        .enumerate()
        .map(|(j, a)| a * (j as f64 * phase).cos())
        .sum();
    let s: f64 = sin
        .iter()
        .enumerate()
        .map(|(j, b)| b * ((j + 1) as f64 * phase).sin())
        .sum();
    c + s
}

/// Free-function form of [`ForcingSpec::eval`].
pub fn forcing_eval(s: f64, spec: &ForcingSpec, omega: f64) -> (f64, f64) {
    spec.eval(s, omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rotating_at_zero() {
        let f = ForcingSpec::Rotating { amplitude: 6.0 };
        assert_eq!(f.eval(0.0, 1.0), (6.0, 0.0));
    }

    #[test]
    fn zero_forcing() {
        for s in [0.0, 1.0, -3.5, 100.0] {
            assert_eq!(forcing_eval(s, &ForcingSpec::Zero, 1.0), (0.0, 0.0));
        }
    }

    #[test]
    fn oscillating_at_zero() {
        let f = ForcingSpec::OscillatingAngle {
            amplitude: 1.5,
            alpha: PI,
        };
        let (px, pz) = f.eval(0.0, 1.0);
        assert_eq!(px, 1.5);
        assert!(pz.abs() < 1e-15);
    }

    #[test]
    fn families_have_constant_magnitude_and_period() {
        let omega = 2.0 * PI / 3.0;
        for f in [
            ForcingSpec::Rotating { amplitude: 6.0 },
            ForcingSpec::OscillatingAngle {
                amplitude: 1.5,
                alpha: PI / 2.0,
            },
        ] {
            for i in 0..50 {
                let s = 0.13 * i as f64;
                let (px, pz) = f.eval(s, omega);
                assert!((px.hypot(pz) - f.magnitude_bound()).abs() < 1e-12);
                let (qx, qz) = f.eval(s + 3.0, omega);
                assert!((px - qx).abs() < 1e-12 && (pz - qz).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fourier_pair_reproduces_rotating() {
        let f = ForcingSpec::FourierPair {
            px_cos: vec![0.0, 2.0],
            px_sin: vec![],
            pz_cos: vec![],
            pz_sin: vec![2.0],
        };
        let r = ForcingSpec::Rotating { amplitude: 2.0 };
        for i in 0..20 {
            let s = 0.3 * i as f64;
            let (a, b) = f.eval(s, 1.0);
            let (c, d) = r.eval(s, 1.0);
            assert!((a - c).abs() < 1e-14 && (b - d).abs() < 1e-14);
        }
        assert_eq!(f.magnitude_bound(), 2.0);
    }
}
