//! Equations of motion of the inverted spherical pendulum on a vertically
//! vibrating pivot with a horizontal periodic force and viscous friction.
//!
//! Coordinates follow the chart `x = cos θ cos φ`, `y = h(t) + cos θ sin φ`,
//! `z = sin θ` with gravity along `-y`, so the rod is above the horizon when
//! `cos θ sin φ > 0`. Mass, gravity and radius are normalized to one.
//!
//! Three vector fields are provided:
//!
//! * the full system ([`rhs_full`]),
//! * the modified system ([`rhs_modified`]), where the terms linear in the
//!   pivot velocity are switched off near the boundary of the block
//!   `{cos θ sin φ ≥ δ, E ≤ c²}` by the cutoff `χ = σ_δ ρ_c`,
//! * the averaged system ([`rhs_averaged`]), where `ḣ` is replaced by its mean
//!   (zero) and `ḣ²` by its mean `a²ω²/2`.

mod bump;
mod forcing;
mod observables;
mod rhs;

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub use bump::{bump_chi, bump_rho, bump_sigma, smooth_step, BumpConfig};
pub use forcing::{forcing_eval, ForcingSpec};
pub use observables::{
    energy, energy_rate, height, height_accel, height_rate, state_to_cartesian, Branch,
};
pub use rhs::{modified_terms, rhs, rhs_averaged, rhs_full, rhs_modified, PivotTerms};

/// Smallest admissible `|cos θ|`; below it the chart is considered singular.
pub const CHART_GUARD: f64 = 1e-6;

/// Phase point `(θ, φ, p_θ, p_φ)`. Also used for time derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State {
    pub theta: f64,
    pub phi: f64,
    pub p_theta: f64,
    pub p_phi: f64,
}

impl State {
    pub const fn new(theta: f64, phi: f64, p_theta: f64, p_phi: f64) -> Self {
        Self {
            theta,
            phi,
            p_theta,
            p_phi,
        }
    }

    /// Upright equilibrium of the unforced pendulum.
    pub const fn upright() -> Self {
        Self::new(0.0, PI / 2.0, 0.0, 0.0)
    }

    /// Hanging equilibrium of the unforced pendulum.
    pub const fn hanging() -> Self {
        Self::new(0.0, -PI / 2.0, 0.0, 0.0)
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.theta, self.phi, self.p_theta, self.p_phi]
    }

    pub fn from_array(v: [f64; 4]) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// Whether the state lies inside the chart guard.
    pub fn in_chart(&self) -> bool {
        self.theta.cos().abs() >= CHART_GUARD
    }

    pub fn max_abs_diff(&self, other: &State) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Same configuration with `φ` reduced to `[−π, π)`; the vector fields are
    /// `2π`-periodic in `φ`.
    pub fn wrapped(&self) -> Self {
        Self {
            phi: (self.phi + PI).rem_euclid(2.0 * PI) - PI,
            ..*self
        }
    }

    pub fn norm_inf(&self) -> f64 {
        self.to_array().iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// Physical and forcing configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Pivot amplitude scale `a`; the pivot moves as `h(t) = a ε sin(ωt/ε)`.
    pub a: f64,
    /// Fast-scale parameter `ε`, normally `1/k`.
    pub epsilon: f64,
    /// Forcing period `T`.
    pub period: f64,
    /// Viscous friction coefficient `μ`.
    pub mu: f64,
    pub forcing: ForcingSpec,
}

impl Params {
    pub fn new(a: f64, epsilon: f64, period: f64, mu: f64, forcing: ForcingSpec) -> Result<Self> {
        let p = Self {
            a,
            epsilon,
            period,
            mu,
            forcing,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters with `ε = 1/k`, which makes the full system `T`-periodic.
    pub fn with_k(k: u32, a: f64, period: f64, mu: f64, forcing: ForcingSpec) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("k", "must be a positive integer"));
        }
        Self::new(a, 1.0 / k as f64, period, mu, forcing)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.period.is_finite() && self.period > 0.0) {
            return Err(Error::invalid(
                "T",
                format!("must be positive, got {}", self.period),
            ));
        }
        if !(self.a.is_finite() && self.a >= 0.0) {
            return Err(Error::invalid(
                "a",
                format!("must be non-negative, got {}", self.a),
            ));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::invalid(
                "epsilon",
                format!("must be positive, got {}", self.epsilon),
            ));
        }
        if !(self.mu.is_finite() && self.mu >= 0.0) {
            return Err(Error::invalid(
                "mu",
                format!("must be non-negative, got {}", self.mu),
            ));
        }
        self.forcing.validate()
    }

    /// Slow angular frequency `ω = 2π/T`.
    pub fn omega(&self) -> f64 {
        2.0 * PI / self.period
    }

    /// `k` such that `ε = 1/k`, if `ε` is the reciprocal of a positive integer.
    pub fn k(&self) -> Option<u32> {
        let inv = 1.0 / self.epsilon;
        let k = inv.round();
        (k >= 1.0 && (inv - k).abs() <= 1e-9 * k).then_some(k as u32)
    }

    /// Pivot height `h(t) = a ε sin(ωt/ε)`.
    pub fn pivot_height(&self, t: f64) -> f64 {
        self.a * self.epsilon * (self.omega() * t / self.epsilon).sin()
    }

    /// Pivot velocity `ḣ(t) = a ω cos(ωt/ε)`.
    pub fn pivot_velocity(&self, t: f64) -> f64 {
        self.a * self.omega() * (self.omega() * t / self.epsilon).cos()
    }

    /// Period mean of `ḣ²`, i.e. `a²ω²/2`.
    pub fn mean_square_pivot_velocity(&self) -> f64 {
        let w = self.omega();
        0.5 * self.a * self.a * w * w
    }

    /// `(P_x, P_z)` at slow time `s`.
    pub fn forcing_at(&self, s: f64) -> (f64, f64) {
        self.forcing.eval(s, self.omega())
    }
}

/// Free-function form of [`Params::pivot_velocity`].
pub fn pivot_velocity(t: f64, params: &Params) -> f64 {
    params.pivot_velocity(t)
}

/// Free-function form of [`Params::pivot_height`].
pub fn pivot_height(t: f64, params: &Params) -> f64 {
    params.pivot_height(t)
}

/// Which vector field to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "system", rename_all = "lowercase")]
pub enum SystemKind {
    Full,
    Modified {
        bump: BumpConfig,
    },
    /// Averaged system; its slow phase `s` is carried as the integration time
    /// (`ṡ = 1`, `s(t₀) = t₀`).
    Averaged,
}

impl SystemKind {
    pub fn name(&self) -> &'static str {
        match self {
            SystemKind::Full => "full",
            SystemKind::Modified { .. } => "modified",
            SystemKind::Averaged => "averaged",
        }
    }

    /// Whether the vector field depends on the fast pivot phase.
    pub fn is_fast(&self) -> bool {
        !matches!(self, SystemKind::Averaged)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a: f64, eps: f64) -> Params {
        Params::new(a, eps, 2.0 * PI, 1.0, ForcingSpec::Zero).unwrap()
    }

    #[test]
    fn pivot_law_examples() {
        let p = params(5.0, 0.1);
        assert_eq!(p.pivot_velocity(0.0), 5.0);
        assert_eq!(p.pivot_height(0.0), 0.0);
        let quarter = p.epsilon * p.period / 4.0;
        assert!(p.pivot_velocity(quarter).abs() < 1e-14);
        assert!((pivot_velocity(0.0, &p) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn pivot_velocity_is_derivative_of_height() {
        let p = params(2.0, 0.05);
        let h = 1e-6;
        for i in 0..20 {
            let t = 0.37 * i as f64;
            let fd = (p.pivot_height(t + h) - p.pivot_height(t - h)) / (2.0 * h);
            assert!((fd - p.pivot_velocity(t)).abs() < 1e-7);
        }
    }

    #[test]
    fn reciprocal_k_detection() {
        assert_eq!(params(1.0, 0.1).k(), Some(10));
        assert_eq!(params(1.0, 1.0 / 50.0).k(), Some(50));
        assert_eq!(params(1.0, 0.3).k(), None);
    }

    #[test]
    fn validation_names_field() {
        let err = Params::new(1.0, 0.1, -1.0, 1.0, ForcingSpec::Zero).unwrap_err();
        assert!(err.to_string().contains("`T`"));
        assert!(Params::new(-1.0, 0.1, 1.0, 1.0, ForcingSpec::Zero).is_err());
        assert!(Params::new(1.0, 0.0, 1.0, 1.0, ForcingSpec::Zero).is_err());
        assert!(Params::with_k(0, 1.0, 1.0, 1.0, ForcingSpec::Zero).is_err());
    }

    #[test]
    fn mean_square_velocity_matches_quadrature() {
        let p = params(5.0, 0.1);
        let n = 10_000;
        let fast = p.epsilon * p.period;
        let mean: f64 = (0..n)
            .map(|i| p.pivot_velocity(fast * i as f64 / n as f64).powi(2))
            .sum::<f64>()
            / n as f64;
        assert!((mean - p.mean_square_pivot_velocity()).abs() < 1e-10);
        assert!((p.mean_square_pivot_velocity() - 12.5).abs() < 1e-12);
    }
}
