use serde::{Deserialize, Serialize};

use super::{energy, height, State};
use crate::error::{Error, Result};

/// Cutoff geometry of the modified system.
///
/// `c²` is the energy level of the momentum shell, `delta` the height of the
/// lower face and `transition` the width `Δ` of the switching layer. The cutoff
/// vanishes where the scalar defect is at most `Δ` and equals one where it is
/// at least `2Δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpConfig {
    pub c: f64,
    pub delta: f64,
    #[serde(rename = "Delta")]
    pub transition: f64,
}

impl BumpConfig {
    pub fn new(c: f64, delta: f64, transition: f64) -> Result<Self> {
        let b = Self {
            c,
            delta,
            transition,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::invalid("c", "must be positive"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::invalid("delta", "must lie in (0, 1)"));
        }
        if !(self.transition.is_finite() && self.transition > 0.0) {
            return Err(Error::invalid("Delta", "must be positive"));
        }
        if 2.0 * self.transition >= self.delta || 2.0 * self.transition >= self.c {
            return Err(Error::invalid(
                "Delta",
                "2*Delta must be smaller than delta and c",
            ));
        }
        Ok(())
    }

    pub fn chi(&self, x: &State) -> f64 {
        bump_chi(x, self)
    }
}

fn flat(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// C^∞ step: 0 for `x ≤ 0`, 1 for `x ≥ 1`, strictly increasing in between.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let a = flat(x);
    a / (a + flat(1.0 - x))
}

fn layer(defect: f64, width: f64) -> f64 {
    smooth_step((defect.abs() - width) / width)
}

/// Height cutoff `σ_δ`, a function of `|cos θ sin φ − δ|`.
pub fn bump_sigma(theta: f64, phi: f64, delta: f64, width: f64) -> f64 {
    layer(theta.cos() * phi.sin() - delta, width)
}

/// Energy-shell cutoff `ρ_c`, a function of `|E − c²|`.
pub fn bump_rho(theta: f64, p_theta: f64, p_phi: f64, c: f64, width: f64) -> f64 {
    let e = energy(&State::new(theta, 0.0, p_theta, p_phi));
    layer(e - c * c, width)
}

/// `χ = σ_δ · ρ_c`.
pub fn bump_chi(x: &State, bump: &BumpConfig) -> f64 {
    let sigma = layer(height(x) - bump.delta, bump.transition);
    if sigma == 0.0 {
        return 0.0;
    }
    sigma * layer(energy(x) - bump.c * bump.c, bump.transition)
}
