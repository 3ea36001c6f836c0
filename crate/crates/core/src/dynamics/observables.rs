use serde::{Deserialize, Serialize};

use super::{Params, State, CHART_GUARD};
use crate::error::{Error, Result};

/// Which closed form to use in [`height_accel`] and [`energy_rate`].
///
/// Both forms assume the cutoff vanishes (`θ̇ = p_θ`, `φ̇ = p_φ / cos²θ`).
/// `Modified` uses the instantaneous `ḣ(t)²`, `Averaged` uses `a²ω²/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Modified,
    Averaged,
}

impl Branch {
    fn hdot_sq(self, t: f64, params: &Params) -> f64 {
        match self {
            Branch::Modified => params.pivot_velocity(t).powi(2),
            Branch::Averaged => params.mean_square_pivot_velocity(),
        }
    }
}

fn guarded_cos(x: &State) -> Result<f64> {
    let ct = x.theta.cos();
    if ct.abs() >= CHART_GUARD {
        Ok(ct)
    } else {
        Err(Error::ChartSingularity { cos_theta: ct })
    }
}

/// Height of the rod tip above the pivot, `g = cos θ sin φ`.
pub fn height(x: &State) -> f64 {
    x.theta.cos() * x.phi.sin()
}

/// `ġ` on the branch where the cutoff vanishes:
/// `−p_θ sin θ sin φ + (p_φ / cos θ) cos φ`.
pub fn height_rate(x: &State) -> Result<f64> {
    let ct = guarded_cos(x)?;
    Ok(-x.p_theta * x.theta.sin() * x.phi.sin() + x.p_phi / ct * x.phi.cos())
}

/// Closed-form `g̈` on the cutoff-free branch.
///
/// Obtained by differentiating `ġ` along the vector field and collecting the
/// gravity part `−1 + cos²θ sin²φ`, the forcing, friction, `ḣ²` and kinetic
/// contributions. Note the forcing term is `−P_x cos²θ cos φ sin φ`.
pub fn height_accel(x: &State, t: f64, params: &Params, branch: Branch) -> Result<f64> {
    let ct = guarded_cos(x)?;
    let st = x.theta.sin();
    let (sp, cp) = x.phi.sin_cos();
    let (pt, pp) = (x.p_theta, x.p_phi);
    let (px, pz) = params.forcing_at(t);
    let hd2 = branch.hdot_sq(t, params);
    let ct3 = ct * ct * ct;

    let gravity = -1.0 + ct * ct * sp * sp;
    let forcing = -px * ct * ct * cp * sp - pz * ct * st * sp;
    let friction = params.mu * (pt * st * sp - pp * cp / ct);
    let pivot =
        hd2 * (cp * cp * sp / ct + st * st * ct * sp * sp * sp - st * st * cp * cp * sp / ct);
    let kinetic = pp * pp * (st * st * sp / ct3 - sp / ct3) - pt * pt * ct * sp;
    Ok(gravity + forcing + friction + pivot + kinetic)
}

/// Kinetic part of the energy, `E = ½ (p_θ² + p_φ² / cos²θ)`.
pub fn energy(x: &State) -> f64 {
    let ct = x.theta.cos();
    0.5 * (x.p_theta * x.p_theta + x.p_phi * x.p_phi / (ct * ct))
}

/// Closed-form `Ė` on the branch where the cutoff vanishes:
/// `−2μE + p_θ (…) + (p_φ / cos θ)(…)`.
pub fn energy_rate(x: &State, t: f64, params: &Params, branch: Branch) -> Result<f64> {
    let ct = guarded_cos(x)?;
    let st = x.theta.sin();
    let (sp, cp) = x.phi.sin_cos();
    let (px, pz) = params.forcing_at(t);
    let hd2 = branch.hdot_sq(t, params);
    let q = x.p_phi / ct;

    let along_theta = st * sp - px * st * cp + pz * ct - hd2 * st * ct * sp * sp;
    let along_phi = -cp - px * sp + hd2 * cp * sp * ct;
    Ok(-2.0 * params.mu * energy(x) + x.p_theta * along_theta + q * along_phi)
}

/// Lab-frame position `(x, y, z)` of the point mass.
pub fn state_to_cartesian(x: &State, t: f64, params: &Params) -> [f64; 3] {
    let ct = x.theta.cos();
    [
        ct * x.phi.cos(),
        params.pivot_height(t) + ct * x.phi.sin(),
        x.theta.sin(),
    ]
}
