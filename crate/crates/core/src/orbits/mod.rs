//! Stroboscopic map, shooting for `T`-periodic orbits, Floquet analysis and
//! continuation.

mod continuation;
mod monodromy;
mod newton;

use nalgebra::{Complex, Matrix4};
use serde::{Deserialize, Serialize};

use crate::dynamics::{energy, height, Params, State, SystemKind};
use crate::error::{Error, Result};
use crate::integrate::{flow, integrate, PendulumField, Sampling, StepControl, Trajectory};

pub use continuation::{continuation, ContinuationPlan, Snapshot};
pub use monodromy::{
    floquet, flow_field, monodromy_fd_field, monodromy_var_field, relative_difference,
    CENTERED_STEP,
};
pub use newton::{find_orbit_newton, NewtonOptions};

/// Default number of dense samples per period for height and energy extrema.
pub const DEFAULT_SAMPLES: usize = 2000;

/// A `T`-periodic solution found by shooting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub kind: SystemKind,
    pub params: Params,
    /// Orbit point at `t = 0 (mod T)`.
    pub x0: State,
    pub period: f64,
    /// `‖Φ_T(x0) − x0‖∞`.
    pub residual: f64,
    /// Floquet multipliers, largest modulus first.
    pub multipliers: [Complex<f64>; 4],
    pub stable: bool,
    pub min_height: f64,
    pub max_energy: f64,
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Trajectory>,
}

impl PeriodicOrbit {
    pub fn max_multiplier_modulus(&self) -> f64 {
        self.multipliers
            .iter()
            .map(|l| l.norm())
            .fold(0.0, f64::max)
    }
}

/// Extrema of height and energy over one period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitExtrema {
    pub min_height: f64,
    pub max_height: f64,
    pub min_energy: f64,
    pub max_energy: f64,
}

fn require_periodic(kind: &SystemKind, params: &Params) -> Result<()> {
    if kind.is_fast() && params.k().is_none() {
        return Err(Error::invalid(
            "epsilon",
            format!(
                "must be 1/k for an integer k so that the field is T-periodic, got {}",
                params.epsilon
            ),
        ));
    }
    Ok(())
}

/// One period of the flow, `Φ(x) = x(t0 + T)` for `x(t0) = x`.
pub fn strobe_map(
    x: &State,
    t0: f64,
    kind: &SystemKind,
    params: &Params,
    control: &StepControl,
) -> Result<State> {
    require_periodic(kind, params)?;
    flow(kind, t0, *x, params.period, params, control)
}

/// Point reached at `T·⌈t_transient / T⌉` from `x_start` at `t = 0`, with `φ`
/// wrapped to `[−π, π)`.
pub fn attractor_seed(
    kind: &SystemKind,
    params: &Params,
    t_transient: f64,
    x_start: &State,
    control: &StepControl,
) -> Result<State> {
    require_periodic(kind, params)?;
    if !(t_transient >= 0.0 && t_transient.is_finite()) {
        return Err(Error::invalid("t_transient", "must be non-negative"));
    }
    let periods = (t_transient / params.period).ceil().max(1.0);
    let t_end = periods * params.period;
    flow(kind, 0.0, *x_start, t_end, params, control)
        .map(|x| x.wrapped())
        .map_err(|e| match e {
            Error::Singular { t } => Error::GuardHit { t },
            e => e,
        })
}

/// Height and energy extrema over `n_samples ≥ 1000` dense samples of one period.
pub fn orbit_extrema(
    orbit: &PeriodicOrbit,
    n_samples: usize,
    control: &StepControl,
) -> Result<OrbitExtrema> {
    let traj = one_period(orbit, n_samples, control)?;
    Ok(extrema_of(&traj))
}

/// Minimum of `cos θ sin φ` over `n_samples ≥ 1000` dense samples of one period.
pub fn non_falling_check(
    orbit: &PeriodicOrbit,
    n_samples: usize,
    control: &StepControl,
) -> Result<f64> {
    Ok(orbit_extrema(orbit, n_samples, control)?.min_height)
}

pub(crate) fn one_period(
    orbit: &PeriodicOrbit,
    n_samples: usize,
    control: &StepControl,
) -> Result<Trajectory> {
    let n = n_samples.max(1000);
    let traj = integrate(
        &orbit.kind,
        0.0,
        orbit.x0,
        orbit.period,
        &orbit.params,
        control,
        Sampling::Every(orbit.period / n as f64),
    )?;
    if !traj.is_completed() {
        let t = traj.last().map_or(0.0, |(t, _)| t);
        return Err(Error::GuardHit { t });
    }
    Ok(traj)
}

pub(crate) fn extrema_of(traj: &Trajectory) -> OrbitExtrema {
    let mut e = OrbitExtrema {
        min_height: f64::INFINITY,
        max_height: f64::NEG_INFINITY,
        min_energy: f64::INFINITY,
        max_energy: f64::NEG_INFINITY,
    };
    for x in &traj.states {
        let (g, en) = (height(x), energy(x));
        e.min_height = e.min_height.min(g);
        e.max_height = e.max_height.max(g);
        e.min_energy = e.min_energy.min(en);
        e.max_energy = e.max_energy.max(en);
    }
    e
}

/// Orbit point at time `t`, integrated from `x0` at `t = 0`.
pub fn orbit_point_at(orbit: &PeriodicOrbit, t: f64, control: &StepControl) -> Result<State> {
    flow(&orbit.kind, 0.0, orbit.x0, t, &orbit.params, control)
}

/// Monodromy of the orbit by centered finite differences of the strobe map,
/// based at the orbit point at time `t_base`.
pub fn monodromy_fd(
    orbit: &PeriodicOrbit,
    t_base: f64,
    control: &StepControl,
) -> Result<Matrix4<f64>> {
    let x = orbit_point_at(orbit, t_base, control)?;
    let control = control.resolved(&orbit.kind, &orbit.params);
    let field = PendulumField::new(orbit.kind, &orbit.params);
    monodromy_fd_field(&field, t_base, x.to_array(), orbit.period, &control)
}

/// Monodromy of the orbit from the variational equations, based at the orbit
/// point at time `t_base`.
pub fn monodromy_var(
    orbit: &PeriodicOrbit,
    t_base: f64,
    control: &StepControl,
) -> Result<Matrix4<f64>> {
    let x = orbit_point_at(orbit, t_base, control)?;
    let control = control.resolved(&orbit.kind, &orbit.params);
    let field = PendulumField::new(orbit.kind, &orbit.params);
    monodromy_var_field(&field, t_base, x.to_array(), orbit.period, &control)
}
