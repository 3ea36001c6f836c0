use serde::{Deserialize, Serialize};

use crate::dynamics::{Params, State, SystemKind};
use crate::error::{Error, Result};
use crate::integrate::{
    integrate, log_log_slope, Sampling, StepControl, Trajectory, TrajectoryStatus,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AvgCompareOptions {
    /// Dense samples over the horizon at which the two solutions are compared.
    pub samples: usize,
    pub control: StepControl,
}

impl Default for AvgCompareOptions {
    fn default() -> Self {
        Self {
            samples: 4000,
            control: StepControl::with_tolerance(1e-10, 1e-12),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvgCompareReport {
    pub epsilons: Vec<f64>,
    /// `sup_t ‖x_full(t) − x_avg(t)‖∞` over the horizon.
    pub sup_errors: Vec<f64>,
    /// Least-squares slope of `log sup_error` against `log ε`.
    pub observed_order: f64,
    pub horizon: f64,
}

fn completed(traj: Trajectory) -> Result<Trajectory> {
    match traj.status {
        TrajectoryStatus::Completed => Ok(traj),
        TrajectoryStatus::Singular { t } => Err(Error::Singular { t }),
        TrajectoryStatus::StepUnderflow { t } => Err(Error::StepUnderflow { t }),
        TrajectoryStatus::MaxSteps { t } => Err(Error::MaxSteps { t }),
    }
}

/// Distance between the full and averaged solutions from the same `x0` at
/// `t = 0` for each `ε`. The averaged solution does not depend on `ε`.
pub fn avg_compare(
    params: &Params,
    x0: &State,
    horizon: f64,
    eps_list: &[f64],
    opts: &AvgCompareOptions,
) -> Result<AvgCompareReport> {
    if eps_list.is_empty() {
        return Err(Error::invalid("epsilons", "must not be empty"));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::invalid("horizon", "must be positive"));
    }
    if opts.samples == 0 {
        return Err(Error::invalid("samples", "must be at least 1"));
    }
    let dt = horizon / opts.samples as f64;
    let sampling = Sampling::Every(dt);
    // Steps no longer than the sample spacing keep the dense-output error of
    // either run well below the integration tolerance.
    let mut control = opts.control;
    control.h_max = control.h_max.min(dt);
    let avg = completed(integrate(
        &SystemKind::Averaged,
        0.0,
        *x0,
        horizon,
        params,
        &control,
        sampling,
    )?)?;

    let mut sup_errors = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let mut p = params.clone();
        p.epsilon = eps;
        p.validate()?;
        let full = completed(integrate(
            &SystemKind::Full,
            0.0,
            *x0,
            horizon,
            &p,
            &control,
            sampling,
        )?)?;
        debug_assert_eq!(full.times, avg.times);
        let err = full
            .states
            .iter()
            .zip(&avg.states)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max);
        sup_errors.push(err);
    }
    let observed_order = if eps_list.len() >= 2 {
        log_log_slope(eps_list, &sup_errors)
    } else {
        f64::NAN
    };
    Ok(AvgCompareReport {
        epsilons: eps_list.to_vec(),
        sup_errors,
        observed_order,
        horizon,
    })
}
