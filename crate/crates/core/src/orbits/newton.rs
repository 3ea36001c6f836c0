use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use super::{extrema_of, floquet, monodromy_fd, one_period, require_periodic, PeriodicOrbit};
use crate::dynamics::{Params, State, SystemKind};
use crate::error::{Error, Result};
use crate::integrate::{flow, StepControl};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewtonOptions {
    /// Convergence threshold on `‖Φ_T(x) − x‖∞`.
    pub tol_res: f64,
    pub max_iter: usize,
    /// Relative forward-difference step of the shooting Jacobian.
    pub fd_step: f64,
    pub max_halvings: usize,
    /// Jacobians with a larger 2-norm condition number are rejected.
    pub max_condition: f64,
    /// An orbit is stable when every multiplier modulus is below `1 − margin`.
    pub stability_margin: f64,
    /// Dense samples per period for the height and energy extrema.
    pub samples: usize,
    pub keep_trajectory: bool,
    pub control: StepControl,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol_res: 1e-10,
            max_iter: 40,
            fd_step: 1e-7,
            max_halvings: 20,
            max_condition: 1e12,
            stability_margin: 1e-6,
            samples: super::DEFAULT_SAMPLES,
            keep_trajectory: false,
            control: StepControl::with_tolerance(1e-11, 1e-13),
        }
    }
}

impl NewtonOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_res > 0.0) {
            return Err(Error::invalid("tol_res", "must be positive"));
        }
        if !(self.fd_step > 0.0 && self.fd_step < 1e-2) {
            return Err(Error::invalid("fd_step", "must lie in (0, 1e-2)"));
        }
        if !(self.stability_margin >= 0.0 && self.stability_margin < 1.0) {
            return Err(Error::invalid("stability_margin", "must lie in [0, 1)"));
        }
        self.control.validate()
    }
}

struct Shooting<'a> {
    kind: &'a SystemKind,
    params: &'a Params,
    control: &'a StepControl,
}

impl Shooting<'_> {
    fn defect(&self, x: &Vector4<f64>) -> Result<Vector4<f64>> {
        let s = State::from_array([x[0], x[1], x[2], x[3]]);
        let y = flow(
            self.kind,
            0.0,
            s,
            self.params.period,
            self.params,
            self.control,
        )?;
        Ok(Vector4::from(y.to_array()) - x)
    }

    fn jacobian(&self, x: &Vector4<f64>, f: &Vector4<f64>, step: f64) -> Result<Matrix4<f64>> {
        let mut jac = Matrix4::zeros();
        for j in 0..4 {
            let mut xp = *x;
            xp[j] += step * (1.0 + x[j].abs());
            let fp = self.defect(&xp)?;
            jac.set_column(j, &((fp - f) / (xp[j] - x[j])));
        }
        Ok(jac)
    }
}

fn guard_hit(e: Error) -> Error {
    match e {
        Error::Singular { t } => Error::GuardHit { t },
        Error::ChartSingularity { .. } => Error::GuardHit { t: 0.0 },
        e => e,
    }
}

fn condition(jac: &Matrix4<f64>) -> f64 {
    let sv = jac.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// Damped Newton iteration on `F(x) = Φ_T(x) − x` from `guess` at `t = 0`.
///
/// The returned orbit carries its residual, Floquet multipliers (from the
/// centered-difference monodromy), stability flag and height and energy
/// extrema over one period.
pub fn find_orbit_newton(
    kind: &SystemKind,
    params: &Params,
    guess: &State,
    opts: &NewtonOptions,
) -> Result<PeriodicOrbit> {
    params.validate()?;
    opts.validate()?;
    require_periodic(kind, params)?;
    if !guess.is_finite() || !guess.in_chart() {
        return Err(Error::GuardHit { t: 0.0 });
    }
    let shoot = Shooting {
        kind,
        params,
        control: &opts.control,
    };
    let mut x = Vector4::from(guess.to_array());
    let mut f = shoot.defect(&x).map_err(guard_hit)?;
    let mut res = f.amax();
    let mut iterations = 0;
    let mut last_lu = None;

    while res >= opts.tol_res {
        if iterations == opts.max_iter {
            return Err(no_convergence(iterations, res, &x));
        }
        iterations += 1;
        let jac = shoot.jacobian(&x, &f, opts.fd_step).map_err(guard_hit)?;
        let cond = condition(&jac);
        if !(cond <= opts.max_condition) {
            return Err(Error::SingularJacobian { condition: cond });
        }
        let lu = jac.lu();
        let dx = lu.solve(&(-f)).ok_or(Error::SingularJacobian {
            condition: f64::INFINITY,
        })?;
        last_lu = Some(lu);

        // Armijo backtracking on the Euclidean norm
        let norm = f.norm();
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let xt = x + dx * lambda;
            if let Ok(ft) = shoot.defect(&xt) {
                if ft.norm() <= (1.0 - 1e-4 * lambda) * norm {
                    accepted = Some((xt, ft));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((xt, ft)) => {
                x = xt;
                f = ft;
                res = f.amax();
            }
            None => return Err(no_convergence(iterations, res, &x)),
        }
    }
    // One chord step with the last Jacobian; kept only if it helps.
    if let Some(dx) = last_lu.and_then(|lu| lu.solve(&(-f))) {
        let xt = x + dx;
        if let Ok(ft) = shoot.defect(&xt) {
            if ft.amax() < res {
                x = xt;
                res = ft.amax();
            }
        }
    }
    finish(
        kind,
        params,
        State::from_array(x.into()),
        res,
        iterations,
        opts,
    )
}

fn no_convergence(iterations: usize, residual: f64, x: &Vector4<f64>) -> Error {
    Error::NoConvergence {
        iterations,
        residual,
        last: [x[0], x[1], x[2], x[3]],
    }
}

/// Attach multipliers and extrema to a converged fixed point.
fn finish(
    kind: &SystemKind,
    params: &Params,
    x0: State,
    residual: f64,
    iterations: usize,
    opts: &NewtonOptions,
) -> Result<PeriodicOrbit> {
    let mut orbit = PeriodicOrbit {
        kind: *kind,
        params: params.clone(),
        x0,
        period: params.period,
        residual,
        multipliers: Default::default(),
        stable: false,
        min_height: f64::NAN,
        max_energy: f64::NAN,
        iterations,
        trajectory: None,
    };
    let m = monodromy_fd(&orbit, 0.0, &opts.control)?;
    orbit.multipliers = floquet(&m);
    orbit.stable = orbit
        .multipliers
        .iter()
        .all(|l| l.norm() < 1.0 - opts.stability_margin);
    let traj = one_period(&orbit, opts.samples, &opts.control)?;
    let ext = extrema_of(&traj);
    orbit.min_height = ext.min_height;
    orbit.max_energy = ext.max_energy;
    if opts.keep_trajectory {
        orbit.trajectory = Some(traj);
    }
    Ok(orbit)
}
