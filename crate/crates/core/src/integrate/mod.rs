//! Adaptive integration of the pendulum vector fields.

mod dopri;
mod order;

use serde::{Deserialize, Serialize};

use crate::dynamics::{rhs, Params, State, SystemKind, CHART_GUARD};
use crate::error::{Error, Result};

pub use dopri::{
    solve, solve_fixed, DenseSegment, Outcome, Termination, VectorField, CROSSING_TOLERANCE,
};
pub use order::{convergence_order, fit_slope, log_log_slope, OrderReport, OrderTestCase};

/// Fast-oscillating systems are integrated with steps no longer than this
/// fraction of the fast period `εT`.
pub const FAST_STEPS_PER_PERIOD: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: 1e-3,
            h_max: 0.1,
            h_min: 1e-13,
            max_steps: 10_000_000,
        }
    }
}

impl StepControl {
    pub fn with_tolerance(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::invalid("rtol", "tolerances must be positive"));
        }
        if !(self.h_min > 0.0 && self.h_min <= self.h_init && self.h_init <= self.h_max) {
            return Err(Error::invalid(
                "h_init",
                "need 0 < h_min <= h_init <= h_max",
            ));
        }
        if self.max_steps == 0 {
            return Err(Error::invalid("max_steps", "must be positive"));
        }
        Ok(())
    }

    /// Control with `h_max` capped at `εT/20` for the fast systems.
    pub fn resolved(&self, kind: &SystemKind, params: &Params) -> Self {
        let mut c = *self;
        if kind.is_fast() {
            c.h_max = c
                .h_max
                .min(params.epsilon * params.period / FAST_STEPS_PER_PERIOD);
        }
        c.h_init = c.h_init.min(c.h_max);
        c.h_min = c.h_min.min(c.h_init);
        c
    }
}

/// The pendulum vector field of a given kind as a first-order system on `R^4`.
#[derive(Debug, Clone)]
pub struct PendulumField<'a> {
    pub kind: SystemKind,
    pub params: &'a Params,
}

impl<'a> PendulumField<'a> {
    pub fn new(kind: SystemKind, params: &'a Params) -> Self {
        Self { kind, params }
    }
}

impl VectorField<4> for PendulumField<'_> {
    fn eval(&self, t: f64, y: &[f64; 4]) -> Result<[f64; 4]> {
        rhs(&self.kind, t, &State::from_array(*y), self.params).map(State::to_array)
    }

    fn guard(&self, y: &[f64; 4]) -> f64 {
        y[0].cos().abs() - CHART_GUARD
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TrajectoryStatus {
    Completed,
    /// The chart guard was crossed; `t` is the last admissible time, within
    /// [`CROSSING_TOLERANCE`] of the crossing.
    Singular {
        t: f64,
    },
    StepUnderflow {
        t: f64,
    },
    MaxSteps {
        t: f64,
    },
}

impl From<Termination> for TrajectoryStatus {
    fn from(t: Termination) -> Self {
        match t {
            Termination::Completed => TrajectoryStatus::Completed,
            Termination::Singular { t } => TrajectoryStatus::Singular { t },
            Termination::StepUnderflow { t } => TrajectoryStatus::StepUnderflow { t },
            Termination::MaxSteps { t } => TrajectoryStatus::MaxSteps { t },
        }
    }
}

/// How to record a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sampling {
    /// Every accepted step endpoint.
    Steps,
    /// Dense-output samples at `t0 + j·dt`, plus the final time.
    Every(f64),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub kind: SystemKind,
    pub params: Params,
    pub status: TrajectoryStatus,
    pub accepted_steps: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, State)> {
        Some((*self.times.last()?, *self.states.last()?))
    }

    pub fn is_completed(&self) -> bool {
        self.status == TrajectoryStatus::Completed
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &State)> {
        self.times.iter().copied().zip(self.states.iter())
    }
}

struct Recorder {
    times: Vec<f64>,
    states: Vec<State>,
    next: usize,
    t0: f64,
    dt: f64,
    t1: f64,
}

impl Recorder {
    fn push(&mut self, t: f64, y: [f64; 4]) {
        self.times.push(t);
        self.states.push(State::from_array(y));
    }

    fn sample_time(&self, j: usize) -> f64 {
        self.t0 + self.dt * j as f64
    }

    fn absorb(&mut self, seg: &DenseSegment<4>) {
        let dir = self.dt.signum();
        loop {
            let ts = self.sample_time(self.next);
            if (ts - self.t1) * dir > 0.0 || !seg.contains(ts) {
                break;
            }
            // within rounding of the final time: the endpoint is recorded separately
            if (self.t1 - ts).abs() <= 1e-12 * self.t1.abs().max(1.0) {
                break;
            }
            self.push(ts, seg.eval(ts));
            self.next += 1;
        }
    }
}

/// Integrate `kind` from `(t0, x0)` to `t1`.
///
/// Integration failures are reported in [`Trajectory::status`]; `Err` is
/// returned only for invalid inputs.
pub fn integrate(
    kind: &SystemKind,
    t0: f64,
    x0: State,
    t1: f64,
    params: &Params,
    control: &StepControl,
    sampling: Sampling,
) -> Result<Trajectory> {
    params.validate()?;
    if !x0.is_finite() {
        return Err(Error::invalid("x0", "state must be finite"));
    }
    if !x0.in_chart() {
        return Err(Error::ChartSingularity {
            cos_theta: x0.theta.cos(),
        });
    }
    if let Sampling::Every(dt) = sampling {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid("sample_dt", "must be positive"));
        }
    }
    let control = control.resolved(kind, params);
    let field = PendulumField::new(*kind, params);
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };

    let dt = match sampling {
        Sampling::Every(dt) => dir * dt,
        Sampling::Steps => 0.0,
    };
    let mut rec = Recorder {
        times: vec![t0],
        states: vec![x0],
        next: 1,
        t0,
        dt,
        t1,
    };
    let outcome = solve(
        &field,
        t0,
        x0.to_array(),
        t1,
        &control,
        |seg| match sampling {
            Sampling::Steps => {
                let t = seg.t1();
                if t != t1 {
                    rec.push(t, seg.eval(t));
                }
            }
            Sampling::Every(_) => rec.absorb(seg),
        },
    )?;

    if outcome.termination == Termination::Completed && t1 != t0 {
        rec.push(t1, outcome.y);
    }
    Ok(Trajectory {
        times: rec.times,
        states: rec.states,
        kind: *kind,
        params: params.clone(),
        status: outcome.termination.into(),
        accepted_steps: outcome.accepted,
    })
}

/// Endpoint of the flow over `dt` (negative `dt` integrates backward).
pub fn flow(
    kind: &SystemKind,
    t0: f64,
    x0: State,
    dt: f64,
    params: &Params,
    control: &StepControl,
) -> Result<State> {
    if dt == 0.0 {
        return Ok(x0);
    }
    if !x0.in_chart() {
        return Err(Error::ChartSingularity {
            cos_theta: x0.theta.cos(),
        });
    }
    let control = control.resolved(kind, params);
    let field = PendulumField::new(*kind, params);
    let out = solve(&field, t0, x0.to_array(), t0 + dt, &control, |_| {})?;
    out.termination.into_result()?;
    Ok(State::from_array(out.y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{energy, height, ForcingSpec};
    use std::f64::consts::PI;

    fn conservative() -> Params {
        Params::with_k(10, 0.0, 2.0 * PI, 0.0, ForcingSpec::Zero).unwrap()
    }

    /// ½(θ̇² + φ̇² cos²θ) + cos θ sin φ with ḣ = 0.
    fn total_energy(x: &State) -> f64 {
        energy(x) + height(x)
    }

    #[test]
    fn conservative_energy_drift() {
        let p = conservative();
        // p_φ = 0 at φ = π/2 would keep the motion in the plane through the
        // chart pole, so start off that plane.
        let x0 = State::new(0.3, 1.2, 0.0, 0.2);
        let control = StepControl::with_tolerance(1e-10, 1e-12);
        let traj = integrate(
            &SystemKind::Averaged,
            0.0,
            x0,
            100.0,
            &p,
            &control,
            Sampling::Steps,
        )
        .unwrap();
        assert!(traj.is_completed(), "{:?}", traj.status);
        let e0 = total_energy(&x0);
        let drift = traj
            .states
            .iter()
            .map(|x| (total_energy(x) - e0).abs())
            .fold(0.0, f64::max);
        assert!(drift < 1e-8, "drift {drift}");
        // the full system with a = 0 is the same vector field
        let full = integrate(
            &SystemKind::Full,
            0.0,
            x0,
            100.0,
            &p,
            &control,
            Sampling::Steps,
        )
        .unwrap();
        let drift_full = full
            .states
            .iter()
            .map(|x| (total_energy(x) - e0).abs())
            .fold(0.0, f64::max);
        assert!(drift_full < 1e-8, "drift {drift_full}");
    }

    #[test]
    fn single_interval_sampling_gives_two_records() {
        let p = conservative();
        let x0 = State::new(0.3, 1.0, 0.1, 0.0);
        let traj = integrate(
            &SystemKind::Averaged,
            0.0,
            x0,
            2.5,
            &p,
            &StepControl::default(),
            Sampling::Every(2.5),
        )
        .unwrap();
        assert_eq!(traj.len(), 2);
        assert_eq!(traj.times, vec![0.0, 2.5]);
    }

    #[test]
    fn regular_samples_are_strictly_increasing() {
        let p = Params::with_k(
            10,
            5.0,
            2.0 * PI,
            1.0,
            ForcingSpec::Rotating { amplitude: 6.0 },
        )
        .unwrap();
        let traj = integrate(
            &SystemKind::Full,
            0.0,
            State::new(0.1, 1.4, 0.0, 0.0),
            3.0,
            &p,
            &StepControl::default(),
            Sampling::Every(0.1),
        )
        .unwrap();
        assert_eq!(traj.len(), 31);
        for w in traj.times.windows(2) {
            assert!(w[1] > w[0]);
        }
        for (j, t) in traj.times.iter().enumerate() {
            assert!((t - 0.1 * j as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_duration_flow_is_identity() {
        let p = conservative();
        let x = State::new(0.2, 0.3, 0.4, 0.5);
        assert_eq!(
            flow(&SystemKind::Full, 1.0, x, 0.0, &p, &StepControl::default()).unwrap(),
            x
        );
    }

    #[test]
    fn semigroup_property() {
        let p = Params::with_k(
            10,
            5.0,
            2.0 * PI,
            1.0,
            ForcingSpec::Rotating { amplitude: 6.0 },
        )
        .unwrap();
        let control = StepControl::with_tolerance(1e-10, 1e-12);
        let x0 = State::new(0.1, 1.3, 0.2, -0.1);
        let kind = SystemKind::Full;
        let a = flow(&kind, 0.0, x0, 1.3, &p, &control).unwrap();
        let ab = flow(&kind, 1.3, a, 2.1, &p, &control).unwrap();
        let direct = flow(&kind, 0.0, x0, 3.4, &p, &control).unwrap();
        let scale = direct.norm_inf().max(1.0);
        assert!(ab.max_abs_diff(&direct) < 10.0 * control.rtol * scale);
    }

    #[test]
    fn reversibility_in_conservative_limit() {
        let p = conservative();
        let control = StepControl::with_tolerance(1e-11, 1e-13);
        let x0 = State::new(0.4, 1.0, 0.3, 0.2);
        let fwd = flow(&SystemKind::Full, 0.0, x0, 5.0, &p, &control).unwrap();
        let back = flow(&SystemKind::Full, 5.0, fwd, -5.0, &p, &control).unwrap();
        assert!(
            back.max_abs_diff(&x0) < 100.0 * control.rtol,
            "{:e}",
            back.max_abs_diff(&x0)
        );
    }

    #[test]
    fn fast_systems_cap_step() {
        let p = Params::with_k(50, 5.0, 2.0 * PI, 1.0, ForcingSpec::Zero).unwrap();
        let c = StepControl::default().resolved(&SystemKind::Full, &p);
        assert!(c.h_max <= p.epsilon * p.period / 20.0);
        let c = StepControl::default().resolved(&SystemKind::Averaged, &p);
        assert_eq!(c.h_max, StepControl::default().h_max);
    }

    #[test]
    fn invalid_start_rejected() {
        let p = conservative();
        let x = State::new(PI / 2.0, 0.0, 0.0, 0.0);
        assert!(integrate(
            &SystemKind::Full,
            0.0,
            x,
            1.0,
            &p,
            &StepControl::default(),
            Sampling::Steps
        )
        .is_err());
    }
}
