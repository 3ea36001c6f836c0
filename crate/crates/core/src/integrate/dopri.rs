//! Dormand–Prince 5(4) with PI step control and the fourth-order continuous
//! extension of Hairer, Nørsett & Wanner.

use super::StepControl;
use crate::error::{Error, Result};

/// A first-order system `y' = f(t, y)` on `R^N`.
pub trait VectorField<const N: usize> {
    fn eval(&self, t: f64, y: &[f64; N]) -> Result<[f64; N]>;

    /// Signed margin to the admissible region; negative means outside.
    fn guard(&self, _y: &[f64; N]) -> f64 {
        f64::INFINITY
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const EXPO: f64 = 0.2 - BETA * 0.75;

/// Continuous extension over one accepted step `[t0, t0 + h]`.
#[derive(Debug, Clone, Copy)]
pub struct DenseSegment<const N: usize> {
    pub t0: f64,
    pub h: f64,
    rcont: [[f64; N]; 5],
}

impl<const N: usize> DenseSegment<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let [r1, r2, r3, r4, r5] = &self.rcont;
        std::array::from_fn(|i| r1[i] + s * (r2[i] + s1 * (r3[i] + s * (r4[i] + s1 * r5[i]))))
    }

    /// Whether `t` lies in the closed step interval (either direction).
    pub fn contains(&self, t: f64) -> bool {
        let (lo, hi) = if self.h >= 0.0 {
            (self.t0, self.t1())
        } else {
            (self.t1(), self.t0)
        };
        t >= lo && t <= hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    Completed,
    Singular { t: f64 },
    StepUnderflow { t: f64 },
    MaxSteps { t: f64 },
}

impl Termination {
    pub fn into_result(self) -> Result<()> {
        match self {
            Termination::Completed => Ok(()),
            Termination::Singular { t } => Err(Error::Singular { t }),
            Termination::StepUnderflow { t } => Err(Error::StepUnderflow { t }),
            Termination::MaxSteps { t } => Err(Error::MaxSteps { t }),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Outcome<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub termination: Termination,
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        y[i] + h * acc
    })
}

struct Trial<const N: usize> {
    y1: [f64; N],
    k: [[f64; N]; 7],
}

fn attempt<F: VectorField<N>, const N: usize>(
    field: &F,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
) -> Result<Trial<N>> {
    let k2 = field.eval(t + C2 * h, &axpy(y, h, &[(A21, k1)]))?;
    let k3 = field.eval(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]))?;
    let k4 = field.eval(
        t + C4 * h,
        &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]),
    )?;
    let k5 = field.eval(
        t + C5 * h,
        &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    )?;
    let k6 = field.eval(
        t + h,
        &axpy(
            y,
            h,
            &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        ),
    )?;
    let y1 = axpy(
        y,
        h,
        &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
    );
    let k7 = field.eval(t + h, &y1)?;
    Ok(Trial {
        y1,
        k: [*k1, k2, k3, k4, k5, k6, k7],
    })
}

fn dense<const N: usize>(t0: f64, h: f64, y0: &[f64; N], trial: &Trial<N>) -> DenseSegment<N> {
    let k = &trial.k;
    let mut rcont = [[0.0; N]; 5];
    for i in 0..N {
        let dy = trial.y1[i] - y0[i];
        let bspl = h * k[0][i] - dy;
        rcont[0][i] = y0[i];
        rcont[1][i] = dy;
        rcont[2][i] = bspl;
        rcont[3][i] = dy - h * k[6][i] - bspl;
        rcont[4][i] = h
            * (D1 * k[0][i]
                + D3 * k[2][i]
                + D4 * k[3][i]
                + D5 * k[4][i]
                + D6 * k[5][i]
                + D7 * k[6][i]);
    }
    DenseSegment { t0, h, rcont }
}

fn error_norm<const N: usize>(
    h: f64,
    y0: &[f64; N],
    trial: &Trial<N>,
    control: &StepControl,
) -> f64 {
    let k = &trial.k;
    let mut sum = 0.0;
    for i in 0..N {
        let e = h
            * (E1 * k[0][i]
                + E3 * k[2][i]
                + E4 * k[3][i]
                + E5 * k[4][i]
                + E6 * k[5][i]
                + E7 * k[6][i]);
        let sk = control.atol + control.rtol * y0[i].abs().max(trial.y1[i].abs());
        sum += (e / sk) * (e / sk);
    }
    (sum / N as f64).sqrt()
}

/// Locate a guard crossing inside a segment by bisection on the dense output.
fn bracket_crossing<F: VectorField<N>, const N: usize>(
    field: &F,
    seg: &DenseSegment<N>,
    tol: f64,
) -> (f64, f64) {
    let (mut lo, mut hi) = (seg.t0, seg.t1());
    while (hi - lo).abs() > tol {
        let mid = 0.5 * (lo + hi);
        if field.guard(&seg.eval(mid)) < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

/// Width to which guard crossings are bracketed.
pub const CROSSING_TOLERANCE: f64 = 1e-9;

/// Adaptive integration from `t0` to `t1` (either direction).
///
/// `on_step` is called once per accepted step with its dense segment; if a
/// guard crossing is detected the final call carries the truncated segment
/// ending just before the crossing.
pub fn solve<F, const N: usize>(
    field: &F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    control: &StepControl,
    mut on_step: impl FnMut(&DenseSegment<N>),
) -> Result<Outcome<N>>
where
    F: VectorField<N>,
{
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let mut out = Outcome {
        t: t0,
        y: y0,
        termination: Termination::Completed,
        accepted: 0,
        rejected: 0,
        evaluations: 0,
    };
    if t1 == t0 {
        return Ok(out);
    }
    let mut k1 = field.eval(t0, &y0)?;
    out.evaluations += 1;
    let mut t = t0;
    let mut y = y0;
    let mut h = dir * control.h_init.min(control.h_max).min((t1 - t0).abs());
    let mut fac_old: f64 = 1e-4;
    let mut last_rejected = false;

    loop {
        if (t1 - t) * dir <= 0.0 {
            break;
        }
        if out.accepted + out.rejected >= control.max_steps {
            out.termination = Termination::MaxSteps { t };
            break;
        }
        let mut last = false;
        if (t + h - t1) * dir >= 0.0 {
            h = t1 - t;
            last = true;
        }
        if h.abs() < control.h_min && !last {
            out.termination = Termination::StepUnderflow { t };
            break;
        }

        let trial = match attempt(field, t, &y, &k1, h) {
            Ok(trial) => trial,
            Err(Error::ChartSingularity { .. }) => {
                out.evaluations += 6;
                out.rejected += 1;
                if h.abs() <= CROSSING_TOLERANCE * t.abs().max(1.0) {
                    out.termination = Termination::Singular { t };
                    break;
                }
                h *= 0.25;
                last_rejected = true;
                continue;
            }
            Err(e) => return Err(e),
        };
        out.evaluations += 6;

        let err = error_norm(h, &y, &trial, control);
        let fac11 = err.powf(EXPO);
        if err <= 1.0 && err.is_finite() {
            let seg = dense(t, h, &y, &trial);
            if field.guard(&trial.y1) < 0.0 {
                let (lo, _) = bracket_crossing(field, &seg, CROSSING_TOLERANCE);
                let truncated = DenseSegment { h: lo - t, ..seg };
                if truncated.h != 0.0 {
                    on_step(&truncated);
                }
                out.termination = Termination::Singular { t: lo };
                break;
            }
            on_step(&seg);
            out.accepted += 1;
            let fac = (fac11 / fac_old.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            fac_old = err.max(1e-4);
            t = if last { t1 } else { t + h };
            y = trial.y1;
            k1 = trial.k[6];
            let mut h_new = h / fac;
            if last_rejected {
                h_new = dir * h_new.abs().min(h.abs());
            }
            h = dir * h_new.abs().min(control.h_max);
            last_rejected = false;
        } else {
            out.rejected += 1;
            let shrink = if err.is_finite() {
                (fac11 / SAFETY).min(1.0 / FAC_MIN)
            } else {
                1.0 / FAC_MIN
            };
            h /= shrink;
            last_rejected = true;
        }
    }
    out.t = t;
    out.y = y;
    Ok(out)
}

/// Fixed-step integration with the fifth-order propagating solution.
pub fn solve_fixed<F, const N: usize>(
    field: &F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    steps: usize,
) -> Result<[f64; N]>
where
    F: VectorField<N>,
{
    let h = (t1 - t0) / steps as f64;
    let mut y = y0;
    let mut k1 = field.eval(t0, &y)?;
    for i in 0..steps {
        let t = t0 + h * i as f64;
        let trial = attempt(field, t, &y, &k1, h)?;
        y = trial.y1;
        k1 = trial.k[6];
    }
    Ok(y)
}
