use super::{solve, solve_fixed, PendulumField, StepControl};
use crate::dynamics::{Params, State, SystemKind};
use crate::error::{Error, Result};

/// Fixed-step convergence experiment on one of the pendulum systems.
#[derive(Debug, Clone)]
pub struct OrderTestCase {
    pub kind: SystemKind,
    pub params: Params,
    pub x0: State,
    pub t0: f64,
    pub horizon: f64,
    /// Number of fixed steps for each run; at least two distinct values.
    pub step_counts: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct OrderReport {
    pub step_sizes: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope of `log(error)` against `log(h)`.
    pub slope: f64,
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    fit_slope(&lx, &ly)
}

/// Measure the order of the fixed-step scheme against a tight adaptive reference.
pub fn convergence_order(case: &OrderTestCase) -> Result<OrderReport> {
    if case.step_counts.len() < 2 {
        return Err(Error::invalid("step_counts", "need at least two runs"));
    }
    let field = PendulumField::new(case.kind, &case.params);
    let t1 = case.t0 + case.horizon;
    let reference_control = StepControl {
        rtol: 1e-14,
        atol: 1e-16,
        ..StepControl::default()
    }
    .resolved(&case.kind, &case.params);
    let reference = solve(
        &field,
        case.t0,
        case.x0.to_array(),
        t1,
        &reference_control,
        |_| {},
    )?;
    reference.termination.into_result()?;

    let mut step_sizes = Vec::with_capacity(case.step_counts.len());
    let mut errors = Vec::with_capacity(case.step_counts.len());
    for &n in &case.step_counts {
        let y = solve_fixed(&field, case.t0, case.x0.to_array(), t1, n)?;
        let err = y
            .iter()
            .zip(reference.y.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        step_sizes.push(case.horizon / n as f64);
        errors.push(err);
    }
    Ok(OrderReport {
        slope: log_log_slope(&step_sizes, &errors),
        step_sizes,
        errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::ForcingSpec;
    use std::f64::consts::PI;

    #[test]
    fn slope_of_power_law() {
        let x: Vec<f64> = [0.1f64, 0.05, 0.025].iter().map(|v| v.ln()).collect();
        let y: Vec<f64> = [0.1f64, 0.05, 0.025]
            .iter()
            .map(|v| 3.0 * v.powi(5))
            .map(f64::ln)
            .collect();
        assert!((fit_slope(&x, &y) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn averaged_system_is_fifth_order() {
        let case = OrderTestCase {
            kind: SystemKind::Averaged,
            params: Params::with_k(10, 5.0, 2.0 * PI, 1.0, ForcingSpec::Zero).unwrap(),
            x0: State::new(0.3, 1.2, 0.5, -0.4),
            t0: 0.0,
            horizon: 2.0,
            step_counts: vec![80, 113, 160, 226, 320],
        };
        let r = convergence_order(&case).unwrap();
        assert!((4.7..=5.3).contains(&r.slope), "{r:?}");
        let ratio = r.errors[0] / r.errors[2];
        assert!(
            ratio > 2f64.powf(4.5) && ratio < 2f64.powf(5.5),
            "ratio {ratio}"
        );
    }
}
