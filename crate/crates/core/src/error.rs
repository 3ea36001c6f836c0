use thiserror::Error;

use crate::orbits::PeriodicOrbit;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A right-hand side was evaluated where `|cos θ|` is below the chart guard.
    #[error("chart singularity: |cos(theta)| = {cos_theta:e} is below the guard")]
    ChartSingularity { cos_theta: f64 },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParams { field: &'static str, reason: String },

    #[error("trajectory reached the chart singularity at t = {t}")]
    Singular { t: f64 },

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("maximum number of integrator steps exceeded at t = {t}")]
    MaxSteps { t: f64 },

    #[error(
        "Newton iteration did not converge after {iterations} iterations (residual {residual:e})"
    )]
    NoConvergence {
        iterations: usize,
        residual: f64,
        last: [f64; 4],
    },

    #[error("shooting Jacobian is singular (condition number {condition:e})")]
    SingularJacobian { condition: f64 },

    #[error("trajectory hit the chart guard at t = {t}")]
    GuardHit { t: f64 },

    #[error("continuation stuck at snapshot {snapshot} after exhausting bisection: {cause}")]
    ContinuationStuck {
        snapshot: usize,
        partial: Vec<PeriodicOrbit>,
        cause: Box<Error>,
    },

    #[error("requested boundary component is empty")]
    EmptySet,

    #[error("friction coefficient is zero: no finite energy shell bound exists")]
    DegenerateFriction,

    #[error("point is not on the boundary of the region (height defect {height_defect:e}, energy defect {energy_defect:e})")]
    NotOnBoundary {
        height_defect: f64,
        energy_defect: f64,
    },

    #[error("certificate failed: {clause}")]
    CertificateFailed { clause: String },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParams {
            field,
            reason: reason.into(),
        }
    }
}
