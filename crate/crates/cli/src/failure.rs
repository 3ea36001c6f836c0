use kapitza_core::Error;

/// Command failure, classified by exit code.
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Fall(String),
    #[error("{0}")]
    Integrator(String),
    #[error("{0}")]
    NoConvergence(String),
    #[error("{0:#}")]
    Io(#[from] anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Fall(_) => 3,
            Failure::Integrator(_) => 4,
            Failure::NoConvergence(_) => 5,
            // writing results failed; none of the documented codes applies
            Failure::Io(_) => 1,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::InvalidParams { .. } | Error::EmptySet | Error::DegenerateFriction => {
                Failure::Config(msg)
            }
            Error::ChartSingularity { .. } | Error::Singular { .. } | Error::GuardHit { .. } => {
                Failure::Fall(msg)
            }
            Error::StepUnderflow { .. } | Error::MaxSteps { .. } | Error::NotOnBoundary { .. } => {
                Failure::Integrator(msg)
            }
            Error::NoConvergence { .. }
            | Error::SingularJacobian { .. }
            | Error::ContinuationStuck { .. }
            | Error::CertificateFailed { .. } => Failure::NoConvergence(msg),
        }
    }
}
