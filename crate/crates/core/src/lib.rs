//! Simulation and analysis of the inverted spherical pendulum with a
//! vertically vibrating pivot and a horizontal periodic force.
//!
//! * [`dynamics`]: full, modified and averaged vector fields and observables.
//! * [`integrate`]: adaptive Dormand–Prince 5(4) integration with dense output.
//! * [`orbits`]: stroboscopic map, Newton shooting, monodromy and Floquet
//!   multipliers, continuation.
//! * [`verify`]: sampled sign certificates for the height and energy
//!   boundaries, egress classification, averaging error, orbit certificates.

// `!(x > 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod integrate;
pub mod orbits;
pub mod verify;

pub use dynamics::{Branch, BumpConfig, ForcingSpec, Params, State, SystemKind};
pub use error::{Error, Result};
pub use integrate::{StepControl, Trajectory, TrajectoryStatus};
pub use nalgebra::Complex;
pub use orbits::{NewtonOptions, PeriodicOrbit};
