//! Benchmark fixtures.

use std::f64::consts::PI;

use kapitza_core::{ForcingSpec, Params, State};

/// Rotating force `A = 6`, `a = 5`, `μ = 1`, `T = 2π` at the given `k`.
pub fn rotating_case(k: u32) -> Params {
    Params::with_k(
        k,
        5.0,
        2.0 * PI,
        1.0,
        ForcingSpec::Rotating { amplitude: 6.0 },
    )
    .expect("valid parameters")
}

pub fn near_upright() -> State {
    State::new(0.01, 0.5 * PI - 0.01, 0.0, 0.0)
}
