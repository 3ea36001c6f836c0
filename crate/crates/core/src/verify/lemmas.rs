use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{sample_boundary, BoundaryComponent, RegionSpec};
use crate::dynamics::{energy_rate, height_accel, Branch, Params, State};
use crate::error::{Error, Result};

/// Fast phases per sample for lemmas 1 and 2, slow phases for lemmas 3 and 4.
pub const DEFAULT_PHASE_GRID: usize = 32;

/// Worst sampled value of the quantity a lemma requires to be negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lemma_id: u8,
    pub n: usize,
    pub seed: u64,
    pub phase_grid: usize,
    pub worst_margin: f64,
    pub worst_point: State,
    pub worst_time: f64,
    pub pass: bool,
}

/// Sample the lemma's boundary component and evaluate its closed form.
///
/// * 1: `g̈` on the tangency set, instantaneous `ḣ²`.
/// * 2: `Ė` on the energy shell, instantaneous `ḣ²`.
/// * 3: `g̈` on the tangency set, averaged `ḣ²`.
/// * 4: `Ė` on the energy shell, averaged `ḣ²`.
///
/// For 1 and 2 each sample gets a uniform slow time `s ∈ [0, T)` and is
/// evaluated at `s + j εT / m` for `j < m`, covering all fast phases. For 3 and
/// 4 the slow phase runs over `j T / m`.
pub fn check_lemma(
    lemma_id: u8,
    region: &RegionSpec,
    params: &Params,
    n: usize,
    seed: u64,
    phase_grid: usize,
) -> Result<LemmaReport> {
    params.validate()?;
    if !(1..=4).contains(&lemma_id) {
        return Err(Error::invalid("lemma_id", "must be 1, 2, 3 or 4"));
    }
    if phase_grid == 0 {
        return Err(Error::invalid("phase_grid", "must be at least 1"));
    }
    let component = if lemma_id % 2 == 1 {
        BoundaryComponent::TangencySet
    } else {
        BoundaryComponent::EnergyShell
    };
    let branch = if lemma_id <= 2 {
        Branch::Modified
    } else {
        Branch::Averaged
    };
    let samples = sample_boundary(region, component, n, seed)?;
    // slow offsets come from a separate stream so the samples match
    // `sample_boundary` for the same seed
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0ff5e7);
    let m = phase_grid as f64;

    let mut report = LemmaReport {
        lemma_id,
        n,
        seed,
        phase_grid,
        worst_margin: f64::NEG_INFINITY,
        worst_point: samples[0],
        worst_time: 0.0,
        pass: false,
    };
    for x in &samples {
        let (base, span) = match branch {
            Branch::Modified => (
                rng.random_range(0.0..params.period),
                params.epsilon * params.period,
            ),
            Branch::Averaged => (0.0, params.period),
        };
        for j in 0..phase_grid {
            let t = base + span * j as f64 / m;
            let v = if component == BoundaryComponent::TangencySet {
                height_accel(x, t, params, branch)?
            } else {
                energy_rate(x, t, params, branch)?
            };
            if v > report.worst_margin || v.is_nan() {
                report.worst_margin = v;
                report.worst_point = *x;
                report.worst_time = t;
            }
        }
    }
    report.pass = report.worst_margin < 0.0;
    Ok(report)
}

/// Lemmas 1 to 4 with a common sample count, seed and phase grid.
pub fn check_lemma_suite(
    region: &RegionSpec,
    params: &Params,
    n: usize,
    seed: u64,
    phase_grid: usize,
) -> Result<Vec<LemmaReport>> {
    (1..=4)
        .map(|id| check_lemma(id, region, params, n, seed, phase_grid))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundEstimate {
    /// `B/μ` with `B = 1 + 2A + a²ω²`.
    pub c_min: f64,
    /// Largest `δ` (to `1e-3`) at which lemma 3 passes at `c = 1.2 c_min`.
    pub delta_max: f64,
}

const DELTA_RESOLUTION: f64 = 1e-3;
const BOUNDS_SAMPLES: usize = 10_000;
const BOUNDS_SEED: u64 = 2024;

/// Energy-shell constant from bounding every non-friction term of `Ė` by its
/// supremum, and an empirical height threshold by bisection on lemma 3.
pub fn estimate_bounds(params: &Params) -> Result<BoundEstimate> {
    params.validate()?;
    if params.mu == 0.0 {
        return Err(Error::DegenerateFriction);
    }
    let w = params.omega();
    let amp = params.forcing.magnitude_bound();
    let b = 1.0 + 2.0 * amp + params.a * params.a * w * w;
    let c_min = b / params.mu;
    let c = 1.2 * c_min;

    let passes = |delta: f64| -> Result<bool> {
        let region = RegionSpec::new(c, delta)?;
        let r = check_lemma(
            3,
            &region,
            params,
            BOUNDS_SAMPLES,
            BOUNDS_SEED,
            DEFAULT_PHASE_GRID,
        )?;
        Ok(r.pass)
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    if passes(1.0 - DELTA_RESOLUTION)? {
        lo = 1.0 - DELTA_RESOLUTION;
    } else {
        while hi - lo > DELTA_RESOLUTION {
            let mid = 0.5 * (lo + hi);
            if passes(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    Ok(BoundEstimate {
        c_min,
        delta_max: lo,
    })
}
