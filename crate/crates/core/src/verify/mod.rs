//! Sampled sign certificates on the boundary of
//! `M = {cos θ sin φ ≥ δ, E ≤ c²}`, egress classification, averaging error and
//! the end-to-end orbit certificate.

mod averaging;
mod certificate;
mod egress;
mod lemmas;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::dynamics::{energy, height, State};
use crate::error::{Error, Result};

pub use averaging::{avg_compare, AvgCompareOptions, AvgCompareReport};
pub use certificate::{
    build_certificate, theorem1_certificate, Certificate, CertificateOptions, Clause, KStep,
    OrbitSummary,
};
pub use egress::{egress_classify, BoundaryClass, BOUNDARY_TOLERANCE};
pub use lemmas::{
    check_lemma, check_lemma_suite, estimate_bounds, BoundEstimate, LemmaReport, DEFAULT_PHASE_GRID,
};

/// The region `M_{c,δ}`: height at least `δ`, energy at most `c²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub c: f64,
    pub delta: f64,
}

impl RegionSpec {
    pub fn new(c: f64, delta: f64) -> Result<Self> {
        let r = Self { c, delta };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::invalid("c", "must be positive"));
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::invalid("delta", "must be positive"));
        }
        Ok(())
    }

    pub fn contains(&self, x: &State) -> bool {
        height(x) >= self.delta && energy(x) <= self.c * self.c
    }

    /// `g − δ`.
    pub fn height_defect(&self, x: &State) -> f64 {
        height(x) - self.delta
    }

    /// `E − c²`.
    pub fn energy_defect(&self, x: &State) -> f64 {
        energy(x) - self.c * self.c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryComponent {
    /// `E = c²`, `g ≥ δ`.
    EnergyShell,
    /// `g = δ`, `E ≤ c²`.
    HeightFace,
    /// Height face points with `ġ = 0`.
    TangencySet,
    /// Height face points with `ġ > 0`.
    HeightFaceOut,
    /// Height face points with `ġ < 0`.
    HeightFaceIn,
}

/// `(θ, φ)` on the height face `cos θ sin φ = δ`, uniform in `θ`, both
/// branches of `φ`.
fn face_point(rng: &mut ChaCha8Rng, delta: f64) -> (f64, f64) {
    let theta_max = delta.acos();
    let theta = rng.random_range(-theta_max..=theta_max);
    let s = (delta / theta.cos()).min(1.0);
    let phi = if rng.random_bool(0.5) {
        s.asin()
    } else {
        PI - s.asin()
    };
    (theta, phi)
}

/// `(θ, φ)` uniform on `{cos θ sin φ ≥ δ}` by rejection.
fn interior_point(rng: &mut ChaCha8Rng, delta: f64) -> (f64, f64) {
    let theta_max = delta.acos();
    loop {
        let theta = rng.random_range(-theta_max..=theta_max);
        let phi = rng.random_range(0.0..=PI);
        if theta.cos() * phi.sin() >= delta {
            return (theta, phi);
        }
    }
}

/// `(p_θ, q)` with `q = p_φ / cos θ`, uniform in the disk `½(p_θ² + q²) ≤ c²`.
fn disk_momentum(rng: &mut ChaCha8Rng, c: f64) -> (f64, f64) {
    let r = (2.0f64).sqrt() * c * rng.random::<f64>().sqrt();
    let a = rng.random_range(0.0..2.0 * PI);
    (r * a.cos(), r * a.sin())
}

/// `(p_θ, q)` uniform on the circle `½(p_θ² + q²) = c²`.
fn circle_momentum(rng: &mut ChaCha8Rng, c: f64) -> (f64, f64) {
    let r = (2.0f64).sqrt() * c;
    let a = rng.random_range(0.0..2.0 * PI);
    (r * a.cos(), r * a.sin())
}

/// `ġ = −p_θ sin θ sin φ + q cos φ` with `q = p_φ / cos θ`.
fn rate(theta: f64, phi: f64, p_theta: f64, q: f64) -> f64 {
    -p_theta * theta.sin() * phi.sin() + q * phi.cos()
}

fn state(theta: f64, phi: f64, p_theta: f64, q: f64) -> State {
    State::new(theta, phi, p_theta, q * theta.cos())
}

/// Deterministic boundary samples.
///
/// On the tangency set the momentum is `λ (cos φ, sin θ sin φ) / ‖·‖` in the
/// `(p_θ, p_φ / cos θ)` coordinates with `λ` uniform in `[−√2 c, √2 c]`, which
/// solves `ġ = 0` exactly and keeps `E = λ²/2 ≤ c²`. The first tangency sample
/// has zero momentum.
pub fn sample_boundary(
    region: &RegionSpec,
    component: BoundaryComponent,
    n: usize,
    seed: u64,
) -> Result<Vec<State>> {
    region.validate()?;
    if region.delta >= 1.0 {
        return Err(Error::EmptySet);
    }
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (c, delta) = (region.c, region.delta);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let x = match component {
            BoundaryComponent::EnergyShell => {
                let (theta, phi) = interior_point(&mut rng, delta);
                let (pt, q) = circle_momentum(&mut rng, c);
                state(theta, phi, pt, q)
            }
            BoundaryComponent::HeightFace => {
                let (theta, phi) = face_point(&mut rng, delta);
                let (pt, q) = disk_momentum(&mut rng, c);
                state(theta, phi, pt, q)
            }
            BoundaryComponent::TangencySet => {
                let (theta, phi) = face_point(&mut rng, delta);
                let (u, v) = (phi.cos(), theta.sin() * phi.sin());
                let norm = u.hypot(v);
                let lam_max = (2.0f64).sqrt() * c;
                let lam = if out.is_empty() {
                    0.0
                } else {
                    rng.random_range(-lam_max..=lam_max)
                };
                state(theta, phi, lam * u / norm, lam * v / norm)
            }
            BoundaryComponent::HeightFaceOut | BoundaryComponent::HeightFaceIn => {
                let (theta, phi) = face_point(&mut rng, delta);
                let (mut pt, mut q) = disk_momentum(&mut rng, c);
                let r = rate(theta, phi, pt, q);
                if r == 0.0 {
                    continue;
                }
                let want_out = component == BoundaryComponent::HeightFaceOut;
                if (r > 0.0) != want_out {
                    pt = -pt;
                    q = -q;
                }
                state(theta, phi, pt, q)
            }
        };
        debug_assert!(x.theta.abs() < FRAC_PI_2);
        out.push(x);
    }
    Ok(out)
}
