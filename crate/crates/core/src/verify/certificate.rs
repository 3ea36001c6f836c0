use nalgebra::Complex;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{check_lemma_suite, LemmaReport, RegionSpec, DEFAULT_PHASE_GRID};
use crate::dynamics::{Params, State, SystemKind};
use crate::error::{Error, Result};
use crate::integrate::StepControl;
use crate::orbits::{attractor_seed, continuation, ContinuationPlan, NewtonOptions, PeriodicOrbit};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertificateOptions {
    /// Width `Δ` of the cutoff layer; the orbit must keep more than `2Δ` from
    /// both faces, measured in `g − δ` and `c² − E`.
    #[serde(rename = "Delta")]
    pub transition: f64,
    pub lemma_samples: usize,
    pub seed: u64,
    pub phase_grid: usize,
    /// Transient of the averaged attractor that seeds the continuation.
    pub transient_periods: f64,
    pub start: State,
    pub newton: NewtonOptions,
    pub seed_control: StepControl,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        Self {
            transition: 1e-3,
            lemma_samples: 10_000,
            seed: 1,
            phase_grid: DEFAULT_PHASE_GRID,
            transient_periods: 100.0,
            start: State::new(0.01, 0.5 * PI - 0.01, 0.0, 0.0),
            newton: NewtonOptions::default(),
            seed_control: StepControl::with_tolerance(1e-10, 1e-12),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Clause {
    fn below(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            pass: value < threshold,
        }
    }

    fn above(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            pass: value > threshold,
        }
    }
}

/// One step of the `k` schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KStep {
    pub k: u32,
    pub residual: f64,
    pub stable: bool,
    pub min_height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitSummary {
    pub k: Option<u32>,
    pub x0: State,
    pub residual: f64,
    pub multipliers: [Complex<f64>; 4],
    pub stable: bool,
    pub min_height: f64,
    pub max_energy: f64,
}

impl From<&PeriodicOrbit> for OrbitSummary {
    fn from(o: &PeriodicOrbit) -> Self {
        Self {
            k: o.params.k(),
            x0: o.x0,
            residual: o.residual,
            multipliers: o.multipliers,
            stable: o.stable,
            min_height: o.min_height,
            max_energy: o.max_energy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub params: Params,
    pub region: RegionSpec,
    #[serde(rename = "Delta")]
    pub transition: f64,
    pub k_schedule: Vec<u32>,
    pub lemmas: Vec<LemmaReport>,
    pub steps: Vec<KStep>,
    /// Smallest scheduled `k` whose orbit converged without falling.
    pub smallest_k: Option<u32>,
    pub orbit: OrbitSummary,
    pub clauses: Vec<Clause>,
    pub pass: bool,
}

impl Certificate {
    pub fn first_failure(&self) -> Option<&Clause> {
        self.clauses.iter().find(|c| !c.pass)
    }
}

/// Run the lemma suite and the continuation, and evaluate every clause.
///
/// Clause failures are recorded in the certificate; `Err` means the
/// certificate could not be built (invalid input, continuation failure).
pub fn build_certificate(
    params: &Params,
    region: &RegionSpec,
    k_schedule: &[u32],
    opts: &CertificateOptions,
) -> Result<Certificate> {
    params.validate()?;
    region.validate()?;
    if k_schedule.is_empty() {
        return Err(Error::invalid("k_schedule", "must not be empty"));
    }
    if !(opts.transition > 0.0) {
        return Err(Error::invalid("Delta", "must be positive"));
    }
    let lemmas = check_lemma_suite(
        region,
        params,
        opts.lemma_samples,
        opts.seed,
        opts.phase_grid,
    )?;

    let seed = attractor_seed(
        &SystemKind::Averaged,
        params,
        opts.transient_periods * params.period,
        &opts.start,
        &opts.seed_control,
    )?;
    let plan = ContinuationPlan::over_k(params, k_schedule, seed, opts.newton)?;
    let orbits = continuation(&plan)?;
    let terminal = orbits
        .last()
        .expect("continuation returns one orbit per snapshot");

    let steps: Vec<KStep> = orbits[1..]
        .iter()
        .zip(k_schedule)
        .map(|(o, &k)| KStep {
            k,
            residual: o.residual,
            stable: o.stable,
            min_height: o.min_height,
        })
        .collect();
    let smallest_k = steps
        .iter()
        .filter(|s| s.residual < opts.newton.tol_res && s.min_height > 0.0)
        .map(|s| s.k)
        .min();

    let two_delta = 2.0 * opts.transition;
    let c2 = region.c * region.c;
    let mut clauses: Vec<Clause> = lemmas
        .iter()
        .map(|r| Clause::below(&format!("lemma_{}", r.lemma_id), r.worst_margin, 0.0))
        .collect();
    clauses.push(Clause::below(
        "residual",
        terminal.residual,
        opts.newton.tol_res,
    ));
    clauses.push(Clause::above(
        "min_height",
        terminal.min_height,
        region.delta,
    ));
    clauses.push(Clause::below("max_energy", terminal.max_energy, c2));
    clauses.push(Clause::above(
        "height_separation",
        terminal.min_height - region.delta,
        two_delta,
    ));
    clauses.push(Clause::above(
        "energy_separation",
        c2 - terminal.max_energy,
        two_delta,
    ));
    let pass = clauses.iter().all(|c| c.pass);
    Ok(Certificate {
        params: params.clone(),
        region: *region,
        transition: opts.transition,
        k_schedule: k_schedule.to_vec(),
        lemmas,
        steps,
        smallest_k,
        orbit: terminal.into(),
        clauses,
        pass,
    })
}

/// [`build_certificate`], failing with the first violated clause.
pub fn theorem1_certificate(
    params: &Params,
    region: &RegionSpec,
    k_schedule: &[u32],
    opts: &CertificateOptions,
) -> Result<Certificate> {
    let cert = build_certificate(params, region, k_schedule, opts)?;
    if let Some(c) = cert.first_failure() {
        return Err(Error::CertificateFailed {
            clause: format!(
                "{} (value {:e}, threshold {:e})",
                c.name, c.value, c.threshold
            ),
        });
    }
    Ok(cert)
}
