use serde::{Deserialize, Serialize};

use super::{find_orbit_newton, NewtonOptions, PeriodicOrbit};
use crate::dynamics::{ForcingSpec, Params, State, SystemKind};
use crate::error::{Error, Result};

/// Maximum number of step bisections between two scheduled snapshots.
pub const MAX_BISECTIONS: usize = 8;

/// One parameter point of a continuation schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub kind: SystemKind,
    pub params: Params,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContinuationPlan {
    pub schedule: Vec<Snapshot>,
    pub seed: State,
    #[serde(default)]
    pub options: NewtonOptions,
}

impl ContinuationPlan {
    /// Averaged system followed by the full system at each `k` in order.
    pub fn over_k(
        params: &Params,
        ks: &[u32],
        seed: State,
        options: NewtonOptions,
    ) -> Result<Self> {
        let mut schedule = vec![Snapshot {
            kind: SystemKind::Averaged,
            params: params.clone(),
        }];
        for &k in ks {
            let mut p = params.clone();
            p.epsilon = 1.0 / k as f64;
            p.validate()?;
            schedule.push(Snapshot {
                kind: SystemKind::Full,
                params: p,
            });
        }
        let plan = Self {
            schedule,
            seed,
            options,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schedule.is_empty() {
            return Err(Error::invalid("schedule", "must not be empty"));
        }
        for (i, w) in self.schedule.windows(2).enumerate() {
            if changed_parameters(&w[0], &w[1]) > 1 {
                return Err(Error::invalid(
                    "schedule",
                    format!(
                        "snapshots {i} and {} differ in more than one parameter",
                        i + 1
                    ),
                ));
            }
        }
        Ok(())
    }
}

/// The fast scale (system kind together with `ε`) counts as one parameter, as
/// does the forcing.
fn changed_parameters(a: &Snapshot, b: &Snapshot) -> usize {
    let fast = match (&a.kind, &b.kind) {
        (SystemKind::Averaged, SystemKind::Averaged) => false,
        (x, y) if x == y => a.params.epsilon != b.params.epsilon,
        _ => true,
    };
    [
        fast,
        a.params.a != b.params.a,
        a.params.period != b.params.period,
        a.params.mu != b.params.mu,
        a.params.forcing != b.params.forcing,
    ]
    .iter()
    .filter(|&&d| d)
    .count()
}

fn lerp(x: f64, y: f64, s: f64) -> f64 {
    x + s * (y - x)
}

fn lerp_vec(x: &[f64], y: &[f64], s: f64) -> Vec<f64> {
    let n = x.len().max(y.len());
    (0..n)
        .map(|i| {
            lerp(
                x.get(i).copied().unwrap_or(0.0),
                y.get(i).copied().unwrap_or(0.0),
                s,
            )
        })
        .collect()
}

/// Zero forcing is treated as the zero-amplitude member of the other family.
fn lerp_forcing(from: &ForcingSpec, to: &ForcingSpec, s: f64) -> Option<ForcingSpec> {
    use ForcingSpec::*;
    Some(match (from, to) {
        (Zero, Zero) => Zero,
        (Rotating { amplitude: x }, Rotating { amplitude: y }) => Rotating {
            amplitude: lerp(*x, *y, s),
        },
        (Zero, Rotating { amplitude }) => Rotating {
            amplitude: s * amplitude,
        },
        (Rotating { amplitude }, Zero) => Rotating {
            amplitude: (1.0 - s) * amplitude,
        },
        (
            OscillatingAngle {
                amplitude: x,
                alpha: ax,
            },
            OscillatingAngle {
                amplitude: y,
                alpha: ay,
            },
        ) => OscillatingAngle {
            amplitude: lerp(*x, *y, s),
            alpha: lerp(*ax, *ay, s),
        },
        (Zero, OscillatingAngle { amplitude, alpha }) => OscillatingAngle {
            amplitude: s * amplitude,
            alpha: *alpha,
        },
        (OscillatingAngle { amplitude, alpha }, Zero) => OscillatingAngle {
            amplitude: (1.0 - s) * amplitude,
            alpha: *alpha,
        },
        (
            FourierPair {
                px_cos,
                px_sin,
                pz_cos,
                pz_sin,
            },
            FourierPair {
                px_cos: qx_cos,
                px_sin: qx_sin,
                pz_cos: qz_cos,
                pz_sin: qz_sin,
            },
        ) => FourierPair {
            px_cos: lerp_vec(px_cos, qx_cos, s),
            px_sin: lerp_vec(px_sin, qx_sin, s),
            pz_cos: lerp_vec(pz_cos, qz_cos, s),
            pz_sin: lerp_vec(pz_sin, qz_sin, s),
        },
        _ => return None,
    })
}

/// Snapshot a fraction `s ∈ (0, 1]` of the way from `from` to `to`, or `None`
/// when no admissible intermediate exists. Intermediate `ε` stays of the form
/// `1/k`; leaving the averaged system goes through `k_target / s`.
fn intermediate(from: &Snapshot, to: &Snapshot, s: f64) -> Option<Snapshot> {
    if s >= 1.0 {
        return Some(to.clone());
    }
    let mut params = to.params.clone();
    params.a = lerp(from.params.a, to.params.a, s);
    params.period = lerp(from.params.period, to.params.period, s);
    params.mu = lerp(from.params.mu, to.params.mu, s);
    params.forcing = lerp_forcing(&from.params.forcing, &to.params.forcing, s)?;
    if to.kind.is_fast() {
        let k_to = to.params.k()? as f64;
        let k = match from.kind {
            SystemKind::Averaged => (k_to / s).round(),
            _ => lerp(from.params.k()? as f64, k_to, s).round(),
        };
        if from.kind.is_fast() && from.params.k() == Some(k as u32) && k != k_to {
            return None;
        }
        if !(k >= 1.0 && k <= u32::MAX as f64) {
            return None;
        }
        params.epsilon = 1.0 / k;
    }
    Some(Snapshot {
        kind: to.kind,
        params,
    })
}

/// Follow a periodic orbit along the schedule. Each converged orbit seeds the
/// next snapshot; a failed step is halved up to [`MAX_BISECTIONS`] times.
pub fn continuation(plan: &ContinuationPlan) -> Result<Vec<PeriodicOrbit>> {
    plan.validate()?;
    let opts = &plan.options;
    let first = &plan.schedule[0];
    let mut current =
        find_orbit_newton(&first.kind, &first.params, &plan.seed, opts).map_err(|e| {
            Error::ContinuationStuck {
                snapshot: 0,
                partial: Vec::new(),
                cause: Box::new(e),
            }
        })?;
    let mut orbits = vec![current.clone()];
    let mut base = first.clone();

    for (i, target) in plan.schedule.iter().enumerate().skip(1) {
        let mut bisections = 0;
        let mut s = 1.0;
        loop {
            let attempt = intermediate(&base, target, s)
                .ok_or(Error::invalid("schedule", "no intermediate snapshot"))
                .and_then(|snap| {
                    find_orbit_newton(&snap.kind, &snap.params, &current.x0, opts)
                        .map(|o| (snap, o))
                });
            match attempt {
                Ok((snap, orbit)) => {
                    current = orbit;
                    base = snap;
                    if s >= 1.0 {
                        break;
                    }
                    s = 1.0;
                }
                Err(e) => {
                    if bisections == MAX_BISECTIONS {
                        return Err(Error::ContinuationStuck {
                            snapshot: i,
                            partial: orbits,
                            cause: Box::new(e),
                        });
                    }
                    bisections += 1;
                    s *= 0.5;
                }
            }
        }
        orbits.push(current.clone());
    }
    Ok(orbits)
}
