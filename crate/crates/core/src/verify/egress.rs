use serde::{Deserialize, Serialize};

use super::RegionSpec;
use crate::dynamics::{energy_rate, height_accel, height_rate, Branch, Params, State, SystemKind};
use crate::error::{Error, Result};

/// Distance in `g` (absolute) or `E / c²` (relative) within which a point
/// counts as on a boundary face, and the band in which `ġ` counts as zero.
pub const BOUNDARY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryClass {
    /// Leaves the region immediately.
    Egress,
    /// Enters the region immediately.
    Ingress,
    /// `ġ = 0`, `g̈ < 0`: touches the height face and leaves on both sides.
    TangentExit,
    /// On the energy shell with `Ė < 0`: the flow points inward.
    InteriorBoundary,
}

/// Classify a boundary point of `M` by the local direction of the flow.
///
/// The closed forms assume the cutoff vanishes on the boundary, so the
/// full and modified systems use the instantaneous `ḣ(t0)²` and the averaged
/// system `a²ω²/2`. A height-face tangency with `g̈ ≥ 0` stays in `M` to
/// second order and is reported as [`BoundaryClass::Ingress`]. A shell point
/// with `Ė ≥ 0` is reported as [`BoundaryClass::Egress`].
pub fn egress_classify(
    x: &State,
    region: &RegionSpec,
    params: &Params,
    kind: &SystemKind,
    t0: f64,
) -> Result<BoundaryClass> {
    region.validate()?;
    let branch = match kind {
        SystemKind::Averaged => Branch::Averaged,
        _ => Branch::Modified,
    };
    let dg = region.height_defect(x);
    let de = region.energy_defect(x);
    let c2 = region.c * region.c;
    let on_face = dg.abs() <= BOUNDARY_TOLERANCE && de <= BOUNDARY_TOLERANCE * c2;
    let on_shell = de.abs() <= BOUNDARY_TOLERANCE * c2 && dg >= -BOUNDARY_TOLERANCE;

    if on_face {
        let rate = height_rate(x)?;
        return Ok(if rate < -BOUNDARY_TOLERANCE {
            BoundaryClass::Egress
        } else if rate > BOUNDARY_TOLERANCE {
            BoundaryClass::Ingress
        } else if height_accel(x, t0, params, branch)? < 0.0 {
            BoundaryClass::TangentExit
        } else {
            BoundaryClass::Ingress
        });
    }
    if on_shell {
        return Ok(if energy_rate(x, t0, params, branch)? < 0.0 {
            BoundaryClass::InteriorBoundary
        } else {
            BoundaryClass::Egress
        });
    }
    Err(Error::NotOnBoundary {
        height_defect: dg,
        energy_defect: de,
    })
}
