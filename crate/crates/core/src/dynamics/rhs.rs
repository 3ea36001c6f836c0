use super::{bump_chi, BumpConfig, Params, State, SystemKind, CHART_GUARD};
use crate::error::{Error, Result};

struct Trig {
    st: f64,
    ct: f64,
    sp: f64,
    cp: f64,
}

fn trig(x: &State) -> Result<Trig> {
    let ct = x.theta.cos();
    if !(ct.abs() >= CHART_GUARD) {
        return Err(Error::ChartSingularity { cos_theta: ct });
    }
    Ok(Trig {
        st: x.theta.sin(),
        ct,
        sp: x.phi.sin(),
        cp: x.phi.cos(),
    })
}

/// Pivot contributions entering the modified vector field: the velocity `ḣ`,
/// the value used for `ḣ²`, and the cutoff `χ` multiplying the terms linear in `ḣ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PivotTerms {
    pub hdot: f64,
    pub hdot_sq: f64,
    pub chi: f64,
}

/// Full system: Lagrange equations in momentum form with viscous friction
/// on the velocity relative to the pivot.
pub fn rhs_full(t: f64, x: &State, params: &Params) -> Result<State> {
    let Trig { st, ct, sp, cp } = trig(x)?;
    let hd = params.pivot_velocity(t);
    let (px, pz) = params.forcing_at(t);
    let mu = params.mu;

    let theta_dot = x.p_theta + hd * st * sp;
    let phi_dot = (x.p_phi - hd * ct * cp) / (ct * ct);
    let p_theta_dot = -phi_dot * phi_dot * ct * st
        - hd * theta_dot * ct * sp
        - hd * phi_dot * st * cp
        - mu * theta_dot
        + st * sp
        - px * st * cp
        + pz * ct;
    let p_phi_dot = -hd * theta_dot * st * cp
        - hd * phi_dot * ct * sp
        - ct * cp
        - mu * phi_dot * ct * ct
        - px * ct * sp;
    Ok(State::new(theta_dot, phi_dot, p_theta_dot, p_phi_dot))
}

/// Modified vector field for explicit pivot terms and forcing values.
///
/// The `ḣ²` terms are always present; `χ` multiplies exactly the terms that are
/// linear in `ḣ`. With `χ = 1` and `hdot_sq = hdot²` this is the full system
/// with the velocities expanded in terms of the momenta.
pub fn modified_terms(x: &State, pivot: PivotTerms, px: f64, pz: f64, mu: f64) -> Result<State> {
    let Trig { st, ct, sp, cp } = trig(x)?;
    let PivotTerms {
        hdot: hd,
        hdot_sq: hd2,
        chi,
    } = pivot;
    let (pt, pp) = (x.p_theta, x.p_phi);
    let ct3 = ct * ct * ct;

    let theta_dot = pt + chi * hd * st * sp;
    let phi_dot = (pp - chi * hd * ct * cp) / (ct * ct);

    let mut p_theta_dot =
        -(pp * pp - 2.0 * chi * pp * hd * cp * ct + hd2 * cp * cp * ct * ct) * st / ct3;
    p_theta_dot += -mu * theta_dot;
    p_theta_dot += st * sp;
    p_theta_dot -= px * st * cp;
    p_theta_dot += pz * ct;
    p_theta_dot -= hd2 * st * ct * sp * sp;
    p_theta_dot += hd2 * st * cp * cp / ct;
    p_theta_dot -= chi * hd * pt * ct * sp;
    p_theta_dot -= chi * hd * pp * st * cp / (ct * ct);

    // μ φ̇ cos²θ written as μ (p_φ − χ ḣ cos θ cos φ)
    let mut p_phi_dot = -ct * cp;
    p_phi_dot += -mu * (pp - chi * hd * ct * cp);
    p_phi_dot -= px * ct * sp;
    p_phi_dot -= hd2 * st * st * cp * sp;
    p_phi_dot += hd2 * cp * sp;
    p_phi_dot -= chi * hd * pt * st * cp;
    p_phi_dot -= chi * hd * pp * sp / ct;

    Ok(State::new(theta_dot, phi_dot, p_theta_dot, p_phi_dot))
}

/// Modified system: the full system with the terms linear in `ḣ` multiplied by
/// the cutoff `χ_{c,δ}`.
pub fn rhs_modified(t: f64, x: &State, params: &Params, bump: &BumpConfig) -> Result<State> {
    let hdot = params.pivot_velocity(t);
    let (px, pz) = params.forcing_at(t);
    let pivot = PivotTerms {
        hdot,
        hdot_sq: hdot * hdot,
        chi: bump_chi(x, bump),
    };
    modified_terms(x, pivot, px, pz, params.mu)
}

/// Averaged system at slow phase `s`: `ḣ` replaced by 0 and `ḣ²` by `a²ω²/2`.
pub fn rhs_averaged(x: &State, s: f64, params: &Params) -> Result<State> {
    let Trig { st, ct, sp, cp } = trig(x)?;
    let (px, pz) = params.forcing_at(s);
    let mu = params.mu;
    let w2 = params.mean_square_pivot_velocity();
    let (pt, pp) = (x.p_theta, x.p_phi);
    let ct3 = ct * ct * ct;

    let theta_dot = pt;
    let phi_dot = pp / (ct * ct);

    let mut p_theta_dot = -(pp * pp + w2 * cp * cp * ct * ct) * st / ct3;
    p_theta_dot += -mu * pt;
    p_theta_dot += st * sp;
    p_theta_dot -= px * st * cp;
    p_theta_dot += pz * ct;
    p_theta_dot -= w2 * st * ct * sp * sp;
    p_theta_dot += w2 * st * cp * cp / ct;

    let mut p_phi_dot = -ct * cp;
    p_phi_dot += -mu * pp;
    p_phi_dot -= px * ct * sp;
    p_phi_dot -= w2 * st * st * cp * sp;
    p_phi_dot += w2 * cp * sp;

    Ok(State::new(theta_dot, phi_dot, p_theta_dot, p_phi_dot))
}

/// Dispatch on the system kind; for the averaged system the phase is `s = t`.
pub fn rhs(kind: &SystemKind, t: f64, x: &State, params: &Params) -> Result<State> {
    match kind {
        SystemKind::Full => rhs_full(t, x, params),
        SystemKind::Modified { bump } => rhs_modified(t, x, params, bump),
        SystemKind::Averaged => rhs_averaged(x, t, params),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::ForcingSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn reference(a: f64, amp: f64) -> Params {
        Params::with_k(
            10,
            a,
            2.0 * PI,
            1.0,
            ForcingSpec::Rotating { amplitude: amp },
        )
        .unwrap()
    }

    fn random_state(rng: &mut ChaCha8Rng) -> State {
        State::new(
            rng.random_range(-1.3..1.3),
            rng.random_range(-PI..PI),
            rng.random_range(-3.0..3.0),
            rng.random_range(-3.0..3.0),
        )
    }

    fn rel_diff(a: &State, b: &State) -> f64 {
        a.max_abs_diff(b) / a.norm_inf().max(1.0)
    }

    #[test]
    fn unforced_upright_is_rest_point() {
        let p = Params::with_k(10, 0.0, 2.0 * PI, 1.0, ForcingSpec::Zero).unwrap();
        let d = rhs_full(0.3, &State::upright(), &p).unwrap();
        assert!(d.norm_inf() < 1e-15);
    }

    #[test]
    fn unforced_frictionless_at_origin() {
        let p = Params::with_k(10, 0.0, 2.0 * PI, 0.0, ForcingSpec::Zero).unwrap();
        let d = rhs_full(0.0, &State::default(), &p).unwrap();
        assert_eq!(d, State::new(0.0, 0.0, 0.0, -1.0));
    }

    #[test]
    fn chart_guard_rejects_pole() {
        let p = reference(5.0, 6.0);
        let x = State::new(PI / 2.0, 0.3, 0.0, 0.0);
        assert!(matches!(
            rhs_full(0.0, &x, &p),
            Err(Error::ChartSingularity { .. })
        ));
        assert!(rhs_averaged(&x, 0.0, &p).is_err());
    }

    #[test]
    fn modified_with_unit_cutoff_is_full() {
        let p = reference(5.0, 6.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let x = random_state(&mut rng);
            let t = rng.random_range(0.0..10.0);
            let hd = p.pivot_velocity(t);
            let (px, pz) = p.forcing_at(t);
            let pivot = PivotTerms {
                hdot: hd,
                hdot_sq: hd * hd,
                chi: 1.0,
            };
            let m = modified_terms(&x, pivot, px, pz, p.mu).unwrap();
            let f = rhs_full(t, &x, &p).unwrap();
            assert!(rel_diff(&f, &m) < 1e-13, "{f:?} vs {m:?}");
        }
    }

    #[test]
    fn modified_on_height_face_drops_linear_terms() {
        let p = reference(5.0, 6.0);
        let bump = BumpConfig::new(40.0, 0.1, 1e-3).unwrap();
        let theta: f64 = 0.4;
        let phi = (0.1 / theta.cos()).asin();
        let x = State::new(theta, phi, 0.7, -0.3);
        assert_eq!(bump.chi(&x), 0.0);
        let d = rhs_modified(1.234, &x, &p, &bump).unwrap();
        assert_eq!(d.theta, x.p_theta);
        assert_eq!(d.phi, x.p_phi / (theta.cos() * theta.cos()));
    }

    #[test]
    fn averaging_identity_is_exact() {
        let p = reference(5.0, 6.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let x = random_state(&mut rng);
            let s = rng.random_range(0.0..7.0);
            let (px, pz) = p.forcing_at(s);
            let pivot = PivotTerms {
                hdot: 0.0,
                hdot_sq: p.mean_square_pivot_velocity(),
                chi: 1.0,
            };
            let m = modified_terms(&x, pivot, px, pz, p.mu).unwrap();
            assert_eq!(rhs_averaged(&x, s, &p).unwrap(), m);
        }
    }

    #[test]
    fn averaged_unforced_upright_at_rest() {
        let p = Params::with_k(10, 5.0, 2.0 * PI, 1.0, ForcingSpec::Zero).unwrap();
        for s in [0.0, 1.0, 4.0] {
            let d = rhs_averaged(&State::upright(), s, &p).unwrap();
            assert!(d.norm_inf() < 1e-15);
        }
    }

    #[test]
    fn averaged_is_period_mean_of_full_at_frozen_state() {
        // Midpoint quadrature is exact for the trigonometric polynomials in t
        // that appear at a frozen state.
        let p = reference(5.0, 6.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 20_000;
        for _ in 0..20 {
            let x = random_state(&mut rng);
            let mut full = [0.0; 4];
            let mut avg = [0.0; 4];
            for i in 0..n {
                let t = p.period * (i as f64 + 0.5) / n as f64;
                let f = rhs_full(t, &x, &p).unwrap().to_array();
                let g = rhs_averaged(&x, t, &p).unwrap().to_array();
                for j in 0..4 {
                    full[j] += f[j] / n as f64;
                    avg[j] += g[j] / n as f64;
                }
            }
            let err = State::from_array(full).max_abs_diff(&State::from_array(avg));
            let scale = State::from_array(avg).norm_inf().max(1.0);
            assert!(err < 1e-10 * scale, "err = {err}");
        }
    }
}
