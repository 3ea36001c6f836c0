mod common;

use std::f64::consts::PI;
use std::sync::OnceLock;

use common::*;
use kapitza_core::dynamics::{ForcingSpec, Params, State, SystemKind};
use kapitza_core::integrate::StepControl;
use kapitza_core::orbits::{
    attractor_seed, continuation, find_orbit_newton, monodromy_fd, non_falling_check,
    orbit_extrema, orbit_point_at, strobe_map, ContinuationPlan, NewtonOptions, PeriodicOrbit,
    Snapshot,
};
use kapitza_core::Error;

fn seed_control() -> StepControl {
    StepControl::with_tolerance(1e-10, 1e-12)
}

fn tight() -> StepControl {
    StepControl::with_tolerance(1e-12, 1e-14)
}

fn seeded_orbit(p: &Params) -> PeriodicOrbit {
    let seed = attractor_seed(
        &SystemKind::Full,
        p,
        100.0 * T,
        &near_upright(),
        &seed_control(),
    )
    .unwrap();
    find_orbit_newton(&SystemKind::Full, p, &seed, &NewtonOptions::default()).unwrap()
}

/// The k = 10, A = 6 rotating-force orbit, shared between tests.
fn reference_orbit() -> &'static PeriodicOrbit {
    static ORBIT: OnceLock<PeriodicOrbit> = OnceLock::new();
    ORBIT.get_or_init(|| seeded_orbit(&cell(10, rotating(6.0))))
}

#[test]
fn strobes_from_the_seed_settle_on_the_orbit() {
    let orbit = reference_orbit();
    let p = &orbit.params;
    let mut x = attractor_seed(
        &SystemKind::Full,
        p,
        100.0 * T,
        &near_upright(),
        &seed_control(),
    )
    .unwrap();
    for _ in 0..50 {
        x = strobe_map(&x, 0.0, &SystemKind::Full, p, &tight()).unwrap();
    }
    assert!(x.wrapped().max_abs_diff(&orbit.x0.wrapped()) < 1e-8);
}

#[test]
fn residual_holds_at_tighter_tolerance() {
    let orbit = reference_orbit();
    let y = strobe_map(&orbit.x0, 0.0, &SystemKind::Full, &orbit.params, &tight()).unwrap();
    let residual = y.max_abs_diff(&orbit.x0);
    assert!(
        residual < 10.0 * NewtonOptions::default().tol_res,
        "{residual}"
    );
}

#[test]
fn orbit_is_periodic_from_any_base_time() {
    let orbit = reference_orbit();
    for t0 in [0.7, 2.0, 5.5] {
        let a = orbit_point_at(orbit, t0, &tight()).unwrap();
        let b = orbit_point_at(orbit, t0 + T, &tight()).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-10, "t0 = {t0}");
    }
}

#[test]
fn stability_flag_matches_perturbed_strobes() {
    let orbit = reference_orbit();
    assert!(orbit.stable);
    let mut x = State::new(
        orbit.x0.theta + 1e-4,
        orbit.x0.phi - 1e-4,
        orbit.x0.p_theta + 1e-4,
        orbit.x0.p_phi,
    );
    for _ in 0..100 {
        x = strobe_map(&x, 0.0, &SystemKind::Full, &orbit.params, &tight()).unwrap();
    }
    assert!(x.max_abs_diff(&orbit.x0) < 1e-6);
}

#[test]
fn multipliers_satisfy_liouville() {
    let orbit = reference_orbit();
    let m = monodromy_fd(orbit, 0.0, &tight()).unwrap();
    let expected = (-2.0 * orbit.params.mu * T).exp();
    assert!((m.determinant() - expected).abs() < 1e-6 * expected.max(1e-12) + 1e-12);
    let product = orbit
        .multipliers
        .iter()
        .fold(nalgebra::Complex::new(1.0, 0.0), |a, b| a * b);
    assert!((product.re - expected).abs() < 1e-8 && product.im.abs() < 1e-8);
}

#[test]
fn extrema_agree_with_stored_values() {
    let orbit = reference_orbit();
    let e = orbit_extrema(orbit, 4000, &tight()).unwrap();
    // sampled extrema of a fast-oscillating signal: agreement up to the
    // sampling resolution of the stored run
    assert!((e.min_height - orbit.min_height).abs() < 1e-3);
    assert!((e.max_energy - orbit.max_energy).abs() < 1e-3 * orbit.max_energy);
    assert!(e.min_height <= orbit.min_height + 1e-12);
    assert!(e.min_height <= e.max_height && e.max_height <= 1.0);
    assert_eq!(
        non_falling_check(orbit, 4000, &tight()).unwrap(),
        e.min_height
    );
}

#[test]
fn k_continuation_reaches_the_direct_orbit() {
    let direct = reference_orbit();
    let p = &direct.params;
    let seed = attractor_seed(
        &SystemKind::Averaged,
        p,
        100.0 * T,
        &near_upright(),
        &seed_control(),
    )
    .unwrap();
    let plan = ContinuationPlan::over_k(p, &[50, 20, 10], seed, NewtonOptions::default()).unwrap();
    let orbits = continuation(&plan).unwrap();
    assert_eq!(orbits.len(), 4);
    assert_eq!(orbits[0].kind, SystemKind::Averaged);
    let ks: Vec<_> = orbits[1..].iter().map(|o| o.params.k()).collect();
    assert_eq!(ks, [Some(50), Some(20), Some(10)]);
    let terminal = orbits.last().unwrap();
    assert!(terminal.x0.wrapped().max_abs_diff(&direct.x0.wrapped()) < 1e-6);
}

#[test]
fn forcing_amplitude_continuation_from_upright() {
    // at k = 20 the unforced upright orbit is stable and seeds the A ramp
    let snaps: Vec<Snapshot> = [0.0, 1.5, 3.0, 4.5, 6.0]
        .iter()
        .map(|&amp| Snapshot {
            kind: SystemKind::Full,
            params: cell(
                20,
                if amp == 0.0 {
                    ForcingSpec::Zero
                } else {
                    rotating(amp)
                },
            ),
        })
        .collect();
    let plan = ContinuationPlan {
        schedule: snaps,
        seed: State::upright(),
        options: NewtonOptions::default(),
    };
    let orbits = continuation(&plan).unwrap();
    assert!(orbits[0].x0.max_abs_diff(&State::upright()) < 1e-6);
    assert!(orbits[0].stable);
    let direct = seeded_orbit(&cell(20, rotating(6.0)));
    let terminal = orbits.last().unwrap();
    assert!(terminal.x0.wrapped().max_abs_diff(&direct.x0.wrapped()) < 1e-6);
    assert!(terminal.stable);
}

#[test]
fn upright_is_parametrically_unstable_at_k10() {
    // the same vibration that stabilizes the averaged upright fails at k = 10
    let p = cell(10, ForcingSpec::Zero);
    let avg = find_orbit_newton(
        &SystemKind::Averaged,
        &p,
        &State::upright(),
        &NewtonOptions::default(),
    )
    .unwrap();
    assert!(avg.stable);
    let full = find_orbit_newton(
        &SystemKind::Full,
        &p,
        &State::upright(),
        &NewtonOptions::default(),
    )
    .unwrap();
    assert!(full.x0.max_abs_diff(&State::upright()) < 1e-8);
    assert!(!full.stable);
    assert!(full.max_multiplier_modulus() > 10.0);
}

#[test]
fn single_snapshot_plan_is_one_newton_solve() {
    let p = cell(50, rotating(6.0));
    let seed = attractor_seed(
        &SystemKind::Full,
        &p,
        20.0 * T,
        &near_upright(),
        &seed_control(),
    )
    .unwrap();
    let opts = NewtonOptions::default();
    let plan = ContinuationPlan {
        schedule: vec![Snapshot {
            kind: SystemKind::Full,
            params: p.clone(),
        }],
        seed,
        options: opts,
    };
    let via_plan = continuation(&plan).unwrap();
    let direct = find_orbit_newton(&SystemKind::Full, &p, &seed, &opts).unwrap();
    assert_eq!(via_plan.len(), 1);
    assert_eq!(via_plan[0].x0, direct.x0);
    assert_eq!(via_plan[0].iterations, direct.iterations);
}

#[test]
fn plans_changing_two_parameters_are_rejected() {
    let plan = ContinuationPlan {
        schedule: vec![
            Snapshot {
                kind: SystemKind::Full,
                params: cell(20, rotating(1.0)),
            },
            Snapshot {
                kind: SystemKind::Full,
                params: cell(10, rotating(2.0)),
            },
        ],
        seed: State::upright(),
        options: NewtonOptions::default(),
    };
    assert!(matches!(
        continuation(&plan),
        Err(Error::InvalidParams {
            field: "schedule",
            ..
        })
    ));
}

#[test]
fn newton_gives_up_with_the_last_iterate() {
    let p = cell(10, rotating(6.0));
    let opts = NewtonOptions {
        max_iter: 1,
        ..NewtonOptions::default()
    };
    let guess = State::new(0.4, 1.0, 0.3, -0.2);
    match find_orbit_newton(&SystemKind::Full, &p, &guess, &opts) {
        Err(Error::NoConvergence {
            iterations,
            residual,
            last,
        }) => {
            assert!(iterations <= 1);
            assert!(residual > opts.tol_res);
            assert!(last.iter().all(|v| v.is_finite()));
        }
        other => panic!("expected NoConvergence, got {other:?}"),
    }
}

#[test]
fn guess_off_the_chart_is_a_guard_hit() {
    let p = cell(10, rotating(6.0));
    let guess = State::new(PI / 2.0, 0.0, 0.0, 0.0);
    assert!(matches!(
        find_orbit_newton(&SystemKind::Full, &p, &guess, &NewtonOptions::default()),
        Err(Error::GuardHit { .. })
    ));
}

#[test]
fn orbit_round_trips_through_json() {
    let orbit = reference_orbit();
    let text = serde_json::to_string(orbit).unwrap();
    let back: PeriodicOrbit = serde_json::from_str(&text).unwrap();
    assert_eq!(back.x0, orbit.x0);
    assert_eq!(back.multipliers, orbit.multipliers);
    assert_eq!(back.params, orbit.params);
}
