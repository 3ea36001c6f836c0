use std::path::{Path, PathBuf};

use anyhow::Context;
use kapitza_core::dynamics::{height, ForcingSpec, State, SystemKind};
use kapitza_core::integrate::{integrate, Sampling, TrajectoryStatus};
use kapitza_core::orbits::{
    attractor_seed, continuation, find_orbit_newton, floquet, monodromy_fd, monodromy_var,
    relative_difference, strobe_map, ContinuationPlan, NewtonOptions, PeriodicOrbit,
};
use kapitza_core::verify::{avg_compare, check_lemma, AvgCompareOptions, RegionSpec};
use kapitza_core::Complex;
use rayon::prelude::*;

use crate::config::{state, RunConfig, SeedStrategy};
use crate::failure::Failure;
use crate::output::*;

/// Where results go and whether to print progress.
pub struct Io {
    pub out: Option<PathBuf>,
    pub quiet: bool,
}

impl Io {
    pub fn emit(&self, text: &str) -> Result<(), Failure> {
        match &self.out {
            Some(path) => std::fs::write(path, text)
                .with_context(|| format!("cannot write {}", path.display()))?,
            None => print!("{text}"),
        }
        Ok(())
    }

    pub fn note(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

pub fn simulate(cfg: &RunConfig, io: &Io) -> Result<(), Failure> {
    let sim = cfg.block(&cfg.simulate, "simulate")?;
    let params = cfg.params()?;
    let kind = cfg.kind()?;
    let sampling = match sim.dt {
        Some(dt) if dt > 0.0 => Sampling::Every(dt),
        Some(_) => {
            return Err(Failure::Config(
                "invalid parameter `dt`: must be positive".into(),
            ))
        }
        None => Sampling::Steps,
    };
    let traj = integrate(
        &kind,
        sim.t0,
        state(sim.x0),
        sim.t1,
        &params,
        &cfg.integrator,
        sampling,
    )?;
    let mut buf = Vec::new();
    write_trajectory_csv(&mut buf, &traj).context("formatting trajectory")?;
    io.emit(std::str::from_utf8(&buf).expect("CSV is ASCII"))?;
    let end = traj.last().map_or(sim.t0, |(t, _)| t);
    match traj.status {
        TrajectoryStatus::Completed => {
            io.note(format!("simulate: {} rows up to t = {end}", traj.len()));
            Ok(())
        }
        TrajectoryStatus::Singular { t } => Err(Failure::Fall(format!(
            "trajectory reached the chart singularity at t = {t}"
        ))),
        TrajectoryStatus::StepUnderflow { t } => Err(Failure::Integrator(format!(
            "step size underflow at t = {t}"
        ))),
        TrajectoryStatus::MaxSteps { t } => Err(Failure::Integrator(format!(
            "step limit reached at t = {t}"
        ))),
    }
}

fn find(cfg: &RunConfig) -> Result<(PeriodicOrbit, NewtonOptions), Failure> {
    let orbit_cfg = cfg.orbit.clone().unwrap_or_default();
    let params = cfg.params()?;
    let kind = cfg.kind()?;
    let opts = orbit_cfg.newton;
    let seed_control = cfg.integrator;
    let orbit = match orbit_cfg.seed {
        SeedStrategy::Explicit { x0 } => find_orbit_newton(&kind, &params, &state(x0), &opts)?,
        SeedStrategy::Attractor {
            transient_periods,
            start,
        } => {
            let seed = attractor_seed(
                &kind,
                &params,
                transient_periods * params.period,
                &state(start),
                &seed_control,
            )?;
            find_orbit_newton(&kind, &params, &seed, &opts)?
        }
        SeedStrategy::Continuation {
            k_schedule,
            transient_periods,
            start,
        } => {
            if kind != SystemKind::Full {
                return Err(Failure::Config(
                    "invalid parameter `k_schedule`: continuation in k applies to the full system"
                        .into(),
                ));
            }
            let seed = attractor_seed(
                &SystemKind::Averaged,
                &params,
                transient_periods * params.period,
                &state(start),
                &seed_control,
            )?;
            let plan = ContinuationPlan::over_k(&params, &k_schedule, seed, opts)?;
            continuation(&plan)?.pop().expect("non-empty schedule")
        }
    };
    Ok((orbit, opts))
}

pub fn find_orbit(cfg: &RunConfig, io: &Io) -> Result<(), Failure> {
    let (orbit, opts) = find(cfg)?;
    io.emit(&to_json(&OrbitFile::new(&orbit, &opts))?)?;
    io.note(format!(
        "find-orbit: residual {:.3e}, max |multiplier| {:.6}, stable {}, min height {:.6}",
        orbit.residual,
        orbit.max_multiplier_modulus(),
        orbit.stable,
        orbit.min_height
    ));
    Ok(())
}

fn pairs(z: [Complex<f64>; 4]) -> [[f64; 2]; 4] {
    z.map(|z| [z.re, z.im])
}

/// Residual recheck allowance: ten times the stored value, with a floor at
/// the rounding level of a single strobe.
fn recheck_bound(stored: f64) -> f64 {
    10.0 * stored.max(1e-14)
}

pub fn floquet_cmd(orbit_path: &Path, io: &Io) -> Result<(), Failure> {
    let text = std::fs::read_to_string(orbit_path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", orbit_path.display())))?;
    let file =
        OrbitFile::parse(&text).map_err(|e| Failure::Config(format!("orbit file: {e:#}")))?;
    file.params.validate()?;
    file.control.validate()?;
    let x0 = state(file.x0);
    let image = strobe_map(&x0, 0.0, &file.kind, &file.params, &file.control)?;
    let recomputed = image.max_abs_diff(&x0);
    if !(recomputed <= recheck_bound(file.residual)) {
        return Err(Failure::NoConvergence(format!(
            "stored residual {:e} not reproduced: recomputed {recomputed:e}",
            file.residual
        )));
    }
    let orbit = PeriodicOrbit {
        kind: file.kind,
        params: file.params.clone(),
        x0,
        period: file.period,
        residual: recomputed,
        multipliers: file.multipliers.map(|[re, im]| Complex::new(re, im)),
        stable: file.stable,
        min_height: file.min_height,
        max_energy: file.max_energy,
        iterations: file.iterations,
        trajectory: None,
    };
    let fd = monodromy_fd(&orbit, 0.0, &file.control)?;
    let var = monodromy_var(&orbit, 0.0, &file.control)?;
    let mult = floquet(&fd);
    let moduli = mult.map(|z| z.norm());
    let report = FloquetFile {
        format_version: FORMAT_VERSION,
        stored_residual: file.residual,
        recomputed_residual: recomputed,
        multipliers_fd: pairs(mult),
        multipliers_var: pairs(floquet(&var)),
        moduli,
        fd_var_difference: relative_difference(&fd, &var),
        determinant: fd.determinant(),
        liouville: (-2.0 * file.params.mu * file.period).exp(),
        stable: moduli.iter().all(|m| *m < 1.0),
    };
    io.emit(&to_json(&report)?)?;
    io.note(format!(
        "floquet: residual {recomputed:.3e} (stored {:.3e}), moduli {:?}",
        file.residual, moduli
    ));
    Ok(())
}

pub fn check_lemmas(cfg: &RunConfig, io: &Io) -> Result<(), Failure> {
    let lemma = cfg.block(&cfg.lemma, "lemma")?;
    let params = cfg.params()?;
    let r = cfg.region()?;
    let region = RegionSpec::new(r.c, r.delta)?;
    let reports = lemma
        .ids
        .iter()
        .map(|&id| check_lemma(id, &region, &params, lemma.n, lemma.seed, lemma.phase_grid))
        .collect::<Result<Vec<_>, _>>()?;
    let all_pass = reports.iter().all(|r| r.pass);
    for r in &reports {
        io.note(format!(
            "lemma {}: {} (worst margin {:.6e})",
            r.lemma_id,
            if r.pass { "pass" } else { "FAIL" },
            r.worst_margin
        ));
    }
    io.emit(&to_json(&LemmaFile {
        format_version: FORMAT_VERSION,
        params,
        region,
        all_pass,
        reports,
    })?)
}

pub fn avg_compare_cmd(cfg: &RunConfig, io: &Io) -> Result<(), Failure> {
    let avg = cfg.block(&cfg.avg, "avg")?;
    let params = cfg.params()?;
    let opts = AvgCompareOptions {
        samples: avg.samples,
        control: cfg.integrator,
    };
    let report = avg_compare(
        &params,
        &state(avg.x0),
        avg.periods * params.period,
        &avg.epsilons,
        &opts,
    )?;
    io.note(format!(
        "avg-compare: observed order {:.4}",
        report.observed_order
    ));
    io.emit(&to_json(&AvgFile {
        format_version: FORMAT_VERSION,
        params,
        x0: avg.x0,
        report,
    })?)
}

fn sweep_cell(
    cfg: &RunConfig,
    kind: &SystemKind,
    k: u32,
    forcing: &ForcingSpec,
) -> Result<SweepRow, Failure> {
    let sweep = cfg.block(&cfg.sweep, "sweep")?;
    let mut params = cfg.params()?;
    params.epsilon = 1.0 / k as f64;
    params.forcing = forcing.clone();
    params.validate()?;
    let mut row = SweepRow {
        k,
        amplitude: forcing.amplitude().unwrap_or(0.0),
        alpha: forcing.alpha(),
        converged: false,
        stable: false,
        min_height: f64::NAN,
        max_multiplier_modulus: f64::NAN,
    };
    let orbit = attractor_seed(
        kind,
        &params,
        sweep.transient_periods * params.period,
        &state(sweep.start),
        &cfg.integrator,
    )
    .and_then(|seed| find_orbit_newton(kind, &params, &seed, &sweep.newton));
    if let Ok(o) = orbit {
        row.converged = true;
        row.stable = o.stable;
        row.min_height = o.min_height;
        row.max_multiplier_modulus = o.max_multiplier_modulus();
    }
    Ok(row)
}

pub fn sweep(cfg: &RunConfig, io: &Io, jobs: usize) -> Result<(), Failure> {
    let sweep = cfg.block(&cfg.sweep, "sweep")?;
    let kind = cfg.kind()?;
    for f in &sweep.forcings {
        f.validate()?;
    }
    let mut cells: Vec<(u32, &ForcingSpec)> = sweep
        .k
        .iter()
        .flat_map(|&k| sweep.forcings.iter().map(move |f| (k, f)))
        .collect();
    let key = |k: u32, f: &ForcingSpec| {
        (
            k,
            f.amplitude().unwrap_or(0.0),
            f.alpha().unwrap_or(f64::NEG_INFINITY),
        )
    };
    cells.sort_by(|a, b| {
        let (ka, aa, la) = key(a.0, a.1);
        let (kb, ab, lb) = key(b.0, b.1);
        ka.cmp(&kb).then(aa.total_cmp(&ab)).then(la.total_cmp(&lb))
    });
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .context("building worker pool")?;
    // collect() keeps input order whatever the completion order
    let rows = pool.install(|| {
        cells
            .par_iter()
            .map(|&(k, f)| sweep_cell(cfg, &kind, k, f))
            .collect::<Result<Vec<_>, _>>()
    })?;
    for r in &rows {
        io.note(format!(
            "k={} A={} alpha={:?}: converged {} stable {}",
            r.k, r.amplitude, r.alpha, r.converged, r.stable
        ));
    }
    let mut buf = Vec::new();
    write_sweep_csv(&mut buf, &rows).context("formatting sweep")?;
    io.emit(std::str::from_utf8(&buf).expect("CSV is ASCII"))
}

pub fn seed(cfg: &RunConfig, io: &Io) -> Result<(), Failure> {
    let seed_cfg = cfg.seed.clone().unwrap_or_default();
    let params = cfg.params()?;
    let kind = cfg.kind()?;
    let x: State = attractor_seed(
        &kind,
        &params,
        seed_cfg.transient_periods * params.period,
        &state(seed_cfg.start),
        &cfg.integrator,
    )?;
    io.note(format!("seed: {x:?}"));
    io.emit(&to_json(&SeedFile {
        format_version: FORMAT_VERSION,
        kind,
        params,
        transient_periods: seed_cfg.transient_periods,
        x0: x.to_array(),
        height: height(&x),
    })?)
}
