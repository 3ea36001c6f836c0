//! Versioned output formats.
//!
//! CSV files start with a `# format_version: N` line followed by the header;
//! every JSON document has a top-level `format_version`. Floats in CSV are
//! written with 17 significant digits, JSON uses the shortest round-trip form.

use std::io::{BufRead, Write};

use anyhow::{bail, Context};
use kapitza_core::dynamics::{energy, height, state_to_cartesian, Params, State, SystemKind};
use kapitza_core::integrate::{StepControl, Trajectory};
use kapitza_core::orbits::{NewtonOptions, PeriodicOrbit};
use kapitza_core::verify::{AvgCompareReport, LemmaReport, RegionSpec};
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

pub const TRAJECTORY_HEADER: &str = "t,theta,phi,p_theta,p_phi,x,y,z,height,energy";
pub const SWEEP_HEADER: &str = "k,A,alpha,converged,stable,min_height,max_multiplier_modulus";

fn version_line(w: &mut impl Write) -> std::io::Result<()> {
    writeln!(w, "# format_version: {FORMAT_VERSION}")
}

/// `{:.16e}` gives 17 significant digits, enough to round-trip any f64.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_trajectory_csv(w: &mut impl Write, traj: &Trajectory) -> std::io::Result<()> {
    version_line(w)?;
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    for (t, x) in traj.iter() {
        let [cx, cy, cz] = state_to_cartesian(x, t, &traj.params);
        let row = [
            t,
            x.theta,
            x.phi,
            x.p_theta,
            x.p_phi,
            cx,
            cy,
            cz,
            height(x),
            energy(x),
        ];
        let cells: Vec<String> = row.iter().map(|v| num(*v)).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Check the version line and the header, returning the remaining lines.
fn versioned_lines(r: impl BufRead, header: &str) -> anyhow::Result<Vec<String>> {
    let mut lines = r.lines();
    let first = lines.next().context("empty file")??;
    let version = first
        .strip_prefix("# format_version:")
        .context("missing format_version line")?
        .trim()
        .parse::<u32>()
        .context("unreadable format_version")?;
    if version != FORMAT_VERSION {
        bail!("unsupported format_version {version}");
    }
    let head = lines.next().context("missing header")??;
    if head != header {
        bail!("unexpected header `{head}`");
    }
    Ok(lines.collect::<Result<_, _>>()?)
}

/// Rows of a trajectory CSV as `(t, state)`.
pub fn read_trajectory_csv(r: impl BufRead) -> anyhow::Result<Vec<(f64, State)>> {
    versioned_lines(r, TRAJECTORY_HEADER)?
        .iter()
        .enumerate()
        .map(|(i, line)| {
            let v: Vec<f64> = line
                .split(',')
                .map(str::parse)
                .collect::<Result<_, _>>()
                .with_context(|| format!("row {}", i + 1))?;
            if v.len() != 10 {
                bail!("row {} has {} columns", i + 1, v.len());
            }
            Ok((v[0], State::new(v[1], v[2], v[3], v[4])))
        })
        .collect()
}

/// Self-contained orbit record; enough to recompute the residual.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitFile {
    pub format_version: u32,
    pub kind: SystemKind,
    pub k: Option<u32>,
    pub params: Params,
    pub x0: [f64; 4],
    pub period: f64,
    pub residual: f64,
    /// `[re, im]` pairs, largest modulus first.
    pub multipliers: [[f64; 2]; 4],
    pub max_multiplier_modulus: f64,
    pub stable: bool,
    pub min_height: f64,
    pub max_energy: f64,
    pub iterations: usize,
    /// Integrator settings the residual was computed with.
    pub control: StepControl,
}

impl OrbitFile {
    pub fn new(orbit: &PeriodicOrbit, opts: &NewtonOptions) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            kind: orbit.kind,
            k: orbit.params.k(),
            params: orbit.params.clone(),
            x0: orbit.x0.to_array(),
            period: orbit.period,
            residual: orbit.residual,
            multipliers: orbit.multipliers.map(|z| [z.re, z.im]),
            max_multiplier_modulus: orbit.max_multiplier_modulus(),
            stable: orbit.stable,
            min_height: orbit.min_height,
            max_energy: orbit.max_energy,
            iterations: orbit.iterations,
            control: opts.control,
        }
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        check_json_version(text)?;
        Ok(serde_json::from_str(text)?)
    }
}

/// Reject documents whose `format_version` is missing or unknown before
/// looking at the rest of the schema.
pub fn check_json_version(text: &str) -> anyhow::Result<()> {
    let v: serde_json::Value = serde_json::from_str(text)?;
    match v.get("format_version").and_then(|v| v.as_u64()) {
        Some(n) if n == FORMAT_VERSION as u64 => Ok(()),
        Some(n) => bail!("unsupported format_version {n}"),
        None => bail!("missing format_version"),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LemmaFile {
    pub format_version: u32,
    pub params: Params,
    pub region: RegionSpec,
    pub all_pass: bool,
    pub reports: Vec<LemmaReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AvgFile {
    pub format_version: u32,
    pub params: Params,
    pub x0: [f64; 4],
    #[serde(flatten)]
    pub report: AvgCompareReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FloquetFile {
    pub format_version: u32,
    pub stored_residual: f64,
    pub recomputed_residual: f64,
    pub multipliers_fd: [[f64; 2]; 4],
    pub multipliers_var: [[f64; 2]; 4],
    pub moduli: [f64; 4],
    pub fd_var_difference: f64,
    pub determinant: f64,
    /// `exp(−2μT)`.
    pub liouville: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedFile {
    pub format_version: u32,
    pub kind: SystemKind,
    pub params: Params,
    pub transient_periods: f64,
    pub x0: [f64; 4],
    pub height: f64,
}

/// One sweep cell result.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub k: u32,
    pub amplitude: f64,
    pub alpha: Option<f64>,
    pub converged: bool,
    pub stable: bool,
    pub min_height: f64,
    pub max_multiplier_modulus: f64,
}

/// Rows are written in the given order; the caller sorts them. Missing
/// `alpha` and values of unconverged cells are written as `nan`.
pub fn write_sweep_csv(w: &mut impl Write, rows: &[SweepRow]) -> std::io::Result<()> {
    version_line(w)?;
    writeln!(w, "{SWEEP_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.k,
            num(r.amplitude),
            num(r.alpha.unwrap_or(f64::NAN)),
            r.converged,
            r.stable,
            num(r.min_height),
            num(r.max_multiplier_modulus)
        )?;
    }
    Ok(())
}

pub fn read_sweep_csv(r: impl BufRead) -> anyhow::Result<Vec<SweepRow>> {
    versioned_lines(r, SWEEP_HEADER)?
        .iter()
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 7 {
                bail!("sweep row `{line}` has {} columns", f.len());
            }
            let alpha: f64 = f[2].parse()?;
            Ok(SweepRow {
                k: f[0].parse()?,
                amplitude: f[1].parse()?,
                alpha: (!alpha.is_nan()).then_some(alpha),
                converged: f[3].parse()?,
                stable: f[4].parse()?,
                min_height: f[5].parse()?,
                max_multiplier_modulus: f[6].parse()?,
            })
        })
        .collect()
}

pub fn to_json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}
