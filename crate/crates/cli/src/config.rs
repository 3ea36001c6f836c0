//! JSON run configuration.

use std::path::Path;

use kapitza_core::dynamics::{BumpConfig, ForcingSpec, Params, State, SystemKind};
use kapitza_core::integrate::StepControl;
use kapitza_core::orbits::NewtonOptions;
use kapitza_core::verify::RegionSpec;
use serde::Deserialize;

use crate::failure::Failure;
use crate::output::FORMAT_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SystemName {
    #[default]
    Full,
    Modified,
    Averaged,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub a: f64,
    #[serde(default)]
    pub k: Option<u32>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(rename = "T")]
    pub period: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    pub c: f64,
    pub delta: f64,
    #[serde(rename = "Delta", default = "default_transition")]
    pub transition: f64,
}

fn default_transition() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(default)]
    pub t0: f64,
    pub t1: f64,
    pub x0: [f64; 4],
    /// Output spacing; every accepted step when absent.
    #[serde(default)]
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "strategy", rename_all = "lowercase", deny_unknown_fields)]
pub enum SeedStrategy {
    Explicit {
        x0: [f64; 4],
    },
    Attractor {
        #[serde(default = "default_transient")]
        transient_periods: f64,
        #[serde(default = "near_upright")]
        start: [f64; 4],
    },
    /// Averaged attractor followed by Newton continuation down the `k` list.
    Continuation {
        k_schedule: Vec<u32>,
        #[serde(default = "default_transient")]
        transient_periods: f64,
        #[serde(default = "near_upright")]
        start: [f64; 4],
    },
}

fn default_transient() -> f64 {
    100.0
}

fn near_upright() -> [f64; 4] {
    [0.01, 0.5 * std::f64::consts::PI - 0.01, 0.0, 0.0]
}

impl Default for SeedStrategy {
    fn default() -> Self {
        SeedStrategy::Attractor {
            transient_periods: default_transient(),
            start: near_upright(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitConfig {
    #[serde(default)]
    pub seed: SeedStrategy,
    #[serde(default)]
    pub newton: NewtonOptions,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaConfig {
    pub n: usize,
    pub seed: u64,
    #[serde(default = "default_phase_grid")]
    pub phase_grid: usize,
    #[serde(default = "all_lemmas")]
    pub ids: Vec<u8>,
}

fn default_phase_grid() -> usize {
    kapitza_core::verify::DEFAULT_PHASE_GRID
}

fn all_lemmas() -> Vec<u8> {
    vec![1, 2, 3, 4]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AvgConfig {
    pub x0: [f64; 4],
    /// Horizon in periods `T`.
    #[serde(default = "default_avg_periods")]
    pub periods: f64,
    pub epsilons: Vec<f64>,
    #[serde(default = "default_avg_samples")]
    pub samples: usize,
}

fn default_avg_periods() -> f64 {
    2.0
}

fn default_avg_samples() -> usize {
    4000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub k: Vec<u32>,
    pub forcings: Vec<ForcingSpec>,
    #[serde(default = "default_transient")]
    pub transient_periods: f64,
    #[serde(default = "near_upright")]
    pub start: [f64; 4],
    #[serde(default)]
    pub newton: NewtonOptions,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedConfig {
    #[serde(default = "default_transient")]
    pub transient_periods: f64,
    #[serde(default = "near_upright")]
    pub start: [f64; 4],
}

impl Default for SeedConfig {
    fn default() -> Self {
        Self {
            transient_periods: default_transient(),
            start: near_upright(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub format_version: Option<u32>,
    #[serde(default)]
    pub system: SystemName,
    pub params: ParamsConfig,
    #[serde(default)]
    pub forcing: Option<ForcingSpec>,
    #[serde(default)]
    pub region: Option<RegionConfig>,
    #[serde(default)]
    pub integrator: StepControl,
    #[serde(default)]
    pub simulate: Option<SimulateConfig>,
    #[serde(default)]
    pub orbit: Option<OrbitConfig>,
    #[serde(default)]
    pub lemma: Option<LemmaConfig>,
    #[serde(default)]
    pub avg: Option<AvgConfig>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub seed: Option<SeedConfig>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Parse and validate. serde errors carry line and column.
    pub fn parse(text: &str) -> Result<Self, Failure> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Failure::Config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), Failure> {
        if let Some(v) = self.format_version {
            if v != FORMAT_VERSION {
                return Err(Failure::Config(format!("unsupported format_version {v}")));
            }
        }
        self.params()?;
        self.integrator.validate()?;
        if let Some(r) = &self.region {
            RegionSpec::new(r.c, r.delta)?;
            if !(r.transition > 0.0) {
                return Err(Failure::Config(
                    "invalid parameter `Delta`: must be positive".into(),
                ));
            }
        }
        self.kind()?;
        Ok(())
    }

    pub fn params(&self) -> Result<Params, Failure> {
        let p = &self.params;
        let forcing = self.forcing.clone().unwrap_or(ForcingSpec::Zero);
        let params = match (p.k, p.epsilon) {
            (Some(_), Some(_)) => {
                return Err(Failure::Config(
                    "invalid parameter `k`: give either k or epsilon, not both".into(),
                ))
            }
            (Some(k), None) => Params::with_k(k, p.a, p.period, p.mu, forcing)?,
            (None, Some(eps)) => Params::new(p.a, eps, p.period, p.mu, forcing)?,
            // the averaged system does not use ε; any positive value will do
            (None, None) if self.system == SystemName::Averaged => {
                Params::with_k(1, p.a, p.period, p.mu, forcing)?
            }
            (None, None) => {
                return Err(Failure::Config(
                    "invalid parameter `k`: k or epsilon is required".into(),
                ))
            }
        };
        Ok(params)
    }

    pub fn region(&self) -> Result<RegionConfig, Failure> {
        self.region
            .ok_or_else(|| Failure::Config("missing `region` block".into()))
    }

    pub fn kind(&self) -> Result<SystemKind, Failure> {
        Ok(match self.system {
            SystemName::Full => SystemKind::Full,
            SystemName::Averaged => SystemKind::Averaged,
            SystemName::Modified => {
                let r = self.region.ok_or_else(|| {
                    Failure::Config(
                        "the modified system needs a `region` block for its cutoff".into(),
                    )
                })?;
                SystemKind::Modified {
                    bump: BumpConfig::new(r.c, r.delta, r.transition)?,
                }
            }
        })
    }

    pub fn block<'a, T>(&self, block: &'a Option<T>, name: &str) -> Result<&'a T, Failure> {
        block
            .as_ref()
            .ok_or_else(|| Failure::Config(format!("missing `{name}` block")))
    }
}

pub fn state(v: [f64; 4]) -> State {
    State::from_array(v)
}
